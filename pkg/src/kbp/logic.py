"""Temporal-epistemic property language and its evaluator.

One AST serves both program guards (a temporal-free fragment) and
system-level specifications. Evaluation on lasso runs is exact: a
window of prefix + one cycle realises every reachable (state, suffix)
pair, so temporal operators are decided by inspecting finitely many
representative times.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import FormulaError
from .kernel import (Declarations, LassoRun, Point, System,
                     indistinguishable_points, representative,
                     representative_points, state_at, state_value)


class Formula:
    """Base class; all nodes are frozen dataclasses."""

    __slots__ = ()


@dataclass(frozen=True)
class Bool(Formula):
    value: bool


TRUE = Bool(True)
FALSE = Bool(False)


@dataclass(frozen=True)
class VarEq(Formula):
    """name = constant"""
    name: str
    value: int


@dataclass(frozen=True)
class ChangesAtMost(Formula):
    """changes(name) <= bound, against the tracked-change counter."""
    name: str
    bound: int


@dataclass(frozen=True)
class Sent(Formula):
    """Agent's send log has an entry to `dest` (0-based indices)."""
    agent: int
    dest: int


@dataclass(frozen=True)
class Received(Formula):
    """Agent's receive log has an entry from `source` (0-based)."""
    agent: int
    source: int


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    """Agent knows the body: true at all points it cannot distinguish."""
    agent: int
    body: Formula


@dataclass(frozen=True)
class Always(Formula):
    body: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    body: Formula


@dataclass(frozen=True)
class Next(Formula):
    body: Formula


@dataclass(frozen=True)
class Until(Formula):
    """Strong until: the right side must eventually hold."""
    left: Formula
    right: Formula


def subformulas(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, (And, Or)):
        for a in f.args:
            yield from subformulas(a)
    elif isinstance(f, Implies):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, Know):
        yield from subformulas(f.body)
    elif isinstance(f, (Always, Eventually, Next)):
        yield from subformulas(f.body)
    elif isinstance(f, Until):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def has_temporal(f: Formula) -> bool:
    return any(isinstance(g, (Always, Eventually, Next, Until))
               for g in subformulas(f))


def has_know(f: Formula) -> bool:
    return any(isinstance(g, Know) for g in subformulas(f))


def know_roots(f: Formula) -> tuple[Know, ...]:
    """Outermost Know-rooted subformulas, deduplicated, in discovery order."""
    out: list[Know] = []

    def walk(g: Formula) -> None:
        if isinstance(g, Know):
            if g not in out:
                out.append(g)
            return
        if isinstance(g, Not):
            walk(g.arg)
        elif isinstance(g, (And, Or)):
            for a in g.args:
                walk(a)
        elif isinstance(g, Implies):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Always, Eventually, Next)):
            walk(g.body)
        elif isinstance(g, Until):
            walk(g.left)
            walk(g.right)

    walk(f)
    return tuple(out)


def max_constant(f: Formula) -> int:
    """Largest numeric constant compared against anywhere in the formula."""
    best = 0
    for g in subformulas(f):
        if isinstance(g, VarEq):
            best = max(best, g.value)
        elif isinstance(g, ChangesAtMost):
            best = max(best, g.bound)
    return best


class Evaluator:
    """Memoizing evaluator for one system.

    Not thread-safe; build one per checking call.
    """

    def __init__(self, decls: Declarations, system: System):
        self.decls = decls
        self.system = system
        self._memo: dict[tuple[LassoRun, int, Formula], bool] = {}
        self._same_local: dict[tuple[int, object], tuple[Point, ...]] = {}
        self._points: tuple[Point, ...] | None = None

    def points(self) -> tuple[Point, ...]:
        if self._points is None:
            self._points = representative_points(self.system)
        return self._points

    def at(self, point: Point, formula: Formula) -> bool:
        point = representative(point)
        key = (point.run, point.time, formula)
        hit = self._memo.get(key)
        if hit is None:
            hit = self._eval(point, formula)
            self._memo[key] = hit
        return hit

    def _indist(self, agent: int, point: Point) -> tuple[Point, ...]:
        state = state_at(point.run, point.time)
        target = state.locals[agent]
        key = (agent, target)
        hit = self._same_local.get(key)
        if hit is None:
            hit = tuple(p for p in self.points()
                        if state_at(p.run, p.time).locals[agent] == target)
            self._same_local[key] = hit
        return hit

    def _eval(self, point: Point, f: Formula) -> bool:
        run, m = point.run, point.time
        if isinstance(f, Bool):
            return f.value
        if isinstance(f, VarEq):
            return state_value(self.decls, state_at(run, m), f.name) == f.value
        if isinstance(f, ChangesAtMost):
            return state_at(run, m).counter(f.name) <= f.bound
        if isinstance(f, Sent):
            log = state_at(run, m).locals[f.agent].sent
            return any(dest == f.dest for dest, _ in log)
        if isinstance(f, Received):
            log = state_at(run, m).locals[f.agent].recv
            return any(src == f.source for src, _ in log)
        if isinstance(f, Not):
            return not self.at(point, f.arg)
        if isinstance(f, And):
            return all(self.at(point, a) for a in f.args)
        if isinstance(f, Or):
            return any(self.at(point, a) for a in f.args)
        if isinstance(f, Implies):
            return (not self.at(point, f.left)) or self.at(point, f.right)
        if isinstance(f, Know):
            return all(self.at(p, f.body) for p in self._indist(f.agent, point))
        if isinstance(f, Next):
            return self.at(Point(run, m + 1), f.body)
        # temporal window: [m, max(m, prefix)+cycle) visits every suffix
        L, C = len(run.prefix), len(run.cycle)
        end = max(m, L) + C
        if isinstance(f, Always):
            return all(self.at(Point(run, t), f.body) for t in range(m, end))
        if isinstance(f, Eventually):
            return any(self.at(Point(run, t), f.body) for t in range(m, end))
        if isinstance(f, Until):
            # strong until: the earliest right-side occurrence in the
            # window decides it, since suffixes repeat beyond the window
            for t in range(m, end):
                if self.at(Point(run, t), f.right):
                    return all(self.at(Point(run, u), f.left) for u in range(m, t))
            return False
        raise FormulaError(f"unknown formula node {f!r}")


def eval_formula(decls: Declarations, system: System, point: Point,
                 formula: Formula) -> bool:
    """Truth value of the formula at a point of the system."""
    return Evaluator(decls, system).at(point, formula)


def valid_in_system(decls: Declarations, system: System, formula: Formula) -> bool:
    """True when the formula holds at every point of every run.

    An empty system yields True; callers that care flag the vacuity.
    """
    ev = Evaluator(decls, system)
    return all(ev.at(p, formula) for p in representative_points(system))


def run_satisfies(decls: Declarations, run: LassoRun, formula: Formula) -> bool:
    """Evaluate a knowledge-free formula on a single run at time 0."""
    if has_know(formula):
        raise FormulaError("run-based check: formula must not contain knowledge operators")
    system = System.of([run])
    return Evaluator(decls, system).at(Point(run, 0), formula)
