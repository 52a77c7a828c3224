"""Finding the systems a knowledge-based program can represent.

A candidate system is consistent when rebuilding from the protocol it
induces returns the candidate itself. Two search strategies: exact
enumeration over knowledge-test assignments (bounded by a cell budget)
and fixed-point iteration from a seed system.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .errors import BudgetError, KbpError
from .kernel import Context, Declarations, GlobalState, LocalState, System
from .logic import Formula, Know, know_roots
from .programs import (GuardedBranch, Program, ProtocolTable, derive_protocol,
                       eval_local, first_match)
from .transitions import apply_transition, build_system, resolve_state_cap

DEFAULT_ENUM_BUDGET = 4096
DEFAULT_MAX_ITERS = 64

SEED_STANDARD_CLOSURE = "standard-closure"
SEED_ALL_KNOW_TRUE = "all-know-true"


class _ConstKnowProtocol:
    """Protocol view of a program with every knowledge test pinned."""

    def __init__(self, decls: Declarations, program: Program, know_value: bool):
        self.decls = decls
        self.program = program
        self.know_value = know_value

    def actions_for(self, agent: int, local: LocalState) -> tuple[str, ...]:
        return first_match(self.decls, None, agent, local,
                           self.program.agents[agent].branches,
                           know_value=self.know_value)


def represents(system: System, program: Program, context: Context,
               state_cap: Optional[int] = None) -> bool:
    """Does the program, read against this system, rebuild this system?"""
    decls = context.transition.decls
    protocol = derive_protocol(decls, program, system)
    return build_system(protocol, context, state_cap) == system


def seed_system(program: Program, context: Context, seed,
                state_cap: Optional[int] = None) -> System:
    """Resolve a seed: a System passes through, a strategy name builds one."""
    if isinstance(seed, System):
        return seed
    if seed == SEED_STANDARD_CLOSURE:
        know_value = False
    elif seed == SEED_ALL_KNOW_TRUE:
        know_value = True
    else:
        raise KbpError(f"unknown seed strategy {seed!r}")
    decls = context.transition.decls
    protocol = _ConstKnowProtocol(decls, program, know_value)
    return build_system(protocol, context, state_cap)


@dataclass
class IterateResult:
    kind: str  # "fixed-point" | "cycle" | "budget-exceeded"
    system: Optional[System]
    iterations: int
    trail: tuple[System, ...]
    cycle: tuple[System, ...] = ()
    diagnostics: list[str] = field(default_factory=list)


def fixpoint_iterate(program: Program, context: Context,
                     seed=SEED_STANDARD_CLOSURE,
                     max_iters: int = DEFAULT_MAX_ITERS,
                     state_cap: Optional[int] = None) -> IterateResult:
    """Iterate system -> rebuild until it stops moving.

    Detects revisited systems, reporting the cycle instead of looping.
    iterations counts rebuild applications.
    """
    decls = context.transition.decls
    diagnostics: list[str] = []
    current = seed_system(program, context, seed, state_cap)
    trail = [current]
    seen = {current: 0}
    for step in range(1, max_iters + 1):
        protocol = derive_protocol(decls, program, current,
                                   diagnostics=diagnostics)
        nxt = build_system(protocol, context, state_cap, diagnostics=diagnostics)
        if nxt == current:
            return IterateResult("fixed-point", current, step, tuple(trail),
                                 diagnostics=diagnostics)
        if nxt in seen:
            cyc = tuple(trail[seen[nxt]:])
            return IterateResult("cycle", None, step, tuple(trail), cyc,
                                 diagnostics)
        seen[nxt] = len(trail)
        trail.append(nxt)
        current = nxt
    return IterateResult("budget-exceeded", None, max_iters, tuple(trail),
                         diagnostics=diagnostics)


def _dedup(seq):
    out = []
    for x in seq:
        if x not in out:
            out.append(x)
    return out


def fixpoint_enumerate(program: Program, context: Context,
                       budget: int = DEFAULT_ENUM_BUDGET,
                       state_cap: Optional[int] = None) -> tuple[System, ...]:
    """Exactly the systems the program represents in the context.

    Walks the closure of states reachable under any branch choice, forms
    one boolean cell per (agent, knowledge test, closure local state),
    and keeps the assignments whose induced protocol rebuilds a system
    that really represents the program. Raises BudgetError once
    2^cells would exceed the budget.
    """
    cap = resolve_state_cap(state_cap)
    tau = context.transition
    decls = tau.decls
    env = context.env_protocol

    tests: list[tuple[Know, ...]] = []
    choice_lists: list[list[tuple[str, ...]]] = []
    for ap in program.agents:
        roots: list[Know] = []
        for b in ap.branches:
            for k in know_roots(b.guard):
                if k not in roots:
                    roots.append(k)
        tests.append(tuple(roots))
        choice_lists.append(_dedup([b.actions for b in ap.branches] + [()]))

    closure: set[GlobalState] = set()
    agent_locals: list[set[LocalState]] = [set() for _ in program.agents]

    def cell_count() -> int:
        return sum(len(agent_locals[i]) * len(tests[i])
                   for i in range(len(tests)))

    def check_budget() -> None:
        cells = cell_count()
        if 2 ** cells > budget:
            raise BudgetError(f"enumeration needs {cells} knowledge cells, "
                              f"2^{cells} assignments exceed budget {budget}")

    frontier: list[GlobalState] = []
    for s in context.initial_states:
        closure.add(s)
        frontier.append(s)
        for i in range(decls.agent_count):
            agent_locals[i].add(s.locals[i])
    check_budget()
    while frontier:
        s = frontier.pop()
        for env_choice in env.choices:
            for combo in product(*choice_lists):
                nxt = apply_transition(tau, (env_choice, combo), s)
                if nxt in closure:
                    continue
                closure.add(nxt)
                if len(closure) > cap:
                    raise BudgetError(f"state budget exceeded: more than {cap} "
                                      f"distinct states in the branch closure")
                frontier.append(nxt)
                for i in range(decls.agent_count):
                    agent_locals[i].add(nxt.locals[i])
                check_budget()

    sorted_locals = [sorted(agent_locals[i]) for i in range(len(tests))]
    cells: list[tuple[int, Know, LocalState]] = []
    for i in range(len(tests)):
        for t in tests[i]:
            for local in sorted_locals[i]:
                cells.append((i, t, local))

    def guard_value(agent: int, local: LocalState, f: Formula, lookup) -> bool:
        if isinstance(f, Know):
            return lookup[(agent, f, local)]
        from .logic import And, Bool, Implies, Not, Or, Received, Sent, VarEq
        if isinstance(f, Bool):
            return f.value
        if isinstance(f, VarEq):
            return local.value(f.name) == f.value
        if isinstance(f, Sent):
            return any(d == f.dest for d, _ in local.sent)
        if isinstance(f, Received):
            return any(src == f.source for src, _ in local.recv)
        if isinstance(f, Not):
            return not guard_value(agent, local, f.arg, lookup)
        if isinstance(f, And):
            return all(guard_value(agent, local, a, lookup) for a in f.args)
        if isinstance(f, Or):
            return any(guard_value(agent, local, a, lookup) for a in f.args)
        if isinstance(f, Implies):
            return (not guard_value(agent, local, f.left, lookup)
                    or guard_value(agent, local, f.right, lookup))
        raise KbpError(f"formula node not allowed in a guard: {f!r}")

    found: list[System] = []
    seen_candidates: set[System] = set()
    for bits in product((False, True), repeat=len(cells)):
        lookup = dict(zip(cells, bits))
        tables = []
        for i, ap in enumerate(program.agents):
            rows = []
            for local in sorted_locals[i]:
                acts: tuple[str, ...] = ()
                for branch in ap.branches:
                    if guard_value(i, local, branch.guard, lookup):
                        acts = branch.actions
                        break
                rows.append((local, acts))
            tables.append(rows)
        candidate = build_system(ProtocolTable.of(tables), context, state_cap)
        if candidate in seen_candidates:
            continue
        seen_candidates.add(candidate)
        if represents(candidate, program, context, state_cap):
            found.append(candidate)
    return tuple(sorted(found, key=lambda s: s.runs))


@dataclass
class Classification:
    """Outcome of looking for representing systems."""

    kind: str  # "none" | "unique" | "multiple" | "unknown"
    systems: tuple[System, ...]
    method: str  # "enumerate" | "iterate"
    exact: bool
    note: str = ""
    iterations: Optional[int] = None

    @property
    def count(self) -> Optional[int]:
        return len(self.systems) if self.exact else None


def classify(program: Program, context: Context,
             budget: int = DEFAULT_ENUM_BUDGET,
             state_cap: Optional[int] = None) -> Classification:
    """Enumerate when the cell budget allows, else iterate from both seeds.

    Seed agreement on a common fixed point is reported as unique but
    marked inexact; disagreement proves multiplicity.
    """
    try:
        systems = fixpoint_enumerate(program, context, budget, state_cap)
    except BudgetError as e:
        note = str(e)
        first = fixpoint_iterate(program, context, SEED_STANDARD_CLOSURE,
                                 state_cap=state_cap)
        if first.kind != "fixed-point":
            return Classification("unknown", (), "iterate", False,
                                  f"{note}; iteration from the all-tests-false "
                                  f"seed ended in {first.kind}",
                                  first.iterations)
        second = fixpoint_iterate(program, context, SEED_ALL_KNOW_TRUE,
                                  state_cap=state_cap)
        if second.kind == "fixed-point" and second.system == first.system:
            return Classification("unique", (first.system,), "iterate", False,
                                  f"{note}; both seeds converge to the same "
                                  f"fixed point", first.iterations)
        if second.kind == "fixed-point":
            return Classification("multiple", (first.system, second.system),
                                  "iterate", False,
                                  f"{note}; seeds converge to different fixed "
                                  f"points", first.iterations)
        return Classification("unknown", (first.system,), "iterate", False,
                              f"{note}; the all-tests-true seed ended in "
                              f"{second.kind}", first.iterations)
    if not systems:
        return Classification("none", (), "enumerate", True)
    kind = "unique" if len(systems) == 1 else "multiple"
    return Classification(kind, systems, "enumerate", True)
