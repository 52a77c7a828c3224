"""State model: variables, local/global states, lasso runs, systems, contexts.

Runs are ultimately periodic state sequences stored as (prefix, cycle).
Everything here is immutable and totally ordered so systems can be
deduplicated and reported in a canonical order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional

from .errors import KbpError

if TYPE_CHECKING:  # resolved by the transition layer, referenced here only
    from .transitions import AdmissibilityPredicate, EnvProtocol, TransitionSpec


@dataclass(frozen=True, order=True)
class VarDecl:
    """A finite-domain integer variable.

    saturating: assignments clamp into the domain instead of failing.
    tracked: the global state carries a change counter for this variable.
    init: default value used when the variable is not free in the
    initial-state universe.
    """

    name: str
    domain: tuple[int, ...]
    saturating: bool = False
    tracked: bool = False
    init: int = 0

    def __post_init__(self) -> None:
        if not self.domain:
            raise KbpError(f"variable {self.name}: empty domain")
        if tuple(sorted(set(self.domain))) != self.domain:
            raise KbpError(f"variable {self.name}: domain must be sorted and distinct")
        if self.init not in self.domain:
            raise KbpError(f"variable {self.name}: init {self.init} outside domain")

    def clamp(self, value: int) -> int:
        if value < self.domain[0]:
            return self.domain[0]
        if value > self.domain[-1]:
            return self.domain[-1]
        if value not in self.domain:
            raise KbpError(f"variable {self.name}: {value} not in domain")
        return value


@dataclass(frozen=True, order=True)
class Mirror:
    """Copy rule: after every transition, agent's `var` := env's `of`.

    A sentinel init value lets a mirror start out of sync, so the first
    observation happens on the first transition rather than at time 0.
    """

    agent: int
    var: str
    of: str


@dataclass(frozen=True, order=True)
class LocalState:
    """One agent's view: variable values plus optional logs and clock.

    vars is a name-sorted tuple of (name, value). sent holds
    (destination, payload) pairs, recv holds (sender, payload) pairs;
    both are sorted tuples acting as sets. clock is None when the
    scenario does not track rounds.
    """

    vars: tuple[tuple[str, int], ...] = ()
    sent: tuple[tuple[int, int], ...] = ()
    recv: tuple[tuple[int, int], ...] = ()
    clock: Optional[int] = None

    @staticmethod
    def make(values: dict[str, int] | Iterable[tuple[str, int]] = (),
             sent: Iterable[tuple[int, int]] = (),
             recv: Iterable[tuple[int, int]] = (),
             clock: Optional[int] = None) -> "LocalState":
        items = values.items() if isinstance(values, dict) else values
        return LocalState(
            vars=tuple(sorted(items)),
            sent=tuple(sorted(set(sent))),
            recv=tuple(sorted(set(recv))),
            clock=clock,
        )

    def value(self, name: str) -> int:
        for k, v in self.vars:
            if k == name:
                return v
        raise KbpError(f"no local variable {name!r}")

    def has_var(self, name: str) -> bool:
        return any(k == name for k, _ in self.vars)

    def with_vars(self, updates: dict[str, int]) -> "LocalState":
        merged = dict(self.vars)
        merged.update(updates)
        return LocalState(tuple(sorted(merged.items())), self.sent, self.recv, self.clock)


@dataclass(frozen=True, order=True)
class GlobalState:
    """Environment state, one local state per agent, and change counters.

    counters is a name-sorted tuple of (tracked variable, count) with
    counts capped at 2; two changes already falsify every bound the
    property language can express.
    """

    env: LocalState
    locals: tuple[LocalState, ...]
    counters: tuple[tuple[str, int], ...] = ()

    def counter(self, name: str) -> int:
        for k, v in self.counters:
            if k == name:
                return v
        raise KbpError(f"variable {name!r} is not tracked")


COUNTER_CAP = 2


@dataclass(frozen=True)
class Declarations:
    """Variable ownership and bookkeeping rules for one scenario."""

    agent_names: tuple[str, ...]
    env_vars: tuple[VarDecl, ...]
    agent_vars: tuple[tuple[VarDecl, ...], ...]
    mirrors: tuple[Mirror, ...] = ()
    logs_enabled: bool = False
    clock_enabled: bool = False
    clock_cap: int = 8
    # undirected neighbour pairs, 0-based, each stored both ways
    topology: Optional[frozenset[tuple[int, int]]] = None

    @property
    def agent_count(self) -> int:
        return len(self.agent_names)

    def owner(self, name: str) -> int | str:
        """Return 'env' or the 0-based owning agent index."""
        for d in self.env_vars:
            if d.name == name:
                return "env"
        for i, decls in enumerate(self.agent_vars):
            for d in decls:
                if d.name == name:
                    return i
        raise KbpError(f"unknown variable {name!r}")

    def decl(self, name: str) -> VarDecl:
        for d in self.env_vars:
            if d.name == name:
                return d
        for decls in self.agent_vars:
            for d in decls:
                if d.name == name:
                    return d
        raise KbpError(f"unknown variable {name!r}")

    def all_decls(self) -> tuple[VarDecl, ...]:
        out = list(self.env_vars)
        for decls in self.agent_vars:
            out.extend(decls)
        return tuple(out)

    def tracked_names(self) -> tuple[str, ...]:
        return tuple(sorted(d.name for d in self.all_decls() if d.tracked))

    def neighbors(self, agent: int) -> tuple[int, ...]:
        if self.topology is None:
            return tuple(i for i in range(self.agent_count) if i != agent)
        return tuple(sorted(j for (i, j) in self.topology if i == agent))


def state_value(decls: Declarations, state: GlobalState, name: str) -> int:
    """Value of a variable at a global state, resolved by ownership."""
    owner = decls.owner(name)
    if owner == "env":
        return state.env.value(name)
    return state.locals[owner].value(name)


@dataclass(frozen=True, order=True)
class LassoRun:
    """An ultimately periodic run: prefix then cycle forever.

    Construct through canonicalize() unless the caller already has the
    canonical form; equality is only meaningful on canonical runs.
    """

    prefix: tuple[GlobalState, ...]
    cycle: tuple[GlobalState, ...]

    def __post_init__(self) -> None:
        if not self.cycle:
            raise KbpError("lasso cycle must be nonempty")

    @property
    def total_len(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def fold(self, time: int) -> int:
        """Map a time to its representative in [0, total_len)."""
        if time < 0:
            raise KbpError("negative time")
        L = len(self.prefix)
        if time < L:
            return time
        return L + (time - L) % len(self.cycle)


def state_at(run: LassoRun, time: int) -> GlobalState:
    """State of the run at the given time."""
    t = run.fold(time)
    if t < len(run.prefix):
        return run.prefix[t]
    return run.cycle[t - len(run.prefix)]


def _primitive_cycle(cycle: tuple[GlobalState, ...]) -> tuple[GlobalState, ...]:
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle == cycle[:p] * (n // p):
            return cycle[:p]
    return cycle


def canonicalize(prefix: Iterable[GlobalState],
                 cycle: Iterable[GlobalState]) -> LassoRun:
    """Unique lasso form: primitive cycle, maximally absorbed prefix.

    While the last prefix state equals the last cycle state, the cycle is
    rotated so that state moves out of the prefix. Two (prefix, cycle)
    pairs denote the same infinite sequence iff they canonicalize
    identically.
    """
    pre = list(prefix)
    cyc = list(_primitive_cycle(tuple(cycle)))
    if not cyc:
        raise KbpError("lasso cycle must be nonempty")
    while pre and pre[-1] == cyc[-1]:
        cyc = [cyc[-1]] + cyc[:-1]
        pre.pop()
    return LassoRun(tuple(pre), tuple(cyc))


@dataclass(frozen=True, order=True)
class Point:
    run: LassoRun
    time: int


@dataclass(frozen=True)
class System:
    """A set of canonical lasso runs, stored sorted and deduplicated."""

    runs: tuple[LassoRun, ...]

    @staticmethod
    def of(runs: Iterable[LassoRun]) -> "System":
        return System(tuple(sorted(set(runs))))

    def __len__(self) -> int:
        return len(self.runs)

    def __contains__(self, run: LassoRun) -> bool:
        return run in self.runs

    def __hash__(self) -> int:
        return hash(self.runs)

    def is_subset(self, other: "System") -> bool:
        return set(self.runs) <= set(other.runs)

    def states(self) -> tuple[GlobalState, ...]:
        seen = set()
        for r in self.runs:
            seen.update(r.prefix)
            seen.update(r.cycle)
        return tuple(sorted(seen))


EMPTY_SYSTEM = System(())


def representative_points(system: System) -> tuple[Point, ...]:
    """One point per run per time in [0, prefix+cycle).

    Later times repeat both the state and the infinite suffix of some
    representative, so every formula value is realised here.
    """
    out = []
    for run in system.runs:
        for t in range(run.total_len):
            out.append(Point(run, t))
    return tuple(out)


def representative(point: Point) -> Point:
    return Point(point.run, point.run.fold(point.time))


def local_at(point: Point, agent: int) -> LocalState:
    return state_at(point.run, point.time).locals[agent]


def indistinguishable_points(system: System, agent: int,
                             point: Point) -> tuple[Point, ...]:
    """Representative points the agent cannot tell apart from `point`.

    Asynchronous view: any point of any run where the agent's local state
    coincides. Always contains the representative of `point` when the
    point belongs to the system.
    """
    target = local_at(point, agent)
    return tuple(p for p in representative_points(system)
                 if local_at(p, agent) == target)


@dataclass(frozen=True)
class Context:
    """Environment protocol, initial states, transition rule, run filter."""

    env_protocol: "EnvProtocol"
    initial_states: tuple[GlobalState, ...]
    transition: "TransitionSpec"
    admissibility: "AdmissibilityPredicate"

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial_states",
                           tuple(sorted(set(self.initial_states))))

    def with_initial_states(self, states: Iterable[GlobalState]) -> "Context":
        return Context(self.env_protocol, tuple(states),
                       self.transition, self.admissibility)


@dataclass(frozen=True)
class ContextFamily:
    """A context with the initial-state slot left open.

    state_universe is the set of admissible initial states; the family
    ranges over contexts whose initial states are drawn from it.
    """

    env_protocol: "EnvProtocol"
    transition: "TransitionSpec"
    admissibility: "AdmissibilityPredicate"
    state_universe: tuple[GlobalState, ...]

    def context(self, initial_states: Iterable[GlobalState]) -> Context:
        states = tuple(sorted(set(initial_states)))
        for s in states:
            if s not in self.state_universe:
                raise KbpError("initial state outside the family's state universe")
        return Context(self.env_protocol, states, self.transition, self.admissibility)


def refines(narrow: Context, wide: Context,
            psi_implies=None) -> bool:
    """True when `narrow` restricts `wide`: same machinery, fewer initial
    states, and an admissibility predicate at least as strict."""
    if narrow.env_protocol != wide.env_protocol:
        return False
    if narrow.transition != wide.transition:
        return False
    if psi_implies is None:
        from .transitions import psi_at_least_as_strict
        psi_implies = psi_at_least_as_strict
    if not psi_implies(narrow.admissibility, wide.admissibility):
        return False
    return set(narrow.initial_states) <= set(wide.initial_states)
