"""Programs, protocols, and the derivation of one from the other.

A program is one list of guarded branches per agent; guards come from
the temporal-free test fragment and may mention knowledge. A protocol
is the compiled form: an explicit table from local states to action
lists. Knowledge tests only acquire a truth value against a candidate
system, so deriving a protocol from a knowledge-based program takes the
system as an input; standard programs derive the same table no matter
which system is supplied.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import TYPE_CHECKING, Iterable, Optional

from .errors import BudgetError, ProgramError
from .kernel import Declarations, LocalState, System, local_at, representative_points
from .logic import (Bool, ChangesAtMost, Evaluator, Formula, Know, Not, And,
                    Or, Implies, Received, Sent, VarEq, has_know, has_temporal)
from .parsing import unparse_formula

if TYPE_CHECKING:
    from .transitions import ActionDef


@dataclass(frozen=True)
class GuardedBranch:
    guard: Formula
    actions: tuple[str, ...]


@dataclass(frozen=True)
class AgentProgram:
    """Branches tried top to bottom; first true guard fires, else no-op."""

    branches: tuple[GuardedBranch, ...]


@dataclass(frozen=True)
class Program:
    name: str
    agents: tuple[AgentProgram, ...]


def is_standard(program: Program) -> bool:
    """A program is standard when no guard mentions knowledge."""
    return not any(has_know(b.guard)
                   for ap in program.agents for b in ap.branches)


@dataclass(frozen=True)
class ProtocolTable:
    """Explicit per-agent map from local state to an action-name list.

    An empty action tuple is the no-op. Local states outside the table
    are undefined; the system builder treats them as no-op and flags it.
    """

    agents: tuple[tuple[tuple[LocalState, tuple[str, ...]], ...], ...]
    _maps: tuple[dict, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_maps", tuple(dict(a) for a in self.agents))

    @staticmethod
    def of(tables: Iterable[Iterable[tuple[LocalState, tuple[str, ...]]]]) -> "ProtocolTable":
        return ProtocolTable(tuple(tuple(sorted(t)) for t in tables))

    def actions_for(self, agent: int, local: LocalState) -> Optional[tuple[str, ...]]:
        return self._maps[agent].get(local)

    def domain(self, agent: int) -> tuple[LocalState, ...]:
        return tuple(s for s, _ in self.agents[agent])

    def agrees_with(self, other: "ProtocolTable") -> bool:
        """Equal action lists wherever both tables are defined."""
        if len(self.agents) != len(other.agents):
            return False
        for i in range(len(self.agents)):
            for local, acts in self.agents[i]:
                theirs = other.actions_for(i, local)
                if theirs is not None and theirs != acts:
                    return False
        return True


def validate_test(decls: Declarations, agent: int, guard: Formula) -> list[str]:
    """Check a guard against the test fragment for the given agent."""
    errors: list[str] = []
    if has_temporal(guard):
        errors.append("temporal operator in guard")

    def walk(f: Formula, inside_know: bool) -> None:
        if isinstance(f, Know):
            if not inside_know and f.agent != agent:
                errors.append(
                    f"outermost knowledge operator must belong to agent {agent + 1}, "
                    f"found K[{f.agent + 1}]")
            walk(f.body, True)
        elif isinstance(f, ChangesAtMost):
            errors.append("changes() is not part of the guard fragment")
        elif isinstance(f, VarEq):
            if not inside_know:
                owner = None
                try:
                    owner = decls.owner(f.name)
                except Exception:
                    errors.append(f"unknown variable {f.name!r} in guard")
                if owner is not None and owner != agent:
                    errors.append(
                        f"guard atom {unparse_formula(f)} is not local to agent {agent + 1}")
            else:
                try:
                    decls.owner(f.name)
                except Exception:
                    errors.append(f"unknown variable {f.name!r} in guard")
        elif isinstance(f, (Sent, Received)):
            if not inside_know and f.agent != agent:
                errors.append(
                    f"guard atom {unparse_formula(f)} reads another agent's log")
        elif isinstance(f, Not):
            walk(f.arg, inside_know)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                walk(a, inside_know)
        elif isinstance(f, Implies):
            walk(f.left, inside_know)
            walk(f.right, inside_know)

    walk(guard, False)
    return errors


def validate_program(decls: Declarations, program: Program,
                     actions: dict[str, "ActionDef"]) -> list[str]:
    """All fragment, ownership, and topology checks; empty list = valid."""
    from .transitions import Assign, DropMessages, SendEffect, VarRef

    errors: list[str] = []
    if len(program.agents) != decls.agent_count:
        errors.append(f"program {program.name!r} defines {len(program.agents)} "
                      f"agents, scenario has {decls.agent_count}")
        return errors

    for i, ap in enumerate(program.agents):
        for bi, branch in enumerate(ap.branches):
            where = f"agent {i + 1} branch {bi + 1}"
            for msg in validate_test(decls, i, branch.guard):
                errors.append(f"{where}: {msg}")
            for name in branch.actions:
                if name not in actions:
                    errors.append(f"{where}: unknown action {name!r}")
                    continue
                for eff in actions[name].effects:
                    if isinstance(eff, DropMessages):
                        errors.append(f"{where}: drop effect is environment-only")
                    elif isinstance(eff, Assign):
                        owner = decls.owner(eff.var)
                        if owner not in ("env", i):
                            errors.append(f"{where}: action {name!r} assigns "
                                          f"{eff.var!r}, owned by agent {owner + 1}")
                    elif isinstance(eff, SendEffect):
                        if not decls.logs_enabled:
                            errors.append(f"{where}: send without message logs")
                        elif eff.dest == i:
                            errors.append(f"{where}: send to self")
                        elif eff.dest not in decls.neighbors(i):
                            errors.append(f"{where}: send target {eff.dest + 1} "
                                          f"is not a neighbour of agent {i + 1}")
                        if isinstance(eff.payload, VarRef):
                            owner = decls.owner(eff.payload.name)
                            if owner != i:
                                errors.append(f"{where}: send payload reads "
                                              f"non-local variable {eff.payload.name!r}")
    return errors


def eval_local(agent: int, local: LocalState, f: Formula,
               know_value: Optional[bool] = None) -> bool:
    """Evaluate a guard against a bare local state.

    know_value substitutes for every knowledge subformula; None means
    knowledge is not expected to occur.
    """
    if isinstance(f, Bool):
        return f.value
    if isinstance(f, VarEq):
        return local.value(f.name) == f.value
    if isinstance(f, Sent):
        return any(dest == f.dest for dest, _ in local.sent)
    if isinstance(f, Received):
        return any(src == f.source for src, _ in local.recv)
    if isinstance(f, Know):
        if know_value is None:
            raise ProgramError("knowledge test evaluated without a system")
        return know_value
    if isinstance(f, Not):
        return not eval_local(agent, local, f.arg, know_value)
    if isinstance(f, And):
        return all(eval_local(agent, local, a, know_value) for a in f.args)
    if isinstance(f, Or):
        return any(eval_local(agent, local, a, know_value) for a in f.args)
    if isinstance(f, Implies):
        return (not eval_local(agent, local, f.left, know_value)
                or eval_local(agent, local, f.right, know_value))
    raise ProgramError(f"formula node not allowed in a guard: {f!r}")


def eval_test(decls: Declarations, system: System, agent: int,
              local: LocalState, test: Formula,
              evaluator: Optional[Evaluator] = None,
              diagnostics: Optional[list[str]] = None) -> bool:
    """Truth of a guard for an agent in a given local state.

    Knowledge quantifies over the system's points with that local state.
    When the local state occurs nowhere in the system, knowledge is
    vacuously true and the fact is flagged in diagnostics.
    """
    if not has_know(test):
        return eval_local(agent, local, test)
    pts = evaluator.points() if evaluator is not None \
        else representative_points(system)
    anchor = None
    for p in pts:
        if local_at(p, agent) == local:
            anchor = p
            break
    if anchor is None:
        if diagnostics is not None:
            diagnostics.append(f"agent {agent + 1}: local state off-system, "
                               f"knowledge tests vacuously true")
        return eval_local(agent, local, test, know_value=True)
    ev = evaluator if evaluator is not None else Evaluator(decls, system)
    return ev.at(anchor, test)


def first_match(decls: Declarations, system: Optional[System], agent: int,
                local: LocalState, branches: tuple[GuardedBranch, ...],
                evaluator: Optional[Evaluator] = None,
                know_value: Optional[bool] = None,
                diagnostics: Optional[list[str]] = None) -> tuple[str, ...]:
    """Action list of the first branch whose guard holds; () when none do."""
    for branch in branches:
        if know_value is not None or system is None:
            hit = eval_local(agent, local, branch.guard, know_value)
        else:
            hit = eval_test(decls, system, agent, local, branch.guard,
                            evaluator, diagnostics)
        if hit:
            return branch.actions
    return ()


def local_state_universe(decls: Declarations, agent: int,
                         cap: int = 100_000) -> list[LocalState]:
    """Every well-formed local state of an agent, log-free scenarios only."""
    if decls.logs_enabled:
        raise ProgramError("local-state universe is unbounded once message "
                           "logs are enabled; derive from a system instead")
    var_decls = decls.agent_vars[agent]
    count = 1
    for d in var_decls:
        count *= len(d.domain)
    clocks: tuple[Optional[int], ...] = (None,)
    if decls.clock_enabled:
        clocks = tuple(range(decls.clock_cap + 1))
        count *= len(clocks)
    if count > cap:
        raise BudgetError(f"agent {agent + 1}: {count} local states exceed cap {cap}")
    names = [d.name for d in var_decls]
    out = []
    for values in product(*(d.domain for d in var_decls)):
        for clk in clocks:
            out.append(LocalState.make(zip(names, values), clock=clk))
    return sorted(out)


def derive_protocol(decls: Declarations, program: Program,
                    system: Optional[System] = None,
                    diagnostics: Optional[list[str]] = None,
                    cap: int = 100_000) -> ProtocolTable:
    """Compile a program into a protocol table.

    Standard programs need no system and are tabulated over the full
    local-state universe. Knowledge-based programs are tabulated over the
    local states occurring in the supplied candidate system.
    """
    standard = is_standard(program)
    if standard and not decls.logs_enabled:
        domains = [local_state_universe(decls, i, cap)
                   for i in range(decls.agent_count)]
        system = None
    elif system is None:
        kind = "standard program with message logs" if standard \
            else "knowledge-based program"
        raise ProgramError(f"{kind}: deriving a protocol requires a candidate system")
    else:
        states = system.states()
        domains = [sorted({s.locals[i] for s in states})
                   for i in range(decls.agent_count)]
    evaluator = Evaluator(decls, system) if system is not None else None
    tables = []
    for i, ap in enumerate(program.agents):
        rows = []
        for local in domains[i]:
            acts = first_match(decls, system, i, local, ap.branches,
                               evaluator=evaluator, diagnostics=diagnostics)
            rows.append((local, acts))
        tables.append(rows)
    return ProtocolTable.of(tables)
