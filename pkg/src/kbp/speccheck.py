"""Satisfaction of specifications by programs, under two notions.

A run-based spec is a knowledge-free formula every run must satisfy
from time 0. A knowledge-based spec must be valid at every point of the
system. Both quantify over every system the program represents in the
context.

The family notion quantifies further: over every context the family
offers whose nonempty initial-state set refines the given condition.
The maximal notion pins the initial states to exactly the condition's
states. The family notion is preserved under strengthening the
condition by construction; the maximal notion is not, and
monotonicity_report makes the difference observable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from .errors import BudgetError, FormulaError, KbpError, UndecidedError
from .fixpoint import Classification, classify
from .kernel import (Context, ContextFamily, Declarations, GlobalState,
                     LassoRun, Point, System, representative_points,
                     state_value)
from .logic import And, Bool, Evaluator, Formula, VarEq, has_know, run_satisfies
from .programs import Program

RUN_BASED = "run-based"
KNOWLEDGE_BASED = "knowledge-based"


@dataclass(frozen=True)
class Spec:
    name: str
    kind: str
    formula: Formula

    def __post_init__(self) -> None:
        if self.kind not in (RUN_BASED, KNOWLEDGE_BASED):
            raise KbpError(f"spec kind must be {RUN_BASED!r} or "
                           f"{KNOWLEDGE_BASED!r}, got {self.kind!r}")
        if self.kind == RUN_BASED and has_know(self.formula):
            raise FormulaError(f"spec {self.name!r}: run-based specs cannot "
                               f"use knowledge operators")


@dataclass(frozen=True)
class InitCondition:
    """A set of admissible initial states, by predicate or by listing.

    The predicate form is a conjunction of variable comparisons applied
    to a family's state universe.
    """

    name: str
    where: Optional[Formula] = None
    explicit: Optional[tuple[GlobalState, ...]] = None

    def __post_init__(self) -> None:
        if (self.where is None) == (self.explicit is None):
            raise KbpError(f"init condition {self.name!r}: give exactly one "
                           f"of a predicate or an explicit state list")
        if self.where is not None:
            for node in _conjuncts(self.where):
                if not isinstance(node, (VarEq, Bool)):
                    raise KbpError(f"init condition {self.name!r}: predicate "
                                   f"must be a conjunction of comparisons")

    def states(self, decls: Declarations,
               universe: tuple[GlobalState, ...]) -> tuple[GlobalState, ...]:
        if self.explicit is not None:
            for s in self.explicit:
                if s not in universe:
                    raise KbpError(f"init condition {self.name!r}: explicit "
                                   f"state outside the state universe")
            return tuple(sorted(set(self.explicit)))
        out = []
        for s in universe:
            if all(state_value(decls, s, a.name) == a.value
                   for a in _conjuncts(self.where) if isinstance(a, VarEq)):
                if all(a.value for a in _conjuncts(self.where)
                       if isinstance(a, Bool)):
                    out.append(s)
        return tuple(sorted(out))


def _conjuncts(f: Formula):
    if isinstance(f, And):
        for a in f.args:
            yield from _conjuncts(a)
    else:
        yield f


@dataclass(frozen=True)
class Witness:
    """Where a check failed: a run, a time, and (for the family notion)
    the initial-state subset whose context produced the failure."""

    run: LassoRun
    time: int
    subset: Optional[tuple[GlobalState, ...]] = None


@dataclass(frozen=True)
class SatisfactionVerdict:
    holds: bool
    vacuous: bool = False
    witness: Optional[Witness] = None
    note: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _check_systems(decls: Declarations, classification: Classification,
                   spec: Spec) -> SatisfactionVerdict:
    note = classification.note
    if classification.kind == "none":
        return SatisfactionVerdict(True, vacuous=True,
                                   note="no representing system")
    for system in classification.systems:
        if spec.kind == RUN_BASED:
            for run in system.runs:
                if not run_satisfies(decls, run, spec.formula):
                    return SatisfactionVerdict(False, witness=Witness(run, 0),
                                               note=note)
        else:
            ev = Evaluator(decls, system)
            for p in representative_points(system):
                if not ev.at(p, spec.formula):
                    return SatisfactionVerdict(False,
                                               witness=Witness(p.run, p.time),
                                               note=note)
    vacuous = all(len(s) == 0 for s in classification.systems)
    return SatisfactionVerdict(True, vacuous=vacuous, note=note)


def program_satisfies(program: Program, spec: Spec, context: Context,
                      budget: int = 4096,
                      state_cap: Optional[int] = None) -> SatisfactionVerdict:
    """Does every system the program represents here satisfy the spec?

    Raises UndecidedError when the representing systems cannot be pinned
    down within budget.
    """
    classification = classify(program, context, budget, state_cap)
    if classification.kind == "unknown":
        raise UndecidedError(f"representing systems undecided within budget: "
                             f"{classification.note}")
    decls = context.transition.decls
    return _check_systems(decls, classification, spec)


def is_strengthening(decls: Declarations, stronger: InitCondition,
                     weaker: InitCondition, family: ContextFamily) -> bool:
    """stronger admits a subset of weaker's states over the universe."""
    a = set(stronger.states(decls, family.state_universe))
    b = set(weaker.states(decls, family.state_universe))
    return a <= b


SUBSET_CAP = 12


def satisfies_given_init(program: Program, spec: Spec, family: ContextFamily,
                         init: InitCondition, budget: int = 4096,
                         state_cap: Optional[int] = None) -> SatisfactionVerdict:
    """Family notion: the spec must hold in every context drawn from the
    family whose nonempty initial-state set refines the condition.

    Subsets are tried smallest first, in state order, so a failure
    reports the canonically least failing subset.
    """
    decls = family.transition.decls
    base = init.states(decls, family.state_universe)
    if not base:
        return SatisfactionVerdict(True, vacuous=True,
                                   note="condition admits no initial states")
    if len(base) > SUBSET_CAP:
        raise BudgetError(f"family check over {len(base)} initial states "
                          f"needs 2^{len(base)} contexts; cap is 2^{SUBSET_CAP}")
    for size in range(1, len(base) + 1):
        for subset in combinations(base, size):
            context = family.context(subset)
            verdict = program_satisfies(program, spec, context, budget, state_cap)
            if not verdict.holds:
                w = verdict.witness
                witness = Witness(w.run, w.time, subset) if w else None
                return SatisfactionVerdict(False, witness=witness,
                                           note=f"fails for a context with "
                                                f"{size} initial state(s)")
    return SatisfactionVerdict(True)


def maximally_satisfies(program: Program, spec: Spec, family: ContextFamily,
                        init: InitCondition, budget: int = 4096,
                        state_cap: Optional[int] = None) -> SatisfactionVerdict:
    """Maximal notion: check only the context whose initial states are
    exactly the condition's states."""
    decls = family.transition.decls
    base = init.states(decls, family.state_universe)
    context = family.context(base)
    verdict = program_satisfies(program, spec, context, budget, state_cap)
    if verdict.witness is not None:
        witness = Witness(verdict.witness.run, verdict.witness.time, base)
        return SatisfactionVerdict(verdict.holds, verdict.vacuous, witness,
                                   verdict.note)
    if not base:
        return SatisfactionVerdict(verdict.holds, True, None,
                                   "condition admits no initial states")
    return verdict


FAMILY = "family"
MAXIMAL = "maximal"

PRESERVED = "preserved"
VIOLATED = "violated"


@dataclass
class MonotonicityReport:
    """Satisfaction under a condition and a strengthening of it, for both
    notions, with a preserved/violated flag per notion.

    Monotonicity means a verdict that holds keeps holding when the
    condition is strengthened; a true-then-false pair violates it.
    """

    weaker: str
    stronger: str
    cells: dict[tuple[str, str], SatisfactionVerdict] = field(default_factory=dict)
    flags: dict[str, str] = field(default_factory=dict)

    def cell(self, notion: str, init_name: str) -> SatisfactionVerdict:
        return self.cells[(notion, init_name)]


def monotonicity_report(program: Program, spec: Spec, family: ContextFamily,
                        weaker: InitCondition, stronger: InitCondition,
                        budget: int = 4096,
                        state_cap: Optional[int] = None) -> MonotonicityReport:
    decls = family.transition.decls
    if not is_strengthening(decls, stronger, weaker, family):
        raise KbpError(f"{stronger.name!r} is not a strengthening of "
                       f"{weaker.name!r} over this family")
    report = MonotonicityReport(weaker.name, stronger.name)
    for notion, check in ((FAMILY, satisfies_given_init),
                          (MAXIMAL, maximally_satisfies)):
        v_weak = check(program, spec, family, weaker, budget, state_cap)
        v_strong = check(program, spec, family, stronger, budget, state_cap)
        report.cells[(notion, weaker.name)] = v_weak
        report.cells[(notion, stronger.name)] = v_strong
        report.flags[notion] = (VIOLATED if v_weak.holds and not v_strong.holds
                                else PRESERVED)
    return report
