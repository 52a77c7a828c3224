"""Acceptance checks, one per numbered claim about the bundled scenarios.

Each test prints a single PASS/FAIL line. Run with -s to see them:

    pytest tests/test_acceptance.py -v -s

Every check is exact (discrete verdicts, no tolerances) and finishes in
well under ten seconds.
"""

import functools
import itertools
import subprocess
import sys
from pathlib import Path

from kbp.fixpoint import classify
from kbp.kernel import Point, representative_points, state_at, state_value
from kbp.logic import Evaluator, run_satisfies, valid_in_system
from kbp.parsing import parse_formula
from kbp.programs import derive_protocol
from kbp.speccheck import (
    FAMILY,
    KNOWLEDGE_BASED,
    MAXIMAL,
    PRESERVED,
    RUN_BASED,
    VIOLATED,
    Spec,
    maximally_satisfies,
    monotonicity_report,
    satisfies_given_init,
)
from kbp.transitions import build_system


def report(n, label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapped(*args, **kw):
            try:
                fn(*args, **kw)
            except BaseException:
                print(f"acceptance {n}: FAIL  {label}")
                raise
            print(f"acceptance {n}: PASS  {label}")
        return wrapped
    return deco


def nonempty_subsets(states):
    for n in range(1, len(states) + 1):
        yield from itertools.combinations(states, n)


@report(1, "one-counter build: silent run vs count-to-cap run")
def test_1_standard_build_dichotomy(pg1):
    table = derive_protocol(pg1.decls, pg1.program("pg1"))
    sysm = build_system(table, pg1.context("gamma"))
    assert len(sysm.runs) == 2
    by_x = {state_value(pg1.decls, state_at(r, 0), "x"): r for r in sysm.runs}
    assert set(by_x) == {0, 1}
    still = by_x[1]
    for t in range(still.total_len + 3):
        assert state_value(pg1.decls, state_at(still, t), "y") == 0
    counting = by_x[0]
    ys = [state_value(pg1.decls, state_at(counting, t), "y") for t in range(8)]
    assert ys == [0, 1, 2, 3, 4, 5, 5, 5]
    assert state_value(pg1.decls, state_at(counting, 10_000), "y") == 5


@report(2, "knowledge guard collapses to the plain guard when the variable is visible")
def test_2_knowledge_program_reduces(pg2_gamma):
    scn = pg2_gamma
    cls = classify(scn.program("pg2"), scn.context("gamma"))
    assert cls.kind == "unique"
    fixed = cls.systems[0]
    kb = derive_protocol(scn.decls, scn.program("pg2"), system=fixed)
    std = derive_protocol(scn.decls, scn.program("pg1"))
    assert kb.agrees_with(std)
    reachable = {state_at(run, t).locals[0]
                 for run in fixed.runs for t in range(run.total_len)}
    assert reachable
    for local in reachable:
        assert kb.actions_for(0, local) == std.actions_for(0, local)


@report(3, "hidden variable freezes the counter; a one-state start releases it")
def test_3_blind_counter_contexts(pg2_gamma_prime):
    scn = pg2_gamma_prime
    cls = classify(scn.program("pg2"), scn.context("gammaPrime"))
    assert cls.kind == "unique"
    fixed = cls.systems[0]
    assert len(fixed.runs) == len(scn.context("gammaPrime").initial_states)
    for run in fixed.runs:
        assert (len(run.prefix), len(run.cycle)) == (0, 1)
    knows_x0 = parse_formula("K[1] x=0", agent_count=1)
    ev = Evaluator(scn.decls, fixed)
    assert all(not ev.at(p, knows_x0) for p in representative_points(fixed))

    cls2 = classify(scn.program("pg2"), scn.context("gammaPrimePrime"))
    assert cls2.kind == "unique"
    single = cls2.systems[0]
    assert len(single.runs) == 1
    assert run_satisfies(scn.decls, single.runs[0],
                         scn.formula("eventually_y1"))


@report(4, "start-set strengthening flips whole-set verdicts, never subset-closed ones")
def test_4_monotonicity_table(pg2_gamma_prime, pg3):
    cases = ((pg2_gamma_prime, "pg2", "never_y1"),
             (pg3, "pg3", "eventually_y1"))
    for scn, prog, fname in cases:
        spec = Spec(fname, RUN_BASED, scn.formula(fname))
        rep = monotonicity_report(scn.program(prog), spec, scn.family("fam"),
                                  scn.init_condition("INIT1"),
                                  scn.init_condition("INIT2"))
        assert rep.cell(MAXIMAL, "INIT1").holds
        assert not rep.cell(MAXIMAL, "INIT2").holds
        assert rep.flags[MAXIMAL] == VIOLATED
        assert not rep.cell(FAMILY, "INIT1").holds
        assert not rep.cell(FAMILY, "INIT2").holds
        assert rep.flags[FAMILY] == PRESERVED
        witness = rep.cell(FAMILY, "INIT1").witness
        assert witness is not None and witness.subset is not None
        (only,) = witness.subset
        assert state_value(scn.decls, only, "x") == 0
        assert state_value(scn.decls, only, "y") == 0


@report(5, "observer spec: whole-set verdict flips under strengthening, subset-closed never held")
def test_5_two_agent_observer_spec(two_agent):
    scn = two_agent
    prog = scn.program("pg2")
    spec = Spec("observer_counts_on_y0", KNOWLEDGE_BASED,
                scn.formula("observer_counts_on_y0"))
    fam = scn.family("fam")
    init1 = scn.init_condition("INIT1")
    init2 = scn.init_condition("INIT2")
    assert maximally_satisfies(prog, spec, fam, init1).holds
    assert not maximally_satisfies(prog, spec, fam, init2).holds
    assert not satisfies_given_init(prog, spec, fam, init2).holds
    # the one-state subcontext sets the counter in motion, so the
    # subset-closed notion cannot hold even under the loose start
    v1 = satisfies_given_init(prog, spec, fam, init1)
    assert not v1.holds
    assert v1.witness is not None and v1.witness.subset is not None
    (only,) = v1.witness.subset
    assert state_value(scn.decls, only, "x") == 0
    assert state_value(scn.decls, only, "y") == 0


@report(6, "run sets shrink with the start set for fixed protocols, not for knowledge programs")
def test_6_run_set_inclusion(pg1, diffuse, pg2_gamma_prime):
    table = derive_protocol(pg1.decls, pg1.program("pg1"))
    gamma = pg1.context("gamma")
    built = {sub: build_system(table, gamma.with_initial_states(sub))
             for sub in nonempty_subsets(gamma.initial_states)}
    for small, big in itertools.product(built, built):
        if set(small) <= set(big):
            assert built[small].is_subset(built[big])

    cls = classify(diffuse.program("diffuse"), diffuse.context("gamma1"))
    line_table = derive_protocol(diffuse.decls, diffuse.program("diffuse"),
                                 system=cls.systems[0])
    g1 = diffuse.context("gamma1")
    threes = g1.initial_states[:3]
    line_built = {sub: build_system(line_table, g1.with_initial_states(sub))
                  for sub in nonempty_subsets(threes)}
    for small, big in itertools.product(line_built, line_built):
        if set(small) <= set(big):
            assert line_built[small].is_subset(line_built[big])

    # knowledge program: shrinking the start set changes what the agent
    # knows, so a run appears that the wider context never had
    scn = pg2_gamma_prime
    narrow_ctx = scn.context("gammaPrimePrime")
    wide_ctx = scn.context("gammaPrime")
    assert set(narrow_ctx.initial_states) <= set(wide_ctx.initial_states)
    narrow = classify(scn.program("pg2"), narrow_ctx).systems[0]
    wide = classify(scn.program("pg2"), wide_ctx).systems[0]
    assert not narrow.is_subset(wide)


@report(7, "three-process line: run counts, relay timing, and who ends up knowing")
def test_7_broadcast_line(diffuse):
    scn = diffuse
    cls1 = classify(scn.program("diffuse"), scn.context("gamma1"))
    assert cls1.kind == "unique"
    sys1 = cls1.systems[0]
    assert len(sys1.runs) == 8
    for run in sys1.runs:
        x1 = state_value(scn.decls, state_at(run, 0), "x1")
        # left end sends in round 1, middle copies in round 2, right end
        # copies in round 3, and the copies stick
        assert state_value(scn.decls, state_at(run, 2), "x2") == x1
        assert state_value(scn.decls, state_at(run, 3), "x3") == x1
        assert state_value(scn.decls, state_at(run, 10_000), "x2") == x1
        assert state_value(scn.decls, state_at(run, 10_000), "x3") == x1
    ev1 = Evaluator(scn.decls, sys1)
    sent12 = parse_formula("sent(1,2)", agent_count=3)
    assert all(ev1.at(Point(run, 1), sent12) for run in sys1.runs)

    cls2 = classify(scn.program("diffuse"), scn.context("gamma2"))
    assert cls2.kind == "unique"
    sys2 = cls2.systems[0]
    assert len(sys2.runs) == 4

    for name in ("copies_settle_once", "source_never_changes",
                 "everyone_converges"):
        f = scn.formula(name)
        for sysm in (sys1, sys2):
            assert all(run_satisfies(scn.decls, run, f) for run in sysm.runs)

    relay = scn.formula("middle_tells_right")
    assert all(run_satisfies(scn.decls, run, relay) for run in sys1.runs)
    assert not any(run_satisfies(scn.decls, run, relay) for run in sys2.runs)

    learn = scn.formula("everyone_learns")
    assert valid_in_system(scn.decls, sys1, learn)
    assert valid_in_system(scn.decls, sys2, learn)


@report(8, "muddy foreheads: the muddy learn it, exactly when the count says")
def test_8_muddy_children(muddy):
    scn = muddy
    cls = classify(scn.program("muddy"), scn.context("father_somebody"))
    assert cls.kind == "unique"
    fixed = cls.systems[0]
    ev = Evaluator(scn.decls, fixed)
    knows_own = {i: parse_formula(f"K[{i + 1}] mud{i + 1}=1", agent_count=3)
                 for i in range(3)}
    for run in fixed.runs:
        init = state_at(run, 0)
        dirty = [i for i in range(3)
                 if state_value(scn.decls, init, f"mud{i + 1}") == 1]
        for i in dirty:
            true_at = [t for t in range(run.total_len)
                       if ev.at(Point(run, t), knows_own[i])]
            assert true_at, (i, run)
            assert min(true_at) == len(dirty)

    cls1 = classify(scn.program("muddy"), scn.context("father_child1"))
    assert cls1.kind == "unique"
    named = cls1.systems[0]
    ev1 = Evaluator(scn.decls, named)
    for run in named.runs:
        init = state_at(run, 0)
        for i in (1, 2):
            if state_value(scn.decls, init, f"mud{i + 1}") == 1:
                assert not any(ev1.at(Point(run, t), knows_own[i])
                               for t in range(run.total_len))


@report(9, "law-level suites run standalone and green")
def test_9_property_suites_standalone():
    here = Path(__file__).resolve().parent
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(here / "test_properties.py"),
         "-q", "-p", "no:cacheprovider"],
        cwd=str(here.parent), capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stdout + proc.stderr
