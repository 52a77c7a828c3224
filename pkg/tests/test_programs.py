"""Program fragments, guard checking, protocol tabulation."""

import pytest

from kbp.errors import BudgetError, ProgramError
from kbp.fixpoint import classify
from kbp.kernel import LocalState, System
from kbp.logic import Know, Not, VarEq
from kbp.parsing import parse_formula
from kbp.programs import (
    AgentProgram,
    GuardedBranch,
    Program,
    ProtocolTable,
    derive_protocol,
    eval_local,
    eval_test,
    first_match,
    is_standard,
    local_state_universe,
    validate_program,
    validate_test,
)
from kbp.transitions import ActionDef, Assign, Const, SendEffect, build_system


def guard(scn, text, agent):
    return parse_formula(
        text, agent_count=len(scn.decls.agent_names), self_agent=agent
    )


def test_is_standard(pg2_gamma):
    assert is_standard(pg2_gamma.program("pg1"))
    assert not is_standard(pg2_gamma.program("pg2"))


# ------------------------------------------------------------ guard checks

def test_temporal_operators_rejected_in_guards(pg1):
    errs = validate_test(pg1.decls, 0, guard(pg1, "F x=0", 0))
    assert any("temporal" in e for e in errs)


def test_outer_knowledge_must_be_own(two_agent):
    f = Know(1, VarEq("y", 0))  # K[2] used by agent 1
    errs = validate_test(two_agent.decls, 0, f)
    assert any("outermost" in e for e in errs)
    assert validate_test(two_agent.decls, 1, f) == []


def test_nested_knowledge_of_others_is_fine(two_agent):
    f = Know(0, Know(1, VarEq("y", 0)))
    assert validate_test(two_agent.decls, 0, f) == []


def test_changes_atom_rejected_in_guards(pg1):
    errs = validate_test(pg1.decls, 0, guard(pg1, "changes(y)<=1", 0))
    assert any("changes" in e for e in errs)


def test_plain_var_reads_must_be_local(two_agent):
    # y belongs to the actor; the observer may only read it under K
    f = guard(two_agent, "y=0", 1)
    errs = validate_test(two_agent.decls, 1, f)
    assert any("not local" in e for e in errs)
    assert validate_test(two_agent.decls, 1, Know(1, VarEq("y", 0))) == []


def test_unknown_variable_is_reported(pg1):
    errs = validate_test(pg1.decls, 0, VarEq("nope", 0))
    assert any("nope" in e for e in errs)


def test_log_atoms_must_be_own(diffuse):
    errs = validate_test(diffuse.decls, 0, guard(diffuse, "sent(2,3)", 0))
    assert any("another agent" in e for e in errs)
    assert validate_test(diffuse.decls, 1, guard(diffuse, "sent(2,3)", 1)) == []


def test_validate_program_agent_count(pg1):
    short = Program("short", ())
    errs = validate_program(pg1.decls, short, {})
    assert any("defines 0" in e for e in errs)


def test_validate_program_unknown_action(pg1):
    prog = Program("p", (AgentProgram((
        GuardedBranch(guard(pg1, "x=0", 0), ("mystery",)),
    )),))
    errs = validate_program(pg1.decls, prog, {})
    assert any("unknown action 'mystery'" in e for e in errs)


def test_validate_program_send_needs_logs_and_topology(pg1, diffuse):
    send_act = {"ping": ActionDef("ping", (SendEffect(1, Const(0)),))}
    prog = Program("p", (AgentProgram((
        GuardedBranch(guard(pg1, "true", 0), ("ping",)),
    )),))
    errs = validate_program(pg1.decls, prog, send_act)
    assert any("without message logs" in e for e in errs)

    # in the line topology 1-2-3, agent 1 cannot send to 3
    far = {"far": ActionDef("far", (SendEffect(2, Const(0)),))}
    prog3 = Program("p", (
        AgentProgram((GuardedBranch(guard(diffuse, "true", 0), ("far",)),)),
        AgentProgram(()),
        AgentProgram(()),
    ))
    errs = validate_program(diffuse.decls, prog3, far)
    assert any("not a neighbour" in e for e in errs)

    # send to self is always out
    self_act = {"echo": ActionDef("echo", (SendEffect(0, Const(0)),))}
    prog_self = Program("p", (
        AgentProgram((GuardedBranch(guard(diffuse, "true", 0), ("echo",)),)),
        AgentProgram(()),
        AgentProgram(()),
    ))
    errs = validate_program(diffuse.decls, prog_self, self_act)
    assert any("send to self" in e for e in errs)


def test_validate_program_assignment_ownership(two_agent):
    # observer writing the actor's variable
    act = {"poke": ActionDef("poke", (Assign("y", Const(1)),))}
    prog = Program("p", (
        AgentProgram(()),
        AgentProgram((GuardedBranch(guard(two_agent, "true", 1), ("poke",)),)),
    ))
    errs = validate_program(two_agent.decls, prog, act)
    assert any("owned by agent 1" in e for e in errs)


# ------------------------------------------------------------- evaluation

def test_eval_local_basics():
    loc = LocalState.make({"x": 0, "y": 2}, sent=((1, 5),), recv=())
    assert eval_local(0, loc, VarEq("x", 0))
    assert not eval_local(0, loc, VarEq("y", 0))
    assert eval_local(0, loc, parse_formula("sent(1,2)", agent_count=2))
    assert not eval_local(0, loc, parse_formula("received(1,2)", agent_count=2))


def test_eval_local_substitutes_know_value():
    loc = LocalState.make({"y": 0})
    k = Know(0, VarEq("x", 0))
    assert eval_local(0, loc, k, know_value=True)
    assert not eval_local(0, loc, k, know_value=False)
    assert eval_local(0, loc, Not(k), know_value=False)
    with pytest.raises(ProgramError):
        eval_local(0, loc, k)


def test_eval_test_know_free_ignores_system(pg1):
    loc = LocalState.make({"x": 0, "y": 3})
    assert eval_test(pg1.decls, System.of([]), 0, loc, VarEq("y", 3))


def test_eval_test_anchors_knowledge_at_matching_points(two_agent):
    cls = classify(two_agent.program("pg2"), two_agent.context("gammaPrime"))
    sysm = cls.systems[0]
    obs_local = LocalState.make({})
    k = Know(1, VarEq("y", 0))
    assert eval_test(two_agent.decls, sysm, 1, obs_local, k)

    cls2 = classify(two_agent.program("pg2"), two_agent.context("gammaPrimePrime"))
    assert not eval_test(two_agent.decls, cls2.systems[0], 1, obs_local, k)


def test_eval_test_off_system_is_vacuous_and_flagged(two_agent):
    cls = classify(two_agent.program("pg2"), two_agent.context("gammaPrime"))
    sysm = cls.systems[0]
    ghost = LocalState.make({"y": 4})  # actor state never reached there
    notes = []
    assert eval_test(two_agent.decls, sysm, 0, ghost,
                     Know(0, VarEq("x", 1)), diagnostics=notes)
    assert any("off-system" in n for n in notes)


def test_first_match_takes_first_true_guard(pg1):
    branches = (
        GuardedBranch(VarEq("y", 1), ("a",)),
        GuardedBranch(parse_formula("true", agent_count=1), ("b",)),
    )
    loc0 = LocalState.make({"x": 0, "y": 0})
    loc1 = LocalState.make({"x": 0, "y": 1})
    assert first_match(pg1.decls, None, 0, loc0, branches) == ("b",)
    assert first_match(pg1.decls, None, 0, loc1, branches) == ("a",)
    assert first_match(pg1.decls, None, 0, loc0, ()) == ()


# ------------------------------------------------------------- derivation

def test_local_state_universe_enumerates_domains(pg1):
    states = local_state_universe(pg1.decls, 0)
    assert len(states) == 12  # x in {0,1} times y in {0..5}
    assert len(set(states)) == 12
    with pytest.raises(BudgetError):
        local_state_universe(pg1.decls, 0, cap=5)


def test_local_state_universe_refuses_logs(diffuse):
    with pytest.raises(ProgramError):
        local_state_universe(diffuse.decls, 0)


def test_derive_standard_covers_full_universe(pg1):
    table = derive_protocol(pg1.decls, pg1.program("pg1"))
    assert len(table.domain(0)) == 12
    for local in table.domain(0):
        expect = ("inc_y",) if local.value("x") == 0 else ()
        assert table.actions_for(0, local) == expect


def test_derive_knowledge_based_requires_system(pg2_gamma_prime):
    with pytest.raises(ProgramError):
        derive_protocol(pg2_gamma_prime.decls, pg2_gamma_prime.program("pg2"))


def test_derived_tables_agree_where_defined(pg2_gamma):
    # knowledge of x=0 coincides with x=0 when x is observable
    cls = classify(pg2_gamma.program("pg2"), pg2_gamma.context("gamma"))
    assert cls.kind == "unique"
    kb_table = derive_protocol(pg2_gamma.decls, pg2_gamma.program("pg2"),
                               system=cls.systems[0])
    std_table = derive_protocol(pg2_gamma.decls, pg2_gamma.program("pg1"))
    assert kb_table.agrees_with(std_table)
    assert std_table.agrees_with(kb_table)


def test_agrees_with_detects_conflicts():
    a = LocalState.make({"v": 0})
    t1 = ProtocolTable.of([[(a, ("go",))]])
    t2 = ProtocolTable.of([[(a, ())]])
    t3 = ProtocolTable.of([[(LocalState.make({"v": 1}), ("go",))]])
    assert not t1.agrees_with(t2)
    assert t1.agrees_with(t3)  # disjoint domains never conflict
    assert not t1.agrees_with(ProtocolTable.of([[], []]))  # arity mismatch


def test_protocol_rebuild_reproduces_system(pg1):
    # deriving from a built system and rebuilding is a no-op
    table = derive_protocol(pg1.decls, pg1.program("pg1"))
    ctx = pg1.context("gamma")
    sysm = build_system(table, ctx)
    again = build_system(table, ctx)
    assert sysm == again
