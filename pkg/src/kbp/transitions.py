"""Joint actions, transition application, and the system builder.

A round applies one environment choice plus every agent's protocol
action simultaneously: all expressions read the pre-state. Message
delivery is synchronous, one round after the send; the sender's log is
updated even when the environment drops the round's messages, the
recipient's only on delivery.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional, Union

from .errors import BudgetError, KbpError
from .kernel import (COUNTER_CAP, Context, Declarations, GlobalState,
                     LassoRun, LocalState, System, canonicalize, state_value)

if TYPE_CHECKING:
    from .programs import ProtocolTable

DEFAULT_STATE_CAP = 100_000


def resolve_state_cap(cap: Optional[int] = None) -> int:
    if cap is not None:
        return cap
    raw = os.environ.get("KBP_STATE_CAP")
    if raw is None:
        return DEFAULT_STATE_CAP
    try:
        return int(raw)
    except ValueError:
        raise KbpError(f"KBP_STATE_CAP must be an integer, got {raw!r}")


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Add:
    """Pre-state value of a variable plus a constant offset."""
    name: str
    offset: int


Expr = Union[Const, VarRef, Add]


def eval_expr(decls: Declarations, state: GlobalState, expr: Expr) -> int:
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, VarRef):
        return state_value(decls, state, expr.name)
    if isinstance(expr, Add):
        return state_value(decls, state, expr.name) + expr.offset
    raise KbpError(f"unknown expression {expr!r}")


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class SendEffect:
    dest: int
    payload: Expr


@dataclass(frozen=True)
class DropMessages:
    """Environment effect: this round's messages are not delivered."""


Effect = Union[Assign, SendEffect, DropMessages]


@dataclass(frozen=True)
class ActionDef:
    name: str
    effects: tuple[Effect, ...]


@dataclass(frozen=True)
class EnvProtocol:
    """Named nondeterministic choice over environment action lists."""

    name: str
    choices: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        if not self.choices:
            raise KbpError(f"environment protocol {self.name!r} has no choices")


NO_OP_ENV = EnvProtocol("no-op", ((),))


@dataclass(frozen=True)
class AdmissibilityPredicate:
    """Run filter, by name: 'all' admits everything; 'fair-delivery'
    requires every sent message to show up in the recipient's log."""

    name: str

    def __post_init__(self) -> None:
        if self.name not in ("all", "fair-delivery"):
            raise KbpError(f"unknown admissibility predicate {self.name!r}")


PSI_ALL = AdmissibilityPredicate("all")
PSI_FAIR = AdmissibilityPredicate("fair-delivery")


def psi_at_least_as_strict(a: AdmissibilityPredicate,
                           b: AdmissibilityPredicate) -> bool:
    return a == b or b.name == "all"


def admissible(decls: Declarations, run: LassoRun,
               psi: AdmissibilityPredicate) -> bool:
    if psi.name == "all":
        return True
    # logs are cumulative sets, so they are constant around the cycle;
    # one cycle state decides delivery of everything ever sent
    state = run.cycle[0]
    for i, loc in enumerate(state.locals):
        for dest, payload in loc.sent:
            if (i, payload) not in state.locals[dest].recv:
                return False
    return True


@dataclass(frozen=True)
class TransitionSpec:
    """Named action effects plus the declarations they act on."""

    name: str
    actions: tuple[tuple[str, ActionDef], ...]
    decls: Declarations

    @staticmethod
    def of(name: str, actions: dict[str, ActionDef],
           decls: Declarations) -> "TransitionSpec":
        return TransitionSpec(name, tuple(sorted(actions.items())), decls)

    def action(self, name: str) -> ActionDef:
        for k, v in self.actions:
            if k == name:
                return v
        raise KbpError(f"unknown action {name!r}")


JointAction = tuple[tuple[str, ...], tuple[tuple[str, ...], ...]]


def joint_actions(protocol: "ProtocolTable", env_protocol: EnvProtocol,
                  state: GlobalState,
                  diagnostics: Optional[list[str]] = None) -> tuple[JointAction, ...]:
    """All joint actions at a state: one per environment choice, since
    protocols are deterministic. Missing protocol entries act as no-op."""
    agent_choices = []
    for i, local in enumerate(state.locals):
        acts = protocol.actions_for(i, local)
        if acts is None:
            if diagnostics is not None:
                diagnostics.append(f"agent {i + 1}: local state outside protocol "
                                   f"domain, treated as no-op")
            acts = ()
        agent_choices.append(acts)
    agents = tuple(agent_choices)
    return tuple((env_choice, agents) for env_choice in env_protocol.choices)


def apply_transition(tau: TransitionSpec, joint: JointAction,
                     state: GlobalState) -> GlobalState:
    """Successor of a state under one joint action."""
    decls = tau.decls
    env_actions, agent_actions = joint

    assignments: dict[str, int] = {}
    sends: list[tuple[int, int, int]] = []  # (sender, dest, payload)
    dropped = False

    def run_effects(actor: Union[str, int], names: Iterable[str]) -> None:
        nonlocal dropped
        for name in names:
            for eff in tau.action(name).effects:
                if isinstance(eff, Assign):
                    decl = decls.decl(eff.var)
                    value = eval_expr(decls, state, eff.expr)
                    if decl.saturating:
                        value = decl.clamp(value)
                    elif value not in decl.domain:
                        raise KbpError(f"action {name!r}: {eff.var} := {value} "
                                       f"leaves the domain")
                    assignments[eff.var] = value
                elif isinstance(eff, SendEffect):
                    if not isinstance(actor, int):
                        raise KbpError(f"action {name!r}: environment cannot send")
                    sends.append((actor, eff.dest,
                                  eval_expr(decls, state, eff.payload)))
                elif isinstance(eff, DropMessages):
                    if isinstance(actor, int):
                        raise KbpError(f"action {name!r}: agents cannot drop messages")
                    dropped = True

    # environment first, agents in index order; later writes win
    run_effects("env", env_actions)
    for i, names in enumerate(agent_actions):
        run_effects(i, names)

    env_vars = dict(state.env.vars)
    local_vars = [dict(loc.vars) for loc in state.locals]
    for var, value in assignments.items():
        owner = decls.owner(var)
        if owner == "env":
            env_vars[var] = value
        else:
            local_vars[owner][var] = value

    sent_logs = [set(loc.sent) for loc in state.locals]
    recv_logs = [set(loc.recv) for loc in state.locals]
    for sender, dest, payload in sends:
        sent_logs[sender].add((dest, payload))
        if not dropped:
            recv_logs[dest].add((sender, payload))

    # observation mirrors read the post-round environment
    for m in decls.mirrors:
        local_vars[m.agent][m.var] = env_vars[m.of]

    new_locals = []
    for i, loc in enumerate(state.locals):
        clock = loc.clock
        if decls.clock_enabled and clock is not None:
            clock = min(clock + 1, decls.clock_cap)
        new_locals.append(LocalState.make(local_vars[i], sent_logs[i],
                                          recv_logs[i], clock))

    successor = GlobalState(
        env=LocalState.make(env_vars, clock=state.env.clock),
        locals=tuple(new_locals),
        counters=state.counters,
    )
    if state.counters:
        bumped = []
        for name, count in state.counters:
            if state_value(decls, successor, name) != state_value(decls, state, name):
                count = min(count + 1, COUNTER_CAP)
            bumped.append((name, count))
        successor = GlobalState(successor.env, successor.locals, tuple(bumped))
    return successor


def build_system(protocol: "ProtocolTable", context: Context,
                 state_cap: Optional[int] = None,
                 diagnostics: Optional[list[str]] = None) -> System:
    """All admissible runs of a protocol in a context.

    Depth-first search from each initial state; a branch closes into a
    lasso as soon as its successor already sits on the current path.
    Deterministic environments yield exactly one run per initial state.
    """
    cap = resolve_state_cap(state_cap)
    tau = context.transition
    env = context.env_protocol
    psi = context.admissibility
    decls = tau.decls

    def successors(s: GlobalState) -> list[GlobalState]:
        out: list[GlobalState] = []
        for joint in joint_actions(protocol, env, s, diagnostics):
            nxt = apply_transition(tau, joint, s)
            if nxt not in out:
                out.append(nxt)
        return out

    runs: set[LassoRun] = set()
    seen: set[GlobalState] = set()
    for init in context.initial_states:
        seen.add(init)
        if len(seen) > cap:
            raise BudgetError(f"state budget exceeded: more than {cap} distinct states")
        path = [init]
        pos = {init: 0}
        stack = [iter(successors(init))]
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                if path:
                    del pos[path.pop()]
                continue
            if nxt in pos:
                run = canonicalize(path[:pos[nxt]], path[pos[nxt]:])
                if admissible(decls, run, psi):
                    runs.add(run)
                continue
            seen.add(nxt)
            if len(seen) > cap:
                raise BudgetError(f"state budget exceeded: more than {cap} distinct states")
            pos[nxt] = len(path)
            path.append(nxt)
            stack.append(iter(successors(nxt)))
    return System.of(runs)
