"""Scenario documents: loading, validation, and canonical emission.

A scenario file (.kbp.json) declares agents, variables, actions, named
environment protocols, programs, formulas, initial-state conditions,
contexts, and context families. Loading compiles everything to the core
types, expanding branch macros into plain guarded branches; emitting
produces the canonical fully-expanded form, which reloads to an equal
document.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Optional, Union

from .errors import KbpError, ScenarioError
from .kernel import (Context, ContextFamily, Declarations, GlobalState,
                     LassoRun, LocalState, Mirror, System, VarDecl)
from .logic import And, Formula, Know, Not, Or, VarEq
from .parsing import parse_formula, unparse_formula
from .programs import AgentProgram, GuardedBranch, Program, validate_program
from .speccheck import InitCondition
from .transitions import (ActionDef, Add, AdmissibilityPredicate, Assign,
                          Const, DropMessages, EnvProtocol, Expr, SendEffect,
                          TransitionSpec, VarRef)

FORMAT_NAME = "kbp-scenario"
FORMAT_VERSION = 1

BUNDLED_NAMES = (
    "pg1",
    "pg2_gamma",
    "pg2_gamma_prime",
    "pg3",
    "pg2_two_agent",
    "diffuse_line3",
    "muddy_children_n3",
)


@dataclass
class Scenario:
    name: str
    title: str
    decls: Declarations
    tau: TransitionSpec
    env_protocols: dict[str, EnvProtocol]
    programs: dict[str, Program]
    formulas: dict[str, Formula]
    init_conditions: dict[str, InitCondition]
    contexts: dict[str, Context]
    families: dict[str, ContextFamily]
    state_universe: tuple[GlobalState, ...]
    free_vars: tuple[str, ...]

    def _pick(self, table: dict, kind: str, name: str):
        if name not in table:
            known = ", ".join(sorted(table)) or "none"
            raise ScenarioError(f"{self.name}: unknown {kind} {name!r} "
                                f"(available: {known})")
        return table[name]

    def context(self, name: str) -> Context:
        return self._pick(self.contexts, "context", name)

    def family(self, name: str) -> ContextFamily:
        return self._pick(self.families, "family", name)

    def program(self, name: str) -> Program:
        return self._pick(self.programs, "program", name)

    def formula(self, name: str) -> Formula:
        return self._pick(self.formulas, "formula", name)

    def init_condition(self, name: str) -> InitCondition:
        return self._pick(self.init_conditions, "init condition", name)


def _err(path: str, message: str) -> ScenarioError:
    return ScenarioError(f"{path}: {message}")


def _expect(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise _err(path, message)


def _parse_domain(raw, path: str) -> tuple[int, ...]:
    if isinstance(raw, str):
        raise _err(path, f"domain {raw!r} is not finite; list the values or "
                         f"use {{\"range\": [lo, hi]}}")
    if isinstance(raw, dict):
        _expect(set(raw) == {"range"}, path, "domain object must be a range")
        lo, hi = raw["range"]
        _expect(isinstance(lo, int) and isinstance(hi, int) and lo <= hi,
                path, "range bounds must be integers with lo <= hi")
        return tuple(range(lo, hi + 1))
    _expect(isinstance(raw, list) and raw, path, "domain must be a nonempty list")
    _expect(all(isinstance(v, int) for v in raw), path,
            "domain values must be integers")
    return tuple(sorted(set(raw)))


def _agent_index(raw, count: int, path: str) -> int:
    _expect(isinstance(raw, int) and 1 <= raw <= count, path,
            f"agent index must be 1..{count}, got {raw!r}")
    return raw - 1


def _parse_expr(raw, path: str) -> Expr:
    if isinstance(raw, bool):
        raise _err(path, "expression must be a number, a variable, or [var, offset]")
    if isinstance(raw, int):
        return Const(raw)
    if isinstance(raw, str):
        return VarRef(raw)
    if isinstance(raw, list) and len(raw) == 2 and isinstance(raw[0], str) \
            and isinstance(raw[1], int):
        return Add(raw[0], raw[1])
    raise _err(path, f"cannot read expression {raw!r}")


def _emit_expr(expr: Expr):
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, VarRef):
        return expr.name
    return [expr.name, expr.offset]


def _parse_effects(raw, agent_count: int, path: str) -> tuple:
    _expect(isinstance(raw, list), path, "effects must be a list")
    out = []
    for k, eff in enumerate(raw):
        p = f"{path}[{k}]"
        _expect(isinstance(eff, dict) and len(eff) == 1, p,
                "each effect is one of {'set':...}, {'send':...}, {'drop':true}")
        if "set" in eff:
            body = eff["set"]
            _expect(isinstance(body, dict) and set(body) == {"var", "to"}, p,
                    "set effect needs 'var' and 'to'")
            out.append(Assign(body["var"], _parse_expr(body["to"], p)))
        elif "send" in eff:
            body = eff["send"]
            _expect(isinstance(body, dict) and set(body) == {"to", "payload"},
                    p, "send effect needs 'to' and 'payload'")
            dest = _agent_index(body["to"], agent_count, p)
            out.append(SendEffect(dest, _parse_expr(body["payload"], p)))
        elif "drop" in eff:
            _expect(eff["drop"] is True, p, "drop effect is {'drop': true}")
            out.append(DropMessages())
        else:
            raise _err(p, f"unknown effect {sorted(eff)[0]!r}")
    return tuple(out)


def _emit_effects(effects) -> list:
    out = []
    for eff in effects:
        if isinstance(eff, Assign):
            out.append({"set": {"var": eff.var, "to": _emit_expr(eff.expr)}})
        elif isinstance(eff, SendEffect):
            out.append({"send": {"to": eff.dest + 1,
                                 "payload": _emit_expr(eff.payload)}})
        else:
            out.append({"drop": True})
    return out


def _knows_some_value(reader: int, holder: int, var: str,
                      domain: tuple[int, ...]) -> Formula:
    """reader knows that holder knows which value var has."""
    options = tuple(Know(holder, VarEq(var, v)) for v in domain)
    body = options[0] if len(options) == 1 else Or(options)
    return Know(reader, body)


def _expand_spread_value(agent: int, raw: dict, decls_vars: dict[str, VarDecl],
                         agent_count: int, path: str,
                         generated: dict[str, ActionDef]) -> list[GuardedBranch]:
    """Expand the spread_value macro into explicit per-value branches.

    For each value v of the source variable and each subset of the
    listed neighbours, one branch: known value v, exactly that subset
    still not known (to this agent) to know the value; copy v into the
    agent's own variable and send v to the subset.
    """
    for key in ("source", "own", "to"):
        _expect(key in raw, path, f"spread_value macro needs {key!r}")
    source, own = raw["source"], raw["own"]
    _expect(source in decls_vars, path, f"unknown source variable {source!r}")
    _expect(own in decls_vars, path, f"unknown target variable {own!r}")
    neighbors = [_agent_index(j, agent_count, path) for j in raw["to"]]
    domain = decls_vars[source].domain

    branches = []
    for v in domain:
        assign_name = f"@{own}:={v}"
        assign_def = ActionDef(assign_name, (Assign(own, Const(v)),))
        if generated.setdefault(assign_name, assign_def) != assign_def:
            raise _err(path, f"action name collision at {assign_name!r}")
        for sends in product((True, False), repeat=len(neighbors)):
            parts: list[Formula] = [Know(agent, VarEq(source, v))]
            actions = [assign_name]
            for j, send in zip(neighbors, sends):
                knows = _knows_some_value(agent, j, source, domain)
                parts.append(Not(knows) if send else knows)
                if send:
                    send_name = f"@send({j + 1},{v})"
                    send_def = ActionDef(send_name,
                                         (SendEffect(j, Const(v)),))
                    if generated.setdefault(send_name, send_def) != send_def:
                        raise _err(path, f"action name collision at {send_name!r}")
                    actions.append(send_name)
            guard = parts[0] if len(parts) == 1 else And(tuple(parts))
            branches.append(GuardedBranch(guard, tuple(actions)))
    return branches


_MACROS = {"spread_value": _expand_spread_value}


def load_scenario(source: Union[str, Path, dict]) -> Scenario:
    """Load and compile a scenario from a path, JSON text, or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        if isinstance(source, Path) or (isinstance(source, str)
                                        and not source.lstrip().startswith("{")):
            try:
                text = Path(source).read_text()
            except OSError as e:
                raise ScenarioError(f"cannot read scenario file: {e}")
        else:
            text = source
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ScenarioError(f"scenario is not valid JSON: line {e.lineno} "
                                f"column {e.colno}: {e.msg}")
    _expect(isinstance(doc, dict), "document", "top level must be an object")
    _expect(doc.get("format") == FORMAT_NAME, "format",
            f"expected {FORMAT_NAME!r}")
    _expect(doc.get("version") == FORMAT_VERSION, "version",
            f"expected {FORMAT_VERSION}")

    name = doc.get("name")
    _expect(isinstance(name, str) and name, "name", "scenario needs a name")
    title = doc.get("title", "")

    agents = doc.get("agents")
    _expect(isinstance(agents, list) and agents
            and all(isinstance(a, str) for a in agents),
            "agents", "must be a nonempty list of names")
    n = len(agents)

    # variables
    raw_vars = doc.get("vars")
    _expect(isinstance(raw_vars, list) and raw_vars, "vars",
            "must be a nonempty list")
    env_vars: list[VarDecl] = []
    agent_vars: list[list[VarDecl]] = [[] for _ in range(n)]
    var_table: dict[str, VarDecl] = {}
    for k, rv in enumerate(raw_vars):
        p = f"vars[{k}]"
        _expect(isinstance(rv, dict), p, "must be an object")
        vname = rv.get("name")
        _expect(isinstance(vname, str) and vname, p, "variable needs a name")
        _expect(vname not in var_table, p, f"duplicate variable {vname!r}")
        domain = _parse_domain(rv.get("domain"), f"{p}.domain")
        init = rv.get("init", domain[0])
        try:
            decl = VarDecl(vname, domain, bool(rv.get("saturating", False)),
                           bool(rv.get("tracked", False)), init)
        except KbpError as e:
            raise _err(p, str(e))
        owner = rv.get("owner")
        if owner == "env":
            env_vars.append(decl)
        else:
            agent_vars[_agent_index(owner, n, f"{p}.owner")].append(decl)
        var_table[vname] = decl

    logs_enabled = bool(doc.get("message_logs", False))
    raw_clock = doc.get("clock")
    clock_enabled = raw_clock is not None
    clock_cap = 8
    if clock_enabled:
        _expect(isinstance(raw_clock, dict) and isinstance(raw_clock.get("cap"), int)
                and raw_clock["cap"] >= 1, "clock", "must be {'cap': n>=1}")
        clock_cap = raw_clock["cap"]

    topology = None
    raw_topo = doc.get("topology")
    if raw_topo is not None:
        _expect(isinstance(raw_topo, list), "topology", "must be a list of pairs")
        edges = set()
        for k, pair in enumerate(raw_topo):
            p = f"topology[{k}]"
            _expect(isinstance(pair, list) and len(pair) == 2, p,
                    "must be a pair of agent indices")
            a = _agent_index(pair[0], n, p)
            b = _agent_index(pair[1], n, p)
            _expect(a != b, p, "no self edges")
            edges.add((a, b))
            edges.add((b, a))
        topology = frozenset(edges)

    mirrors: list[Mirror] = []
    mirror_sync: dict[tuple[int, str], bool] = {}
    for k, rm in enumerate(doc.get("mirrors", [])):
        p = f"mirrors[{k}]"
        _expect(isinstance(rm, dict), p, "must be an object")
        agent = _agent_index(rm.get("agent"), n, p)
        var, of = rm.get("var"), rm.get("of")
        _expect(var in var_table, p, f"unknown variable {var!r}")
        _expect(of in var_table, p, f"unknown variable {of!r}")
        _expect(any(d.name == var for d in agent_vars[agent]), p,
                f"{var!r} must be owned by agent {agent + 1}")
        _expect(any(d.name == of for d in env_vars), p,
                f"{of!r} must be an environment variable")
        _expect(set(var_table[of].domain) <= set(var_table[var].domain), p,
                f"domain of {of!r} must fit inside domain of {var!r}")
        mirrors.append(Mirror(agent, var, of))
        mirror_sync[(agent, var)] = rm.get("init") == "synced"

    decls = Declarations(
        agent_names=tuple(agents),
        env_vars=tuple(sorted(env_vars)),
        agent_vars=tuple(tuple(sorted(v)) for v in agent_vars),
        mirrors=tuple(sorted(mirrors)),
        logs_enabled=logs_enabled,
        clock_enabled=clock_enabled,
        clock_cap=clock_cap,
        topology=topology,
    )

    # actions
    actions: dict[str, ActionDef] = {}
    raw_actions = doc.get("actions", {})
    _expect(isinstance(raw_actions, dict), "actions", "must be an object")
    for aname, raw_eff in raw_actions.items():
        effects = _parse_effects(raw_eff, n, f"actions.{aname}")
        for eff in effects:
            if isinstance(eff, Assign):
                _expect(eff.var in var_table, f"actions.{aname}",
                        f"unknown variable {eff.var!r}")
        actions[aname] = ActionDef(aname, effects)

    # programs, with macro expansion registering generated actions
    programs: dict[str, Program] = {}
    raw_programs = doc.get("programs", {})
    _expect(isinstance(raw_programs, dict) and raw_programs, "programs",
            "at least one program is required")
    for pname, rp in raw_programs.items():
        p = f"programs.{pname}"
        _expect(isinstance(rp, dict) and isinstance(rp.get("agents"), list), p,
                "must be {'agents': [branch lists]}")
        _expect(len(rp["agents"]) == n, p,
                f"needs one branch list per agent ({n})")
        agent_programs = []
        for i, raw_branches in enumerate(rp["agents"]):
            bp = f"{p}.agents[{i}]"
            _expect(isinstance(raw_branches, list), bp, "must be a list")
            branches: list[GuardedBranch] = []
            for bi, rb in enumerate(raw_branches):
                bbp = f"{bp}[{bi}]"
                _expect(isinstance(rb, dict), bbp, "must be an object")
                if "macro" in rb:
                    macro = _MACROS.get(rb["macro"])
                    _expect(macro is not None, bbp,
                            f"unknown macro {rb['macro']!r}")
                    generated: dict[str, ActionDef] = {}
                    branches.extend(macro(i, rb, var_table, n, bbp, generated))
                    for gname, gdef in generated.items():
                        existing = actions.get(gname)
                        _expect(existing is None or existing == gdef, bbp,
                                f"action name collision at {gname!r}")
                        actions[gname] = gdef
                    continue
                guard_text = rb.get("guard")
                _expect(isinstance(guard_text, str), bbp, "branch needs a guard")
                try:
                    guard = parse_formula(guard_text, n, self_agent=i)
                except Exception as e:
                    raise _err(f"{bbp}.guard", str(e))
                do = rb.get("do", [])
                _expect(isinstance(do, list)
                        and all(isinstance(x, str) for x in do),
                        bbp, "'do' must be a list of action names")
                branches.append(GuardedBranch(guard, tuple(do)))
            agent_programs.append(AgentProgram(tuple(branches)))
        programs[pname] = Program(pname, tuple(agent_programs))

    # environment protocols
    env_protocols: dict[str, EnvProtocol] = {}
    raw_envs = doc.get("env_protocols", {})
    _expect(isinstance(raw_envs, dict) and raw_envs, "env_protocols",
            "at least one environment protocol is required")
    for ename, choices in raw_envs.items():
        p = f"env_protocols.{ename}"
        _expect(isinstance(choices, list) and choices, p,
                "must be a nonempty list of action-name lists")
        parsed = []
        for ci, choice in enumerate(choices):
            _expect(isinstance(choice, list)
                    and all(isinstance(x, str) for x in choice),
                    f"{p}[{ci}]", "must be a list of action names")
            for x in choice:
                _expect(x in actions, f"{p}[{ci}]", f"unknown action {x!r}")
            parsed.append(tuple(choice))
        env_protocols[ename] = EnvProtocol(ename, tuple(parsed))

    tau = TransitionSpec.of(name, actions, decls)

    for pname, program in programs.items():
        errors = validate_program(decls, program, dict(actions))
        if errors:
            raise _err(f"programs.{pname}", "; ".join(errors))

    # initial-state universe
    raw_universe = doc.get("init_universe")
    _expect(isinstance(raw_universe, dict)
            and isinstance(raw_universe.get("free"), list),
            "init_universe", "must be {'free': [variable names]}")
    free = tuple(sorted(raw_universe["free"]))
    for f in free:
        _expect(f in var_table, "init_universe", f"unknown variable {f!r}")
        _expect(not any(m.var == f for m in decls.mirrors), "init_universe",
                f"mirror target {f!r} cannot be free")
    counters = tuple((nm, 0) for nm in decls.tracked_names())

    def make_state(valuation: dict[str, int]) -> GlobalState:
        def value_of(d: VarDecl) -> int:
            return valuation.get(d.name, d.init)

        env_local = LocalState.make({d.name: value_of(d) for d in decls.env_vars})
        locals_ = []
        for i in range(n):
            values = {d.name: value_of(d) for d in decls.agent_vars[i]}
            for m in decls.mirrors:
                if m.agent == i and mirror_sync.get((i, m.var)):
                    values[m.var] = value_of(var_table[m.of])
            clock = 0 if clock_enabled else None
            locals_.append(LocalState.make(values, clock=clock))
        return GlobalState(env_local, tuple(locals_), counters)

    universe = []
    for combo in product(*(var_table[f].domain for f in free)):
        universe.append(make_state(dict(zip(free, combo))))
    state_universe = tuple(sorted(universe))
    by_valuation = {tuple(combo): s for combo, s in
                    zip(product(*(var_table[f].domain for f in free)), universe)}

    # formulas
    formulas: dict[str, Formula] = {}
    for fname, text in doc.get("formulas", {}).items():
        _expect(isinstance(text, str), f"formulas.{fname}", "must be a string")
        try:
            formulas[fname] = parse_formula(text, n)
        except Exception as e:
            raise _err(f"formulas.{fname}", str(e))

    # init conditions
    init_conditions: dict[str, InitCondition] = {}
    for iname, ri in doc.get("init_conditions", {}).items():
        p = f"init_conditions.{iname}"
        _expect(isinstance(ri, dict), p, "must be an object")
        if "where" in ri:
            try:
                where = parse_formula(ri["where"], n)
            except Exception as e:
                raise _err(f"{p}.where", str(e))
            try:
                init_conditions[iname] = InitCondition(iname, where=where)
            except Exception as e:
                raise _err(p, str(e))
        elif "states" in ri:
            _expect(isinstance(ri["states"], list), p,
                    "'states' must be a list of valuations")
            states = []
            for si, rv in enumerate(ri["states"]):
                sp = f"{p}.states[{si}]"
                _expect(isinstance(rv, dict) and set(rv) == set(free), sp,
                        f"valuation must assign exactly the free variables "
                        f"{sorted(free)}")
                key = tuple(rv[f] for f in free)
                _expect(key in by_valuation, sp,
                        "valuation outside the declared domains")
                states.append(by_valuation[key])
            init_conditions[iname] = InitCondition(iname,
                                                   explicit=tuple(sorted(states)))
        else:
            raise _err(p, "needs 'where' or 'states'")

    # contexts and families
    def psi_of(raw, path) -> AdmissibilityPredicate:
        value = raw.get("admissible", "all")
        try:
            return AdmissibilityPredicate(value)
        except Exception as e:
            raise _err(path, str(e))

    contexts: dict[str, Context] = {}
    for cname, rc in doc.get("contexts", {}).items():
        p = f"contexts.{cname}"
        _expect(isinstance(rc, dict), p, "must be an object")
        env_name = rc.get("env")
        _expect(env_name in env_protocols, p,
                f"unknown environment protocol {env_name!r}")
        init_name = rc.get("init")
        _expect(init_name in init_conditions, p,
                f"unknown init condition {init_name!r}")
        states = init_conditions[init_name].states(decls, state_universe)
        contexts[cname] = Context(env_protocols[env_name], states, tau,
                                  psi_of(rc, p))

    families: dict[str, ContextFamily] = {}
    for fname, rf in doc.get("families", {}).items():
        p = f"families.{fname}"
        _expect(isinstance(rf, dict), p, "must be an object")
        env_name = rf.get("env")
        _expect(env_name in env_protocols, p,
                f"unknown environment protocol {env_name!r}")
        families[fname] = ContextFamily(env_protocols[env_name], tau,
                                        psi_of(rf, p), state_universe)

    scenario = Scenario(
        name=name, title=title, decls=decls, tau=tau,
        env_protocols=env_protocols, programs=programs, formulas=formulas,
        init_conditions=init_conditions, contexts=contexts, families=families,
        state_universe=state_universe, free_vars=free,
    )
    scenario._doc = _canonical_doc(scenario, doc, mirror_sync)  # type: ignore[attr-defined]
    return scenario


def _canonical_doc(s: Scenario, raw: dict, mirror_sync: dict) -> dict:
    decls = s.decls
    n = decls.agent_count
    vars_out = []
    for d in decls.env_vars:
        vars_out.append({"name": d.name, "owner": "env",
                         "domain": list(d.domain), "init": d.init,
                         "saturating": d.saturating, "tracked": d.tracked})
    for i in range(n):
        for d in decls.agent_vars[i]:
            vars_out.append({"name": d.name, "owner": i + 1,
                             "domain": list(d.domain), "init": d.init,
                             "saturating": d.saturating, "tracked": d.tracked})
    vars_out.sort(key=lambda v: v["name"])

    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "name": s.name,
        "title": s.title,
        "agents": list(decls.agent_names),
        "vars": vars_out,
        "message_logs": decls.logs_enabled,
        "clock": {"cap": decls.clock_cap} if decls.clock_enabled else None,
        "topology": sorted([a + 1, b + 1] for (a, b) in (decls.topology or ())
                           if a < b) if decls.topology is not None else None,
        "mirrors": [{"agent": m.agent + 1, "var": m.var, "of": m.of,
                     "init": "synced" if mirror_sync.get((m.agent, m.var))
                     else "sentinel"}
                    for m in decls.mirrors],
        "actions": {aname: _emit_effects(adef.effects)
                    for aname, adef in s.tau.actions},
        "env_protocols": {e.name: [list(c) for c in e.choices]
                          for e in s.env_protocols.values()},
        "init_universe": {"free": list(s.free_vars)},
        "programs": {
            p.name: {"agents": [
                [{"guard": unparse_formula(b.guard), "do": list(b.actions)}
                 for b in ap.branches]
                for ap in p.agents]}
            for p in s.programs.values()},
        "formulas": {fname: unparse_formula(f)
                     for fname, f in s.formulas.items()},
        "init_conditions": {},
        "contexts": {},
        "families": {},
    }
    for iname, ic in s.init_conditions.items():
        if ic.where is not None:
            doc["init_conditions"][iname] = {"where": unparse_formula(ic.where)}
        else:
            free = s.free_vars
            doc["init_conditions"][iname] = {"states": [
                {f: _free_value(s.decls, st, f) for f in free}
                for st in ic.explicit]}
    for cname, ctx in s.contexts.items():
        init_name = next(iname for iname, ic in s.init_conditions.items()
                         if tuple(ic.states(decls, s.state_universe))
                         == ctx.initial_states)
        doc["contexts"][cname] = {"env": ctx.env_protocol.name,
                                  "init": init_name,
                                  "admissible": ctx.admissibility.name}
    for fname, fam in s.families.items():
        doc["families"][fname] = {"env": fam.env_protocol.name,
                                  "admissible": fam.admissibility.name}
    return doc


def _free_value(decls: Declarations, state: GlobalState, name: str) -> int:
    from .kernel import state_value
    return state_value(decls, state, name)


def emit_scenario(scenario: Scenario) -> dict:
    """Canonical document: macros expanded, defaults made explicit."""
    return scenario._doc  # type: ignore[attr-defined]


def canonical_bytes(doc: dict) -> bytes:
    return json.dumps(doc, indent=2, sort_keys=True).encode() + b"\n"


def scenario_digest(scenario: Scenario) -> str:
    return hashlib.sha256(canonical_bytes(emit_scenario(scenario))).hexdigest()


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_bytes(canonical_bytes(emit_scenario(scenario)))


def _bundled_dir() -> Path:
    return Path(__file__).resolve().parent / "scenarios"


def list_bundled() -> list[str]:
    return list(BUNDLED_NAMES)


def load_bundled(name: str) -> Scenario:
    if name not in BUNDLED_NAMES:
        known = ", ".join(BUNDLED_NAMES)
        raise ScenarioError(f"unknown scenario {name!r} (bundled: {known})")
    return load_scenario(_bundled_dir() / f"{name}.kbp.json")


# trace rendering, shared by the service and the command line

def render_local(decls: Declarations, local: LocalState) -> dict:
    out: dict = {"vars": dict(local.vars)}
    if decls.logs_enabled:
        out["sent"] = [[dest + 1, payload] for dest, payload in local.sent]
        out["recv"] = [[src + 1, payload] for src, payload in local.recv]
    if decls.clock_enabled:
        out["clock"] = local.clock
    return out


def render_state(decls: Declarations, state: GlobalState) -> dict:
    out = {
        "env": dict(state.env.vars),
        "agents": [render_local(decls, loc) for loc in state.locals],
    }
    if state.counters:
        out["changes"] = dict(state.counters)
    return out


def render_run(decls: Declarations, run: LassoRun) -> dict:
    return {
        "prefix": [render_state(decls, st) for st in run.prefix],
        "cycle": [render_state(decls, st) for st in run.cycle],
    }


def render_system(decls: Declarations, system: System) -> dict:
    return {
        "count": len(system),
        "runs": [render_run(decls, r) for r in system.runs],
    }
