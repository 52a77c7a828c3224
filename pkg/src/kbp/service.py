"""HTTP facade over the checker.

Endpoints wrap the core operations 1:1 and return a uniform report
envelope: command echo, scenario digest, outcome, timing, and the
operation's payload. Budget and undecidedness are outcomes, not errors;
unknown names are 404s and malformed requests are 422s.
"""
from __future__ import annotations

import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .errors import BudgetError, KbpError, ScenarioError, UndecidedError
from .fixpoint import (DEFAULT_ENUM_BUDGET, classify, fixpoint_enumerate,
                       fixpoint_iterate)
from .kernel import System
from .programs import derive_protocol, is_standard
from .scenario import (Scenario, list_bundled, load_bundled, load_scenario,
                       render_run, render_state, render_system,
                       scenario_digest)
from .speccheck import (KNOWLEDGE_BASED, RUN_BASED, Spec, SatisfactionVerdict,
                        maximally_satisfies, monotonicity_report,
                        program_satisfies, satisfies_given_init)
from .transitions import build_system

app = FastAPI(
    title="kbp",
    version="0.1.0",
    description="Build run systems for programs in contexts, solve "
                "knowledge fixed points, and check temporal-epistemic specs.",
)


def _load(name: str) -> Scenario:
    try:
        if name in list_bundled():
            return load_bundled(name)
        if Path(name).exists():
            return load_scenario(Path(name))
        raise ScenarioError(
            f"unknown scenario {name!r} (bundled: {', '.join(list_bundled())}; "
            f"a path to a .kbp.json file also works)")
    except ScenarioError as e:
        raise HTTPException(status_code=404, detail=str(e))


def _pick(scenario: Scenario, kind: str, table: dict, name: str):
    if name not in table:
        known = ", ".join(sorted(table)) or "none"
        raise HTTPException(status_code=404,
                            detail=f"{scenario.name}: unknown {kind} {name!r} "
                                   f"(available: {known})")
    return table[name]


def _envelope(command: dict, scenario: Scenario, started: float,
              outcome: str, payload: dict) -> dict:
    return {
        "command": command,
        "scenario": {"name": scenario.name, "digest": scenario_digest(scenario)},
        "outcome": outcome,
        **payload,
        "timing_ms": round((time.perf_counter() - started) * 1000, 3),
    }


def _spec_of(scenario: Scenario, formula_name: str, kind: str) -> Spec:
    if kind not in (RUN_BASED, KNOWLEDGE_BASED):
        raise HTTPException(status_code=422,
                            detail=f"kind must be {RUN_BASED!r} or "
                                   f"{KNOWLEDGE_BASED!r}")
    formula = _pick(scenario, "formula", scenario.formulas, formula_name)
    try:
        return Spec(formula_name, kind, formula)
    except KbpError as e:
        raise HTTPException(status_code=422, detail=str(e))


def _verdict_payload(scenario: Scenario, verdict: SatisfactionVerdict) -> dict:
    out: dict = {"holds": verdict.holds, "vacuous": verdict.vacuous,
                 "note": verdict.note}
    if verdict.witness is not None:
        w = verdict.witness
        out["witness"] = {
            "run": render_run(scenario.decls, w.run),
            "time": w.time,
            "subset": [render_state(scenario.decls, s) for s in w.subset]
            if w.subset is not None else None,
        }
    else:
        out["witness"] = None
    return out


@app.get("/scenarios")
def scenarios() -> dict:
    out = []
    for name in list_bundled():
        s = load_bundled(name)
        out.append({
            "name": s.name,
            "title": s.title,
            "digest": scenario_digest(s),
            "agents": list(s.decls.agent_names),
            "programs": sorted(s.programs),
            "contexts": sorted(s.contexts),
            "families": sorted(s.families),
            "formulas": sorted(s.formulas),
            "init_conditions": sorted(s.init_conditions),
        })
    return {"scenarios": out}


class BuildRequest(BaseModel):
    scenario: str
    context: str
    program: str
    # knowledge-based programs take their protocol from the unique fixed
    # point found in this context (defaults to the build context)
    derive_context: Optional[str] = None
    budget: int = DEFAULT_ENUM_BUDGET
    state_cap: Optional[int] = None


@app.post("/build")
def build(req: BuildRequest) -> dict:
    started = time.perf_counter()
    s = _load(req.scenario)
    context = _pick(s, "context", s.contexts, req.context)
    program = _pick(s, "program", s.programs, req.program)
    diagnostics: list[str] = []
    try:
        if is_standard(program):
            protocol = derive_protocol(s.decls, program,
                                       diagnostics=diagnostics)
            derived_from = {"kind": "standard-program"}
        else:
            derive_ctx_name = req.derive_context or req.context
            derive_ctx = _pick(s, "context", s.contexts, derive_ctx_name)
            classification = classify(program, derive_ctx, req.budget,
                                      req.state_cap)
            if classification.kind != "unique":
                return _envelope(req.model_dump(), s, started, "undecided", {
                    "detail": f"program {req.program!r} does not have a "
                              f"unique representing system in context "
                              f"{derive_ctx_name!r} ({classification.kind})",
                    "note": classification.note,
                })
            protocol = derive_protocol(s.decls, program,
                                       classification.systems[0],
                                       diagnostics=diagnostics)
            derived_from = {"kind": "knowledge-fixed-point",
                            "context": derive_ctx_name,
                            "method": classification.method,
                            "exact": classification.exact}
        system = build_system(protocol, context, req.state_cap, diagnostics)
    except BudgetError as e:
        return _envelope(req.model_dump(), s, started, "budget-exceeded",
                         {"detail": str(e)})
    except KbpError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return _envelope(req.model_dump(), s, started, "ok", {
        "system": render_system(s.decls, system),
        "protocol_source": derived_from,
        "diagnostics": sorted(set(diagnostics)),
    })


class FixpointsRequest(BaseModel):
    scenario: str
    context: str
    program: str
    method: str = "classify"  # classify | iterate | enumerate
    seed: str = "standard-closure"
    budget: int = DEFAULT_ENUM_BUDGET
    max_iters: int = 64
    state_cap: Optional[int] = None


@app.post("/fixpoints")
def fixpoints(req: FixpointsRequest) -> dict:
    started = time.perf_counter()
    s = _load(req.scenario)
    context = _pick(s, "context", s.contexts, req.context)
    program = _pick(s, "program", s.programs, req.program)
    note = ""
    try:
        if req.method == "iterate":
            result = fixpoint_iterate(program, context, req.seed,
                                      req.max_iters, req.state_cap)
            payload = {
                "result": {
                    "kind": result.kind,
                    "iterations": result.iterations,
                    "seed": req.seed,
                    "trail_lengths": [len(x) for x in result.trail],
                },
                "systems": [render_system(s.decls, result.system)]
                if result.system is not None else
                [render_system(s.decls, x) for x in result.cycle],
            }
            outcome = "ok" if result.kind == "fixed-point" else "undecided"
            return _envelope(req.model_dump(), s, started, outcome, payload)
        if req.method == "enumerate":
            try:
                systems = fixpoint_enumerate(program, context, req.budget,
                                             req.state_cap)
                kinds = {0: "none", 1: "unique"}
                payload = {
                    "result": {
                        "kind": kinds.get(len(systems), "multiple"),
                        "count": len(systems),
                        "method": "enumerate",
                        "exact": True,
                        "note": "",
                    },
                    "systems": [render_system(s.decls, x) for x in systems],
                }
                return _envelope(req.model_dump(), s, started, "ok", payload)
            except BudgetError:
                # fall back to the classify route, but say so
                note = "enumeration out of budget; fell back to iteration"
        classification = classify(program, context, req.budget, req.state_cap)
    except BudgetError as e:
        return _envelope(req.model_dump(), s, started, "budget-exceeded",
                         {"detail": str(e)})
    except KbpError as e:
        raise HTTPException(status_code=422, detail=str(e))
    full_note = "; ".join(x for x in (note, classification.note) if x)
    payload = {
        "result": {
            "kind": classification.kind,
            "count": classification.count,
            "method": classification.method,
            "exact": classification.exact,
            "iterations": classification.iterations,
            "note": full_note,
        },
        "systems": [render_system(s.decls, x) for x in classification.systems],
    }
    outcome = "undecided" if classification.kind == "unknown" else "ok"
    return _envelope(req.model_dump(), s, started, outcome, payload)


class CheckRequest(BaseModel):
    scenario: str
    program: str
    formula: str
    kind: str = KNOWLEDGE_BASED
    # exactly one of: a context, or a family with an init condition
    context: Optional[str] = None
    family: Optional[str] = None
    init: Optional[str] = None
    notion: str = "maximal"  # family | maximal, with family+init
    budget: int = DEFAULT_ENUM_BUDGET
    state_cap: Optional[int] = None


@app.post("/check")
def check(req: CheckRequest) -> dict:
    started = time.perf_counter()
    s = _load(req.scenario)
    program = _pick(s, "program", s.programs, req.program)
    spec = _spec_of(s, req.formula, req.kind)
    if (req.context is None) == (req.family is None):
        raise HTTPException(status_code=422,
                            detail="give exactly one of 'context' or "
                                   "'family' (family needs 'init')")
    try:
        if req.context is not None:
            context = _pick(s, "context", s.contexts, req.context)
            verdict = program_satisfies(program, spec, context, req.budget,
                                        req.state_cap)
            mode = {"context": req.context}
        else:
            if req.init is None:
                raise HTTPException(status_code=422,
                                    detail="family checks need 'init'")
            if req.notion not in ("family", "maximal"):
                raise HTTPException(status_code=422,
                                    detail="notion must be 'family' or 'maximal'")
            family = _pick(s, "family", s.families, req.family)
            init = _pick(s, "init condition", s.init_conditions, req.init)
            fn = satisfies_given_init if req.notion == "family" \
                else maximally_satisfies
            verdict = fn(program, spec, family, init, req.budget, req.state_cap)
            mode = {"family": req.family, "init": req.init,
                    "notion": req.notion}
    except UndecidedError as e:
        return _envelope(req.model_dump(), s, started, "undecided",
                         {"detail": str(e)})
    except BudgetError as e:
        return _envelope(req.model_dump(), s, started, "budget-exceeded",
                         {"detail": str(e)})
    except KbpError as e:
        raise HTTPException(status_code=422, detail=str(e))
    payload = {"mode": mode, **_verdict_payload(s, verdict)}
    return _envelope(req.model_dump(), s, started, "ok", payload)


class MonotonicityRequest(BaseModel):
    scenario: str
    program: str
    formula: str
    kind: str = KNOWLEDGE_BASED
    family: str
    init: str
    stronger: str
    budget: int = DEFAULT_ENUM_BUDGET
    state_cap: Optional[int] = None


@app.post("/monotonicity")
def monotonicity(req: MonotonicityRequest) -> dict:
    started = time.perf_counter()
    s = _load(req.scenario)
    program = _pick(s, "program", s.programs, req.program)
    spec = _spec_of(s, req.formula, req.kind)
    family = _pick(s, "family", s.families, req.family)
    weaker = _pick(s, "init condition", s.init_conditions, req.init)
    stronger = _pick(s, "init condition", s.init_conditions, req.stronger)
    try:
        report = monotonicity_report(program, spec, family, weaker, stronger,
                                     req.budget, req.state_cap)
    except UndecidedError as e:
        return _envelope(req.model_dump(), s, started, "undecided",
                         {"detail": str(e)})
    except BudgetError as e:
        return _envelope(req.model_dump(), s, started, "budget-exceeded",
                         {"detail": str(e)})
    except KbpError as e:
        raise HTTPException(status_code=422, detail=str(e))
    cells = []
    for (notion, init_name), verdict in sorted(report.cells.items()):
        cells.append({"notion": notion, "init": init_name,
                      **_verdict_payload(s, verdict)})
    payload = {
        "weaker": report.weaker,
        "stronger": report.stronger,
        "cells": cells,
        "flags": dict(sorted(report.flags.items())),
    }
    return _envelope(req.model_dump(), s, started, "ok", payload)
