"""HTTP endpoints: payload shapes, outcomes, error mapping."""

import json

import pytest
from fastapi.testclient import TestClient

from kbp.scenario import BUNDLED_NAMES
from kbp.service import app

from test_fixpoint import FLIP_DOC


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


def ok(resp):
    assert resp.status_code == 200, resp.text
    return resp.json()


# ---------------------------------------------------------------- scenarios

def test_scenarios_lists_the_bundle(client):
    body = ok(client.get("/scenarios"))
    names = [row["name"] for row in body["scenarios"]]
    assert names == list(BUNDLED_NAMES)
    row = body["scenarios"][0]
    assert set(row) >= {"name", "title", "digest", "agents", "programs",
                        "contexts", "families", "formulas", "init_conditions"}
    assert len(row["digest"]) == 64


# -------------------------------------------------------------------- build

def test_build_standard_program(client):
    body = ok(client.post("/build", json={
        "scenario": "pg1", "context": "gamma", "program": "pg1"}))
    assert body["outcome"] == "ok"
    assert body["system"]["count"] == 2
    assert body["protocol_source"] == {"kind": "standard-program"}
    assert body["scenario"]["name"] == "pg1"
    assert body["command"]["context"] == "gamma"
    assert isinstance(body["timing_ms"], float)


def test_build_knowledge_program_reports_protocol_source(client):
    body = ok(client.post("/build", json={
        "scenario": "pg2_gamma_prime", "context": "gammaPrime",
        "program": "pg2"}))
    assert body["outcome"] == "ok"
    src = body["protocol_source"]
    assert src["kind"] == "knowledge-fixed-point"
    assert src["context"] == "gammaPrime"
    assert src["exact"] is True
    assert body["system"]["count"] == 2


def test_build_with_separate_derive_context(client):
    # protocol fixed in the wide context, then run on the narrow one
    body = ok(client.post("/build", json={
        "scenario": "pg2_gamma_prime", "context": "gammaPrimePrime",
        "program": "pg2", "derive_context": "gammaPrime"}))
    assert body["outcome"] == "ok"
    assert body["protocol_source"]["context"] == "gammaPrime"
    assert body["system"]["count"] == 1
    # the frozen protocol holds still even from the revealing start
    (run,) = body["system"]["runs"]
    assert run["prefix"] == []
    assert len(run["cycle"]) == 1


def test_build_undecided_without_unique_fixed_point(client, tmp_path):
    doc = dict(FLIP_DOC)
    p = tmp_path / "flip.kbp.json"
    p.write_text(json.dumps(doc))
    body = ok(client.post("/build", json={
        "scenario": str(p), "context": "g", "program": "selffulfil"}))
    assert body["outcome"] == "undecided"
    assert "unique" in body["detail"]


def test_build_budget_exceeded_is_an_outcome(client):
    body = ok(client.post("/build", json={
        "scenario": "pg1", "context": "gamma", "program": "pg1",
        "state_cap": 2}))
    assert body["outcome"] == "budget-exceeded"
    assert "state budget" in body["detail"]


def test_unknown_names_are_404(client):
    assert client.post("/build", json={
        "scenario": "nonesuch", "context": "g", "program": "p"
    }).status_code == 404
    assert client.post("/build", json={
        "scenario": "pg1", "context": "nonesuch", "program": "pg1"
    }).status_code == 404
    r = client.post("/build", json={
        "scenario": "pg1", "context": "gamma", "program": "nonesuch"})
    assert r.status_code == 404
    assert "available" in r.json()["detail"]


def test_scenario_by_path(client, tmp_path):
    p = tmp_path / "flip.kbp.json"
    p.write_text(json.dumps(FLIP_DOC))
    body = ok(client.post("/build", json={
        "scenario": str(p), "context": "g", "program": "selfdeny"}))
    # a standard build of a knowledge program needs the fixed point;
    # selfdeny has none, so the service reports undecided
    assert body["outcome"] == "undecided"


# ---------------------------------------------------------------- fixpoints

def test_fixpoints_classify(client):
    body = ok(client.post("/fixpoints", json={
        "scenario": "pg2_gamma_prime", "context": "gammaPrime",
        "program": "pg2"}))
    assert body["outcome"] == "ok"
    assert body["result"]["kind"] == "unique"
    assert body["result"]["method"] == "enumerate"
    assert body["result"]["exact"] is True
    assert len(body["systems"]) == 1


def test_fixpoints_iterate_reports_trail(client):
    body = ok(client.post("/fixpoints", json={
        "scenario": "pg2_gamma_prime", "context": "gammaPrime",
        "program": "pg2", "method": "iterate", "seed": "all-know-true"}))
    assert body["outcome"] == "ok"
    assert body["result"]["kind"] == "fixed-point"
    assert body["result"]["seed"] == "all-know-true"
    assert body["result"]["trail_lengths"]
    assert len(body["systems"]) == 1


def test_fixpoints_enumerate_falls_back_over_budget(client):
    body = ok(client.post("/fixpoints", json={
        "scenario": "diffuse_line3", "context": "gamma1",
        "program": "diffuse", "method": "enumerate"}))
    assert body["outcome"] == "ok"
    assert body["result"]["kind"] == "unique"
    assert body["result"]["exact"] is False
    assert "fell back" in body["result"]["note"]
    assert body["systems"][0]["count"] == 8


def test_fixpoints_enumerate_within_budget(client):
    body = ok(client.post("/fixpoints", json={
        "scenario": "pg2_gamma_prime", "context": "gammaPrimePrime",
        "program": "pg2", "method": "enumerate"}))
    assert body["outcome"] == "ok"
    assert body["result"] == {"kind": "unique", "count": 1,
                              "method": "enumerate", "exact": True,
                              "note": ""}


def test_fixpoints_undecided_cycle(client, tmp_path):
    p = tmp_path / "flip.kbp.json"
    p.write_text(json.dumps(FLIP_DOC))
    body = ok(client.post("/fixpoints", json={
        "scenario": str(p), "context": "g", "program": "selfdeny",
        "method": "iterate"}))
    assert body["outcome"] == "undecided"
    assert body["result"]["kind"] == "cycle"
    assert len(body["systems"]) >= 2  # the oscillation itself


# -------------------------------------------------------------------- check

def test_check_in_context(client):
    body = ok(client.post("/check", json={
        "scenario": "pg2_two_agent", "program": "pg2",
        "formula": "observer_counts_on_y0", "context": "gammaPrime"}))
    assert body["outcome"] == "ok"
    assert body["holds"] is True
    assert body["mode"] == {"context": "gammaPrime"}


def test_check_failure_carries_witness(client):
    body = ok(client.post("/check", json={
        "scenario": "pg2_two_agent", "program": "pg2",
        "formula": "observer_counts_on_y0", "context": "gammaPrimePrime"}))
    assert body["holds"] is False
    assert body["witness"] is not None
    assert "run" in body["witness"] and "time" in body["witness"]


def test_check_family_vs_maximal(client):
    base = {"scenario": "pg2_two_agent", "program": "pg2",
            "formula": "observer_counts_on_y0", "family": "fam",
            "init": "INIT1"}
    fam = ok(client.post("/check", json={**base, "notion": "family"}))
    assert fam["holds"] is False
    assert len(fam["witness"]["subset"]) == 1
    maxi = ok(client.post("/check", json={**base, "notion": "maximal"}))
    assert maxi["holds"] is True


def test_check_run_based_kind(client):
    body = ok(client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates",
        "kind": "run-based", "context": "gamma2"}))
    assert body["holds"] is True


def test_check_target_validation(client):
    r = client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates"})
    assert r.status_code == 422
    r = client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates",
        "context": "gamma", "family": "fam"})
    assert r.status_code == 422
    r = client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates",
        "family": "fam"})
    assert r.status_code == 422
    r = client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates",
        "family": "fam", "init": "INIT1", "notion": "sideways"})
    assert r.status_code == 422
    r = client.post("/check", json={
        "scenario": "pg1", "program": "pg1", "formula": "saturates",
        "kind": "sideways", "context": "gamma"})
    assert r.status_code == 422
    # run-based specs reject knowledge formulas
    r = client.post("/check", json={
        "scenario": "pg2_two_agent", "program": "pg2",
        "formula": "observer_counts_on_y0", "kind": "run-based",
        "context": "gammaPrime"})
    assert r.status_code == 422


def test_check_undecided_outcome(client, tmp_path):
    p = tmp_path / "flip.kbp.json"
    p.write_text(json.dumps(FLIP_DOC))
    body = ok(client.post("/check", json={
        "scenario": str(p), "program": "selfdeny", "formula": "nothing",
        "context": "g", "budget": 1}))
    assert body["outcome"] == "undecided"


# ------------------------------------------------------------- monotonicity

def test_monotonicity_report_shape(client):
    body = ok(client.post("/monotonicity", json={
        "scenario": "pg2_gamma_prime", "program": "pg2",
        "formula": "never_y1", "kind": "run-based", "family": "fam",
        "init": "INIT1", "stronger": "INIT2"}))
    assert body["outcome"] == "ok"
    assert body["weaker"] == "INIT1" and body["stronger"] == "INIT2"
    assert body["flags"] == {"family": "preserved", "maximal": "violated"}
    cells = {(c["notion"], c["init"]): c["holds"] for c in body["cells"]}
    assert cells == {
        ("family", "INIT1"): False,
        ("family", "INIT2"): False,
        ("maximal", "INIT1"): True,
        ("maximal", "INIT2"): False,
    }


def test_monotonicity_rejects_non_strengthening(client):
    r = client.post("/monotonicity", json={
        "scenario": "pg2_gamma_prime", "program": "pg2",
        "formula": "never_y1", "kind": "run-based", "family": "fam",
        "init": "INIT2", "stronger": "INIT1"})
    assert r.status_code == 422
    assert "strengthening" in r.json()["detail"]


# ---------------------------------------------------------------- envelope

def test_reports_are_deterministic_modulo_timing(client):
    req = {"scenario": "pg1", "context": "gamma", "program": "pg1"}
    a = ok(client.post("/build", json=req))
    b = ok(client.post("/build", json=req))
    a.pop("timing_ms"), b.pop("timing_ms")
    assert a == b
