"""Command-line client for the checker service.

Talks HTTP to a running server when --server is given; otherwise serves
itself in-process, so the commands work offline with identical
request/response shapes. Exit codes: 0 success (property holds), 1 a
checked property fails, 2 usage or input errors, 3 out of budget or
undecided.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from typing import Optional

import httpx

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


class ServiceClient:
    """Minimal request runner: remote when a server URL is set, else
    in-process against the application object."""

    def __init__(self, server: Optional[str]):
        self.server = server

    def request(self, method: str, path: str, body: Optional[dict] = None):
        if self.server:
            with httpx.Client(base_url=self.server, timeout=120.0) as client:
                r = client.request(method, path, json=body)
                return r.status_code, r.json()

        from .service import app

        async def go():
            transport = httpx.ASGITransport(app=app)
            async with httpx.AsyncClient(transport=transport,
                                         base_url="http://kbp.local",
                                         timeout=120.0) as client:
                r = await client.request(method, path, json=body)
                return r.status_code, r.json()

        return asyncio.run(go())


def _fmt_local(agent: dict) -> str:
    bits = [f"{k}={v}" for k, v in sorted(agent.get("vars", {}).items())]
    if "sent" in agent:
        sent = ",".join(f"{d}<-{p}" for d, p in agent["sent"])
        recv = ",".join(f"{s}->{p}" for s, p in agent["recv"])
        bits.append(f"sent{{{sent}}}")
        bits.append(f"recv{{{recv}}}")
    if "clock" in agent:
        bits.append(f"clk{agent['clock']}")
    return " ".join(bits) if bits else "(empty)"


def _fmt_state(state: dict) -> str:
    parts = []
    env = " ".join(f"{k}={v}" for k, v in sorted(state["env"].items()))
    if env:
        parts.append(f"env[{env}]")
    for i, agent in enumerate(state["agents"]):
        parts.append(f"a{i + 1}[{_fmt_local(agent)}]")
    if "changes" in state:
        changed = " ".join(f"{k}:{v}" for k, v in sorted(state["changes"].items()))
        parts.append(f"changes[{changed}]")
    return " ".join(parts)


def _print_run(run: dict, indent: str = "  ") -> None:
    for t, state in enumerate(run["prefix"]):
        print(f"{indent}t={t}  {_fmt_state(state)}")
    offset = len(run["prefix"])
    for k, state in enumerate(run["cycle"]):
        marker = "cycle>" if k == 0 else "      "
        print(f"{indent}{marker} t={offset + k}  {_fmt_state(state)}")


def _print_system(system: dict) -> None:
    print(f"runs: {system['count']}")
    for i, run in enumerate(system["runs"]):
        print(f"run {i + 1}:")
        _print_run(run)


def _print_verdict(body: dict) -> None:
    flag = "holds" if body["holds"] else "fails"
    extra = " (vacuously)" if body.get("vacuous") else ""
    print(f"verdict: {flag}{extra}")
    if body.get("note"):
        print(f"note: {body['note']}")
    witness = body.get("witness")
    if witness:
        print(f"witness at t={witness['time']}:")
        _print_run(witness["run"])
        if witness.get("subset"):
            print("for the initial-state set:")
            for st in witness["subset"]:
                print(f"  {_fmt_state(st)}")


def _emit(args, status: int, body: dict) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(body, fh, indent=2, sort_keys=True)
            fh.write("\n")
    if not args.human:
        json.dump(body, sys.stdout, indent=2, sort_keys=True)
        print()


def _fail(status: int, body) -> int:
    detail = body.get("detail") if isinstance(body, dict) else body
    print(f"error ({status}): {detail}", file=sys.stderr)
    return EXIT_USAGE


def _outcome_exit(body: dict) -> Optional[int]:
    if body.get("outcome") in ("budget-exceeded", "undecided"):
        print(f"{body['outcome']}: {body.get('detail', body.get('note', ''))}",
              file=sys.stderr)
        return EXIT_BUDGET
    return None


def cmd_scenarios(client: ServiceClient, args) -> int:
    status, body = client.request("GET", "/scenarios")
    if status != 200:
        return _fail(status, body)
    _emit(args, status, body)
    if args.human:
        for s in body["scenarios"]:
            print(f"{s['name']}: {s['title']}")
            print(f"  programs: {', '.join(s['programs'])}")
            print(f"  contexts: {', '.join(s['contexts'])}")
            print(f"  formulas: {', '.join(s['formulas'])}")
    return EXIT_OK


def cmd_build(client: ServiceClient, args) -> int:
    body = {"scenario": args.scenario, "context": args.context,
            "program": args.program, "budget": args.budget,
            "state_cap": args.state_cap}
    if args.derive_context:
        body["derive_context"] = args.derive_context
    status, out = client.request("POST", "/build", body)
    if status != 200:
        return _fail(status, out)
    _emit(args, status, out)
    bad = _outcome_exit(out)
    if bad is not None:
        return bad
    if args.human:
        print(f"scenario {out['scenario']['name']} context {args.context} "
              f"program {args.program}")
        _print_system(out["system"])
        for d in out.get("diagnostics", []):
            print(f"note: {d}")
    return EXIT_OK


def cmd_fixpoints(client: ServiceClient, args) -> int:
    body = {"scenario": args.scenario, "context": args.context,
            "program": args.program, "method": args.method,
            "seed": args.seed, "budget": args.budget,
            "max_iters": args.max_iters, "state_cap": args.state_cap}
    status, out = client.request("POST", "/fixpoints", body)
    if status != 200:
        return _fail(status, out)
    _emit(args, status, out)
    if args.human:
        r = out["result"]
        bits = [f"kind: {r['kind']}"]
        if r.get("count") is not None:
            bits.append(f"count: {r['count']}")
        if r.get("method"):
            bits.append(f"method: {r['method']}")
        if r.get("iterations") is not None:
            bits.append(f"iterations: {r['iterations']}")
        print("  ".join(bits))
        if r.get("note"):
            print(f"note: {r['note']}")
        for i, system in enumerate(out.get("systems", [])):
            print(f"system {i + 1}:")
            _print_system(system)
    return _outcome_exit(out) or EXIT_OK


def cmd_check(client: ServiceClient, args) -> int:
    body = {"scenario": args.scenario, "program": args.program,
            "formula": args.formula, "kind": args.kind,
            "budget": args.budget, "state_cap": args.state_cap}
    if args.context:
        body["context"] = args.context
    if args.family:
        body.update({"family": args.family, "init": args.init,
                     "notion": args.notion})
    status, out = client.request("POST", "/check", body)
    if status != 200:
        return _fail(status, out)
    _emit(args, status, out)
    bad = _outcome_exit(out)
    if bad is not None:
        return bad
    if args.human:
        _print_verdict(out)
    return EXIT_OK if out["holds"] else EXIT_FAILS


def cmd_monotonicity(client: ServiceClient, args) -> int:
    body = {"scenario": args.scenario, "program": args.program,
            "formula": args.formula, "kind": args.kind,
            "family": args.family, "init": args.init,
            "stronger": args.stronger, "budget": args.budget,
            "state_cap": args.state_cap}
    status, out = client.request("POST", "/monotonicity", body)
    if status != 200:
        return _fail(status, out)
    _emit(args, status, out)
    bad = _outcome_exit(out)
    if bad is not None:
        return bad
    if args.human:
        print(f"strengthening {out['weaker']} -> {out['stronger']}")
        for cell in out["cells"]:
            flag = "holds" if cell["holds"] else "fails"
            print(f"  {cell['notion']:8s} @ {cell['init']}: {flag}")
        for notion, flag in out["flags"].items():
            print(f"{notion}: {flag}")
    return EXIT_OK if all(f == "preserved" for f in out["flags"].values()) \
        else EXIT_FAILS


def cmd_serve(client: ServiceClient, args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _global_flags(parser: argparse.ArgumentParser, root: bool) -> None:
    # on subparsers the defaults are suppressed so a value given before
    # the subcommand is not clobbered by the subparser's defaults
    default = dict(default=None) if root else dict(default=argparse.SUPPRESS)
    store_true = dict(action="store_true") if root else \
        dict(action="store_true", default=argparse.SUPPRESS)
    parser.add_argument("--server", **default,
                        help="base URL of a running service; default runs "
                             "in-process")
    parser.add_argument("--human", **store_true,
                        help="print a readable rendering instead of JSON")
    parser.add_argument("--out", **default,
                        help="also write the JSON report to this file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbp",
        description="Knowledge-based program checker: systems, fixed points, "
                    "spec verdicts, monotonicity tables.")
    _global_flags(parser, root=True)
    sub = parser.add_subparsers(dest="command", required=True)

    _global_flags(sub.add_parser("scenarios", help="list bundled scenarios"),
                  root=False)

    def common(p, with_context=True):
        _global_flags(p, root=False)
        p.add_argument("scenario", help="bundled name or path to .kbp.json")
        if with_context:
            p.add_argument("--context", required=True)
        p.add_argument("--program", required=True)
        p.add_argument("--budget", type=int, default=4096)
        p.add_argument("--state-cap", type=int, default=None, dest="state_cap")

    p = sub.add_parser("build", help="build the system of a program's "
                                     "protocol in a context")
    common(p)
    p.add_argument("--derive-context", default=None,
                   help="context whose unique fixed point supplies the "
                        "protocol of a knowledge-based program")

    p = sub.add_parser("fixpoints", help="find the systems a program represents")
    common(p)
    p.add_argument("--method", choices=["classify", "iterate", "enumerate"],
                   default="classify")
    p.add_argument("--seed", choices=["standard-closure", "all-know-true"],
                   default="standard-closure")
    p.add_argument("--max-iters", type=int, default=64, dest="max_iters")

    p = sub.add_parser("check", help="check a formula against a program")
    common(p, with_context=False)
    p.add_argument("--formula", required=True)
    p.add_argument("--kind", choices=["run-based", "knowledge-based"],
                   default="knowledge-based")
    group = p.add_argument_group("target (one of)")
    group.add_argument("--context", default=None)
    group.add_argument("--family", default=None)
    p.add_argument("--init", default=None)
    p.add_argument("--notion", choices=["family", "maximal"], default="maximal")

    p = sub.add_parser("monotonicity",
                       help="compare both notions under a strengthening")
    common(p, with_context=False)
    p.add_argument("--formula", required=True)
    p.add_argument("--kind", choices=["run-based", "knowledge-based"],
                   default="knowledge-based")
    p.add_argument("--family", required=True)
    p.add_argument("--init", required=True)
    p.add_argument("--stronger", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    _global_flags(p, root=False)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


COMMANDS = {
    "scenarios": cmd_scenarios,
    "build": cmd_build,
    "fixpoints": cmd_fixpoints,
    "check": cmd_check,
    "monotonicity": cmd_monotonicity,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_USAGE if e.code not in (0,) else EXIT_OK
    if args.command == "check" and (args.context is None) == (args.family is None):
        print("error: give exactly one of --context or --family (with --init)",
              file=sys.stderr)
        return EXIT_USAGE
    if args.command == "check" and args.family and not args.init:
        print("error: --family needs --init", file=sys.stderr)
        return EXIT_USAGE
    client = ServiceClient(args.server)
    try:
        return COMMANDS[args.command](client, args)
    except httpx.HTTPError as e:
        print(f"error: cannot reach service: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
