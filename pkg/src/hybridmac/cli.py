"""Command line client for the simulator service.

By default every subcommand talks to an in-process service instance, so
no server needs to be running. Point --server at a deployed instance to
use one instead.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import httpx
import yaml

REPORT_COLUMNS = ["mode", "link", "goodput_bps_mean", "goodput_bps_stderr",
                  "data_collisions", "retransmissions", "airtime_fraction"]


def make_client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

        from .service.app import app
        return TestClient(app)


def parse_seeds(text: str) -> list[int]:
    """Accepts "1..10" ranges or comma lists like "1,2,5"."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s.strip()]


def load_scenario_tree(path: str) -> dict:
    with open(path) as fh:
        return yaml.safe_load(fh)


def _fail(resp: httpx.Response) -> None:
    try:
        detail = resp.json().get("detail", resp.text)
    except ValueError:
        detail = resp.text
    sys.exit(f"error: {detail}")


def cmd_run(args, client: httpx.Client) -> None:
    body = {"scenario": load_scenario_tree(args.scenario),
            "include_trace": args.trace is not None}
    if args.mode:
        body["mode"] = args.mode
    if args.seed is not None:
        body["seed"] = args.seed
    if args.duration is not None:
        body["duration_s"] = args.duration
    resp = client.post("/run", json=body)
    if resp.status_code != 200:
        _fail(resp)
    out = resp.json()
    if args.trace is not None:
        Path(args.trace).write_text("\n".join(out["trace"] or []) + "\n")
        out["trace"] = f"written to {args.trace}"
    json.dump(out, sys.stdout, indent=2)
    print()


def write_report(rows: list[dict], path: str) -> None:
    if path.endswith(".json"):
        with open(path, "w") as fh:
            json.dump({"rows": rows}, fh, indent=2)
    else:
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)


def cmd_compare(args, client: httpx.Client) -> None:
    body = {"scenario": load_scenario_tree(args.scenario),
            "modes": [m.strip() for m in args.modes.split(",") if m.strip()],
            "seeds": parse_seeds(args.seeds)}
    resp = client.post("/compare", json=body)
    if resp.status_code != 200:
        _fail(resp)
    rows = resp.json()["rows"]
    write_report(rows, args.output)
    print(f"wrote {len(rows)} rows to {args.output}")


def cmd_example(args, client: httpx.Client) -> None:
    resp = client.get(f"/example/{args.n}")
    if resp.status_code != 200:
        _fail(resp)
    tree = resp.json()
    if args.emit_config:
        yaml.safe_dump(tree, sys.stdout, sort_keys=False)
    else:
        json.dump(tree, sys.stdout, indent=2)
        print()


def cmd_schedule(args, client: httpx.Client) -> None:
    body = {"scenario": load_scenario_tree(args.scenario)}
    if args.mode:
        body["mode"] = args.mode
    resp = client.post("/schedule", json=body)
    if resp.status_code != 200:
        _fail(resp)
    plan = resp.json()
    if args.emit_schedule:
        json.dump(plan, sys.stdout, indent=2)
        print()
        return
    print(f"mode={plan['mode']} slots={plan['total_slots']} "
          f"x {plan['slot_duration_us']} us, guards={plan['guard_slots']}")
    for link, slots in plan["permitted"].items():
        print(f"  {link}: slots {slots}")


def cmd_serve(args, client=None) -> None:
    import uvicorn
    uvicorn.run("hybridmac.service.app:app", host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybridmac",
                                     description="hybrid TDMA/CSMA simulator")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario")
    p.add_argument("--scenario", required=True, help="scenario config file")
    p.add_argument("--mode", choices=["dcf", "tdma", "hmac"])
    p.add_argument("--seed", type=int)
    p.add_argument("--duration", type=float, help="override duration in seconds")
    p.add_argument("--trace", help="write the event trace to this file")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("compare", help="run a mode/seed matrix and write a report")
    p.add_argument("--scenario", required=True)
    p.add_argument("--modes", default="dcf,tdma,hmac")
    p.add_argument("--seeds", default="1..10", help='e.g. "1..10" or "1,2,5"')
    p.add_argument("--output", required=True, help="report path (.csv or .json)")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("example", help="emit a built-in example scenario")
    p.add_argument("--n", type=int, required=True, choices=[1, 2, 3])
    p.add_argument("--emit-config", action="store_true",
                   help="print as a YAML config file")
    p.set_defaults(fn=cmd_example)

    p = sub.add_parser("schedule", help="synthesize a schedule without simulating")
    p.add_argument("--scenario", required=True)
    p.add_argument("--mode", choices=["tdma", "hmac"])
    p.add_argument("--emit-schedule", action="store_true",
                   help="print the full plan as JSON")
    p.set_defaults(fn=cmd_schedule)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> None:
    args = build_parser().parse_args(argv)
    if args.fn is cmd_serve:
        cmd_serve(args)
        return
    with make_client(args.server) as client:
        args.fn(args, client)


if __name__ == "__main__":
    main()
