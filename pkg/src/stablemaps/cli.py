"""Command-line client for the stablemaps service.

Subcommands map one-to-one onto service endpoints.  By default the app is
served in-process (no network); pass --server to target a running
instance, or use ``stablemaps serve`` to start one.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

        from .service import app
        return TestClient(app)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--family", default="kazakov", choices=["kazakov", "tuned"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=0)
    p.add_argument("--out", default=None, help="write the payload to a file")
    p.add_argument("--server", default=None, help="remote service URL")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stablemaps",
                                 description="Boltzmann planar map toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="emit mobiles, paths, or maps")
    _common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--kind", default="mobile", choices=["mobile", "paths", "map"])

    p = sub.add_parser("verify", help="run the exact-identity suites")
    _common(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--grid", type=int, default=32)

    p = sub.add_parser("estimate", help="run a scaling campaign")
    _common(p)
    p.add_argument("--experiment", default="ball_volume",
                   choices=["ball_volume", "two_point", "verify", "coupling"])
    p.add_argument("--n", type=int, nargs="+", default=[1000])
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--grid", type=int, default=32)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "csv"])

    p = sub.add_parser("twopoint", help="two-point residual table")
    _common(p)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--alphas", type=float, nargs="+", default=None)

    p = sub.add_parser("render", help="lamination SVG")
    _common(p)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--kind", default="X", choices=["X", "Z"])
    p.add_argument("--size", type=int, default=500)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8350)
    return ap


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _records_to_csv(records_jsonl: str) -> str:
    rows = [json.loads(line) for line in records_jsonl.splitlines() if line]
    if not rows:
        return ""
    keys = ["experiment", "n", "sample"]
    stat_keys = sorted({k for r in rows for k in r.get("stats", {})})
    out = [",".join(keys + stat_keys)]
    for r in rows:
        vals = [str(r.get(k, "")) for k in keys]
        vals += [json.dumps(r.get("stats", {}).get(k, "")) for k in stat_keys]
        out.append(",".join(vals))
    return "\n".join(out) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    with _client(args.server) as client:
        if args.command == "sample":
            r = client.post("/sample", json={
                "alpha": args.alpha, "family": args.family, "n": args.n,
                "samples": args.samples, "seed": args.seed,
                "kind": args.kind, "k_max": args.kmax})
            r.raise_for_status()
            _emit("\n".join(r.json()["items"]), args.out)
            return 0
        if args.command == "verify":
            r = client.post("/verify", json={
                "alpha": args.alpha, "family": args.family, "n": args.n,
                "samples": args.samples, "seed": args.seed, "grid": args.grid})
            r.raise_for_status()
            body = r.json()
            _emit(f"samples={body['samples']} violations={body['total_violations']} "
                  f"ok={body['ok']}", args.out)
            return 0 if body["ok"] else 1
        if args.command == "estimate":
            r = client.post("/estimate", json={
                "experiment": args.experiment, "alpha": args.alpha,
                "family": args.family, "n_list": args.n,
                "samples": args.samples, "seed": args.seed,
                "k_max": args.kmax, "grid": args.grid})
            r.raise_for_status()
            body = r.json()
            payload = body["records_jsonl"] if args.format == "jsonl" \
                else _records_to_csv(body["records_jsonl"])
            _emit(json.dumps(body["summary"], sort_keys=True) + "\n" + payload,
                  args.out)
            return 0
        if args.command == "twopoint":
            alphas = args.alphas if args.alphas is not None else [args.alpha]
            r = client.post("/twopoint", json={"alphas": alphas, "c": args.c})
            r.raise_for_status()
            lines = ["alpha c residual error_estimate"]
            for row in r.json()["rows"]:
                lines.append(f"{row['alpha']} {row['c']:.10g} "
                             f"{row['residual']:.3e} {row['error_estimate']:.1e}")
            _emit("\n".join(lines), args.out)
            return 0
        if args.command == "render":
            r = client.post("/render", json={
                "alpha": args.alpha, "family": args.family, "n": args.n,
                "seed": args.seed, "kind": args.kind, "size": args.size})
            r.raise_for_status()
            _emit(r.json()["svg"], args.out)
            return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
