"""Command-line client for the solver service.

By default requests are served in process against the bundled FastAPI app;
``--server URL`` sends the same JSON to a remote instance instead.  Exit
codes: 0 success, 2 invalid flags, 3 domain or infeasibility errors,
4 certificate self-consistency failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_CERT = 4


def _dumps17(obj, indent: int = 0) -> str:
    """JSON text with floats at 17 significant digits (lossless round trip)."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_dumps17(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}  {_dumps17(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


def _client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=3600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*httpx.*")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(args, path: str, payload: dict):
    with _client(args.server) as client:
        return client.post(path, json=payload)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _handle_error(response) -> int:
    if response.status_code == 422:
        print(f"invalid request: {response.text}", file=sys.stderr)
        return EXIT_USAGE
    try:
        body = response.json()
    except ValueError:
        body = {"error": "unknown", "detail": response.text}
    detail = body.get("detail", response.text)
    if response.status_code == 500 and body.get("error") == "certificate_self_check_failed":
        print(f"certificate self-check failed: {detail}", file=sys.stderr)
        return EXIT_CERT
    print(f"error: {detail}", file=sys.stderr)
    return EXIT_DOMAIN


def _set_payload(args, parser) -> dict:
    payload: dict = {"kind": args.set, "vbar": args.vbar}
    for field in ("vlo", "mu", "sigma", "omega", "xi", "vmax"):
        value = getattr(args, field, None)
        if value is not None and field != "vmax":
            payload[field] = value
    if getattr(args, "quantiles", None):
        try:
            payload["quantiles"] = json.loads(args.quantiles)
        except json.JSONDecodeError as exc:
            parser.error(f"--quantiles must be JSON like [[0.5,0.25]]: {exc}")
    if getattr(args, "segments", None):
        try:
            payload["segments"] = json.loads(args.segments)
        except json.JSONDecodeError as exc:
            parser.error(f"--segments must be JSON: {exc}")
    return payload


def _parse_prices(text: str, parser) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        parser.error(f"--prices must be comma-separated numbers: {exc}")


def cmd_solve(args, parser) -> int:
    n = args.n if args.n == "inf" else int(args.n)
    payload = {
        "set": _set_payload(args, parser),
        "n": n,
        "method": args.method,
    }
    if args.prices:
        payload["prices"] = _parse_prices(args.prices, parser)
    if args.resolution is not None:
        payload["resolution"] = args.resolution
    if args.gridsize is not None:
        payload["gridsize"] = args.gridsize
    if args.workers is not None:
        payload["workers"] = args.workers
    response = _post(args, "/solve", payload)
    if response.status_code != 200:
        return _handle_error(response)
    _emit(args, _dumps17(response.json()))
    return EXIT_OK


def cmd_verify(args, parser) -> int:
    if args.mechanism:
        try:
            mech = json.loads(Path(args.mechanism).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read mechanism file: {exc}")
    else:
        if not (args.prices and args.probs):
            parser.error("provide --mechanism FILE or both --prices and --probs")
        mech = {
            "prices": _parse_prices(args.prices, parser),
            "probs": _parse_prices(args.probs, parser),
            "vbar": args.vbar,
        }
    payload: dict = {"set": _set_payload(args, parser), "mechanism": mech}
    if args.dense_fill is not None:
        payload["dense_fill"] = args.dense_fill
    if args.vmax is not None:
        payload["vmax"] = args.vmax
    if args.gridsize is not None:
        payload["gridsize"] = args.gridsize
    response = _post(args, "/verify", payload)
    if response.status_code != 200:
        return _handle_error(response)
    _emit(args, _dumps17(response.json()))
    return EXIT_OK


def cmd_reproduce(args, parser) -> int:
    payload: dict = {"target": args.target}
    if args.resolution is not None:
        payload["resolution"] = args.resolution
    if args.workers is not None:
        payload["workers"] = args.workers
    response = _post(args, "/reproduce", payload)
    if response.status_code != 200:
        return _handle_error(response)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for entry in response.json()["files"]:
        path = outdir / entry["name"]
        path.write_text(entry["content"], encoding="utf-8")
        print(path)
    return EXIT_OK


def cmd_serve(args, parser) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def _add_set_flags(sub) -> None:
    sub.add_argument("--set", required=True,
                     choices=["support", "mean", "quantile", "multisegment", "segmentedmean", "meanvar"])
    sub.add_argument("--vbar", type=float, default=1.0)
    sub.add_argument("--vlo", type=float)
    sub.add_argument("--mu", type=float)
    sub.add_argument("--sigma", type=float)
    sub.add_argument("--omega", type=float)
    sub.add_argument("--xi", type=float)
    sub.add_argument("--quantiles", help='JSON list of [omega, xi] pairs')
    sub.add_argument("--segments", help="JSON for multisegment/segmentedmean sets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robustmenu",
        description="Robust selling mechanisms: solve, verify, reproduce.",
    )
    parser.add_argument("--server", help="remote service URL (default: in-process)")
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="synthesize a mechanism")
    _add_set_flags(solve)
    solve.add_argument("--n", default="1", help="menu size: 1, 2, ... or inf")
    solve.add_argument("--method", choices=["closed", "lp", "grid"], default="closed")
    solve.add_argument("--prices", help="comma-separated prices (method=lp)")
    solve.add_argument("--resolution", type=float, help="grid step (default 0.01*vbar)")
    solve.add_argument("--gridsize", type=int, help="dense grid size for n=inf")
    solve.add_argument("--workers", type=int)
    solve.add_argument("--out", help="write the JSON result to a file")
    solve.set_defaults(func=cmd_solve)

    verify = subs.add_parser("verify", help="certify a mechanism's worst case")
    _add_set_flags(verify)
    verify.add_argument("--mechanism", help="path to a mechanism JSON file")
    verify.add_argument("--prices", help="comma-separated prices (with --probs)")
    verify.add_argument("--probs", help="comma-separated probabilities")
    verify.add_argument("--dense-fill", type=int, dest="dense_fill")
    verify.add_argument("--vmax", type=float, help="truncation bound (meanvar)")
    verify.add_argument("--gridsize", type=int, help="adversary grid (meanvar)")
    verify.add_argument("--out", help="write the certificate JSON to a file")
    verify.set_defaults(func=cmd_verify)

    repro = subs.add_parser("reproduce", help="regenerate tables/figures as CSV")
    repro.add_argument("--target", required=True)
    repro.add_argument("--outdir", default=".")
    repro.add_argument("--resolution", type=float)
    repro.add_argument("--workers", type=int)
    repro.set_defaults(func=cmd_reproduce)

    serve = subs.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except ConnectionError as exc:
        print(f"cannot reach server: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
