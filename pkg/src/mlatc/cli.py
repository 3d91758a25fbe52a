"""Command-line client of the mapping service.

The CLI does no mapping work itself: it mounts the HTTP app in-process
(or targets a running server via --server) and drives it through the same
request/response schemas as any other client. Results come back as CSV on
stdout or into --metrics-out, and optionally as an exported map document.
"""

from __future__ import annotations

import argparse
import sys

import httpx

from .bench import format_metrics_csv, format_sweep_csv
from .mapio import dumps_doc
from .service.models import FrameMetricsModel

_U64_MAX = 2**64 - 1


class CliError(Exception):
    """User-facing failure; the message becomes the diagnostic."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlatc-bench",
        description=(
            "Benchmark and inspect the layered topological mapper on a "
            "point stream."
        ),
    )
    parser.add_argument(
        "--mode",
        choices=("flat", "mlatc"),
        default="mlatc",
        help="learner to run (default: mlatc)",
    )
    parser.add_argument(
        "--source",
        default="synthetic",
        help="point stream: 'synthetic' or 'dir:<path>' of frame files",
    )
    parser.add_argument(
        "--frames", type=int, default=10, help="frames to process (default: 10)"
    )
    parser.add_argument(
        "--lambda",
        dest="iterations",
        type=int,
        default=4000,
        metavar="N",
        help="training samples per frame (default: 4000)",
    )
    parser.add_argument(
        "--rho",
        type=float,
        default=0.5,
        help="base vigilance radius in meters (default: 0.5)",
    )
    parser.add_argument(
        "--alpha",
        type=float,
        default=4.0,
        help="vigilance growth factor between layers (default: 4.0)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=0,
        help="u64 seed for frame content and sampling (default: 0)",
    )
    parser.add_argument(
        "--freeze-updates",
        action="store_true",
        help="insertion-only mode: skip node position updates",
    )
    parser.add_argument(
        "--oracle-check",
        action="store_true",
        help="run the layered learner in lockstep with the flat baseline "
        "and count layer-1 decision mismatches",
    )
    parser.add_argument(
        "--metrics-out", metavar="CSV", help="write per-frame metrics CSV here"
    )
    parser.add_argument(
        "--map-out", metavar="PATH", help="export the final map document here"
    )
    parser.add_argument(
        "--alpha-sweep",
        metavar="LO:HI:STEP",
        help="sweep alpha over [LO, HI] in STEP increments instead of a "
        "single run; emits a sweep CSV",
    )
    parser.add_argument(
        "--analyze",
        action="store_true",
        help="print the analytical optimum alpha per cost ratio and exit",
    )
    parser.add_argument(
        "--stop-at-nodes",
        type=int,
        metavar="N",
        help="stop the run once layer 1 holds at least N nodes",
    )
    parser.add_argument(
        "--server",
        metavar="URL",
        help="send requests to a running service instead of in-process",
    )
    return parser


def make_client(server: str | None) -> httpx.Client:
    if server is not None:
        return httpx.Client(base_url=server, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app, raise_server_exceptions=False)


def _call(client: httpx.Client, method: str, path: str, **kwargs) -> dict:
    try:
        response = client.request(method, path, **kwargs)
    except httpx.HTTPError as exc:
        raise CliError(f"request to {path} failed: {exc}") from None
    if response.status_code >= 400:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise CliError(f"{path} returned {response.status_code}: {detail}")
    return response.json()


def parse_source(source: str) -> str | None:
    """Return the frame directory, or None for the synthetic stream."""
    if source == "synthetic":
        return None
    if source.startswith("dir:"):
        path = source[len("dir:") :]
        if not path:
            raise CliError("--source dir: needs a path after the colon")
        return path
    raise CliError(f"unknown source {source!r}; use 'synthetic' or 'dir:<path>'")


def parse_sweep(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError("--alpha-sweep expects LO:HI:STEP")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise CliError(f"--alpha-sweep: {exc}") from None
    return lo, hi, step


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _learner_body(args: argparse.Namespace) -> dict:
    return {
        "iterations_per_frame": args.iterations,
        "base_vigilance": args.rho,
        "alpha": args.alpha,
        "updates_enabled": not args.freeze_updates,
        "rng_seed": args.seed,
    }


def _stream_body(args: argparse.Namespace) -> dict:
    return {"seed": args.seed}


def run_analyze(client: httpx.Client) -> int:
    body = _call(client, "POST", "/analysis", json={"curve": False})
    print("ratio,alpha_star")
    for row in body["rows"]:
        print(f"{row['ratio']:g},{row['alpha_star']:.3f}")
    return 0


def run_sweep(client: httpx.Client, args: argparse.Namespace) -> int:
    lo, hi, step = parse_sweep(args.alpha_sweep)
    body = _call(
        client,
        "POST",
        "/sweeps",
        json={
            "lo": lo,
            "hi": hi,
            "step": step,
            "frames": args.frames,
            "learner": _learner_body(args),
            "stream": _stream_body(args),
        },
    )
    from .bench import SweepRow

    rows = [
        SweepRow(
            alpha=r["alpha"],
            median_wall_ms=r["median_wall_ms"],
            median_distance_evals=r["median_distance_evals"],
            total_nodes=r["total_nodes"],
        )
        for r in body["rows"]
    ]
    _emit(format_sweep_csv(rows), args.metrics_out)
    return 0


def run_benchmark_command(client: httpx.Client, args: argparse.Namespace) -> int:
    if args.oracle_check and args.mode != "mlatc":
        raise CliError("--oracle-check compares the layered learner; use --mode mlatc")
    request = {
        "mode": args.mode,
        "frames": args.frames,
        "learner": _learner_body(args),
        "stream": _stream_body(args),
        "source_dir": parse_source(args.source),
        "oracle_check": args.oracle_check,
        "stop_at_nodes": args.stop_at_nodes,
        "include_map": args.map_out is not None,
    }
    body = _call(client, "POST", "/runs", json=request)

    rows = [FrameMetricsModel(**r).to_metrics() for r in body["rows"]]
    _emit(format_metrics_csv(rows), args.metrics_out)
    if args.map_out is not None:
        with open(args.map_out, "w", encoding="utf-8") as handle:
            handle.write(dumps_doc(body["map"]))

    summary = body["summary"]
    print(
        f"{body['mode']}: {len(rows)} frames, "
        f"nodes per layer {summary['nodes_per_layer']}, "
        f"{summary['total_distance_evals']} distance evals",
        file=sys.stderr,
    )
    mismatches = body.get("total_mismatches")
    if args.oracle_check and mismatches is not None:
        print(f"oracle mismatches: {mismatches}", file=sys.stderr)
        if mismatches and args.freeze_updates:
            print(
                "error: insertion-only run must match the baseline exactly",
                file=sys.stderr,
            )
            return 1
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.frames < 0:
            raise CliError("--frames must be >= 0")
        if not 0 <= args.seed <= _U64_MAX:
            raise CliError("--seed must fit in an unsigned 64-bit integer")
        with make_client(args.server) as client:
            if args.analyze:
                return run_analyze(client)
            if args.alpha_sweep is not None:
                return run_sweep(client, args)
            return run_benchmark_command(client, args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
