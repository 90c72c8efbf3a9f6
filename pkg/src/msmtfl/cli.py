"""Experiment CLI: a thin client of the HTTP service.

The CLI merges a ``key: value`` config file with command-line flags (flags
win), validates the result, submits it to the experiment endpoint, writes the
returned CSV to disk and prints a per-algorithm summary.  By default it talks
to an in-process instance of the service over an ASGI transport, so no
server needs to be running; ``--server URL`` targets a remote instance
instead.  Real-data experiments are loaded client-side and shipped inline,
so the server never touches the local filesystem.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 hard numerical
failure.
"""

from __future__ import annotations

import argparse
import asyncio
import sys

import httpx

from .dataio import DataFormatError, load_dataset
from .experiments import ConfigError, parse_config, read_config_file

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

_FLAG_KEYS = (
    ("experiment", "experiment"),
    ("preset", "preset"),
    ("algorithms", "algorithms"),
    ("stages", "stages"),
    ("seed", "seeds"),
    ("alpha", "alpha"),
    ("alpha_grid", "alpha-grid"),
    ("theta_presets", "theta-presets"),
    ("tau_multipliers", "tau-multipliers"),
    ("train_ratio", "train-ratio"),
    ("manifest", "manifest"),
    ("out", "out"),
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="msmtfl",
        description="Run multi-task sparse feature learning experiments",
    )
    p.add_argument("--experiment", help="demo | stage-sweep | lambda-sweep | tau-sensitivity | realdata-sweep")
    p.add_argument("--config", help="key: value config file; flags override its values")
    p.add_argument("--preset", help="synthetic preset: fig2a | fig2b | fig2c")
    p.add_argument("--algorithms", help="comma list from lasso,l21,msmtfl,msmtfl_at")
    p.add_argument("--stages", help="stage count for the multistage algorithms")
    p.add_argument("--seed", help="seed or comma list of seeds (default 0-9)")
    p.add_argument("--alpha", help="lambda scale: lambda = alpha*sqrt(ln(d*m)/n)")
    p.add_argument("--alpha-grid", dest="alpha_grid", help="comma list of alphas (lambda-sweep)")
    p.add_argument("--theta-presets", dest="theta_presets", help="comma list of theta multiples of m*lambda")
    p.add_argument("--tau-multipliers", dest="tau_multipliers", help="comma list of tau multipliers")
    p.add_argument("--train-ratio", dest="train_ratio", help="training fraction (realdata-sweep)")
    p.add_argument("--manifest", help="dataset manifest path (realdata-sweep)")
    p.add_argument("--out", help="results CSV path (default: print row count only)")
    p.add_argument("--server", help="base URL of a running service; default is in-process")
    p.add_argument("--timeout", type=float, default=3600.0, help="HTTP timeout in seconds")
    return p


def merge_config(args: argparse.Namespace) -> dict[str, str]:
    values: dict[str, str] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for attr, key in _FLAG_KEYS:
        v = getattr(args, attr)
        if v is not None:
            values[key] = v
    return values


def _post_experiment(payload: dict, server: str | None, timeout: float) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=timeout) as client:
            return client.post("/experiments/run", json=payload)

    from .service import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://msmtfl.local", timeout=timeout
        ) as client:
            return await client.post("/experiments/run", json=payload)

    return asyncio.run(go())


def _print_summary(summary: dict) -> None:
    kind = summary.get("kind", "?")
    print(f"experiment: {kind}")
    if "lambda" in summary:
        print(f"lambda: {summary['lambda']:.6g}")
    algos = summary.get("algorithms", {})
    for name in algos:
        stats = algos[name]
        parts = []
        for key in ("mean_final_l21_error", "mean_stage1_l21_error", "mean_nmse", "mean_amse"):
            if key in stats:
                parts.append(f"{key}={stats[key]:.6g}")
        if "mean_final_l21_error_by_lambda" in stats:
            best = min(stats["mean_final_l21_error_by_lambda"].values())
            parts.append(f"best_mean_l21_error={best:.6g}")
        print(f"  {name}: " + (", ".join(parts) if parts else "no successful runs"))
    by_mult = summary.get("mean_final_l21_error_by_multiplier")
    if by_mult:
        for mult, err in by_mult.items():
            print(f"  tau x{mult}: mean_final_l21_error={err:.6g}")
        if summary.get("relative_spread") is not None:
            print(f"  relative spread: {summary['relative_spread']:.3%}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        values = merge_config(args)
        config = parse_config(values)
    except ConfigError as exc:
        print("configuration errors:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO

    payload: dict = {"config": values}
    if config.kind == "realdata-sweep":
        try:
            data = load_dataset(config.manifest)
        except (DataFormatError, OSError) as exc:
            print(f"cannot load dataset: {exc}", file=sys.stderr)
            return EXIT_IO
        payload["dataset"] = {
            "tasks": [
                {"x": [[float(v) for v in row] for row in t.x], "y": [float(v) for v in t.y]}
                for t in data.tasks
            ]
        }

    try:
        response = _post_experiment(payload, args.server, args.timeout)
    except httpx.HTTPError as exc:
        print(f"service unreachable: {exc}", file=sys.stderr)
        return EXIT_IO

    if response.status_code == 400:
        detail = response.json().get("detail", {})
        problems = detail.get("problems", [str(detail)]) if isinstance(detail, dict) else [str(detail)]
        print("configuration errors:", file=sys.stderr)
        for problem in problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_CONFIG
    if response.status_code != 200:
        print(f"service error {response.status_code}: {response.text}", file=sys.stderr)
        return EXIT_NUMERICAL if response.status_code == 500 else EXIT_IO

    body = response.json()
    out_path = config.out
    if out_path:
        try:
            with open(out_path, "w", newline="") as fh:
                fh.write(body["csv"])
        except OSError as exc:
            print(f"cannot write results: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"wrote {len(body['rows'])} result rows to {out_path}")
    else:
        print(f"computed {len(body['rows'])} result rows (no --out given)")
    _print_summary(body["summary"])
    if body["hard_failure"]:
        print("hard numerical failure in at least one run; see empty metric cells", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
