"""Experiment harness: named configurations, grids, seeds, and result rows.

Five experiment kinds cover the benchmark suite:

  * ``demo``           -- per-stage parameter error of one algorithm on a
                          synthetic preset (default msmtfl_at);
  * ``stage-sweep``    -- per-stage error curves for msmtfl vs msmtfl_at;
  * ``lambda-sweep``   -- final error vs lambda for lasso, l2,1, msmtfl at
                          several fixed thresholds, and msmtfl_at;
  * ``tau-sensitivity``-- final msmtfl_at error for several tau multipliers;
  * ``realdata-sweep`` -- train/test nMSE and aMSE on a loaded dataset at one
                          training ratio (sweep ratios by re-running).

Configs come from plain ``key: value`` files and/or CLI flags; flags override
file values and validation reports every problem at once.  lambda is
parameterized as alpha * sqrt(ln(d*m)/n) with n the per-task sample count
(the average training count per task for real data).  Identical configs
produce byte-identical results CSVs: instances, splits and solvers are all
seed-deterministic and rows are emitted in a fixed order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import L21Options, solve_l21, solve_lasso_l11
from .core import TaskDataset, capped_l1l1_objective, quadratic_loss
from .dataio import ResultRow, SplitSpec, load_dataset, results_to_csv, split
from .datagen import SyntheticSpec, generate
from .metrics import amse, l21_error, nmse, stacked_predictions
from .multistage import (
    THETA_PRESET_MULTIPLIERS,
    MultistageConfig,
    lambda_from_alpha,
    run_msmtfl,
    run_msmtfl_at,
)

KINDS = ("demo", "stage-sweep", "lambda-sweep", "tau-sensitivity", "realdata-sweep")
ALGORITHMS = ("lasso", "l21", "msmtfl", "msmtfl_at")

#: Synthetic presets: (tasks, samples per task, features, noise sigma).
PRESETS = {
    "fig2a": dict(m=20, n=30, d=200, sigma=0.005),
    "fig2b": dict(m=15, n=40, d=250, sigma=0.01),
    "fig2c": dict(m=25, n=25, d=180, sigma=0.05),
}

DEFAULT_ALPHA = 0.02
DEFAULT_SEEDS = tuple(range(10))
DEFAULT_TAU_MULTIPLIERS = (0.5, 1.0, 5.0)


class ConfigError(ValueError):
    """Aggregated configuration problems; one message line per problem."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("\n".join(problems))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    algorithms: tuple[str, ...]
    seeds: tuple[int, ...]
    stages: int = 10
    alpha: float = DEFAULT_ALPHA
    alpha_grid: tuple[float, ...] | None = None
    theta_presets: tuple[float, ...] = (THETA_PRESET_MULTIPLIERS[0],)
    tau_multipliers: tuple[float, ...] = (1.0,)
    m: int | None = None
    n: int | None = None
    d: int | None = None
    sigma: float | None = None
    manifest: str | None = None
    train_ratio: float | None = None
    out: str | None = None

    def synthetic_spec(self, seed: int) -> SyntheticSpec:
        return SyntheticSpec(m=self.m, n=self.n, d=self.d, sigma=self.sigma, seed=seed)


@dataclass(frozen=True)
class ExperimentResult:
    rows: list[ResultRow]
    summary: dict
    csv_text: str
    hard_failure: bool = False


def _parse_floats(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip() != ""]


def _parse_ints(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip() != ""]


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a plain ``key: value`` config file into a string dict."""
    values: dict[str, str] = {}
    problems: list[str] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition(":")
        if not sep:
            problems.append(f"{path}:{lineno}: expected 'key: value', got {raw!r}")
            continue
        values[key.strip()] = value.strip()
    if problems:
        raise ConfigError(problems)
    return values

_KNOWN_KEYS = {
    "experiment", "preset", "m", "n", "d", "sigma", "algorithms", "stages",
    "seeds", "alpha", "alpha-grid", "theta-presets", "tau-multipliers",
    "manifest", "train-ratio", "out",
}


def parse_config(values: dict[str, str]) -> ExperimentConfig:
    """Validate a merged key/value mapping into an ExperimentConfig.

    Every problem is collected and reported in a single ConfigError.
    """
    problems: list[str] = []
    for key in sorted(set(values) - _KNOWN_KEYS):
        problems.append(f"unknown config key {key!r}")

    kind = values.get("experiment")
    if kind is None:
        problems.append("missing required key 'experiment'")
    elif kind not in KINDS:
        problems.append(f"unknown experiment kind {kind!r}; expected one of {', '.join(KINDS)}")
        kind = None

    def take_float(key, default=None, positive=False):
        raw = values.get(key)
        if raw is None:
            return default
        try:
            v = float(raw)
        except ValueError:
            problems.append(f"{key}: expected a number, got {raw!r}")
            return default
        if positive and v <= 0:
            problems.append(f"{key}: must be positive, got {v}")
            return default
        return v

    def take_int(key, default=None, minimum=None):
        raw = values.get(key)
        if raw is None:
            return default
        try:
            v = int(raw)
        except ValueError:
            problems.append(f"{key}: expected an integer, got {raw!r}")
            return default
        if minimum is not None and v < minimum:
            problems.append(f"{key}: must be at least {minimum}, got {v}")
            return default
        return v

    synthetic = kind in ("demo", "stage-sweep", "lambda-sweep", "tau-sensitivity")
    m = n = d = sigma = None
    if synthetic:
        preset = values.get("preset")
        if preset is not None and preset not in PRESETS:
            problems.append(f"unknown preset {preset!r}; expected one of {', '.join(PRESETS)}")
            preset = None
        dims = PRESETS.get(preset, {}) if preset else {}
        m = take_int("m", dims.get("m"), minimum=1)
        n = take_int("n", dims.get("n"), minimum=1)
        d = take_int("d", dims.get("d"), minimum=1)
        sigma = take_float("sigma", dims.get("sigma"))
        if sigma is not None and sigma < 0:
            problems.append(f"sigma: must be nonnegative, got {sigma}")
        missing = [k for k, v in (("m", m), ("n", n), ("d", d), ("sigma", sigma)) if v is None]
        if missing and not any(p.startswith(tuple(missing)) for p in problems):
            problems.append(
                f"{kind}: needs a preset or explicit {', '.join(missing)}"
            )
        for key in ("manifest", "train-ratio"):
            if key in values:
                problems.append(f"{key}: only applies to realdata-sweep")
    manifest = None
    train_ratio = None
    if kind == "realdata-sweep":
        manifest = values.get("manifest")
        if manifest is None:
            problems.append("realdata-sweep: needs a manifest path")
        train_ratio = take_float("train-ratio", 0.15)
        if train_ratio is not None and not 0.0 < train_ratio < 1.0:
            problems.append(f"train-ratio: must lie in (0, 1), got {train_ratio}")
        for key in ("preset", "m", "n", "d", "sigma"):
            if key in values:
                problems.append(f"{key}: only applies to synthetic experiments")

    default_algorithms = {
        "demo": ("msmtfl_at",),
        "stage-sweep": ("msmtfl", "msmtfl_at"),
        "lambda-sweep": ALGORITHMS,
        "tau-sensitivity": ("msmtfl_at",),
        "realdata-sweep": ALGORITHMS,
    }
    algorithms = default_algorithms.get(kind, ALGORITHMS)
    if "algorithms" in values:
        requested = tuple(a.strip() for a in values["algorithms"].split(",") if a.strip())
        unknown = [a for a in requested if a not in ALGORITHMS]
        if unknown:
            problems.append(
                f"algorithms: unknown {', '.join(map(repr, unknown))}; "
                f"expected from {', '.join(ALGORITHMS)}"
            )
        elif not requested:
            problems.append("algorithms: needs at least one algorithm")
        else:
            algorithms = requested
    if kind == "tau-sensitivity" and set(algorithms) != {"msmtfl_at"}:
        problems.append("tau-sensitivity: runs msmtfl_at only")

    stages = take_int("stages", 10, minimum=1)
    alpha = take_float("alpha", DEFAULT_ALPHA, positive=True)

    alpha_grid = None
    if "alpha-grid" in values:
        if kind != "lambda-sweep":
            problems.append("alpha-grid: only applies to lambda-sweep")
        else:
            try:
                grid = tuple(_parse_floats(values["alpha-grid"]))
                if not grid or any(a <= 0 for a in grid):
                    problems.append("alpha-grid: needs positive values")
                else:
                    alpha_grid = grid
            except ValueError:
                problems.append(f"alpha-grid: expected numbers, got {values['alpha-grid']!r}")
    if kind == "lambda-sweep" and alpha_grid is None and not any(
        p.startswith("alpha-grid") for p in problems
    ):
        alpha_grid = tuple(alpha * f for f in (0.25, 0.5, 1.0, 2.0, 4.0))

    theta_presets = (
        THETA_PRESET_MULTIPLIERS if kind == "lambda-sweep" else (THETA_PRESET_MULTIPLIERS[0],)
    )
    if "theta-presets" in values:
        if kind == "tau-sensitivity":
            problems.append("theta-presets: tau-sensitivity has no fixed-threshold runs")
        else:
            try:
                presets = tuple(_parse_floats(values["theta-presets"]))
                if not presets or any(p <= 0 for p in presets):
                    problems.append("theta-presets: needs positive multipliers")
                else:
                    theta_presets = presets
            except ValueError:
                problems.append(
                    f"theta-presets: expected numbers, got {values['theta-presets']!r}"
                )

    tau_multipliers = DEFAULT_TAU_MULTIPLIERS if kind == "tau-sensitivity" else (1.0,)
    if "tau-multipliers" in values:
        try:
            mults = tuple(_parse_floats(values["tau-multipliers"]))
            if not mults or any(t <= 0 for t in mults):
                problems.append("tau-multipliers: needs positive values")
            else:
                if kind != "tau-sensitivity" and len(mults) > 1:
                    problems.append(
                        "tau-multipliers: only tau-sensitivity sweeps several values"
                    )
                else:
                    tau_multipliers = mults
        except ValueError:
            problems.append(
                f"tau-multipliers: expected numbers, got {values['tau-multipliers']!r}"
            )

    seeds = DEFAULT_SEEDS
    if "seeds" in values:
        try:
            parsed = tuple(_parse_ints(values["seeds"]))
            if not parsed:
                problems.append("seeds: needs at least one seed")
            else:
                seeds = parsed
        except ValueError:
            problems.append(f"seeds: expected integers, got {values['seeds']!r}")

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        kind=kind,
        algorithms=tuple(algorithms),
        seeds=seeds,
        stages=stages,
        alpha=alpha,
        alpha_grid=alpha_grid,
        theta_presets=theta_presets,
        tau_multipliers=tuple(tau_multipliers),
        m=m, n=n, d=d, sigma=sigma,
        manifest=manifest,
        train_ratio=train_ratio,
        out=values.get("out"),
    )


def _algorithm_lines(config: ExperimentConfig) -> list[tuple[str, str, float | None]]:
    """Expand algorithm names into output lines: (label, base, theta multiplier)."""
    lines: list[tuple[str, str, float | None]] = []
    for name in config.algorithms:
        if name == "msmtfl":
            if len(config.theta_presets) == 1:
                lines.append(("msmtfl", "msmtfl", config.theta_presets[0]))
            else:
                for p in config.theta_presets:
                    lines.append((f"msmtfl_theta{p:g}", "msmtfl", p))
        else:
            lines.append((name, name, None))
    return lines


def _finite_or_none(value: float | None) -> float | None:
    if value is None:
        return None
    return value if math.isfinite(value) else None


def _fit_predictive(
    base: str, train: TaskDataset, lam: float, theta_mult: float | None,
    stages: int, tau_multiplier: float,
) -> tuple[np.ndarray, float | None, float | None, float | None]:
    """Fit one algorithm on training data; returns (W, theta, tau, objective)."""
    if base == "lasso":
        w = solve_lasso_l11(train, lam)
        obj = quadratic_loss(train, w) + lam * float(np.sum(np.abs(w)))
        return w, None, None, obj
    if base == "l21":
        rep = solve_l21(train, L21Options(lam=lam))
        return rep.weights, None, None, float(rep.objective_history[-1])
    if base == "msmtfl":
        theta = theta_mult * train.m * lam
        traces = run_msmtfl(train, MultistageConfig(lam=lam, stages=stages, theta=theta))
        last = traces[-1]
        return last.solution, last.theta, None, last.objective
    traces = run_msmtfl_at(
        train, MultistageConfig(lam=lam, stages=stages, tau_multiplier=tau_multiplier)
    )
    last = traces[-1]
    return last.solution, last.theta, last.tau, last.objective


def run_experiment(
    config: ExperimentConfig, dataset: TaskDataset | None = None
) -> ExperimentResult:
    """Execute every (algorithm, seed, grid point) cell of an experiment.

    For realdata-sweep, ``dataset`` may be passed directly (e.g. by the
    service, which receives it over the wire); otherwise it is loaded from
    ``config.manifest``.
    """
    if config.kind == "realdata-sweep":
        if dataset is None:
            dataset = load_dataset(config.manifest)
        return _run_realdata(config, dataset)
    if config.kind in ("demo", "stage-sweep"):
        return _run_stagewise(config)
    if config.kind == "lambda-sweep":
        return _run_lambda_sweep(config)
    return _run_tau_sensitivity(config)


def _instances(config: ExperimentConfig) -> dict[int, object]:
    return {seed: generate(config.synthetic_spec(seed)) for seed in config.seeds}


def _run_stagewise(config: ExperimentConfig) -> ExperimentResult:
    lam = lambda_from_alpha(config.alpha, config.d, config.m, config.n)
    instances = _instances(config)
    rows: list[ResultRow] = []
    hard_failure = False
    stats: dict[str, dict] = {}
    for label, base, theta_mult in _algorithm_lines(config):
        finals, firsts = [], []
        for seed in config.seeds:
            inst = instances[seed]
            if base == "msmtfl":
                theta = theta_mult * config.m * lam
                traces = run_msmtfl(
                    inst.data, MultistageConfig(lam=lam, stages=config.stages, theta=theta)
                )
            elif base == "msmtfl_at":
                traces = run_msmtfl_at(
                    inst.data,
                    MultistageConfig(
                        lam=lam, stages=config.stages,
                        tau_multiplier=config.tau_multipliers[0],
                    ),
                )
            else:
                w, theta, tau, obj = _fit_predictive(
                    base, inst.data, lam, theta_mult, config.stages,
                    config.tau_multipliers[0],
                )
                err = l21_error(w, inst.true_weights)
                ok = math.isfinite(err)
                hard_failure |= not ok
                rows.append(ResultRow(
                    algorithm=label, seed=seed, stage=1 if base == "lasso" else None,
                    lam=lam, l21_error=err if ok else None,
                    objective=_finite_or_none(obj),
                ))
                if ok:
                    finals.append(err)
                    firsts.append(err)
                continue
            errs = [l21_error(tr.solution, inst.true_weights) for tr in traces]
            ok = all(math.isfinite(e) for e in errs)
            hard_failure |= not ok
            for tr, err in zip(traces, errs):
                rows.append(ResultRow(
                    algorithm=label, seed=seed, stage=tr.stage, lam=lam,
                    theta=tr.theta, tau=tr.tau,
                    l21_error=err if math.isfinite(err) else None,
                    objective=_finite_or_none(tr.objective),
                ))
            if ok:
                firsts.append(errs[0])
                finals.append(errs[-1])
        stats[label] = _error_stats(firsts, finals)
    summary = {"kind": config.kind, "lambda": lam, "algorithms": stats}
    return _finish(config, rows, summary, hard_failure)


def _error_stats(firsts: list[float], finals: list[float]) -> dict:
    out: dict = {"runs": len(finals)}
    if finals:
        out["mean_final_l21_error"] = float(np.mean(finals))
        out["mean_stage1_l21_error"] = float(np.mean(firsts))
        ratios = [f / g for f, g in zip(firsts, finals) if g > 0]
        if ratios:
            out["error_reduction_ratios"] = ratios
    return out


def _run_lambda_sweep(config: ExperimentConfig) -> ExperimentResult:
    instances = _instances(config)
    rows: list[ResultRow] = []
    hard_failure = False
    stats: dict[str, dict] = {}
    for label, base, theta_mult in _algorithm_lines(config):
        per_lambda = {}
        for alpha in config.alpha_grid:
            lam = lambda_from_alpha(alpha, config.d, config.m, config.n)
            errs = []
            for seed in config.seeds:
                inst = instances[seed]
                w, theta, tau, obj = _fit_predictive(
                    base, inst.data, lam, theta_mult, config.stages,
                    config.tau_multipliers[0],
                )
                err = l21_error(w, inst.true_weights)
                ok = math.isfinite(err)
                hard_failure |= not ok
                stage = None
                if base == "lasso":
                    stage = 1
                elif base in ("msmtfl", "msmtfl_at"):
                    stage = config.stages
                rows.append(ResultRow(
                    algorithm=label, seed=seed, stage=stage, lam=lam,
                    theta=theta, tau=tau,
                    l21_error=err if ok else None, objective=_finite_or_none(obj),
                ))
                if ok:
                    errs.append(err)
            if errs:
                per_lambda[repr(lam)] = float(np.mean(errs))
        stats[label] = {"mean_final_l21_error_by_lambda": per_lambda}
    summary = {"kind": config.kind, "algorithms": stats}
    return _finish(config, rows, summary, hard_failure)


def _run_tau_sensitivity(config: ExperimentConfig) -> ExperimentResult:
    lam = lambda_from_alpha(config.alpha, config.d, config.m, config.n)
    instances = _instances(config)
    rows: list[ResultRow] = []
    hard_failure = False
    means: dict[str, float] = {}
    for mult in config.tau_multipliers:
        label = f"msmtfl_at_tau{mult:g}"
        errs = []
        for seed in config.seeds:
            inst = instances[seed]
            traces = run_msmtfl_at(
                inst.data,
                MultistageConfig(lam=lam, stages=config.stages, tau_multiplier=mult),
            )
            last = traces[-1]
            err = l21_error(last.solution, inst.true_weights)
            ok = math.isfinite(err)
            hard_failure |= not ok
            rows.append(ResultRow(
                algorithm=label, seed=seed, stage=last.stage, lam=lam,
                theta=last.theta, tau=last.tau,
                l21_error=err if ok else None, objective=_finite_or_none(last.objective),
            ))
            if ok:
                errs.append(err)
        if errs:
            means[f"{mult:g}"] = float(np.mean(errs))
    spread = None
    if means and min(means.values()) > 0:
        spread = max(means.values()) / min(means.values()) - 1.0
    summary = {
        "kind": config.kind, "lambda": lam,
        "mean_final_l21_error_by_multiplier": means,
        "relative_spread": spread,
    }
    return _finish(config, rows, summary, hard_failure)


def _run_realdata(config: ExperimentConfig, dataset: TaskDataset) -> ExperimentResult:
    rows: list[ResultRow] = []
    hard_failure = False
    stats: dict[str, dict] = {}
    for label, base, theta_mult in _algorithm_lines(config):
        nmses, amses = [], []
        for seed in config.seeds:
            train, test = split(dataset, SplitSpec(train_ratio=config.train_ratio, seed=seed))
            n_bar = train.n_total / train.m
            lam = config.alpha * math.sqrt(math.log(train.d * train.m) / n_bar)
            w, theta, tau, obj = _fit_predictive(
                base, train, lam, theta_mult, config.stages, config.tau_multipliers[0]
            )
            y_hat, y_ref = stacked_predictions(test, w)
            try:
                nm, am = nmse(y_hat, y_ref, test.n_total), amse(y_hat, y_ref)
            except ValueError:
                nm, am = math.inf, math.inf
            ok = math.isfinite(nm) and math.isfinite(am)
            hard_failure |= not ok
            rows.append(ResultRow(
                algorithm=label, seed=seed,
                stage=config.stages if base in ("msmtfl", "msmtfl_at") else (1 if base == "lasso" else None),
                lam=lam, theta=theta, tau=tau,
                nmse=nm if ok else None, amse=am if ok else None,
                objective=_finite_or_none(obj),
            ))
            if ok:
                nmses.append(nm)
                amses.append(am)
        stats[label] = {"runs": len(nmses)}
        if nmses:
            stats[label]["mean_nmse"] = float(np.mean(nmses))
            stats[label]["mean_amse"] = float(np.mean(amses))
    summary = {"kind": config.kind, "train_ratio": config.train_ratio, "algorithms": stats}
    return _finish(config, rows, summary, hard_failure)


def _finish(config, rows, summary, hard_failure) -> ExperimentResult:
    summary["hard_failure"] = hard_failure
    return ExperimentResult(rows, summary, results_to_csv(rows), hard_failure)
