"""HTTP service exposing the solvers, data generator, metrics and experiments.

The service is a thin wrapper: every endpoint validates a pydantic payload,
calls into the library, and returns JSON.  Datasets travel inline as nested
arrays so the server needs no filesystem access.  JSON cannot carry IEEE
infinities, so optional ``theta`` fields use ``null`` for the no-jump
sentinel; the ``csv`` field of an experiment response is the authoritative,
byte-exact results file content (it spells the sentinel ``inf``).

Run standalone with ``msmtfl-service`` or mount ``create_app()`` under any
ASGI server.  The bundled CLI talks to this app in-process by default.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .baselines import L21Options, solve_l21, solve_lasso_l11
from .core import TaskDataset, make_dataset
from .dataio import ResultRow
from .datagen import SyntheticSpec, generate
from .experiments import ConfigError, parse_config, run_experiment
from .metrics import amse, l21_error, nmse
from .multistage import MultistageConfig, run_msmtfl, run_msmtfl_at
from .wlasso import SolverOptions, solve_weighted_l1


class TaskPayload(BaseModel):
    x: list[list[float]]
    y: list[float]


class DatasetPayload(BaseModel):
    tasks: list[TaskPayload] = Field(min_length=1)

    def to_dataset(self) -> TaskDataset:
        try:
            return make_dataset((np.array(t.x), np.array(t.y)) for t in self.tasks)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))


class SolverOptionsPayload(BaseModel):
    tolerance: float = 1e-8
    max_sweeps: int = 10_000

    def to_options(self) -> SolverOptions:
        return SolverOptions(tolerance=self.tolerance, max_sweeps=self.max_sweeps)


class WeightedLassoRequest(BaseModel):
    dataset: DatasetPayload
    penalties: list[float]
    options: SolverOptionsPayload = SolverOptionsPayload()


class WeightedLassoResponse(BaseModel):
    weights: list[list[float]]
    sweeps_used: list[int]
    kkt_residual: list[float]
    converged: list[bool]


class LassoRequest(BaseModel):
    dataset: DatasetPayload
    lam: float = Field(gt=0)
    options: SolverOptionsPayload = SolverOptionsPayload()


class L21Request(BaseModel):
    dataset: DatasetPayload
    lam: float = Field(ge=0)
    max_iterations: int = 5000
    tolerance: float = 1e-9


class WeightsResponse(BaseModel):
    weights: list[list[float]]
    converged: bool = True
    iterations: int | None = None


class MultistageRequest(BaseModel):
    dataset: DatasetPayload
    lam: float = Field(gt=0)
    stages: int = Field(default=10, ge=1)
    theta: float | None = None  # fixed threshold; required for msmtfl
    tau_multiplier: float = Field(default=1.0, gt=0)
    solver: SolverOptionsPayload = SolverOptionsPayload()
    include_solutions: bool = False


class StagePayload(BaseModel):
    stage: int
    theta: float | None  # null = no-jump sentinel (+inf)
    tau: float | None
    objective: float
    row_norms_max: float
    unpenalized_rows: int
    converged: bool
    solution: list[list[float]] | None = None


class MultistageResponse(BaseModel):
    stages: list[StagePayload]
    final_weights: list[list[float]]


class SyntheticRequest(BaseModel):
    m: int = Field(ge=1)
    n: int = Field(ge=1)
    d: int = Field(ge=1)
    sigma: float = Field(ge=0)
    row_zero_fraction: float = 0.9
    entry_zero_fraction: float = 0.8
    seed: int = 0


class SyntheticResponse(BaseModel):
    tasks: list[TaskPayload]
    true_weights: list[list[float]]


class RegressionMetricsRequest(BaseModel):
    predicted: list[float]
    reference: list[float]
    n: int = Field(ge=1)


class RegressionMetricsResponse(BaseModel):
    nmse: float
    amse: float


class WeightErrorRequest(BaseModel):
    estimated: list[list[float]]
    truth: list[list[float]]


class ExperimentRequest(BaseModel):
    # same keys and string values as a config file; flags-style overrides
    # should be merged by the client before submitting
    config: dict[str, str]
    dataset: DatasetPayload | None = None  # inline data for realdata-sweep


class ResultRowPayload(BaseModel):
    algorithm: str
    seed: int
    stage: int | None
    lam: float | None
    theta: float | None
    tau: float | None
    l21_error: float | None
    nmse: float | None
    amse: float | None
    objective: float | None


class ExperimentResponse(BaseModel):
    rows: list[ResultRowPayload]
    summary: dict
    csv: str
    hard_failure: bool


def _wire_float(v: float | None) -> float | None:
    if v is None or not math.isfinite(v):
        return None
    return float(v)


def _wire_row(r: ResultRow) -> ResultRowPayload:
    return ResultRowPayload(
        algorithm=r.algorithm, seed=r.seed, stage=r.stage,
        lam=_wire_float(r.lam), theta=_wire_float(r.theta), tau=_wire_float(r.tau),
        l21_error=_wire_float(r.l21_error), nmse=_wire_float(r.nmse),
        amse=_wire_float(r.amse), objective=_wire_float(r.objective),
    )


def _check_finite(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise HTTPException(status_code=500, detail="solver produced non-finite values")


def _matrix(arr: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in arr]


def create_app() -> FastAPI:
    app = FastAPI(title="msmtfl", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/solvers/weighted-lasso", response_model=WeightedLassoResponse)
    def weighted_lasso(req: WeightedLassoRequest) -> WeightedLassoResponse:
        data = req.dataset.to_dataset()
        if len(req.penalties) != data.d:
            raise HTTPException(
                status_code=400,
                detail=f"penalty vector length {len(req.penalties)} != d = {data.d}",
            )
        try:
            report = solve_weighted_l1(data, np.array(req.penalties), req.options.to_options())
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        _check_finite(report.solution)
        return WeightedLassoResponse(
            weights=_matrix(report.solution),
            sweeps_used=[int(v) for v in report.sweeps_used],
            kkt_residual=[float(v) for v in report.kkt_residual],
            converged=[bool(v) for v in report.converged],
        )

    @app.post("/solvers/lasso", response_model=WeightsResponse)
    def lasso(req: LassoRequest) -> WeightsResponse:
        data = req.dataset.to_dataset()
        w = solve_lasso_l11(data, req.lam, req.options.to_options())
        _check_finite(w)
        return WeightsResponse(weights=_matrix(w))

    @app.post("/solvers/l21", response_model=WeightsResponse)
    def l21(req: L21Request) -> WeightsResponse:
        data = req.dataset.to_dataset()
        report = solve_l21(
            data,
            L21Options(lam=req.lam, max_iterations=req.max_iterations, tolerance=req.tolerance),
        )
        _check_finite(report.weights)
        return WeightsResponse(
            weights=_matrix(report.weights),
            converged=report.converged,
            iterations=report.iterations,
        )

    def _multistage(req: MultistageRequest, adaptive: bool) -> MultistageResponse:
        data = req.dataset.to_dataset()
        try:
            config = MultistageConfig(
                lam=req.lam, stages=req.stages, theta=req.theta,
                tau_multiplier=req.tau_multiplier, solver=req.solver.to_options(),
            )
            traces = run_msmtfl_at(data, config) if adaptive else run_msmtfl(data, config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        final = traces[-1].solution
        _check_finite(final)
        stages = [
            StagePayload(
                stage=tr.stage,
                theta=_wire_float(tr.theta),
                tau=tr.tau,
                objective=float(tr.objective),
                row_norms_max=float(np.max(tr.row_norms)),
                unpenalized_rows=int(np.sum(tr.penalties == 0.0)),
                converged=bool(np.all(tr.report.converged)),
                solution=_matrix(tr.solution) if req.include_solutions else None,
            )
            for tr in traces
        ]
        return MultistageResponse(stages=stages, final_weights=_matrix(final))

    @app.post("/solvers/msmtfl", response_model=MultistageResponse)
    def msmtfl(req: MultistageRequest) -> MultistageResponse:
        if req.theta is None:
            raise HTTPException(status_code=400, detail="msmtfl needs a fixed theta")
        return _multistage(req, adaptive=False)

    @app.post("/solvers/msmtfl-at", response_model=MultistageResponse)
    def msmtfl_at(req: MultistageRequest) -> MultistageResponse:
        return _multistage(req, adaptive=True)

    @app.post("/data/synthetic", response_model=SyntheticResponse)
    def synthetic(req: SyntheticRequest) -> SyntheticResponse:
        try:
            spec = SyntheticSpec(
                m=req.m, n=req.n, d=req.d, sigma=req.sigma,
                row_zero_fraction=req.row_zero_fraction,
                entry_zero_fraction=req.entry_zero_fraction, seed=req.seed,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        inst = generate(spec)
        return SyntheticResponse(
            tasks=[
                TaskPayload(x=_matrix(t.x), y=[float(v) for v in t.y])
                for t in inst.data.tasks
            ],
            true_weights=_matrix(inst.true_weights),
        )

    @app.post("/metrics/regression", response_model=RegressionMetricsResponse)
    def regression_metrics(req: RegressionMetricsRequest) -> RegressionMetricsResponse:
        try:
            return RegressionMetricsResponse(
                nmse=nmse(np.array(req.predicted), np.array(req.reference), req.n),
                amse=amse(np.array(req.predicted), np.array(req.reference)),
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/metrics/weight-error")
    def weight_error(req: WeightErrorRequest) -> dict:
        try:
            return {"l21_error": l21_error(np.array(req.estimated), np.array(req.truth))}
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/experiments/run", response_model=ExperimentResponse)
    def experiments_run(req: ExperimentRequest) -> ExperimentResponse:
        try:
            config = parse_config(req.config)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail={"category": "config", "problems": exc.problems})
        dataset = req.dataset.to_dataset() if req.dataset is not None else None
        if config.kind == "realdata-sweep" and dataset is None:
            raise HTTPException(
                status_code=400,
                detail={"category": "config", "problems": ["realdata-sweep needs an inline dataset"]},
            )
        try:
            result = run_experiment(config, dataset=dataset)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={"category": "config", "problems": [str(exc)]})
        return ExperimentResponse(
            rows=[_wire_row(r) for r in result.rows],
            summary=result.summary,
            csv=result.csv_text,
            hard_failure=result.hard_failure,
        )

    return app


app = create_app()


def main() -> None:
    """Entry point for ``msmtfl-service``: serve the app with uvicorn."""
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="Serve the msmtfl HTTP API")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    args = parser.parse_args()
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
