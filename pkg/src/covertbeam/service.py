"""HTTP service wrapping the design library.

Complex vectors and matrices travel as nested [re, im] pairs, matching the
file formats. The CLI uses the same handler functions in-process, so the
service and the command line stay behaviorally identical.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__, detection, experiment
from .channel import complex_to_pairs, dbm_to_watts, sample_channels
from .detection import ReceptionStats
from .discrete import PhaseCodebook, discrete_design
from .perfect import CovertParams, DesignError, alternate_optimize, no_irs_baseline
from .robust import (EllipsoidModel, KlCase, RobustInfeasibleError, RobustParams,
                     robust_alternate, worst_case_kl)


class ScenarioConfigModel(BaseModel):
    method: str = "perfect"
    geometry: dict = Field(default_factory=lambda: {
        "alice": [0.0, 3.0], "bob": [8.0, 0.0], "willie": [5.0, 0.0], "irs": [10.0, 3.0],
    })
    n_tx: list[int] = [4]
    n_irs: int = 4
    zeta0_db: float = -30.0
    path_loss_exponents: dict = Field(default_factory=lambda: {
        "aw": 3.0, "ab": 3.0, "iw": 3.0, "ib": 3.0, "ai": 2.2,
    })
    rician_k: float = 4.0
    sigma_b2_dbm: float = -80.0
    sigma_w2_dbm: float = -80.0
    p_total_dbm: list[float] = [-10.0]
    epsilon: list[float] = [0.1]
    v_w: list[float] = [2e-4]
    phase_bits: int = 2
    trials: int = 1
    master_seed: int = 0
    convergence_eps: float = 1e-4
    max_outer_iters: int = 50
    randomization_samples: int = 200
    kl_samples: int = 0
    output_path: str | None = None

    def to_config(self) -> experiment.ScenarioConfig:
        return experiment.ScenarioConfig.from_dict(self.model_dump())


class DetectionReportModel(BaseModel):
    lambda0: float
    lambda1: float
    threshold: float
    p_fa: float
    p_md: float
    kl_01: float
    kl_10: float
    xi: float


class DesignRequest(BaseModel):
    config: ScenarioConfigModel = Field(default_factory=ScenarioConfigModel)
    seed: int = 0


class SolutionModel(BaseModel):
    method: str
    rate_bits: float
    iterations: int
    w_b: list[list[float]]
    q: list[list[float]]
    objective_trace: list[float]
    covert_residuals: list[float]
    detection: DetectionReportModel
    max_sampled_kl: float | None = None
    violation_fraction: float | None = None
    kl_values: list[float] | None = None


class SweepRequest(BaseModel):
    config: ScenarioConfigModel
    jobs: int = 1


class SweepResponse(BaseModel):
    csv: str
    failed_trials: int


class ChannelsRequest(BaseModel):
    config: ScenarioConfigModel = Field(default_factory=ScenarioConfigModel)
    seed: int = 0


class StatsRequest(BaseModel):
    lambda0: float
    lambda1: float


class IntervalRequest(BaseModel):
    epsilon: float


class IntervalResponse(BaseModel):
    a_bar: float
    b_bar: float


def _report_model(report) -> DetectionReportModel:
    return DetectionReportModel(
        lambda0=report.lambda0, lambda1=report.lambda1, threshold=report.threshold,
        p_fa=report.p_fa, p_md=report.p_md, kl_01=report.kl_01, kl_10=report.kl_10,
        xi=report.xi,
    )


def design_solution(config: experiment.ScenarioConfig, seed: int) -> SolutionModel:
    """Run the configured method on one seeded realization (first grid point)."""
    point = config.grid()[0]
    geom = config.make_geometry(point["n_tx"])
    ch = sample_channels(geom, config.make_fading(), seed)
    base_kwargs = dict(
        p_total=dbm_to_watts(point["p_total_dbm"]),
        sigma_b2=dbm_to_watts(config.sigma_b2_dbm),
        sigma_w2=dbm_to_watts(config.sigma_w2_dbm),
        convergence_eps=config.convergence_eps,
        max_outer_iters=config.max_outer_iters,
        randomization_samples=config.randomization_samples,
    )
    extras: dict = {}
    if config.method == "perfect":
        sol = alternate_optimize(ch, CovertParams(**base_kwargs), seed=seed)
    elif config.method == "discrete":
        sol = discrete_design(ch, CovertParams(**base_kwargs),
                              PhaseCodebook(config.phase_bits), seed=seed)
    elif config.method == "no_irs":
        sol = no_irs_baseline(ch, CovertParams(**base_kwargs))
    elif config.method in ("robust_kl01", "robust_kl10"):
        kl_case = KlCase.KL01 if config.method.endswith("kl01") else KlCase.KL10
        params = RobustParams(**base_kwargs, epsilon=point["epsilon"], kl_case=kl_case)
        model = EllipsoidModel.from_scalar(ch, point["v_w"])
        sol, _ = robust_alternate(ch, model, params, seed=seed)
        if config.kl_samples > 0:
            wc = worst_case_kl(ch, sol, model, params, config.kl_samples, seed=seed)
            extras = {
                "max_sampled_kl": wc.max_kl,
                "violation_fraction": wc.violation_fraction,
                "kl_values": [float(v) for v in wc.kl_values],
            }
    else:
        raise ValueError(f"unknown method {config.method!r}")

    leak = sol.covert_residuals[-1] if sol.covert_residuals else 0.0
    sigma_w2 = base_kwargs["sigma_w2"]
    report = detection.detection_report(ReceptionStats(sigma_w2, sigma_w2 + leak))
    return SolutionModel(
        method=sol.method,
        rate_bits=sol.rate_bits,
        iterations=sol.iterations,
        w_b=complex_to_pairs(sol.w_b),
        q=complex_to_pairs(sol.q),
        objective_trace=[float(v) for v in sol.objective_trace],
        covert_residuals=[float(v) for v in sol.covert_residuals],
        detection=_report_model(report),
        **extras,
    )


def create_app() -> FastAPI:
    app = FastAPI(title="covertbeam", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/channels/sample")
    def channels_sample(req: ChannelsRequest):
        config = req.config.to_config()
        geom = config.make_geometry(config.n_tx[0])
        ch = sample_channels(geom, config.make_fading(), req.seed)
        return {"channels": ch.to_json(), "seed": req.seed}

    @app.post("/detection/report", response_model=DetectionReportModel)
    def detection_report_endpoint(req: StatsRequest):
        try:
            stats = ReceptionStats(req.lambda0, req.lambda1)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return _report_model(detection.detection_report(stats))

    @app.post("/detection/interval", response_model=IntervalResponse)
    def detection_interval(req: IntervalRequest):
        if req.epsilon < 0:
            raise HTTPException(status_code=422, detail="epsilon must be nonnegative")
        a_bar, b_bar = detection.covert_interval(req.epsilon)
        return IntervalResponse(a_bar=a_bar, b_bar=b_bar)

    @app.post("/design", response_model=SolutionModel)
    def design(req: DesignRequest):
        try:
            return design_solution(req.config.to_config(), req.seed)
        except RobustInfeasibleError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (ValueError, DesignError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        csv_text, failed = experiment.run_sweep(req.config.to_config(), jobs=req.jobs)
        return SweepResponse(csv=csv_text, failed_trials=failed)

    @app.post("/detect", response_model=SweepResponse)
    def detect(req: SweepRequest):
        csv_text, failed = experiment.run_detection_report(req.config.to_config(), jobs=req.jobs)
        return SweepResponse(csv=csv_text, failed_trials=failed)

    return app


app = create_app()
