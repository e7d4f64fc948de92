"""Scenario configs and seeded Monte Carlo sweeps with CSV output.

A sweep walks the grid (p_total x epsilon x v_w x n_tx), draws `trials`
fresh channel realizations per grid point with per-trial seeds derived
from (master_seed, grid_index, trial_index), dispatches the configured
design method and writes one CSV row per trial plus mean/std aggregation
rows per grid point. Identical config and master seed reproduce the CSV
byte for byte; trials are order-independent, so they parallelize.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import subprocess
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__, composite, detection
from .channel import FadingParams, Geometry, dbm_to_watts, sample_channels
from .detection import ReceptionStats
from .discrete import PhaseCodebook, discrete_design
from .perfect import CovertParams, alternate_optimize, no_irs_baseline
from .robust import EllipsoidModel, KlCase, RobustParams, robust_alternate, worst_case_kl

METHODS = ("perfect", "discrete", "no_irs", "robust_kl01", "robust_kl10")

CSV_COLUMNS = (
    "kind", "method", "kl_case", "grid_index", "trial_index", "seed",
    "p_total_dbm", "n_tx", "n_irs", "phase_bits", "epsilon", "v_w",
    "rate_bits", "iterations", "lambda0", "lambda1", "threshold",
    "p_fa", "p_md", "kl_01", "kl_10", "xi",
    "max_sampled_kl", "violation_fraction", "covert_residual", "error",
)


@dataclass(frozen=True)
class ScenarioConfig:
    method: str = "perfect"
    geometry: dict = field(default_factory=lambda: {
        "alice": [0.0, 3.0], "bob": [8.0, 0.0], "willie": [5.0, 0.0], "irs": [10.0, 3.0],
    })
    n_tx: tuple = (4,)
    n_irs: int = 4
    zeta0_db: float = -30.0
    path_loss_exponents: dict = field(default_factory=lambda: {
        "aw": 3.0, "ab": 3.0, "iw": 3.0, "ib": 3.0, "ai": 2.2,
    })
    rician_k: float = 4.0
    sigma_b2_dbm: float = -80.0
    sigma_w2_dbm: float = -80.0
    p_total_dbm: tuple = (-10.0,)
    epsilon: tuple = (0.1,)
    v_w: tuple = (2e-4,)
    phase_bits: int = 2
    trials: int = 1
    master_seed: int = 0
    convergence_eps: float = 1e-4
    max_outer_iters: int = 50
    randomization_samples: int = 200
    kl_samples: int = 0
    output_path: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for name in ("n_tx", "p_total_dbm", "epsilon", "v_w"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"sweep list {name} must be nonempty")

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        doc = dict(doc)
        for name in ("n_tx", "p_total_dbm", "epsilon", "v_w"):
            if name in doc:
                val = doc[name]
                doc[name] = tuple(val) if isinstance(val, (list, tuple)) else (val,)
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        doc = asdict(self)
        for name in ("n_tx", "p_total_dbm", "epsilon", "v_w"):
            doc[name] = list(doc[name])
        return doc

    def make_geometry(self, n_tx: int) -> Geometry:
        g = self.geometry
        return Geometry(
            alice=tuple(g["alice"]), bob=tuple(g["bob"]),
            willie=tuple(g["willie"]), irs=tuple(g["irs"]),
            n_tx=n_tx, n_irs=self.n_irs,
        )

    def make_fading(self) -> FadingParams:
        a = self.path_loss_exponents
        return FadingParams(
            zeta0_db=self.zeta0_db,
            alpha_aw=a["aw"], alpha_ab=a["ab"], alpha_iw=a["iw"], alpha_ib=a["ib"],
            alpha_ai=a["ai"], rician_k=self.rician_k,
        )

    def grid(self) -> list[dict]:
        points = []
        for p in self.p_total_dbm:
            for eps in self.epsilon:
                for vw in self.v_w:
                    for n in self.n_tx:
                        points.append({
                            "p_total_dbm": float(p), "epsilon": float(eps),
                            "v_w": float(vw), "n_tx": int(n),
                        })
        return points


def default_config(**overrides) -> ScenarioConfig:
    """Baseline scenario: 4x4 arrays, -80 dBm noise, the standard 2-D layout."""
    return replace(ScenarioConfig(), **overrides)


def trial_seed(master_seed: int, grid_index: int, trial_index: int) -> int:
    """Order-independent per-trial seed derived from the master seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(grid_index, trial_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_trial(config: ScenarioConfig, grid_index: int, trial_index: int) -> dict:
    """One seeded design run; exceptions are captured in the `error` field."""
    point = config.grid()[grid_index]
    seed = trial_seed(config.master_seed, grid_index, trial_index)
    row = {
        "kind": "trial", "method": config.method, "kl_case": "",
        "grid_index": grid_index, "trial_index": trial_index, "seed": seed,
        "p_total_dbm": point["p_total_dbm"], "n_tx": point["n_tx"],
        "n_irs": config.n_irs, "phase_bits": config.phase_bits,
        "epsilon": point["epsilon"], "v_w": point["v_w"],
    }
    try:
        geom = config.make_geometry(point["n_tx"])
        ch = sample_channels(geom, config.make_fading(), seed)
        sigma_b2 = dbm_to_watts(config.sigma_b2_dbm)
        sigma_w2 = dbm_to_watts(config.sigma_w2_dbm)
        p_total = dbm_to_watts(point["p_total_dbm"])
        base_kwargs = dict(
            p_total=p_total, sigma_b2=sigma_b2, sigma_w2=sigma_w2,
            convergence_eps=config.convergence_eps,
            max_outer_iters=config.max_outer_iters,
            randomization_samples=config.randomization_samples,
        )

        if config.method == "perfect":
            sol = alternate_optimize(ch, CovertParams(**base_kwargs), seed=seed)
        elif config.method == "discrete":
            sol = discrete_design(ch, CovertParams(**base_kwargs),
                                  PhaseCodebook(config.phase_bits), seed=seed)
        elif config.method == "no_irs":
            sol = no_irs_baseline(ch, CovertParams(**base_kwargs))
        else:
            kl_case = KlCase.KL01 if config.method.endswith("kl01") else KlCase.KL10
            params = RobustParams(**base_kwargs, epsilon=point["epsilon"], kl_case=kl_case)
            model = EllipsoidModel.from_scalar(ch, point["v_w"])
            sol, _ = robust_alternate(ch, model, params, seed=seed)
            row["kl_case"] = kl_case.value
            if config.kl_samples > 0:
                wc = worst_case_kl(ch, sol, model, params, config.kl_samples, seed=seed)
                row["max_sampled_kl"] = wc.max_kl
                row["violation_fraction"] = wc.violation_fraction

        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, sol.q) \
            if config.method != "no_irs" else np.conj(ch.h_aw)
        leak = composite.received_power(t_w, sol.w_b)
        report = detection.detection_report(ReceptionStats(sigma_w2, sigma_w2 + leak))
        row.update({
            "rate_bits": sol.rate_bits, "iterations": sol.iterations,
            "lambda0": report.lambda0, "lambda1": report.lambda1,
            "threshold": report.threshold, "p_fa": report.p_fa, "p_md": report.p_md,
            "kl_01": report.kl_01, "kl_10": report.kl_10, "xi": report.xi,
            "covert_residual": leak,
        })
    except Exception as exc:  # recorded, never aborts the sweep
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_trial_packed(args) -> dict:
    config_doc, grid_index, trial_index = args
    return run_trial(ScenarioConfig.from_dict(config_doc), grid_index, trial_index)


_AGGREGATE_FIELDS = ("rate_bits", "p_fa", "p_md", "xi", "kl_01", "kl_10")


def run_sweep(config: ScenarioConfig, jobs: int = 1) -> tuple[str, int]:
    """Execute the full grid; returns (csv_text, failed_trial_count)."""
    points = config.grid()
    tasks = [(g, t) for g in range(len(points)) for t in range(config.trials)]
    if jobs > 1:
        doc = config.to_dict()
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial_packed, [(doc, g, t) for g, t in tasks]))
        rows = {task: row for task, row in zip(tasks, results)}
    else:
        rows = {(g, t): run_trial(config, g, t) for g, t in tasks}

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    failed = 0
    for g in range(len(points)):
        grid_rows = [rows[(g, t)] for t in range(config.trials)]
        for row in grid_rows:
            if row.get("error"):
                failed += 1
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])
        good = [r for r in grid_rows if not r.get("error")]
        for kind, reducer in (("mean", np.mean), ("std", np.std)):
            agg = dict(grid_rows[0])
            agg.update({"kind": kind, "trial_index": None, "seed": None,
                        "iterations": None, "lambda0": None, "lambda1": None,
                        "threshold": None, "covert_residual": None, "error": None,
                        "max_sampled_kl": None, "violation_fraction": None})
            for name in _AGGREGATE_FIELDS:
                vals = [r[name] for r in good if name in r]
                agg[name] = float(reducer(vals)) if vals else None
            writer.writerow([_fmt(agg.get(col)) for col in CSV_COLUMNS])
    return out.getvalue(), failed


def run_detection_report(config: ScenarioConfig, jobs: int = 1) -> tuple[str, int]:
    """Per-grid-point robust designs with the warden's detection figures.

    Adds the verification flags p_fa <= p_md and xi >= 1 - epsilon per row.
    """
    method = config.method if config.method.startswith("robust") else "robust_kl01"
    csv_text, failed = run_sweep(replace(config, method=method), jobs=jobs)
    reader = csv.DictReader(io.StringIO(csv_text))
    out = io.StringIO()
    cols = list(CSV_COLUMNS) + ["p_fa_le_p_md", "xi_ge_1_minus_eps"]
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    for row in reader:
        if row["kind"] == "trial" and not row["error"]:
            p_fa, p_md = float(row["p_fa"]), float(row["p_md"])
            xi, eps = float(row["xi"]), float(row["epsilon"])
            row["p_fa_le_p_md"] = int(p_fa <= p_md)
            row["xi_ge_1_minus_eps"] = int(xi >= 1.0 - eps - 1e-12)
        writer.writerow([row.get(c, "") for c in cols])
    return out.getvalue(), failed


def kl_cdf_csv(values: np.ndarray) -> str:
    """Two-column empirical CDF (kl_value, cdf) of sampled divergences."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["kl_value", "cdf"])
    vals = np.sort(np.asarray(values, dtype=float))
    n = vals.size
    for i, v in enumerate(vals, start=1):
        writer.writerow([repr(float(v)), repr(i / n)])
    return out.getvalue()


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_outputs(csv_text: str, config: ScenarioConfig, path: str,
                  wall_time_s: float) -> None:
    """CSV plus a JSON manifest (config echo, version info, timing) beside it."""
    with open(path, "w") as fh:
        fh.write(csv_text)
    manifest = {
        "config": config.to_dict(),
        "git_describe": git_describe(),
        "package_version": __version__,
        "wall_time_s": wall_time_s,
        "written_at_unix": time.time(),
    }
    with open(path + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
