"""Robust designs under ellipsoidal uncertainty on the warden's channels.

The warden-side channels are known only as estimates inside ellipsoids.
The stacked error vector (surface path mapped through the current reflect
matrix, then the direct path) lives in a single ellipsoid whose shape is
refreshed every outer iteration; the two-sided leakage band implied by the
KL covertness budget is enforced for every point of that ellipsoid through
the matrix-inequality restriction with nonnegative multipliers. Extracted
beamformers are additionally scaled so the closed-form worst case meets
the band, making the guarantee independent of solver slack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import composite, detection, linalg, sdp
from .channel import ChannelSet
from .detection import DetectionReport, ReceptionStats
from .perfect import BeamformerSolution, CovertParams, DesignError

# Uncertainty sizes below this are treated as a point ellipsoid (nominal design).
_POINT_ELLIPSOID = 1e-30


class KlCase(str, Enum):
    """Which divergence carries the covertness budget."""

    KL01 = "kl01"  # noise-model against signal-model
    KL10 = "kl10"  # signal-model against noise-model


@dataclass(frozen=True)
class EllipsoidModel:
    """Estimated warden channels plus the error-ellipsoid shapes and sizes."""

    h_aw_hat: np.ndarray
    h_iw_hat: np.ndarray
    c_aw: np.ndarray
    c_iw: np.ndarray
    v_aw: float
    v_iw: float

    def __post_init__(self):
        for name in ("c_aw", "c_iw"):
            mat = linalg.as_hermitian(getattr(self, name))
            if mat.shape[0] and float(np.linalg.eigvalsh(mat)[0]) <= 0.0:
                raise ValueError(f"{name} must be positive definite")
        if self.v_aw < 0.0 or self.v_iw < 0.0:
            raise ValueError("ellipsoid sizes must be nonnegative")

    @property
    def v_w(self) -> float:
        return self.v_aw + self.v_iw

    @classmethod
    def from_scalar(cls, ch: ChannelSet, v_w: float) -> "EllipsoidModel":
        """Balls of equal total size v_w split evenly across the two links."""
        n, m = ch.n_tx, ch.n_irs
        return cls(
            h_aw_hat=ch.h_aw.copy(),
            h_iw_hat=ch.h_iw.copy(),
            c_aw=np.eye(n, dtype=complex),
            c_iw=np.eye(m, dtype=complex),
            v_aw=v_w / 2.0,
            v_iw=v_w / 2.0,
        )


@dataclass(frozen=True)
class RobustParams(CovertParams):
    kl_case: KlCase = KlCase.KL01
    a_bar: float | None = None
    b_bar: float | None = None

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1) for robust designs")

    def interval(self) -> tuple[float, float]:
        """(a_bar, b_bar) bounds on lambda1/lambda0 for the KL01 budget."""
        if self.a_bar is not None and self.b_bar is not None:
            return self.a_bar, self.b_bar
        return detection.covert_interval(self.epsilon)

    def leakage_band(self) -> tuple[float, float]:
        """Admissible [lo, hi] for the warden signal power |t_w w|^2.

        KL01 keeps lambda1/lambda0 inside [a_bar, b_bar]; KL10 keeps
        lambda0/lambda1 inside the same interval, which flips it onto
        [1/b_bar, 1/a_bar] for the power ratio.
        """
        a_bar, b_bar = self.interval()
        if self.kl_case == KlCase.KL01:
            return self.sigma_w2 * (a_bar - 1.0), self.sigma_w2 * (b_bar - 1.0)
        return self.sigma_w2 * (1.0 / b_bar - 1.0), self.sigma_w2 * (1.0 / a_bar - 1.0)


class RobustInfeasibleError(DesignError):
    """Covertness band too tight for the uncertainty set."""

    def __init__(self, a_bar: float, b_bar: float, v_w: float,
                 solution: sdp.SdpSolution | None = None):
        super().__init__(
            f"robust covert design infeasible: interval=({a_bar:.6g}, {b_bar:.6g}), v_w={v_w:.3g}",
            solution,
        )
        self.a_bar = a_bar
        self.b_bar = b_bar
        self.v_w = v_w


def _inv_sqrt(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(linalg.as_hermitian(mat))
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def _hermitian_inv(mat: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Exactly Hermitian inverse of (mat + ridge I) via eigendecomposition.

    Plain matrix inversion loses symmetry at poor conditioning, which then
    trips the Hermitian validation downstream.
    """
    vals, vecs = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    return (vecs / (vals + ridge)) @ vecs.conj().T


def stacked_uncertainty(model: EllipsoidModel, h_ai: np.ndarray,
                        q: np.ndarray) -> tuple[np.ndarray, float]:
    """Shape matrix and size of the stacked error ellipsoid for the current q.

    The surface-path error maps through T = h_ai^H diag(q)^H; its image
    ellipsoid has shape (T C_iw^{-1} T^H + tau I)^{-1}, regularized so the
    block stays positive definite at any rank while still containing the
    image. The direct-path block is c_aw unchanged; sizes add.
    """
    n = h_ai.shape[1]
    t_map = h_ai.conj().T @ np.diag(np.conj(q))
    t_tilde = t_map @ _inv_sqrt(model.c_iw)
    gram = t_tilde @ t_tilde.conj().T
    lam_max = float(np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))[-1]) if n else 0.0
    if lam_max <= 0.0:
        c1 = np.eye(n, dtype=complex)
    else:
        c1 = _hermitian_inv(gram, ridge=1e-6 * lam_max)
    c_w = np.zeros((2 * n, 2 * n), dtype=complex)
    c_w[:n, :n] = c1
    c_w[n:, n:] = model.c_aw
    return linalg.as_hermitian(c_w, tol=1e-9), model.v_w


def stacked_estimate(model: EllipsoidModel, h_ai: np.ndarray, q: np.ndarray) -> np.ndarray:
    """ghat = [h_ai^H Q^H h_iw_hat; h_aw_hat], the stacked nominal channel."""
    top = h_ai.conj().T @ (np.conj(q) * model.h_iw_hat)
    return np.concatenate([top, model.h_aw_hat])


def combined_uncertainty(model: EllipsoidModel, h_ai: np.ndarray,
                         q: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Shape of the ellipsoid traced by the combined channel error.

    The leakage depends on the stacked error only through the sum of its
    two halves; the image of the stacked ellipsoid under that sum is again
    an ellipsoid whose inverse shape is the sum of block inverse shapes
    (support functions match, so nothing is given away). Returns
    (c_t, c_t_inv, v_w) with c_t positive definite.
    """
    n = h_ai.shape[1]
    t_map = h_ai.conj().T @ np.diag(np.conj(q))
    t_tilde = t_map @ _inv_sqrt(model.c_iw)
    gram = t_tilde @ t_tilde.conj().T
    gram = 0.5 * (gram + gram.conj().T)
    lam_max = float(np.linalg.eigvalsh(gram)[-1]) if n else 0.0
    if lam_max <= 0.0:
        c1_inv = np.zeros((n, n), dtype=complex)
    else:
        # inverse of the regularized image shape, exact by construction
        c1_inv = gram + 1e-6 * lam_max * np.eye(n)
    c_t_inv = linalg.as_hermitian(c1_inv + _hermitian_inv(model.c_aw), tol=1e-9)
    c_t = _hermitian_inv(c_t_inv)
    return c_t, c_t_inv, model.v_w


def build_lmis(w_hat: np.ndarray, g_w_hat: np.ndarray, c_w: np.ndarray, v_w: float,
               a_bar: float, b_bar: float, sigma_w2: float,
               eta1: float, eta2: float) -> tuple[np.ndarray, np.ndarray]:
    """Numeric matrix-inequality blocks certifying the two-sided leakage band.

    Evaluated at a stacked Gram matrix w_hat (2N x 2N) and multipliers
    eta1, eta2 >= 0; both returned matrices PSD certifies
    sigma_w2 (a_bar - 1) <= |(g_hat + dg)^H w|^2 <= sigma_w2 (b_bar - 1)
    for every dg in the ellipsoid dg^H c_w dg <= v_w.
    """
    dim = w_hat.shape[0]
    if g_w_hat.shape != (dim,) or c_w.shape != (dim, dim):
        raise ValueError("dimension mismatch between w_hat, g_w_hat and c_w")
    wg = w_hat @ g_w_hat
    gwg = float(np.real(np.vdot(g_w_hat, wg)))
    lo = sigma_w2 * (a_bar - 1.0)
    hi = sigma_w2 * (b_bar - 1.0)

    lmi1 = np.zeros((dim + 1, dim + 1), dtype=complex)
    lmi1[:dim, :dim] = w_hat + eta1 * c_w
    lmi1[:dim, dim] = wg
    lmi1[dim, :dim] = wg.conj()
    lmi1[dim, dim] = gwg - lo - eta1 * v_w

    lmi2 = np.zeros((dim + 1, dim + 1), dtype=complex)
    lmi2[:dim, :dim] = -w_hat + eta2 * c_w
    lmi2[:dim, dim] = -wg
    lmi2[dim, :dim] = -wg.conj()
    lmi2[dim, dim] = -gwg + hi - eta2 * v_w
    return linalg.as_hermitian(lmi1, tol=1e-9), linalg.as_hermitian(lmi2, tol=1e-9)


def _worst_case_amplitude(w: np.ndarray, t_w_hat: np.ndarray, c_t_inv: np.ndarray,
                          v_w: float) -> float:
    """sup over the combined error ellipsoid of |(t_w_hat + dt^H) w|."""
    nominal = abs(t_w_hat @ w)
    spread = math.sqrt(max(float(np.real(np.vdot(w, c_t_inv @ w))), 0.0) * v_w)
    return float(nominal + spread)


def solve_robust_w(ch: ChannelSet, q: np.ndarray, model: EllipsoidModel,
                   params: RobustParams, rng: np.random.Generator | int = 0) -> np.ndarray:
    """Transmit vector meeting the leakage band for every channel in the ellipsoid.

    Works on the combined error (the sum of the two stacked halves, an
    exactly equivalent ellipsoid of half the dimension); the power row is
    tightened to the trace cap the band already implies (pure
    preconditioning, the feasible set is unchanged), and extracted
    candidates are rescaled onto the closed-form worst case so the
    guarantee survives randomization.
    """
    n = ch.n_tx
    a_bar, b_bar = params.interval()
    lo, hi = params.leakage_band()
    t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
    g_hat = stacked_estimate(model, ch.h_ai, q)
    t_w_hat = np.conj(g_hat[:n] + g_hat[n:])
    c_b = np.outer(t_b.conj(), t_b)

    if model.v_w <= _POINT_ELLIPSOID:
        c_t_inv = np.zeros((n, n), dtype=complex)
        v_w = 0.0
        x_w = np.outer(t_w_hat.conj(), t_w_hat)
        problem = sdp.SdpProblem(
            block_dims=[n],
            objective={0: c_b},
            constraints=[
                sdp.SdpConstraint({0: np.eye(n, dtype=complex)}, "<=", params.p_total),
                sdp.SdpConstraint({0: x_w}, "<=", hi),
                sdp.SdpConstraint({0: x_w}, ">=", lo),
            ],
        )
    else:
        c_t, c_t_inv, v_w = combined_uncertainty(model, ch.h_ai, q)
        dim = n + 1
        stack = np.zeros((n, dim), dtype=complex)
        stack[:, :n] = np.eye(n)
        stack[:, n] = t_w_hat.conj()
        eta_coeff = np.zeros((dim, dim), dtype=complex)
        eta_coeff[:n, :n] = c_t
        eta_coeff[n, n] = -v_w
        const1 = np.zeros((dim, dim), dtype=complex)
        const1[n, n] = -lo
        const2 = np.zeros((dim, dim), dtype=complex)
        const2[n, n] = hi
        # Implied by the upper matrix inequality; added to precondition scales.
        trace_cap = hi / v_w * float(np.real(np.trace(c_t)))
        problem = sdp.SdpProblem(
            block_dims=[n, 1, 1],
            objective={0: c_b},
            constraints=[
                sdp.SdpConstraint(
                    {0: np.eye(n, dtype=complex)}, "<=", min(params.p_total, trace_cap)
                ),
            ],
            lmi_constraints=[
                sdp.LmiConstraint(dim, const1,
                                  [sdp.LmiTerm(0, stack, +1.0), sdp.LmiTerm(1, eta_coeff, +1.0)]),
                sdp.LmiConstraint(dim, const2,
                                  [sdp.LmiTerm(0, stack, -1.0), sdp.LmiTerm(2, eta_coeff, +1.0)]),
            ],
        )

    sol = sdp.solve(problem)
    if sol.status == sdp.SdpStatus.INFEASIBLE:
        raise RobustInfeasibleError(a_bar, b_bar, model.v_w, sol)
    if sol.status not in (sdp.SdpStatus.OPTIMAL, sdp.SdpStatus.MAX_ITERATIONS):
        raise DesignError(f"robust transmit SDR failed with status {sol.status.value}", sol)
    w_mat = sol.primal_blocks[0]

    def project(v: np.ndarray) -> np.ndarray | None:
        nrm = float(np.linalg.norm(v))
        if nrm <= 0.0:
            return None
        if model.v_w <= _POINT_ELLIPSOID:
            worst = abs(t_w_hat @ v)
        else:
            worst = _worst_case_amplitude(v, t_w_hat, c_t_inv, v_w)
        scale = math.sqrt(params.p_total) / nrm
        if worst > 0.0:
            scale = min(scale, math.sqrt(max(hi, 0.0)) / worst)
        return scale * v

    def objective(v: np.ndarray) -> float:
        return composite.received_power(t_b, v)

    candidates = []
    lead = project(linalg.rank_one_extract(w_mat))
    if lead is not None:
        candidates.append(lead)
    try:
        candidates.append(
            sdp.gaussian_randomization(w_mat, params.randomization_samples,
                                       feasibility_projector=project,
                                       objective=objective, rng=rng)
        )
    except sdp.GaussianRandomizationError:
        pass
    if not candidates:
        return np.zeros(n, dtype=complex)
    return max(candidates, key=objective)


def solve_robust_q(ch: ChannelSet, w_b: np.ndarray, params: RobustParams,
                   rand_samples: int | None = None,
                   q_prev: np.ndarray | None = None,
                   rng: np.random.Generator | int = 0) -> np.ndarray:
    """Reflect phases keeping the nominal leakage inside the band.

    Estimated warden channels are used directly (the uncertainty was spent
    on the transmit step). Candidates violating the nominal band are
    rejected; the incumbent q is kept when nothing better survives.
    """
    samples = params.randomization_samples if rand_samples is None else rand_samples
    lo, hi = params.leakage_band()
    g_b, h_b, _, _ = composite.reflect_coupling(ch.h_ab, ch.h_ib, ch.h_ai, w_b)
    g_w, h_w, _, _ = composite.reflect_coupling(ch.h_aw, ch.h_iw, ch.h_ai, w_b)
    dim = g_b.shape[0]
    constraints = [
        sdp.SdpConstraint({0: g_w}, "<=", hi - h_w),
        sdp.SdpConstraint({0: g_w}, ">=", lo - h_w),
    ]
    for m in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[m, m] = 1.0
        constraints.append(sdp.SdpConstraint({0: e}, "==", 1.0))
    sol = sdp.solve(sdp.SdpProblem([dim], {0: g_b}, constraints),
                    sdp.SdpSettings(scale_hint=1.0))
    if sol.status == sdp.SdpStatus.INFEASIBLE:
        a_bar, b_bar = params.interval()
        raise RobustInfeasibleError(a_bar, b_bar, 0.0, sol)
    if sol.status not in (sdp.SdpStatus.OPTIMAL, sdp.SdpStatus.MAX_ITERATIONS):
        raise DesignError(f"robust reflect SDR failed with status {sol.status.value}", sol)
    q_mat = sol.primal_blocks[0]

    def objective(q: np.ndarray) -> float:
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
        return composite.received_power(t_b, w_b)

    def leakage(q: np.ndarray) -> float:
        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
        return composite.received_power(t_w, w_b)

    band_tol = 1e-6 * max(abs(hi), 1e-12 * params.sigma_w2)
    candidates = [composite.normalize_reflect(linalg.rank_one_extract(q_mat))]
    try:
        candidates.append(
            sdp.gaussian_randomization(q_mat, samples,
                                       feasibility_projector=composite.normalize_reflect,
                                       objective=objective, rng=rng)
        )
    except sdp.GaussianRandomizationError:
        pass
    _, _, phi_b, c_b = composite.reflect_coupling(ch.h_ab, ch.h_ib, ch.h_ai, w_b)
    candidates.append(np.exp(1j * composite.phase_align(phi_b, c_b)))
    sweep_starts = [candidates[0]] if q_prev is None else [np.asarray(q_prev, dtype=complex),
                                                           candidates[0]]
    for start in sweep_starts:
        theta = composite.coordinate_phase_sweep(phi_b, c_b, np.angle(start))
        candidates.append(np.exp(1j * theta))

    best_q = None
    best_val = -np.inf
    if q_prev is not None:
        best_q = np.asarray(q_prev, dtype=complex)
        best_val = objective(best_q)
    for cand in candidates:
        if leakage(cand) > hi + band_tol:
            continue
        val = objective(cand)
        if val > best_val:
            best_val = val
            best_q = cand
    if best_q is None:
        best_q = candidates[0]
    return best_q


def nominal_report(ch: ChannelSet, w_b: np.ndarray, q: np.ndarray,
                   params: RobustParams) -> DetectionReport:
    """Warden detection figures at the estimated channels."""
    t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
    lam1 = params.sigma_w2 + composite.received_power(t_w, w_b)
    return detection.detection_report(ReceptionStats(params.sigma_w2, lam1))


def robust_alternate(ch: ChannelSet, model: EllipsoidModel, params: RobustParams,
                     seed: int = 0) -> tuple[BeamformerSolution, DetectionReport]:
    """Alternating robust design; same monotone incumbent-carrying loop as the exact case."""
    from .perfect import run_alternating

    ch.validate()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(2,))))

    def rate_fn(w, q):
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
        return composite.rate_bits(t_b, w, params.sigma_b2)

    def leak_fn(w, q):
        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
        return composite.received_power(t_w, w)

    w, q, trace, residuals, iterations = run_alternating(
        q0=np.ones(ch.n_irs, dtype=complex),
        solve_w_fn=lambda q: solve_robust_w(ch, q, model, params, rng=rng),
        propose_q_fn=lambda w, q: solve_robust_q(ch, w, params, q_prev=q, rng=rng),
        rate_fn=rate_fn,
        leak_fn=leak_fn,
        convergence_eps=params.convergence_eps,
        max_outer_iters=params.max_outer_iters,
    )
    solution = BeamformerSolution(
        w_b=w,
        q=q,
        rate_bits=trace[-1],
        objective_trace=trace,
        iterations=iterations,
        covert_residuals=residuals,
        method=f"robust_{params.kl_case.value}",
    )
    return solution, nominal_report(ch, w, q, params)


@dataclass
class WorstCaseKl:
    max_kl: float
    violation_fraction: float
    kl_values: np.ndarray = field(repr=False)

    def empirical_cdf(self) -> tuple[np.ndarray, np.ndarray]:
        vals = np.sort(self.kl_values)
        return vals, np.arange(1, vals.size + 1) / vals.size


def _sample_ellipsoid(shape: np.ndarray, size: float, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    """count draws from {x : x^H shape x <= size}, half on the boundary.

    Interior points use the uniform-ball radius law r = u^(1/(2n)) for
    complex dimension n; worst cases sit on the boundary, so half the
    draws are pinned there.
    """
    n = shape.shape[0]
    inv_root = _inv_sqrt(shape)
    out = np.zeros((count, n), dtype=complex)
    for i in range(count):
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        u /= max(float(np.linalg.norm(u)), 1e-300)
        r = 1.0 if i % 2 == 0 else float(rng.uniform()) ** (1.0 / (2 * n))
        out[i] = math.sqrt(size) * r * (inv_root @ u)
    return out


def worst_case_kl(ch: ChannelSet, solution: BeamformerSolution, model: EllipsoidModel,
                  params: RobustParams, samples: int, seed: int = 0) -> WorstCaseKl:
    """Sampled KL divergence over the error ellipsoids, nominal point included."""
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(3,))))
    d_aw = _sample_ellipsoid(model.c_aw, model.v_aw, samples, rng)
    d_iw = _sample_ellipsoid(model.c_iw, model.v_iw, samples, rng)
    d_aw[0] = 0.0
    d_iw[0] = 0.0

    budget = 2.0 * params.epsilon ** 2
    kls = np.zeros(samples)
    for i in range(samples):
        h_aw = model.h_aw_hat + d_aw[i]
        h_iw = model.h_iw_hat + d_iw[i]
        t_w = composite.composite_row(h_aw, h_iw, ch.h_ai, solution.q)
        lam1 = params.sigma_w2 + composite.received_power(t_w, solution.w_b)
        kl_01, kl_10 = detection.kl_divergences(ReceptionStats(params.sigma_w2, lam1))
        kls[i] = kl_01 if params.kl_case == KlCase.KL01 else kl_10
    return WorstCaseKl(
        max_kl=float(np.max(kls)),
        violation_fraction=float(np.mean(kls > budget)),
        kl_values=kls,
    )
