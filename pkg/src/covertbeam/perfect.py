"""Joint transmit/reflect design under the exact covertness constraint.

Alternating optimization: the transmit step solves a semidefinite
relaxation whose zero-leakage equality is tightened back to rank one by a
projection (objective-preserving, trace-nonincreasing); the reflect step
solves a unit-diagonal SDR over the extended reflect outer product and
recovers phases by rank-one extraction or Gaussian randomization. Each
outer iteration re-solves the transmit step so every recorded iterate is
covert-feasible, which also makes the objective trace provably monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import composite, linalg, sdp
from .channel import ChannelSet



@dataclass(frozen=True)
class CovertParams:
    """Powers in watts; epsilon only matters for the robust designs."""

    p_total: float
    sigma_b2: float
    sigma_w2: float
    epsilon: float = 0.0
    convergence_eps: float = 1e-4
    max_outer_iters: int = 50
    randomization_samples: int = 200

    def __post_init__(self):
        if self.p_total <= 0 or self.sigma_b2 <= 0 or self.sigma_w2 <= 0:
            raise ValueError("powers must be positive")
        if self.convergence_eps <= 0:
            raise ValueError("convergence_eps must be positive")


@dataclass
class BeamformerSolution:
    w_b: np.ndarray
    q: np.ndarray
    rate_bits: float
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    covert_residuals: list[float] = field(default_factory=list)
    method: str = "perfect"

    def recompute_rate(self, ch: ChannelSet, sigma_b2: float) -> float:
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, self.q)
        return composite.rate_bits(t_b, self.w_b, sigma_b2)


class DesignError(RuntimeError):
    """A sub-problem solve failed; carries the solver status for diagnostics."""

    def __init__(self, message: str, solution: sdp.SdpSolution | None = None):
        super().__init__(message)
        self.sdp_solution = solution


def project_rank_one(w_mat: np.ndarray, t_b: np.ndarray, t_w: np.ndarray) -> np.ndarray:
    """Rank-one tightening of a relaxed transmit solution.

    Projects sqrt(W) onto the direction sqrt(W) t_b^H: the user-side
    objective value is preserved exactly, the trace never grows, and the
    warden-side quadratic form never grows. A vanishing sqrt(W) t_b^H
    means the objective is already zero and the zero matrix is returned.
    """
    root = linalg.psd_sqrt(w_mat)
    v = root @ t_b.conj()
    nrm2 = float(np.real(np.vdot(v, v)))
    if nrm2 <= 1e-30 * max(float(np.real(np.trace(w_mat))), 1e-300):
        return np.zeros_like(w_mat)
    out = np.outer(root @ v, (root @ v).conj()) / nrm2
    return 0.5 * (out + out.conj().T)


def _transmit_sdr(t_b: np.ndarray, t_w: np.ndarray, p_total: float,
                  settings: sdp.SdpSettings | None = None):
    """SDR of the zero-leakage transmit problem; returns (W*, sdp solution)."""
    n = t_b.shape[0]
    c_b = np.outer(t_b.conj(), t_b)
    c_w = np.outer(t_w.conj(), t_w)
    problem = sdp.SdpProblem(
        block_dims=[n],
        objective={0: c_b},
        constraints=[
            sdp.SdpConstraint({0: c_w}, "==", 0.0),
            sdp.SdpConstraint({0: np.eye(n, dtype=complex)}, "<=", p_total),
        ],
    )
    sol = sdp.solve(problem, settings)
    if sol.status not in (sdp.SdpStatus.OPTIMAL, sdp.SdpStatus.MAX_ITERATIONS):
        raise DesignError(f"transmit SDR failed with status {sol.status.value}", sol)
    return sol.primal_blocks[0], sol


def solve_w_for_effective(t_b: np.ndarray, t_w: np.ndarray, params: CovertParams,
                          settings: sdp.SdpSettings | None = None) -> np.ndarray:
    """Transmit vector for fixed composite channels: SDR, projection, extraction.

    The extracted vector is polished onto the exact null space of t_w and
    rescaled to full power, so the zero-leakage constraint holds to float
    precision regardless of solver slack.
    """
    w_mat, _ = _transmit_sdr(t_b, t_w, params.p_total, settings)
    w_bar = project_rank_one(w_mat, t_b, t_w)
    w = linalg.rank_one_extract(w_bar)
    proj = linalg.null_projector(t_w.conj())
    w = proj @ w
    nrm = float(np.linalg.norm(w))
    if nrm <= 1e-12 * np.sqrt(params.p_total):
        # Warden and user channels are (numerically) parallel: zero rate.
        best = proj @ t_b.conj()
        bn = float(np.linalg.norm(best))
        if bn <= 1e-14 * max(float(np.linalg.norm(t_b)), 1e-300):
            return np.zeros_like(t_b)
        return np.sqrt(params.p_total) * best / bn
    return np.sqrt(params.p_total) * w / nrm


def solve_w_given_q(ch: ChannelSet, q: np.ndarray, params: CovertParams,
                    settings: sdp.SdpSettings | None = None) -> np.ndarray:
    eff = composite.effective_channels(ch, q)
    return solve_w_for_effective(eff.t_b, eff.t_w, params, settings)


def _reflect_sdr(g_b: np.ndarray, g_w: np.ndarray,
                 settings: sdp.SdpSettings | None = None):
    dim = g_b.shape[0]
    constraints = [sdp.SdpConstraint({0: g_w}, "==", 0.0)]
    for m in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[m, m] = 1.0
        constraints.append(sdp.SdpConstraint({0: e}, "==", 1.0))
    problem = sdp.SdpProblem([dim], {0: g_b}, constraints)
    # Unit diagonal pins the natural solution scale.
    sol = sdp.solve(problem, settings or sdp.SdpSettings(scale_hint=1.0))
    if sol.status not in (sdp.SdpStatus.OPTIMAL, sdp.SdpStatus.MAX_ITERATIONS):
        raise DesignError(f"reflect SDR failed with status {sol.status.value}", sol)
    return sol.primal_blocks[0], sol


def covert_value(ch: ChannelSet, q: np.ndarray, p_total: float) -> float:
    """Exact value of the zero-leakage transmit problem for given phases.

    Full power along the user channel projected onto the warden null space:
    p_total * ||P_perp(t_w) t_b^H||^2.
    """
    eff = composite.effective_channels(ch, q)
    proj = linalg.null_projector(eff.t_w.conj())
    v = proj @ eff.t_b.conj()
    return p_total * float(np.real(np.vdot(v, v)))


def _grid_ascent(ch: ChannelSet, q0: np.ndarray, p_total: float,
                 levels: int = 64, rounds: int = 2) -> np.ndarray:
    """Per-element grid ascent of the post-resolve covert value."""
    q = np.asarray(q0, dtype=complex).copy()
    phases = np.exp(2j * np.pi * np.arange(levels) / levels)
    for _ in range(rounds):
        for m in range(q.shape[0]):
            best_val = -np.inf
            best_p = q[m]
            for p in phases:
                q[m] = p
                val = covert_value(ch, q, p_total)
                if val > best_val:
                    best_val = val
                    best_p = p
            q[m] = best_p
    return q


def solve_q_given_w(ch: ChannelSet, w_b: np.ndarray, params: CovertParams,
                    rand_samples: int | None = None,
                    q_prev: np.ndarray | None = None,
                    rng: np.random.Generator | int = 0,
                    settings: sdp.SdpSettings | None = None) -> np.ndarray:
    """Reflect phases for a fixed transmit vector.

    Candidates come from rank-one extraction of the SDR solution, Gaussian
    randomization with unit-modulus projection, the phase-aligned point,
    coordinate sweeps of the fixed-w objective, and a per-element grid
    ascent of the post-resolve covert value (cheap via its closed form).
    Ranking uses that post-resolve value, since the transmit vector is
    re-solved right after; the fixed-w objective never drops below q_prev.
    The zero-leakage constraint is only held at the surface-path level
    inside the relaxation; the caller's transmit resolve restores it.
    """
    samples = params.randomization_samples if rand_samples is None else rand_samples
    g_b, h_b, phi_b, c_b = composite.reflect_coupling(ch.h_ab, ch.h_ib, ch.h_ai, w_b)
    g_w, h_w, _, _ = composite.reflect_coupling(ch.h_aw, ch.h_iw, ch.h_ai, w_b)
    q_mat, _ = _reflect_sdr(g_b, g_w, settings)

    def rank_value(q: np.ndarray) -> float:
        return covert_value(ch, q, params.p_total)

    candidates = [composite.normalize_reflect(linalg.rank_one_extract(q_mat))]
    try:
        candidates.append(sdp.gaussian_randomization(
            q_mat, samples,
            feasibility_projector=composite.normalize_reflect,
            objective=rank_value,
            rng=rng,
        ))
    except sdp.GaussianRandomizationError:
        pass
    align = np.exp(1j * composite.phase_align(phi_b, c_b))
    candidates.append(align)
    sweep_starts = [candidates[0], align]
    if q_prev is not None:
        sweep_starts.append(np.asarray(q_prev, dtype=complex))
    for start in sweep_starts:
        theta = composite.coordinate_phase_sweep(phi_b, c_b, np.angle(start))
        candidates.append(np.exp(1j * theta))
    ascent_starts = [align] if q_prev is None else [np.asarray(q_prev, dtype=complex), align]
    for start in ascent_starts:
        candidates.append(_grid_ascent(ch, start, params.p_total))

    best_q = None
    best_val = -np.inf
    if q_prev is not None:
        best_q = np.asarray(q_prev, dtype=complex)
        best_val = rank_value(best_q)
    for cand in candidates:
        val = rank_value(cand)
        if val > best_val:
            best_val = val
            best_q = cand
    if best_q is None:
        best_q = candidates[0]
    return best_q


def run_alternating(q0: np.ndarray, solve_w_fn, propose_q_fn, rate_fn, leak_fn,
                    convergence_eps: float, max_outer_iters: int):
    """Shared driver for the alternating designs.

    The incumbent (w, q, rate) is carried forward and replaced only by a
    strictly better candidate, so the recorded trace is nondecreasing by
    construction even though the reflect proposals are randomized. Each
    iteration runs the transmit step and one reflect proposal followed by
    a transmit resolve; stops once the relative improvement falls below
    convergence_eps.
    """
    q = np.asarray(q0, dtype=complex)
    w = solve_w_fn(q)
    rate = rate_fn(w, q)
    trace = [rate]
    residuals = [leak_fn(w, q)]
    iterations = 1
    for iterations in range(2, max_outer_iters + 1):
        prev_rate = rate
        q_cand = propose_q_fn(w, q)
        if not np.array_equal(q_cand, q):
            w_cand = solve_w_fn(q_cand)
            rate_cand = rate_fn(w_cand, q_cand)
            if rate_cand > rate:
                q, w, rate = q_cand, w_cand, rate_cand
        trace.append(rate)
        residuals.append(leak_fn(w, q))
        if rate <= 0.0 or (rate - prev_rate) / rate < convergence_eps:
            break
    return w, q, trace, residuals, iterations


def alternate_optimize(ch: ChannelSet, params: CovertParams, seed: int = 0) -> BeamformerSolution:
    """Alternating transmit/reflect design with a monotone objective trace.

    Starts from the full-power user-channel match and all-ones phases;
    reflect updates are accepted only if the rate after re-solving the
    transmit step improves, so every recorded iterate is covert-feasible
    and the trace never decreases.
    """
    ch.validate()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1,))))

    def rate_fn(w, q):
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
        return composite.rate_bits(t_b, w, params.sigma_b2)

    def leak_fn(w, q):
        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
        return composite.received_power(t_w, w)

    w, q, trace, residuals, iterations = run_alternating(
        q0=np.ones(ch.n_irs, dtype=complex),
        solve_w_fn=lambda q: solve_w_given_q(ch, q, params),
        propose_q_fn=lambda w, q: solve_q_given_w(ch, w, params, q_prev=q, rng=rng),
        rate_fn=rate_fn,
        leak_fn=leak_fn,
        convergence_eps=params.convergence_eps,
        max_outer_iters=params.max_outer_iters,
    )
    return BeamformerSolution(
        w_b=w,
        q=q,
        rate_bits=trace[-1],
        objective_trace=trace,
        iterations=iterations,
        covert_residuals=residuals,
        method="perfect",
    )


def no_irs_baseline(ch: ChannelSet, params: CovertParams) -> BeamformerSolution:
    """Zero-leakage design with the surface switched off (q = 0).

    The transmit problem has the closed-form answer: project the user
    channel onto the warden null space and spend full power there.
    """
    t_b = np.conj(ch.h_ab)
    t_w = np.conj(ch.h_aw)
    proj = linalg.null_projector(t_w.conj())
    direction = proj @ t_b.conj()
    nrm = float(np.linalg.norm(direction))
    if nrm <= 1e-14 * max(float(np.linalg.norm(t_b)), 1e-300):
        w = np.zeros_like(t_b)
    else:
        w = np.sqrt(params.p_total) * direction / nrm
    rate = composite.rate_bits(t_b, w, params.sigma_b2)
    return BeamformerSolution(
        w_b=w,
        q=np.zeros(ch.n_irs, dtype=complex),
        rate_bits=rate,
        objective_trace=[rate],
        iterations=1,
        covert_residuals=[composite.received_power(t_w, w)],
        method="no_irs",
    )
