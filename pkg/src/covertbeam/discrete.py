"""Quantized reflect-phase design over a uniform codebook.

The continuous design seeds the phases; afterwards each outer iteration
re-solves the transmit vector (restoring the exact covertness constraint
the element updates ignore) and sweeps the elements round-robin, setting
each phase to the codebook point closest, in circular distance, to the
unconstrained optimum of the rate objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import composite
from .channel import ChannelSet
from .perfect import (BeamformerSolution, CovertParams, alternate_optimize,
                      run_alternating, solve_w_given_q)


@dataclass(frozen=True)
class PhaseCodebook:
    """2^bits equally spaced phases {0, dtheta, ..., dtheta*(K-1)}."""

    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("codebook needs at least 1 bit")

    @property
    def levels(self) -> int:
        return 2 ** self.bits

    @property
    def values(self) -> np.ndarray:
        k = self.levels
        return np.arange(k) * (2.0 * math.pi / k)


def quantize_phase(phi: float, cb: PhaseCodebook) -> float:
    """Codebook value nearest to phi in circular distance, ties to smaller value."""
    phi = float(phi) % (2.0 * math.pi)
    values = cb.values
    diff = np.abs(values - phi)
    circ = np.minimum(diff, 2.0 * math.pi - diff)
    return float(values[int(np.argmin(circ))])


def _phase_objective_terms(ch: ChannelSet, w_b: np.ndarray):
    """(phi, c): per-element couplings and the direct-path term of |t_b w|^2."""
    phi = np.conj(ch.h_ib) * (ch.h_ai @ w_b)
    c = complex(np.conj(ch.h_ab) @ w_b)
    return phi, c


def phase_objective(phi: np.ndarray, c: complex, theta: np.ndarray) -> float:
    """|t_b w|^2 expressed through the element couplings, |sum e^{j theta} phi + c|^2."""
    return float(abs(np.exp(1j * theta) @ phi + c) ** 2)


def element_phase_update(ch: ChannelSet, w_b: np.ndarray, theta: np.ndarray, m: int,
                         cb: PhaseCodebook) -> float:
    """Optimal quantized phase for element m with all other phases fixed.

    The objective is linear in e^{j theta_m}: collecting the coupling of
    element m against the rest gives a term 2 Re{e^{j theta_m} s_m}, so the
    continuous optimum is -arg(s_m) and the best codebook point is its
    circular-nearest neighbor (the objective is a cosine in the phase gap).
    A vanishing coupling leaves the phase unchanged.
    """
    if not 0 <= m < theta.shape[0]:
        raise ValueError(f"element index {m} out of range")
    phi, c = _phase_objective_terms(ch, w_b)
    rest = np.exp(1j * theta) * phi
    s_m = phi[m] * np.conj(np.sum(rest) - rest[m] + c)
    if abs(s_m) == 0.0:
        return float(theta[m])
    return quantize_phase(-np.angle(s_m), cb)


def discrete_design(ch: ChannelSet, params: CovertParams, cb: PhaseCodebook,
                    seed: int = 0) -> BeamformerSolution:
    """Alternate transmit solves with round-robin quantized phase sweeps.

    Phases start from the continuous design, quantized element by element.
    The transmit step is identical to the continuous sub-problem; a phase
    sweep is kept only if the rate after the transmit resolve improves,
    which keeps the objective trace monotone.
    """
    cont = alternate_optimize(ch, params, seed=seed)
    theta0 = np.array([quantize_phase(a, cb) for a in np.angle(cont.q) % (2.0 * math.pi)])

    def propose_q(w, q):
        theta = np.angle(q) % (2.0 * math.pi)
        for m in range(ch.n_irs):
            theta[m] = element_phase_update(ch, w, theta, m, cb)
        return np.exp(1j * theta)

    def rate_fn(w, q):
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
        return composite.rate_bits(t_b, w, params.sigma_b2)

    def leak_fn(w, q):
        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
        return composite.received_power(t_w, w)

    w, q, trace, residuals, iterations = run_alternating(
        q0=np.exp(1j * theta0),
        solve_w_fn=lambda q: solve_w_given_q(ch, q, params),
        propose_q_fn=propose_q,
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
        method=f"discrete_L{cb.bits}",
    )
