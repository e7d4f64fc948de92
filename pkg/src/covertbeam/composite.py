"""Composite channels and the quadratic forms coupling the reflect vector.

The surface phases enter the link through the composite row vectors
t_b = h_ib^H diag(q) h_ai + h_ab^H (user) and the analogous t_w (warden).
For a fixed transmit vector w the received power is a quadratic form in
the extended reflect vector [q; 1], built here as (G, h) pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet


@dataclass(frozen=True)
class EffectiveChannels:
    """Composite rows seen by the user (t_b) and the warden (t_w) for one q."""

    t_b: np.ndarray
    t_w: np.ndarray


def composite_row(h_direct: np.ndarray, h_reflect: np.ndarray, h_ai: np.ndarray,
                  q: np.ndarray) -> np.ndarray:
    """Row vector h_reflect^H diag(q) h_ai + h_direct^H of length N."""
    return (np.conj(h_reflect) * q) @ h_ai + np.conj(h_direct)


def effective_channels(ch: ChannelSet, q: np.ndarray) -> EffectiveChannels:
    return EffectiveChannels(
        t_b=composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q),
        t_w=composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q),
    )


def reflect_coupling(h_direct: np.ndarray, h_reflect: np.ndarray, h_ai: np.ndarray,
                     w: np.ndarray) -> tuple[np.ndarray, float, np.ndarray, complex]:
    """Quadratic form of the received power in the extended reflect vector.

    With phi = diag(h_reflect^H) h_ai w and c = h_direct^H w, the link is
    t w = sum_m q_m phi_m + c, so |t w|^2 = qbar^H G qbar + h for
    qbar = [conj(q); 1], where G has the rank-one block phi phi^H on top,
    cross column phi c^* and zero corner, and h = |c|^2.
    Returns (G, h, phi, c).
    """
    phi = np.conj(h_reflect) * (h_ai @ w)
    c = complex(np.conj(h_direct) @ w)
    m = phi.shape[0]
    g = np.zeros((m + 1, m + 1), dtype=complex)
    g[:m, :m] = np.outer(phi, phi.conj())
    g[:m, m] = phi * np.conj(c)
    g[m, :m] = np.conj(g[:m, m])
    return g, abs(c) ** 2, phi, c


def extend_reflect(q: np.ndarray) -> np.ndarray:
    """qbar = [conj(q); 1], the lifting matching reflect_coupling's Gram form."""
    return np.concatenate([np.conj(q), [1.0 + 0.0j]])


def normalize_reflect(qbar: np.ndarray) -> np.ndarray:
    """Read a unit-modulus reflect vector from an extended candidate.

    The global phase is fixed so the trailing entry is exactly 1, entries
    are projected to the unit circle (zeros map to 1), and the leading
    block is conjugated back into q (inverse of extend_reflect).
    """
    qbar = np.asarray(qbar, dtype=complex)
    last = qbar[-1]
    if abs(last) > 0:
        qbar = qbar * np.conj(last) / abs(last)
    q = np.conj(qbar[:-1])
    mags = np.abs(q)
    q[mags == 0] = 1.0
    nz = mags > 0
    q[nz] = q[nz] / mags[nz]
    return q


def received_power(t: np.ndarray, w: np.ndarray) -> float:
    return float(abs(t @ w) ** 2)


def phase_align(phi: np.ndarray, c: complex) -> np.ndarray:
    """Global maximizer of |sum_m e^{j theta_m} phi_m + c| over phases.

    Rotating every reflected term onto the direct term's phase attains
    sum |phi_m| + |c|; with c = 0 the common reference is phase zero.
    """
    ref = np.angle(c) if c != 0 else 0.0
    return (ref - np.angle(phi)) % (2.0 * math.pi)


def coordinate_phase_sweep(phi: np.ndarray, c: complex, theta: np.ndarray,
                           rounds: int = 2) -> np.ndarray:
    """Round-robin ascent of |sum_m e^{j theta_m} phi_m + c|^2 over phases.

    Element m contributes 2 Re{e^{j theta_m} s_m} + const with
    s_m = phi_m * conj(rest), so the per-element optimum is -arg(s_m).
    """
    theta = np.asarray(theta, dtype=float).copy()
    for _ in range(rounds):
        terms = np.exp(1j * theta) * phi
        for m in range(theta.shape[0]):
            s_m = phi[m] * np.conj(np.sum(terms) - terms[m] + c)
            if abs(s_m) == 0.0:
                continue
            theta[m] = float(-np.angle(s_m)) % (2.0 * math.pi)
            terms[m] = np.exp(1j * theta[m]) * phi[m]
    return theta


def rate_bits(t_b: np.ndarray, w: np.ndarray, sigma_b2: float) -> float:
    """Achievable rate log2(1 + |t_b w|^2 / sigma_b^2)."""
    return math.log2(1.0 + received_power(t_b, w) / sigma_b2)
