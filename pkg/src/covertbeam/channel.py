"""Channel generation from 2-D geometry.

Five links are produced per realization: transmitter-to-user (h_ab),
transmitter-to-warden (h_aw), surface-to-user (h_ib), surface-to-warden
(h_iw) and the transmitter-to-surface matrix (h_ai). Direct links are
Rayleigh, surface-related links are Rician with steering-vector LoS
components. All randomness flows through an explicitly seeded Philox
generator (counter-based), so a seed pins the realization bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# Element spacing over wavelength for uniform linear arrays, d/lambda = 2.
SPACING_RATIO = 2.0


@dataclass(frozen=True)
class Geometry:
    """Node positions in meters and array sizes (N transmit antennas, M surface elements)."""

    alice: tuple[float, float]
    bob: tuple[float, float]
    willie: tuple[float, float]
    irs: tuple[float, float]
    n_tx: int
    n_irs: int

    def __post_init__(self):
        if self.n_tx < 1 or self.n_irs < 1:
            raise ValueError("n_tx and n_irs must be at least 1")
        pts = [self.alice, self.bob, self.willie, self.irs]
        names = ["alice", "bob", "willie", "irs"]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if math.dist(pts[i], pts[j]) == 0.0:
                    raise ValueError(f"{names[i]} and {names[j]} are coincident")


@dataclass(frozen=True)
class FadingParams:
    """Large-scale and small-scale fading parameters.

    zeta0_db is the power path loss at the 1 m reference distance;
    alpha_* are per-link path loss exponents; rician_k is the LoS/NLoS
    power ratio shared by the surface-related links.
    """

    zeta0_db: float = -30.0
    alpha_aw: float = 3.0
    alpha_ab: float = 3.0
    alpha_iw: float = 3.0
    alpha_ib: float = 3.0
    alpha_ai: float = 2.2
    rician_k: float = 4.0

    def __post_init__(self):
        if self.rician_k < 0.0:
            raise ValueError("rician_k must be nonnegative")
        for name in ("alpha_aw", "alpha_ab", "alpha_iw", "alpha_ib", "alpha_ai"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class ChannelSet:
    """One realization of all five links."""

    h_ab: np.ndarray  # (N,)
    h_aw: np.ndarray  # (N,)
    h_ib: np.ndarray  # (M,)
    h_iw: np.ndarray  # (M,)
    h_ai: np.ndarray  # (M, N)
    meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        for name in ("h_ab", "h_aw", "h_ib", "h_iw", "h_ai"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr.view(float))):
                raise ValueError(f"{name} contains non-finite entries")
        n = self.h_ab.shape[0]
        m = self.h_ib.shape[0]
        if self.h_aw.shape != (n,) or self.h_iw.shape != (m,) or self.h_ai.shape != (m, n):
            raise ValueError("channel dimensions are inconsistent")

    @property
    def n_tx(self) -> int:
        return self.h_ab.shape[0]

    @property
    def n_irs(self) -> int:
        return self.h_ib.shape[0]

    def to_json(self) -> str:
        doc = {name: complex_to_pairs(getattr(self, name)) for name in
               ("h_ab", "h_aw", "h_ib", "h_iw", "h_ai")}
        doc["meta"] = self.meta
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        doc = json.loads(text)
        ch = cls(
            h_ab=pairs_to_complex(doc["h_ab"]),
            h_aw=pairs_to_complex(doc["h_aw"]),
            h_ib=pairs_to_complex(doc["h_ib"]),
            h_iw=pairs_to_complex(doc["h_iw"]),
            h_ai=pairs_to_complex(doc["h_ai"]),
            meta=doc.get("meta", {}),
        )
        ch.validate()
        return ch


def complex_to_pairs(a: np.ndarray):
    """Nested lists of [re, im] pairs (the public wire format for complex data)."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def pairs_to_complex(doc) -> np.ndarray:
    arr = np.asarray(doc, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("expected trailing [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def path_loss(d: float, alpha: float, zeta0_db: float) -> float:
    """Amplitude gain sqrt(zeta0 * (d0/d)^alpha) with d0 = 1 m."""
    if d <= 0.0:
        raise ValueError("distance must be positive")
    zeta0 = 10.0 ** (zeta0_db / 10.0)
    return math.sqrt(zeta0 * d ** (-alpha))


def steering_vector(n: int, phi: float) -> np.ndarray:
    """Uniform-linear-array steering vector, entry k = exp(-j*2*pi*(d/lambda)*k*sin(phi))."""
    if n < 1:
        raise ValueError("array size must be at least 1")
    k = np.arange(n)
    return np.exp(-1j * 2.0 * np.pi * SPACING_RATIO * k * math.sin(phi))


def angles(tx: tuple[float, float], rx: tuple[float, float]) -> tuple[float, float]:
    """Departure and arrival angles of the tx->rx link.

    phi_t = atan2(y_r - y_t, x_r - x_t) (four-quadrant), phi_r = pi - phi_t.
    """
    dx = rx[0] - tx[0]
    dy = rx[1] - tx[1]
    if dx == 0.0 and dy == 0.0:
        raise ValueError("tx and rx are coincident")
    phi_t = math.atan2(dy, dx)
    return phi_t, math.pi - phi_t


def _cn_samples(shape, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, 1) samples (unit variance per complex entry)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def rng_from_seed(seed: int, *stream: int) -> np.random.Generator:
    """Philox generator for a seed, optionally forked into a named substream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(stream))
    return np.random.Generator(np.random.Philox(ss))


def sample_channels(geom: Geometry, fading: FadingParams, rng_seed: int) -> ChannelSet:
    """Draw one realization of all five links, deterministic per seed.

    Direct links are path-loss-scaled CN(0, I). Surface-related links mix
    a steering-vector LoS part and a CN(0, I) part with Rician weights
    sqrt(K/(1+K)) and sqrt(1/(1+K)). The surface-to-user LoS uses the
    surface-side steering vector at the departure angle of that link.
    """
    rng = rng_from_seed(rng_seed)
    n, m = geom.n_tx, geom.n_irs
    k = fading.rician_k
    w_los = math.sqrt(k / (1.0 + k))
    w_nlos = math.sqrt(1.0 / (1.0 + k))

    def pl(a: tuple[float, float], b: tuple[float, float], alpha: float) -> float:
        return path_loss(math.dist(a, b), alpha, fading.zeta0_db)

    # Draw order is fixed; changing it would silently break seed reproducibility.
    h_ab = pl(geom.alice, geom.bob, fading.alpha_ab) * _cn_samples(n, rng)
    h_aw = pl(geom.alice, geom.willie, fading.alpha_aw) * _cn_samples(n, rng)

    phi_t_ai, phi_r_ai = angles(geom.alice, geom.irs)
    los_ai = np.outer(steering_vector(m, phi_r_ai), steering_vector(n, phi_t_ai).conj())
    h_ai = pl(geom.alice, geom.irs, fading.alpha_ai) * (
        w_los * los_ai + w_nlos * _cn_samples((m, n), rng)
    )

    phi_t_ib, _ = angles(geom.irs, geom.bob)
    h_ib = pl(geom.irs, geom.bob, fading.alpha_ib) * (
        w_los * steering_vector(m, phi_t_ib) + w_nlos * _cn_samples(m, rng)
    )

    phi_t_iw, _ = angles(geom.irs, geom.willie)
    h_iw = pl(geom.irs, geom.willie, fading.alpha_iw) * (
        w_los * steering_vector(m, phi_t_iw) + w_nlos * _cn_samples(m, rng)
    )

    ch = ChannelSet(
        h_ab=h_ab, h_aw=h_aw, h_ib=h_ib, h_iw=h_iw, h_ai=h_ai,
        meta={"seed": int(rng_seed), "n_tx": n, "n_irs": m},
    )
    ch.validate()
    return ch


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0
