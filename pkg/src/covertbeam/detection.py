"""Warden detection analytics.

The warden observes |y_w|^2, exponentially distributed with mean lambda0
(noise only) or lambda1 (signal plus noise). Everything here is a scalar
closed form: KL divergences, the optimal likelihood-ratio threshold, the
false-alarm / missed-detection pair at that threshold, and the interval of
power ratios compatible with a KL covertness budget.

KL values are in nats; rates elsewhere in the package are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Relative lambda gap below which the degenerate (equal-power) limits apply.
_EQUAL_TOL = 1e-12


@dataclass(frozen=True)
class ReceptionStats:
    """Received-power model at the warden: lambda0 noise, lambda1 signal+noise."""

    lambda0: float
    lambda1: float

    def __post_init__(self):
        if not (self.lambda0 > 0.0) or not (self.lambda1 > 0.0):
            raise ValueError("lambda0 and lambda1 must be positive")
        if self.lambda1 < self.lambda0 * (1.0 - 1e-9):
            raise ValueError("lambda1 must not be below lambda0 (signal power is nonnegative)")

    @property
    def ratio(self) -> float:
        return self.lambda1 / self.lambda0


@dataclass(frozen=True)
class DetectionReport:
    """Summary of the warden's optimal test for one (lambda0, lambda1) pair."""

    lambda0: float
    lambda1: float
    threshold: float
    p_fa: float
    p_md: float
    kl_01: float
    kl_10: float

    @property
    def xi(self) -> float:
        return self.p_fa + self.p_md

    CSV_HEADER = ("lambda0", "lambda1", "threshold", "p_fa", "p_md", "kl_01", "kl_10", "xi")

    def csv_row(self) -> list[str]:
        return [
            repr(self.lambda0),
            repr(self.lambda1),
            repr(self.threshold),
            repr(self.p_fa),
            repr(self.p_md),
            repr(self.kl_01),
            repr(self.kl_10),
            repr(self.xi),
        ]


def _is_degenerate(s: ReceptionStats) -> bool:
    return abs(s.lambda1 - s.lambda0) <= _EQUAL_TOL * s.lambda0


def kl_divergences(s: ReceptionStats) -> tuple[float, float]:
    """(D(p0||p1), D(p1||p0)) between the two exponential models, in nats."""
    r = s.ratio
    kl_01 = math.log(r) + 1.0 / r - 1.0
    kl_10 = -math.log(r) + r - 1.0
    return max(kl_01, 0.0), max(kl_10, 0.0)


def optimal_threshold(s: ReceptionStats) -> float:
    """Decision threshold on |y_w|^2 where the two likelihoods cross.

    phi* = lambda0*lambda1/(lambda1-lambda0) * ln(lambda1/lambda0),
    continuously extended to lambda0 at lambda1 = lambda0.
    """
    if _is_degenerate(s):
        return s.lambda0
    d = s.lambda1 - s.lambda0
    return s.lambda0 * s.lambda1 / d * math.log1p(d / s.lambda0)


def detection_probabilities(s: ReceptionStats) -> tuple[float, float]:
    """False-alarm and missed-detection probabilities at the optimal threshold.

    p_fa = r^(-lambda1/(lambda1-lambda0)), p_md = 1 - r^(-lambda0/(lambda1-lambda0))
    with r = lambda1/lambda0; the limits at r = 1 are (1/e, 1 - 1/e).
    """
    if _is_degenerate(s):
        inv_e = math.exp(-1.0)
        return inv_e, 1.0 - inv_e
    d = s.lambda1 - s.lambda0
    log_r = math.log1p(d / s.lambda0)
    p_fa = math.exp(-s.lambda1 / d * log_r)
    p_md = 1.0 - math.exp(-s.lambda0 / d * log_r)
    return min(max(p_fa, 0.0), 1.0), min(max(p_md, 0.0), 1.0)


def detection_report(s: ReceptionStats) -> DetectionReport:
    kl_01, kl_10 = kl_divergences(s)
    p_fa, p_md = detection_probabilities(s)
    return DetectionReport(
        lambda0=s.lambda0,
        lambda1=s.lambda1,
        threshold=optimal_threshold(s),
        p_fa=p_fa,
        p_md=p_md,
        kl_01=kl_01,
        kl_10=kl_10,
    )


def _ratio_kl(x: float) -> float:
    """f(x) = ln x + 1/x - 1, the KL divergence as a function of the power ratio."""
    return math.log(x) + 1.0 / x - 1.0


def covert_interval(epsilon: float, residual_tol: float = 1e-12) -> tuple[float, float]:
    """The two roots (a_bar < 1 < b_bar) of ln x + 1/x - 1 = 2 eps^2.

    Power ratios lambda1/lambda0 inside [a_bar, b_bar] keep the KL
    divergence within the covertness budget. Bracketed bisection on each
    side of 1; f is strictly monotone there, so this is unconditionally
    safe. Stops when the residual |f(root) - 2 eps^2| <= residual_tol.
    """
    if epsilon < 0.0:
        raise ValueError("epsilon must be nonnegative")
    target = 2.0 * epsilon * epsilon
    if target == 0.0:
        return 1.0, 1.0

    def bisect(lo: float, hi: float, increasing: bool) -> float:
        # Invariant: f crosses `target` inside [lo, hi].
        for _ in range(400):
            mid = 0.5 * (lo + hi)
            fm = _ratio_kl(mid)
            if abs(fm - target) <= residual_tol:
                return mid
            if (fm > target) == increasing:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    # Left root: f decreases from +inf at 0+ to 0 at x=1.
    a_bar = bisect(1e-9, 1.0, increasing=False)
    # Right root: f increases from 0 at x=1; double the bracket until it covers the target.
    hi = 2.0
    while _ratio_kl(hi) < target:
        hi *= 2.0
    b_bar = bisect(1.0, hi, increasing=True)
    return a_bar, b_bar


def pinsker_bound(kl: float) -> float:
    """Total-variation bound sqrt(kl/2), capped at 1 (reporting only)."""
    if kl < 0.0:
        raise ValueError("kl must be nonnegative")
    return min(math.sqrt(kl / 2.0), 1.0)
