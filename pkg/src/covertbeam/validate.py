"""Built-in oracle suite behind the `validate` CLI subcommand.

Each check recomputes an expected value through an independent route
(closed form, enumeration, Monte Carlo) and compares the implementation
against it. Fast by construction; the full pytest suite is the real gate.
"""

from __future__ import annotations

import math

import numpy as np

from . import composite, detection, linalg, sdp
from .channel import FadingParams, Geometry, sample_channels
from .detection import ReceptionStats
from .discrete import PhaseCodebook, quantize_phase
from .perfect import CovertParams, solve_w_for_effective


def _check_eig(rng):
    a = linalg.random_hermitian(8, rng)
    vals, vecs = linalg.hermitian_eig(a)
    recon = (vecs * vals) @ vecs.conj().T
    err = np.linalg.norm(recon - a) / max(np.linalg.norm(a), 1e-300)
    return err < 1e-10, f"eigendecomposition reconstruction {err:.2e}"


def _check_sqrt(rng):
    w = linalg.random_psd(6, rng)
    root = linalg.psd_sqrt(w)
    err = np.linalg.norm(root @ root - w) / max(np.linalg.norm(w), 1e-300)
    return err < 1e-9, f"psd sqrt squaring {err:.2e}"


def _check_projector(rng):
    t = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    p = linalg.null_projector(t)
    err = max(float(np.linalg.norm(p @ t)), float(np.linalg.norm(p @ p - p)))
    return err < 1e-12 * np.linalg.norm(t), f"null projector residual {err:.2e}"


def _check_sdp_eig(rng):
    worst = 0.0
    for _ in range(5):
        d = int(rng.integers(2, 9))
        c = rng.standard_normal((d, d))
        c = 0.5 * (c + c.T)
        sol = sdp.solve(sdp.SdpProblem(
            [d], {0: c}, [sdp.SdpConstraint({0: np.eye(d)}, "==", 1.0)]))
        lam = float(np.linalg.eigvalsh(c)[-1])
        worst = max(worst, abs(sol.objective_value - lam) / (1 + abs(lam)))
    return worst < 1e-6, f"sdp max-eigenvalue oracle {worst:.2e}"


def _check_transmit(rng):
    worst = 0.0
    params = CovertParams(p_total=1e-4, sigma_b2=1e-11, sigma_w2=1e-11)
    for _ in range(3):
        t_b = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 1e-3
        t_w = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 1e-3
        w = solve_w_for_effective(t_b, t_w, params)
        proj = linalg.null_projector(t_w.conj())
        v = proj @ t_b.conj()
        oracle = params.p_total * float(np.real(np.vdot(v, v)))
        got = composite.received_power(t_b, w)
        worst = max(worst, abs(got - oracle) / oracle,
                    composite.received_power(t_w, w) / (params.p_total * 1e-8))
    return worst < 1e-4, f"zero-leakage transmit vs null-space oracle {worst:.2e}"


def _check_detection(rng):
    stats = ReceptionStats(1.0, 2.0)
    p_fa, p_md = detection.detection_probabilities(stats)
    closed_ok = abs(p_fa - 0.25) < 1e-12 and abs(p_md - 0.5) < 1e-12
    phi = detection.optimal_threshold(stats)
    n = 100_000
    y0 = rng.exponential(1.0, n)
    y1 = rng.exponential(2.0, n)
    mc_fa = float(np.mean(y0 >= phi))
    mc_md = float(np.mean(y1 <= phi))
    err = max(abs(mc_fa - p_fa), abs(mc_md - p_md))
    return closed_ok and err < 6e-3, f"detection closed forms vs Monte Carlo {err:.2e}"


def _check_interval(rng):
    worst = 0.0
    for eps in (0.01, 0.1, 0.3):
        a_bar, b_bar = detection.covert_interval(eps)
        for root in (a_bar, b_bar):
            worst = max(worst, abs(math.log(root) + 1.0 / root - 1.0 - 2 * eps ** 2))
    return worst <= 1e-12, f"covert interval residual {worst:.2e}"


def _check_coupling(rng):
    geom = Geometry(alice=(0, 3), bob=(8, 0), willie=(5, 0), irs=(10, 3), n_tx=4, n_irs=4)
    ch = sample_channels(geom, FadingParams(), 7)
    w = (rng.standard_normal(4) + 1j * rng.standard_normal(4)) * 1e-3
    q = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
    g_b, h_b, _, _ = composite.reflect_coupling(ch.h_ab, ch.h_ib, ch.h_ai, w)
    qbar = composite.extend_reflect(q)
    lhs = float(np.real(qbar.conj() @ g_b @ qbar)) + h_b
    t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
    rhs = composite.received_power(t_b, w)
    err = abs(lhs - rhs) / max(rhs, 1e-300)
    return err < 1e-9, f"reflect coupling identity {err:.2e}"


def _check_quantize(rng):
    cb = PhaseCodebook(2)
    ok = quantize_phase(2 * math.pi - 0.01, cb) == 0.0 and \
        quantize_phase(0.0, cb) == 0.0 and \
        abs(quantize_phase(math.pi / 2 + 0.1, cb) - math.pi / 2) < 1e-12
    return ok, "phase quantization wrap-around"


def _check_channels(rng):
    geom = Geometry(alice=(0, 3), bob=(8, 0), willie=(5, 0), irs=(10, 3), n_tx=2, n_irs=3)
    a = sample_channels(geom, FadingParams(), 123)
    b = sample_channels(geom, FadingParams(), 123)
    same = all(np.array_equal(getattr(a, n), getattr(b, n))
               for n in ("h_ab", "h_aw", "h_ib", "h_iw", "h_ai"))
    c = sample_channels(geom, FadingParams(rician_k=1e12), 5)
    from .channel import angles, path_loss, steering_vector
    phi_t, _ = angles(geom.irs, geom.bob)
    los = path_loss(math.dist(geom.irs, geom.bob), 3.0, -30.0) * steering_vector(3, phi_t)
    err = np.linalg.norm(c.h_ib - los) / np.linalg.norm(los)
    return same and err < 1e-5, f"channel determinism + rician limit {err:.2e}"


def run_validation(verbose: bool = True) -> bool:
    rng = np.random.default_rng(2024)
    checks = [
        ("numerics/eigendecomposition", _check_eig),
        ("numerics/psd-sqrt", _check_sqrt),
        ("numerics/null-projector", _check_projector),
        ("sdp/max-eigenvalue-oracle", _check_sdp_eig),
        ("design/transmit-null-space-oracle", _check_transmit),
        ("detection/closed-forms", _check_detection),
        ("detection/covert-interval", _check_interval),
        ("design/reflect-coupling-identity", _check_coupling),
        ("discrete/quantization", _check_quantize),
        ("channel/determinism-and-los", _check_channels),
    ]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn(rng)
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
