import numpy as np
import pytest

from covertbeam import composite, linalg
from covertbeam.channel import FadingParams, Geometry, dbm_to_watts, sample_channels
from covertbeam.robust import (EllipsoidModel, KlCase, RobustParams, build_lmis,
                               nominal_report, robust_alternate, solve_robust_q,
                               solve_robust_w, stacked_estimate, stacked_uncertainty,
                               worst_case_kl)

GEOM = Geometry(alice=(0.0, 3.0), bob=(8.0, 0.0), willie=(5.0, 0.0), irs=(10.0, 3.0),
                n_tx=4, n_irs=4)
SIGMA2 = dbm_to_watts(-80.0)


def make_params(epsilon=0.1, kl_case=KlCase.KL01, p_dbm=5.0):
    return RobustParams(p_total=dbm_to_watts(p_dbm), sigma_b2=SIGMA2, sigma_w2=SIGMA2,
                        epsilon=epsilon, kl_case=kl_case)


def test_params_validation():
    with pytest.raises(ValueError):
        make_params(epsilon=0.0)
    with pytest.raises(ValueError):
        make_params(epsilon=1.0)


def test_leakage_band_orientation():
    p01 = make_params(kl_case=KlCase.KL01)
    p10 = make_params(kl_case=KlCase.KL10)
    a_bar, b_bar = p01.interval()
    lo01, hi01 = p01.leakage_band()
    lo10, hi10 = p10.leakage_band()
    assert lo01 < 0.0 < hi01 and lo10 < 0.0 < hi10
    assert abs(hi01 - SIGMA2 * (b_bar - 1.0)) <= 1e-25
    assert abs(hi10 - SIGMA2 * (1.0 / a_bar - 1.0)) <= 1e-25
    assert hi01 > hi10  # the KL01 budget always admits more signal power


def test_ellipsoid_model_validation():
    ch = sample_channels(GEOM, FadingParams(), 0)
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    assert model.v_w == pytest.approx(2e-4)
    with pytest.raises(ValueError):
        EllipsoidModel(h_aw_hat=ch.h_aw, h_iw_hat=ch.h_iw,
                       c_aw=np.zeros((4, 4), dtype=complex),
                       c_iw=np.eye(4, dtype=complex), v_aw=1e-4, v_iw=1e-4)


def test_build_lmis_hermitian_blocks():
    rng = np.random.default_rng(41)
    n = 3
    w_hat = linalg.random_psd(2 * n, rng)
    g_hat = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    c_w = np.eye(2 * n, dtype=complex)
    lmi1, lmi2 = build_lmis(w_hat, g_hat, c_w, 0.1, 0.8, 1.3, 1.0, 0.5, 0.5)
    for lmi in (lmi1, lmi2):
        assert np.abs(lmi - lmi.conj().T).max() <= 1e-12 * max(np.abs(lmi).max(), 1.0)
    with pytest.raises(ValueError):
        build_lmis(w_hat, g_hat[:-1], c_w, 0.1, 0.8, 1.3, 1.0, 0.5, 0.5)


def test_build_lmis_degenerate_ellipsoid():
    # v_w -> 0: PSD of both blocks reduces to the nominal two-sided bound.
    rng = np.random.default_rng(42)
    n = 2
    g_hat = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    w_vec = 0.05 * (rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n))
    w_hat = np.outer(w_vec, w_vec.conj())
    sigma_w2, a_bar, b_bar = 1.0, 0.8, 1.3
    val = float(np.real(np.vdot(g_hat, w_hat @ g_hat)))
    assert sigma_w2 * (a_bar - 1.0) <= val <= sigma_w2 * (b_bar - 1.0)
    lmi1, lmi2 = build_lmis(w_hat, g_hat, np.eye(2 * n, dtype=complex), 0.0,
                            a_bar, b_bar, sigma_w2, 1e-9, 1e-9)
    # With eta pushed large the top-left dominates; here a tiny eta suffices
    # because w_hat itself is PSD and the corner carries the nominal slack.
    assert np.linalg.eigvalsh(lmi1)[0] >= -1e-12
    corner_ok = float(np.real(lmi2[-1, -1])) >= 0.0
    assert corner_ok


def test_build_lmis_sampled_implication():
    # PSD LMIs at the solver's (What, eta) certify the sampled band.
    ch = sample_channels(GEOM, FadingParams(), 1)
    params = make_params()
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    q = np.ones(4, dtype=complex)
    w = solve_robust_w(ch, q, model, params, rng=0)
    wh = np.concatenate([w, w])
    w_hat = np.outer(wh, wh.conj())
    g_hat = stacked_estimate(model, ch.h_ai, q)
    c_w, v_w = stacked_uncertainty(model, ch.h_ai, q)
    lo, hi = params.leakage_band()
    rng = np.random.default_rng(7)
    root = np.linalg.cholesky(np.linalg.inv(c_w))
    worst = 0.0
    for _ in range(10_000):
        u = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        u *= np.sqrt(v_w) / np.linalg.norm(u)
        dg = root @ u
        val = abs(np.vdot(g_hat + dg, wh)) ** 2
        worst = max(worst, val)
        assert lo - 1e-9 * abs(lo) <= val <= hi + 1e-9 * hi
    assert worst <= hi * (1.0 + 1e-9)


def test_robust_w_sampled_band_and_power():
    ch = sample_channels(GEOM, FadingParams(), 2)
    params = make_params()
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    q = np.ones(4, dtype=complex)
    w = solve_robust_w(ch, q, model, params, rng=0)
    assert float(np.linalg.norm(w)) ** 2 <= params.p_total * (1.0 + 1e-8)
    lo, hi = params.leakage_band()
    rng = np.random.default_rng(3)
    for _ in range(1000):
        d_iw = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        d_iw *= np.sqrt(model.v_iw) * rng.uniform() ** (1 / 8) / np.linalg.norm(d_iw)
        d_aw = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        d_aw *= np.sqrt(model.v_aw) * rng.uniform() ** (1 / 8) / np.linalg.norm(d_aw)
        t_w = composite.composite_row(ch.h_aw + d_aw, ch.h_iw + d_iw, ch.h_ai, q)
        val = composite.received_power(t_w, w)
        assert lo <= val <= hi * (1.0 + 1e-9)


def test_robust_w_nominal_dominates_robust():
    ch = sample_channels(GEOM, FadingParams(), 3)
    params = make_params()
    q = np.ones(4, dtype=complex)
    t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
    w_nom = solve_robust_w(ch, q, EllipsoidModel.from_scalar(ch, 0.0), params, rng=0)
    w_rob = solve_robust_w(ch, q, EllipsoidModel.from_scalar(ch, 2e-4), params, rng=0)
    assert composite.received_power(t_b, w_nom) >= composite.received_power(t_b, w_rob)


def test_robust_q_band_and_modulus():
    ch = sample_channels(GEOM, FadingParams(), 4)
    params = make_params()
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    q0 = np.ones(4, dtype=complex)
    w = solve_robust_w(ch, q0, model, params, rng=0)
    q = solve_robust_q(ch, w, params, q_prev=q0, rng=1)
    assert np.allclose(np.abs(q), 1.0, atol=1e-10)
    lo, hi = params.leakage_band()
    t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
    assert composite.received_power(t_w, w) <= hi * (1.0 + 1e-6)
    t_b0 = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q0)
    t_b1 = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q)
    assert composite.received_power(t_b1, w) >= composite.received_power(t_b0, w) - 1e-30


def test_robust_q_m1_matches_band_grid():
    geom = Geometry(alice=(0.0, 3.0), bob=(8.0, 0.0), willie=(5.0, 0.0), irs=(10.0, 3.0),
                    n_tx=2, n_irs=1)
    ch = sample_channels(geom, FadingParams(), 5)
    params = make_params()
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    w = solve_robust_w(ch, np.ones(1, dtype=complex), model, params, rng=0)
    q = solve_robust_q(ch, w, params, q_prev=np.ones(1, dtype=complex), rng=0)
    lo, hi = params.leakage_band()
    grid = np.exp(2j * np.pi * np.arange(4096) / 4096)
    best = -1.0
    for p in grid:
        qq = np.array([p])
        t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, qq)
        if composite.received_power(t_w, w) > hi:
            continue
        t_b = composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, qq)
        best = max(best, composite.received_power(t_b, w))
    got = composite.received_power(composite.composite_row(ch.h_ab, ch.h_ib, ch.h_ai, q), w)
    assert got >= best * 0.99


def test_alternate_monotone_and_covert_guarantee():
    ch = sample_channels(GEOM, FadingParams(), 6)
    params = make_params()
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    sol, report = robust_alternate(ch, model, params, seed=6)
    trace = sol.objective_trace
    assert all(trace[i + 1] >= trace[i] - 1e-12 for i in range(len(trace) - 1))
    assert report.p_fa <= report.p_md
    assert report.xi >= 1.0 - params.epsilon
    budget = 2.0 * params.epsilon ** 2
    assert report.kl_01 <= budget * (1.0 + 1e-6)
    wc = worst_case_kl(ch, sol, model, params, 500, seed=6)
    assert wc.violation_fraction == 0.0
    assert wc.max_kl <= budget * (1.0 + 1e-9)


def test_rate_ordering_kl_cases_and_epsilon():
    ch = sample_channels(GEOM, FadingParams(), 7)
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    r01, _ = robust_alternate(ch, model, make_params(kl_case=KlCase.KL01), seed=7)
    r10, _ = robust_alternate(ch, model, make_params(kl_case=KlCase.KL10), seed=7)
    assert r01.rate_bits >= r10.rate_bits - 1e-9
    prev = -1.0
    for eps in (0.05, 0.1, 0.2):
        sol, _ = robust_alternate(ch, model, make_params(epsilon=eps), seed=7)
        assert sol.rate_bits >= prev - 1e-9
        prev = sol.rate_bits


def test_worst_case_kl_point_ellipsoid():
    ch = sample_channels(GEOM, FadingParams(), 8)
    params = make_params()
    model0 = EllipsoidModel.from_scalar(ch, 0.0)
    sol, report = robust_alternate(ch, model0, params, seed=8)
    wc = worst_case_kl(ch, sol, model0, params, 64, seed=8)
    assert abs(wc.max_kl - report.kl_01) <= 1e-12 * max(report.kl_01, 1e-300)
    # the nominal sample is included, so max dominates it by construction
    assert wc.kl_values[0] <= wc.max_kl
    vals, cdf = wc.empirical_cdf()
    assert np.all(np.diff(vals) >= 0) and cdf[-1] == 1.0


def test_non_robust_design_violates_under_errors():
    ch = sample_channels(GEOM, FadingParams(), 9)
    params = make_params()
    nominal, _ = robust_alternate(ch, EllipsoidModel.from_scalar(ch, 0.0), params, seed=9)
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    wc = worst_case_kl(ch, nominal, model, params, 500, seed=9)
    assert wc.violation_fraction > 0.0


def test_nominal_report_uses_estimated_channels():
    ch = sample_channels(GEOM, FadingParams(), 10)
    params = make_params()
    q = np.ones(4, dtype=complex)
    model = EllipsoidModel.from_scalar(ch, 2e-4)
    w = solve_robust_w(ch, q, model, params, rng=0)
    report = nominal_report(ch, w, q, params)
    t_w = composite.composite_row(ch.h_aw, ch.h_iw, ch.h_ai, q)
    lam1 = params.sigma_w2 + composite.received_power(t_w, w)
    assert abs(report.lambda1 - lam1) <= 1e-20
