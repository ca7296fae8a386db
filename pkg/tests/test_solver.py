import csv

import numpy as np
import pytest

from tnnr import penalty as P
from tnnr.completion import LossModel, ObservationMask, synth_instance
from tnnr.exceptions import ConfigError, DivergenceError
from tnnr.solver import (TRACE_COLUMNS, IterState, SolverConfig, extrapolate,
                         minimal_step_parameter, monitor_check, objective, prox_step, solve,
                         surrogate_value, weighted_objective)
from tnnr.tsvd import spectral_singular_values, t_svd, tubal_nuclear_norm
from tnnr.wtsvt import adaptive_weights, preset_scheme


@pytest.fixture(scope="module")
def small_problem():
    m, mask = synth_instance(12, 12, 4, 2, 0.7, seed=5)
    return m, LossModel.from_full(m, mask)


def test_minimal_step_parameter():
    assert minimal_step_parameter(0.49, 0.49, 2.0, 0.01) == pytest.approx(102.0)
    assert minimal_step_parameter(0.49, 0.49, 1.0, 0.01) == pytest.approx(51.0)
    assert minimal_step_parameter(0.0, 0.0, 2.0, 0.01) == pytest.approx(2 / 0.99)
    assert minimal_step_parameter(0.3, 0.1, 2.0, 0.01) >= 2.0
    with pytest.raises(ConfigError):
        minimal_step_parameter(0.0, 0.2, 2.0, 0.01)


def test_config_validation():
    cfg = SolverConfig()
    assert cfg.step_parameter == pytest.approx(102.0)
    assert cfg.conforming and cfg.h_weight == pytest.approx(102 * 0.49 / 2)
    assert SolverConfig(mu=1.0).conforming is False
    echo = cfg.echo()
    assert echo["mu_effective"] == cfg.step_parameter and "SmoothedPower" in echo["penalty"]
    for bad in (dict(lam=0), dict(epsilon=1.0), dict(theta1=0.495), dict(theta2=0.6),
                dict(lf=0), dict(mu=-1), dict(max_iters=0), dict(theta1=0, theta2=0.1),
                dict(theta_schedule=3)):
        with pytest.raises(ConfigError):
            SolverConfig(**bad)


def test_objective_examples(rng):
    m = rng.standard_normal((3, 4, 2))
    mask = ObservationMask(rng.random(m.shape) < 0.6)
    loss = LossModel.from_full(m, mask)
    ident = SolverConfig(lam=2.0, penalty=P.identity())
    assert objective(np.zeros_like(m), ident, loss) == pytest.approx(
        np.sum(m[mask.indicator] ** 2))
    x = rng.standard_normal(m.shape)
    assert objective(x, ident, loss) - loss.value(x) == pytest.approx(
        2.0 * 2 * tubal_nuclear_norm(x), rel=1e-12)
    cfg = SolverConfig(lam=1.5)
    pen = cfg.penalty
    sv = t_svd(x).spectral_singular_values  # independent path through the full t-SVD
    direct = sum(pen.value(sum(pen.value(pen.value(s)) for s in sv[:, k]))
                 for k in range(sv.shape[1]))
    assert objective(x, cfg, loss) == pytest.approx(1.5 * direct + loss.value(x), rel=1e-12)
    w = preset_scheme("tnn", m.shape)
    assert weighted_objective(x, cfg, loss, w) == pytest.approx(
        1.5 * tubal_nuclear_norm(x) + loss.value(x), rel=1e-12)


def test_extrapolate(rng):
    a = rng.standard_normal((2, 2, 2))
    y, z = extrapolate(IterState(a, a), SolverConfig())
    np.testing.assert_array_equal(y, a)
    np.testing.assert_array_equal(z, a)
    y, z = extrapolate(IterState(a, np.zeros_like(a)), SolverConfig(theta1=0, theta2=0))
    np.testing.assert_array_equal(y, a)
    y, z = extrapolate(IterState(a, np.zeros_like(a)), SolverConfig(theta1=0.49, theta2=0.2))
    np.testing.assert_allclose(y, 1.49 * a)
    np.testing.assert_allclose(z, 1.2 * a)


def test_prox_step_examples(rng):
    m = rng.standard_normal((3, 3, 2))
    loss = LossModel.from_full(m, ObservationMask(rng.random(m.shape) < 0.6))
    y, z = rng.standard_normal(m.shape), rng.standard_normal(m.shape)
    cfg = SolverConfig(lam=1e-15)
    w = adaptive_weights(y, cfg.penalty)
    np.testing.assert_allclose(prox_step(y, z, cfg, w, loss),
                               y - loss.grad(z) / cfg.step_parameter, atol=1e-10)
    full = LossModel.from_full(m, ObservationMask.full(m.shape))
    cfg = SolverConfig(lam=3.0)
    from tnnr.wtsvt import weighted_tsvt
    np.testing.assert_allclose(prox_step(m, m, cfg, w, full),
                               weighted_tsvt(m, 3.0 / cfg.step_parameter, w), atol=1e-14)
    # n3 = 1 with TNN weights: matrix SVT at threshold lam / mu
    m1 = rng.standard_normal((2, 2, 1))
    loss1 = LossModel.from_full(m1, ObservationMask(np.array([[[True], [False]],
                                                              [[True], [True]]])))
    cfg = SolverConfig(lam=20.0, theta1=0, theta2=0)
    y1, z1 = rng.standard_normal((2, 2, 1)), rng.standard_normal((2, 2, 1))
    point = (y1 - loss1.grad(z1) / cfg.step_parameter)[:, :, 0]
    u, s, vh = np.linalg.svd(point)
    hand = (u * np.maximum(s - 20.0 / cfg.step_parameter, 0)) @ vh
    got = prox_step(y1, z1, cfg, preset_scheme("tnn", (2, 2, 1)), loss1)
    np.testing.assert_allclose(got[:, :, 0], hand, atol=1e-12)


def test_prox_step_minimizes_surrogate(small_problem, rng):
    m, loss = small_problem
    cfg = SolverConfig(lam=2.0)
    x_prev = loss.initial_guess()
    x = x_prev + 0.1 * rng.standard_normal(m.shape)
    state = IterState(x, x_prev)
    for _ in range(5):
        w = adaptive_weights(state.x_curr, cfg.penalty)
        y, z = extrapolate(state, cfg)
        x_new = prox_step(y, z, cfg, w, loss)
        assert (surrogate_value(x_new, y, z, cfg, w, loss)
                <= surrogate_value(state.x_curr, y, z, cfg, w, loss) + 1e-8)
        state = IterState(x_new, state.x_curr)


def test_fully_observed_negligible_penalty(rng):
    m = rng.standard_normal((5, 4, 3))
    loss = LossModel.from_full(m, ObservationMask.full(m.shape))
    x, trace = solve(loss, SolverConfig(lam=1e-12))
    assert np.linalg.norm(x - m) / np.linalg.norm(m) < 1e-6
    assert trace.stop_reason == "rel_change"


def test_solve_trace_and_monitor(small_problem, tmp_path):
    m, loss = small_problem
    cfg = SolverConfig(lam=5.0, theta1=0.3, theta2=0.2, max_iters=60)
    x, trace = solve(loss, cfg, m_true=m)
    assert len(trace) == trace.iterations + 1 and trace.records[0].iter == 0
    assert trace.mu == cfg.step_parameter
    rep = monitor_check(trace, cfg)
    assert rep.passed and rep.h_monotone and rep.decrement_held
    assert np.all(np.isfinite(trace.column("rel_error")))
    path = tmp_path / "trace.csv"
    trace.to_csv(path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == TRACE_COLUMNS and len(rows) == len(trace) + 1


def test_static_preset_solve(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(lam=1.0, max_iters=40)
    x, trace = solve(loss, cfg, weights=preset_scheme("tnn", m.shape))
    assert monitor_check(trace, cfg).passed
    with pytest.raises(ConfigError):
        solve(loss, cfg, weights="fixed")


def test_converged_run_has_settled_objective(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(lam=5.0, theta1=0.0, theta2=0.0, max_iters=5000, tol_rel_change=1e-8)
    _, trace = solve(loss, cfg)
    assert trace.stop_reason == "rel_change"
    f = trace.column("F")[-10:]
    assert np.ptp(f) < 1e-6 * (1 + abs(f[-1]))
    rep = monitor_check(trace, cfg, step_tol=1e-8)
    assert rep.passed and rep.stationary


def test_ground_truth_stop(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(lam=1.0, theta1=0, theta2=0, max_iters=3000, tol_ground_truth=0.5)
    _, trace = solve(loss, cfg, m_true=m)
    assert trace.stop_reason == "ground_truth"
    assert trace.records[-1].rel_error < 0.5 <= trace.records[-2].rel_error


def test_monitor_flags_bad_step(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(lam=1.0, theta1=0.0, theta2=0.0, mu=0.2, max_iters=30)
    try:
        _, trace = solve(loss, cfg)
    except DivergenceError as exc:
        trace = exc.trace
    rep = monitor_check(trace, cfg)
    assert not rep.passed and rep.h_increases


def test_single_row_trace_passes(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(max_iters=1)
    _, trace = solve(loss, cfg)
    trace.records = trace.records[:1]
    rep = monitor_check(trace, cfg)
    assert rep.passed and rep.stationary
    trace.records = []
    with pytest.raises(ValueError):
        monitor_check(trace, cfg)


def test_divergence_raises_with_trace(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(lam=1e-9, theta1=0.0, theta2=0.0, mu=0.5, max_iters=50)
    with pytest.raises(DivergenceError) as exc:
        solve(loss, cfg, x0=np.zeros(m.shape))
    assert exc.value.trace.stop_reason == "diverged" and len(exc.value.trace) > 1


def test_theta_schedule_matches_constants(small_problem):
    m, loss = small_problem
    base = SolverConfig(lam=5.0, theta1=0.3, theta2=0.2, max_iters=15)
    sched = SolverConfig(lam=5.0, theta1=0.3, theta2=0.2, max_iters=15,
                         theta_schedule=lambda t: (0.3, 0.2))
    x1, _ = solve(loss, base)
    x2, _ = solve(loss, sched)
    np.testing.assert_array_equal(x1, x2)
    bad = SolverConfig(max_iters=3, theta_schedule=lambda t: (0.6, 0.2))
    with pytest.raises(ConfigError):
        solve(loss, bad)


def test_raw_power_rejected_in_adaptive_mode(small_problem):
    m, loss = small_problem
    with pytest.raises(ConfigError):
        solve(loss, SolverConfig(penalty=P.power(2 / 3), max_iters=2))


def test_determinism(small_problem):
    m, loss = small_problem
    cfg = SolverConfig(max_iters=20)
    x1, t1 = solve(loss, cfg)
    x2, t2 = solve(loss, cfg)
    np.testing.assert_array_equal(x1, x2)
    np.testing.assert_array_equal(t1.column("H"), t2.column("H"))


def test_initial_point_rows(small_problem):
    m, loss = small_problem
    x0 = loss.initial_guess()
    cfg = SolverConfig(max_iters=2)
    _, trace = solve(loss, cfg, x0=x0)
    assert trace.records[0].F == pytest.approx(objective(x0, cfg, loss))
    assert spectral_singular_values(x0).shape == (12, 4)
