import numpy as np
import pytest
from hypothesis import given, strategies as st

from tnnr import penalty as P
from tnnr.exceptions import ConfigError, ShapeError
from tnnr.tsvd import spectral_singular_values, tubal_nuclear_norm
from tnnr.wtsvt import (WeightScheme, adaptive_weights, preset_scheme, weighted_norm,
                        weighted_tsvt)


def tsvt_objective(x, y, eta, w):
    return eta * weighted_norm(x, w) + 0.5 * np.sum((x - y) ** 2)


def matrix_svt(m, tau):
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    return (u * np.maximum(s - tau, 0)) @ vh


def test_tnn_preset_is_tnn(rng):
    for shape in [(4, 5, 3), (6, 2, 4), (3, 3, 1)]:
        x = rng.standard_normal(shape)
        w = preset_scheme("tnn", shape)
        assert abs(weighted_norm(x, w) - tubal_nuclear_norm(x)) < 1e-12
    assert weighted_norm(np.zeros((3, 3, 2)), preset_scheme("tnn", (3, 3, 2))) == 0.0


def test_truncated_presets(rng):
    x = rng.standard_normal((4, 5, 3))
    assert weighted_norm(x, preset_scheme("pstnn", x.shape, N=4)) == 0.0
    assert weighted_norm(x, preset_scheme("pstnn", x.shape, N=0)) == pytest.approx(
        3 * tubal_nuclear_norm(x), rel=1e-12)
    m = rng.standard_normal((5, 4, 1))
    s = np.linalg.svd(m[:, :, 0], compute_uv=False)
    assert weighted_norm(m, preset_scheme("ttnn", m.shape, N=2)) == pytest.approx(
        s[2:].sum(), rel=1e-12)
    assert preset_scheme("pstnn", (40, 40, 2)).preset_tag == "PSTNN(2)"
    with pytest.raises(ConfigError):
        preset_scheme("pstnn", (3, 3, 2), N=4)


def test_reference_presets(rng):
    ref = rng.standard_normal((4, 5, 3))
    sv = spectral_singular_values(ref)
    w = preset_scheme("wtnn", ref.shape, reference=ref, eps=0.1)
    np.testing.assert_allclose(w.beta, 1 / (sv + 0.1))
    ws = preset_scheme("wsp", ref.shape, reference=ref, p=0.5, c=1.0, eps=1e-3)
    gap = np.maximum(0, sv ** 2 - sv[-1] ** 2)
    np.testing.assert_allclose(ws.beta, 1.0 / (gap ** 1.0 + 1e-3))
    assert np.all(np.diff(ws.beta, axis=0) >= 0)
    with pytest.raises(ConfigError):
        preset_scheme("wtnn", ref.shape)
    with pytest.raises(ConfigError):
        preset_scheme("nope", ref.shape)


def test_scheme_validation():
    pen = P.identity()
    with pytest.raises(ShapeError):
        WeightScheme(np.ones(2), np.ones((3, 3)), pen)
    with pytest.raises(ConfigError):
        WeightScheme(np.zeros(2), np.ones((3, 2)), pen)
    with pytest.raises(ConfigError):
        WeightScheme(np.array([1.0, 0.0]), np.ones((3, 2)), pen, kind="adaptive")
    with pytest.raises(ConfigError):
        WeightScheme(np.ones(2), np.array([[2.0, 1.0], [1.0, 1.0]]), pen)
    w = WeightScheme(np.ones(2), np.ones((3, 2)), pen)
    with pytest.raises(ShapeError):
        w.check_dims((4, 4, 2))


def test_adaptive_weights_examples(rng):
    w = adaptive_weights(rng.standard_normal((3, 4, 2)), P.identity())
    assert np.all(w.alpha == 1.0) and np.all(w.beta == 1.0)
    z = adaptive_weights(np.zeros((3, 3, 2)), P.smoothed_power(2 / 3, 1e-6))
    np.testing.assert_allclose(z.beta, 200 / 3, rtol=1e-12)
    assert z.kind == "adaptive" and z.h.shape == (3, 2) and z.g.shape == (2,)
    with pytest.raises(ConfigError):
        adaptive_weights(np.ones((2, 2, 2)), P.power(2 / 3))


def test_adaptive_weight_formulas(rng):
    pen = P.smoothed_power(0.5, 1e-3)
    x = rng.standard_normal((4, 3, 3))
    w = adaptive_weights(x, pen)
    sv = spectral_singular_values(x)
    np.testing.assert_allclose(w.beta, pen.grad(pen.value(sv)), rtol=1e-12)
    np.testing.assert_allclose(w.alpha, pen.grad(pen.value(pen.value(sv)).sum(axis=0)),
                               rtol=1e-12)


def test_majorization(rng):
    pen = P.smoothed_power()
    xt = rng.standard_normal((4, 4, 3))
    wt = adaptive_weights(xt, pen)
    for _ in range(20):
        x = rng.standard_normal(xt.shape) * rng.uniform(0.1, 3)
        g = pen.value(pen.value(spectral_singular_values(x))).sum(axis=0)
        lhs = pen.value(g).sum()
        rhs = np.sum(pen.value(wt.g) + wt.alpha * (g - wt.g))
        assert lhs <= rhs + 1e-10


def test_tsvt_single_slice_is_matrix_svt(rng):
    y = rng.standard_normal((5, 4, 1))
    eta = 0.7
    out = weighted_tsvt(y, eta, preset_scheme("tnn", y.shape))
    np.testing.assert_allclose(out[:, :, 0], matrix_svt(y[:, :, 0], eta), atol=1e-12)


def test_tsvt_multi_slice_threshold_is_eta(rng):
    # TNN weights: each Fourier slice is soft-thresholded at eta
    y = rng.standard_normal((4, 3, 5))
    eta = 0.4
    out = weighted_tsvt(y, eta, preset_scheme("tnn", y.shape))
    fy = np.fft.fft(y, axis=2)
    ref = np.stack([matrix_svt(fy[:, :, k], eta) for k in range(5)], axis=2)
    np.testing.assert_allclose(out, np.fft.ifft(ref, axis=2).real, atol=1e-12)


def test_tsvt_small_cases():
    y = np.diag([3.0, 1.0])[:, :, None]
    out = weighted_tsvt(y, 1.0, preset_scheme("tnn", y.shape))
    np.testing.assert_allclose(out[:, :, 0], np.diag([2.0, 0.0]), atol=1e-14)
    g = np.random.default_rng(0)
    y = g.standard_normal((3, 4, 3))
    out = weighted_tsvt(y, 1e-15, adaptive_weights(y, P.smoothed_power()))
    np.testing.assert_allclose(out, y, atol=1e-10)


def test_tsvt_rejects_bad_inputs(rng):
    y = rng.standard_normal((3, 3, 2))
    with pytest.raises(ConfigError):
        weighted_tsvt(y, 0.0, preset_scheme("tnn", y.shape))
    bad = P.CallablePenalty(lambda t: -t ** 2)
    with pytest.raises(ConfigError):
        weighted_tsvt(y, 1.0, WeightScheme(np.ones(2), np.ones((3, 2)), bad))


def test_tsvt_returns_output_singular_values(rng):
    y = rng.standard_normal((4, 3, 4))
    w = adaptive_weights(y, P.smoothed_power())
    out, sv = weighted_tsvt(y, 0.3, w, return_svals=True)
    np.testing.assert_allclose(sv, spectral_singular_values(out), atol=1e-10)


def test_n3_factor_is_required(rng):
    # the same thresholding with the coefficient divided by n3**2 is not the minimizer
    y = rng.standard_normal((3, 3, 4))
    pen = P.smoothed_power()
    w = adaptive_weights(y, pen)
    eta = 0.05
    ours = weighted_tsvt(y, eta, w)
    shrunk = WeightScheme(w.alpha / 16, w.beta, pen)
    other = weighted_tsvt(y, eta, shrunk)
    assert tsvt_objective(ours, y, eta, w) < tsvt_objective(other, y, eta, w)


PENS = [P.identity(), P.smoothed_power(), P.power(2 / 3)]


@given(seed=st.integers(0, 2**31), eta=st.floats(1e-3, 5.0), which=st.integers(0, 2),
       n3=st.integers(1, 4))
def test_tsvt_objective_decrease_property(seed, eta, which, n3):
    g = np.random.default_rng(seed)
    y = g.standard_normal((3, 4, n3))
    pen = PENS[which]
    if np.isfinite(pen.lipschitz_grad):
        w = adaptive_weights(g.standard_normal(y.shape), pen)
    else:
        w = WeightScheme(np.full(n3, 1 / n3), np.ones((3, n3)), pen)
    x, sv = weighted_tsvt(y, eta, w, return_svals=True)
    assert np.isrealobj(x)
    assert np.all(np.diff(sv, axis=0) <= 1e-12)
    assert tsvt_objective(x, y, eta, w) <= eta * weighted_norm(y, w) + 1e-8


@given(seed=st.integers(0, 2**31))
def test_adaptive_beta_order_property(seed):
    g = np.random.default_rng(seed)
    x = g.standard_normal((5, 4, 3)) * g.uniform(0.01, 100)
    w = adaptive_weights(x, P.smoothed_power())
    assert np.all(np.diff(w.beta, axis=0) >= 0)
