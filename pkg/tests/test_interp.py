import math

import mpmath
import numpy as np
import pytest

from sinfreq import kernels
from sinfreq.interp import (
    NODE_TOL,
    error_spectrum,
    interpolate,
    make_kernel,
    modulo_decompose,
    pulse,
)


def mp_weights(P, T, B, dps=40):
    """Weights straight from the Gamma / node-polynomial formula, evaluated in
    arbitrary precision and without any of the library's simplifications."""
    with mpmath.workdps(dps):
        T = mpmath.mpf(T)
        B = mpmath.mpf(B)
        a = 1 - B * T

        def sinc(z):
            z = mpmath.mpc(z)
            return mpmath.mpf(1) if z == 0 else mpmath.sin(mpmath.pi * z) / (mpmath.pi * z)

        def g(t):
            root = mpmath.sqrt(mpmath.mpc((t / T) ** 2 - (P + 1) ** 2))
            return sinc(a * root) / sinc(1j * a * (P + 1))

        out = []
        for p in range(-P, P + 1):
            t = p * T
            Lp = mpmath.fprod([t - q * T for q in range(-P, P + 1) if q != p])
            w = mpmath.gamma(p + P + 1) * mpmath.gamma(-p + P + 1) * g(t) / Lp
            out.append(mpmath.re(w))
        m = max(abs(x) for x in out)
        return np.array([float(x / m) for x in out])


def exp_samples(f, n, P, T=1.0):
    t = (n + np.arange(-P, P + 1)) * T
    return np.exp(2j * np.pi * f * t)


# ---- make_kernel ---------------------------------------------------------


def test_weights_match_high_precision_formula():
    k = make_kernel(6, 1.0, 0.25)
    ref = mp_weights(6, 1.0, 0.25)
    np.testing.assert_allclose(k.weights, ref, rtol=1e-12, atol=0)


@pytest.mark.parametrize("P,T,B", [(1, 1.0, 0.0), (3, 0.5, 0.5), (12, 2.0, 0.3), (20, 1.0, 0.9)])
def test_weights_match_high_precision_formula_other_kernels(P, T, B):
    np.testing.assert_allclose(make_kernel(P, T, B).weights, mp_weights(P, T, B), rtol=1e-11, atol=0)


def test_p1_weights_ratio_and_symmetry():
    # The factorials cancel exactly against L'(pT): w is proportional to
    # [-g(-1), g(0), -g(1)] (no extra factor 1/2 on the outer weights).
    k = make_kernel(1, 1.0, 0.0)
    g = pulse(np.array([-1.0, 0.0, 1.0]), 1, 0.0)
    w = k.weights
    assert w[0] == w[2]
    assert w[0] / w[1] == pytest.approx(-g[2] / g[1], rel=1e-14)


def test_weights_depend_only_on_BT():
    a = make_kernel(3, 0.5, 0.5).weights
    b = make_kernel(3, 1.0, 0.25).weights
    np.testing.assert_allclose(a / a[3], b / b[3], rtol=1e-14)


def test_weights_alternate_and_are_finite():
    for P in (1, 4, 8, 16, 40):
        w = make_kernel(P, 1.0, 0.5).weights
        assert np.all(np.isfinite(w)) and np.all(w != 0)
        assert np.all(np.sign(w[:-1]) == -np.sign(w[1:]))
        assert np.max(np.abs(w)) == 1.0
        np.testing.assert_array_equal(w, w[::-1])


def test_large_P_does_not_overflow():
    w = make_kernel(200, 1.0, 0.5).weights
    assert np.all(np.isfinite(w)) and np.all(w != 0)


@pytest.mark.parametrize(
    "args",
    [(0, 1.0, 0.1), (2, 1.0, 1.0), (2, 0.5, 2.5), (2, float("nan"), 0.1), (2, 1.0, float("inf")), (2, -1.0, 0.1), (2.5, 1.0, 0.1)],
)
def test_make_kernel_rejects(args):
    with pytest.raises(ValueError):
        make_kernel(*args)


def test_kernel_is_immutable():
    k = make_kernel(4, 1.0, 0.25)
    with pytest.raises(ValueError):
        k.weights[0] = 2.0


# ---- modulo decomposition ---------------------------------------------


@pytest.mark.parametrize("t,T", [(3.4, 1.0), (-3.4, 1.0), (2.5, 1.0), (-0.25, 0.5), (7.123, 0.01)])
def test_modulo_decompose(t, T):
    n, u = modulo_decompose(t, T)
    assert n == math.floor(t / T + 0.5)
    assert abs(u) <= T / 2 * (1 + 1e-12)
    assert n * T + u == pytest.approx(t, abs=1e-15)


# ---- interpolate -------------------------------------------------------


def test_constant_reproduced_with_zero_derivatives():
    k = make_kernel(6, 1.0, 0.25)
    c = 2.5 - 1.5j
    for u in np.linspace(-0.5, 0.5, 41):
        r = interpolate(k, np.full(13, c), u)
        assert abs(r.value - c) < 1e-14
        assert abs(r.d1) < 1e-13 and abs(r.d2) < 1e-12


def test_node_reproduction_bit_exact():
    k = make_kernel(6, 1.0, 0.25)
    rng = np.random.default_rng(0)
    s = rng.standard_normal(13) + 1j * rng.standard_normal(13)
    assert interpolate(k, s, 0.0).value == s[6]
    assert interpolate(k, s, 0.3 * NODE_TOL).value == s[6]
    s = exp_samples(0.1, 4, 6)
    assert interpolate(k, s, 0.0).value == s[6]


def test_node_reproduction_every_stencil_node():
    # kernels accept offsets beyond T/2, which exercises the off-centre nodes
    k = make_kernel(5, 0.7, 0.3)
    rng = np.random.default_rng(1)
    s = rng.standard_normal(11) + 1j * rng.standard_normal(11)
    for i, x in enumerate(k.nodes):
        a0, _, _ = kernels.cardinal(k.weights, k.T, float(x), k.eta)
        assert a0 @ s == s[i]


def test_accuracy_example():
    k = make_kernel(8, 1.0, 0.25)
    n = 3
    r = interpolate(k, exp_samples(0.1, n, 8), 0.3)
    assert abs(r.value - np.exp(2j * np.pi * 0.1 * (n + 0.3))) < 1e-7


def test_exponential_derivatives_analytic():
    k = make_kernel(12, 1.0, 0.25)
    f, n, u = 0.07, 2, -0.21
    r = interpolate(k, exp_samples(f, n, 12), u)
    e = np.exp(2j * np.pi * f * (n + u))
    w = 2j * np.pi * f
    assert abs(r.d1 - w * e) < 1e-8
    assert abs(r.d2 - w * w * e) < 1e-7


def test_d1_matches_finite_difference_spec_step():
    k = make_kernel(8, 1.0, 0.25)
    rng = np.random.default_rng(2)
    h = 1e-6 * k.T
    for _ in range(50):
        s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
        u = rng.uniform(-0.5 + 2e-6, 0.5 - 2e-6)
        d1 = interpolate(k, s, u).d1
        fd = (interpolate(k, s, u + h).value - interpolate(k, s, u - h).value) / (2 * h)
        assert abs(fd - d1) <= 1e-6 * max(abs(d1), 1.0)


def test_derivatives_match_finite_differences_random_f_u():
    # 100 random (f, u) pairs; d1 from differences of the value, d2 from
    # differences of d1; tolerance 1e-5 relative
    rng = np.random.default_rng(3)
    for T in (1.0, 0.01):
        k = make_kernel(8, T, 0.25 / T)
        h = 1e-4 * T
        for _ in range(100):
            f = rng.uniform(-0.125, 0.125) / T
            s = exp_samples(f, 0, 8, T) * (rng.standard_normal() + 1j)
            s = s + 0.3 * (rng.standard_normal(17) + 1j * rng.standard_normal(17))
            u = rng.uniform(-0.5, 0.5) * T
            r = interpolate(k, s, u)
            up = kernels.cardinal(k.weights, T, u + h, k.eta)
            um = kernels.cardinal(k.weights, T, u - h, k.eta)
            fd1 = (up[0] @ s - um[0] @ s) / (2 * h)
            fd2 = (up[1] @ s - um[1] @ s) / (2 * h)
            assert abs(fd1 - r.d1) <= 1e-5 * max(abs(r.d1), abs(r.value) / T)
            assert abs(fd2 - r.d2) <= 1e-5 * max(abs(r.d2), abs(r.value) / T**2)


def test_derivatives_continuous_across_node_tolerance():
    # just inside and just outside the node band give the same derivatives
    k = make_kernel(8, 1.0, 0.25)
    rng = np.random.default_rng(4)
    s = rng.standard_normal(17) + 1j * rng.standard_normal(17)
    inside = interpolate(k, s, 0.5 * k.eta)
    for d in (1.5 * k.eta, 1e-8, 1e-7):
        out = interpolate(k, s, d)
        assert abs(out.d1 - inside.d1) < 1e-6 * abs(inside.d1) + 1e-6
        assert abs(out.d2 - inside.d2) < 1e-6 * abs(inside.d2) + 1e-6


def test_scale_invariance_exact():
    k = make_kernel(7, 1.0, 0.4)
    rng = np.random.default_rng(5)
    s = rng.standard_normal(15) + 1j * rng.standard_normal(15)
    alpha = 0.75 - 0.5j  # exactly representable parts
    for u in (0.0, 0.17, -0.49):
        a = interpolate(k, s, u)
        b = interpolate(k, alpha * s, u)
        assert b.value == pytest.approx(alpha * a.value, rel=1e-15, abs=0)
        assert b.d1 == pytest.approx(alpha * a.d1, rel=1e-15, abs=0)
        assert b.d2 == pytest.approx(alpha * a.d2, rel=1e-15, abs=0)


def test_interpolate_rejects_bad_input():
    k = make_kernel(3, 1.0, 0.25)
    with pytest.raises(ValueError):
        interpolate(k, np.ones(7), 0.51)
    with pytest.raises(ValueError):
        interpolate(k, np.ones(6), 0.0)
    with pytest.raises(ValueError):
        interpolate(k, np.array([1, 2, np.nan, 4, 5, 6, 7]), 0.0)


def test_numpy_and_numba_cardinal_agree():
    k = make_kernel(9, 0.3, 1.0)
    for u in np.concatenate([np.linspace(-0.15, 0.15, 31), [0.0, 1e-12, 4e-10, 1e-9]]):
        a = kernels._cardinal_np(k.weights, k.T, float(u), k.eta)
        b = kernels._cardinal_nb(k.weights, k.T, float(u), k.eta)
        for x, y in zip(a, b):
            np.testing.assert_allclose(x, y, rtol=1e-12, atol=1e-12 * np.max(np.abs(x)))


# ---- error_spectrum ----------------------------------------------------


def test_error_spectrum_zero_frequency_is_rounding():
    k = make_kernel(8, 1.0, 0.25)
    E = error_spectrum(k, [0.0], np.linspace(-0.5, 0.5, 101))
    assert E[0] < 1e-13


def test_error_spectrum_matches_interpolate():
    k = make_kernel(5, 1.0, 0.25)
    f = np.array([-0.1, 0.05, 0.125])
    u = np.linspace(-0.5, 0.5, 21)
    E = error_spectrum(k, f, u)
    for i, fi in enumerate(f):
        ref = max(abs(interpolate(k, exp_samples(fi, 0, 5), x).value - np.exp(2j * np.pi * fi * x)) for x in u)
        assert E[i] == pytest.approx(ref, rel=1e-12)


def test_error_spectrum_decreasing_in_P():
    f = np.linspace(-0.125, 0.125, 101)
    u = np.linspace(-0.5, 0.5, 101)
    m = [error_spectrum(make_kernel(P, 1.0, 0.25), f, u).max() for P in (4, 6, 8, 10)]
    assert all(a > b for a, b in zip(m, m[1:]))


def test_error_spectrum_ratio_P10_P5():
    f = np.linspace(-0.125, 0.125, 201)
    u = np.linspace(-0.5, 0.5, 201)
    r = error_spectrum(make_kernel(10, 1.0, 0.25), f, u).max() / error_spectrum(make_kernel(5, 1.0, 0.25), f, u).max()
    trend = math.exp(-math.pi * 0.75 * 5)
    assert trend / 100 < r < trend * 100


def test_error_spectrum_rejects_out_of_range():
    k = make_kernel(4, 1.0, 0.25)
    with pytest.raises(ValueError):
        error_spectrum(k, [0.2], [0.0])
    with pytest.raises(ValueError):
        error_spectrum(k, [0.1], [0.6])
    with pytest.raises(ValueError):
        error_spectrum(k, [], [0.0])
