import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfeinstein import DigitSequence, InsufficientDepth, boundary_data
from cfeinstein.field import (
    SyntheticBoundary,
    eigen_residual,
    f_eval,
    f_oracle,
    field_sample,
    grad_f,
    sweep,
    w_integral,
)


@pytest.mark.parametrize("p", [(0.7, 0.1), (0.45, 0.02), (0.39, 0.3), (0.2, 0.05), (-0.5, 1.0), (10.0, 1.0), (1.0, 1e-3)])
def test_f_matches_quadrature(b3, bmix, p):
    for b in (b3, bmix):
        f, bound = f_eval(b, p)
        assert abs(f - f_oracle(b, p)) < 1e-10 + bound


def test_f_known_values(b3):
    f, _ = f_eval(b3, (0.7, 0.1))
    assert f == pytest.approx(0.6755321941144454, abs=1e-13)
    assert f_eval(b3, (10.0, 1.0))[0] == pytest.approx(0.99462, abs=1e-5)


def test_f_odd_about_alpha(bmix):
    ah = float(bmix.alpha_hat)
    for y in (0.01, 0.5, 3.0):
        assert abs(f_eval(bmix, (ah, y))[0]) < 1e-15
        for s in (0.1, 0.4, 2.0):
            assert f_eval(bmix, (ah + s, y))[0] == pytest.approx(-f_eval(bmix, (ah - s, y))[0], abs=1e-14)


def test_f_boundary_limit(b3):
    # f -> u on the boundary, away from corners
    for x in (0.75, 0.45, 1.7, -1.0):
        f = sweep(b3, [x], [1e-7])["f"][0]
        assert f == pytest.approx(float(b3.u(x)), abs=1e-10)


def test_insufficient_depth_reports_required(all3):
    b = boundary_data(all3, 5)
    with pytest.raises(InsufficientDepth) as exc:
        f_eval(b, (0.7, 0.1), tol=1e-10)
    assert exc.value.required > 5
    deeper = boundary_data(all3, exc.value.required)
    f_eval(deeper, (0.7, 0.1), tol=1e-10)


def test_synthetic_linear():
    b = SyntheticBoundary("linear", alpha_hat=0.3, test_only=True)
    s = field_sample(b, (0.9, 0.4), with_integral=False)
    assert s.f == pytest.approx(0.6, abs=1e-14)
    assert (s.f_x, s.f_y) == pytest.approx((1.0, 0.0), abs=1e-14)
    assert s.w_alg == pytest.approx(1.0, abs=1e-14)
    assert f_oracle(b, (0.9, 0.4)) == pytest.approx(0.6, abs=1e-9)


def test_synthetic_sign_closed_form():
    b = SyntheticBoundary("sign", alpha_hat=0.2, test_only=True)
    s = field_sample(b, (0.5, 0.4))
    r = math.hypot(0.3, 0.4)
    assert s.f == pytest.approx(0.3 / r, abs=1e-14)
    # w = 1/r^2 for sign data
    assert s.w_alg == pytest.approx(1 / r**2, rel=1e-13)
    assert s.w_int == pytest.approx(1 / r**2, rel=1e-13)


def test_synthetic_requires_flag():
    with pytest.raises(ValueError):
        SyntheticBoundary("sign")


def test_gradient_matches_finite_differences(bmix):
    for x, y in [(0.7, 0.1), (0.42, 0.05), (0.1, 0.3)]:
        fx, fy = grad_f(bmix, (x, y))
        h = 1e-5 * y
        F = lambda a, c: f_eval(bmix, (a, c))[0]
        assert fx == pytest.approx((F(x + h, y) - F(x - h, y)) / (2 * h), abs=1e-7)
        assert fy == pytest.approx((F(x, y + h) - F(x, y - h)) / (2 * h), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.39, 2.0), st.floats(0.01, 2.0))
def test_w_two_ways_and_skew_identity(x, y):
    b = boundary_data(DigitSequence.periodic([3, 4]), 40)
    s = field_sample(b, (x, y))
    assert s.w_int == pytest.approx(s.w_alg, rel=1e-6)
    eps_v = s.v1[0] * s.v2[1] - s.v1[1] * s.v2[0]
    assert eps_v == pytest.approx(y * s.w_alg, rel=1e-9, abs=1e-12)


def test_w_integral_guards(b3):
    with pytest.raises(ValueError):
        w_integral(b3, (0.7, 1e-4))
    lin = SyntheticBoundary("linear", test_only=True)
    with pytest.raises(ValueError):
        w_integral(lin, (0.7, 0.5))
    assert w_integral(b3, (0.7, 0.1)) == pytest.approx(4.4646679, rel=1e-6)


@pytest.mark.parametrize("p", [(0.7, 0.1), (0.5, 1.0), (0.0, 0.3), (1.3, 2.0)])
def test_eigen_residual_small(b3, p):
    assert eigen_residual(b3, p, 1e-2 * p[1]) < 1e-6


def test_eigen_residual_synthetic():
    for kind in ("linear", "sign"):
        b = SyntheticBoundary(kind, alpha_hat=0.25, test_only=True)
        for p in [(0.7, 0.1), (0.0, 1.5), (0.3, 0.05)]:
            # (h/y)^4 truncation against eps/h^2 roundoff balances near h = 3e-3 y
            assert eigen_residual(b, p, 3e-3 * p[1]) < 1e-8
    sgn = SyntheticBoundary("sign", alpha_hat=0.2, test_only=True)
    assert eigen_residual(sgn, (0.5, 0.4), 1e-3) < 1e-5


def test_eigen_residual_rejects_large_step(b3):
    with pytest.raises(ValueError):
        eigen_residual(b3, (0.7, 0.1), 0.06)


def test_sweep_shapes_and_positivity(b3):
    X, Y = np.meshgrid(np.linspace(0.4, 2.0, 7), np.linspace(0.01, 2.0, 5))
    r = sweep(b3, X.ravel(), Y.ravel())
    assert r["f"].shape == (35,)
    assert np.all(r["f"] > 0) and np.all(r["w_alg"] > 0)
    with pytest.raises(ValueError):
        sweep(b3, [0.5], [0.0])
