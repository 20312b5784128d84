"""The eigenfunction f = k_y * u, its gradient, and the quantity w.

With the kernel k_y(s) = y^2 / (2 (s^2 + y^2)^{3/2}) and s = t - x, the two
primitives used throughout are

    int k_y(s) ds   = s / (2 r),          r = sqrt(s^2 + y^2)
    int s k_y(s) ds = -y^2 / (2 r).

For a segment of u with slope m the contribution to f is
u(t0) M0 + m (N1 - s0 M0), where M0, N1 are the two primitives differenced
over the segment.  Differencing them naively cancels badly on the very short,
very steep segments next to alpha, so both differences are rewritten in
product form (see ``_segment_moments``).

The derivatives use f_x = int k u' and y f_y = int s k u', both exact
consequences of the kernel's scaling k_y(s) = y^-1 k_1(s/y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cf_core import InsufficientDepth, Profile

EPS = np.finfo(float).eps
# L1 norms of d/dx k_y and d/dy k_y are these constants divided by y
KX_L1 = 1.0
KY_L1 = 4.0 / (3.0 * math.sqrt(3.0))
W_INT_MIN_Y = 1e-3


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __iter__(self):
        yield self.x
        yield self.y


def _point(p, allow_boundary=False):
    x, y = (float(c) for c in p)
    if y < 0 or (y == 0 and not allow_boundary):
        raise ValueError(f"point ({x}, {y}) is not in the open upper half-plane")
    return x, y


@dataclass(frozen=True)
class FieldSample:
    x: float
    y: float
    f: float
    f_x: float
    f_y: float
    v1: tuple
    v2: tuple
    w_alg: float
    w_int: float | None
    trunc_bound: float
    J_used: int

    def to_row(self):
        return {
            "x": self.x, "y": self.y, "f": self.f, "f_x": self.f_x, "f_y": self.f_y,
            "w_alg": self.w_alg, "w_int": self.w_int,
            "trunc_bound": self.trunc_bound, "J_used": self.J_used,
        }


class SyntheticBoundary:
    """Closed-form boundary data used to test the field and metric code.

    ``kind="linear"`` is u(x) = x - alpha_hat (f = u exactly);
    ``kind="sign"`` is u(x) = sgn(x - alpha_hat).  Neither comes from a digit
    sequence, so admissibility checks do not apply; construction therefore
    demands ``test_only=True``.
    """

    J = 0
    trunc_sup = 0.0

    def __init__(self, kind, alpha_hat=0.0, *, test_only=False):
        if not test_only:
            raise ValueError("synthetic boundary data is for tests only; pass test_only=True")
        if kind not in ("linear", "sign"):
            raise ValueError(f"unknown synthetic kind {kind!r}")
        self.kind = kind
        self.alpha_hat = float(alpha_hat)
        self.alpha_lo = self.alpha_hi = self.alpha_hat
        empty = np.zeros(0)
        a = self.alpha_hat
        if kind == "linear":
            self.profile = Profile(empty, empty, empty, empty, empty, linear=(1.0, a))
        else:
            self.profile = Profile(
                empty, empty, empty, empty, empty,
                right_rays=((a, 1.0),), left_rays=((a, -1.0),), atoms=((a, 2.0),),
            )

    def u(self, x):
        s = float(x) - self.alpha_hat
        return s if self.kind == "linear" else float(np.sign(s))


def _segment_moments(s0, L, y):
    """Kernel moments over [s0, s0 + L] in product form.

    Returns M0 = int k and G = (1/r0 - 1/r1)/2, so that int s k = y^2 G.
    """
    s1 = s0 + L
    y2 = y * y
    r0 = np.hypot(s0, y)
    r1 = np.hypot(s1, y)
    same = s0 * s1 > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        stable = 0.5 * y2 * L * (s0 + s1) / ((s1 * r0 + s0 * r1) * r0 * r1)
    direct = 0.5 * (s1 / r1 - s0 / r0)
    M0 = np.where(same, stable, direct)
    G = 0.5 * L * (s0 + s1) / (r0 * r1 * (r0 + r1))
    return M0, G


def field_arrays(profile, X, Y, moments=False):
    """Vectorised f, f_x, f_y (and w-moments) of ``profile`` at points (X, Y).

    With ``moments=True`` the result also holds mu.N1, nu.M0 and nu.N1, the
    kernel moments of the boundary pair (mu, nu) = (u', x u' - u) used by the
    double-integral formula for w.  ``roundoff`` is a floating-point error
    estimate for f.
    """
    X = np.atleast_1d(np.asarray(X, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    xc = X[:, None]
    yc = Y[:, None]
    y2 = yc * yc
    out = {
        "f": np.zeros(X.shape), "f_x": np.zeros(X.shape), "f_y": np.zeros(X.shape),
        "muN1": np.zeros(X.shape), "nuM0": np.zeros(X.shape), "nuN1": np.zeros(X.shape),
    }
    mag = np.zeros(X.shape)

    if profile.linear is not None:
        a, root = profile.linear
        out["f"] += a * (X - root)
        out["f_x"] += a
        mag += np.abs(a * (X - root))

    if profile.t0.size:
        s0 = profile.t0[None, :] - xc
        if profile.t0_lo is not None:
            s0 = s0 + profile.t0_lo[None, :]
        L = profile.length[None, :]
        M0, G = _segment_moments(s0, L, yc)
        N1 = y2 * G
        m = profile.slope[None, :]
        terms = profile.anchor_u[None, :] * M0 + m * (N1 - s0 * M0)
        out["f"] += terms.sum(axis=1)
        mag += (np.abs(profile.anchor_u[None, :] * M0) + np.abs(m * N1) + np.abs(m * s0 * M0)).sum(axis=1)
        out["f_x"] += (m * M0).sum(axis=1)
        out["f_y"] += (m * yc * G).sum(axis=1)
        if moments:
            nu = profile.nu[None, :]
            out["muN1"] += (m * N1).sum(axis=1)
            out["nuM0"] += (nu * M0).sum(axis=1)
            out["nuN1"] += (nu * N1).sum(axis=1)

    for start, val in profile.right_rays:
        s0 = start - X
        r0 = np.hypot(s0, Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            M0 = np.where(s0 > 0, 0.5 * Y * Y / (r0 * (r0 + s0)), 0.5 * (1 - s0 / r0))
        N1 = 0.5 * Y * Y / r0
        out["f"] += val * M0
        mag += np.abs(val * M0)
        out["nuM0"] += -val * M0
        out["nuN1"] += -val * N1

    for end, val in profile.left_rays:
        s1 = end - X
        r1 = np.hypot(s1, Y)
        with np.errstate(divide="ignore", invalid="ignore"):
            M0 = np.where(s1 < 0, 0.5 * Y * Y / (r1 * (r1 - s1)), 0.5 * (1 + s1 / r1))
        N1 = -0.5 * Y * Y / r1
        out["f"] += val * M0
        mag += np.abs(val * M0)
        out["nuM0"] += -val * M0
        out["nuN1"] += -val * N1

    for c, jump in profile.atoms:
        s = c - X
        r = np.hypot(s, Y)
        kk = 0.5 * Y * Y / r**3
        out["f_x"] += jump * kk
        out["f_y"] += jump * s * kk / Y
        out["muN1"] += jump * s * kk
        out["nuM0"] += c * jump * kk
        out["nuN1"] += c * jump * s * kk

    out["roundoff"] = 64 * EPS * mag
    if not moments:
        for key in ("muN1", "nuM0", "nuN1"):
            del out[key]
    return out


def _required_depth(b, bound, tol):
    # b_J at least halves per level when e_j >= 3
    return b.J + max(1, math.ceil(math.log2(bound / tol)))


def f_eval(b, p, tol=1e-10):
    """f at ``p`` with an a-posteriori error bound.

    The bound is the sup-norm truncation error of the boundary data (the
    kernel has mass one) plus a rounding estimate.
    """
    x, y = _point(p)
    res = field_arrays(b.profile, [x], [y])
    bound = b.trunc_sup + float(res["roundoff"][0])
    if bound > tol:
        raise InsufficientDepth(
            f"truncation bound {bound:.3g} exceeds tol {tol:.3g} at depth {b.J}",
            required=_required_depth(b, bound, tol),
        )
    return float(res["f"][0]), bound


def f_oracle(b, p, epsabs=1e-10):
    """Brute-force adaptive quadrature of f = int k_y(x - t) u(t) dt.

    Integrates segment by segment with scipy's QUADPACK wrapper; each piece
    is evaluated from ``profile.u_at`` only, never from the primitives.
    """
    from scipy.integrate import quad

    x, y = _point(p)
    prof = b.profile

    def kernel(t):
        s = x - t
        return y * y / (2.0 * (s * s + y * y) ** 1.5)

    if prof.linear is not None:
        a, root = prof.linear
        # fold the line about x so the integrand decays
        val, err = quad(lambda s: kernel(x - s) * a * (2 * x - 2 * root), 0, np.inf,
                        epsabs=epsabs / 2, epsrel=0, limit=200)
        if err > epsabs:
            _fail(err, epsabs)
        return val

    pts = prof.breakpoints()
    total = 0.0
    err_total = 0.0
    pieces = [(-np.inf, pts[0])] + list(zip(pts, pts[1:])) + [(pts[-1], np.inf)]
    for lo, hi in pieces:
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (hi - 1 if np.isfinite(hi) else lo + 1)
        uval = float(prof.u_at(mid))
        slope = 0.0
        if np.isfinite(lo) and np.isfinite(hi) and hi > lo:
            slope = (float(prof.u_at(hi - (hi - lo) * 0.25)) - float(prof.u_at(lo + (hi - lo) * 0.25))) / (0.5 * (hi - lo))

        def integrand(t, uval=uval, mid=mid, slope=slope):
            return kernel(t) * (uval + slope * (t - mid))

        brk = [x] if lo < x < hi else None
        if np.isfinite(lo) and np.isfinite(hi):
            val, err = quad(integrand, lo, hi, points=brk, epsabs=epsabs / (4 * len(pieces)), epsrel=1e-13, limit=200)
        else:
            val, err = quad(integrand, lo, hi, epsabs=epsabs / (4 * len(pieces)), epsrel=1e-13, limit=200)
        total += val
        err_total += err
    if err_total > epsabs:
        _fail(err_total, epsabs)
    return total


def _fail(err, target):
    raise ArithmeticError(f"quadrature did not converge: error estimate {err:.3g} > {target:.3g}")


def grad_f(b, p, tol=1e-8):
    """(f_x, f_y) from the differentiated segment primitives."""
    x, y = _point(p)
    res = field_arrays(b.profile, [x], [y])
    bound = b.trunc_sup * max(KX_L1, KY_L1) / y
    if bound > tol:
        raise InsufficientDepth(
            f"gradient truncation bound {bound:.3g} exceeds tol {tol:.3g}",
            required=_required_depth(b, bound, tol),
        )
    return float(res["f_x"][0]), float(res["f_y"][0])


def w_from_moments(res, Y):
    """w = y^-2 [ (mu.N1)(nu.M0) - (mu.M0)(nu.N1) ] from kernel moments."""
    return (res["muN1"] * res["nuM0"] - res["f_x"] * res["nuN1"]) / (Y * Y)


def sweep(b, X, Y, with_integral=False):
    """Field quantities on arrays of points; the workhorse behind the public ops."""
    X = np.atleast_1d(np.asarray(X, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    X, Y = np.broadcast_arrays(X, Y)
    if np.any(Y <= 0):
        raise ValueError("all points must have y > 0")
    want = with_integral and b.profile.sgn_asymptotic
    res = field_arrays(b.profile, X, Y, moments=want)
    f, fx, fy = res["f"], res["f_x"], res["f_y"]
    res["w_alg"] = fx * fx + fy * fy - f * fy / Y
    if want:
        w_int = w_from_moments(res, Y)
        res["w_int"] = np.where(Y >= W_INT_MIN_Y, w_int, np.nan)
    res["trunc_bound"] = b.trunc_sup + res["roundoff"]
    res["x"], res["y"] = X, Y
    return res


def field_sample(b, p, tol=1e-8, with_integral=True):
    """Assemble f, its gradient, v1, v2 and w at one point."""
    x, y = _point(p)
    res = sweep(b, [x], [y], with_integral=with_integral)
    f, fx, fy = float(res["f"][0]), float(res["f_x"][0]), float(res["f_y"][0])
    bound = float(res["trunc_bound"][0])
    if bound > tol:
        raise InsufficientDepth(
            f"truncation bound {bound:.3g} exceeds tol {tol:.3g}",
            required=_required_depth(b, bound, tol),
        )
    v1 = (fy, x * fy - y * fx)
    v2 = (fx, x * fx + y * fy - f)
    w_alg = float(res["w_alg"][0])
    eps_v = v1[0] * v2[1] - v1[1] * v2[0]
    scale = abs(y * w_alg) + abs(x * fx * fy) + abs(f * fy) + abs(y) * (fx * fx + fy * fy)
    if abs(eps_v - y * w_alg) > 1e-10 * scale:
        raise ArithmeticError(f"skew identity failed: {eps_v!r} vs {y * w_alg!r}")
    w_int = None
    if "w_int" in res and np.isfinite(res["w_int"][0]):
        w_int = float(res["w_int"][0])
    return FieldSample(x, y, f, fx, fy, v1, v2, w_alg, w_int, bound, b.J)


def w_integral(b, p, J=None):
    """w from the double integral of k k D, collapsed per segment pair.

    Only valid for data that is a multiple of sgn outside a compact set; for
    y below ``W_INT_MIN_Y`` the y^-2 prefactor makes it ill-conditioned, so it
    is refused there.
    """
    x, y = _point(p)
    if J is not None and J != b.J:
        raise ValueError(f"boundary data is at depth {b.J}, not {J}")
    if not b.profile.sgn_asymptotic:
        raise ValueError("w_integral needs boundary data equal to +-1 outside a compact set")
    if y < W_INT_MIN_Y:
        raise ValueError(f"w_integral is ill-conditioned for y < {W_INT_MIN_Y}; use w_alg")
    res = field_arrays(b.profile, [x], [y], moments=True)
    return float(w_from_moments(res, np.array([y]))[0])


def _stencil_F(b, x, y, h):
    offs = np.array([-2, -1, 0, 1, 2], dtype=float) * h
    X = np.concatenate([x + offs, np.full(5, x)])
    Y = np.concatenate([np.full(5, y), y + offs])
    f = field_arrays(b.profile, X, Y)["f"]
    F = f / np.sqrt(Y)
    return F[:5], F[5:]


def eigen_residual(b, p, h_fd):
    """|y^2 (F_xx + F_yy) - 3F/4| / max(1, |F|) for F = f / sqrt(y).

    Second derivatives use the fourth-order five-point stencil along each axis.
    """
    x, y = _point(p)
    if not (h_fd > 0 and y > 2 * h_fd):
        raise ValueError(f"stencil with h={h_fd} leaves the upper half-plane at y={y}")
    Fx, Fy = _stencil_F(b, x, y, h_fd)
    c = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12.0 * h_fd * h_fd)
    F = Fx[2]
    lap = y * y * (c @ Fx + c @ Fy)
    return abs(lap - 0.75 * F) / max(1.0, abs(F))
