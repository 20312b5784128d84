"""The toric metric g built from (f, v1, v2, w) and its numerical curvature.

Coordinates are ordered (x, y, z1, z2) and dx^dy^dz1^dz2 is the positive
orientation.  Components never depend on z1, z2, so only x- and
y-derivatives are taken, by central differences of the metric itself.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .field import _point, sweep


class DegeneratePoint(ValueError):
    """f or w (nearly) vanishes, so g is undefined or ill-conditioned."""


@dataclass(frozen=True)
class MetricSample:
    point: tuple
    components: np.ndarray
    conformal_factor: float
    torus_block: np.ndarray
    f: float
    w: float


@dataclass(frozen=True)
class CurvatureReport:
    point: tuple
    lambda_est: float
    einstein_residual: float
    scalar: float
    weyl_sd_norm: float
    weyl_asd_norm: float
    h_fd: float
    w: float
    f: float

    def to_json(self):
        d = asdict(self)
        d["point"] = list(self.point)
        return d


def metric_arrays(b, X, Y):
    """Metric components g[P, 4, 4] at the points (X, Y), plus f and w."""
    res = sweep(b, X, Y)
    X, Y = res["x"], res["y"]
    f, fx, fy, w = res["f"], res["f_x"], res["f_y"], res["w_alg"]
    aw = np.abs(w)
    # eps(v, dz) = v_1 dz2 - v_2 dz1 has coefficients (-v_2, v_1) on (dz1, dz2)
    c1 = np.stack([-(X * fy - Y * fx), fy], axis=-1)
    c2 = np.stack([-(X * fx + Y * fy - f), fx], axis=-1)
    torus = (c1[:, :, None] * c1[:, None, :] + c2[:, :, None] * c2[:, None, :]) / (aw * f * f)[:, None, None]
    g = np.zeros(X.shape + (4, 4))
    conf = aw / (f * f)
    g[:, 0, 0] = conf
    g[:, 1, 1] = conf
    g[:, 2:, 2:] = torus
    return g, f, w


def _check_interior(b, x, y):
    if not x > float(b.alpha_hi):
        raise ValueError(f"x = {x} is not to the right of the alpha enclosure")


def metric_at(b, p, tol=1e-12):
    """g at one point of D_+, checked symmetric and positive definite."""
    x, y = _point(p)
    _check_interior(b, x, y)
    g, f, w = metric_arrays(b, [x], [y])
    f, w = float(f[0]), float(w[0])
    if abs(f) <= tol or abs(w) <= tol:
        raise DegeneratePoint(f"degenerate point ({x}, {y}): f={f!r}, w={w!r}")
    g = g[0]
    minors = [np.linalg.det(g[:k, :k]) for k in range(1, 5)]
    if min(minors) <= 0:
        raise DegeneratePoint(f"metric not positive definite at ({x}, {y}); minors {minors}")
    return MetricSample((x, y), g, float(g[0, 0]), g[2:, 2:].copy(), f, w)


def base_h_at(b, p):
    """Base metric h = (w/f^2)(dx^2 + dy^2) as a 2x2 matrix."""
    x, y = _point(p)
    _check_interior(b, x, y)
    res = sweep(b, [x], [y])
    f, w = float(res["f"][0]), float(res["w_alg"][0])
    if f == 0 or w == 0:
        raise DegeneratePoint(f"degenerate point ({x}, {y})")
    return (w / (f * f)) * np.eye(2)


def default_step(b, x, y):
    """1e-3 times the distance to the nearer of y = 0 and x = alpha_hat."""
    return 1e-3 * min(y, x - float(b.alpha_hat))


def metric_jets(b, x, y, h):
    """g, dg[c, a, b] = d_c g_ab and ddg[c, d, a, b] by central differences."""
    ii, jj = np.meshgrid([-1, 0, 1], [-1, 0, 1], indexing="ij")
    X = x + h * ii.ravel()
    Y = y + h * jj.ravel()
    g_all, f_all, w_all = metric_arrays(b, X, Y)
    G = g_all.reshape(3, 3, 4, 4)
    g0 = G[1, 1]
    dg = np.zeros((4, 4, 4))
    dg[0] = (G[2, 1] - G[0, 1]) / (2 * h)
    dg[1] = (G[1, 2] - G[1, 0]) / (2 * h)
    ddg = np.zeros((4, 4, 4, 4))
    ddg[0, 0] = (G[2, 1] - 2 * g0 + G[0, 1]) / (h * h)
    ddg[1, 1] = (G[1, 2] - 2 * g0 + G[1, 0]) / (h * h)
    ddg[0, 1] = ddg[1, 0] = (G[2, 2] - G[2, 0] - G[0, 2] + G[0, 0]) / (4 * h * h)
    return g0, dg, ddg, float(f_all[4]), float(w_all[4])


def riemann(g, dg, ddg):
    """All-lower Riemann tensor with R_abcd = K (g_ac g_bd - g_ad g_bc) on a space form."""
    ginv = np.linalg.inv(g)
    # first-kind Christoffel Gamma_{a,bc} = (d_b g_ac + d_c g_ab - d_a g_bc) / 2
    gam1 = 0.5 * (np.einsum("bac->abc", dg) + np.einsum("cab->abc", dg) - dg)
    gam = np.einsum("ea,abc->ebc", ginv, gam1)
    second = 0.5 * (
        np.einsum("bcad->abcd", ddg)
        + np.einsum("adbc->abcd", ddg)
        - np.einsum("acbd->abcd", ddg)
        - np.einsum("bdac->abcd", ddg)
    )
    quad = np.einsum("ef,ebc,fad->abcd", g, gam, gam) - np.einsum("ef,ebd,fac->abcd", g, gam, gam)
    return second + quad


# Lambda^2 basis e01, e02, e03, e23, e31, e12: the Hodge star swaps I <-> I+3
_PAIRS = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)]
_STAR = np.block([[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]])


def _two_form_matrix(T):
    return np.array([[T[a, b, c, d] for (c, d) in _PAIRS] for (a, b) in _PAIRS])


def curvature_from_metric(g, dg, ddg):
    """Frame Ricci, lambda, Einstein residual and relative Weyl half-norms."""
    R = riemann(g, dg, ddg)
    L = np.linalg.cholesky(g)
    A = np.linalg.inv(L.T)  # columns: oriented orthonormal frame
    Rf = np.einsum("mnrs,ma,nb,rc,sd->abcd", R, A, A, A, A)
    ric = np.einsum("abad->bd", Rf)
    scalar = float(np.trace(ric))
    lam = scalar / 4.0
    residual = float(np.max(np.abs(ric - lam * np.eye(4))))
    I = np.eye(4)
    gg = np.einsum("ac,bd->abcd", I, I) - np.einsum("ad,bc->abcd", I, I)
    kulk = (
        np.einsum("ac,bd->abcd", I, ric) - np.einsum("ad,bc->abcd", I, ric)
        - np.einsum("bc,ad->abcd", I, ric) + np.einsum("bd,ac->abcd", I, ric)
    )
    weyl = Rf - 0.5 * kulk + (scalar / 6.0) * gg
    W = _two_form_matrix(weyl)
    P_plus = 0.5 * (np.eye(6) + _STAR)
    P_minus = 0.5 * (np.eye(6) - _STAR)
    scale = np.linalg.norm(_two_form_matrix(Rf))
    w_sd = np.linalg.norm(P_plus @ W @ P_plus) / scale
    w_asd = np.linalg.norm(P_minus @ W @ P_minus) / scale
    return {
        "ricci": ric, "scalar": scalar, "lambda": lam, "residual": residual,
        "weyl_sd": float(w_sd), "weyl_asd": float(w_asd),
    }


def curvature_report(b, p, h_fd=None):
    """Numerical curvature of g at ``p`` from a 3x3 stencil of metric samples."""
    x, y = _point(p)
    _check_interior(b, x, y)
    h = default_step(b, x, y) if h_fd is None else float(h_fd)
    if not (0 < 2 * h < y and x - 2 * h > float(b.alpha_hi)):
        raise ValueError(f"stencil of half-width {2 * h} leaves the region at ({x}, {y})")
    g, dg, ddg, f, w = metric_jets(b, x, y, h)
    if abs(f) < 1e-12 or abs(w) < 1e-12:
        raise DegeneratePoint(f"f or w nearly vanishes at ({x}, {y})")
    c = curvature_from_metric(g, dg, ddg)
    return CurvatureReport((x, y), c["lambda"], c["residual"], c["scalar"],
                           c["weyl_sd"], c["weyl_asd"], h, w, f)


def scalar_sign_check(b, points, h_fd=None):
    """Check sign(scalar curvature) = -sign(w) at each point; lists violations."""
    rows, violations = [], []
    for p in points:
        rep = curvature_report(b, p, h_fd)
        ok = np.sign(rep.scalar) == -np.sign(rep.w)
        rows.append({"point": list(rep.point), "scalar": rep.scalar, "w": rep.w, "ok": bool(ok)})
        if not ok:
            violations.append(rows[-1])
    return {"cases": rows, "violations": violations, "passed": not violations}
