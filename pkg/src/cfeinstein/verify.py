"""Executable checks of the identities, inequalities and estimates behind the metric.

Every suite returns a :class:`SuiteReport`.  Exact statements are checked with
``Fraction``/``int`` arithmetic; anything that refers to alpha itself uses a
much deeper enclosure [lo*, hi*] and takes whichever end is conservative.
"""
from __future__ import annotations

import json
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats

from .cf_core import DigitSequence, boundary_data, convergents
from .field import EPS, sweep
from .metric import metric_arrays

THREADS_ENV = "CFEINSTEIN_THREADS"


def n_threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def run_parallel(tasks):
    """Run zero-argument callables, results in submission order."""
    n = n_threads()
    if n == 1 or len(tasks) < 2:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(lambda t: t(), tasks))


def _num(v):
    """JSON-friendly rendering: exact rationals become "p/q" strings."""
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    return v


@dataclass
class Case:
    name: str
    inputs: dict
    measured: object
    bound: object
    passed: bool
    margin: float

    def to_json(self):
        return {
            "name": self.name,
            "inputs": _num(self.inputs),
            "measured": _num(self.measured),
            "bound": _num(self.bound),
            "passed": bool(self.passed),
            "margin": float(self.margin),
        }


@dataclass
class SuiteReport:
    name: str
    cases: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.cases)

    @property
    def worst_margin(self):
        return min((c.margin for c in self.cases), default=0.0)

    def failures(self):
        return [c for c in self.cases if not c.passed]

    def add(self, name, inputs, measured, bound, passed, margin=0.0):
        margin = float(margin)
        if not math.isfinite(margin):
            margin = math.copysign(1e300, margin) if not math.isnan(margin) else -1e300
        self.cases.append(Case(name, inputs, measured, bound, bool(passed), margin))

    def to_json(self):
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "cases": [c.to_json() for c in self.cases],
            "notes": _num(self.notes),
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data):
        cases = [Case(c["name"], c["inputs"], c["measured"], c["bound"], c["passed"], c["margin"])
                 for c in data["cases"]]
        return cls(data["name"], cases, data.get("notes", {}))


def _rel_margin(lhs, rhs):
    """(rhs - lhs)/|rhs| as a float, for a claim lhs < rhs."""
    if rhs == 0:
        return float(rhs - lhs)
    return float((Fraction(rhs) - Fraction(lhs)) / abs(Fraction(rhs)))


# ---------------------------------------------------------------------------
# exact identities

def _matmul2(A, B):
    return ((A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
            (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]))


def identities_suite(t):
    """Determinant, matrix-product and gap identities, all exact."""
    rep = SuiteReport("identities")
    P, e, a = t.pairs, t.digits, t.corners
    J = t.depth
    for j in range(J + 1):
        (m0, n0), (m1, n1) = P[j], P[j + 1]
        d = m0 * n1 - m1 * n0
        rep.add("det_adjacent", {"j": j}, d, 1, d == 1)
    prod = ((1, 0), (0, 1))  # M_1 ... M_{j-1}
    for j in range(1, J + 1):
        ej = e[j - 1]
        (mp, np_), (m, n), (mn, nn) = P[j - 1], P[j], P[j + 1]
        d = mp * nn - mn * np_
        rep.add("det_skip", {"j": j}, d, ej, d == ej)
        lhs1 = _matmul2(prod, ((1, 0), (ej, 1)))
        lhs2 = _matmul2(prod, ((1, -1), (ej, 0)))
        ok = lhs1 == ((nn, n), (mn, m)) and lhs2 == ((nn, np_), (mn, mp))
        rep.add("matrix_product", {"j": j}, [list(lhs1), list(lhs2)],
                [[[nn, n], [mn, m]], [[nn, np_], [mn, mp]]], ok)
        prod = _matmul2(prod, ((0, 1), (-1, ej)))
        gap = Fraction(nn, mn) - Fraction(n, m)
        rep.add("convergent_gap", {"j": j}, gap, Fraction(1, m * mn), gap == Fraction(1, m * mn))
        off = a[j] - Fraction(n, m)
        want = Fraction(1, m * (mn - m))
        rep.add("corner_offset", {"j": j}, off, want, off == want)
        cg = a[j - 1] - a[j]
        want = Fraction(ej - 2, (mn - m) * (m - mp))
        rep.add("corner_gap", {"j": j}, cg, want, cg == want)
    return rep


# ---------------------------------------------------------------------------
# growth and gap bounds

def _gt_phi2(big, small):
    """Exact test big > phi^2 small for integers, phi^2 = (3 + sqrt 5)/2."""
    if small <= 0:
        return big > 0 if small == 0 else True
    # 2 big - 3 small > sqrt(5) small
    d = 2 * big - 3 * small
    return d > 0 and d * d > 5 * small * small


def _deep(t, deep_ref_level):
    if deep_ref_level <= t.depth:
        raise ValueError("deep_ref_level must exceed the table depth")
    d = DigitSequence.from_list(t.digits, bound_N=t.bound_N)
    if len(t.digits) < deep_ref_level:
        raise ValueError("digit list too short for the deep reference")
    return convergents(d, deep_ref_level)


def bounds_suite(t, deep_ref_level=None, digits=None, n_envelope=1000, seed=0):
    """Growth rates, gap sandwiches, ratio bounds and the square-root envelope bound.

    ``digits`` (a DigitSequence) is needed when ``t`` holds fewer than
    ``deep_ref_level`` digits.
    """
    J = t.depth
    deep_ref_level = J + 20 if deep_ref_level is None else deep_ref_level
    if digits is not None:
        deep = convergents(digits, deep_ref_level)
    else:
        deep = _deep(t, deep_ref_level)
    lo_s, hi_s = deep.alpha_lo, deep.alpha_hi
    rep = SuiteReport("bounds", notes={"deep_ref_level": deep_ref_level,
                                      "alpha_star": [lo_s, hi_s]})
    if not t.metric_admissible:
        # every bound below assumes e_j >= 3
        rep.notes["skipped"] = "digits below 3: growth and gap bounds do not apply"
        return rep
    P, a, b = t.pairs, t.corners, t.weights
    m = [p[0] for p in P]
    n = [p[1] for p in P]

    for j in range(1, J + 1):
        ok = _gt_phi2(m[j + 1], m[j]) and _gt_phi2(n[j + 1], n[j])
        rep.add("growth_phi2", {"j": j}, [m[j + 1], n[j + 1]], [m[j], n[j]], ok,
                m[j + 1] / m[j] - (3 + 5 ** 0.5) / 2)

    printed_violations = []
    for j in range(1, J + 1):
        gap = a[j - 1] - a[j]
        lo, hi = Fraction(1, 2 * m[j] ** 2), Fraction(2, m[j] ** 2)
        # at j = 1 the lower end is attained when e_1 = 3
        ok = (gap >= lo if j == 1 else gap > lo) and gap < hi
        rep.add("corner_gap_sandwich", {"j": j}, gap, [lo, hi], ok,
                min(_rel_margin(lo, gap), _rel_margin(gap, hi)))
        bg = b[j - 1] - b[j]
        lo, hi = Fraction(1, 2 * m[j]), Fraction(2, m[j])
        ok = (bg >= lo if j == 1 else bg > lo) and bg < hi
        rep.add("weight_gap_sandwich", {"j": j}, bg, [lo, hi], ok,
                min(_rel_margin(lo, bg), _rel_margin(bg, hi)))
        if not (Fraction(1, 2 * m[j + 1]) < bg < Fraction(2, m[j + 1])):
            printed_violations.append(j)
    rep.notes["weight_gap_with_m_next_violations"] = printed_violations

    r_lo2, r_hi2 = Fraction(1, 12), Fraction(32)
    for k in range(J + 1):
        mk = m[k + 1]
        # a_k - alpha lies in [a_k - hi*, a_k - lo*]
        dmin, dmax = a[k] - hi_s, a[k] - lo_s
        lo, hi = Fraction(1, 2 * mk * mk), Fraction(3, mk * mk)
        ok = dmin > lo and dmax < hi
        rep.add("alpha_gap_sandwich", {"n": k}, [dmin, dmax], [lo, hi], ok,
                min(_rel_margin(lo, dmin), _rel_margin(dmax, hi)))
        lo, hi = Fraction(1, 2 * mk), Fraction(4, mk)
        ok = lo < b[k] < hi
        rep.add("weight_sandwich", {"n": k}, b[k], [lo, hi], ok,
                min(_rel_margin(lo, b[k]), _rel_margin(b[k], hi)))
        # 1/(2 sqrt 3) < b_k / sqrt(a_k - alpha) < 4 sqrt 2, squared
        b2 = b[k] * b[k]
        ok = b2 > r_lo2 * dmax and b2 < r_hi2 * dmin
        ratio = float(b[k]) / math.sqrt(float(a[k] - (lo_s + hi_s) / 2))
        rep.add("weight_ratio", {"n": k}, ratio, [1 / (2 * math.sqrt(3)), 4 * math.sqrt(2)], ok,
                min(_rel_margin(r_lo2 * dmax, b2), _rel_margin(b2, r_hi2 * dmin)))

    # square-root envelope bound on sampled x > alpha_hi
    rng = random.Random(seed)
    hi_J = t.alpha_hi
    worst = math.inf
    bad = []
    for i in range(n_envelope):
        # log-uniform distance above alpha_hi up to 2
        dist = Fraction(10.0 ** rng.uniform(-12, math.log10(2)))
        x = hi_J + dist
        eta = _envelope_exact(deep, x)
        bound2 = 32 * (x - hi_s)
        marg = _rel_margin(eta * eta, bound2)
        worst = min(worst, marg)
        if not eta * eta <= bound2:
            bad.append(float(x))
    rep.add("envelope_sqrt_bound", {"samples": n_envelope, "seed": seed}, len(bad), 0,
            not bad, worst)

    if set(t.digits) == {3}:
        _golden_checks(rep, t, lo_s, hi_s)
    return rep


def _envelope_exact(t, x):
    from .cf_core import envelope_eval
    return envelope_eval(t, x)


def _golden_checks(rep, t, lo_s, hi_s):
    """All-3 digits: closed forms, (a_j - alpha)/b_j^2 -> 1/sqrt 5, sqrt(sqrt5 (x-alpha)) bound."""
    import decimal
    ctx = decimal.Context(prec=60)
    s5 = ctx.sqrt(decimal.Decimal(5))
    phi = (1 + s5) / 2
    for j in range(1, min(t.depth, 30) + 1):
        closed = (ctx.power(phi, 2 * j) - ctx.power(phi, -2 * j)) / s5
        mj = t.pairs[j][0]
        rel = abs(float((decimal.Decimal(mj) - closed) / closed))
        rep.add("golden_closed_form", {"j": j}, mj, float(closed), rel < 1e-12, 1e-12 - rel)
    target = 1 / math.sqrt(5)
    prev = math.inf
    for j in range(1, t.depth + 1):
        b2 = t.weights[j] ** 2
        lo = float((t.corners[j] - hi_s) / b2)
        hi = float((t.corners[j] - lo_s) / b2)
        dev = max(abs(lo - target), abs(hi - target))
        trend = dev <= prev * (1 + 1e-9) or dev < 1e-14
        prev = dev
        ok = trend and (dev < 1e-6 if j >= 15 else True)
        rep.add("golden_corner_ratio", {"j": j}, (lo + hi) / 2, target, ok,
                (1e-6 - dev) if j >= 15 else 1.0)
    # b_j^2 <= sqrt5 (a_j - alpha) with alpha = (3 - sqrt5)/2 exactly; then it
    # holds between corners too since eta is linear there and sqrt is concave.
    # Rearranged: b^2 - 5/2 <= sqrt5 (a - 3/2), both sides negative, so square.
    bad = []
    for j in range(t.depth + 1):
        L = t.weights[j] ** 2 - Fraction(5, 2)
        R = t.corners[j] - Fraction(3, 2)
        if not (L < 0 and R < 0 and L * L >= 5 * R * R):
            bad.append(j)
    rep.add("golden_sqrt_envelope", {"corners": t.depth + 1}, len(bad), 0, not bad)


def d_lower_bound_suite(d, n_pairs=500, seed=0, J=80):
    """D(ah + x, ah + x eta) >= x (1 - eta) for random x in (0, 1 - ah), eta < (4N)^-2."""
    t = convergents(d, J)
    b = boundary_data(d, J)
    N = d.bound_N if d.bound_N is not None else max(t.digits)
    ah = b.alpha_hat
    rng = random.Random(seed)
    rep = SuiteReport("d_lower_bound", notes={"N": N, "depth": J})
    cap = Fraction(1, 16 * N * N)
    for i in range(n_pairs):
        x = Fraction(rng.random()) * (1 - ah)
        eta = Fraction(rng.random()) * cap
        if x == 0 or eta == 0:
            continue
        val = b.D(ah + x, ah + x * eta)
        want = x * (1 - eta)
        rep.add("d_lower", {"x": float(x), "eta": float(eta)}, val, want, val >= want,
                _rel_margin(want, val) if val else -1.0)
    return rep


# ---------------------------------------------------------------------------
# asymptotics near the boundary

def loglog_fit(s, v, correction=None, abs_err=None):
    """Least-squares exponent p in v = A s^p (1 + c s^k) with a 95% interval.

    ``correction`` = k (or a tuple of powers) adds relative correction terms;
    None fits a pure power law.  ``abs_err`` is a per-point error budget for v: it becomes a
    known standard error log-space, and the interval uses whichever of the
    scatter-based and budget-based covariances is larger.
    Returns (p, (lo, hi), r2).
    """
    s = np.asarray(s, float)
    v = np.abs(np.asarray(v, float))
    X = np.log(s)
    Y = np.log(v)
    cols = [X, np.ones_like(X)]
    if correction is not None:
        for k in np.atleast_1d(correction):
            cols.append((s / s.max()) ** k)
    A = np.column_stack(cols)
    sig = np.ones_like(Y) if abs_err is None else np.maximum(np.asarray(abs_err, float) / v, 1e-300)
    Wt = 1.0 / sig
    coef, *_ = np.linalg.lstsq(A * Wt[:, None], Y * Wt, rcond=None)
    resid = Y - A @ coef
    dof = len(Y) - A.shape[1]
    if dof < 1:
        raise ValueError("too few scales for the fit")
    chi2 = float(((resid * Wt) ** 2).sum()) / dof
    cov_w = np.linalg.inv((A * Wt[:, None]).T @ (A * Wt[:, None]))
    var = cov_w[0, 0] * (chi2 if abs_err is None else max(chi2, 1.0))
    q = stats.t.ppf(0.975, dof)
    se = math.sqrt(max(var, 0.0))
    r2 = 1.0 - (resid @ resid) / max(((Y - Y.mean()) ** 2).sum(), 1e-300)
    p = float(coef[0])
    return p, (p - q * se, p + q * se), float(r2)


def _corner_profile(t, j):
    """Slopes to the right/left of corner a_j and the value b_j there."""
    c = t.corners[j]
    mR, mL = t.pairs[j][0], t.pairs[j + 1][0]
    return float(c), mR, mL, float(t.weights[j])


FLAT_REF_SCALE = 0.1


def corner_scale(t, j):
    """Local length scale at corner a_j: distance to the nearer neighbour, capped by b_j."""
    gaps = [t.corners[j] - t.corners[j + 1]]
    if j >= 1:
        gaps.append(t.corners[j - 1] - t.corners[j])
    return float(min(min(gaps), t.weights[j]))


def corner_flat_deviation(b, j, r, n_angles=7):
    """Max relative deviation of g from the flat model at radius r around corner j.

    Chart: x - a_j + i y = (r2 + i r1)^2; torus basis given by the two edge
    labels meeting at the corner; overall scale 2 / b_j^2.
    """
    t = b.table
    c = float(t.corners[j])
    B = np.column_stack([np.array(t.pairs[j], float), np.array(t.pairs[j + 1], float)])
    scale = 2.0 / float(t.weights[j]) ** 2
    th = np.linspace(0.1, np.pi / 2 - 0.1, n_angles)
    r1, r2 = r * np.sin(th), r * np.cos(th)
    g, f, w = metric_arrays(b, c + r2 * r2 - r1 * r1, 2 * r1 * r2)
    worst = 0.0
    for k in range(n_angles):
        Jac = np.array([[-2 * r1[k], 2 * r2[k]], [2 * r2[k], 2 * r1[k]]])
        G = np.zeros((4, 4))
        G[:2, :2] = Jac.T @ g[k, :2, :2] @ Jac
        G[2:, 2:] = B.T @ g[k, 2:, 2:] @ B
        model = np.diag([1.0, 1.0, r1[k] ** 2, r2[k] ** 2])
        s = np.sqrt(np.diag(model))
        worst = max(worst, float(np.max(np.abs(G / scale - model) / np.outer(s, s))))
    return worst


def asymptotics_suite(b, edges=(1, 2, 3), corners=(0, 1, 2), n_scales=8):
    """Edge expansions, corner profiles, the corner constant and the flat corner model."""
    t = b.table
    rep = SuiteReport("asymptotics")
    kappas = {}

    def edge_case(j):
        a, ap = float(t.corners[j]), float(t.corners[j - 1])
        x = 0.5 * (a + ap)
        m, n = t.pairs[j]
        ys = 0.5 * (ap - a) * 1e-2 * 2.0 ** -np.arange(n_scales)
        r = sweep(b, np.full(n_scales, x), ys)
        dev = np.abs(r["f"] - (m * x - n))
        return x, ys, dev, r["w_alg"], r["trunc_bound"]

    def corner_case(j):
        c, mR, mL, bj = _corner_profile(t, j)
        rhos = 1e-2 * corner_scale(t, j) * 2.0 ** -np.arange(n_scales)
        out = []
        for th in (np.pi / 6, np.pi / 2, 5 * np.pi / 6):
            X, Y = c + rhos * np.cos(th), rhos * np.sin(th)
            r = sweep(b, X, Y)
            rho = np.hypot(X - c, Y)
            lin = bj + 0.5 * (mR + mL) * (X - c) + 0.5 * (mR - mL) * rho
            # the float corner is off by up to eps|c|, which the slopes amplify
            budget = r["trunc_bound"] + EPS * (abs(c) * (abs(mR) + abs(mL)) + bj)
            out.append((th, np.abs(r["f"] - lin), r["w_alg"] * rho, budget))
        return c, rhos, out

    tasks = [lambda j=j: edge_case(j) for j in edges] + [lambda j=j: corner_case(j) for j in corners]
    results = run_parallel(tasks)

    for j, (x, ys, dev, w, tb) in zip(edges, results[: len(edges)]):
        # f - (m x - n) is even in y, so the first correction is relative y^2
        p, ci, r2 = loglog_fit(ys, dev, correction=2, abs_err=tb)
        ok = p >= 1.9 and ci[0] <= 2.0 <= ci[1]
        rep.add("edge_exponent", {"j": j, "x": x, "y": [ys[0], ys[-1]]}, p, {"min": 1.9, "ci95": ci},
                ok, p - 1.9)
        # w settles to a positive limit w0(x)
        spread = abs(w[-1] - w[-2]) / abs(w[-1])
        ok = w.min() > 0 and spread < 1e-3
        rep.add("edge_w_limit", {"j": j, "x": x}, float(w[-1]), 0.0, ok, float(w.min()))

    for j, (c, rhos, out) in zip(corners, results[len(edges):]):
        kap = []
        for th, rem, wr, tb in out:
            # off the symmetry axis the first correction is relative rho, on it rho^2
            p, ci, r2 = loglog_fit(rhos, rem, correction=(1, 2, 3), abs_err=tb)
            ok = p >= 1.9 and ci[0] <= 2.0 <= ci[1]
            rep.add("corner_remainder_exponent", {"j": j, "angle": th}, p,
                    {"min": 1.9, "ci95": ci}, ok, p - 1.9)
            # w rho = kappa + O(rho): intercept of a linear fit
            slope, icpt = np.polyfit(rhos, wr, 1)
            kap.append(icpt)
        k = float(np.mean(kap))
        spread = float(np.max(np.abs(np.array(kap) - k)))
        kappas[j] = k
        rep.add("corner_kappa", {"j": j, "corner": c}, k, 0.0, k > 0 and spread < 1e-3 * k, k)

    for j in corners:
        # crowded corners get a proportionally smaller radius
        r = 1e-2 * min(1.0, corner_scale(t, j) / FLAT_REF_SCALE)
        devs = [corner_flat_deviation(b, j, r * s) for s in (4.0, 2.0, 1.0)]
        ok = devs[-1] < 1e-2 and devs[0] > devs[1] > devs[2]
        rep.add("corner_flat_model", {"j": j, "r": r}, devs[-1], 1e-2, ok, 1e-2 - devs[-1])

    kv = np.array(list(kappas.values()))
    reading = "1/2" if np.all(np.abs(kv - 0.5) < np.abs(kv - 1.0)) else "1"
    rep.notes["kappa"] = {str(j): k for j, k in kappas.items()}
    rep.notes["kappa_reading"] = reading
    return rep


# ---------------------------------------------------------------------------
# completeness

def completeness_grid(b, eps=0.1, n=30, decades=7):
    g = np.logspace(math.log10(eps) - decades, math.log10(eps), n)
    XI, Y = np.meshgrid(g, g, indexing="ij")
    xi, y = XI.ravel(), Y.ravel()
    if float(b.alpha_hat) + xi.min() <= float(b.alpha_hi):
        from .cf_core import InsufficientDepth
        raise InsufficientDepth("completeness grid touches the alpha enclosure", b.J + 10)
    r = sweep(b, float(b.alpha_hat) + xi, y)
    s = xi + y
    return {
        "s": s,
        "f_ratio": r["f"] / np.sqrt(s),
        "w_scaled": r["w_alg"] * s,
        "h_scaled": r["w_alg"] / r["f"] ** 2 * s * s,
        "f": r["f"],
        "w": r["w_alg"],
        "trunc_bound": r["trunc_bound"],
    }


def _shell_trend(s, v, which, n_bins=12):
    """Slope of log(extreme of v per log-shell of s) against log s."""
    edges = np.logspace(np.log10(s.min()), np.log10(s.max()), n_bins + 1)
    idx = np.clip(np.digitize(s, edges) - 1, 0, n_bins - 1)
    xs, ys = [], []
    for k in range(n_bins):
        sel = idx == k
        if sel.any():
            xs.append(np.sqrt(edges[k] * edges[k + 1]))
            ys.append(v[sel].max() if which == "max" else v[sel].min())
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


TREND_TOL = 0.1


def completeness_suite(b, eps=0.1, n=30):
    """Grid extrema and flat trends of f/sqrt(s), w s and (w/f^2) s^2, s = x + y - alpha."""
    G = completeness_grid(b, eps, n)
    s = G["s"]
    rep = SuiteReport("completeness", notes={"eps": eps, "n": n})
    ok = bool(np.all(G["f"] > 0) and np.all(G["w"] > 0))
    rep.add("positivity", {"points": s.size}, [float(G["f"].min()), float(G["w"].min())], 0.0, ok,
            float(min(G["f"].min(), G["w"].min())))
    rel = float(np.max(G["trunc_bound"] / G["f"]))
    rep.add("truncation_budget", {}, rel, 1e-3, rel < 1e-3, 1e-3 - rel)

    fr = G["f_ratio"]
    sl = _shell_trend(s, fr, "max")
    ok = bool(np.all(np.isfinite(fr))) and sl > -TREND_TOL
    rep.add("f_sqrt_upper", {"trend_slope": sl}, float(fr.max()), "finite", ok, sl + TREND_TOL)
    for name in ("w_scaled", "h_scaled"):
        v = G[name]
        sl = _shell_trend(s, v, "min")
        ok = bool(v.min() > 0) and sl < TREND_TOL
        rep.add(name + "_lower", {"trend_slope": sl}, float(v.min()), 0.0, ok,
                min(float(v.min()), TREND_TOL - sl))
    return rep


# ---------------------------------------------------------------------------
# path probes

@dataclass
class ProbeReport:
    kind: str
    target: tuple
    direction: tuple
    cutoffs: list
    lengths: list
    slope: float
    r2: float
    diverges: bool
    converged: bool
    evaluations: int

    def to_json(self):
        return _num(asdict(self))


def _density(b, X, Y):
    r = sweep(b, X, Y)
    return np.sqrt(np.abs(r["w_alg"])) / np.abs(r["f"])


def _simpson_log(b, P, u, t0, t1, rtol=1e-6, n0=8, max_n=1 << 16):
    """h-length of P + e^t u for t in [t0, t1] by composite Simpson with doubling."""
    prev, n, evals = None, n0, 0
    while True:
        t = np.linspace(t0, t1, n + 1)
        e = np.exp(t)
        dens = _density(b, P[0] + e * u[0], P[1] + e * u[1]) * e
        evals += n + 1
        wts = np.ones(n + 1)
        wts[1:-1:2], wts[2:-1:2] = 4, 2
        val = (t1 - t0) / (3 * n) * wts @ dens
        if prev is not None and abs(val - prev) <= rtol * abs(val):
            return val, evals
        if n >= max_n:
            raise ArithmeticError(f"Simpson step underflow on [{t0}, {t1}]")
        prev, n = val, 2 * n


def path_probe(b, curve_spec):
    """Length in the base metric along a straight segment ending at ``target``.

    curve_spec keys: target (x, y), direction (dx, dy) pointing away from the
    target, d_max, d_min, n_cut, kind.  Lengths are measured from distance
    d_max down to each cutoff d.
    """
    P = np.array(curve_spec["target"], float)
    u = np.array(curve_spec["direction"], float)
    u /= np.linalg.norm(u)
    d_max = float(curve_spec.get("d_max", 1e-1))
    d_min = float(curve_spec.get("d_min", 1e-7))
    cut = np.logspace(math.log10(d_max), math.log10(d_min), int(curve_spec.get("n_cut", 13)))
    if P[1] + d_min * u[1] <= 0:
        raise ValueError("probe leaves the upper half-plane")
    pieces = run_parallel([
        (lambda lo=lo, hi=hi: _simpson_log(b, P, u, math.log(lo), math.log(hi)))
        for hi, lo in zip(cut[:-1], cut[1:])
    ])
    inc = np.array([p[0] for p in pieces])
    L = np.concatenate([[0.0], np.cumsum(inc)])
    evals = sum(p[1] for p in pieces)
    half = len(cut) // 2
    res = stats.linregress(-np.log(cut[half:]), L[half:])
    slope, r2 = float(res.slope), float(res.rvalue ** 2)
    diverges = slope > 0 and r2 > 0.99
    # converged: successive increments shrink geometrically and the tail is negligible
    tail = inc[-1] / max(L[-1], 1e-300)
    converged = bool(np.all(np.diff(inc[half:]) < 0) and tail < 1e-3)
    return ProbeReport(curve_spec.get("kind", "custom"), tuple(P), tuple(u), cut.tolist(), L.tolist(),
                       slope, r2, bool(diverges), converged, evals)


def standard_probes(b, edge_x=0.7):
    ah = float(b.alpha_hat)
    return [
        {"kind": "into_Z", "target": (ah, 1.0), "direction": (1.0, 0.0)},
        {"kind": "into_alpha_corner", "target": (ah, 0.0), "direction": (1.0, 2.0)},
        {"kind": "into_edge", "target": (edge_x, 0.0), "direction": (0.0, 1.0)},
    ]


def probes_suite(b, edge_x=0.7):
    rep = SuiteReport("path_probes")
    for spec in standard_probes(b, edge_x):
        pr = path_probe(b, spec)
        if spec["kind"] == "into_edge":
            rep.add("probe_converges", {"kind": spec["kind"], "target": spec["target"]},
                    pr.lengths[-1], "finite", pr.converged, 1.0 if pr.converged else -1.0)
        else:
            rep.add("probe_log_divergence", {"kind": spec["kind"], "target": spec["target"]},
                    {"slope": pr.slope, "r2": pr.r2}, {"slope": 0.0, "r2": 0.99}, pr.diverges,
                    min(pr.slope, pr.r2 - 0.99))
        rep.notes[spec["kind"]] = pr.to_json()
    return rep


# ---------------------------------------------------------------------------

def run_all(d, J, seed=0, deep_ref_level=None, with_geometry=True):
    """All suites for one digit sequence; geometry suites need admissible digits."""
    t = convergents(d, J)
    reports = [identities_suite(t), bounds_suite(t, deep_ref_level, digits=d, seed=seed)]
    if t.metric_admissible:
        reports.append(d_lower_bound_suite(d, seed=seed, J=max(J, 80)))
        if with_geometry:
            b = boundary_data(d, max(J, 40))
            reports += [asymptotics_suite(b), completeness_suite(boundary_data(d, max(J, 60))),
                        probes_suite(b)]
    return reports
