"""Exact arithmetic for modified (negative) continued fractions.

Everything in this module works with Python integers and
:class:`fractions.Fraction`; floats only appear when a caller passes one in,
in which case the answer is computed exactly from ``Fraction(x)`` and rounded
once at the end.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

PHI = (1 + math.sqrt(5)) / 2


class InsufficientDepth(ValueError):
    """Raised when a truncation level is too shallow for the request.

    ``required`` is the depth the caller should retry with, when known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required

    def __str__(self):
        msg = super().__str__()
        return msg if self.required is None else f"{msg}; retry with --depth {self.required}"


class DigitSequence:
    """Digits e_1, e_2, ... of a modified continued fraction.

    The sequence is a finite ``prefix`` followed by an optional repeating
    ``period``; ``random`` sequences are generated lazily from a seeded
    generator, so reading digit j twice always gives the same value.
    """

    def __init__(self, prefix=(), period=(), bound_N=None, *, seed=None, low=3):
        self.prefix = tuple(int(e) for e in prefix)
        self.period = tuple(int(e) for e in period)
        self.seed = seed
        self.low = low
        self._cache = []
        if seed is not None:
            if bound_N is None:
                raise ValueError("random digit sequences need an explicit bound_N")
            self._rng = random.Random(seed)
        elif not self.prefix and not self.period:
            raise ValueError("empty digit sequence")
        known = self.prefix + self.period
        if any(e < 2 for e in known):
            raise ValueError(f"digits must satisfy e_j >= 2, got {known}")
        if bound_N is None:
            bound_N = max(known)
        self.bound_N = int(bound_N)

    @classmethod
    def from_list(cls, digits, bound_N=None):
        return cls(prefix=digits, bound_N=bound_N)

    @classmethod
    def periodic(cls, period, prefix=(), bound_N=None):
        if not period:
            raise ValueError("period must be non-empty")
        return cls(prefix=prefix, period=period, bound_N=bound_N)

    @classmethod
    def from_file(cls, path, bound_N=None):
        text = Path(path).read_text()
        digits = [int(tok) for tok in text.split() if tok.strip()]
        return cls(prefix=digits, bound_N=bound_N)

    @classmethod
    def random(cls, bound_N, seed, low=3):
        """Digits drawn uniformly from ``{low, ..., bound_N}``."""
        if not 2 <= low <= bound_N:
            raise ValueError("need 2 <= low <= bound_N")
        return cls(bound_N=bound_N, seed=seed, low=low)

    @property
    def is_finite(self):
        return self.seed is None and not self.period

    def __len__(self):
        if not self.is_finite:
            raise TypeError("infinite digit sequence has no length")
        return len(self.prefix)

    def digit(self, j):
        """Return e_j (1-indexed)."""
        if j < 1:
            raise IndexError("digits are indexed from 1")
        i = j - 1
        if self.seed is not None:
            while len(self._cache) <= i:
                self._cache.append(self._rng.randint(self.low, self.bound_N))
            return self._cache[i]
        if i < len(self.prefix):
            return self.prefix[i]
        if not self.period:
            raise InsufficientDepth(
                f"finite digit sequence has {len(self.prefix)} digits, e_{j} requested",
                required=None,
            )
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def take(self, n):
        """Return the tuple (e_1, ..., e_n)."""
        return tuple(self.digit(j) for j in range(1, n + 1))

    @property
    def metric_admissible(self):
        if self.seed is not None:
            return self.low >= 3
        known = self.prefix + self.period
        return all(3 <= e <= self.bound_N for e in known)

    def spec(self):
        """JSON-serializable description; ``from_spec`` inverts it."""
        if self.seed is not None:
            return {"kind": "random", "bound_N": self.bound_N, "seed": self.seed, "low": self.low}
        return {
            "kind": "periodic" if self.period else "finite",
            "prefix": list(self.prefix),
            "period": list(self.period),
            "bound_N": self.bound_N,
        }

    @classmethod
    def from_spec(cls, spec):
        if spec["kind"] == "random":
            return cls.random(spec["bound_N"], spec["seed"], spec.get("low", 3))
        return cls(spec.get("prefix", ()), spec.get("period", ()), spec.get("bound_N"))

    def __repr__(self):
        return f"DigitSequence({self.spec()})"


def digits_of_rational(p, q):
    """Modified continued fraction digits of ``p/q`` with ``0 < p/q < 1``.

    Uses e = ceil(q/p) and recurses on e - q/p, which stays in [0, 1).

    >>> digits_of_rational(5, 13)
    [3, 3, 2]
    """
    if not (0 < p < q):
        raise ValueError(f"need 0 < p < q, got {p}/{q}")
    if math.gcd(p, q) != 1:
        raise ValueError(f"{p}/{q} is not reduced")
    digits = []
    x = Fraction(p, q)
    while x != 0:
        e = -((-x.denominator) // x.numerator)  # ceil(1/x)
        digits.append(e)
        x = e - 1 / x
    return digits


def cf_value(digits):
    """Exact value of 1/(e_1 - 1/(e_2 - ...)) for a finite digit list."""
    x = Fraction(0)
    for e in reversed(digits):
        x = 1 / (e - x)
    return x


@dataclass(frozen=True)
class ConvergentTable:
    """Convergent pairs, corners and weights to truncation level ``depth``.

    ``pairs[j] = (m_j, n_j)`` for j = 0..depth+1; ``corners[j] = a_j`` and
    ``weights[j] = b_j`` for j = 0..depth.
    """

    digits: tuple
    depth: int
    pairs: tuple
    corners: tuple
    weights: tuple
    bound_N: int
    metric_admissible: bool

    @property
    def alpha_lo(self):
        m, n = self.pairs[self.depth]
        return Fraction(n, m)

    @property
    def alpha_hi(self):
        return self.corners[self.depth]

    @property
    def alpha_hat(self):
        return (self.alpha_lo + self.alpha_hi) / 2

    @property
    def width(self):
        return self.alpha_hi - self.alpha_lo

    def to_json(self):
        return {
            "depth": self.depth,
            "digits": list(self.digits),
            "bound_N": self.bound_N,
            "metric_admissible": self.metric_admissible,
            "pairs": [[str(m), str(n)] for m, n in self.pairs],
            "corners": [_frac_str(a) for a in self.corners],
            "weights": [_frac_str(b) for b in self.weights],
            "alpha_enclosure": [_frac_str(self.alpha_lo), _frac_str(self.alpha_hi)],
        }

    @classmethod
    def from_json(cls, data):
        return cls(
            digits=tuple(data["digits"]),
            depth=int(data["depth"]),
            pairs=tuple((int(m), int(n)) for m, n in data["pairs"]),
            corners=tuple(Fraction(a) for a in data["corners"]),
            weights=tuple(Fraction(b) for b in data["weights"]),
            bound_N=int(data["bound_N"]),
            metric_admissible=bool(data["metric_admissible"]),
        )


def _frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def convergent_pairs(digits):
    """Pairs (m_j, n_j), j = 0..len(digits)+1, from the three-term recurrence."""
    pairs = [(0, -1), (1, 0)]
    for e in digits:
        (m0, n0), (m1, n1) = pairs[-2], pairs[-1]
        pairs.append((e * m1 - m0, e * n1 - n0))
    return pairs


def corners_and_weights(pairs):
    """Corners a_j = (n_{j+1}-n_j)/(m_{j+1}-m_j) and weights b_j = 1/(m_{j+1}-m_j)."""
    corners, weights = [], []
    for (m0, n0), (m1, n1) in zip(pairs, pairs[1:]):
        dm = m1 - m0
        if dm <= 0:
            raise ArithmeticError(f"m_j not strictly increasing at m={m0} -> {m1}")
        corners.append(Fraction(n1 - n0, dm))
        weights.append(Fraction(1, dm))
    return corners, weights


def convergents(d, J):
    """Build the :class:`ConvergentTable` of ``d`` at truncation level ``J``."""
    if J < 1:
        raise ValueError("truncation level J must be >= 1")
    digits = d.take(J)
    pairs = convergent_pairs(digits)
    corners, weights = corners_and_weights(pairs)
    admissible = all(3 <= e <= d.bound_N for e in digits)
    return ConvergentTable(
        digits=digits,
        depth=J,
        pairs=tuple(pairs),
        corners=tuple(corners),
        weights=tuple(weights),
        bound_N=d.bound_N,
        metric_admissible=admissible,
    )


def alpha_enclosure(t, J=None):
    """Exact interval [n_J/m_J, a_J] containing alpha."""
    J = t.depth if J is None else J
    if not 1 <= J <= t.depth:
        raise InsufficientDepth(f"level {J} not available in a table of depth {t.depth}", J)
    m, n = t.pairs[J]
    return Fraction(n, m), t.corners[J]


def _exact(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _like(value, x):
    """Round an exact result the way the input ``x`` was given."""
    if isinstance(x, (Fraction, int)):
        return value
    return float(value)


def _edge_of(t, x):
    """Label index of the closed-on-the-left edge containing x, x >= a_J."""
    if x >= t.corners[0]:
        return 0
    if x < t.corners[t.depth]:
        return None
    # a_j <= x < a_{j-1}
    lo, hi = 1, t.depth
    while lo < hi:
        mid = (lo + hi) // 2
        if x >= t.corners[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


def envelope_eval(t, x):
    """Envelope eta(x): 1 for x >= 1, m_j x - n_j on [a_j, a_{j-1}], 0 below alpha."""
    xe = _exact(x)
    lo, hi = t.alpha_lo, t.alpha_hi
    if xe <= lo:
        return _like(Fraction(0), x)
    j = _edge_of(t, xe)
    if j is None:
        raise InsufficientDepth(
            f"x = {float(xe)!r} lies inside the alpha enclosure at depth {t.depth}",
            required=t.depth + 1,
        )
    if j == 0:
        return _like(Fraction(1), x)
    m, n = t.pairs[j]
    return _like(m * xe - n, x)


class BoundaryData:
    """Odd extension u(x) = eta(x) - eta(2 alpha_hat - x) of the envelope at level J.

    Inside the enclosure (alpha_lo, alpha_hi) the truncated profile bridges
    linearly from -b_J to b_J, which keeps it continuous and odd about
    ``alpha_hat``; exact pointwise queries there raise :class:`InsufficientDepth`.
    """

    def __init__(self, table):
        self.table = table
        self.J = table.depth
        self.alpha_lo = table.alpha_lo
        self.alpha_hi = table.alpha_hi
        self.alpha_hat = table.alpha_hat
        self.width = table.width

    @property
    def truncation_err(self):
        """Sup-norm distance between the truncated and the exact u."""
        # b_J + m_J * width equals 2 b_J; the linear bridge adds another b_J
        return 3 * self.table.weights[self.J]

    @property
    def trunc_sup(self):
        return float(self.truncation_err)

    @cached_property
    def breakpoints(self):
        right = list(self.table.corners)
        left = [2 * self.alpha_hat - a for a in right]
        return sorted(left + right)

    def reflect(self, x):
        return 2 * self.alpha_hat - x

    def _check_depth(self, xe):
        if self.alpha_lo < xe < self.alpha_hi and xe != self.alpha_hat:
            raise InsufficientDepth(
                f"x = {float(xe)!r} is within the alpha enclosure at depth {self.J}",
                required=self.J + 1,
            )

    def u(self, x):
        xe = _exact(x)
        if xe == self.alpha_hat:
            return _like(Fraction(0), x)
        self._check_depth(xe)
        if xe >= self.alpha_hi:
            return _like(_exact(envelope_eval(self.table, xe)), x)
        return _like(-_exact(envelope_eval(self.table, self.reflect(xe))), x)

    def slope_intercept(self, x):
        """(mu, nu) = (u'(x), x u'(x) - u(x)); breakpoints take the right-hand interval."""
        xe = _exact(x)
        t = self.table
        if xe >= self.alpha_hi:
            m, n = t.pairs[_edge_of(t, xe)]
            return _like(Fraction(m), x), _like(Fraction(n), x)
        if xe < self.alpha_lo:
            xr = self.reflect(xe)
            # left edges are closed on the left in x, i.e. on the right in xr
            if xr > t.corners[0]:
                j = 0
            else:
                j = next(i for i in range(1, self.J + 1) if xr > t.corners[i])
            m, n = t.pairs[j]
            return _like(Fraction(m), x), _like(2 * self.alpha_hat * m - n, x)
        raise InsufficientDepth(
            f"slope undefined at depth {self.J} for x = {float(xe)!r}", required=self.J + 1
        )

    def D(self, x1, x2):
        """Kernel pairing (mu(x1) nu(x2) - mu(x2) nu(x1)) (x1 - x2)."""
        mu1, nu1 = self.slope_intercept(_exact(x1))
        mu2, nu2 = self.slope_intercept(_exact(x2))
        val = (mu1 * nu2 - mu2 * nu1) * (_exact(x1) - _exact(x2))
        if isinstance(x1, float) or isinstance(x2, float):
            return float(val)
        return val

    @cached_property
    def profile(self):
        return Profile.from_boundary(self)


def boundary_data(d, J):
    """Convenience: :class:`BoundaryData` of ``d`` at truncation level ``J``."""
    return BoundaryData(convergents(d, J))


def boundary_u(b, x):
    return b.u(x)


def slope_intercept(b, x):
    return b.slope_intercept(x)


def D_eval(b, x1, x2):
    return b.D(x1, x2)


@dataclass(frozen=True)
class Profile:
    """Float view of a piecewise-linear boundary profile for kernel integrals.

    Finite segments carry u(t) = anchor_u + slope (t - t0) on [t0, t0 + length]
    and a constant nu = slope t - u.  ``t0_lo`` holds the rounding residue of
    each anchor (exact anchor = t0 + t0_lo), so that distances t0 - x stay
    accurate relative to their size; without it, neighbouring segments overlap
    or gap by eps |t0|, an error the kernel amplifies by 1/y.  Rays are constant.  ``atoms`` are jumps of
    u (weights of delta terms in u').  ``linear`` = (slope, root) describes an
    affine profile on the whole line, used only by synthetic test data.
    """

    t0: np.ndarray
    length: np.ndarray
    anchor_u: np.ndarray
    slope: np.ndarray
    nu: np.ndarray
    right_rays: tuple = ()   # (start, value)
    left_rays: tuple = ()    # (end, value)
    atoms: tuple = ()        # (position, jump)
    linear: tuple | None = None
    t0_lo: np.ndarray | None = None

    @property
    def sgn_asymptotic(self):
        return self.linear is None

    @classmethod
    def from_boundary(cls, b):
        t = b.table
        J = b.J
        ah = b.alpha_hat
        t0, t0_lo, length, ua, slope, nu = [], [], [], [], [], []

        def add(a, L, u_a, m, n):
            hi = float(a)
            t0.append(hi)
            t0_lo.append(float(a - Fraction(hi)))
            length.append(float(L))
            ua.append(float(u_a))
            slope.append(float(m))
            nu.append(float(n))

        for j in range(1, J + 1):
            m, n = t.pairs[j]
            a_j, a_prev = t.corners[j], t.corners[j - 1]
            add(a_j, a_prev - a_j, t.weights[j], m, n)
            add(2 * ah - a_prev, a_prev - a_j, -t.weights[j - 1], m, 2 * ah * m - n)
        m_J = t.pairs[J][0]
        lo = b.alpha_lo
        bJ = t.weights[J]
        add(lo, b.width, -bJ, 2 * m_J, 2 * m_J * lo + bJ)
        return cls(
            t0=np.array(t0),
            t0_lo=np.array(t0_lo),
            length=np.array(length),
            anchor_u=np.array(ua),
            slope=np.array(slope),
            nu=np.array(nu),
            right_rays=((1.0, 1.0),),
            left_rays=((float(2 * ah - 1), -1.0),),
        )

    def u_at(self, t):
        """Evaluate the profile at float points (used by quadrature oracles)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        if self.linear is not None:
            s, root = self.linear
            return s * (t - root)
        for start, val in self.right_rays:
            out = np.where(t >= start, val, out)
        for end, val in self.left_rays:
            out = np.where(t <= end, val, out)
        for a, L, u_a, m in zip(self.t0, self.length, self.anchor_u, self.slope):
            inside = (t >= a) & (t <= a + L)
            out = np.where(inside, u_a + m * (t - a), out)
        return out

    def breakpoints(self):
        pts = set(self.t0.tolist()) | set((self.t0 + self.length).tolist())
        pts |= {s for s, _ in self.right_rays} | {e for e, _ in self.left_rays}
        pts |= {c for c, _ in self.atoms}
        return sorted(pts)
