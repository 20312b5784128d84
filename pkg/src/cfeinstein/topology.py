"""Combinatorial data of the toric 4-manifold: labelled edges and sphere chain."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .cf_core import _frac_str


@dataclass(frozen=True)
class PolygonDescriptor:
    """Edges [a_j, a_{j-1}] labelled by isotropy weights (m_j, n_j), j = 0..J.

    Edge 0 is the unbounded edge [1, oo) with label (0, -1); ``hi`` is None
    there.
    """

    edges: tuple  # ((lo, hi | None, (m, n)), ...)
    corners: tuple
    truncation: int
    alpha_enclosure: tuple
    digits: tuple

    def smoothness_determinants(self):
        labels = [lab for _, _, lab in self.edges]
        return [m0 * n1 - m1 * n0 for (m0, n0), (m1, n1) in zip(labels, labels[1:])]

    def to_json(self, sign=1):
        return {
            "alpha_enclosure": [_frac_str(q) for q in self.alpha_enclosure],
            "edges": [
                {"lo": _frac_str(lo), "hi": None if hi is None else _frac_str(hi), "label": [m, n]}
                for lo, hi, (m, n) in self.edges
            ],
            "intersection": {"diag": [sign * e for e in self.digits], "offdiag": -sign},
        }

    @classmethod
    def from_json(cls, data):
        edges = tuple(
            (Fraction(e["lo"]), None if e["hi"] is None else Fraction(e["hi"]), tuple(e["label"]))
            for e in data["edges"]
        )
        diag = data["intersection"]["diag"]
        sign = -data["intersection"]["offdiag"]
        return cls(
            edges=edges,
            corners=tuple(lo for lo, _, _ in edges),
            truncation=len(edges) - 1,
            alpha_enclosure=tuple(Fraction(q) for q in data["alpha_enclosure"]),
            digits=tuple(sign * e for e in diag),
        )


def polygon_descriptor(t, J=None):
    J = t.depth if J is None else J
    if not 1 <= J <= t.depth:
        raise ValueError(f"need 1 <= J <= {t.depth}")
    edges = [(t.corners[0], None, t.pairs[0])]
    for j in range(1, J + 1):
        m, n = t.pairs[j]
        if gcd(m, n) != 1:
            raise ArithmeticError(f"label ({m}, {n}) is not primitive")
        edges.append((t.corners[j], t.corners[j - 1], (m, n)))
    lo = Fraction(t.pairs[J][1], t.pairs[J][0])
    return PolygonDescriptor(
        edges=tuple(edges),
        corners=tuple(t.corners[: J + 1]),
        truncation=J,
        alpha_enclosure=(lo, t.corners[J]),
        digits=tuple(t.digits[:J]),
    )


def intersection_matrix(t, J=None, sign=1):
    """J x J chain matrix: diagonal e_j, off-diagonal -1 (times ``sign``).

    ``sign=-1`` gives the opposite orientation convention of the spheres.
    """
    J = t.depth if J is None else J
    if not 2 <= J <= len(t.digits):
        raise ValueError(f"need 2 <= J <= {len(t.digits)}")
    Q = np.zeros((J, J), dtype=object)
    for i in range(J):
        Q[i, i] = sign * t.digits[i]
        if i + 1 < J:
            Q[i, i + 1] = Q[i + 1, i] = -sign
    return Q


def leading_minors(Q):
    """Exact leading principal minors of a tridiagonal matrix (continuant recursion)."""
    minors = []
    prev2, prev = 1, 1  # minors of orders k-2 and k-1, with order 0 equal to 1
    for k in range(Q.shape[0]):
        cur = Q[k, k] * prev - (Q[k, k - 1] * Q[k - 1, k] * prev2 if k else 0)
        prev2, prev = prev, cur
        minors.append(cur)
    return minors
