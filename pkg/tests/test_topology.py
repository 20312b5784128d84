import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfeinstein import DigitSequence, convergents
from cfeinstein.topology import PolygonDescriptor, intersection_matrix, leading_minors, polygon_descriptor


def test_all3_edges(all3):
    desc = polygon_descriptor(convergents(all3, 3), 3)
    F = Fraction
    assert desc.edges[1:] == (
        (F(1, 2), F(1), (1, 0)),
        (F(2, 5), F(1, 2), (3, 1)),
        (F(5, 13), F(2, 5), (8, 3)),
    )
    assert desc.edges[0] == (1, None, (0, -1))
    assert desc.alpha_enclosure == (F(3, 8), F(5, 13))


def test_intersection_matrices(all3):
    Q = intersection_matrix(convergents(all3, 3), 3)
    assert Q.tolist() == [[3, -1, 0], [-1, 3, -1], [0, -1, 3]]
    Q2 = intersection_matrix(convergents(DigitSequence.periodic([3, 5]), 2), 2)
    assert Q2.tolist() == [[3, -1], [-1, 5]]
    assert intersection_matrix(convergents(all3, 3), 3, sign=-1).tolist() == [[-3, 1, 0], [1, -3, 1], [0, 1, -3]]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(3, 9), min_size=2, max_size=40))
def test_smoothness_and_minors(digits):
    t = convergents(DigitSequence.from_list(digits), len(digits))
    desc = polygon_descriptor(t)
    assert all(abs(d) == 1 for d in desc.smoothness_determinants())
    minors = leading_minors(intersection_matrix(t))
    assert all(v > 0 for v in minors)
    # the k-th leading minor of the chain is the continuant m_{k+1}
    assert minors == [t.pairs[k + 1][0] for k in range(1, len(digits) + 1)]


def test_minors_match_float_determinant(mixed):
    t = convergents(mixed, 8)
    Q = intersection_matrix(t)
    Qf = Q.astype(float)
    for k, v in enumerate(leading_minors(Q), start=1):
        assert np.linalg.det(Qf[:k, :k]) == pytest.approx(v, rel=1e-10)


def test_json_roundtrip(mixed):
    desc = polygon_descriptor(convergents(mixed, 12))
    for sign in (1, -1):
        data = json.loads(json.dumps(desc.to_json(sign=sign)))
        assert data["intersection"]["offdiag"] == -sign
        assert PolygonDescriptor.from_json(data) == desc


def test_single_corner(all3):
    desc = polygon_descriptor(convergents(all3, 1), 1)
    assert len(desc.edges) == 2 and desc.corners == (1, Fraction(1, 2))
    with pytest.raises(ValueError):
        intersection_matrix(convergents(all3, 1), 1)


def test_digits_change_diagonal():
    a = intersection_matrix(convergents(DigitSequence.periodic([3, 4]), 6))
    b = intersection_matrix(convergents(DigitSequence.periodic([3, 5]), 6))
    assert np.diag(a).tolist() == [3, 4] * 3
    assert np.diag(a).tolist() != np.diag(b).tolist()
    assert (a - np.diag(np.diag(a))).tolist() == (b - np.diag(np.diag(b))).tolist()


def test_depth_checks(all3):
    t = convergents(all3, 4)
    with pytest.raises(ValueError):
        polygon_descriptor(t, 5)
    with pytest.raises(ValueError):
        polygon_descriptor(t, 0)
