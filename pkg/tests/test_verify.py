import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfeinstein import DigitSequence, boundary_data, convergents
from cfeinstein.field import SyntheticBoundary
from cfeinstein.verify import (
    SuiteReport,
    asymptotics_suite,
    bounds_suite,
    completeness_suite,
    corner_flat_deviation,
    d_lower_bound_suite,
    identities_suite,
    loglog_fit,
    path_probe,
    probes_suite,
    run_all,
)


def test_identities_and_bounds_all3(t3, all3):
    assert identities_suite(convergents(all3, 40)).passed
    rep = bounds_suite(convergents(all3, 40), digits=all3)
    assert rep.passed, rep.failures()[:3]
    names = {c.name for c in rep.cases}
    assert {"golden_closed_form", "golden_corner_ratio", "golden_sqrt_envelope", "weight_ratio"} <= names


def test_printed_weight_gap_form_is_recorded(all3):
    rep = bounds_suite(convergents(all3, 20), digits=all3)
    assert rep.notes["weight_gap_with_m_next_violations"]


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 9), st.integers(0, 10**6), st.integers(2, 40))
def test_bounds_random_sequences(N, seed, J):
    d = DigitSequence.random(N, seed=seed)
    t = convergents(d, J)
    assert identities_suite(t).passed
    rep = bounds_suite(t, digits=d, n_envelope=100, seed=seed)
    assert rep.passed, [c.to_json() for c in rep.failures()[:3]]


def test_tampered_table_fails(all3):
    t = convergents(all3, 10)
    pairs = list(t.pairs)
    pairs[5] = (pairs[5][0] + 1, pairs[5][1])
    bad = dataclasses.replace(t, pairs=tuple(pairs))
    rep = identities_suite(bad)
    assert not rep.passed
    assert any(c.name == "det_adjacent" for c in rep.failures())


def test_d_lower_bound(mixed):
    rep = d_lower_bound_suite(mixed, n_pairs=200, seed=1)
    assert rep.passed and len(rep.cases) == 200


def test_report_json_roundtrip(mixed):
    rep = bounds_suite(convergents(mixed, 15), digits=mixed)
    data = json.loads(rep.dumps())
    back = SuiteReport.from_json(data)
    assert back.name == rep.name and back.passed == rep.passed
    assert [c.name for c in back.cases] == [c.name for c in rep.cases]
    assert rep.dumps() == bounds_suite(convergents(mixed, 15), digits=mixed).dumps()


def test_loglog_fit_recovers_power():
    s = np.logspace(-6, -2, 9)
    v = 3.0 * s**1.5 * np.exp(0.2 * (s / s.max()) ** 2)
    p, (lo, hi), r2 = loglog_fit(s, v, correction=(2,))
    assert lo <= 1.5 <= hi and abs(p - 1.5) < 1e-6 and r2 > 0.999


def test_asymptotics(b3, bmix):
    for b in (b3, bmix):
        rep = asymptotics_suite(b)
        assert rep.passed, [c.to_json() for c in rep.failures()]
        assert rep.notes["kappa_reading"] == "1/2"
        for k in rep.notes["kappa"].values():
            assert k == pytest.approx(0.5, abs=1e-4)


def test_flat_model_all3(b3):
    for j in (0, 1):
        assert corner_flat_deviation(b3, j, 1e-2) < 1e-2


def test_completeness(all3):
    rep = completeness_suite(boundary_data(all3, 60))
    assert rep.passed, [c.to_json() for c in rep.failures()]


def test_probes(b3):
    rep = probes_suite(b3)
    assert rep.passed
    z = rep.notes["into_Z"]
    assert z["slope"] == pytest.approx(1.0, abs=0.05) and z["r2"] > 0.999
    assert rep.notes["into_edge"]["converged"]


def test_probe_synthetic_sign_diverges():
    # for sign data h = (dx^2 + dy^2) / ((x - a)^2): log divergence with unit slope into x = a
    b = SyntheticBoundary("sign", alpha_hat=0.2, test_only=True)
    pr = path_probe(b, {"target": (0.2, 1.0), "direction": (1.0, 0.0)})
    assert pr.diverges and pr.slope == pytest.approx(1.0, abs=1e-3)


def test_probe_rejects_leaving_half_plane(b3):
    with pytest.raises(ValueError):
        path_probe(b3, {"target": (0.7, 0.0), "direction": (0.0, -1.0)})


def test_run_all_inadmissible_skips_geometry():
    reports = run_all(DigitSequence.periodic([2, 3]), 20)
    assert [r.name for r in reports] == ["identities", "bounds"]
    assert reports[0].passed and reports[0].cases
    assert "skipped" in reports[1].notes and not reports[1].cases


def test_run_all_deterministic(mixed):
    a = [r.dumps() for r in run_all(mixed, 30, seed=4)]
    b = [r.dumps() for r in run_all(mixed, 30, seed=4)]
    assert a == b and len(a) == 6
