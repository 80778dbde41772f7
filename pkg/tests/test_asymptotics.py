import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from stieltjes_lab import asymptotics as AS
from stieltjes_lab import measures as M
from stieltjes_lab.lame import HSPair
from stieltjes_lab.poly import ComplexPoly
from stieltjes_lab.qdiff import QuadDiff

POLES = [-1.0, 0.2, 1.0]


@pytest.fixture(scope="module")
def arcsine():
    return M.build_measure(QuadDiff.from_roots([-1.0, 1.0]))


def test_probe_grid_two_circles(arcsine):
    pr = AS.probe_grid(arcsine, count=10, seed=3)
    assert pr.size == 10
    r = np.sort(np.abs(pr))
    assert np.allclose(r[:5], 1.5) and np.allclose(r[5:], 3.0)
    assert np.array_equal(pr, AS.probe_grid(arcsine, count=10, seed=3))


def test_inverse_cdf_sample_is_close(arcsine):
    pr = AS.probe_grid(arcsine)
    # single random draws fluctuate like n^(-1/2), so bound the median over seeds
    d = [AS.counting_discrepancy(oracles.arcsine_sample(200, np.random.default_rng(s)), arcsine, pr)
         for s in range(12)]
    assert np.median(d) < 0.05
    # midpoint-rule quantiles reproduce the transform far better
    assert AS.counting_discrepancy(oracles.arcsine_sample(200), arcsine, pr) < 1e-8


def test_uniform_sample_is_not(arcsine):
    pr = AS.probe_grid(arcsine)
    x = np.linspace(-1, 1, 201)
    assert AS.counting_discrepancy(x, arcsine, pr) > 0.02


def test_probe_precondition(arcsine):
    with pytest.raises(AS.ProbeTooClose):
        AS.counting_discrepancy([0.5], arcsine, [0.3 + 0.01j])
    with pytest.raises(AS.ProbeTooClose):
        AS.counting_discrepancy([2.0 + 0.01j], arcsine, [2.0])


@pytest.mark.parametrize("z", [2.0, 0.3 + 0.5j, -3 - 1j, 10j])
def test_nth_root_limit_on_segment(arcsine, z):
    # -U_mu = g_segment - log 2, since the segment has capacity 1/2
    assert abs(AS.nth_root_green(arcsine, z) - (oracles.green_segment(z) - math.log(2))) < 1e-9


def test_nth_root_rejects_bad_probes(arcsine):
    with pytest.raises(AS.ProbeTooClose):
        AS.nth_root_green(arcsine, 0.0)
    shifted = M.build_measure(QuadDiff.from_roots([2 - 1j, 2 + 1j]))
    with pytest.raises(AS.ProbeTooClose):
        AS.nth_root_green(shifted, 1.0)  # the ray to infinity crosses the segment


def test_nth_root_check_chebyshev(arcsine):
    n = 30
    x = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    pair = HSPair(ComplexPoly([1.0]), ComplexPoly.from_roots(x), 0.0, x.astype(complex))
    err = AS.nth_root_check(pair, arcsine, [2.0, 1j])
    # |T_n| / 2^(n-1) against exp(n(g - log 2)): only the 2^(1/n)/2-type prefactor remains
    assert err < 2 * math.log(2) / n


@pytest.mark.parametrize("theta0", [0.2, 0.4])
def test_limit_zero_matches_real_root_finder(theta0):
    v = AS.limit_zero(POLES, (theta0, 1 - theta0))
    assert abs(v - oracles.limit_zero_real(POLES, theta0)) < 1e-9


def test_limit_zero_past_chebotarev_mass_uses_right_arc():
    v = AS.limit_zero(POLES, (0.9, 0.1))
    assert 0.2 < v.real < 1.0 and abs(v.imag) < 1e-10


def test_weak_limit_small_run():
    rep = AS.weak_limit_experiment(POLES, [0.5, 0.5, 0.5], [4, 8, 16], theta=(0.5, 0.5))
    assert rep.decreasing and rep.verdict == "decreasing"
    js = rep.to_json()
    assert js["n"] == [4, 8, 16] and len(js["probes"]) == 24
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("n,discrepancy") and len(lines) == 4


def test_weak_limit_needs_target():
    with pytest.raises(ValueError):
        AS.weak_limit_experiment(POLES, [1, 1, 1], [4])
    with pytest.raises(ValueError):
        AS.weak_limit_experiment([-1, 0, 1, 2], [1, 1, 1, 1], [4], target=0.5)


def test_branch_jump_is_reported(monkeypatch):
    calls = iter([0.1, 0.9])

    def fake(prob, target):
        v = next(calls)
        z = np.linspace(-0.9, 0.9, prob.n)
        return HSPair(ComplexPoly.from_roots([v]), ComplexPoly.from_roots(z), 0.0, z.astype(complex))

    monkeypatch.setattr(AS, "_nearest_pair", fake)
    with pytest.raises(AS.BranchLost):
        AS.weak_limit_experiment(POLES, [0.5, 0.5, 0.5], [4, 8], target=-0.2)


def test_vanvleck_accumulation_real():
    out = AS.vanvleck_accumulation(POLES, [0.5, 0.5, 0.5], [4, 12], steps=8)
    assert all(r["in_hull"] for r in out["rows"])
    assert len(out["rows"][1]["v"]) == 13
    assert "conjecture" in out["label"]


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_hull_of_triangle(x, y):
    tri = np.array([0, 1, 1j])
    v = complex(x, y)
    inside = x >= 0 and y >= 0 and x + y <= 1
    if min(abs(x), abs(y), abs(x + y - 1)) < 1e-6:
        return
    assert AS._in_hull(v, tri) == inside


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(1.2, 20.0))
def test_nth_root_limit_property(th, r):
    m = M.build_measure(QuadDiff.from_roots([-1.0, 1.0]))
    z = r * complex(math.cos(th), math.sin(th))
    assert abs(AS.nth_root_green(m, z) + oracles.arcsine_potential(z)) < 1e-8
