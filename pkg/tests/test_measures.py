import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from stieltjes_lab import measures as M
from stieltjes_lab.periods import periods, straight_cuts
from stieltjes_lab.qdiff import QuadDiff, analyze_p2

TRIANGLE = np.exp(2j * np.pi * np.arange(3) / 3)


@pytest.fixture(scope="module")
def arcsine():
    return M.build_measure(QuadDiff.from_roots([-1.0, 1.0]))


@pytest.fixture(scope="module")
def star():
    return M.build_measure(QuadDiff.from_roots(TRIANGLE, [0.0]))


def test_arcsine_mass_and_kappa(arcsine):
    assert arcsine.total == pytest.approx(1.0, abs=1e-10)
    assert arcsine.meta["kappa"] == pytest.approx(1.0, abs=1e-9)
    assert len(arcsine.arcs) == 1


@pytest.mark.parametrize("z", [2.0, 1j, -1.5 + 0.4j, 0.3 - 0.2j])
def test_arcsine_cauchy_closed_form(arcsine, z):
    assert abs(M.cauchy_transform(arcsine, z) - oracles.arcsine_cauchy(z)) < 1e-9


@pytest.mark.parametrize("z", [0.0, 0.3, -0.77, 2.0, 1j, -1.5 + 0.4j])
def test_arcsine_potential_closed_form(arcsine, z):
    assert abs(M.potential(arcsine, z) - oracles.arcsine_potential(z)) < 1e-8


def test_arcsine_density_matches_closed_form(arcsine):
    s, dens = arcsine.density(0)
    x = arcsine.arcs[0].points
    x = x[1:-1] if len(dens) == len(x) - 2 else x
    ref = 1 / (np.pi * np.sqrt(1 - x.real ** 2))
    assert np.max(np.abs(dens - ref) / ref) < 1e-8


def test_cauchy_squares_to_R_star(star):
    for z in (2.0, 1 + 1j, -1.5j, 0.3 + 0.1j):
        c = M.cauchy_transform(star, z)
        assert abs(c * c - star.qd.r(z)) < 1e-8


def test_star_masses_are_thirds(star):
    assert np.allclose(star.masses, 1 / 3, atol=1e-9)


def test_pv_vanishes_on_support(arcsine):
    pts = arcsine.arcs[0].points
    inner = pts[np.abs(pts.real) < 0.9]
    for x in inner[np.linspace(0, inner.size - 1, 5).astype(int)]:
        assert abs(M.cauchy_transform(arcsine, x, pv=True)) < 1e-8


def test_cauchy_near_support_raises(arcsine):
    pts = arcsine.arcs[0].points
    z = 0.5 * (pts[3] + pts[4]) + 1e-12j
    with pytest.raises(M.ProximityError):
        M.cauchy_transform(arcsine, z)


def test_s_property_holds_and_bent_copy_fails(arcsine):
    assert M.s_property_check(arcsine, 5)["max_mismatch"] < 1e-6
    b = M.bent(arcsine)
    assert b.total == pytest.approx(1.0, abs=1e-9)
    assert M.s_property_check(b, 5)["max_mismatch"] > 1e-3


@pytest.mark.parametrize("v, positive", [(0.5, True), (0.2, True), (-0.3, False), (1.3, False)])
def test_positivity_examples(v, positive):
    qd = QuadDiff.from_roots(TRIANGLE, [v])
    m = M.build_measure(qd)
    ok, cert = M.positivity(m, analyze_p2(qd)["class"])
    assert ok is positive
    assert m.total == pytest.approx(1.0, abs=1e-9)
    if not positive:
        assert min(m.masses) < 0
        assert cert["length_sum"] > 1


def test_positivity_disagreement_is_raised():
    qd = QuadDiff.from_roots(TRIANGLE, [0.5])
    with pytest.raises(M.Disagreement) as err:
        M.positivity(M.build_measure(qd), "InteriorClosed")
    assert err.value.certificate["density_ok"] and not err.value.certificate["class_ok"]


def test_arc_masses_equal_periods():
    v = 0.5
    qd = QuadDiff.from_roots(TRIANGLE, [v])
    m = M.build_measure(qd)
    ch = periods(TRIANGLE, [v], straight_cuts(TRIANGLE, [v], [("v0", "a0"), ("a1", "a2")]))
    by_ends = {tuple(sorted(a.ends)): a.mass() for a in m.arcs}
    assert abs(by_ends[("a0", "v0")] - ch.w[0].real) < 1e-9
    assert abs(by_ends[("a1", "a2")] - ch.w[1].real) < 1e-9


def test_not_closed_raises():
    qd = QuadDiff.from_roots(TRIANGLE, [0.5 + 0.05j])
    with pytest.raises(M.NotClosed):
        M.build_measure(qd, budget=3.0)


def test_distance_to_support(arcsine):
    assert arcsine.distance_to_support(0.5 + 0.25j) == pytest.approx(0.25, abs=1e-9)
    assert arcsine.distance_to_support(3.0) == pytest.approx(2.0, abs=1e-9)


def test_measure_json_round_numbers(arcsine):
    js = M.measure_json(arcsine)
    assert js["total"] == pytest.approx(1.0, abs=1e-10)
    assert len(js["arcs"]) == 1 and set(js["arcs"][0]) == {"ends", "polyline", "density", "mass"}


def test_balayage_fixture_identities():
    fx = M.balayage_example_fixture(n_nodes=128)
    assert fx["closure_gap"] < 1e-8
    assert fx["density_imag_max"] < 1e-8
    assert abs(fx["mu"].total - fx["mu1"].total) < 1e-6
    assert np.all(fx["balayage_weights"] > 0)


@settings(max_examples=10, deadline=None)
@given(st.floats(-0.95, 0.95), st.floats(0.05, 1.5))
def test_arcsine_cauchy_conjugate_symmetry(x, y):
    m = M.build_measure(QuadDiff.from_roots([-1.0, 1.0]))
    z = complex(x, y)
    a, b = M.cauchy_transform(m, z), M.cauchy_transform(m, z.conjugate())
    assert abs(a - b.conjugate()) < 1e-9
    assert abs(a - oracles.arcsine_cauchy(z)) < 1e-8


@settings(max_examples=8, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.floats(0.4, 3.0))
def test_far_field_potential(th, r):
    m = M.build_measure(QuadDiff.from_roots(TRIANGLE, [0.0]))
    z = 40 * r * complex(math.cos(th), math.sin(th))
    assert abs(M.potential(m, z) + math.log(abs(z))) < 5e-3 / r
