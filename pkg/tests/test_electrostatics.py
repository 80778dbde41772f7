import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from stieltjes_lab.electrostatics import (
    DiscreteConfig,
    Diverged,
    ExternalField,
    boundedness_certificate,
    continue_critical,
    discrete_energy,
    gradient_residual,
    realified,
    residual_jacobian,
    solve_critical,
    variational_functional,
)
from stieltjes_lab.lame import occupation_seed

JACOBI = ExternalField([-1, 1], [1, 1])
S3 = 1 / math.sqrt(3)


def test_field_rejects_repeated_poles():
    with pytest.raises(ValueError):
        ExternalField([0, 0], [1, 1])
    with pytest.raises(ValueError):
        ExternalField([0, 1], [1])


def test_energy_unit_distance():
    assert discrete_energy(DiscreteConfig([0, 1]), ExternalField([], [])) == 0.0


def test_energy_coincident_is_inf():
    assert discrete_energy(DiscreteConfig([0.3, 0.3]), JACOBI) == math.inf


def test_energy_roots_of_unity_matches_double_sum():
    z = np.exp(2j * np.pi * np.arange(4) / 4)
    fld = ExternalField([0.0], [3.0])
    assert discrete_energy(DiscreteConfig(z), fld) == pytest.approx(oracles.energy(z, [0.0], [3.0]), abs=1e-12)


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 7.0])
def test_scaled_roots_of_unity_are_critical(r):
    n = 5
    z = r * np.exp(2j * np.pi * np.arange(n) / n)
    res = gradient_residual(DiscreteConfig(z), ExternalField([0.0], [-(n - 1)]))
    assert np.abs(res).max() < 1e-12


def test_legendre_pair_is_critical():
    assert np.abs(gradient_residual(DiscreteConfig([-S3, S3]), JACOBI)).max() < 1e-12


def test_single_point_residual_is_field():
    z = 0.3 + 0.2j
    res = gradient_residual(DiscreteConfig([z]), JACOBI)
    assert res[0] == pytest.approx(1 / (z + 1) + 1 / (z - 1))


def test_point_on_pole_rejected():
    with pytest.raises(ValueError):
        gradient_residual(DiscreteConfig([1.0, 0.0]), JACOBI)


def test_solver_returns_to_legendre():
    cfg = solve_critical(DiscreteConfig([-S3 + 0.03, S3 - 0.02]), JACOBI)
    assert np.max(np.abs(np.sort(cfg.points.real) - [-S3, S3])) < 1e-10
    assert cfg.meta["residual"] < 1e-11


def test_solver_fixed_point():
    cfg = solve_critical(DiscreteConfig(oracles.legendre_zeros(4)), JACOBI)
    assert cfg.meta["iterations"] <= 1


def test_solver_keeps_interval_occupation():
    fld = ExternalField([-1, 0, 1], [1, 1, 1])
    for occ in [(3, 3), (1, 5), (6, 0)]:
        cfg = solve_critical(DiscreteConfig(occupation_seed(fld.poles, occ)), fld)
        x = cfg.points.real
        assert np.abs(cfg.points.imag).max() < 1e-12
        assert ((x > -1) & (x < 0)).sum() == occ[0]
        assert ((x > 0) & (x < 1)).sum() == occ[1]


def test_solver_matches_jacobi_oracle():
    fld = ExternalField([-1, 1], [0.7, 2.5])
    n = 9
    cfg = solve_critical(DiscreteConfig(np.linspace(-0.9, 0.9, n)), fld)
    assert np.max(np.abs(np.sort(cfg.points.real) - oracles.jacobi_zeros(n, 0.7, 2.5))) < 1e-10


def test_solver_diverges_cleanly():
    with pytest.raises(Diverged):
        solve_critical(DiscreteConfig([0.1, 0.2, 0.3]), ExternalField([0.0], [-10.0]), max_iter=5)


def test_jacobian_matches_finite_difference():
    rng = np.random.default_rng(3)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    fld = ExternalField([-1, 1, 2j], [0.5, 1.5, 1.0 + 0.5j])
    J = residual_jacobian(z, fld)
    h = 1e-6
    for k in range(z.size):
        e = np.zeros(z.size, dtype=complex)
        e[k] = h
        fd = (gradient_residual(DiscreteConfig(z + e), fld) - gradient_residual(DiscreteConfig(z - e), fld)) / (2 * h)
        assert np.allclose(fd, J[:, k], atol=1e-6)


def test_homotopy_to_complex_field():
    dst = ExternalField([-1, 0.1 + 0.4j, 1], [1, 1, 1])
    src = realified(dst)
    d = src.poles - src.poles[0]
    assert np.abs((d * np.conj(d[-1])).imag).max() < 1e-12  # collinear
    line = ExternalField(dst.poles.real, [1, 1, 1])
    cfg = solve_critical(DiscreteConfig(occupation_seed(line.poles, (2, 2))), line)
    out = continue_critical(cfg, line, dst)
    assert np.abs(gradient_residual(out, dst)).max() < 1e-10


def test_realified_equilateral_keeps_poles_apart():
    fld = realified(ExternalField(np.exp(2j * np.pi * np.arange(3) / 3), [1, 1, 1]))
    d = np.abs(fld.poles[:, None] - fld.poles[None, :]) + np.eye(3)
    assert d.min() > 0.3


def test_functional_vanishes_at_critical_config():
    fld = ExternalField([-1, 0.3, 1], [0.5, 1.0, 0.7])
    cfg = solve_critical(DiscreteConfig(occupation_seed(fld.poles, (3, 2))), fld)
    A = fld.A()
    z0 = 0.4 + 0.9j
    val = variational_functional(cfg, fld, lambda x: A(x) / (x - z0))
    assert abs(val) < 1e-9


def test_functional_on_circle_measure():
    fld = ExternalField([0.0], [-1.0])  # phi = (1/2) log|z|

    class Circle:
        def quadrature(self, r=1.3, m=512):
            t = r * np.exp(2j * np.pi * np.arange(m) / m)
            return t, np.full(m, 1.0 / m)

    h = lambda x: x * (1 + 0.3 * x + 0.1 * x ** 2)
    dh = lambda x: 1 + 0.6 * x + 0.3 * x ** 2
    assert abs(variational_functional(Circle(), fld, h, dh)) < 1e-6


def test_functional_matches_brute_force():
    fld = ExternalField([-1, 1], [1, 1])
    pts = [0.2 + 0.1j, -0.5]
    A = fld.A()
    h = lambda x: x * A(x)
    val = variational_functional(DiscreteConfig(pts), fld, h)
    ref = oracles.functional(pts, fld.poles, fld.residues, h)
    assert abs(val) > 1e-3
    assert abs(val - ref) < 1e-12


def test_functional_needs_h_zero_at_poles():
    with pytest.raises(ValueError):
        variational_functional(DiscreteConfig([0.0]), JACOBI, lambda x: x + 2)


def test_boundedness_jacobi_family():
    rows = []
    for n in (4, 8, 16):
        cfg = solve_critical(DiscreteConfig(np.linspace(-0.9, 0.9, n)), JACOBI)
        rows.append((cfg, JACOBI))
    rep = boundedness_certificate(rows)
    assert rep["sup"] < 1 and rep["condition_holds"]


def test_boundedness_flags_growing_roots_of_unity():
    rows = []
    for n in (4, 8, 16, 32):
        z = n * np.exp(2j * np.pi * np.arange(n) / n)
        rows.append((DiscreteConfig(z), ExternalField([0.0], [-(n - 1)])))
    rep = boundedness_certificate(rows)
    assert rep["flag"] and not rep["condition_holds"]


def test_boundedness_single_config():
    cfg = DiscreteConfig([-S3, S3])
    assert boundedness_certificate([(cfg, JACOBI)])["sup"] == pytest.approx(S3)


def test_boundedness_rejects_noncritical():
    with pytest.raises(ValueError):
        boundedness_certificate([(DiscreteConfig([0.1, 0.5]), JACOBI)])


configs = st.lists(st.builds(complex, st.floats(-2, 2), st.floats(-2, 2)), min_size=2, max_size=5)


@settings(max_examples=25, deadline=None)
@given(configs)
def test_residual_is_wirtinger_gradient(pts):
    z = np.array(pts)
    poles, res = [-1.0, 1.0, 0.5j], [0.7, 1.2, 0.4]
    gaps = np.abs(z[:, None] - z[None, :]) + 9 * np.eye(z.size)
    if gaps.min() < 0.1 or np.min(np.abs(z[:, None] - np.array(poles)[None, :])) < 0.1:
        return
    r = gradient_residual(DiscreteConfig(z), ExternalField(poles, res))
    fd = oracles.energy_gradient_fd(z, poles, res)
    # residual_k = -2 dE/dzeta_k
    assert np.max(np.abs(r + fd)) < 1e-6 * max(1.0, np.abs(r).max())


@settings(max_examples=25, deadline=None)
@given(configs, st.floats(0, 2 * math.pi))
def test_rotation_covariance(pts, th):
    z = np.array(pts)
    poles = np.array([-1.0, 1.0, 0.5j])
    gaps = np.abs(z[:, None] - z[None, :]) + 9 * np.eye(z.size)
    if gaps.min() < 0.1 or np.min(np.abs(z[:, None] - poles[None, :])) < 0.1:
        return
    e = np.exp(1j * th)
    res = [0.7, 1.2, 0.4]
    r0 = gradient_residual(DiscreteConfig(z), ExternalField(poles, res))
    r1 = gradient_residual(DiscreteConfig(e * z), ExternalField(e * poles, res))
    assert np.allclose(r1, np.conj(e) * r0, atol=1e-9 * max(1.0, np.abs(r0).max()))
