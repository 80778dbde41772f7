"""Discrete logarithmic energy in a rational external field and its saddle points.

The field is encoded by poles ``a_k`` and residues ``rho_k`` through

    B/A(z) = sum_k rho_k / (z - a_k),      Phi'(z) = -B/(2A),

so a configuration ``zeta`` is critical when

    2 sum_{j != k} 1/(zeta_k - zeta_j) + B/A(zeta_k) = 0   for every k.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np

from .poly import ComplexPoly

__all__ = [
    "ExternalField",
    "DiscreteConfig",
    "Diverged",
    "discrete_energy",
    "gradient_residual",
    "residual_jacobian",
    "solve_critical",
    "continue_critical",
    "variational_functional",
    "boundedness_certificate",
]


class Diverged(RuntimeError):
    def __init__(self, msg: str, residual: float):
        super().__init__(f"{msg} (last residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True, eq=False)
class ExternalField:
    poles: np.ndarray
    residues: np.ndarray

    def __init__(self, poles: Sequence[complex], residues: Sequence[complex]):
        a = np.asarray(poles, dtype=complex).ravel()
        r = np.asarray(residues, dtype=complex).ravel()
        if a.shape != r.shape:
            raise ValueError("one residue per pole")
        if a.size > 1:
            d = np.abs(a[:, None] - a[None, :]) + np.eye(a.size)
            if d.min() == 0:
                raise ValueError("poles must be distinct")
        object.__setattr__(self, "poles", a)
        object.__setattr__(self, "residues", r)

    @property
    def p(self) -> int:
        return self.poles.size - 1

    @property
    def alpha(self) -> complex:
        return complex(self.residues.sum())

    def A(self) -> ComplexPoly:
        return ComplexPoly.from_roots(self.poles)

    def B(self) -> ComplexPoly:
        out = ComplexPoly([0.0])
        for k, r in enumerate(self.residues):
            out = out + r * ComplexPoly.from_roots(np.delete(self.poles, k))
        return out

    def b_over_a(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.residues / (z[..., None] - self.poles)).sum(axis=-1)

    def b_over_a_prime(self, z):
        z = np.asarray(z, dtype=complex)
        return -(self.residues / (z[..., None] - self.poles) ** 2).sum(axis=-1)

    def dphi(self, z):
        """Phi'(z) = -B/(2A)."""
        return -0.5 * self.b_over_a(z)

    def phi(self, z):
        """Re Phi with the principal logarithm in each summand."""
        z = np.asarray(z, dtype=complex)
        return -0.5 * np.real(self.residues * np.log(z[..., None] - self.poles)).sum(axis=-1)

    def transformed(self, a: complex, b: complex) -> "ExternalField":
        return ExternalField(a * self.poles + b, self.residues)


@dataclass(frozen=True, eq=False)
class DiscreteConfig:
    points: np.ndarray
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __init__(self, points: Sequence[complex], meta: dict | None = None):
        z = np.asarray(points, dtype=complex).ravel().copy()
        z.setflags(write=False)
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "meta", dict(meta or {}))

    @property
    def n(self) -> int:
        return self.points.size

    def min_gap(self) -> float:
        if self.n < 2:
            return np.inf
        d = np.abs(self.points[:, None] - self.points[None, :])
        d[np.diag_indices(self.n)] = np.inf
        return float(d.min())

    def poly(self) -> ComplexPoly:
        return ComplexPoly.from_roots(self.points)


def discrete_energy(cfg: DiscreteConfig, fld: ExternalField) -> float:
    z = cfg.points
    if cfg.n > 1 and cfg.min_gap() == 0:
        return np.inf
    if z.size and fld.poles.size and np.any(z[:, None] == fld.poles[None, :]):
        return np.inf
    e = 0.0
    if cfg.n > 1:
        d = np.abs(z[:, None] - z[None, :])
        iu = np.triu_indices(cfg.n, 1)
        e = -2.0 * np.log(d[iu]).sum()
    if fld.poles.size:
        e += 2.0 * fld.phi(z).sum()
    return float(e)


def _pair_sums(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, np.inf)
    inv = 1.0 / diff
    return inv.sum(axis=1), inv


def gradient_residual(cfg: DiscreteConfig, fld: ExternalField) -> np.ndarray:
    z = cfg.points
    if fld.poles.size and np.any(z[:, None] == fld.poles[None, :]):
        raise ValueError("a point sits on a pole of the field")
    s, _ = _pair_sums(z)
    return 2.0 * s + (fld.b_over_a(z) if fld.poles.size else 0.0)


def residual_jacobian(z: np.ndarray, fld: ExternalField) -> np.ndarray:
    """Holomorphic Jacobian d r_k / d zeta_j of :func:`gradient_residual`."""
    _, inv = _pair_sums(z)
    J = 2.0 * inv**2
    diag = -2.0 * (inv**2).sum(axis=1)
    if fld.poles.size:
        diag = diag + fld.b_over_a_prime(z)
    J[np.diag_indices(z.size)] = diag
    return J


def _term_scale(z: np.ndarray, fld: ExternalField) -> float:
    _, inv = _pair_sums(z)
    s = 2.0 * np.abs(inv).sum(axis=1)
    if fld.poles.size:
        s = s + np.abs(fld.residues / (z[:, None] - fld.poles[None, :])).sum(axis=1)
    return float(s.max())


def solve_critical(
    init: DiscreteConfig,
    fld: ExternalField,
    tol: float = 1e-11,
    max_iter: int = 200,
    min_step: float = 2.0**-20,
    min_gap: float = 1e-13,
    trust: float = 0.5,
) -> DiscreteConfig:
    """Damped Newton on the residual system, Armijo backtracking on ||r||^2.

    Each point moves at most ``trust`` times its distance to the nearest other
    point or pole per iteration, so points do not hop across poles and real
    interval occupations are kept.  Convergence means max |r_k| < tol, or, for
    large n where that is below roundoff, max |r_k| < tol * (size of the
    summed terms) together with a Newton step below 1e-14 relative.
    """
    z = init.points.astype(complex)
    if z.size == 0:
        return DiscreteConfig(z, {"iterations": 0, "residual": 0.0})
    r = gradient_residual(DiscreteConfig(z), fld)
    f = float(np.vdot(r, r).real)
    last_step = np.inf
    for it in range(max_iter + 1):
        rmax = float(np.abs(r).max())
        if not np.isfinite(rmax):
            raise Diverged("non-finite residual", rmax)
        scale = _term_scale(z, fld)
        if rmax < tol or (rmax < tol * scale and last_step < 1e-14):
            return DiscreteConfig(z, {"iterations": it, "residual": rmax, "scale": scale})
        if it == max_iter:
            break
        J = residual_jacobian(z, fld)
        try:
            dz = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            dz = np.linalg.lstsq(J, -r, rcond=None)[0]
        # per-point trust radius
        others = np.abs(z[:, None] - z[None, :])
        others[np.diag_indices(z.size)] = np.inf
        near = others.min(axis=1)
        if fld.poles.size:
            near = np.minimum(near, np.abs(z[:, None] - fld.poles[None, :]).min(axis=1))
        mv = np.abs(dz)
        with np.errstate(divide="ignore"):
            t = float(min(1.0, np.min(np.where(mv > 0, trust * near / mv, np.inf))))
        ft = np.inf
        rt = r
        while True:
            zt = z + t * dz
            cfg_t = DiscreteConfig(zt)
            gap = cfg_t.min_gap()
            pole_gap = np.abs(zt[:, None] - fld.poles[None, :]).min() if fld.poles.size else np.inf
            if gap > min_gap and pole_gap > min_gap:
                rt = gradient_residual(cfg_t, fld)
                ft = float(np.vdot(rt, rt).real)
                if np.isfinite(ft) and ft <= (1.0 - 1e-4 * t) * f:
                    break
            t *= 0.5
            if t < min_step:
                if gap <= min_gap:
                    raise Diverged("points collided", rmax)
                if not np.isfinite(ft):
                    raise Diverged("line search failed", rmax)
                break
        last_step = float(np.max(np.abs(t * dz) / (1.0 + np.abs(z))))
        z, r, f = zt, rt, ft
    raise Diverged(f"no convergence in {max_iter} iterations", float(np.abs(r).max()))


def realified(fld: ExternalField) -> ExternalField:
    """Project the poles onto their principal axis (complex A -> real segment)."""
    a = fld.poles
    c = a.mean()
    d = a - c
    if np.allclose(d.imag, 0):
        return ExternalField(a, fld.residues.real.astype(complex))
    # principal direction of the point cloud
    M = np.array([d.real, d.imag])
    u, _, _ = np.linalg.svd(M @ M.T)
    e = complex(u[0, 0], u[1, 0])

    def gap(e):
        t = np.sort((d * np.conj(e)).real)
        return np.diff(t).min()

    # isotropic clouds (e.g. an equilateral triangle) can collapse poles on the axis
    cand = np.exp(1j * np.pi * np.arange(36) / 36)
    best = cand[int(np.argmax([gap(x) for x in cand]))]
    if gap(e) < 0.25 * gap(best):
        e = best
    t = (d * np.conj(e)).real
    return ExternalField(c + t * e, fld.residues.real.astype(complex))


def continue_critical(
    start: DiscreteConfig,
    src: ExternalField,
    dst: ExternalField,
    steps: int = 16,
) -> DiscreteConfig:
    """Track a critical configuration along the straight homotopy src -> dst."""
    cfg = start
    for j in range(1, steps + 1):
        s = j / steps
        fld = ExternalField((1 - s) * src.poles + s * dst.poles,
                            (1 - s) * src.residues + s * dst.residues)
        cfg = solve_critical(cfg, fld)
    return cfg


def variational_functional(obj, fld: ExternalField, h: Callable, dh: Callable | None = None,
                           pole_tol: float = 1e-12) -> complex:
    """f(mu; h) for a discrete configuration or a weighted node set.

    ``obj`` is a :class:`DiscreteConfig` (unit weights, self pairs excluded) or
    any object exposing ``quadrature() -> (nodes, complex weights)``; in the
    latter case the diagonal of the double integral uses ``h'`` (``dh``, or a
    centred difference when not supplied).
    """
    if fld.poles.size and np.max(np.abs(h(fld.poles.astype(complex)))) > pole_tol:
        raise ValueError("h must vanish at every pole of the field")
    if isinstance(obj, DiscreteConfig):
        x = obj.points
        w = np.ones(x.size)
        diag = False
    else:
        x, w = obj.quadrature()
        diag = True
    hx = h(x)
    num = hx[:, None] - hx[None, :]
    den = x[:, None] - x[None, :]
    np.fill_diagonal(den, 1.0)
    K = num / den
    if diag:
        if dh is None:
            eps = 1e-6 * (1 + np.abs(x))
            dhx = (h(x + eps) - h(x - eps)) / (2 * eps)
        else:
            dhx = dh(x)
        K[np.diag_indices(x.size)] = dhx
    else:
        np.fill_diagonal(K, 0.0)
    double = w @ K @ w
    single = (w * (fld.dphi(x) if fld.poles.size else 0.0) * hx).sum()
    return complex(double - 2.0 * single)


def boundedness_certificate(items: Sequence[tuple[DiscreteConfig, ExternalField]],
                            check_tol: float = 1e-9) -> dict:
    """Sup-norm of the configurations and the liminf charge condition.

    The flag ``condition_holds`` is False when Re(sum rho)/n drops to or below
    -1/2 at the tail of the family, the regime in which critical points may
    escape to infinity.
    """
    rows = []
    for cfg, fld in items:
        r = np.abs(gradient_residual(cfg, fld)).max() if cfg.n else 0.0
        if r > check_tol:
            raise ValueError(f"configuration with n={cfg.n} is not critical (residual {r:.2e})")
        ratio = float(fld.residues.sum().real / cfg.n) if cfg.n else np.inf
        rows.append({"n": cfg.n, "max_abs": float(np.abs(cfg.points).max()), "charge_ratio": ratio})
    tail = rows[len(rows) // 2:] if len(rows) > 1 else rows
    holds = all(row["charge_ratio"] > -0.5 for row in tail)
    return {
        "rows": rows,
        "condition_holds": holds,
        "flag": not holds,
        "sup": max((row["max_abs"] for row in rows), default=0.0),
    }
