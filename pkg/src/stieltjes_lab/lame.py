"""Heine-Stieltjes and Van Vleck polynomials of the generalized Lame equation

    A y'' + B y' - n(n + alpha - 1) V y = 0,     B/A = sum rho_k/(z - a_k).

For three poles (p = 2) the Van Vleck polynomial is z - v, and the admissible
v are eigenvalues of the operator Q -> (A Q'' + B Q' - lambda z Q)/lambda on
polynomials of degree <= n.  Zeros of Q come from the electrostatic Newton
solver, seeded by interval occupations (real data) or by a homotopy from the
realified pole set (complex data).
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import chebyshev as C

from .electrostatics import (
    DiscreteConfig,
    Diverged,
    ExternalField,
    realified,
    solve_critical,
)
from .poly import ComplexPoly, exact_quotient

__all__ = [
    "LameProblem",
    "HSPair",
    "heine_count",
    "heun_eigenvalues",
    "heun_spectrum",
    "stieltjes_enumerate",
    "vanvleck_of",
    "vanvleck_from_zeros",
    "residual",
    "pair_from_zeros",
]


def heine_count(n: int, p: int) -> int:
    return comb(n + p - 1, n)


@dataclass(frozen=True, eq=False)
class LameProblem:
    poles: np.ndarray
    residues: np.ndarray
    n: int

    def __init__(self, poles: Sequence[complex], residues: Sequence[complex], n: int):
        fld = ExternalField(poles, residues)
        if n < 0:
            raise ValueError("degree must be >= 0")
        object.__setattr__(self, "poles", fld.poles)
        object.__setattr__(self, "residues", fld.residues)
        object.__setattr__(self, "n", int(n))

    @property
    def p(self) -> int:
        return self.poles.size - 1

    @property
    def field(self) -> ExternalField:
        return ExternalField(self.poles, self.residues)

    @property
    def alpha(self) -> complex:
        return complex(self.residues.sum())

    @property
    def lam(self) -> complex:
        return self.n * (self.n + self.alpha - 1)

    @property
    def A(self) -> ComplexPoly:
        return ComplexPoly.from_roots(self.poles)

    @property
    def B(self) -> ComplexPoly:
        return self.field.B()

    def is_stieltjes(self) -> bool:
        return bool(np.all(self.poles.imag == 0) and np.all(self.residues.imag == 0)
                    and np.all(self.residues.real > 0))

    def with_degree(self, n: int) -> "LameProblem":
        return LameProblem(self.poles, self.residues, n)


@dataclass(frozen=True, eq=False)
class HSPair:
    vanvleck: ComplexPoly
    stieltjes: ComplexPoly
    lam: complex
    zeros: np.ndarray
    flags: dict = dc_field(default_factory=dict)

    @property
    def v(self) -> np.ndarray:
        """Zeros of the Van Vleck polynomial."""
        if self.vanvleck.degree < 1:
            return np.zeros(0, dtype=complex)
        return self.vanvleck.roots()


def residual(pair: HSPair, prob: LameProblem) -> float:
    Q = pair.stieltjes
    AQ2 = prob.A * Q.deriv(2)
    lhs = AQ2 + prob.B * Q.deriv(1) - pair.lam * pair.vanvleck * Q
    den = AQ2.norm()
    if den == 0:
        return float(lhs.norm())
    return float(lhs.norm() / den)


def vanvleck_from_zeros(zeros: np.ndarray, prob: LameProblem, probes: np.ndarray | None = None) -> ComplexPoly:
    """V from (A Q'' + B Q')/(lambda Q), evaluated through logarithmic derivatives.

    Using Q'/Q = S1 and Q''/Q = S1^2 - S2 (S_k = sum (z - zeta)^-k) avoids the
    cancellation of high-degree coefficient arithmetic.
    """
    p = prob.p
    if p == 0:
        return ComplexPoly([0.0])
    zeros = np.asarray(zeros, dtype=complex)
    if probes is None:
        c = prob.poles.mean()
        rad = 2.0 * (np.abs(prob.poles - c).max() + (np.abs(zeros - c).max() if zeros.size else 0.0)) + 1.0
        k = max(2 * p, 8)
        probes = c + rad * np.exp(2j * np.pi * (np.arange(k) + 0.25) / k)
    d = probes[:, None] - zeros[None, :]
    S1 = (1.0 / d).sum(axis=1)
    S2 = (1.0 / d**2).sum(axis=1)
    vals = prob.A(probes) * (S1**2 - S2) + prob.B(probes) * S1
    lam = prob.lam
    degenerate = abs(lam) < 1e-14
    if not degenerate:
        vals = vals / lam
    # least squares fit of a degree p-1 polynomial in centred, scaled variable
    c = probes.mean()
    s = np.abs(probes - c).max()
    X = np.vander((probes - c) / s, p, increasing=True)
    coef = np.linalg.lstsq(X, vals, rcond=None)[0]
    # back to the monomial basis in z
    out = ComplexPoly([0.0])
    base = ComplexPoly([-c / s, 1.0 / s])
    powk = ComplexPoly([1.0])
    for ck in coef:
        out = out + ck * powk
        powk = powk * base
    return out


def vanvleck_of(cfg: DiscreteConfig, prob: LameProblem, tol: float = 1e-8) -> ComplexPoly:
    """V = (A Q'' + B Q')/(lambda Q) by exact polynomial division."""
    Q = cfg.poly()
    num = prob.A * Q.deriv(2) + prob.B * Q.deriv(1)
    V = exact_quotient(num, Q, tol=tol)
    lam = prob.lam
    if abs(lam) > 1e-14:
        V = ComplexPoly(V.coeffs / lam)
    return V


def pair_from_zeros(zeros: np.ndarray, prob: LameProblem, flags: dict | None = None) -> HSPair:
    zeros = np.asarray(zeros, dtype=complex)
    flags = dict(flags or {})
    lam = prob.lam
    if abs(lam) < 1e-14:
        flags["lambda_zero"] = True
    if zeros.size == 0:
        V = ComplexPoly([0.0]) if abs(lam) < 1e-14 else ComplexPoly([0.0])
        return HSPair(V, ComplexPoly([1.0]), lam, zeros, flags)
    V = vanvleck_from_zeros(zeros, prob)
    order = np.lexsort((zeros.imag, zeros.real))
    zeros = zeros[order]
    return HSPair(V, ComplexPoly.from_roots(zeros), lam, zeros, flags)


# -- p = 2 spectral method -------------------------------------------------

def _hull_map(poles: np.ndarray) -> tuple[complex, complex]:
    """Affine map z = c + h x sending the principal extent of the poles to [-1, 1]."""
    d = poles - poles.mean()
    if np.allclose(d.imag, 0):
        e = 1.0 + 0j
    else:
        M = np.array([d.real, d.imag])
        u, _, _ = np.linalg.svd(M @ M.T)
        e = complex(u[0, 0], u[1, 0])
    t = (d * np.conj(e)).real
    c = poles.mean() + e * (t.max() + t.min()) / 2
    h = e * (t.max() - t.min()) / 2
    return complex(c), complex(h)


def heun_matrix(prob: LameProblem, shift: int = 1) -> tuple[np.ndarray, complex]:
    """Tridiagonal coefficient recurrence with pole ``shift`` moved to the origin.

    Rows m = 0..n of (A Q'' + B Q' - lambda x Q) in the monomial basis of
    x = z - a_shift; eigenvalues e give v = a_shift - e/lambda.
    """
    if prob.p != 2:
        raise ValueError("the banded recurrence is for three poles")
    n = prob.n
    b = prob.poles - prob.poles[shift]
    A = ComplexPoly.from_roots(b).coeffs
    B = ExternalField(b, prob.residues).B().coeffs
    Bc = np.zeros(3, dtype=complex)
    Bc[: len(B)] = B
    A1, A2 = A[1], A[2]
    b0, b1, b2 = Bc
    lam = prob.lam
    M = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(n + 1):
        if m >= 1:
            M[m, m - 1] = (m - 1) * (m - 2) + b2 * (m - 1) - lam
        M[m, m] = m * (m - 1) * A2 + b1 * m
        if m + 1 <= n:
            M[m, m + 1] = (m + 1) * m * A1 + b0 * (m + 1)
    return M, lam


def _chebyshev_matrix(prob: LameProblem) -> tuple[np.ndarray, complex, complex, complex]:
    """Same operator in the Chebyshev basis of the hull-adapted variable."""
    n = prob.n
    c, h = _hull_map(prob.poles)
    x = (prob.poles - c) / h
    fld = ExternalField(x, prob.residues)
    Ac = C.poly2cheb(ComplexPoly.from_roots(x).coeffs)
    Bc = C.poly2cheb(fld.B().coeffs)
    lam = prob.lam
    L = np.zeros((n + 1, n + 1), dtype=complex)
    for j in range(n + 1):
        e = np.zeros(n + 1)
        e[j] = 1.0
        s = -lam * C.chebmulx(e)
        if j >= 2:
            s = C.chebadd(s, C.chebmul(Ac, C.chebder(e, 2)))
        if j >= 1:
            s = C.chebadd(s, C.chebmul(Bc, C.chebder(e, 1)))
        # the T_{n+1} coefficient cancels identically by the choice of lambda
        L[:, j] = s[: n + 1] if len(s) > n + 1 else np.pad(s, (0, n + 1 - len(s)))
    return L, lam, c, h


def heun_eigenvalues(prob: LameProblem, basis: str = "chebyshev", vectors: bool = False):
    """Admissible Van Vleck zeros v for p = 2 (unsorted multiset, n + 1 values).

    The Chebyshev basis of the hull-adapted variable is used by default; the
    shifted monomial recurrence is kept for cross-checks.  With ``vectors``
    the eigenvectors are returned as Chebyshev coefficient columns together
    with the affine map ``(c, h)``.
    """
    if prob.p != 2:
        raise ValueError("heun_eigenvalues needs p = 2")
    if prob.n == 0:
        return np.zeros(0, dtype=complex)
    lam = prob.lam
    if abs(lam) < 1e-14:
        raise ValueError("lambda vanishes; the eigenproblem is not linear in v")
    if basis == "monomial":
        M, lam = heun_matrix(prob)
        ev = sla.eigvals(M)
        return prob.poles[1] - ev / lam
    L, lam, c, h = _chebyshev_matrix(prob)
    if vectors:
        ev, W = sla.eig(L)
        return c - h * ev / lam, W, (c, h)
    ev = sla.eigvals(L)
    return c - h * ev / lam


def _dedup(vs: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, bool]:
    out: list[complex] = []
    close = False
    for v in vs:
        if any(abs(v - w) < tol for w in out):
            close = True
            continue
        out.append(complex(v))
    return np.array(out), close


def _interval_seeds(lo: float, hi: float, m: int) -> np.ndarray:
    if m == 0:
        return np.zeros(0)
    k = np.arange(1, m + 1)
    x = np.cos(np.pi * (2 * k - 1) / (2 * m))[::-1]
    return lo + (hi - lo) * (0.5 + 0.5 * 0.98 * x)


def _line_order(poles: np.ndarray) -> np.ndarray:
    """Order of collinear poles along their common line."""
    d = poles - poles[0]
    k = int(np.argmax(np.abs(d)))
    e = d[k] / abs(d[k]) if abs(d[k]) > 0 else 1.0
    return np.argsort((d * np.conj(e)).real)


def occupation_seed(poles: np.ndarray, occ: Sequence[int]) -> np.ndarray:
    """Chebyshev-like seeds between consecutive collinear poles."""
    a = np.asarray(poles, dtype=complex)
    a = a[_line_order(a)]
    parts = []
    for j, m in enumerate(occ):
        s = _interval_seeds(0.0, 1.0, m)
        parts.append(a[j] + (a[j + 1] - a[j]) * s)
    out = np.concatenate(parts) if parts else np.zeros(0, dtype=complex)
    if np.all(a.imag == 0):
        return out.real
    return out


def occupations(n: int, p: int) -> list[tuple[int, ...]]:
    return [c for c in itertools.product(range(n + 1), repeat=p) if sum(c) == n]


def _solve_occupation(prob: LameProblem, occ: Sequence[int], fld: ExternalField | None = None):
    fld = fld or prob.field
    z0 = occupation_seed(fld.poles, occ)
    return solve_critical(DiscreteConfig(z0), fld)


def stieltjes_enumerate(prob: LameProblem) -> list[HSPair]:
    """All sigma(n) pairs for real poles and positive residues, one per occupation."""
    if not prob.is_stieltjes():
        raise ValueError("stieltjes_enumerate needs real poles and positive residues")
    a = np.sort(prob.poles.real)
    prob = LameProblem(a, prob.residues[np.argsort(prob.poles.real)], prob.n)
    out: list[HSPair] = []
    failed = []
    for occ in occupations(prob.n, prob.p):
        try:
            cfg = _solve_occupation(prob, occ)
        except Diverged as err:
            failed.append((occ, str(err)))
            continue
        pair = pair_from_zeros(cfg.points.real.astype(complex), prob,
                               {"occupation": list(occ), "newton": cfg.meta})
        out.append(pair)
    if failed:
        warnings.warn(f"{len(failed)} occupation vectors failed: {failed}")
    return out


def _match(vs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Greedy nearest matching, returns index into ``vs`` per target."""
    idx = -np.ones(targets.size, dtype=int)
    used: set[int] = set()
    order = np.argsort([np.min(np.abs(vs - t)) for t in targets])
    for i in order:
        d = np.abs(vs - targets[i])
        for j in np.argsort(d):
            if j not in used:
                idx[i] = j
                used.add(j)
                break
    return idx


def heun_spectrum(prob: LameProblem, homotopy_steps: int = 16) -> list[HSPair]:
    """All Heine-Stieltjes pairs for three poles.

    Eigenvalues fix the Van Vleck zeros; zero sets are computed by Newton and
    matched back to the eigenvalues.  Each pair records ``eig_gap``, the
    distance between its eigenvalue and the v recovered from its zeros.
    """
    if prob.p != 2:
        raise ValueError("heun_spectrum needs p = 2")
    n = prob.n
    if n == 0:
        V = ComplexPoly([0.0])
        return [HSPair(V, ComplexPoly([1.0]), 0j, np.zeros(0, dtype=complex), {"lambda_zero": True})]
    raw, W, (c, h) = heun_eigenvalues(prob, vectors=True)
    vs, close = _dedup(raw)
    if close:
        warnings.warn("eigenvalues closer than 1e-8 merged (possibly degenerate)")
    if vs.size < n + 1:
        warnings.warn(f"only {vs.size} distinct eigenvalues of {n + 1}")

    configs: list[tuple[np.ndarray, dict]] = []
    if prob.is_stieltjes():
        order = np.argsort(prob.poles.real)
        fld = ExternalField(prob.poles[order].real, prob.residues[order].real)
        for occ in occupations(n, 2):
            try:
                cfg = solve_critical(DiscreteConfig(occupation_seed(fld.poles, occ)), fld)
                configs.append((cfg.points, {"occupation": list(occ)}))
            except Diverged:
                continue
    else:
        src = realified(prob.field)
        order = _line_order(src.poles)
        src_sorted = ExternalField(src.poles[order], src.residues[order])
        dst_sorted = ExternalField(prob.poles[order], prob.residues[order])
        for occ in occupations(n, 2):
            try:
                cfg = solve_critical(DiscreteConfig(occupation_seed(src_sorted.poles, occ)), src_sorted)
                cfg = _track(cfg, src_sorted, dst_sorted, homotopy_steps)
                configs.append((cfg.points, {"occupation_realified": list(occ)}))
            except Diverged:
                continue

    pairs = [pair_from_zeros(z, prob, meta) for z, meta in configs]
    vz = np.array([pp.v[0] for pp in pairs]) if pairs else np.zeros(0, dtype=complex)
    out: list[HSPair] = []
    idx = _match(vz, vs) if vz.size else -np.ones(vs.size, dtype=int)
    for i, v in enumerate(vs):
        j = idx[i]
        if j < 0:
            continue
        pp = pairs[j]
        gap = abs(pp.v[0] - v)
        if gap > 1e-6 * (1 + abs(v)):
            continue
        flags = dict(pp.flags, eig_gap=float(gap), eigenvalue=complex(v))
        out.append(HSPair(pp.vanvleck, pp.stieltjes, pp.lam, pp.zeros, flags))
    missing = [i for i, v in enumerate(vs) if not any(abs(pp.flags["eigenvalue"] - v) == 0 for pp in out)]
    fld = prob.field
    for i in missing:
        # fallback: polish the Chebyshev roots of the eigenvector
        j = int(np.argmin(np.abs(raw - vs[i])))
        try:
            z0 = c + h * C.chebroots(W[:, j])
            cfg = solve_critical(DiscreteConfig(z0), fld)
        except (Diverged, np.linalg.LinAlgError, ValueError):
            continue
        pp = pair_from_zeros(cfg.points, prob, {"seed": "eigenvector"})
        gap = abs(pp.v[0] - vs[i])
        if gap <= 1e-6 * (1 + abs(vs[i])) and not any(
                abs(q.v[0] - pp.v[0]) < 1e-8 for q in out):
            out.append(HSPair(pp.vanvleck, pp.stieltjes, pp.lam, pp.zeros,
                              dict(pp.flags, eig_gap=float(gap), eigenvalue=complex(vs[i]))))
    if len(out) < vs.size:
        warnings.warn(f"zero sets found for {len(out)} of {vs.size} eigenvalues")
    out.sort(key=lambda pp: (pp.v[0].real, pp.v[0].imag))
    return out


def _track(cfg: DiscreteConfig, src: ExternalField, dst: ExternalField, steps: int) -> DiscreteConfig:
    """Homotopy with step halving when a Newton solve fails."""
    s = 0.0
    ds = 1.0 / steps
    while s < 1.0:
        t = min(1.0, s + ds)
        fld = ExternalField((1 - t) * src.poles + t * dst.poles, (1 - t) * src.residues + t * dst.residues)
        try:
            cfg = solve_critical(cfg, fld)
            s = t
            ds = min(ds * 1.5, 1.0 / steps)
        except Diverged:
            ds *= 0.5
            if ds < 1e-4:
                raise
    return cfg
