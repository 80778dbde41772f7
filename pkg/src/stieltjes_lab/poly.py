"""Complex polynomials in the ascending-coefficient convention.

Coefficient arrays follow ``numpy.polynomial.polynomial``: ``c[k]`` multiplies
``z**k``.  Root finding is Aberth-Ehrlich simultaneous iteration started from
companion-matrix eigenvalues, so high-degree clustered roots are refined
together and never deflated.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "ComplexPoly",
    "NotDivisible",
    "roots",
    "root_clusters",
    "eval_with_derivs",
    "exact_quotient",
]


class NotDivisible(ArithmeticError):
    """Raised by :func:`exact_quotient` when the remainder is not negligible."""

    def __init__(self, remainder_norm: float, tol: float):
        super().__init__(f"remainder norm {remainder_norm:.3e} exceeds {tol:.1e}")
        self.remainder_norm = remainder_norm


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    k = len(c)
    while k > 1 and c[k - 1] == 0:
        k -= 1
    return c[:k].copy()


@dataclass(frozen=True, eq=False)
class ComplexPoly:
    coeffs: np.ndarray

    def __init__(self, coeffs: Sequence[complex] | np.ndarray):
        c = _trim(coeffs)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, zs: Sequence[complex], lead: complex = 1.0) -> "ComplexPoly":
        zs = np.asarray(zs, dtype=complex)
        if zs.size == 0:
            return cls([lead])
        return cls(lead * P.polyfromroots(zs))

    @property
    def degree(self) -> int:
        if self.is_zero:
            return -1
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __call__(self, z):
        return P.polyval(z, self.coeffs)

    def deriv(self, m: int = 1) -> "ComplexPoly":
        if m > self.degree:
            return ComplexPoly([0.0])
        return ComplexPoly(P.polyder(self.coeffs, m))

    def monic(self) -> "ComplexPoly":
        return ComplexPoly(self.coeffs / self.coeffs[-1])

    def __add__(self, other):
        return ComplexPoly(P.polyadd(self.coeffs, _coeffs(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return ComplexPoly(P.polysub(self.coeffs, _coeffs(other)))

    def __rsub__(self, other):
        return ComplexPoly(P.polysub(_coeffs(other), self.coeffs))

    def __mul__(self, other):
        return ComplexPoly(P.polymul(self.coeffs, _coeffs(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexPoly(-self.coeffs)

    def __repr__(self) -> str:
        return f"ComplexPoly({np.array2string(self.coeffs, precision=6)})"

    def roots(self) -> np.ndarray:
        return roots(self)


def _coeffs(x) -> np.ndarray:
    if isinstance(x, ComplexPoly):
        return x.coeffs
    return np.atleast_1d(np.asarray(x, dtype=complex))


def eval_with_derivs(p: ComplexPoly, z: complex, k: int) -> tuple[complex, ...]:
    """Return ``(p(z), p'(z), ..., p^(k)(z))`` by repeated Horner sweeps."""
    if k > max(p.degree, 0) + 1:
        raise ValueError("derivative order exceeds degree + 1")
    c = list(p.coeffs[::-1])  # descending
    out = []
    # synthetic division by (x - z), k+1 times; remainders are Taylor coefficients
    for j in range(k + 1):
        if not c:
            out.append(0j)
            continue
        acc = c[0]
        q = [acc]
        for a in c[1:]:
            acc = acc * z + a
            q.append(acc)
        out.append(complex(q[-1]))
        c = q[:-1]
    fact = 1.0
    for j in range(1, k + 1):
        fact *= j
        out[j] *= fact
    return tuple(out)


def _aberth(c: np.ndarray, z: np.ndarray, maxit: int = 200) -> np.ndarray:
    dc = P.polyder(c)
    n = len(z)
    for _ in range(maxit):
        pz = P.polyval(z, c)
        dpz = P.polyval(z, dc)
        ok = pz != 0
        ratio = np.zeros(n, dtype=complex)
        ratio[ok] = pz[ok] / dpz[ok]
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0  # drop the diagonal 1/1
        den = 1.0 - ratio * s
        step = np.where(den != 0, ratio / np.where(den != 0, den, 1.0), ratio)
        z = z - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(z))):
            break
    return z


def roots(p: ComplexPoly) -> np.ndarray:
    """All roots of ``p`` counted with multiplicity."""
    if p.is_zero:
        raise ValueError("the zero polynomial has no finite root set")
    if p.degree < 1:
        raise ValueError("roots need degree >= 1")
    c = p.coeffs / p.coeffs[-1]
    if p.degree == 1:
        return np.array([-c[0]])
    z0 = P.polyroots(c)
    z = _aberth(c, z0.astype(complex))
    # keep whichever estimate has the smaller residual, per root
    r0 = np.abs(P.polyval(z0, c))
    r1 = np.abs(P.polyval(z, c))
    z = np.where(np.isfinite(r1) & (r1 <= r0), z, z0)
    return z[np.lexsort((z.imag, z.real))]


def root_clusters(zs: Sequence[complex], rtol: float = 1e-7) -> list[tuple[complex, int]]:
    """Merge roots closer than ``rtol*(1+|z|)``; returns (centre, multiplicity)."""
    left = list(np.asarray(zs, dtype=complex))
    out = []
    while left:
        z = left.pop(0)
        group = [z]
        rest = []
        for w in left:
            (group if abs(w - z) < rtol * (1 + abs(z)) else rest).append(w)
        left = rest
        out.append((complex(np.mean(group)), len(group)))
    return out


def exact_quotient(num: ComplexPoly, den: ComplexPoly, tol: float = 1e-9) -> ComplexPoly:
    """Quotient ``num/den`` when the division is exact up to ``tol`` (relative)."""
    if den.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if num.degree < den.degree:
        q = ComplexPoly([0.0])
    else:
        # least squares on the convolution matrix: long division blows up by
        # |root| per step when den has roots outside the unit disk
        m = num.degree - den.degree + 1
        T = np.zeros((num.degree + 1, m), dtype=complex)
        for j in range(m):
            T[j:j + den.degree + 1, j] = den.coeffs
        q = ComplexPoly(np.linalg.lstsq(T, num.coeffs.astype(complex), rcond=None)[0])
    rem = np.linalg.norm(P.polysub(num.coeffs, P.polymul(q.coeffs, den.coeffs)))
    scale = max(num.norm(), np.finfo(float).tiny)
    if rem > tol * scale:
        raise NotDivisible(float(rem / scale), tol)
    return q
