"""Independent reference computations.

Nothing here imports stieltjes_lab.  Each function reaches its answer by a
different route than the package: closed forms, textbook recurrences, plain
double loops or scipy integrators.
"""
from __future__ import annotations

import cmath
import math

import numpy as np
from scipy import integrate, optimize, special


def legendre_zeros(n: int) -> np.ndarray:
    """Zeros of P_n as eigenvalues of the symmetric three-term-recurrence matrix."""
    k = np.arange(1, n)
    off = k / np.sqrt(4.0 * k * k - 1.0)
    J = np.diag(off, 1) + np.diag(off, -1)
    return np.sort(np.linalg.eigvalsh(J))


def jacobi_zeros(n: int, rho_left: float, rho_right: float) -> np.ndarray:
    """Zeros of the Jacobi polynomial whose charges sit at -1 (rho_left) and +1 (rho_right)."""
    x, _ = special.roots_jacobi(n, rho_right - 1.0, rho_left - 1.0)
    return np.sort(x)


def energy(points, poles, residues) -> float:
    """sum_{i != j} log 1/|z_i - z_j| + 2 sum_k Re Phi(z_k), Phi = -(1/2) sum rho log(z - a)."""
    pts = [complex(z) for z in points]
    e = 0.0
    for i, zi in enumerate(pts):
        for j, zj in enumerate(pts):
            if i != j:
                e -= math.log(abs(zi - zj))
    for z in pts:
        for a, r in zip(poles, residues):
            e -= (complex(r) * cmath.log(z - complex(a))).real
    return e


def energy_gradient_fd(points, poles, residues, h: float = 1e-5) -> np.ndarray:
    """2 dE/dzeta_k (Wirtinger) from central differences in x and y."""
    z = np.asarray(points, dtype=complex)
    out = np.empty(z.size, dtype=complex)
    for k in range(z.size):
        def f(dx, dy):
            w = z.copy()
            w[k] += dx + 1j * dy
            return energy(w, poles, residues)
        ex = (f(h, 0) - f(-h, 0)) / (2 * h)
        ey = (f(0, h) - f(0, -h)) / (2 * h)
        out[k] = ex - 1j * ey
    return out


def functional(points, poles, residues, h) -> complex:
    """sum_{i != j} (h(x_i) - h(x_j))/(x_i - x_j) - 2 sum Phi'(x) h(x) by plain loops."""
    pts = [complex(z) for z in points]
    s = 0j
    for i, x in enumerate(pts):
        for j, y in enumerate(pts):
            if i != j:
                s += (h(x) - h(y)) / (x - y)
    for x in pts:
        dphi = -0.5 * sum(complex(r) / (x - complex(a)) for a, r in zip(poles, residues))
        s -= 2 * dphi * h(x)
    return s


def arcsine_cauchy(z: complex) -> complex:
    """int dmu(x)/(x - z) for the arcsine law on [-1, 1]; behaves like -1/z at infinity."""
    z = complex(z)
    return -1.0 / (cmath.sqrt(z - 1) * cmath.sqrt(z + 1))


def arcsine_potential(z: complex) -> float:
    """int log 1/|z - x| dmu(x) = log 2 - log|z + sqrt(z^2 - 1)|, outer branch."""
    z = complex(z)
    s = cmath.sqrt(z - 1) * cmath.sqrt(z + 1)
    w = z + s
    if abs(w) < 1:
        w = z - s
    return math.log(2.0) - math.log(abs(w))


def arcsine_sample(n: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """n points with the arcsine law via inverse CDF, x = -cos(pi u)."""
    if rng is None:
        u = (np.arange(n) + 0.5) / n
    else:
        u = rng.uniform(size=n)
    return -np.cos(np.pi * u)


def equilateral_branch_mass() -> float:
    """(1/pi) int_0^1 |sqrt(t/(t^3 - 1))| dt, one Chebotarev branch of the unit triangle."""
    val, _ = integrate.quad(lambda t: math.sqrt(t / (1 - t ** 3)), 0, 1, limit=200)
    return val / math.pi


def real_interval_mass(a: float, b: float, v: float, poles) -> float:
    """(1/pi) int_a^b sqrt|(t - v)/A(t)| dt for real data."""
    def f(t):
        A = np.prod([t - p for p in poles])
        return math.sqrt(abs((t - v) / A))
    pts = sorted({x for x in list(poles) + [v] if a < x < b})
    val, _ = integrate.quad(f, a, b, points=pts or None, limit=400)
    return val / math.pi


def limit_zero_real(poles, theta0: float) -> float:
    """v in (a_0, a_1) whose interval [a_0, v] carries mass theta0 (brentq)."""
    a0, a1 = sorted(poles)[:2]

    def g(v):
        return real_interval_mass(a0, v, v, poles) - theta0
    return optimize.brentq(g, a0 + 1e-9, a1 - 1e-9, xtol=1e-14)


def heun_degree_one(poles, residues) -> list[tuple[complex, complex]]:
    """(v, zeta) for n = 1: A*0 + B - lambda (z - v)(z - zeta) = 0 forces {v, zeta} = roots of B."""
    poles = [complex(a) for a in poles]
    B = np.zeros(len(poles), dtype=complex)
    for k, r in enumerate(residues):
        others = [a for j, a in enumerate(poles) if j != k]
        B = B + complex(r) * np.poly(others)
    r1, r2 = np.roots(B)
    return [(r1, r2), (r2, r1)]


def green_segment(z: complex) -> float:
    """log|z + sqrt(z^2 - 1)| for [-1, 1]."""
    return math.log(2.0) - arcsine_potential(z)
