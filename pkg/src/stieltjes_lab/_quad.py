"""Quadrature along straight segments and polylines in the complex plane."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre


@lru_cache(maxsize=None)
def gauss01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def segment_rule(z0: complex, z1: complex, sing0: bool = False, sing1: bool = False,
                 panels: int = 1, m: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Nodes ``t`` and weights ``dt`` so that sum f(t) dt ~ int_{z0}^{z1} f(t) dt.

    ``sing0``/``sing1`` mark square-root type endpoint behaviour (a simple
    zero or simple pole of R in sqrt(R)); the substitution t = e + (.)s^2
    turns such integrands smooth.  Nodes are returned ordered from z0 to z1.
    """
    x, w = gauss01(m)
    edges = np.linspace(0.0, 1.0, panels + 1)
    s = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
    ws = (np.diff(edges)[:, None] * w[None, :]).ravel()
    d = z1 - z0
    if sing0 and sing1:
        zm = 0.5 * (z0 + z1)
        t0, w0 = segment_rule(z0, zm, True, False, panels, m)
        t1, w1 = segment_rule(zm, z1, False, True, panels, m)
        return np.concatenate([t0, t1]), np.concatenate([w0, w1])
    if sing0:
        return z0 + d * s**2, 2.0 * s * d * ws
    if sing1:
        # substitute from the far end and reverse to keep the z0 -> z1 order
        t = z1 - d * s**2
        dt = 2.0 * s * d * ws
        return t[::-1], dt[::-1]
    return z0 + d * s, d * ws


def align_signs(vals: np.ndarray, ref: complex | None = None) -> np.ndarray:
    """Flip signs along the last axis so consecutive values vary continuously.

    ``vals`` holds values of a square root sampled along a path; each is
    defined up to sign.  If ``ref`` is given the first value is aligned with it.
    """
    v = np.asarray(vals, dtype=complex)
    if v.size == 0:
        return v.copy()
    # c_k = c_{k-1} * sign Re(v_k conj v_{k-1}) keeps neighbours within 90 degrees
    prod = (v[..., 1:] * np.conj(v[..., :-1])).real
    sig = np.where(prod < 0, -1.0, 1.0)
    first = np.ones(v.shape[:-1] + (1,))
    if ref is not None:
        first = np.where((v[..., :1] * np.conj(ref)).real < 0, -1.0, 1.0)
    c = np.concatenate([first, first * np.cumprod(sig, axis=-1)], axis=-1)
    return v * c


def point_segment_distance(p: complex, a: complex, b: complex) -> tuple[float, float]:
    """Distance from p to segment [a, b] and the segment parameter of the foot."""
    d = b - a
    L2 = (d * d.conjugate()).real
    if L2 == 0:
        return abs(p - a), 0.0
    t = ((p - a) * d.conjugate()).real / L2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d)), t


def winding_number(poly: np.ndarray, z: complex) -> int:
    """Winding number of the closed polygon ``poly`` (last point joined to first)."""
    w = np.asarray(poly, dtype=complex) - z
    ang = np.angle(np.roll(w, -1) / w)
    return int(np.rint(ang.sum() / (2 * np.pi)))


def segments_intersect(p1, p2, q1, q2) -> bool:
    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)
