"""Finite-n checks of the weak limits of zero counting measures.

Zeros of the Heine-Stieltjes polynomials Q_n, rescaled by 1/n, approach a unit
critical measure mu whose Cauchy transform is -sqrt(V/A).  Here the gap is
measured by the sup of |C_n - C_mu| on a fixed probe grid away from the
support, plus |Q_n|^(1/n) against exp(Re int sqrt(V/A)) and the distance of
Van Vleck zeros to the distinguished arcs.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ._parallel import ordered_map
from ._quad import align_signs, gauss01
from .electrostatics import DiscreteConfig
from .lame import HSPair, LameProblem, heun_eigenvalues, heun_spectrum
from .measures import CriticalMeasure, build_measure, cauchy_transform
from .periods import (_gamma_cuts, chebotarev_center, continue_distinguished_arc,
                      sample_V_arcs, solve_period_system)
from .qdiff import QuadDiff

__all__ = [
    "ConvergenceReport",
    "BranchLost",
    "ProbeTooClose",
    "probe_grid",
    "counting_discrepancy",
    "limit_zero",
    "limit_measure",
    "weak_limit_experiment",
    "nth_root_green",
    "nth_root_check",
    "vanvleck_accumulation",
]


class BranchLost(RuntimeError):
    pass


class ProbeTooClose(ValueError):
    pass


@dataclass
class ConvergenceReport:
    ns: list
    discrepancy: list
    probes: np.ndarray
    v_target: complex
    v_n: list
    masses: list
    occupation_error: list = dc_field(default_factory=list)
    nth_root_error: list = dc_field(default_factory=list)
    far_error: list = dc_field(default_factory=list)

    @property
    def decreasing(self) -> bool:
        return len(self.discrepancy) >= 2 and self.discrepancy[-1] < self.discrepancy[0]

    @property
    def verdict(self) -> str:
        return "decreasing" if self.decreasing else "not-decreasing"

    def to_json(self) -> dict:
        r = lambda x: round(float(x), 12)
        return {
            "n": [int(n) for n in self.ns],
            "discrepancy": [r(d) for d in self.discrepancy],
            "occupation_error": [r(d) for d in self.occupation_error],
            "nth_root_error": [r(d) for d in self.nth_root_error],
            "far_error": [r(d) for d in self.far_error],
            "v_n": [[r(v.real), r(v.imag)] for v in self.v_n],
            "v_target": [r(self.v_target.real), r(self.v_target.imag)],
            "masses": [r(m) for m in self.masses],
            "probes": [[r(z.real), r(z.imag)] for z in self.probes],
            "verdict": self.verdict,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "discrepancy", "occupation_error", "nth_root_error", "far_error", "v_re", "v_im"])
        for j, n in enumerate(self.ns):
            w.writerow([n, f"{self.discrepancy[j]:.12e}", f"{self.occupation_error[j]:.12e}",
                        f"{self.nth_root_error[j]:.12e}", f"{self.far_error[j]:.12e}",
                        f"{self.v_n[j].real:.12e}", f"{self.v_n[j].imag:.12e}"])
        return buf.getvalue()


def _support_points(m: CriticalMeasure) -> np.ndarray:
    return np.concatenate([p.geo for p in m.pieces])


def probe_grid(m: CriticalMeasure, count: int = 24, seed: int = 0) -> np.ndarray:
    """``count`` points on two circles, 1.5x and 3x the circumradius of the support."""
    pts = _support_points(m)
    c = 0.5 * (pts.real.min() + pts.real.max()) + 0.5j * (pts.imag.min() + pts.imag.max())
    rad = float(np.max(np.abs(pts - c)))
    rng = np.random.default_rng(seed)
    half = count // 2
    out = []
    for f in (1.5, 3.0):
        th = 2 * np.pi * (np.arange(half) + rng.uniform()) / half
        out.append(c + f * rad * np.exp(1j * th))
    return np.concatenate(out)


def counting_discrepancy(zeros, target: CriticalMeasure, probes, min_dist: float = 0.05) -> float:
    """max over probes of |(1/n) sum 1/(zeta_k - z) - C_mu(z)|."""
    z = zeros.points if isinstance(zeros, DiscreteConfig) else np.asarray(zeros, dtype=complex)
    probes = np.asarray(probes, dtype=complex)
    for q in probes:
        if target.distance_to_support(q) < min_dist:
            raise ProbeTooClose(f"probe {q} is within {min_dist} of the support")
        if z.size and np.min(np.abs(z - q)) < min_dist:
            raise ProbeTooClose(f"probe {q} is within {min_dist} of a zero")
    n = max(z.size, 1)
    worst = 0.0
    for q in probes:
        cn = np.sum(1.0 / (z - q)) / n
        worst = max(worst, abs(cn - cauchy_transform(target, q)))
    return float(worst)


def _target_on_arc(poles: np.ndarray, k: int, mass: float, cheb=None) -> complex:
    if mass <= 0:
        return complex(poles[k])
    arc = continue_distinguished_arc(poles, k, steps=20, cheb=cheb)
    ts, vs = arc["mass"], arc["v"]
    if mass >= arc["m_k"] - 1e-14:
        return complex(arc["vstar"])
    j = int(np.searchsorted(ts, mass))
    guess = vs[j - 1] + (vs[j] - vs[j - 1]) * (mass - ts[j - 1]) / (ts[j] - ts[j - 1])
    v, _ = solve_period_system(poles, _gamma_cuts(poles, [guess], k), [mass], [guess])
    return complex(v[0])


def limit_zero(poles, theta: Sequence[float]) -> complex:
    """Limit Van Vleck zero for collinear poles and occupation ratio theta = (theta_0, theta_1).

    theta_0 is the fraction of zeros between the first two poles.  If it stays
    below the Chebotarev mass of [a_0, v*] the zero lies on the distinguished
    arc from a_0, otherwise on the one from a_2 with mass 1 - theta_0.
    """
    poles = np.asarray(poles, dtype=complex)
    order = np.argsort(poles.real)
    a = poles[order]
    cheb = chebotarev_center(a)
    m0 = cheb.edge_mass("a0", "v0")
    if theta[0] <= m0:
        return _target_on_arc(a, 0, float(theta[0]), cheb)
    return _target_on_arc(a, 2, float(1.0 - theta[0]), cheb)


def limit_measure(poles, v: complex) -> CriticalMeasure:
    qd = QuadDiff.from_roots(poles, [v])
    if qd.degenerate:
        qd = qd.reduced()
    return build_measure(qd)


def _arc_occupation(m: CriticalMeasure, zeros: np.ndarray) -> np.ndarray:
    counts = np.zeros(len(m.arcs))
    for z in zeros:
        d = []
        for arc in m.arcs:
            g = arc.geo
            a, b = g[:-1], g[1:]
            dd = b - a
            tau = np.clip(((z - a) * dd.conjugate()).real / np.maximum((dd * dd.conjugate()).real, 1e-300), 0, 1)
            d.append(np.min(np.abs(z - (a + tau * dd))))
        counts[int(np.argmin(d))] += 1
    return counts / max(len(zeros), 1)


def _nearest_pair(prob: LameProblem, target: complex) -> HSPair:
    vs = heun_eigenvalues(prob)
    v = vs[int(np.argmin(np.abs(vs - target)))]
    pairs = heun_spectrum(prob)
    best = min(pairs, key=lambda pp: abs(pp.v[0] - v))
    return best


def weak_limit_experiment(poles, residues, ns: Sequence[int], theta: Sequence[float] | None = None,
                          target: complex | None = None, seed: int = 0) -> ConvergenceReport:
    """Track the Heun pair nearest the limit zero across ``ns`` and measure the gap to mu."""
    poles = np.asarray(poles, dtype=complex)
    if len(poles) != 3:
        raise ValueError("weak-limit experiments are set up for three poles")
    if target is None:
        if theta is None:
            raise ValueError("need an occupation ratio or a target zero")
        target = limit_zero(poles, theta)
    mu = limit_measure(poles, target)
    probes = probe_grid(mu, seed=seed)
    diam = max(abs(a - b) for a in poles for b in poles)
    far = 1e3 * np.exp(0.25j * np.pi)

    def one(n):
        pair = _nearest_pair(LameProblem(poles, residues, n), target)
        return pair

    pairs = ordered_map(one, ns)
    v_n, disc, occ, nth, far_err = [], [], [], [], []
    for n, pair in zip(ns, pairs):
        v = complex(pair.v[0])
        if v_n and abs(v - v_n[-1]) > 0.1 * diam:
            raise BranchLost(f"nearest zero jumped by {abs(v - v_n[-1]):.3g} at n={n}")
        v_n.append(v)
        disc.append(counting_discrepancy(pair.zeros, mu, probes))
        occ.append(float(np.max(np.abs(_arc_occupation(mu, pair.zeros) - mu.masses[:len(mu.arcs)]))))
        errs = nth_root_check(pair, mu, probes, detail=True)
        nth.append(float(np.max(errs)))
        far_err.append(float(nth_root_check(pair, mu, [far])))
    return ConvergenceReport(list(ns), disc, probes, complex(target), v_n, list(mu.masses), occ, nth, far_err)


def _ray_crosses(m: CriticalMeasure, z: complex, Z: complex) -> bool:
    from .measures import _count_crossings
    return any(_count_crossings(z, Z, p.geo) for p in m.pieces)


def nth_root_green(m: CriticalMeasure, z: complex, anchor: float = 1e3) -> float:
    """Re int^z sqrt(R) normalised so that it minus log|z| vanishes at infinity.

    The integral of sqrt(R) - 1/t runs along the ray from z out to radius
    ``anchor`` and from there to infinity through t = Z/u, u in (0, 1].
    """
    z = complex(z)
    qd = m.qd
    if m.distance_to_support(z) < 1e-12 * max(1.0, qd.scale):
        raise ProbeTooClose("probe lies on the support")
    r0 = abs(z)
    e = z / r0 if r0 > 0 else 1.0
    Z = e * max(anchor, r0)
    if r0 < anchor and _ray_crosses(m, z, Z):
        raise ProbeTooClose("the ray from the probe to infinity crosses the support")
    x, w = gauss01(16)
    # tail: integrand (sqrt R(Z/u) - u/Z) Z/u^2 stays bounded as u -> 0
    u = x[::-1]
    t_far = Z / u
    g_far = np.sqrt(qd.R(t_far))
    g_far = np.where((g_far * t_far).real < 0, -g_far, g_far)
    tail = ((g_far - 1.0 / t_far) * Z / u**2 * w[::-1]).sum()
    total = 0j
    if r0 < anchor:
        edges = [r0]
        while edges[-1] < anchor:
            edges.append(min(anchor, max(edges[-1] * 1.5, edges[-1] + 0.05)))
        a = np.array(edges[:-1])
        d = np.diff(edges)
        r = (a[:, None] + d[:, None] * x).ravel()
        wr = (d[:, None] * w).ravel()
        t = e * r
        gZ = g_far[0]
        g = align_signs(np.sqrt(qd.R(t[::-1])), gZ)[::-1]
        total = ((g - 1.0 / t) * e * wr).sum()
    return float(math.log(r0) - (total + tail).real)


def nth_root_check(pair: HSPair, target: CriticalMeasure, probes, detail: bool = False):
    """Relative error of |Q_n(z)|^(1/n) against exp(nth_root_green(z))."""
    zeros = np.asarray(pair.zeros, dtype=complex)
    n = zeros.size
    out = []
    for q in np.asarray(probes, dtype=complex):
        lq = float(np.sum(np.log(np.abs(q - zeros)))) / n
        out.append(abs(math.expm1(lq - nth_root_green(target, q))))
    out = np.array(out)
    return out if detail else float(out.max())


def _in_hull(v: complex, poles: np.ndarray, tol: float = 1e-8) -> bool:
    a = np.asarray(poles, dtype=complex)
    d = a - a[0]
    k = int(np.argmax(np.abs(d)))
    e = d[k] / abs(d[k])
    if np.all(np.abs((d * np.conj(e)).imag) < tol):
        x = ((v - a[0]) * np.conj(e))
        s = (d * np.conj(e)).real
        return abs(x.imag) < tol and s.min() - tol <= x.real <= s.max() + tol
    # convex polygon through sorted angles about the centroid
    c = a.mean()
    ring = a[np.argsort(np.angle(a - c))]
    for p0, p1 in zip(ring, np.roll(ring, -1)):
        cross = ((p1 - p0).conjugate() * (v - p0)).imag
        if cross < -tol * abs(p1 - p0):
            return False
    return True


def _polyline_distance(v: complex, lines: list) -> float:
    best = math.inf
    for pts in lines:
        if len(pts) == 1:
            best = min(best, abs(v - pts[0]))
            continue
        a, b = pts[:-1], pts[1:]
        d = b - a
        tau = np.clip(((v - a) * d.conjugate()).real / np.maximum((d * d.conjugate()).real, 1e-300), 0, 1)
        best = min(best, float(np.min(np.abs(v - (a + tau * d)))))
    return best


def vanvleck_accumulation(poles, residues, ns: Sequence[int], steps: int = 40) -> dict:
    """Distances of all Van Vleck zeros to the sampled distinguished arcs, per degree.

    The arcs are only known to contain the limit points; that every limit point
    lies on them is a conjecture, so the decrease reported here is a numerical
    consistency check.
    """
    poles = np.asarray(poles, dtype=complex)
    arcs = sample_V_arcs(poles, steps=steps)
    lines = [np.asarray(a["v"]) for a in arcs]

    def one(n):
        return np.asarray(heun_eigenvalues(LameProblem(poles, residues, n)))

    all_v = ordered_map(one, ns)
    rows = []
    for n, vs in zip(ns, all_v):
        dists = [_polyline_distance(v, lines) for v in vs]
        rows.append({
            "n": int(n),
            "max_distance": float(max(dists)),
            "in_hull": bool(all(_in_hull(v, poles) for v in vs)),
            "v": vs,
        })
    maxd = [r["max_distance"] for r in rows]
    return {"rows": rows, "arcs": lines, "decreasing": maxd[-1] < maxd[0],
            "label": "conjecture check: limit points of Van Vleck zeros on the distinguished arcs"}
