"""Continuous critical measures carried by critical trajectories.

On every support arc the measure is

    d mu = (1/(pi i)) sqrt(R)_right(t) dt,

the right boundary value of the branch of sqrt(R) with z*sqrt(R) -> 1 at
infinity.  This form is an analytic differential along the arc, so every
integral of an analytic kernel against mu can be taken along the chords of
the traced polyline: only the vertices have to lie on the true trajectory.
The Cauchy transform C(z) = int dmu(x)/(x - z) then equals -sqrt(R) off the
support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ._quad import gauss01
from .qdiff import CriticalGraph, QuadDiff, Trajectory, critical_graph, omega_length

__all__ = [
    "SupportArc",
    "LoopPiece",
    "CriticalMeasure",
    "NotClosed",
    "ProximityError",
    "Disagreement",
    "build_measure",
    "cauchy_transform",
    "potential",
    "s_property_check",
    "positivity",
    "bent",
    "balayage_example_fixture",
    "measure_json",
]


class NotClosed(ValueError):
    pass


class ProximityError(ValueError):
    pass


class Disagreement(RuntimeError):
    def __init__(self, msg: str, certificate: dict):
        super().__init__(msg)
        self.certificate = certificate


_M = 16


def _phi(s, sing0: bool, sing1: bool):
    """Chord parameter map and its derivative for square-root endpoint grading."""
    if sing0:
        return s * s, 2 * s
    if sing1:
        return 1 - (1 - s) ** 2, 2 * (1 - s)
    return s, np.ones_like(s)


def _phi_inv(tau: float, sing0: bool, sing1: bool) -> float:
    if sing0:
        return math.sqrt(max(tau, 0.0))
    if sing1:
        return 1 - math.sqrt(max(1 - tau, 0.0))
    return tau


def _params(z0: complex, z1: complex, sing0: bool, sing1: bool, zq: complex | None,
            m: int = _M) -> tuple[np.ndarray, np.ndarray]:
    """Parameters tau in [0, 1] and weights dtau for one chord, graded toward zq."""
    if sing0 and sing1:
        t0, w0 = _params(z0, 0.5 * (z0 + z1), True, False, zq, m)
        t1, w1 = _params(0.5 * (z0 + z1), z1, False, True, zq, m)
        return np.concatenate([0.5 * t0, 0.5 + 0.5 * t1]), np.concatenate([0.5 * w0, 0.5 * w1])
    x, w = gauss01(m)
    edges = [0.0, 1.0]
    d = z1 - z0
    L = abs(d)
    if zq is not None and L > 0:
        tau = ((zq - z0) * d.conjugate()).real / (L * L)
        tau_c = min(1.0, max(0.0, tau))
        dist = abs(zq - (z0 + tau_c * d)) / L
        if dist < 3.0:
            sc = _phi_inv(tau_c, sing0, sing1)
            h = max(dist, 1e-12, 1e-10 * (abs(zq) + 1.0) / L)
            k = 0
            while h * 2 ** k < 1.0 and k < 60:
                edges += [sc - h * 2 ** k, sc + h * 2 ** k]
                k += 1
            edges = sorted({min(1.0, max(0.0, e)) for e in edges})
    edges = np.array(edges)
    widths = np.diff(edges)
    keep = widths > 0
    a, wd = edges[:-1][keep], widths[keep]
    s = (a[:, None] + wd[:, None] * x[None, :]).ravel()
    ws = (wd[:, None] * w[None, :]).ravel()
    tau, dphi = _phi(s, sing0, sing1)
    return tau, ws * dphi


def _decimate(points: np.ndarray, crit: np.ndarray, scale: float) -> np.ndarray:
    """Drop vertices while chords stay short relative to the distance to critical points."""
    keep = [0]
    acc = 0.0
    for i in range(1, len(points) - 1):
        acc += abs(points[i] - points[i - 1])
        d = np.min(np.abs(crit - points[i])) if crit.size else scale
        if acc >= min(0.02 * scale, 0.2 * d):
            keep.append(i)
            acc = 0.0
    keep.append(len(points) - 1)
    return points[keep]


@dataclass(eq=False)
class SupportArc:
    """One support arc: polyline, endpoint labels and the sqrt(R) branch at vertices."""

    qd: QuadDiff
    points: np.ndarray
    ends: tuple
    crit_ends: tuple
    g: np.ndarray  # sqrt(R) at vertices, continuous along the arc, right boundary value
    omega: float = 0.0
    geometry: np.ndarray | None = None  # displaced vertices for transported (bent) copies

    @property
    def n_chords(self) -> int:
        return len(self.points) - 1

    def _ref(self, i: int) -> complex:
        if i == 0 and self.crit_ends[0]:
            return self.g[1]
        if i + 1 == self.n_chords and self.crit_ends[1]:
            return self.g[i]
        return self.g[i] if np.isfinite(self.g[i]) and self.g[i] != 0 else self.g[i + 1]

    def chord_rule(self, i: int, zq: complex | None = None):
        """Nodes and complex weights of chord i."""
        t, g, dt, nodes = self.chord_parts(i, zq)
        W = g * dt / (np.pi * 1j)
        return (t, W) if self.geometry is None else (nodes, W.real.astype(complex))

    def chord_parts(self, i: int, zq: complex | None = None, lo: float = 0.0, hi: float = 1.0):
        """Nodes t, branch values g, increments dt and displayed node positions of chord i."""
        z0, z1 = self.points[i], self.points[i + 1]
        s0 = self.crit_ends[0] and i == 0 and lo == 0.0
        s1 = self.crit_ends[1] and i + 1 == self.n_chords and hi == 1.0
        a, b = z0 + (z1 - z0) * lo, z0 + (z1 - z0) * hi
        geo = self.geometry
        ga, gb = (a, b) if geo is None else (geo[i] + (geo[i + 1] - geo[i]) * lo,
                                              geo[i] + (geo[i + 1] - geo[i]) * hi)
        tau, dtau = _params(ga, gb, s0, s1, zq)
        t = a + (b - a) * tau
        dt = (b - a) * dtau
        g = np.sqrt(self.qd.R(t))
        ref = self._ref(i)
        g = np.where((g * np.conj(ref)).real < 0, -g, g)
        nodes = t if geo is None else ga + (gb - ga) * tau
        return t, g, dt, nodes

    def rule(self, zq: complex | None = None) -> tuple[np.ndarray, np.ndarray]:
        ts, ws = [], []
        for i in range(self.n_chords):
            t, W = self.chord_rule(i, zq)
            ts.append(t)
            ws.append(W)
        return np.concatenate(ts), np.concatenate(ws)

    @property
    def geo(self) -> np.ndarray:
        return self.points if self.geometry is None else self.geometry

    def mass(self) -> float:
        return float(self.rule()[1].sum().real)


@dataclass(eq=False)
class LoopPiece:
    """A closed support curve carried by fixed nodes with real weights."""

    nodes: np.ndarray
    weights: np.ndarray

    def rule(self, zq=None):
        return self.nodes, self.weights.astype(complex)

    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def geo(self) -> np.ndarray:
        return np.concatenate([self.nodes, self.nodes[:1]])


@dataclass(eq=False)
class CriticalMeasure:
    qd: QuadDiff
    arcs: list
    loops: list = dc_field(default_factory=list)
    trajectories: list = dc_field(default_factory=list)
    meta: dict = dc_field(default_factory=dict)

    @property
    def pieces(self) -> list:
        return list(self.arcs) + list(self.loops)

    @property
    def masses(self) -> np.ndarray:
        return np.array([p.mass() for p in self.pieces])

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    @property
    def support(self) -> list:
        return self.trajectories

    def quadrature(self, zq: complex | None = None) -> tuple[np.ndarray, np.ndarray]:
        ts, ws = zip(*(p.rule(zq) for p in self.pieces))
        return np.concatenate(ts), np.concatenate(ws)

    def density(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(arc length, signed density (1/pi)|sqrt R|) at the interior vertices of arc k."""
        arc = self.arcs[k]
        pts = arc.points
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
        sl = slice(1 if arc.crit_ends[0] else 0, len(pts) - 1 if arc.crit_ends[1] else len(pts))
        dirs = np.gradient(pts)
        val = (arc.g * dirs / (np.pi * 1j)).real
        dens = np.sign(val) * np.abs(arc.g) / np.pi
        return s[sl], dens[sl]

    def signs(self) -> np.ndarray:
        return np.array([np.sign(a.mass()) for a in self.arcs])

    def distance_to_support(self, z: complex) -> float:
        best = math.inf
        for p in self.pieces:
            g = p.geo
            a, b = g[:-1], g[1:]
            d = b - a
            L2 = np.maximum((d * d.conjugate()).real, 1e-300)
            tau = np.clip(((z - a) * d.conjugate()).real / L2, 0.0, 1.0)
            best = min(best, float(np.min(np.abs(z - (a + tau * d)))))
        return best


# -- construction ------------------------------------------------------------

def _count_crossings(p1: complex, p2: complex, poly: np.ndarray) -> int:
    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    q1, q2 = poly[:-1], poly[1:]
    d1 = cross(q2 - q1, p1 - q1)
    d2 = cross(q2 - q1, p2 - q1)
    d3 = cross(p2 - p1, q1 - p1)
    d4 = cross(p2 - p1, q2 - p1)
    return int(np.count_nonzero((d1 * d2 < 0) & (d3 * d4 < 0)))


def _continued_sqrt(qd: QuadDiff, target: complex, avoid: Sequence[np.ndarray]) -> complex:
    """sqrt(R)(target) for the branch on C minus the polylines ``avoid`` with z sqrt(R) -> 1."""
    crit = np.array([c for _, c, _ in qd.critical_points()])
    sc = max(qd.scale, 1.0)
    far = 1e3 * sc
    best = None
    for j in range(24):
        th = 2 * np.pi * (j + 0.5) / 24
        Z = target + far * np.exp(1j * th)
        d = Z - target
        L2 = (d * d.conjugate()).real
        tau = np.clip(((crit - target) * d.conjugate()).real / L2, 0, 1)
        clear = float(np.min(np.abs(crit - (target + tau * d)))) if crit.size else far
        if best is None or clear > best[0]:
            best = (clear, Z)
    Z = best[1]
    # continuation along the straight path Z -> target with steps below the local scale
    g = complex(np.sqrt(qd.r(Z)))
    if (g * Z).real < 0:
        g = -g
    z = Z
    while True:
        dist_c = float(np.min(np.abs(crit - z))) if crit.size else far
        step = 0.05 * max(min(dist_c, abs(z - target)), 1e-14)
        if abs(target - z) <= step:
            z_new = target
        else:
            z_new = z + step * (target - z) / abs(target - z)
        gn = complex(np.sqrt(qd.r(z_new)))
        if (gn * g.conjugate()).real < 0:
            gn = -gn
        g, z = gn, z_new
        if z == target:
            break
    crossings = 0
    for poly in avoid:
        crossings += _count_crossings(Z, target, np.asarray(poly))
    return -g if crossings % 2 else g


def _support_arc(qd: QuadDiff, traj: Trajectory) -> SupportArc:
    crit = np.array([c for _, c, _ in qd.critical_points()])
    pts = _decimate(np.asarray(traj.points), crit, max(qd.scale, 1e-12))
    labs = traj.endpoints
    crit_ends = (labs[0] is not None, labs[1] is not None)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sqrt(qd.R(pts))
    inner = slice(1 if crit_ends[0] else 0, len(pts) - 1 if crit_ends[1] else len(pts))
    gi = g[inner]
    # continuity along the arc
    prod = (gi[1:] * np.conj(gi[:-1])).real
    sig = np.concatenate([[1.0], np.cumprod(np.where(prod < 0, -1.0, 1.0))])
    g[inner] = gi * sig
    if crit_ends[0]:
        g[0] = g[1]
    if crit_ends[1]:
        g[-1] = g[-2]
    return SupportArc(qd, pts, labs, crit_ends, g, omega=float(traj.omega_length))


def _fix_signs(qd: QuadDiff, arcs: list) -> None:
    polys = [a.points for a in arcs]
    for arc in arcs:
        i = len(arc.points) // 2
        P = arc.points[i]
        tan = arc.points[i + 1] - arc.points[i - 1]
        tan /= abs(tan)
        crit = np.array([c for _, c, _ in qd.critical_points()])
        eps = 1e-6 * float(np.min(np.abs(crit - P)))
        G = _continued_sqrt(qd, P - 1j * eps * tan, polys)
        if (arc.g[i] * np.conj(G)).real < 0:
            arc.g = -arc.g


def build_measure(qd: QuadDiff, graph: CriticalGraph | None = None, budget: float = 50.0) -> CriticalMeasure:
    """The unit critical measure of a closed differential, supported on its critical arcs.

    Loops through a zero (closed critical trajectories) carry no mass; every
    other critical trajectory is a support arc.
    """
    graph = graph or critical_graph(qd, budget=budget)
    if not graph.closed:
        raise NotClosed("differential is not closed within the tracing budget")
    trajs = [t for t in graph.trajectories if t.endpoints[0] != t.endpoints[1]]
    if not trajs:
        raise NotClosed("no critical arc joins two distinct critical points")
    arcs = [_support_arc(qd, t) for t in trajs]
    _fix_signs(qd, arcs)
    m = CriticalMeasure(qd, arcs, trajectories=trajs)
    m.meta["kappa"] = kappa(m)
    return m


def bent(m: CriticalMeasure, amp: float = 1e-2) -> CriticalMeasure:
    """Copy of ``m`` transported onto arcs displaced sideways by up to ``amp``."""
    out = []
    for arc in m.arcs:
        pts = arc.points
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(pts)))])
        tan = np.gradient(pts)
        tan = tan / np.abs(tan)
        geo = pts + amp * np.sin(np.pi * s / s[-1]) * 1j * tan
        out.append(SupportArc(arc.qd, pts, arc.ends, arc.crit_ends, arc.g, arc.omega, geometry=geo))
    return CriticalMeasure(m.qd, out, list(m.loops), m.trajectories, dict(m.meta))


# -- transforms ---------------------------------------------------------------

def _near_vertex(m: CriticalMeasure, z: complex, tol: float):
    best = (math.inf, None, None)
    for k, arc in enumerate(m.arcs):
        d = np.abs(arc.geo - z)
        i = int(np.argmin(d))
        if d[i] < best[0]:
            best = (float(d[i]), k, i)
    return best if best[0] <= tol else None


def _insert_vertex(arc: SupportArc, z: complex) -> tuple[SupportArc, int]:
    a, b = arc.points[:-1], arc.points[1:]
    d = b - a
    tau = np.clip(((z - a) * d.conjugate()).real / np.maximum((d * d.conjugate()).real, 1e-300), 0, 1)
    i = int(np.argmin(np.abs(z - (a + tau * d))))
    g = complex(np.sqrt(arc.qd.r(z)))
    ref = arc._ref(i)
    if (g * np.conj(ref)).real < 0:
        g = -g
    pts = np.insert(arc.points, i + 1, z)
    gg = np.insert(arc.g, i + 1, g)
    return SupportArc(arc.qd, pts, arc.ends, arc.crit_ends, gg, arc.omega), i + 1


def _split_rules(arc: SupportArc, i: int):
    """Rules of the two halves of an arc split at vertex i, each graded toward the vertex."""
    z = arc.points[i]
    left = [arc.chord_rule(j, z) for j in range(i)]
    right = [arc.chord_rule(j, z) for j in range(i, arc.n_chords)]
    cat = lambda parts: (np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, complex),
                         np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, complex))
    return cat(left), cat(right)


def _tangent(qd: QuadDiff, arc: SupportArc, i: int) -> complex:
    r = qd.r(arc.points[i])
    u = np.sqrt(np.conj(-r) / abs(r))
    chord = arc.points[i + 1] - arc.points[i - 1]
    return u if (u * np.conj(chord)).real > 0 else -u


def cauchy_transform(m: CriticalMeasure, z: complex, pv: bool = False, tol: float = 1e-9) -> complex:
    """int dmu(x)/(x - z).  With ``pv`` and z on a support arc, the principal value."""
    z = complex(z)
    sc = max(m.qd.scale, 1.0)
    d = m.distance_to_support(z)
    if d > tol * sc:
        t, W = m.quadrature(z)
        return complex((W / (t - z)).sum())
    if not pv:
        raise ProximityError(f"z is {d:.1e} from the support; use pv=True on the support")
    hit = _near_vertex(m, z, tol * sc)
    if hit is None:
        raise ProximityError("principal value needs a support vertex")
    _, k, i = hit
    arc = m.arcs[k]
    if i == 0 or i == len(arc.points) - 1:
        raise ProximityError("principal value at an arc endpoint")
    x0 = arc.points[i]
    g0 = arc.g[i]
    parts = [arc.chord_parts(j, x0) for j in range(arc.n_chords)]
    t = np.concatenate([p[0] for p in parts])
    gt = np.concatenate([p[1] for p in parts])
    dt = np.concatenate([p[2] for p in parts])
    reg = ((gt - g0) / (t - x0) * dt).sum()
    u = _tangent(m.qd, arc, i)
    e1, e2 = arc.points[0], arc.points[-1]
    fwd = np.unwrap(np.concatenate([[np.angle(u)], np.angle(arc.points[i + 1:] - x0)]))
    bwd = np.unwrap(np.concatenate([[np.angle(u) + np.pi], np.angle(arc.points[:i][::-1] - x0)]))
    delta = fwd[-1] - fwd[0]
    delta_b = bwd[-1] - bwd[0]
    pv_log = math.log(abs(e2 - x0)) - math.log(abs(e1 - x0)) + 1j * (delta - delta_b)
    own = (reg + g0 * pv_log) / (np.pi * 1j)
    rest = 0j
    for j, p in enumerate(m.pieces):
        if j == k:
            continue
        tt, WW = p.rule(x0)
        rest += (WW / (tt - x0)).sum()
    return complex(own + rest)


def _log_sum(t: np.ndarray, W: np.ndarray, z: complex) -> float:
    """Re int Log(z - t) dmu along ordered nodes (argument unwrapped along the path)."""
    if t.size == 0:
        return 0.0
    w = z - t
    arg = np.unwrap(np.angle(w))
    return float((np.log(np.abs(w)) * W.real - arg * W.imag).sum())


def potential(m: CriticalMeasure, z: complex, tol: float = 1e-9) -> float:
    """U(z) = int log(1/|z - x|) dmu(x); on the support the log singularity is split out."""
    z = complex(z)
    sc = max(m.qd.scale, 1.0)
    d = m.distance_to_support(z)
    total = 0.0
    if d > tol * sc:
        for p in m.pieces:
            t, W = p.rule(z)
            total += _log_sum(t, W, z)
        return -total
    hit = _near_vertex(m, z, tol * sc)
    k = None
    if hit is not None:
        _, k, i = hit
        arc = m.arcs[k]
    else:
        for kk, arc0 in enumerate(m.arcs):
            if m.distance_to_support(z) <= tol * sc:
                g = arc0.geo
                a, b = g[:-1], g[1:]
                dd = b - a
                tau = np.clip(((z - a) * dd.conjugate()).real / np.maximum((dd * dd.conjugate()).real, 1e-300), 0, 1)
                if np.min(np.abs(z - (a + tau * dd))) <= tol * sc:
                    k = kk
                    break
        arc, i = _insert_vertex(m.arcs[k], z)
    z = arc.points[i]
    (tl, Wl), (tr, Wr) = _split_rules(arc, i)
    total += _log_sum(tl[::-1], Wl[::-1], z) + _log_sum(tr, Wr, z)
    for j, p in enumerate(m.pieces):
        if j == k:
            continue
        t, W = p.rule(z)
        total += _log_sum(t, W, z)
    return -total


def kappa(m: CriticalMeasure, radius: float = 1e4) -> float:
    """-lim z C(z), fitted on a far circle."""
    zs = radius * max(m.qd.scale, 1.0) * np.exp(2j * np.pi * np.arange(8) / 8)
    t, W = m.quadrature(None)  # far from the support, no grading needed
    vals = -zs * (W[None, :] / (t[None, :] - zs[:, None])).sum(axis=1)
    return float(np.mean(vals).real)


def s_property_check(m: CriticalMeasure, points_per_arc: int = 20, h: float = 1e-3) -> dict:
    """Mismatch of the two one-sided normal derivatives of U at regular support points.

    With D(h) = (U(x0 + h n) - U(x0))/h extrapolated as 2 D(h/2) - D(h) on each
    side, the difference of the sides is 4 (U(+h/2) - U(-h/2))/h - (U(+h) - U(-h))/h;
    U(x0) cancels.
    """
    worst = 0.0
    rows = []
    for k, arc in enumerate(m.arcs):
        geo = arc.geo
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(geo)))])
        for j in range(points_per_arc):
            target = s[-1] * (0.05 + 0.9 * (j + 0.5) / points_per_arc)
            i = int(np.clip(np.searchsorted(s, target), 1, len(geo) - 2))
            x0 = geo[i]
            tan = geo[i + 1] - geo[i - 1]
            n = 1j * tan / abs(tan)
            up = [potential(m, x0 + f * h * n) for f in (0.5, 1.0)]
            dn = [potential(m, x0 - f * h * n) for f in (0.5, 1.0)]
            mis = abs(4 * (up[0] - dn[0]) / h - (up[1] - dn[1]) / h)
            rows.append((k, complex(x0), mis))
            worst = max(worst, mis)
    return {"max_mismatch": worst, "samples": rows}


def positivity(m: CriticalMeasure, p2_class: str, tol_density: float = 1e-9,
               tol_length: float = 1e-8) -> tuple[bool, dict]:
    """Three certificates of positivity for three poles; they must agree."""
    dens_min = min(float(m.density(k)[1].min()) for k in range(len(m.arcs)))
    lengths = [omega_length(m.qd, t) for t in m.trajectories]
    length_sum = float(sum(lengths))
    c1 = dens_min >= -tol_density
    c2 = abs(length_sum - 1.0) < tol_length
    c3 = p2_class in ("Exterior", "Chebotarev")
    cert = {"min_density": dens_min, "length_sum": length_sum, "class": p2_class,
            "density_ok": c1, "length_ok": c2, "class_ok": c3}
    if not (c1 == c2 == c3):
        raise Disagreement("positivity certificates disagree", cert)
    return c1, cert


def measure_json(m: CriticalMeasure) -> dict:
    arcs = []
    for k, arc in enumerate(m.arcs):
        s, dens = m.density(k)
        arcs.append({
            "ends": list(arc.ends),
            "polyline": [[round(float(z.real), 12), round(float(z.imag), 12)] for z in arc.points],
            "density": {"s": [round(float(x), 12) for x in s], "value": [round(float(x), 12) for x in dens]},
            "mass": round(arc.mass(), 12),
        })
    return {"arcs": arcs, "masses": [round(float(x), 12) for x in m.masses],
            "total": round(m.total, 12), "kappa": round(float(m.meta.get("kappa", kappa(m))), 10)}


# -- balayage fixture -------------------------------------------------------------

def _closed_trajectory(qd: QuadDiff, m: CriticalMeasure, z0: complex, n_nodes: int):
    """Parametrise the closed trajectory through z0 by dz/dt = i / sqrt(R) on [0, 2 pi]."""
    from scipy.integrate import solve_ivp

    def G(z):
        g = complex(np.sqrt(qd.r(z)))
        return g if (g * z).real > 0 else -g

    def rhs(t, y):
        z = y[0] + 1j * y[1]
        dz = 1j / G(z)
        return [dz.real, dz.imag]

    sol = solve_ivp(rhs, (0.0, 2 * np.pi), [z0.real, z0.imag], method="DOP853",
                    rtol=1e-12, atol=1e-13, dense_output=True)
    ts = 2 * np.pi * np.arange(n_nodes) / n_nodes
    y = sol.sol(ts)
    z = y[0] + 1j * y[1]
    zend = sol.y[0, -1] + 1j * sol.y[1, -1]
    dz = np.array([1j / G(w) for w in z])
    return z, dz, abs(zend - z0)


def balayage_example_fixture(n_nodes: int = 256, z0: complex = 2.0) -> dict:
    """A unit critical measure mu and the signed critical measure 2 mu_hat - mu.

    mu is the Chebotarev measure of the equilateral triangle; mu_hat is its
    balayage onto the closed trajectory beta through z0.  U(mu) is constant on
    beta, so mu_hat is the equilibrium measure of beta and its density on beta
    is -(1/(2 pi i)) C_mu(z) dz, computed here from the quadrature of mu.
    """
    poles = np.exp(2j * np.pi * np.arange(3) / 3)
    qd = QuadDiff.from_roots(poles, [0.0])
    mu = build_measure(qd)
    z, dz, gap = _closed_trajectory(qd, mu, complex(z0), n_nodes)
    C = np.array([cauchy_transform(mu, w) for w in z])
    dens = -(C * dz) / (2j * np.pi) * (2 * np.pi / n_nodes)
    w_hat = dens.real
    neg_arcs = [SupportArc(a.qd, a.points, a.ends, a.crit_ends, -a.g, a.omega) for a in mu.arcs]
    mu1 = CriticalMeasure(qd, neg_arcs, [LoopPiece(z, 2 * w_hat)], mu.trajectories,
                          {"beta_closure_gap": gap})
    mu1.meta["kappa"] = kappa(mu1)
    return {"mu": mu, "mu1": mu1, "beta": z, "balayage_weights": w_hat,
            "density_imag_max": float(np.max(np.abs(dens.imag))), "closure_gap": gap}
