"""Horizontal trajectories of the rational quadratic differential -R(z) dz^2, R = V/A.

A horizontal arc is a level curve of Im xi, xi(z) = int sqrt(-R) dz.  The
tracer integrates dz/ds = u(z) in arc length, where u is the unit direction
with -R u^2 > 0, and after every step pushes the new point back onto the level
set of Im xi (a first-order correction along the orthogonal trajectory).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ._quad import align_signs, gauss01, segment_rule, winding_number
from .poly import ComplexPoly, root_clusters

__all__ = [
    "QuadDiff",
    "Trajectory",
    "CriticalGraph",
    "Inconclusive",
    "emanating_directions",
    "trace",
    "trace_from",
    "omega_length",
    "xi_drift",
    "critical_graph",
    "classify_p2",
    "analyze_p2",
    "trajectory_csv",
    "P2_CLASSES",
]

P2_CLASSES = ("Exterior", "InteriorClosed", "InteriorRecurrent", "Chebotarev", "Degenerate")


class Inconclusive(RuntimeError):
    def __init__(self, msg: str, diagnostics: dict | None = None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True, eq=False)
class QuadDiff:
    """-(V/A) dz^2 with V, A monic.  Stores roots for fast evaluation."""

    V: ComplexPoly
    A: ComplexPoly
    zeros: np.ndarray
    orders: tuple
    poles: np.ndarray
    degenerate: bool
    scale: float

    def __init__(self, V: ComplexPoly, A: ComplexPoly, zeros=None, poles=None, merge_tol: float = 1e-10):
        V = V.monic() if V.degree > 0 else ComplexPoly([1.0])
        A = A.monic()
        zs = np.asarray(zeros if zeros is not None else (V.roots() if V.degree > 0 else []), dtype=complex)
        ps = np.asarray(poles if poles is not None else A.roots(), dtype=complex)
        clusters = root_clusters(zs) if zs.size else []
        zu = np.array([c for c, _ in clusters], dtype=complex)
        orders = tuple(m for _, m in clusters)
        span = np.concatenate([zu, ps])
        scale = float(np.ptp(span.real) + np.ptp(span.imag)) if span.size > 1 else 1.0
        scale = max(scale, 1e-12)
        degenerate = bool(zu.size and ps.size and
                          np.min(np.abs(zu[:, None] - ps[None, :])) < merge_tol * max(1.0, scale))
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "zeros", zu)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "poles", ps)
        object.__setattr__(self, "degenerate", degenerate)
        object.__setattr__(self, "scale", scale)
        # multiset lists for scalar evaluation
        object.__setattr__(self, "_z", tuple(complex(z) for z in zs))
        object.__setattr__(self, "_a", tuple(complex(a) for a in ps))

    @classmethod
    def from_roots(cls, poles: Sequence[complex], zeros: Sequence[complex] = ()) -> "QuadDiff":
        poles = np.asarray(poles, dtype=complex)
        zeros = np.asarray(zeros, dtype=complex)
        return cls(ComplexPoly.from_roots(zeros), ComplexPoly.from_roots(poles), zeros=zeros, poles=poles)

    @property
    def p(self) -> int:
        return self.poles.size - 1

    def reduced(self) -> "QuadDiff":
        """Cancel zeros that coincide with poles."""
        zs = list(self._z)
        ps = list(self._a)
        tol = 1e-10 * max(1.0, self.scale)
        for z in list(zs):
            for a in ps:
                if abs(z - a) < tol:
                    zs.remove(z)
                    ps.remove(a)
                    break
        return QuadDiff.from_roots(ps, zs)

    def R(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.ones_like(z)
        for v in self._z:
            num = num * (z - v)
        den = np.ones_like(z)
        for a in self._a:
            den = den * (z - a)
        return num / den

    def r(self, z: complex) -> complex:
        num = 1.0 + 0j
        for v in self._z:
            num *= z - v
        den = 1.0 + 0j
        for a in self._a:
            den *= z - a
        return num / den

    def sqrt_R(self, z):
        """Principal square root of R, for callers that fix the sign themselves."""
        return np.sqrt(self.R(z))

    def critical_points(self) -> list[tuple[str, complex, int]]:
        out = [(f"v{j}", complex(z), int(k)) for j, (z, k) in enumerate(zip(self.zeros, self.orders))]
        out += [(f"a{j}", complex(a), -1) for j, a in enumerate(self.poles)]
        return out

    def point(self, label: str) -> complex:
        for lab, z, _ in self.critical_points():
            if lab == label:
                return z
        raise KeyError(label)

    def order_at(self, c: complex) -> tuple[str, int]:
        tol = 1e-10 * max(1.0, self.scale)
        for lab, z, k in self.critical_points():
            if abs(z - c) <= tol:
                return lab, k
        raise ValueError(f"{c} is a regular point of the differential")


@dataclass(eq=False)
class Trajectory:
    points: np.ndarray
    kind: str
    omega_length: float
    endpoints: tuple = (None, None)
    s: np.ndarray | None = None
    meta: dict = dc_field(default_factory=dict)

    def reversed(self) -> "Trajectory":
        s = None if self.s is None else (self.s[-1] - self.s[::-1])
        return Trajectory(self.points[::-1].copy(), self.kind, self.omega_length,
                          (self.endpoints[1], self.endpoints[0]), s, dict(self.meta))


@dataclass(eq=False)
class CriticalGraph:
    qd: QuadDiff
    trajectories: list
    adjacency: list
    closed: bool

    @property
    def zeros(self):
        return list(zip(self.qd.zeros, self.qd.orders))

    @property
    def poles(self):
        return self.qd.poles

    def by_endpoints(self, a: str, b: str) -> list[Trajectory]:
        return [t for t in self.trajectories if set(t.endpoints) == {a, b} or
                (a == b and t.endpoints == (a, a))]


# -- local structure -----------------------------------------------------

def _leading(qd: QuadDiff, c: complex, k: int) -> complex:
    tol = 1e-10 * max(1.0, qd.scale)
    num = 1.0 + 0j
    skipped = 0
    for v in qd._z:
        if abs(v - c) <= tol and k > 0 and skipped < k:
            skipped += 1
            continue
        num *= c - v
    den = 1.0 + 0j
    skipped = 0
    for a in qd._a:
        if abs(a - c) <= tol and k < 0 and skipped < 1:
            skipped += 1
            continue
        den *= c - a
    return num / den


def emanating_directions(qd: QuadDiff, c) -> np.ndarray:
    """Unit directions of the k+2 horizontal arcs leaving a critical point of order k."""
    if isinstance(c, str):
        c = qd.point(c)
    _, k = qd.order_at(complex(c))
    lead = _leading(qd, complex(c), k)
    th0 = -cmath.phase(-lead)
    m = np.arange(k + 2)
    return np.exp(1j * (th0 + 2 * np.pi * m) / (k + 2))


# -- integrator ----------------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _direction(qd: QuadDiff, z: complex, uref: complex) -> complex:
    r = qd.r(z)
    ar = abs(r)
    if ar == 0 or not math.isfinite(ar):
        return uref
    u = cmath.sqrt((-r).conjugate() / ar)
    if (u * uref.conjugate()).real < 0:
        u = -u
    return u


def _s_of(qd: QuadDiff, z: complex, u: complex) -> complex:
    """Branch of sqrt(-R) at z with s*u > 0."""
    return math.sqrt(abs(qd.r(z))) * u.conjugate()


_X16, _W16 = gauss01(16)


def _xi_step(qd: QuadDiff, z0: complex, z1: complex, s_anchor: complex) -> complex:
    """_xi_segment for a chord much shorter than its distance to any critical point.

    The argument of sqrt(-R) then moves by far less than pi/2 along the chord,
    so every node is matched to the anchor directly.
    """
    d = z1 - z0
    vals = np.sqrt(-qd.R(z0 + d * _X16))
    vals = np.where((vals * s_anchor.conjugate()).real < 0, -vals, vals)
    return complex((vals * _W16).sum() * d)


def _xi_segment(qd: QuadDiff, z0: complex, z1: complex, s_anchor: complex, anchor_end: int,
                sing0: bool = False, sing1: bool = False, m: int = 16) -> complex:
    """int_{z0}^{z1} sqrt(-R) dt along the chord, branch continuous from the anchor end."""
    t, dt = segment_rule(z0, z1, sing0, sing1, 1, m)
    vals = np.sqrt(-qd.R(t))
    if anchor_end == 0:
        vals = align_signs(vals, s_anchor)
    else:
        vals = align_signs(vals[::-1], s_anchor)[::-1]
    return complex((vals * dt).sum())


def _nearest_critical(crit: list, z: complex) -> tuple[float, int]:
    best = math.inf
    idx = -1
    for i, (_, c, _) in enumerate(crit):
        d = abs(z - c)
        if d < best:
            best, idx = d, i
    return best, idx


def _integrate(qd: QuadDiff, z0: complex, u0: complex, omega0: float, start_label: str | None,
               budget: float, rtol: float, snap: float, hit_tol: float, close_tol: float,
               tube: float | None, max_steps: int, stop_on_recurrence: bool,
               max_step: float | None) -> Trajectory:
    crit = qd.critical_points()
    scale = qd.scale
    atol = rtol * max(1.0, scale)
    # neighbourhood radius of each critical point for the hit test
    near = []
    for i, (_, c, _) in enumerate(crit):
        others = [abs(c - d) for j, (_, d, _) in enumerate(crit) if j != i]
        near.append(0.3 * min(others) if others else 0.3 * scale)
    hmax_abs = max_step if max_step is not None else 0.05 * max(scale, 1e-12)
    tube = 1e-2 * max(scale, 1e-12) if tube is None else tube

    start_pt = z0
    start_idx = None
    if start_label is not None:
        for i, (lab, _, _) in enumerate(crit):
            if lab == start_label:
                start_idx = i
    left_start = start_label is None

    z, u = z0, _direction(qd, z0, u0)
    pts = [z0]
    ss = [0.0]
    s_tot = 0.0
    omega = omega0  # accumulated Re xi
    im_err = 0.0
    h = min(hmax_abs, 0.2 * _nearest_critical(crit, z)[0]) or 1e-9
    crossings = 0
    grid: dict = {}
    dirs = [u]
    in_episode = False
    kind = "truncated"
    end_label = None
    confirmed = None
    steps = 0
    while steps < max_steps:
        steps += 1
        dcrit, ic = _nearest_critical(crit, z)
        h = min(h, 0.2 * dcrit, hmax_abs)
        # one Dormand-Prince step with frozen branch reference
        while True:
            ks = []
            ok = True
            for i in range(7):
                zi = z
                for a_ij, kj in zip(_A[i], ks):
                    zi += h * a_ij * kj
                ki = _direction(qd, zi, u)
                if (ki * u.conjugate()).real < 0.5:
                    ok = False
                    break
                ks.append(ki)
            if not ok:
                h *= 0.5
                if h < 1e-14 * max(1.0, scale):
                    break
                continue
            z5 = z
            for b, kk in zip(_B5, ks):
                z5 += h * b * kk
            err = abs(h * sum(e * kk for e, kk in zip(_E, ks)))
            if err <= atol or h < 1e-13 * max(1.0, scale):
                break
            h *= max(0.2, 0.9 * (atol / err) ** 0.2)
        else:  # pragma: no cover
            pass
        if h < 1e-14 * max(1.0, scale):
            kind = "truncated"
            break
        z_new = z5
        u_new = _direction(qd, z_new, ks[-1])
        # xi increment over the chord, then push back to the level set
        dxi = _xi_step(qd, z, z_new, _s_of(qd, z, u))
        im_err += dxi.imag
        s_new = _s_of(qd, z_new, u_new)
        if s_new != 0:
            z_new = z_new - 1j * im_err / s_new
            im_err = 0.0
            u_new = _direction(qd, z_new, u_new)
        omega += dxi.real

        # closure against a regular start point
        if start_label is None and s_tot > 10 * h and abs(z - start_pt) < 4 * h + abs(z_new - z):
            to_start = _xi_segment(qd, z, start_pt, _s_of(qd, z, u), 0)
            if abs(to_start.imag) < close_tol and -1e-12 <= to_start.real <= dxi.real + 1e-12 \
                    and (_direction(qd, start_pt, u) * u0.conjugate()).real > 1 - 1e-6:
                omega += to_start.real - dxi.real
                pts.append(start_pt)
                s_tot += abs(start_pt - z)
                ss.append(s_tot)
                kind = "closed"
                break

        s_tot += abs(z_new - z)
        z, u = z_new, u_new
        pts.append(z)
        ss.append(s_tot)
        h = h * min(4.0, max(0.2, 0.9 * (atol / max(err, 1e-300)) ** 0.2))

        # self-approach episodes for the recurrence heuristic
        key = (int(math.floor(z.real / tube)), int(math.floor(z.imag / tube)))
        hit = False
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in grid.get((key[0] + dx, key[1] + dy), ()):
                    if s_tot - ss[j] > 20 * tube and abs(pts[j] - z) < tube \
                            and (dirs[j] * u.conjugate()).real > 0.9:
                        hit = True
                        break
                if hit:
                    break
            if hit:
                break
        if hit and not in_episode:
            crossings += 1
        in_episode = hit
        grid.setdefault(key, []).append(len(pts) - 1)
        dirs.append(u)

        if not left_start and start_idx is not None and abs(z - crit[start_idx][1]) > near[start_idx]:
            left_start = True

        dcrit, ic = _nearest_critical(crit, z)
        c_lab, c_pt, c_ord = crit[ic]
        skip = (ic == start_idx and not left_start)
        if not skip:
            if dcrit < snap:
                omega += _xi_segment(qd, z, c_pt, _s_of(qd, z, u), 0, sing1=True).real
                end_label = c_lab
                kind = "critical"
                pts[-1] = c_pt
                break
            if confirmed == ic and dcrit < 1e-4 * max(1.0, scale):
                omega += _xi_segment(qd, z, c_pt, _s_of(qd, z, u), 0, sing1=True).real
                end_label = c_lab
                kind = "critical"
                pts.append(c_pt)
                s_tot += dcrit
                ss.append(s_tot)
                break
            if confirmed is None and dcrit < near[ic]:
                d_xi = _xi_segment(qd, z, c_pt, _s_of(qd, z, u), 0, sing1=True)
                if abs(d_xi.imag) < hit_tol * max(1.0, abs(d_xi)) and d_xi.real > 0:
                    confirmed = ic
            elif confirmed is not None and confirmed != ic and dcrit < near[ic]:
                confirmed = None

        if omega / math.pi >= budget:
            kind = "truncated"
            break
        if stop_on_recurrence and crossings >= 3:
            break
    if kind == "truncated" and crossings >= 3:
        kind = "recurrent-suspect"
    return Trajectory(np.array(pts), kind, omega / math.pi, (start_label, end_label), np.array(ss),
                      {"steps": steps, "crossings": crossings})


def _defaults(qd: QuadDiff, kw: dict) -> dict:
    out = dict(budget=50.0, rtol=1e-9, snap=1e-7, hit_tol=1e-7, close_tol=1e-8,
               tube=None, max_steps=200000, stop_on_recurrence=False, max_step=None)
    out.update(kw)
    return out


def trace(qd: QuadDiff, start: complex, direction: complex, budget: float = 50.0, **kw) -> Trajectory:
    """Trace the horizontal arc through a regular point (or a zero) of the differential."""
    start = complex(start)
    tol = 1e-12 * max(1.0, qd.scale)
    if qd.poles.size and np.min(np.abs(qd.poles - start)) <= tol:
        raise ValueError("trajectory cannot start at a pole; use trace_from with its label")
    for lab, c, k in qd.critical_points():
        if k > 0 and abs(c - start) <= tol:
            dirs = emanating_directions(qd, c)
            i = int(np.argmax((dirs * np.conj(direction)).real))
            return trace_from(qd, lab, i, budget=budget, **kw)
    o = _defaults(qd, dict(kw, budget=budget))
    u0 = direction / abs(direction)
    u0 = _direction(qd, start, u0)
    return _integrate(qd, start, u0, 0.0, None, **o)


def trace_from(qd: QuadDiff, label: str, index: int, budget: float = 50.0,
               offset: float = 1e-6, **kw) -> Trajectory:
    """Trace the ``index``-th arc emanating from the critical point ``label``."""
    c = qd.point(label)
    dirs = emanating_directions(qd, c)
    d = dirs[index % dirs.size]
    r0 = offset * max(1.0, qd.scale)
    z0 = c + r0 * d
    u0 = _direction(qd, z0, d)
    # place the start on the level set through c
    omega0 = 0.0
    for _ in range(3):
        s0 = _s_of(qd, z0, u0)
        dx = _xi_segment(qd, c, z0, s0, 1, sing0=True)
        z0 = z0 - 1j * dx.imag / s0
        u0 = _direction(qd, z0, d)
        omega0 = dx.real
    o = _defaults(qd, dict(kw, budget=budget))
    tr = _integrate(qd, z0, u0, omega0, label, **o)
    pts = np.concatenate([[c], tr.points])
    s = np.concatenate([[0.0], tr.s + abs(z0 - c)])
    return Trajectory(pts, tr.kind, tr.omega_length, (label, tr.endpoints[1]), s,
                      dict(tr.meta, start_index=int(index % dirs.size)))


# -- lengths ---------------------------------------------------------------

def _critical_mask(qd: QuadDiff, pts: np.ndarray) -> np.ndarray:
    crit = np.array([c for _, c, _ in qd.critical_points()])
    tol = 1e-10 * max(1.0, qd.scale)
    return np.min(np.abs(pts[:, None] - crit[None, :]), axis=1) <= tol


def _chord_integrals(qd: QuadDiff, pts: np.ndarray, m: int = 16) -> np.ndarray:
    """int sqrt(R) over each chord of the polyline (branch continuous per chord)."""
    crit = _critical_mask(qd, pts)
    d = np.diff(pts)
    x, w = gauss01(m)
    vals = align_signs(np.sqrt(qd.R(pts[:-1, None] + d[:, None] * x[None, :])))
    out = (vals * w[None, :]).sum(axis=1) * d
    for i in np.nonzero(crit[:-1] | crit[1:])[0]:
        t, dt = segment_rule(pts[i], pts[i + 1], bool(crit[i]), bool(crit[i + 1]), 1, m)
        out[i] = (align_signs(np.sqrt(qd.R(t))) * dt).sum()
    return out


def omega_length(qd: QuadDiff, traj: Trajectory | np.ndarray) -> float:
    """(1/pi) int sqrt|R| |dz| along the polyline.

    Each chord contributes |int_chord sqrt(R) dz|; for a chord whose ends lie
    on one horizontal arc this equals the arc's metric length exactly, since
    sqrt(R) dz is a real multiple of i along the arc and the integral of an
    analytic function does not see the chord/arc difference.
    """
    pts = traj.points if isinstance(traj, Trajectory) else np.asarray(traj, dtype=complex)
    if len(pts) < 2:
        return 0.0
    return float(np.abs(_chord_integrals(qd, pts)).sum() / math.pi)


def xi_drift(qd: QuadDiff, traj: Trajectory) -> float:
    """max |Im xi - Im xi(start)| along the polyline, by re-quadrature per chord."""
    pts = traj.points
    crit = _critical_mask(qd, pts)
    acc = 0j
    worst = 0.0
    sref = None
    for i in range(len(pts) - 1):
        t, dt = segment_rule(pts[i], pts[i + 1], bool(crit[i]), bool(crit[i + 1]), 1, 16)
        vals = np.sqrt(-qd.R(t))
        if sref is None:
            # orient so the first chord has positive real increment
            vals = align_signs(vals)
            if (vals * dt).sum().real < 0:
                vals = -vals
        else:
            vals = align_signs(vals, sref)
        acc += (vals * dt).sum()
        sref = vals[-1]
        worst = max(worst, abs(acc.imag))
    return worst


# -- global structure ------------------------------------------------------

def _arrival_index(qd: QuadDiff, traj: Trajectory) -> int | None:
    lab = traj.endpoints[1]
    if lab is None or len(traj.points) < 2:
        return None
    c = qd.point(lab)
    back = traj.points[-2] - c
    dirs = emanating_directions(qd, c)
    return int(np.argmax((dirs * np.conj(back / abs(back))).real))


def critical_graph(qd: QuadDiff, budget: float = 50.0, **kw) -> CriticalGraph:
    covered: set[tuple[str, int]] = set()
    trajs = []
    adj = []
    for lab, c, k in qd.critical_points():
        if k == 0:
            continue
        for i in range(k + 2):
            if (lab, i) in covered:
                continue
            tr = trace_from(qd, lab, i, budget=budget, **kw)
            covered.add((lab, i))
            j = _arrival_index(qd, tr)
            if j is not None:
                covered.add((tr.endpoints[1], j))
                tr.meta["end_index"] = j
            trajs.append(tr)
            adj.append(tr.endpoints)
    closed = all(t.kind in ("critical", "closed") for t in trajs)
    return CriticalGraph(qd, trajs, adj, closed)


def _from_graph(qd: QuadDiff, graph: CriticalGraph, label: str) -> dict:
    """Arcs of ``graph`` leaving ``label``, keyed by emanating-direction index."""
    out = {}
    for t in graph.trajectories:
        if t.endpoints[0] == label and "start_index" in t.meta:
            out.setdefault(t.meta["start_index"], t)
        if t.endpoints[1] == label:
            j = _arrival_index(qd, t)
            if j is not None:
                r = t.reversed()
                out.setdefault(j, r)
    return out


def analyze_p2(qd: QuadDiff, budget: float = 50.0, graph: CriticalGraph | None = None, **kw) -> dict:
    """Loop beta, arc gamma and arc alpha of a three-pole differential, with its class.

    Arcs already traced in ``graph`` (traced with the same options) are reused.
    """
    if qd.p != 2:
        raise ValueError("analyze_p2 needs three poles")
    kw.setdefault("stop_on_recurrence", True)
    if qd.degenerate:
        return {"class": "Degenerate"}
    if len(qd.zeros) != 1 or qd.orders[0] != 1:
        raise ValueError("expected one simple zero")
    known = _from_graph(qd, graph, "v0") if graph is not None else {}
    from_v = [known[i] if i in known else trace_from(qd, "v0", i, budget=budget, **kw) for i in range(3)]
    ends = [t.endpoints[1] for t in from_v]
    if all(e is not None and e.startswith("a") for e in ends):
        return {"class": "Chebotarev", "arcs": from_v}
    loops = [i for i, t in enumerate(from_v) if t.endpoints[1] == "v0"]
    if not loops:
        raise Inconclusive("no loop through the zero closed within the budget",
                           {"kinds": [t.kind for t in from_v], "ends": ends})
    i = loops[0]
    j = _arrival_index(qd, from_v[i])
    rest = [k for k in range(3) if k not in (i, j)]
    if len(rest) != 1:
        raise Inconclusive("loop arrives along its own departure direction", {"ends": ends})
    g = rest[0]
    beta, gamma = from_v[i], from_v[g]
    v = qd.zeros[0]
    terminates = gamma.kind == "critical" and gamma.endpoints[1] is not None \
        and gamma.endpoints[1].startswith("a")
    if terminates:
        # the pole gamma lands on is off beta, and is the cleanest probe
        probe = qd.point(gamma.endpoints[1])
    else:
        far = np.nonzero(np.abs(gamma.points - v) > 0.01 * qd.scale)[0]
        if far.size == 0:
            raise Inconclusive("gamma too short to locate", {"ends": ends})
        probe = gamma.points[far[0]]
    inside = winding_number(beta.points[:-1], probe) != 0
    if not inside and terminates:
        cls = "Exterior"
    elif inside and terminates:
        cls = "InteriorClosed"
    elif inside:
        cls = "InteriorRecurrent"
    else:
        raise Inconclusive("gamma leaves the loop but does not terminate",
                           {"gamma_kind": gamma.kind, "ends": ends})
    out = {"class": cls, "beta": beta, "gamma": gamma, "loop_indices": (i, j), "gamma_index": g}
    if terminates:
        k_gamma = gamma.endpoints[1]
        others = [f"a{m}" for m in range(3) if f"a{m}" != k_gamma]
        known_a = _from_graph(qd, graph, others[0]) if graph is not None else {}
        alpha = known_a[0] if 0 in known_a else trace_from(qd, others[0], 0, budget=budget, **kw)
        out["alpha"] = alpha
        if alpha.endpoints[1] != others[1]:
            out["alpha_warning"] = f"alpha ended at {alpha.endpoints[1]}"
    return out


def classify_p2(qd: QuadDiff, budget: float = 50.0, **kw) -> str:
    return analyze_p2(qd, budget=budget, **kw)["class"]


def trajectory_csv(traj: Trajectory) -> str:
    s = traj.s if traj.s is not None else np.concatenate(
        [[0.0], np.cumsum(np.abs(np.diff(traj.points)))])
    lines = ["s,re,im"]
    lines += [f"{a:.12g},{z.real:.12g},{z.imag:.12g}" for a, z in zip(s, traj.points)]
    return "\n".join(lines) + "\n"
