"""Period integrals of sqrt(R) dz over cut systems, and the solvers built on them.

Points of the zero/pole set are labelled ``"a<i>"`` (pole i) and ``"v<j>"``
(entry j of the zero vector).  A cut system is a list of polylines, each
joining two labelled points.  The branch of sqrt(R) with z*sqrt(R) -> 1 at
infinity and cuts exactly on those polylines is

    G(z) = prod_pairs g(z; e1, e2) * (-1)^(sum of winding numbers)

where g has its cut on the straight segment [e1, e2] and the winding numbers
of the loops (polyline + straight segment back) move the cut from the
segment onto the polyline.

    w_k = (1/(pi i)) int_{gamma_k} G_right(z) dz

with G_right the boundary value from the right of the direction of travel;
that is half of the counterclockwise loop integral around gamma_k, so
sum_k w_k = 1 by the residue at infinity.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from ._quad import align_signs, point_segment_distance, segment_rule, segments_intersect

__all__ = [
    "CutSystem",
    "PeriodChart",
    "ChebotarevCenter",
    "BoundaryHit",
    "RerouteNeeded",
    "DegenerateJacobian",
    "NewtonFailure",
    "Branch",
    "straight_cuts",
    "default_cuts",
    "period_w",
    "periods",
    "period_jacobian",
    "chebotarev_center",
    "solve_period_system",
    "continue_distinguished_arc",
    "sample_V_arcs",
    "enter_cell",
    "arc_samples_csv",
]


class BoundaryHit(RuntimeError):
    """The solver left the cell; ``kind`` names the degeneration."""

    def __init__(self, kind: str, detail: str = "", v=None):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.v = v


class RerouteNeeded(ValueError):
    pass


class DegenerateJacobian(ValueError):
    pass


class NewtonFailure(RuntimeError):
    pass


# -- labels and cut systems ----------------------------------------------

def _point(label: str, poles: np.ndarray, v: np.ndarray) -> complex:
    idx = int(label[1:])
    return complex(poles[idx] if label[0] == "a" else v[idx])


def _scale(poles: np.ndarray, v: np.ndarray) -> float:
    pts = np.concatenate([poles, v])
    return max(float(np.ptp(pts.real) + np.ptp(pts.imag)), 1e-12)


@dataclass(eq=False)
class CutSystem:
    arcs: list
    ends: list
    companions: list = dc_field(default_factory=list)
    companion_ends: list = dc_field(default_factory=list)
    anchors: list | None = None  # per arc: label of the zero each interior vertex follows, or None

    @property
    def p(self) -> int:
        return len(self.arcs)

    def moved(self, poles, v_old, v_new) -> "CutSystem":
        """Translate zero-anchored endpoints; interior vertices follow linearly in arc length."""
        poles = np.asarray(poles, dtype=complex)

        def shift(lab):
            return _point(lab, poles, v_new) - _point(lab, poles, v_old)

        def move(poly, ends, anchor=None):
            d0, d1 = shift(ends[0]), shift(ends[1])
            seg = np.abs(np.diff(poly))
            frac = np.concatenate([[0.0], np.cumsum(seg)])
            frac = frac / frac[-1] if frac[-1] > 0 else np.linspace(0, 1, len(poly))
            out = poly + d0 + (d1 - d0) * frac
            if anchor is not None:
                for i, lab in enumerate(anchor):
                    if lab is not None:
                        out[i] = poly[i] + shift(lab)
            out[0] = _point(ends[0], poles, v_new)
            out[-1] = _point(ends[1], poles, v_new)
            return out

        anchors = self.anchors or [None] * len(self.arcs)
        return CutSystem([move(a, e, an) for a, e, an in zip(self.arcs, self.ends, anchors)],
                         list(self.ends),
                         [move(a, e) for a, e in zip(self.companions, self.companion_ends)],
                         list(self.companion_ends), self.anchors)


def straight_cuts(poles, v, pairs: Sequence[tuple[str, str]],
                  companions: Sequence[tuple[str, str]] = ()) -> CutSystem:
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    arcs = [np.array([_point(a, poles, v), _point(b, poles, v)]) for a, b in pairs]
    comps = [np.array([_point(a, poles, v), _point(b, poles, v)]) for a, b in companions]
    return CutSystem(arcs, [tuple(p) for p in pairs], comps, [tuple(c) for c in companions])


def default_cuts(poles, v) -> CutSystem:
    """Straight cuts from the shortest non-crossing perfect matching of all branch points."""
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    labels = [f"a{i}" for i in range(len(poles))] + [f"v{j}" for j in range(len(v))]
    pts = {lab: _point(lab, poles, v) for lab in labels}

    def matchings(items):
        if not items:
            yield []
            return
        a = items[0]
        for i in range(1, len(items)):
            rest = items[1:i] + items[i + 1:]
            for m in matchings(rest):
                yield [(a, items[i])] + m

    best, best_len = None, math.inf
    for m in matchings(labels):
        segs = [(pts[a], pts[b]) for a, b in m]
        if any(segments_intersect(*s, *t) for s, t in itertools.combinations(segs, 2)):
            continue
        L = sum(abs(b - a) for a, b in segs)
        if L < best_len:
            best, best_len = m, L
    if best is None:
        raise RerouteNeeded("no non-crossing straight matching")
    # put pole-pole arcs last so the first p-1 arcs carry the zeros where possible
    best.sort(key=lambda ab: (ab[0][0] == "a" and ab[1][0] == "a", ab))
    return straight_cuts(poles, v, best)


def validate(cuts: CutSystem, poles, v, tol: float = 1e-9) -> None:
    """Raise BoundaryHit / RerouteNeeded when the cut system is no longer admissible."""
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    sc = max(1.0, _scale(poles, v))
    for j, z in enumerate(v):
        if poles.size and np.min(np.abs(poles - z)) < tol * sc:
            raise BoundaryHit("zero-pole coalescence", f"v{j} reached a pole", v)
        for k in range(j):
            if abs(v[k] - z) < tol * sc:
                raise BoundaryHit("zero-zero coalescence", f"v{k}, v{j}", v)
    crit = [(f"a{i}", a) for i, a in enumerate(poles)] + [(f"v{j}", z) for j, z in enumerate(v)]
    for arc, ends in zip(cuts.arcs + cuts.companions, cuts.ends + cuts.companion_ends):
        for lab, c in crit:
            for i in range(len(arc) - 1):
                d, t = point_segment_distance(c, arc[i], arc[i + 1])
                at_end = (lab == ends[0] and i == 0 and t < 0.5) or \
                         (lab == ends[1] and i == len(arc) - 2 and t > 0.5)
                if not at_end and d < tol * sc:
                    raise RerouteNeeded(f"arc {ends} passes within {d:.1e} of {lab}")
    for (a1, e1), (a2, e2) in itertools.combinations(list(zip(cuts.arcs, cuts.ends)), 2):
        for i in range(len(a1) - 1):
            for j in range(len(a2) - 1):
                if segments_intersect(a1[i], a1[i + 1], a2[j], a2[j + 1]):
                    raise BoundaryHit("arcs meet", f"{e1} crosses {e2}", v)


# -- the branch ------------------------------------------------------------

class Branch:
    """sqrt(R) on the complement of a cut system, normalised by z*sqrt(R) -> 1."""

    def __init__(self, poles, v, cuts: CutSystem):
        self.poles = np.asarray(poles, dtype=complex)
        self.v = np.asarray(v, dtype=complex)
        self.cuts = cuts
        self.factors = []
        for (l1, l2) in cuts.ends:
            e1, e2 = _point(l1, self.poles, self.v), _point(l2, self.poles, self.v)
            kind = l1[0] + l2[0]
            self.factors.append((kind, e1, e2))
        # polygon = polyline closed by the straight segment back (implicit in the roll)
        self.loops = [np.asarray(arc) if len(arc) > 2 else None for arc in cuts.arcs]
        n_zero = sum(k.count("v") for k, _, _ in self.factors)
        n_pole = sum(k.count("a") for k, _, _ in self.factors)
        if n_zero != len(self.v) or n_pole != len(self.poles):
            raise ValueError("cut system must pair every zero and pole exactly once")

    def R(self, z):
        z = np.asarray(z, dtype=complex)
        num = np.ones_like(z)
        for c in self.v:
            num = num * (z - c)
        den = np.ones_like(z)
        for a in self.poles:
            den = den * (z - a)
        return num / den

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for kind, e1, e2 in self.factors:
            q = np.sqrt((z - e2) / (z - e1))
            if kind == "vv":
                out = out * (z - e1) * q
            elif kind == "aa":
                out = out / ((z - e1) * q)
            elif kind == "va":
                out = out * np.sqrt((z - e1) / (z - e2))
            else:  # "av"
                out = out / np.sqrt((z - e1) / (z - e2))
        par = np.zeros(z.shape, dtype=int)
        for loop in self.loops:
            if loop is None:
                continue
            w = loop[None, :] - z.reshape(-1, 1)
            ang = np.angle(np.roll(w, -1, axis=1) / w).sum(axis=1)
            par = par + np.rint(ang / (2 * np.pi)).astype(int).reshape(z.shape)
        return np.where(par % 2 == 1, -out, out)

    def on_arc(self, t, tangent, right: bool = True):
        """sqrt(R(t)) with the sign of the boundary value from the right (or left)."""
        t = np.asarray(t, dtype=complex)
        tangent = np.broadcast_to(np.asarray(tangent, dtype=complex), t.shape)
        vals = np.sqrt(self.R(t))
        ends = np.concatenate([self.poles, self.v])
        dist = np.min(np.abs(t[..., None] - ends[None, :]), axis=-1)
        off = 1e-6 * dist * (-1j if right else 1j) * tangent / np.abs(tangent)
        ref = self(t + off)
        sgn = np.where((vals * np.conj(ref)).real < 0, -1.0, 1.0)
        return vals * sgn


def _is_critical(z: complex, poles, v, sc: float) -> bool:
    tol = 1e-12 * max(1.0, sc)
    return bool((np.abs(poles - z) <= tol).any() or (np.abs(v - z) <= tol).any())


def _arc_integral(br: Branch, arc: np.ndarray, weight=None, on_cut: bool = True,
                  tol: float = 1e-11, max_level: int = 7, m: int = 32) -> tuple[complex, float]:
    """int over a polyline of G (boundary value from the right on cuts) times ``weight``."""
    sc = _scale(br.poles, br.v)
    flags = [_is_critical(z, br.poles, br.v, sc) for z in arc]
    prev = None
    est = math.inf
    val = 0j
    for lvl in range(max_level):
        panels = 2 ** lvl
        val = 0j
        for i in range(len(arc) - 1):
            t, dt = segment_rule(arc[i], arc[i + 1], flags[i], flags[i + 1], panels, m)
            d = arc[i + 1] - arc[i]
            g = br.on_arc(t, d, right=True) if on_cut else _direct(br, t)
            if weight is not None:
                g = g * weight(t)
            val += (g * dt).sum()
        if prev is not None:
            est = abs(val - prev)
            if est < tol * max(1.0, abs(val)):
                break
        prev = val
    return val, est


def _direct(br: Branch, t):
    """G at points off the cuts, sign-matched onto the exact square root."""
    vals = np.sqrt(br.R(t))
    ref = br(t)
    return np.where((vals * np.conj(ref)).real < 0, -vals, vals)


# -- periods ---------------------------------------------------------------

@dataclass(eq=False)
class PeriodChart:
    v: np.ndarray
    w: np.ndarray
    wtilde: np.ndarray
    err: float

    @property
    def total(self) -> complex:
        return complex(self.w.sum())


def period_w(poles, v, cuts: CutSystem, k: int, check: bool = True) -> tuple[complex, float]:
    """w_k and an error estimate."""
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if check:
        validate(cuts, poles, v)
    br = Branch(poles, v, cuts)
    val, err = _arc_integral(br, cuts.arcs[k])
    return val / (np.pi * 1j), err / np.pi


def periods(poles, v, cuts: CutSystem, check: bool = True) -> PeriodChart:
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if check:
        validate(cuts, poles, v)
    br = Branch(poles, v, cuts)
    w, wt, err = [], [], 0.0
    for arc in cuts.arcs:
        val, e = _arc_integral(br, arc)
        w.append(val / (np.pi * 1j))
        err = max(err, e / np.pi)
    for arc in cuts.companions:
        val, e = _arc_integral(br, arc, on_cut=False)
        wt.append(val / (np.pi * 1j))
        err = max(err, e / np.pi)
    return PeriodChart(v.copy(), np.array(w), np.array(wt), err)


def period_jacobian(poles, v, cuts: CutSystem, rows: Sequence[int] | None = None,
                    companions: bool = False) -> np.ndarray:
    """d w_j / d v_k = -(1/(2 pi i)) int_{gamma_j} G_right(t) / (t - v_k) dt.

    ``rows`` selects arcs (default the first p-1); with ``companions`` the rows
    are the companion arcs instead.
    """
    poles = np.asarray(poles, dtype=complex)
    v = np.asarray(v, dtype=complex)
    for j in range(len(v)):
        for k in range(j):
            if abs(v[j] - v[k]) < 1e-12 * max(1.0, _scale(poles, v)):
                raise DegenerateJacobian(f"v{k} and v{j} coincide")
    br = Branch(poles, v, cuts)
    arcs = cuts.companions if companions else cuts.arcs
    if rows is None:
        rows = range(len(v)) if not companions else range(len(arcs))
    J = np.empty((len(rows), len(v)), dtype=complex)
    for a, j in enumerate(rows):
        for k in range(len(v)):
            vk = v[k]
            val, _ = _arc_integral(br, arcs[j], weight=lambda t, vk=vk: 1.0 / (t - vk),
                                   on_cut=not companions)
            J[a, k] = -val / (2j * np.pi)
    return J


# -- Chebotarev centre -------------------------------------------------------

def _edge_integrals(poles, v, edges, panels: int = 4, m: int = 32):
    """For each straight edge: (int sqrt(R), [int sqrt(R)/(t-v_k)]_k) on one continuous branch."""
    sc = _scale(poles, v)
    out = []
    for a, b in edges:
        z0, z1 = _point(a, poles, v), _point(b, poles, v)
        s0 = _is_critical(z0, poles, v, sc)
        s1 = _is_critical(z1, poles, v, sc)
        t, dt = segment_rule(z0, z1, s0, s1, panels, m)
        num = np.ones_like(t)
        for c in v:
            num = num * (t - c)
        den = np.ones_like(t)
        for c in poles:
            den = den * (t - c)
        with np.errstate(invalid="ignore", divide="ignore"):
            g = align_signs(np.sqrt(num / den))
        g = np.where(np.isfinite(g), g, 0.0)
        I = (g * dt).sum()
        with np.errstate(invalid="ignore", divide="ignore"):
            dI = np.array([np.nansum(-0.5 * g / (t - c) * dt) for c in v])
        out.append((I, dI))
    return out


@dataclass(eq=False)
class ChebotarevCenter:
    poles: np.ndarray
    v: np.ndarray
    edges: list
    masses: np.ndarray
    residual: float
    degenerate: bool = False
    iterations: int = 0

    def __iter__(self):
        yield self.v
        yield self.cuts()

    def neighbours(self, label: str) -> list[str]:
        return [b if a == label else a for a, b in self.edges if label in (a, b)]

    def edge_mass(self, a: str, b: str) -> float:
        for (x, y), m in zip(self.edges, self.masses):
            if {x, y} == {a, b}:
                return float(m)
        raise KeyError((a, b))

    def cuts(self, choice: Sequence[str] | None = None, bypass: float = 0.05) -> CutSystem:
        """Cut system of the cell selected by ``choice`` (one neighbour per zero).

        At every zero the two unselected tree edges are merged into one arc that
        passes the zero on the side away from the selected edge.
        """
        p = len(self.poles) - 1
        if p == 1:
            return straight_cuts(self.poles, self.v, [("a0", "a1")])
        if self.degenerate:
            raise ValueError("degenerate Chebotarev continuum has no generic cut system")
        if choice is None:
            choice = [sorted(self.neighbours(f"v{j}"))[0] for j in range(p - 1)]
        pts = {f"a{i}": complex(a) for i, a in enumerate(self.poles)}
        pts.update({f"v{j}": complex(z) for j, z in enumerate(self.v)})
        minlen = min(abs(pts[a] - pts[b]) for a, b in self.edges)
        # chains: start with every edge as its own chain
        chains = [[a, b] for a, b in self.edges]
        via = {}
        for j in range(p - 1):
            lab = f"v{j}"
            sel = choice[j]
            if sel not in self.neighbours(lab):
                raise ValueError(f"{sel} is not adjacent to {lab}")
            d = pts[sel] - pts[lab]
            via[lab] = pts[lab] - bypass * minlen * d / abs(d)
            ends_here = [c for c in chains if (c[0] == lab and c[1] != sel) or
                         (c[-1] == lab and c[-2] != sel)]
            if len(ends_here) != 2:
                raise ValueError("inconsistent choice")
            c1, c2 = ends_here
            c1 = c1 if c1[-1] == lab else c1[::-1]
            c2 = c2 if c2[0] == lab else c2[::-1]
            merged = c1 + c2[1:]
            chains = [c for c in chains if c is not ends_here[0] and c is not ends_here[1]]
            chains.append(merged)
        arcs, ends, anchors = [], [], []
        for c in chains:
            poly = [pts[c[0]]] + [via[x] for x in c[1:-1]] + [pts[c[-1]]]
            arcs.append(np.array(poly))
            ends.append((c[0], c[-1]))
            anchors.append([None] + list(c[1:-1]) + [None])
        order = sorted(range(len(arcs)), key=lambda i: (ends[i][0][0] == "a" and ends[i][1][0] == "a",
                                                         ends[i]))
        return CutSystem([arcs[i] for i in order], [ends[i] for i in order],
                         anchors=[anchors[i] for i in order])


def _collinear(poles: np.ndarray) -> bool:
    d = poles - poles[0]
    ref = d[np.argmax(np.abs(d))]
    return bool(np.all(np.abs((d * np.conj(ref)).imag) <= 1e-12 * abs(ref) ** 2))


def _tree_topologies(p: int) -> list[tuple[list, list]]:
    """(edges, initial-guess recipe) for the Chebotarev tree topologies with p-1 zeros."""
    if p == 1:
        return [([("a0", "a1")], [])]
    if p == 2:
        return [([("a0", "v0"), ("a1", "v0"), ("a2", "v0")], [[0, 1, 2]])]
    if p == 3:
        out = []
        for pair in ([0, 1], [0, 2], [0, 3]):
            rest = [i for i in range(4) if i not in pair]
            edges = [(f"a{pair[0]}", "v0"), (f"a{pair[1]}", "v0"), ("v0", "v1"),
                     (f"a{rest[0]}", "v1"), (f"a{rest[1]}", "v1")]
            out.append((edges, [pair, rest]))
        return out
    raise NotImplementedError("Chebotarev centre implemented for p <= 3")


def _gauss_newton_tree(poles, v0, edges, tol=1e-12, max_iter=60):
    v = np.array(v0, dtype=complex)
    sc = _scale(poles, v)
    it = 0
    res = math.inf
    for it in range(1, max_iter + 1):
        ints = _edge_integrals(poles, v, edges)
        r = np.array([I.real / np.pi for I, _ in ints])
        res = float(np.max(np.abs(r)))
        if res < tol:
            break
        J = np.zeros((len(edges), 2 * len(v)))
        for e, (_, dI) in enumerate(ints):
            J[e, 0::2] = dI.real / np.pi
            J[e, 1::2] = -dI.imag / np.pi
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        dv = step[0::2] + 1j * step[1::2]
        # keep each zero clear of the poles and of each other
        clear = min(np.min(np.abs(poles[None, :] - v[:, None])),
                    min((abs(a - b) for a, b in itertools.combinations(v, 2)), default=math.inf))
        lim = 0.3 * clear
        if np.max(np.abs(dv)) > lim:
            dv *= lim / np.max(np.abs(dv))
        lam = 1.0
        while lam > 1e-6:
            vt = v + lam * dv
            rt = np.array([I.real / np.pi for I, _ in _edge_integrals(poles, vt, edges)])
            if np.max(np.abs(rt)) < res or np.max(np.abs(dv)) * lam < 1e-15 * sc:
                break
            lam *= 0.5
        v = vt
        if np.max(np.abs(lam * dv)) < 1e-15 * max(1.0, sc):
            ints = _edge_integrals(poles, v, edges)
            res = float(np.max(np.abs([I.real / np.pi for I, _ in ints])))
            break
    masses = np.array([abs(I) / np.pi for I, _ in _edge_integrals(poles, v, edges)])
    return v, res, masses, it


def chebotarev_center(poles) -> ChebotarevCenter:
    """Zeros v* whose critical graph is the Chebotarev continuum of ``poles``."""
    poles = np.asarray(poles, dtype=complex)
    if len(poles) < 2:
        raise ValueError("need at least two poles")
    if min(abs(a - b) for a, b in itertools.combinations(poles, 2)) == 0:
        raise ValueError("poles must be pairwise distinct")
    p = len(poles) - 1
    if p == 1:
        return ChebotarevCenter(poles, np.array([], dtype=complex), [("a0", "a1")], np.array([1.0]), 0.0)
    if p == 2 and _collinear(poles):
        order = np.argsort(((poles - poles[0]) * np.conj(poles[np.argmax(np.abs(poles - poles[0]))]
                                                         - poles[0])).real)
        mid = int(order[1])
        v = np.array([poles[mid]])
        edges = [(f"a{i}", "v0") for i in range(3)]
        masses = np.array([abs(I) / np.pi if i != mid else 0.0
                           for i, (I, _) in enumerate(_edge_integrals(poles, v, edges))])
        return ChebotarevCenter(poles, v, edges, masses, 0.0, degenerate=True)
    c = poles.mean()
    best = None
    for edges, groups in _tree_topologies(p):
        if p == 2:
            init = [c]
        else:
            init = [(poles[g[0]] + poles[g[1]] + c) / 3 for g in groups]
        try:
            v, res, masses, it = _gauss_newton_tree(poles, init, edges)
        except (FloatingPointError, np.linalg.LinAlgError):
            continue
        if not np.all(np.isfinite(v)) or res > 1e-10:
            continue
        segs = [(_point(a, poles, v), _point(b, poles, v)) for a, b in edges]
        if any(segments_intersect(*s, *t) for s, t in itertools.combinations(segs, 2)):
            continue
        if abs(masses.sum() - 1) > 1e-8:
            continue
        if best is None or res < best.residual:
            best = ChebotarevCenter(poles, v, edges, masses, res, iterations=it)
    if best is None:
        raise NewtonFailure("Chebotarev Newton did not converge; "
                            "initialise by continuation from a nearby symmetric configuration")
    return best


# -- period systems ------------------------------------------------------------

def solve_period_system(poles, cuts: CutSystem, targets, init, v_ref=None, tol: float = 1e-10,
                        max_iter: int = 40) -> tuple[np.ndarray, CutSystem]:
    """Solve w_j(v) = t_j (j < p-1) with the cuts carried along with v.

    ``v_ref`` is the zero vector the cut system was drawn for (default ``init``).
    Returns the solution and its deformed cut system.
    """
    poles = np.asarray(poles, dtype=complex)
    t = np.asarray(targets, dtype=complex)
    v = np.asarray(init, dtype=complex).copy()
    ref = np.asarray(v_ref if v_ref is not None else init, dtype=complex)
    cur = cuts.moved(poles, ref, v)
    validate(cur, poles, v)
    sc = _scale(poles, v)
    rows = list(range(len(v)))
    for _ in range(max_iter):
        ch = periods(poles, v, cur, check=False)
        F = ch.w[rows] - t
        if np.max(np.abs(F)) < tol:
            return v, cur
        J = period_jacobian(poles, v, cur, rows=rows)
        try:
            dv = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError as exc:
            raise DegenerateJacobian(str(exc)) from exc
        clear = np.min(np.abs(poles[None, :] - v[:, None]))
        lim = 0.5 * max(clear, 1e-6 * sc)
        if np.max(np.abs(dv)) > lim:
            dv *= lim / np.max(np.abs(dv))
        v_new = v + dv
        nxt = cur.moved(poles, v, v_new)
        validate(nxt, poles, v_new)
        v, cur = v_new, nxt
    ch = periods(poles, v, cur, check=False)
    if np.max(np.abs(ch.w[rows] - t)) < tol:
        return v, cur
    raise NewtonFailure(f"period Newton stalled at residual {np.max(np.abs(ch.w[rows] - t)):.2e}")


def _gamma_cuts(poles, v, k: int) -> CutSystem:
    others = [i for i in range(3) if i != k]
    return straight_cuts(poles, v, [(f"a{k}", "v0"), (f"a{others[0]}", f"a{others[1]}")])


def continue_distinguished_arc(poles, k: int, steps: int = 50, cheb: ChebotarevCenter | None = None,
                               extend: float = 0.0) -> dict:
    """Samples (mass, v) of the distinguished arc from pole a_k to the Chebotarev centre.

    The mass parameter is w = (1/(pi i)) int_{a_k}^{v} sqrt(R), which runs from 0
    at a_k to the Chebotarev mass m_k at v*.  With ``extend`` > 0 the same
    analytic arc is continued past a_k (negative masses) until |v - a_k| exceeds
    ``extend`` times the pole diameter.
    """
    poles = np.asarray(poles, dtype=complex)
    if len(poles) != 3:
        raise ValueError("distinguished arcs are defined for three poles")
    cheb = cheb or chebotarev_center(poles)
    vstar = complex(cheb.v[0])
    mk = cheb.edge_mass(f"a{k}", "v0")
    ts = [0.0]
    vs = [complex(poles[k])]
    if mk == 0.0:
        return {"pole": k, "mass": np.array(ts), "v": np.array(vs), "m_k": 0.0, "vstar": vstar}
    dt = mk / steps
    floor = 1e-4 * mk

    def solve(t_target, guess):
        v_new, _ = solve_period_system(poles, _gamma_cuts(poles, [guess], k), [t_target], [guess])
        return complex(v_new[0])

    def predict(t_target):
        if len(vs) >= 2:
            slope = (vs[-1] - vs[-2]) / (ts[-1] - ts[-2])
            return vs[-1] + slope * (t_target - ts[-1])
        return poles[k] + (vstar - poles[k]) * (t_target / mk)

    for j in range(1, steps + 1):
        t_target = mk if j == steps else mk * j / steps
        if cheb.degenerate and j == steps:
            ts.append(mk)
            vs.append(vstar)
            break
        # substeps are used for continuation only; samples stay on the grid
        t_cur, v_cur, h = ts[-1], vs[-1], dt
        while True:
            t_next = min(t_cur + h, t_target)
            guess = v_cur + (predict(t_next) - predict(t_cur)) if t_cur != ts[-1] else predict(t_next)
            try:
                v_next = solve(t_next, guess)
            except (BoundaryHit, NewtonFailure, RerouteNeeded, DegenerateJacobian):
                h *= 0.5
                if h < floor:
                    raise
                continue
            t_cur, v_cur = t_next, v_next
            if t_cur >= t_target:
                break
        ts.append(t_target)
        vs.append(v_cur)
    if extend > 0:
        diam = max(abs(a - b) for a, b in itertools.combinations(poles, 2))
        back_t = [ts[1], 0.0]
        back_v = [vs[1], vs[0]]
        while abs(back_v[-1] - poles[k]) < extend * diam:
            t_next = back_t[-1] - dt
            slope = (back_v[-1] - back_v[-2]) / (back_t[-1] - back_t[-2])
            guess = back_v[-1] + slope * (t_next - back_t[-1])
            try:
                v_new, _ = solve_period_system(poles, _gamma_cuts(poles, [guess], k), [t_next], [guess])
            except (BoundaryHit, NewtonFailure, RerouteNeeded, DegenerateJacobian):
                break
            back_t.append(t_next)
            back_v.append(complex(v_new[0]))
        ts = back_t[:1:-1] + ts
        vs = back_v[:1:-1] + vs
    return {"pole": k, "mass": np.array(ts), "v": np.array(vs), "m_k": mk, "vstar": vstar}


def sample_V_arcs(poles, budget: float = 0.0, steps: int = 40) -> list[dict]:
    """The three distinguished arcs, each from its pole to v* (and ``budget`` diameters past the pole)."""
    poles = np.asarray(poles, dtype=complex)
    cheb = chebotarev_center(poles)
    out = []
    for k in range(3):
        arc = continue_distinguished_arc(poles, k, steps, cheb=cheb, extend=budget)
        arc["gamma_pole"] = f"a{k}"
        out.append(arc)
    return out


def enter_cell(poles, choice: Sequence[str], fractions, steps: int = 10,
               cheb: ChebotarevCenter | None = None) -> dict:
    """Move from the Chebotarev centre into the cell selected by ``choice``.

    The masses of the first p-1 arcs of the cell's cut system are scaled from
    their Chebotarev values by ``fractions`` in ``steps`` continuation steps.
    Returns the zero vector, the cut system and the period chart.
    """
    poles = np.asarray(poles, dtype=complex)
    cheb = cheb or chebotarev_center(poles)
    cuts = cheb.cuts(choice)
    vstar = cheb.v.copy()
    ch0 = periods(poles, vstar, cuts, check=False)
    p1 = len(vstar)
    t0 = ch0.w[:p1].real
    t1 = t0 * np.asarray(fractions, dtype=float)
    v, cur = vstar.copy(), cuts
    path = [v.copy()]
    for s in range(1, steps + 1):
        tgt = t0 + (t1 - t0) * s / steps
        v, cur = solve_period_system(poles, cur, tgt, v)
        path.append(v.copy())
    return {"v": v, "cuts": cur, "chart": periods(poles, v, cur), "path": np.array(path),
            "start_masses": t0, "targets": t1}


def arc_samples_csv(arc: dict) -> str:
    lines = ["mass,re,im"]
    lines += [f"{t:.12g},{z.real:.12g},{z.imag:.12g}" for t, z in zip(arc["mass"], arc["v"])]
    return "\n".join(lines) + "\n"
