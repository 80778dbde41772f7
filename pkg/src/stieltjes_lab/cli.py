"""stieltjes-lab command line: stieltjes-lab <command> --spec <file> --out <dir> [--seed <u64>].

Data goes to files in --out, diagnostics to stderr.  Exit codes: 0 success,
2 input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import asymptotics, lame, measures, periods, plotting, qdiff
from .electrostatics import Diverged
from .poly import ComplexPoly

EXIT_INPUT = 2
EXIT_NUMERIC = 3

COMMAND_MODES = {
    "solve": ("heun", "stieltjes"),
    "trace": ("qdiff",),
    "chebotarev": ("chebotarev",),
    "cell": ("cell",),
    "weaklimit": ("weaklimit",),
    "vanvleck": ("vanvleck",),
}

_num = {"oneOf": [{"type": "number"},
                  {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["poles", "mode"],
    "properties": {
        "poles": {"type": "array", "items": _num, "minItems": 2},
        "residues": {"type": "array", "items": _num},
        "n": {"oneOf": [{"type": "integer", "minimum": 0},
                        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1}]},
        "mode": {"enum": ["heun", "stieltjes", "qdiff", "chebotarev", "cell", "weaklimit", "vanvleck"]},
        "v": {"anyOf": [_num, {"type": "array", "items": _num}]},
        "targets": {"type": "array", "items": {"type": "number"}},
        "theta": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1},
                  "minItems": 2, "maxItems": 2},
        "k": {"type": "integer", "minimum": 0},
        "choice": {"type": "array", "items": {"type": "string"}},
        "budget": {"type": "number", "exclusiveMinimum": 0},
        "steps": {"type": "integer", "minimum": 1},
        "probes": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
    },
}


class InputError(ValueError):
    pass


def _c(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def _pair(z: complex) -> list:
    return [round(float(z.real), 12), round(float(z.imag), 12)]


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _csv(path: Path, header: str, rows) -> None:
    lines = [header] + [",".join(f"{x:.12g}" if isinstance(x, float) else str(x) for x in r) for r in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_spec(path: str) -> dict:
    try:
        spec = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as err:
        raise InputError(f"cannot read spec: {err}") from err
    try:
        jsonschema.validate(spec, SCHEMA)
    except jsonschema.ValidationError as err:
        raise InputError(f"spec invalid: {err.message}") from err
    return spec


def _poles(spec) -> np.ndarray:
    return np.array([_c(a) for a in spec["poles"]])


def _residues(spec, p1: int) -> np.ndarray:
    if "residues" not in spec:
        raise InputError("residues are required for this mode")
    r = np.array([_c(x) for x in spec["residues"]])
    if r.size != p1:
        raise InputError("one residue per pole is required")
    return r


def _nlist(spec) -> list:
    n = spec.get("n")
    if n is None:
        raise InputError("degree n is required for this mode")
    return n if isinstance(n, list) else [n]


def _vlist(spec) -> list:
    v = spec.get("v")
    if v is None:
        raise InputError("v is required for this mode")
    if isinstance(v, list) and v and isinstance(v[0], list):
        return [_c(x) for x in v]
    return [_c(v)]


# -- commands ---------------------------------------------------------------------

def cmd_solve(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    res = _residues(spec, poles.size)
    ns = _nlist(spec)
    if len(ns) != 1:
        raise InputError("solve takes a single degree")
    prob = lame.LameProblem(poles, res, ns[0])
    if spec["mode"] == "heun":
        if prob.p != 2:
            raise InputError("heun mode needs three poles")
        pairs = lame.heun_spectrum(prob)
    else:
        if not prob.is_stieltjes():
            raise InputError("stieltjes mode needs real poles and positive residues")
        if prob.n == 0:
            pairs = [lame.HSPair(ComplexPoly([1.0]), ComplexPoly([1.0]), 0j,
                                 np.zeros(0, dtype=complex), {"trivial": True})]
        else:
            pairs = lame.stieltjes_enumerate(prob)
    entries, rows, cloud = [], [], []
    for j, pp in enumerate(pairs):
        z = np.sort_complex(np.asarray(pp.zeros, dtype=complex))
        entries.append({
            "index": j,
            "v": [_pair(v) for v in np.sort_complex(pp.v)],
            "vanvleck": [_pair(c) for c in pp.vanvleck.coeffs],
            "zeros": [_pair(x) for x in z],
            "residual": float(f"{lame.residual(pp, prob):.3e}") if prob.n else 0.0,
        })
        rows += [(j, float(x.real), float(x.imag)) for x in z]
        cloud.append(z)
    _dump(out / "pairs.json", {"n": prob.n, "count": len(pairs), "heine_bound": lame.heine_count(prob.n, prob.p),
                               "pairs": entries})
    _csv(out / "zeros.csv", "pair,re,im", rows)
    allz = np.concatenate(cloud) if cloud else np.zeros(0, dtype=complex)
    plotting.render_curves(out / "render.svg", poles=poles, cloud=allz)


def _sampled_trajectories(qd, count: int = 4, budget: float = 3.0) -> list:
    pts = np.concatenate([qd.poles, qd.zeros])
    c = pts.mean()
    rad = max(float(np.max(np.abs(pts - c))), 1e-9)
    out = []
    for j in range(count):
        z0 = c + 1.25 * rad * np.exp(1j * (0.4 + 2 * np.pi * j / count))
        tr = qdiff.trace(qd, z0, 1.0, budget=budget, stop_on_recurrence=True)
        out.append(tr.points)
    return out


def cmd_trace(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    vs = _vlist(spec)
    if len(vs) != poles.size - 2:
        raise InputError(f"{poles.size} poles need {poles.size - 2} values of v")
    budget = float(spec.get("budget", 50.0))
    qd = qdiff.QuadDiff.from_roots(poles, vs)
    graph = qdiff.critical_graph(qd, budget=budget, stop_on_recurrence=True)
    cls = None
    failure = None
    if poles.size == 3:
        try:
            cls = qdiff.classify_p2(qd, budget=budget)
        except qdiff.Inconclusive as err:
            failure = err
    doc = {
        "class": cls,
        "closed": bool(graph.closed),
        "critical_points": [{"label": lab, "point": _pair(z), "order": int(k)}
                            for lab, z, k in qd.critical_points()],
        "trajectories": [{"ends": list(t.endpoints), "kind": t.kind,
                          "omega_length": round(float(t.omega_length), 12),
                          "points": [_pair(z) for z in t.points]} for t in graph.trajectories],
    }
    if failure is not None:
        doc["diagnostics"] = {"message": str(failure), **{k: str(v) for k, v in failure.diagnostics.items()}}
    _dump(out / "graph.json", doc)
    plotting.render_graph(out / "render.svg", graph, light=_sampled_trajectories(qd),
                          title=cls or ("closed" if graph.closed else None))
    if failure is not None:
        raise failure


def cmd_chebotarev(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    ch = periods.chebotarev_center(poles)
    pts = {f"a{i}": complex(a) for i, a in enumerate(poles)}
    pts.update({f"v{j}": complex(z) for j, z in enumerate(ch.v)})
    _dump(out / "vstar.json", {
        "vstar": [_pair(z) for z in ch.v],
        "edges": [list(e) for e in ch.edges],
        "masses": [round(float(m), 12) for m in ch.masses],
        "residual": float(f"{ch.residual:.3e}"),
        "degenerate": bool(ch.degenerate),
    })
    rows = [(a, b, round(float(m), 12), pts[a].real, pts[a].imag, pts[b].real, pts[b].imag)
            for (a, b), m in zip(ch.edges, ch.masses)]
    _csv(out / "cuts.csv", "from,to,mass,re0,im0,re1,im1", rows)
    plotting.render_curves(out / "render.svg", heavy=[np.array([pts[a], pts[b]]) for a, b in ch.edges],
                           poles=poles, zeros=ch.v)


def cmd_cell(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    steps = int(spec.get("steps", 50))
    if poles.size == 3:
        ks = [spec["k"]] if "k" in spec else [0, 1, 2]
        cheb = periods.chebotarev_center(poles)
        lines = []
        for k in ks:
            if k > 2:
                raise InputError("k must index a pole")
            arc = periods.continue_distinguished_arc(poles, k, steps, cheb=cheb)
            (out / f"arc_{k}.csv").write_text(periods.arc_samples_csv(arc), encoding="utf-8")
            lines.append(arc["v"])
        plotting.render_curves(out / "render.svg", heavy=lines, poles=poles, zeros=cheb.v)
        return
    choice = spec.get("choice")
    if choice is None or len(choice) != poles.size - 2:
        raise InputError("cells of more than three poles need one choice per zero")
    targets = spec.get("targets", [0.8] * (poles.size - 2))
    res = periods.enter_cell(poles, choice, targets, steps=steps)
    ch = res["chart"]
    _dump(out / "cell.json", {"v": [_pair(z) for z in res["v"]], "w": [_pair(w) for w in ch.w],
                              "targets": [round(float(t), 12) for t in np.real(res["targets"])]})
    path = np.asarray(res["path"])
    rows = [(j, float(z.real), float(z.imag)) for j, row in enumerate(path) for z in np.atleast_1d(row)]
    _csv(out / "path.csv", "step,re,im", rows)
    plotting.render_curves(out / "render.svg", heavy=[np.array(a) for a in res["cuts"].arcs],
                           light=[path[:, j] for j in range(path.shape[1])] if path.ndim == 2 else [],
                           poles=poles, zeros=res["v"])


def cmd_weaklimit(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    if poles.size != 3:
        raise InputError("weaklimit needs three poles")
    res = _residues(spec, 3)
    ns = _nlist(spec)
    theta = spec.get("theta")
    target = _vlist(spec)[0] if "v" in spec else None
    if theta is None and target is None:
        raise InputError("weaklimit needs theta or v")
    rep = asymptotics.weak_limit_experiment(poles, res, ns, theta=theta, target=target, seed=seed)
    _dump(out / "report.json", rep.to_json())
    (out / "report.csv").write_text(rep.to_csv(), encoding="utf-8")
    mu = asymptotics.limit_measure(poles, rep.v_target)
    pair = asymptotics._nearest_pair(lame.LameProblem(poles, res, ns[-1]), rep.v_target)
    plotting.render_curves(out / "overlay.svg", heavy=[a.points for a in mu.arcs], poles=poles,
                           zeros=[rep.v_target], cloud=pair.zeros)


def cmd_vanvleck(spec, out: Path, seed: int) -> None:
    poles = _poles(spec)
    if poles.size != 3:
        raise InputError("vanvleck needs three poles")
    res = _residues(spec, 3)
    ns = _nlist(spec)
    rep = asymptotics.vanvleck_accumulation(poles, res, ns, steps=int(spec.get("steps", 40)))
    rows = rep["rows"]
    _dump(out / "report.json", {
        "label": rep["label"],
        "decreasing": bool(rep["decreasing"]),
        "rows": [{"n": r["n"], "max_distance": round(r["max_distance"], 12), "in_hull": r["in_hull"],
                  "v": [_pair(v) for v in np.sort_complex(r["v"])]} for r in rows],
    })
    _csv(out / "report.csv", "n,max_distance,in_hull",
         [(r["n"], float(r["max_distance"]), int(r["in_hull"])) for r in rows])
    plotting.render_curves(out / "overlay.svg", heavy=rep["arcs"], poles=poles,
                           cloud=np.concatenate([r["v"] for r in rows]))


COMMANDS = {
    "solve": cmd_solve,
    "trace": cmd_trace,
    "chebotarev": cmd_chebotarev,
    "cell": cmd_cell,
    "weaklimit": cmd_weaklimit,
    "vanvleck": cmd_vanvleck,
}

NUMERIC_ERRORS = (Diverged, qdiff.Inconclusive, periods.BoundaryHit, periods.RerouteNeeded,
                  periods.DegenerateJacobian, periods.NewtonFailure, measures.NotClosed,
                  measures.Disagreement, asymptotics.BranchLost, ArithmeticError,
                  np.linalg.LinAlgError)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="stieltjes-lab")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--spec", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seed", type=int, default=None)
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return EXIT_INPUT if err.code else 0
    try:
        spec = load_spec(args.spec)
        if spec["mode"] not in COMMAND_MODES[args.command]:
            raise InputError(f"command {args.command} does not take mode {spec['mode']}")
        seed = args.seed if args.seed is not None else int(spec.get("seed", 0))
        if not 0 <= seed < 2**64:
            raise InputError("seed must fit in an unsigned 64-bit integer")
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            COMMANDS[args.command](spec, out, seed)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except NUMERIC_ERRORS as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        diag = getattr(err, "diagnostics", None)
        if diag:
            print(f"diagnostics: {diag}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
