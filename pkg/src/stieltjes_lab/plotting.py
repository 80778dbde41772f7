"""SVG renders of trajectories, supports and zero clouds.

Output is byte-stable: fixed hash salt, no date metadata, text kept as text.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "svg.hashsalt": "stieltjes-lab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
    "xtick.major.width": 0.6,
    "ytick.major.width": 0.6,
    "path.simplify": False,
}

HEAVY = dict(color="black", lw=1.6, solid_capstyle="round")
LIGHT = dict(color="0.55", lw=0.6)


def _frame(ax, chunks) -> None:
    """Equal-aspect limits from the data bounding box plus a 5% margin."""
    pts = np.concatenate([np.atleast_1d(np.asarray(c, dtype=complex)) for c in chunks if len(c)])
    pts = pts[np.isfinite(pts)]
    x0, x1 = pts.real.min(), pts.real.max()
    y0, y1 = pts.imag.min(), pts.imag.max()
    w = max(x1 - x0, y1 - y0, 1e-9)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    h = 0.5 * w * 1.1
    ax.set_xlim(cx - h, cx + h)
    ax.set_ylim(cy - h, cy + h)
    ax.set_aspect("equal")


def _markers(ax, poles=(), zeros=()) -> None:
    poles = np.asarray(poles, dtype=complex)
    zeros = np.asarray(zeros, dtype=complex)
    if poles.size:
        ax.plot(poles.real, poles.imag, "o", ms=5, mfc="white", mec="black", mew=1.0, zorder=5)
    if zeros.size:
        ax.plot(zeros.real, zeros.imag, "o", ms=4, color="black", zorder=6)


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def render_curves(path, heavy=(), light=(), poles=(), zeros=(), cloud=(), title: str | None = None) -> None:
    """Heavy and light polylines with pole/zero markers and an optional point cloud."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        for c in light:
            c = np.asarray(c)
            ax.plot(c.real, c.imag, **LIGHT)
        for c in heavy:
            c = np.asarray(c)
            ax.plot(c.real, c.imag, **HEAVY)
        cloud = np.asarray(cloud, dtype=complex)
        if cloud.size:
            ax.plot(cloud.real, cloud.imag, ".", ms=3, color="tab:red", zorder=7)
        _markers(ax, poles, zeros)
        _frame(ax, list(heavy) + list(light) + [np.asarray(poles, dtype=complex),
                                               np.asarray(zeros, dtype=complex), cloud])
        if title:
            ax.set_title(title)
        _save(fig, path)


def render_graph(path, graph, light=(), title: str | None = None) -> None:
    """Critical trajectories heavy, everything else (truncated, sampled) light."""
    heavy = [t.points for t in graph.trajectories if t.kind in ("critical", "closed")]
    rest = [t.points for t in graph.trajectories if t.kind not in ("critical", "closed")]
    render_curves(path, heavy, rest + [np.asarray(c) for c in light], graph.qd.poles,
                  graph.qd.zeros, title=title)
