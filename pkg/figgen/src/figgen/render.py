"""Offline figure rendering from the simulator's CSV artifacts.

Strictly a view layer: inputs are read once and never written, and the
physics is taken as-is from the files. Band-index maps use a diverging
colormap centered at zero; spin coloring follows the red = spin-up,
blue = spin-down convention. Output is vector (SVG) unless the target
extension says otherwise; rendering is deterministic for fixed inputs
(hashed SVG ids are salted, date metadata suppressed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figgen"

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import Normalize
from matplotlib.patches import Circle

from .schemas import SchemaError, first_finite, load_table, pivot_grid

FIGURE_IDS = ("fig1-bands", "fig2-sweep", "fig3-pointsource", "fig4-phase")

_BAND_CMAP = "coolwarm"


@dataclass(frozen=True)
class FigureSpec:
    """What to render: a figure id, its input files, and the output path."""

    figure_id: str
    inputs: dict[str, Path]
    output: Path
    axis_ranges: dict[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.figure_id not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id {self.figure_id!r}")


def default_inputs(figure_id: str, in_dir: Path) -> dict[str, Path]:
    """Conventional artifact names for each figure inside one directory."""
    if figure_id == "fig1-bands":
        return {"bands": in_dir / "bands.csv"}
    if figure_id == "fig2-sweep":
        names = sorted(in_dir.glob("speedsweep*.csv"))
        if not names:
            raise SchemaError(f"no speedsweep*.csv in {in_dir}")
        return {p.stem: p for p in names}
    if figure_id == "fig3-pointsource":
        return {"pointsource": in_dir / "pointsource.csv", "natfront": in_dir / "natfront.csv"}
    if figure_id == "fig4-phase":
        return {"phasediagram": in_dir / "phasediagram.csv", "boundary": in_dir / "boundary.csv"}
    raise SchemaError(f"unknown figure id {figure_id!r}")


def _save(fig, output: Path) -> None:
    output.parent.mkdir(parents=True, exist_ok=True)
    fmt = output.suffix.lstrip(".").lower() or "svg"
    metadata = None
    if fmt == "svg":
        metadata = {"Date": None}
    elif fmt == "pdf":
        metadata = {"CreationDate": None}
    fig.savefig(output, format=fmt, metadata=metadata)
    plt.close(fig)


def _apply_ranges(ax, axis_ranges) -> None:
    if "x" in axis_ranges:
        ax.set_xlim(*axis_ranges["x"])
    if "y" in axis_ranges:
        ax.set_ylim(*axis_ranges["y"])


def _render_bands(spec: FigureSpec) -> dict:
    table = load_table(spec.inputs["bands"], "bands")
    qs, gs, grids = pivot_grid(
        table["qx"],
        table["dgamma"],
        {
            "re_p": table["re_E_plus"],
            "im_p": table["im_E_plus"],
            "re_m": table["re_E_minus"],
            "im_m": table["im_E_minus"],
            "spin_p": table["spin_plus"],
            "spin_m": table["spin_minus"],
        },
    )
    gg, qq = np.meshgrid(gs, qs)
    norm = Normalize(vmin=-1.0, vmax=1.0)
    cmap = matplotlib.colormaps[_BAND_CMAP]

    fig = plt.figure(figsize=(11, 5))
    for idx, (part, title) in enumerate((("re", "Re(E)"), ("im", "Im(E)")), start=1):
        ax = fig.add_subplot(1, 2, idx, projection="3d")
        for band in ("p", "m"):
            surface = grids[f"{part}_{band}"]
            colors = cmap(norm(np.nan_to_num(grids[f"spin_{band}"], nan=0.0)))
            ax.plot_surface(
                qq,
                gg,
                surface,
                facecolors=colors,
                rstride=1,
                cstride=1,
                linewidth=0,
                antialiased=False,
                shade=False,
            )
        ax.set_xlabel("quasimomentum")
        ax.set_ylabel("loss contrast")
        ax.set_title(title)
    fig.suptitle("Complex energy bands colored by spin polarization")
    _save(fig, spec.output)
    return {"figure_id": spec.figure_id, "output": str(spec.output), "grid": (qs.size, gs.size)}


def _render_sweep(spec: FigureSpec) -> dict:
    fig, ax = plt.subplots(figsize=(6, 4))
    curves = 0
    for name in sorted(spec.inputs):
        table = load_table(spec.inputs[name], "speedsweep")
        order = np.argsort(table["speed"])
        ax.semilogx(table["speed"][order], table["band_index_final"][order], marker="o", label=name)
        curves += 1
    ax.set_xlabel("parameter speed |v|")
    ax.set_ylabel("final band index")
    ax.set_ylim(-1.1, 1.1)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    if curves > 1:
        ax.legend()
    _apply_ranges(ax, spec.axis_ranges)
    _save(fig, spec.output)
    return {"figure_id": spec.figure_id, "output": str(spec.output), "curves": curves}


def _render_point_source(spec: FigureSpec) -> dict:
    table = load_table(spec.inputs["pointsource"], "pointsource")
    front = load_table(spec.inputs["natfront"], "natfront")
    origin_rows = table["arclen"] == 0.0
    if np.any(origin_rows):
        origin = (table["qx"][origin_rows][0], table["dgamma"][origin_rows][0])
    else:
        origin = (table["qx"][0], table["dgamma"][0])
    radius = first_finite(front["radius_predicted"])

    fig, ax = plt.subplots(figsize=(5.5, 5))
    sc = ax.scatter(
        table["qx"],
        table["dgamma"],
        c=table["band_index"],
        cmap=_BAND_CMAP,
        vmin=-1.0,
        vmax=1.0,
        s=4,
        linewidths=0,
    )
    overlay = None
    if math.isfinite(radius):
        overlay = Circle(origin, radius, fill=False, color="black", linewidth=1.5)
        ax.add_patch(overlay)
    ax.plot([origin[0]], [origin[1]], marker="+", color="black")
    ax.set_xlabel("quasimomentum")
    ax.set_ylabel("loss contrast")
    ax.set_aspect("equal")
    fig.colorbar(sc, ax=ax, label="band index")
    _apply_ranges(ax, spec.axis_ranges)
    _save(fig, spec.output)
    return {
        "figure_id": spec.figure_id,
        "output": str(spec.output),
        "origin": origin,
        "overlay_radius": float(overlay.get_radius()) if overlay is not None else float("nan"),
    }


def _render_phase(spec: FigureSpec) -> dict:
    table = load_table(spec.inputs["phasediagram"], "phasediagram")
    boundary = load_table(spec.inputs["boundary"], "boundary")
    xs, hs, grids = pivot_grid(table["x_m"], table["h"], {"band": table["band_index_final"]})

    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(
        xs, hs, grids["band"].T, cmap=_BAND_CMAP, vmin=-1.0, vmax=1.0, shading="nearest"
    )
    finite = np.isfinite(boundary["h_star"])
    ax.plot(boundary["x_m"][finite], boundary["h_star"][finite], color="blue", linewidth=2)
    ax.set_xlabel("spike position x_m")
    ax.set_ylabel("spike height h")
    fig.colorbar(mesh, ax=ax, label="final band index")
    _apply_ranges(ax, spec.axis_ranges)
    _save(fig, spec.output)
    return {
        "figure_id": spec.figure_id,
        "output": str(spec.output),
        "boundary_points": int(np.count_nonzero(finite)),
    }


_RENDERERS = {
    "fig1-bands": _render_bands,
    "fig2-sweep": _render_sweep,
    "fig3-pointsource": _render_point_source,
    "fig4-phase": _render_phase,
}


def render(spec: FigureSpec) -> dict:
    """Render one figure; returns a small summary of what was drawn."""
    for name, path in spec.inputs.items():
        if not Path(path).exists():
            raise SchemaError(f"input {name} not found: {path}")
    return _RENDERERS[spec.figure_id](spec)
