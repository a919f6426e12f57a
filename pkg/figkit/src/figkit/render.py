"""Render sweep and field CSVs into the three standard figure kinds.

contour      fidelity map over coupling and quality factor, solid numeric
             contours with dashed analytic-estimate contours
temperature  loading fidelity and final fidelity against temperature, with
             a zero-temperature inset
profile      coupling against height above the chip at the resonator
             midpoint and the gap center, log scale

Rendering is read-only over its inputs and deterministic: the same CSV and
styling produce byte-identical images.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("contour", "profile", "temperature")

REQUIRED_COLUMNS = {
    "contour": ("g_over_2pi_hz", "q_factor", "f_bell", "f_analytic"),
    "temperature": ("temp_k", "f_bell", "f_gamma"),
    "profile": ("x_m", "z_m", "e0_v_per_m", "g_over_2pi_hz"),
}

FIDELITY_LEVELS = (0.9, 0.99, 0.999)


class SchemaError(ValueError):
    """The CSV is missing columns the figure kind needs."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        super().__init__("missing columns: " + ", ".join(self.missing))


@dataclass(frozen=True)
class FigureSpec:
    csv_path: str
    kind: str
    out_path: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}, expected {KINDS}")


@dataclass(frozen=True)
class RenderInfo:
    kind: str
    out_path: str
    contour_levels: tuple = ()


def load_columns(path, required) -> dict:
    """Read the named CSV columns; raise SchemaError naming any that are absent."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(missing)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, header.index(name)] for name in required}


def _pivot(rows, cols, values):
    """Rows of an axis-product sweep back into a (rows, cols) grid."""
    r = np.unique(rows)
    c = np.unique(cols)
    grid = np.full((r.size, c.size), np.nan)
    ri = np.searchsorted(r, rows)
    ci = np.searchsorted(c, cols)
    grid[ri, ci] = values
    return r, c, grid


def _render_contour(spec: FigureSpec):
    cols = load_columns(spec.csv_path, REQUIRED_COLUMNS["contour"])
    g, q, f = _pivot(cols["g_over_2pi_hz"], cols["q_factor"], cols["f_bell"])
    _, _, f_an = _pivot(cols["g_over_2pi_hz"], cols["q_factor"], cols["f_analytic"])
    levels = tuple(spec.style.get("levels", FIDELITY_LEVELS))

    fig, ax = plt.subplots(figsize=spec.style.get("figsize", (6.0, 4.5)))
    qq, gg = np.meshgrid(q, g / 1e6)
    cs = ax.contour(qq, gg, f, levels=levels, colors="tab:blue")
    ax.clabel(cs, fmt="%.3g", fontsize=8)
    ax.contour(qq, gg, f_an, levels=levels, colors="tab:red",
               linestyles="dashed", linewidths=1.0)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("quality factor Q")
    ax.set_ylabel("g / 2$\\pi$ (MHz)")
    ax.set_title("entangled-state preparation fidelity"
                 "  (solid: numeric, dashed: analytic)")
    drawn = tuple(lvl for lvl, segs in zip(cs.levels, cs.allsegs) if len(segs))
    return fig, drawn


def _render_temperature(spec: FigureSpec):
    cols = load_columns(spec.csv_path, REQUIRED_COLUMNS["temperature"])
    t_mk = cols["temp_k"] * 1e3
    fig, ax = plt.subplots(figsize=spec.style.get("figsize", (6.0, 4.5)))
    ax.plot(t_mk, cols["f_gamma"], "o-", ms=3, label="$F_\\gamma$ (cavity loading)")
    ax.plot(t_mk, cols["f_bell"], "s-", ms=3, label="$F$ (entangled state)")
    ax.set_xlabel("temperature (mK)")
    ax.set_ylabel("fidelity")
    ax.legend(loc="lower left")

    inset = ax.inset_axes([0.55, 0.55, 0.42, 0.4])
    sel = t_mk <= 50.0
    inset.plot(t_mk[sel], cols["f_gamma"][sel], "o-", ms=2)
    inset.plot(t_mk[sel], cols["f_bell"][sel], "s-", ms=2)
    inset.set_xlim(0, 50)
    inset.set_title("0-50 mK", fontsize=8)
    inset.tick_params(labelsize=7)
    return fig, ()


def _render_profile(spec: FigureSpec):
    cols = load_columns(spec.csv_path, REQUIRED_COLUMNS["profile"])
    x, z = cols["x_m"], cols["z_m"]
    g_mhz = cols["g_over_2pi_hz"] / 1e6

    xs = np.unique(x)
    mid = xs[np.argmin(np.abs(xs))]
    surface = np.abs(z - z[z >= 0].min()) < 1e-12
    peak_idx = np.argmax(cols["e0_v_per_m"] * surface)
    gap = x[peak_idx]

    fig, ax = plt.subplots(figsize=spec.style.get("figsize", (6.0, 4.5)))
    for x0, label in ((gap, "gap center"), (mid, "midpoint")):
        sel = (np.abs(x - x0) < 1e-12) & (z >= 0)
        order = np.argsort(z[sel])
        ax.semilogy(z[sel][order] * 1e6, g_mhz[sel][order], label=label)
    ax.set_xlabel("height above surface ($\\mu$m)")
    ax.set_ylabel("g / 2$\\pi$ (MHz)")
    ax.legend()
    return fig, ()


_RENDERERS = {
    "contour": _render_contour,
    "temperature": _render_temperature,
    "profile": _render_profile,
}


def render(spec: FigureSpec) -> RenderInfo:
    """Write the figure for ``spec`` and report what was drawn."""
    fig, contour_levels = _RENDERERS[spec.kind](spec)
    try:
        fig.savefig(spec.out_path, dpi=spec.style.get("dpi", 150))
    finally:
        plt.close(fig)
    return RenderInfo(kind=spec.kind, out_path=str(spec.out_path),
                      contour_levels=contour_levels)
