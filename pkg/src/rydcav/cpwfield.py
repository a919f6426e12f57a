"""Quasi-static field of the coplanar-waveguide cross-section.

Solves div(eps grad phi) = 0 on a uniform 2D grid over the transverse
cross-section (x across the traces, z normal to the chip), with the
conductors as zero-thickness Dirichlet strips on the z = 0 line: center
trace at 1 V, ground planes and the outer box at 0 V.  The substrate fills
z < 0.  Permittivities live on cell rows; flux-link coefficients take the
harmonic mean across the substrate interface.  The solver is plain
red-black successive over-relaxation.

The unit-voltage solution is rescaled to the zero-point field of the
half-wave mode through the energy identity
    hbar omega_c / 2 = integral eps(r) |E0(r)|^2 d^3 r,
where the longitudinal integral of cos^2 over the resonator contributes a
factor L/2.  The coupling map is g(x, z) = |E0| d / hbar.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from .constants import C_LIGHT, EPS_0, HBAR, TWO_PI

SOR_OMEGA = 1.9
SOR_TOL = 1e-8       # max flux-form residual, in volts, against the 1 V scale
SOR_MAX_ITER = 10 ** 6


class SolverError(RuntimeError):
    """The iterative solve failed to converge within the iteration cap."""


@dataclass(frozen=True)
class CpwGeometry:
    """Cross-section geometry and mode parameters of the resonator.

    Lengths in meters.  Defaults: 20 um center trace, 10 um gaps, sapphire
    substrate (eps_r = 9.6), domain 120 um wide with 190 um of vacuum above
    the chip and 60 um of substrate below, 0.5 um grid.  The tall aspect
    ratio keeps the slowest grounded-box harmonic (decay scale W/pi) well
    damped before the top boundary.
    """

    s: float = 20e-6
    w: float = 10e-6
    eps_r: float = 9.6
    half_width: float = 60e-6
    height: float = 190e-6
    depth: float = 60e-6
    spacing: float = 0.5e-6
    omega_c: float = TWO_PI * 5.037e9
    length: float = None

    def __post_init__(self):
        if min(self.s, self.w, self.spacing, self.height, self.depth) <= 0:
            raise ValueError("geometry lengths must be positive")
        if self.spacing > self.w / 10:
            raise ValueError(f"spacing {self.spacing} exceeds w/10 = {self.w / 10}")
        if self.eps_r < 1:
            raise ValueError(f"eps_r must be >= 1, got {self.eps_r}")
        if self.half_width <= self.s / 2 + self.w:
            raise ValueError("domain too narrow: no room for ground planes")
        for extent in (2 * self.half_width, self.height, self.depth):
            ratio = extent / self.spacing
            if abs(ratio - round(ratio)) > 1e-9 * max(ratio, 1.0):
                raise ValueError("spacing must evenly divide the domain extents")

    @property
    def eps_eff(self) -> float:
        """Standard CPW effective permittivity, vacuum/substrate average."""
        return (1.0 + self.eps_r) / 2.0

    @property
    def resonator_length(self) -> float:
        """Half-wave resonator length; c/(sqrt(eps_eff) 2 f) unless given."""
        if self.length is not None:
            return self.length
        freq = self.omega_c / TWO_PI
        return C_LIGHT / (math.sqrt(self.eps_eff) * 2.0 * freq)


@dataclass
class FieldGrid:
    """Solved potential and field on the cross-section grid.

    potential[j, i] is phi at (z[j], x[i]) for the 1 V boundary problem;
    e_field[0/1] are the node-centered (Ex, Ez) in V/m per volt.
    zero_point_amplitude is the dimensionless scale mapping the unit-voltage
    field to the zero-point field (None until normalized).
    """

    geometry: CpwGeometry
    x: np.ndarray
    z: np.ndarray
    potential: np.ndarray
    e_field: np.ndarray
    eps_rows: np.ndarray
    fixed: np.ndarray
    residual: float
    iterations: int
    zero_point_amplitude: float = None

    def e_magnitude(self) -> np.ndarray:
        """|E| of the unit-voltage solution (V/m per volt)."""
        return np.sqrt(self.e_field[0] ** 2 + self.e_field[1] ** 2)

    def zero_point_field(self) -> np.ndarray:
        """|E0| in V/m; requires normalize_zero_point first."""
        if self.zero_point_amplitude is None:
            raise ValueError("grid is not normalized; call normalize_zero_point")
        return self.zero_point_amplitude * self.e_magnitude()

    def column(self, x_value: float) -> int:
        """Grid column index closest to x_value."""
        return int(np.argmin(np.abs(self.x - x_value)))


def _link_coefficients(eps_rows: np.ndarray, nz: int, nx: int):
    """Per-node flux-link coefficients from cell-row permittivities.

    Vertical links lie inside a single cell row; horizontal links span the
    cell rows above and below the node row, combined by harmonic mean (this
    only differs from either side on the substrate interface row).
    """
    a_n = np.zeros((nz, nx))
    a_s = np.zeros((nz, nx))
    a_n[:-1, :] = eps_rows[:, None]
    a_s[1:, :] = eps_rows[:, None]
    a_h = np.empty(nz)
    a_h[0] = eps_rows[0]
    a_h[-1] = eps_rows[-1]
    lo, hi = eps_rows[:-1], eps_rows[1:]
    a_h[1:-1] = 2.0 * lo * hi / (lo + hi)
    a_e = np.zeros((nz, nx))
    a_w = np.zeros((nz, nx))
    a_e[:, :-1] = a_h[:, None]
    a_w[:, 1:] = a_h[:, None]
    return a_e, a_w, a_n, a_s


def _residual(phi, fixed, a_e, a_w, a_n, a_s, den):
    r = np.zeros_like(phi)
    r[1:-1, 1:-1] = (
        a_e[1:-1, 1:-1] * phi[1:-1, 2:] + a_w[1:-1, 1:-1] * phi[1:-1, :-2]
        + a_n[1:-1, 1:-1] * phi[2:, 1:-1] + a_s[1:-1, 1:-1] * phi[:-2, 1:-1]
        - den[1:-1, 1:-1] * phi[1:-1, 1:-1]
    ) / den[1:-1, 1:-1]
    r[fixed] = 0.0
    return float(np.abs(r).max())


def solve_dirichlet(fixed: np.ndarray, boundary_values: np.ndarray,
                    eps_rows: np.ndarray, *, omega: float = SOR_OMEGA,
                    tol: float = SOR_TOL, max_iter: int = SOR_MAX_ITER,
                    check_every: int = 100):
    """Red-black SOR solve of div(eps grad phi) = 0 with Dirichlet nodes.

    fixed marks clamped nodes (value taken from boundary_values); eps_rows
    gives the permittivity of each cell row (length nz - 1, relative units
    are fine since only ratios enter).  Returns (phi, residual, sweeps).
    """
    nz, nx = fixed.shape
    phi = np.array(boundary_values, dtype=float)
    phi[~fixed & (phi != 0.0)] = 0.0
    a_e, a_w, a_n, a_s = _link_coefficients(np.asarray(eps_rows, float), nz, nx)
    den = a_e + a_w + a_n + a_s
    den[den == 0.0] = 1.0

    # checkerboard slice patterns over the interior, by (row parity, col parity)
    patterns = {0: [(1, 1), (2, 2)], 1: [(1, 2), (2, 1)]}

    def half_sweep(color):
        for j0, i0 in patterns[color]:
            js = slice(j0, nz - 1, 2)
            isl = slice(i0, nx - 1, 2)
            free = ~fixed[js, isl]
            num = (a_e[js, isl] * phi[js, slice(i0 + 1, nx, 2)]
                   + a_w[js, isl] * phi[js, slice(i0 - 1, nx - 2, 2)]
                   + a_n[js, isl] * phi[slice(j0 + 1, nz, 2), isl]
                   + a_s[js, isl] * phi[slice(j0 - 1, nz - 2, 2), isl])
            sub = phi[js, isl]
            upd = (1.0 - omega) * sub + omega * num / den[js, isl]
            phi[js, isl] = np.where(free, upd, sub)

    sweeps = 0
    res = math.inf
    while sweeps < max_iter:
        half_sweep(0)
        half_sweep(1)
        sweeps += 1
        if sweeps % check_every == 0 or sweeps == max_iter:
            res = _residual(phi, fixed, a_e, a_w, a_n, a_s, den)
            if res < tol:
                break
    if res >= tol:
        raise SolverError(
            f"SOR did not reach residual {tol:g} in {sweeps} sweeps (residual {res:.3e})"
        )
    return phi, res, sweeps


def _node_field(phi: np.ndarray, h: float) -> np.ndarray:
    """Node-centered E = -grad phi, central differences (one-sided at edges)."""
    ez, ex = np.gradient(-phi, h)
    return np.stack([ex, ez])


def build_grid(geom: CpwGeometry):
    """Coordinates, Dirichlet masks and cell permittivities for a geometry."""
    h = geom.spacing
    nx = int(round(2 * geom.half_width / h)) + 1
    nz = int(round((geom.height + geom.depth) / h)) + 1
    x = -geom.half_width + h * np.arange(nx)
    z = -geom.depth + h * np.arange(nz)
    j_surface = int(round(geom.depth / h))
    eps_rows = np.where(np.arange(nz - 1) < j_surface, geom.eps_r, 1.0)

    fixed = np.zeros((nz, nx), dtype=bool)
    fixed[0, :] = fixed[-1, :] = True
    fixed[:, 0] = fixed[:, -1] = True
    values = np.zeros((nz, nx))
    tol = 1e-12
    center = np.abs(x) <= geom.s / 2 + tol
    ground = np.abs(x) >= geom.s / 2 + geom.w - tol
    fixed[j_surface, center] = True
    fixed[j_surface, ground] = True
    values[j_surface, center] = 1.0
    return x, z, eps_rows, fixed, values


def solve_potential(geom: CpwGeometry) -> FieldGrid:
    """Unit-voltage Laplace solution of the CPW cross-section."""
    x, z, eps_rows, fixed, values = build_grid(geom)
    phi, res, sweeps = solve_dirichlet(fixed, values, eps_rows)
    return FieldGrid(geometry=geom, x=x, z=z, potential=phi,
                     e_field=_node_field(phi, geom.spacing),
                     eps_rows=eps_rows, fixed=fixed,
                     residual=res, iterations=sweeps)


def field_energy_per_volt(grid: FieldGrid) -> float:
    """Cross-section integral of eps |E|^2 (J per meter of line, per volt^2).

    Cell-centered fields from face differences of the potential keep the
    integral consistent with the flux discretization.
    """
    phi = grid.potential
    h = grid.geometry.spacing
    ex = -(phi[:-1, 1:] - phi[:-1, :-1] + phi[1:, 1:] - phi[1:, :-1]) / (2 * h)
    ez = -(phi[1:, :-1] - phi[:-1, :-1] + phi[1:, 1:] - phi[:-1, 1:]) / (2 * h)
    eps_cells = (grid.eps_rows * EPS_0)[:, None]
    return float(np.sum(eps_cells * (ex ** 2 + ez ** 2)) * h * h)


def normalize_zero_point(grid: FieldGrid) -> FieldGrid:
    """Fix the zero-point amplitude from the mode-energy identity.

    A^2 (L/2) integral eps |E_unit|^2 dA = hbar omega_c / 2, with L/2 the
    longitudinal cos^2 integral of the half-wave mode.
    """
    w_per_volt = field_energy_per_volt(grid)
    if w_per_volt <= 0:
        raise ValueError("field energy is zero; nothing to normalize")
    length = grid.geometry.resonator_length
    amp = math.sqrt(HBAR * grid.geometry.omega_c / 2.0
                    / (w_per_volt * length / 2.0))
    return replace(grid, zero_point_amplitude=amp)


def coupling_map(grid: FieldGrid, dipole: float) -> np.ndarray:
    """Vacuum coupling g(x, z) = |E0| d / hbar in rad/s.

    Uses the field magnitude (dipole aligned with the local field; angular
    factors sit inside the quoted matrix element).  The grid must be
    normalized first.
    """
    if dipole <= 0:
        raise ValueError(f"dipole must be positive, got {dipole}")
    return grid.zero_point_field() * dipole / HBAR


def write_field_csv(grid: FieldGrid, gmap: np.ndarray, path):
    """Full-grid map as x_m, z_m, e0_v_per_m, g_over_2pi_hz rows."""
    e0 = grid.zero_point_field()
    lines = ["x_m,z_m,e0_v_per_m,g_over_2pi_hz"]
    for j in range(grid.z.size):
        for i in range(grid.x.size):
            lines.append(",".join(format(float(v), ".12g") for v in
                                  (grid.x[i], grid.z[j], e0[j, i],
                                   gmap[j, i] / TWO_PI)))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_field_json(grid: FieldGrid, gmap: np.ndarray, path):
    """Metadata sidecar: geometry, normalization and solver diagnostics."""
    g = grid.geometry
    doc = {
        "geometry": {
            "s_m": g.s, "w_m": g.w, "eps_r": g.eps_r,
            "half_width_m": g.half_width, "height_m": g.height,
            "depth_m": g.depth, "spacing_m": g.spacing,
            "omega_c_rad_s": g.omega_c,
        },
        "resonator_length_m": g.resonator_length,
        "eps_eff": g.eps_eff,
        "zero_point_amplitude": grid.zero_point_amplitude,
        "residual": grid.residual,
        "iterations": grid.iterations,
        "peak_g_over_2pi_hz": float(gmap.max() / TWO_PI),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
