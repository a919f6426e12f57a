"""Fidelity measures, closed-form error estimates, and parameter sweeps."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from time import perf_counter
from typing import NamedTuple

import numpy as np

from .constants import TWO_PI
from .model import PhysicalParams
from .qops import DensityMatrix, InvalidDimensionError, InvalidStateError

N_REFERENCE = 90  # principal quantum number the default rates refer to


def uhlmann_fidelity(rho: DensityMatrix, rho_ideal: DensityMatrix) -> float:
    """State fidelity F = Tr sqrt( sqrt(rho_i) rho sqrt(rho_i) ).

    Computed by Hermitian eigendecomposition; eigenvalues in (-1e-8, 0)
    are clamped to zero, anything lower raises.
    """
    if rho.space != rho_ideal.space:
        raise InvalidDimensionError("states live on different spaces")
    evals, vecs = np.linalg.eigh(rho_ideal.data)
    if evals[0] < -1e-8:
        raise InvalidStateError(f"reference state eigenvalue {evals[0]:.3e} < -1e-8")
    sqrt_ideal = (vecs * np.sqrt(np.clip(evals, 0.0, None))) @ vecs.conj().T
    inner = sqrt_ideal @ rho.data @ sqrt_ideal
    mu = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    if mu[0] < -1e-8:
        raise InvalidStateError(f"fidelity kernel eigenvalue {mu[0]:.3e} < -1e-8")
    # the sqrt amplifies machine-noise eigenvalues of rank-deficient kernels;
    # floor them relative to the largest one before taking the root
    floor = 64.0 * np.finfo(float).eps * max(float(mu[-1]), 0.0)
    mu = np.where(mu > floor, mu, 0.0)
    return float(np.sqrt(mu).sum())


def fidelity_to_pure(rho: DensityMatrix, ket) -> float:
    """Shortcut F = sqrt(<psi|rho|psi>) for a pure reference state."""
    v = np.asarray(ket, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    val = float(np.real(v.conj() @ rho.data @ v))
    return math.sqrt(max(val, 0.0))


def analytic_fidelity(p: PhysicalParams) -> float:
    """First-order estimate 1 - pi/(16 g) [3(kappa + gamma_r) + gamma_r'].

    Accounts for photon loss and Rydberg decay during the entangling
    window; clamped to [0, 1].
    """
    if not p.g > 0:
        raise ValueError("analytic estimate needs g > 0")
    f = 1.0 - math.pi / (16.0 * p.g) * (3.0 * (p.kappa + p.gamma_r) + p.gamma_rp)
    return min(max(f, 0.0), 1.0)


def gate_duration(omega_rabi: float, g: float) -> float:
    """Total gate time tau = pi (2/Omega + 1/g) for square pulses."""
    if not (omega_rabi > 0 and g > 0):
        raise ValueError("gate duration needs Omega > 0 and g > 0")
    return math.pi * (2.0 / omega_rabi + 1.0 / g)


def pi_pulse_error(omega_rabi: float, gamma_r: float) -> float:
    """Spontaneous-emission probability P_r = 2 (pi/Omega)(gamma_r/2) per pulse pair."""
    if not omega_rabi > 0:
        raise ValueError("pi-pulse error needs Omega > 0")
    return 2.0 * (math.pi / omega_rabi) * (gamma_r / 2.0)


class ScaledRates(NamedTuple):
    g: float
    gamma_r: float
    omega_rr: float


def scaling_estimate(n: int, reference: PhysicalParams) -> ScaledRates:
    """Rates at principal quantum number n, scaled from the n = 90 reference.

    The coupling falls as 1/n (dipole n^2 against zero-point field n^-3
    including the resonator-length rescaling), while decay rate and
    transition frequency fall as 1/n^3, so g/gamma_r grows as n^2.
    """
    if n < 30:
        raise ValueError(f"scaling only sensible for n >= 30, got {n}")
    r = N_REFERENCE / float(n)
    return ScaledRates(g=reference.g * r,
                       gamma_r=reference.gamma_r * r ** 3,
                       omega_rr=reference.omega_rr * r ** 3)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def default_g_axis() -> np.ndarray:
    """g/2pi in Hz, logarithmic from 0.5 to 20 MHz (13 points)."""
    return np.geomspace(0.5e6, 20e6, 13)


def default_q_axis() -> np.ndarray:
    """Quality factor, logarithmic from 1e4 to 1e7 (13 points)."""
    return np.geomspace(1e4, 1e7, 13)


def default_t_axis() -> np.ndarray:
    """Temperatures in K: 0..300 mK in 5 mK steps plus a 2 mK grid below 50 mK."""
    mk = sorted(set(range(0, 301, 5)) | set(range(0, 51, 2)))
    return np.array(mk, dtype=float) / 1e3


@dataclass
class SweepResult:
    """Fidelity grid over named axes plus everything needed to re-run it."""

    axes: dict
    values: dict
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = tuple(len(v) for v in self.axes.values())
        for name, grid in self.values.items():
            if np.shape(grid) != shape:
                raise ValueError(f"grid {name!r} has shape {np.shape(grid)}, "
                                 f"axes give {shape}")

    def to_csv(self, path):
        """One row per cell; deterministic 12-significant-digit columns only."""
        names = list(self.axes) + list(self.values)
        axes = [np.asarray(v) for v in self.axes.values()]
        grids = [np.asarray(v) for v in self.values.values()]
        shape = tuple(len(a) for a in axes)
        lines = [",".join(names)]
        for flat in range(int(np.prod(shape))):
            idx = np.unravel_index(flat, shape)
            row = [axes[k][idx[k]] for k in range(len(axes))]
            row += [g[idx] for g in grids]
            lines.append(",".join(format(float(x), ".12g") for x in row))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_json(self, path):
        doc = {
            "axes": {k: np.asarray(v).tolist() for k, v in self.axes.items()},
            "values": {k: np.asarray(v).tolist() for k, v in self.values.items()},
            "metadata": self.metadata,
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _base_metadata(scenario: str, p: PhysicalParams, **extra) -> dict:
    md = {
        "scenario": scenario,
        "base_params": asdict(p),
        "schedule": "load(pi/2g_sc); H_atom; pi_pulse; window(pi/g); pi_pulse; H_atom",
        "timestamp": _timestamp(),
    }
    md.update(extra)
    return md


def _bell_cell(task):
    """One sweep cell: (fidelity, F_gamma, wall seconds, error string)."""
    p, ideal_pulses = task
    from . import protocol  # deferred; protocol imports this module

    t0 = perf_counter()
    try:
        res = protocol.bell_prep(p, ideal_pulses=ideal_pulses)
        return res.fidelity, res.cavity_prep_fidelity, perf_counter() - t0, ""
    except Exception as exc:  # per-cell diagnostics instead of aborting the sweep
        return math.nan, math.nan, perf_counter() - t0, repr(exc)


def _run_cells(tasks, workers):
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_bell_cell(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_bell_cell, tasks))


def sweep_gq(p_base: PhysicalParams = None, g_axis=None, q_axis=None, *,
             ideal_pulses: bool = True, workers: int = None) -> SweepResult:
    """Entangled-state fidelity over a (g, Q) grid at zero temperature.

    g_axis carries g/2pi in Hz.  Each cell also records the closed-form
    analytic estimate.  Cell failures are stored as NaN with a diagnostic
    in the metadata rather than aborting the sweep.
    """
    p_base = (p_base or PhysicalParams()).replace(temp=0.0)
    g_axis = np.asarray(default_g_axis() if g_axis is None else g_axis, dtype=float)
    q_axis = np.asarray(default_q_axis() if q_axis is None else q_axis, dtype=float)
    if g_axis.size == 0 or q_axis.size == 0 or g_axis.min() <= 0 or q_axis.min() <= 0:
        raise ValueError("axes must be non-empty and positive")
    points = [p_base.replace(g=TWO_PI * gv, q_factor=qv)
              for gv in g_axis for qv in q_axis]
    out = _run_cells([(p, ideal_pulses) for p in points], workers)
    shape = (g_axis.size, q_axis.size)
    f_bell = np.array([c[0] for c in out]).reshape(shape)
    walls = np.array([c[2] for c in out]).reshape(shape)
    errors = [[*map(int, np.unravel_index(k, shape)), c[3]]
              for k, c in enumerate(out) if c[3]]
    f_analytic = np.array([analytic_fidelity(p) for p in points]).reshape(shape)
    md = _base_metadata("sweep_gq", p_base, ideal_pulses=ideal_pulses,
                        wall_times_s=walls.tolist(), cell_errors=errors)
    return SweepResult(
        axes={"g_over_2pi_hz": g_axis, "q_factor": q_axis},
        values={"f_bell": f_bell, "f_analytic": f_analytic},
        metadata=md,
    )


def sweep_temperature(p_base: PhysicalParams = None, t_axis=None, *,
                      ideal_pulses: bool = True, workers: int = None) -> SweepResult:
    """Loading fidelity F_gamma and final fidelity over a temperature axis."""
    p_base = p_base or PhysicalParams()
    t_axis = np.asarray(default_t_axis() if t_axis is None else t_axis, dtype=float)
    if t_axis.size == 0 or t_axis.min() < 0:
        raise ValueError("temperature axis must be non-empty and non-negative")
    points = [p_base.replace(temp=tv) for tv in t_axis]
    out = _run_cells([(p, ideal_pulses) for p in points], workers)
    f_bell = np.array([c[0] for c in out])
    f_gamma = np.array([c[1] for c in out])
    walls = [c[2] for c in out]
    errors = [[k, c[3]] for k, c in enumerate(out) if c[3]]
    md = _base_metadata("sweep_temperature", p_base, ideal_pulses=ideal_pulses,
                        wall_times_s=walls, cell_errors=errors)
    return SweepResult(
        axes={"temp_k": t_axis},
        values={"f_bell": f_bell, "f_gamma": f_gamma},
        metadata=md,
    )


def rerun_cell(result: SweepResult, *index) -> float:
    """Recompute one cell of a sweep from its stored metadata.

    Returns the entangled-state fidelity; used to verify that sweep
    metadata reproduces every cell bit for bit.
    """
    md = result.metadata
    p = PhysicalParams(**md["base_params"])
    axis_names = list(result.axes)
    if len(index) != len(axis_names):
        raise ValueError(f"need {len(axis_names)} indices, got {len(index)}")
    for name, i in zip(axis_names, index):
        v = float(np.asarray(result.axes[name])[i])
        if name == "g_over_2pi_hz":
            p = p.replace(g=TWO_PI * v)
        elif name == "q_factor":
            p = p.replace(q_factor=v)
        elif name == "temp_k":
            p = p.replace(temp=v)
        else:
            raise ValueError(f"unknown axis {name!r}")
    f, _, _, err = _bell_cell((p, md["ideal_pulses"]))
    if err:
        raise RuntimeError(f"cell rerun failed: {err}")
    return f
