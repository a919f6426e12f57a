"""Lindblad propagation over piecewise-constant segments.

The master equation
    drho/dt = -i[H, rho] + 1/2 sum_i (2 c_i rho c_i+ - c_i+ c_i rho - rho c_i+ c_i)
is propagated exactly per segment through the dense superoperator matrix
exponential (column-stacked convention), which is exact for constant
generators and needs no step-size tuning at the dimensions used here
(d <= 60).  A fixed-step RK4 integrator working directly on the density
matrix is provided as an independent cross-check backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import expm

from .model import PhysicalParams, SegmentConfig, collapse_ops, hamiltonian
from .qops import DensityMatrix, HilbertSpace, InvalidDimensionError, Operator

UNITARITY_TOL = 1e-12


class NumericalFailureError(RuntimeError):
    """Propagation produced a state outside tolerance."""


class Liouvillian:
    """Superoperator L with vec(drho/dt) = L vec(rho), columns stacked."""

    __slots__ = ("space", "superop")

    def __init__(self, space: HilbertSpace, superop):
        superop = np.asarray(superop, dtype=complex)
        d2 = space.dim ** 2
        if superop.shape != (d2, d2):
            raise InvalidDimensionError(
                f"superoperator shape {superop.shape} != ({d2}, {d2})"
            )
        superop.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "superop", superop)

    def __setattr__(self, name, value):
        raise AttributeError("Liouvillian is immutable")


def build_liouvillian(h: Operator, c_ops) -> Liouvillian:
    """Assemble the Lindblad superoperator from H/hbar and collapse operators.

    Column-stacking identities: vec(A X B) = (B^T kron A) vec(X), so
      L = -i (I kron H - H^T kron I)
          + sum_i [ conj(c_i) kron c_i
                    - 1/2 (I kron c_i+ c_i) - 1/2 ((c_i+ c_i)^T kron I) ]
    """
    space = h.space
    d = space.dim
    eye = np.eye(d)
    hm = h.data
    lv = -1j * (np.kron(eye, hm) - np.kron(hm.T, eye))
    for c in c_ops:
        if c.space != space:
            raise InvalidDimensionError("collapse operator on a different space")
        cm = c.data
        cdc = cm.conj().T @ cm
        lv += np.kron(cm.conj(), cm)
        lv -= 0.5 * (np.kron(eye, cdc) + np.kron(cdc.T, eye))
    return Liouvillian(space, lv)


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape((d, d), order="F")


def _finish_state(space: HilbertSpace, raw: np.ndarray) -> DensityMatrix:
    """Re-Hermitize, check trace drift and positivity, renormalize."""
    out = 0.5 * (raw + raw.conj().T)
    tr = out.trace().real
    if abs(tr - 1.0) > 1e-8:
        raise NumericalFailureError(f"trace drifted to {tr!r} during propagation")
    out = out / tr
    lo = np.linalg.eigvalsh(out)[0]
    if lo < -1e-8:
        raise NumericalFailureError(f"state developed negative eigenvalue {lo:.3e}")
    return DensityMatrix(space, out, eig_tol=1e-8)


def propagator(liou: Liouvillian, t: float) -> np.ndarray:
    """Dense superoperator exp(L t); apply to vec(rho) for a time step."""
    if t < 0:
        raise ValueError(f"duration must be >= 0, got {t}")
    return expm(liou.superop * t)


def propagate(rho: DensityMatrix, liou: Liouvillian, t: float) -> DensityMatrix:
    """Evolve rho for duration t under the fixed generator L."""
    if rho.space != liou.space:
        raise InvalidDimensionError("state and Liouvillian on different spaces")
    if t < 0:
        raise ValueError(f"duration must be >= 0, got {t}")
    if t == 0:
        return rho
    v = propagator(liou, t) @ _vec(rho.data)
    return _finish_state(rho.space, _unvec(v, rho.space.dim))


def rk4_propagate(rho: DensityMatrix, h: Operator, c_ops, t: float,
                  steps: int = None) -> DensityMatrix:
    """Fixed-step RK4 cross-check backend, integrating rho directly.

    The derivative is evaluated in matrix form (commutator plus dissipator),
    independent of the column-stacking route used by the superoperator
    backend.  The step count is chosen so the accumulated local error sits
    well below 1e-7 in any fidelity built from the result.
    """
    if rho.space != h.space:
        raise InvalidDimensionError("state and Hamiltonian on different spaces")
    if t < 0:
        raise ValueError(f"duration must be >= 0, got {t}")
    if t == 0:
        return rho
    hm = h.data
    cs = [c.data for c in c_ops]
    cdcs = [c.conj().T @ c for c in cs]

    def deriv(r):
        out = -1j * (hm @ r - r @ hm)
        for c, cdc in zip(cs, cdcs):
            out += c @ r @ c.conj().T - 0.5 * (cdc @ r + r @ cdc)
        return out

    if steps is None:
        scale = 2.0 * np.linalg.norm(hm, 2) + sum(np.linalg.norm(m, 2) for m in cdcs)
        steps = max(32, int(np.ceil(t * scale / 0.004)))
    dt = t / steps
    r = rho.data.copy()
    for _ in range(steps):
        k1 = deriv(r)
        k2 = deriv(r + 0.5 * dt * k1)
        k3 = deriv(r + 0.5 * dt * k2)
        k4 = deriv(r + dt * k3)
        r = r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return _finish_state(rho.space, r)


def apply_unitary(rho: DensityMatrix, u: Operator) -> DensityMatrix:
    """Ideal instantaneous map rho -> U rho U+."""
    if rho.space != u.space:
        raise InvalidDimensionError("state and unitary on different spaces")
    defect = np.abs(u.dag().data @ u.data - np.eye(u.space.dim)).max()
    if defect > UNITARITY_TOL:
        raise ValueError(f"operator is not unitary (|U+U - I| = {defect:.3e})")
    return DensityMatrix(rho.space, u.data @ rho.data @ u.data.conj().T)


@dataclass(frozen=True)
class EvolveStep:
    """Lindblad evolution for ``duration`` seconds under one segment config."""

    duration: float
    seg: SegmentConfig

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True)
class UnitaryStep:
    """Ideal instantaneous unitary (perfect single-qubit operation)."""

    u: Operator
    label: str

    def __post_init__(self):
        defect = np.abs(self.u.dag().data @ self.u.data - np.eye(self.u.space.dim)).max()
        if defect > UNITARITY_TOL:
            raise ValueError(f"{self.label}: not unitary (|U+U - I| = {defect:.3e})")


Step = Union[EvolveStep, UnitaryStep]


@dataclass(frozen=True)
class Schedule:
    """Ordered steps of the experiment: evolution segments and ideal pulses."""

    steps: tuple

    @property
    def total_duration(self) -> float:
        return sum(s.duration for s in self.steps if isinstance(s, EvolveStep))

    def timings(self) -> list:
        out = []
        for s in self.steps:
            if isinstance(s, EvolveStep):
                out.append(("evolve", s.duration))
            else:
                out.append((s.label, 0.0))
        return out


def run_schedule(rho0: DensityMatrix, p: PhysicalParams, sched: Schedule,
                 backend: str = "expm") -> DensityMatrix:
    """Apply every step of ``sched`` in order to rho0.

    backend is "expm" (superoperator exponential) or "rk4" (fixed-step
    integrator); both must agree, which the test suite enforces.
    """
    if backend not in ("expm", "rk4"):
        raise ValueError(f"unknown backend {backend!r}")
    rho = rho0
    space = rho0.space
    for step in sched.steps:
        if isinstance(step, UnitaryStep):
            rho = apply_unitary(rho, step.u)
            continue
        h = hamiltonian(p, step.seg, space)
        cs = collapse_ops(p, space)
        if backend == "expm":
            rho = propagate(rho, build_liouvillian(h, cs), step.duration)
        else:
            rho = rk4_propagate(rho, h, cs, step.duration)
    return rho
