"""Physical parameters, Hamiltonians and collapse operators.

Everything is expressed in the frame rotating at the cavity frequency, so
Hamiltonians are H/hbar in rad/s and the only surviving frequency scales
are the detuning, the couplings and the drive.  Decay rates are plain 1/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import BOHR_RADIUS, E_CHARGE, HBAR, K_B, TWO_PI
from . import qops
from .qops import HilbertSpace, Operator

# Detuning applied while the cavity is shifted off the Rydberg resonance
# (SQUID tuning range of the resonator, 0.5 GHz).
DETUNING_OFF_RESONANT = TWO_PI * 0.5e9

# sqrt(2/9) x 8360 e a0: 90s_1/2 -> 90p_3/2 transition dipole moment in Cs.
DIPOLE_RR_DEFAULT = math.sqrt(2.0 / 9.0) * 8360.0 * E_CHARGE * BOHR_RADIUS


def nbar_thermal(omega_c: float, temp: float) -> float:
    """Mean thermal photon number of a mode at omega_c (rad/s) and temp (K).

    Bose occupation 1/(exp(hbar omega / kB T) - 1); exactly 0 at T = 0.
    """
    if temp < 0:
        raise ValueError(f"temperature must be >= 0, got {temp}")
    if temp == 0.0:
        return 0.0
    x = HBAR * omega_c / (K_B * temp)
    if x > 700.0:  # exp would overflow; occupation is numerically zero
        return 0.0
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class PhysicalParams:
    """All rates and frequencies of the atom-cavity-qubit system.

    Angular frequencies (g, omega_*, g_sc) are in rad/s, decay rates
    (gamma_*) in 1/s, temperature in K.  Defaults are the operating point
    used throughout: g/2pi = 2 MHz, Q = 2e5, Cs n = 90 Rydberg lifetimes
    of 820 us and 2 ms, drive Omega/2pi = 10 MHz, qubit g_SC/2pi = 100 MHz
    with a 2 us lifetime.
    """

    g: float = TWO_PI * 2.0e6
    omega_c: float = TWO_PI * 5.037e9
    omega_rr: float = TWO_PI * 5.037e9
    q_factor: float = 2.0e5
    gamma_r: float = 1.0 / 820e-6
    gamma_rp: float = 1.0 / 2.0e-3
    omega_rabi: float = TWO_PI * 10.0e6
    temp: float = 0.0
    g_sc: float = TWO_PI * 100.0e6
    gamma_sc: float = 1.0 / 2.0e-6
    gamma_phi: float = 0.0
    dipole_rr: float = DIPOLE_RR_DEFAULT

    def __post_init__(self):
        for name in ("g", "omega_c", "omega_rr", "gamma_r", "gamma_rp",
                     "omega_rabi", "temp", "g_sc", "gamma_sc", "gamma_phi",
                     "dipole_rr"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not self.q_factor > 0:
            raise ValueError(f"q_factor must be > 0, got {self.q_factor}")

    @property
    def kappa(self) -> float:
        """Cavity field decay rate, kappa = omega_c / Q (1/s)."""
        return self.omega_c / self.q_factor

    @property
    def nbar(self) -> float:
        return nbar_thermal(self.omega_c, self.temp)

    def replace(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def lossless(self) -> "PhysicalParams":
        """Copy with every decoherence channel switched off."""
        return self.replace(gamma_r=0.0, gamma_rp=0.0, gamma_sc=0.0,
                            gamma_phi=0.0, q_factor=math.inf, temp=0.0)


@dataclass(frozen=True)
class SegmentConfig:
    """Hamiltonian configuration of one piecewise-constant segment.

    detuning is Delta = omega_c - omega_rr' (rad/s), drive_on switches the
    classical |1> <-> |r> field, sc_coupled puts the superconducting qubit
    on cavity resonance (only during state preparation, never while the
    drive is on).
    """

    detuning: float = 0.0
    drive_on: bool = False
    sc_coupled: bool = False

    def __post_init__(self):
        if self.sc_coupled and self.drive_on:
            raise ValueError("sc_coupled segments must not drive the atom")


def hamiltonian(p: PhysicalParams, seg: SegmentConfig, space: HilbertSpace) -> Operator:
    """H/hbar (rad/s) for one segment on the given space.

    Terms present when their factors exist:
      Delta sp sm + g (sp a + sm a+)          atom (x cavity)
      (Omega/2)(|r><1| + |1><r|)               drive_on
      g_sc (sq+ a + sq- a+)                    sc_coupled (qubit on resonance)
    with sp = |r'><r| the Rydberg raising operator.
    """
    h = np.zeros((space.dim, space.dim), dtype=complex)
    if space.has("atom"):
        sp = qops.atomic_op("r", "rp")
        h += seg.detuning * qops.embed(space, {"atom": sp @ sp.dag()}).data
        if space.has("cavity"):
            a = qops.annihilation(space.factor_dim("cavity") - 1)
            jc = qops.embed(space, {"atom": sp, "cavity": a})
            h += p.g * (jc.data + jc.data.conj().T)
        if seg.drive_on:
            up = qops.embed(space, {"atom": qops.atomic_op("1", "r")})
            h += 0.5 * p.omega_rabi * (up.data + up.data.conj().T)
    elif seg.drive_on:
        raise qops.InvalidDimensionError("drive_on requires an atom factor")
    if seg.sc_coupled:
        if not (space.has("qubit") and space.has("cavity")):
            raise qops.InvalidDimensionError("sc_coupled requires qubit and cavity factors")
        a = qops.annihilation(space.factor_dim("cavity") - 1)
        swap = qops.embed(space, {"qubit": qops.qubit_lower().dag(), "cavity": a})
        h += p.g_sc * (swap.data + swap.data.conj().T)
    return Operator(space, h)


def collapse_ops(p: PhysicalParams, space: HilbertSpace) -> list[Operator]:
    """Collapse operators for the Lindblad dissipator on the given space.

    Atom: sqrt(gamma_r) |s><r| and sqrt(gamma_r') |s><r'| (spontaneous
    emission routed to the reservoir level).  Cavity: sqrt(kappa(nbar+1)) a
    and sqrt(kappa nbar) a+ (photon loss and thermal excitation).  Qubit:
    sqrt(gamma_sc) |0><1|.  Optionally a pure-dephasing channel
    sqrt(gamma_phi/2) diag(-1,-1,+1,+1,-1) on the Rydberg manifold.
    Channels with zero amplitude are omitted.
    """
    ops: list[Operator] = []
    if space.has("atom"):
        if p.gamma_r > 0:
            ops.append(math.sqrt(p.gamma_r)
                       * qops.embed(space, {"atom": qops.atomic_op("r", "s")}))
        if p.gamma_rp > 0:
            ops.append(math.sqrt(p.gamma_rp)
                       * qops.embed(space, {"atom": qops.atomic_op("rp", "s")}))
    if space.has("cavity"):
        a = qops.annihilation(space.factor_dim("cavity") - 1)
        nbar = p.nbar
        kappa = p.kappa
        if kappa * (nbar + 1.0) > 0:
            ops.append(math.sqrt(kappa * (nbar + 1.0)) * qops.embed(space, {"cavity": a}))
        if kappa * nbar > 0:
            ops.append(math.sqrt(kappa * nbar) * qops.embed(space, {"cavity": a.dag()}))
    if space.has("atom") and p.gamma_phi > 0:
        diag = -np.ones(qops.ATOM_DIM)
        diag[qops.atom_level_index("r")] = 1.0
        diag[qops.atom_level_index("rp")] = 1.0
        deph = Operator(HilbertSpace.single("atom", qops.ATOM_DIM), np.diag(diag))
        ops.append(math.sqrt(p.gamma_phi / 2.0) * qops.embed(space, {"atom": deph}))
    if space.has("qubit") and p.gamma_sc > 0:
        ops.append(math.sqrt(p.gamma_sc) * qops.embed(space, {"qubit": qops.qubit_lower()}))
    return ops
