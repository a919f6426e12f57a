"""Operator algebra and states on the composite atom-cavity(-qubit) space.

The composite Hilbert space is an ordered tensor product of named factors,
stored row-major, so the flat basis index of e.g. |atom a, cavity n, qubit q>
is ``(a * dim_cav + n) * dim_qubit + q``.  The atom is a fixed five-level
system |0>, |1>, |r>, |r'>, |s>: two hyperfine qubit levels, two microwave
coupled Rydberg levels, and a reservoir level |s> that collects population
lost by spontaneous emission and is never re-excited.

All objects are immutable after construction (arrays are frozen), so they
can be shared freely across parallel sweep workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

ATOM_LEVELS = ("0", "1", "r", "rp", "s")
ATOM_DIM = 5

# Largest Fock cutoff used for any simulation: keeps the composite dimension
# at desk scale (5 * (nmax + 1) * 2 <= 60 with the qubit factor present).
NMAX_FLOOR = 3
NMAX_CAP = 5


class InvalidDimensionError(ValueError):
    """A dimension or factor layout is inconsistent."""


class InvalidStateError(ValueError):
    """A matrix fails the density-matrix invariants."""


def atom_level_index(level) -> int:
    """Map an atom level label ('0', '1', 'r', 'rp', 's') or index to its index."""
    if isinstance(level, (int, np.integer)):
        if not 0 <= level < ATOM_DIM:
            raise InvalidDimensionError(f"atom level index {level} out of range")
        return int(level)
    try:
        return ATOM_LEVELS.index(level)
    except ValueError:
        raise InvalidDimensionError(
            f"unknown atom level {level!r}, expected one of {ATOM_LEVELS}"
        ) from None


@dataclass(frozen=True)
class HilbertSpace:
    """Ordered tensor product of labeled factors.

    ``factors`` is a tuple of (label, dimension) pairs.  The conventional
    layout is (atom, cavity[, qubit]); the atom factor, when present, always
    has dimension 5.
    """

    factors: tuple

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise InvalidDimensionError(f"duplicate factor labels in {labels}")
        for lab, d in self.factors:
            if d < 1:
                raise InvalidDimensionError(f"factor {lab!r} has dimension {d} < 1")
            if lab == "atom" and d != ATOM_DIM:
                raise InvalidDimensionError("atom factor must have dimension 5")
            if lab == "cavity" and d < 2:
                raise InvalidDimensionError("cavity factor needs nmax >= 1")

    @classmethod
    def atom_cavity(cls, nmax: int) -> "HilbertSpace":
        return cls((("atom", ATOM_DIM), ("cavity", nmax + 1)))

    @classmethod
    def atom_cavity_qubit(cls, nmax: int) -> "HilbertSpace":
        return cls((("atom", ATOM_DIM), ("cavity", nmax + 1), ("qubit", 2)))

    @classmethod
    def cavity_qubit(cls, nmax: int) -> "HilbertSpace":
        return cls((("cavity", nmax + 1), ("qubit", 2)))

    @classmethod
    def single(cls, label: str, dim: int) -> "HilbertSpace":
        return cls(((label, dim),))

    @property
    def dim(self) -> int:
        return int(np.prod([d for _, d in self.factors]))

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple:
        return tuple(d for _, d in self.factors)

    def has(self, label: str) -> bool:
        return label in self.labels

    def axis(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidDimensionError(f"no factor {label!r} in {self.labels}") from None

    def factor_dim(self, label: str) -> int:
        return self.factors[self.axis(label)][1]

    def index(self, **positions) -> int:
        """Flat basis index from per-factor positions (atom accepts level labels)."""
        idx = 0
        for lab, d in self.factors:
            if lab not in positions:
                raise InvalidDimensionError(f"missing position for factor {lab!r}")
            pos = positions.pop(lab)
            i = atom_level_index(pos) if lab == "atom" else int(pos)
            if not 0 <= i < d:
                raise InvalidDimensionError(f"position {i} out of range for {lab!r}")
            idx = idx * d + i
        if positions:
            raise InvalidDimensionError(f"unknown factors {sorted(positions)}")
        return idx


def _frozen_complex(data) -> np.ndarray:
    arr = np.array(data, dtype=complex)
    arr.setflags(write=False)
    return arr


class Operator:
    """Dense complex matrix on a HilbertSpace.

    Entries are dimensionless or carry rad/s, as documented by each
    constructor.  Instances are immutable.
    """

    __slots__ = ("space", "data")

    def __init__(self, space: HilbertSpace, data):
        data = _frozen_complex(data)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise InvalidDimensionError(f"operator matrix must be square, got {data.shape}")
        if data.shape[0] != space.dim:
            raise InvalidDimensionError(
                f"matrix dimension {data.shape[0]} != space dimension {space.dim}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    def dag(self) -> "Operator":
        return Operator(self.space, self.data.conj().T)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, np.abs(self.data).max())
        return np.abs(self.data - self.data.conj().T).max() < tol * scale

    def _check_space(self, other: "Operator"):
        if self.space != other.space:
            raise InvalidDimensionError("operators live on different spaces")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data @ other.data)

    def __add__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check_space(other)
        return Operator(self.space, self.data - other.data)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.space, self.data * complex(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"Operator(dim={self.space.dim}, factors={self.space.labels})"


class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite state on a HilbertSpace.

    The invariants (Hermiticity within 1e-10, trace within 1e-9 of one,
    smallest eigenvalue above -1e-9 by default) are checked on every
    construction, so any operation returning a state is verified.
    """

    __slots__ = ("space", "data")

    HERM_TOL = 1e-10
    TRACE_TOL = 1e-9
    EIG_TOL = 1e-9

    def __init__(self, space: HilbertSpace, data, *, eig_tol: float = None):
        data = _frozen_complex(data)
        if data.shape != (space.dim, space.dim):
            raise InvalidDimensionError(
                f"state shape {data.shape} != space dimension {space.dim}"
            )
        herm = np.abs(data - data.conj().T).max()
        if herm > self.HERM_TOL:
            raise InvalidStateError(f"state not Hermitian: max asymmetry {herm:.3e}")
        tr = data.trace().real
        if abs(tr - 1.0) > self.TRACE_TOL:
            raise InvalidStateError(f"state trace {tr!r} differs from 1")
        tol = self.EIG_TOL if eig_tol is None else eig_tol
        lo = np.linalg.eigvalsh(data)[0]
        if lo < -tol:
            raise InvalidStateError(f"state has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "data", data)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @classmethod
    def from_ket(cls, space: HilbertSpace, ket) -> "DensityMatrix":
        v = np.asarray(ket, dtype=complex).ravel()
        if v.size != space.dim:
            raise InvalidDimensionError(f"ket length {v.size} != dimension {space.dim}")
        v = v / np.linalg.norm(v)
        return cls(space, np.outer(v, v.conj()))

    def population(self, index: int) -> float:
        return float(self.data[index, index].real)

    def purity(self) -> float:
        return float((self.data @ self.data).trace().real)

    def __repr__(self):
        return f"DensityMatrix(dim={self.space.dim}, factors={self.space.labels})"


def annihilation(nmax: int) -> Operator:
    """Cavity annihilation operator on the truncated Fock ladder |0>..|nmax>.

    <n-1| a |n> = sqrt(n); everything else zero.
    """
    if nmax < 1:
        raise InvalidDimensionError(f"nmax must be >= 1, got {nmax}")
    space = HilbertSpace.single("cavity", nmax + 1)
    return Operator(space, np.diag(np.sqrt(np.arange(1, nmax + 1, dtype=float)), k=1))


def atomic_op(from_level, to_level) -> Operator:
    """Atomic dyad |to><from| on the five-level atom.

    atomic_op('r', 'rp') is the Rydberg raising operator for the microwave
    transition; its adjoint equals atomic_op('rp', 'r').
    """
    i = atom_level_index(from_level)
    j = atom_level_index(to_level)
    m = np.zeros((ATOM_DIM, ATOM_DIM), dtype=complex)
    m[j, i] = 1.0
    return Operator(HilbertSpace.single("atom", ATOM_DIM), m)


def qubit_lower() -> Operator:
    """Lowering operator |0><1| of the two-level superconducting qubit."""
    return Operator(HilbertSpace.single("qubit", 2), np.array([[0, 1], [0, 0]]))


def identity(space: HilbertSpace) -> Operator:
    return Operator(space, np.eye(space.dim))


def embed(space: HilbertSpace, ops: Mapping[str, Operator]) -> Operator:
    """Kronecker-embed per-factor operators into the full space.

    ``ops`` maps factor labels to operators acting on that factor alone;
    factors not named get the identity.  The product is taken in the
    declared factor order.
    """
    for lab in ops:
        if not space.has(lab):
            raise InvalidDimensionError(f"no factor {lab!r} in {space.labels}")
    m = np.eye(1, dtype=complex)
    for lab, d in space.factors:
        if lab in ops:
            block = ops[lab].data
            if block.shape[0] != d:
                raise InvalidDimensionError(
                    f"operator for {lab!r} has dimension {block.shape[0]}, factor has {d}"
                )
        else:
            block = np.eye(d, dtype=complex)
        m = np.kron(m, block)
    return Operator(space, m)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced state on the kept factors (trace preserved).

    ``keep`` is a factor label or an iterable of labels; the result keeps
    the original factor ordering.
    """
    if isinstance(keep, str):
        keep = (keep,)
    keep = tuple(keep)
    if not keep:
        raise InvalidDimensionError("keep set must not be empty")
    labels = rho.space.labels
    for lab in keep:
        if lab not in labels:
            raise InvalidDimensionError(f"no factor {lab!r} in {labels}")
    dims = list(rho.space.dims)
    nfac = len(dims)
    traced = [i for i, lab in enumerate(labels) if lab not in keep]
    t = rho.data.reshape(dims + dims)
    remaining = nfac
    for ax in sorted(traced, reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + remaining)
        remaining -= 1
    kept_factors = tuple(f for f in rho.space.factors if f[0] in keep)
    d = int(np.prod([d for _, d in kept_factors]))
    return DensityMatrix(HilbertSpace(kept_factors), t.reshape(d, d))


def thermal_state(nmax: int, nbar: float) -> DensityMatrix:
    """Thermal cavity state with mean photon number nbar on |0>..|nmax>.

    Populations follow the geometric law p_n ~ (nbar/(1+nbar))^n,
    renormalized over the truncated ladder; nbar = 0 gives the vacuum.
    """
    if nbar < 0:
        raise InvalidStateError(f"nbar must be >= 0, got {nbar}")
    if nmax < 1:
        raise InvalidDimensionError(f"nmax must be >= 1, got {nmax}")
    space = HilbertSpace.single("cavity", nmax + 1)
    if nbar == 0:
        p = np.zeros(nmax + 1)
        p[0] = 1.0
    else:
        r = nbar / (1.0 + nbar)
        p = r ** np.arange(nmax + 1)
        p /= p.sum()
    return DensityMatrix(space, np.diag(p.astype(complex)))


def auto_nmax(nbar: float, tail: float = 1e-9) -> int:
    """Smallest Fock cutoff with truncated thermal tail below ``tail``.

    The result is clipped to [3, 5]: the floor leaves headroom above the
    single gate photon, the cap keeps the composite dimension at desk scale
    even where the tail rule would ask for more (T well above ~70 mK).
    """
    if nbar <= 0:
        return NMAX_FLOOR
    r = nbar / (1.0 + nbar)
    # tail P(n > N) = r^(N+1)
    n = math.ceil(math.log(tail) / math.log(r)) - 1
    return int(min(max(n, NMAX_FLOOR), NMAX_CAP))


def basis_ket(space: HilbertSpace, **positions) -> np.ndarray:
    """Basis vector with a single unit entry at space.index(**positions)."""
    v = np.zeros(space.dim, dtype=complex)
    v[space.index(**positions)] = 1.0
    return v
