"""Operator algebra, embedding, partial trace and thermal states."""

import numpy as np
import pytest

from conftest import random_density
from rydcav import qops
from rydcav.qops import (ATOM_LEVELS, DensityMatrix, HilbertSpace,
                         InvalidDimensionError, InvalidStateError, Operator,
                         annihilation, atomic_op, auto_nmax, basis_ket, embed,
                         identity, partial_trace, thermal_state)


class TestAnnihilation:
    def test_nmax_one(self):
        a = annihilation(1)
        assert np.array_equal(a.data, [[0, 1], [0, 0]])

    def test_ladder_entry(self):
        a = annihilation(3)
        assert a.data[2, 3] == pytest.approx(np.sqrt(3), abs=1e-15)

    def test_number_operator_spectrum(self):
        a = annihilation(4)
        n_op = a.dag() @ a
        assert np.allclose(np.sort(np.linalg.eigvalsh(n_op.data)),
                           np.arange(5), atol=1e-12)

    def test_invalid_dimension(self):
        with pytest.raises(InvalidDimensionError):
            annihilation(0)

    def test_commutator_up_to_truncation(self):
        # [a, a+] = I everywhere except the (nmax, nmax) corner artifact
        nmax = 5
        a = annihilation(nmax)
        comm = a.data @ a.dag().data - a.dag().data @ a.data
        expected = np.eye(nmax + 1)
        expected[nmax, nmax] = -nmax
        assert np.allclose(comm, expected, atol=1e-13)


class TestAtomicOp:
    def test_raising_operator_entry(self):
        sp = atomic_op("r", "rp")
        expected = np.zeros((5, 5))
        expected[3, 2] = 1.0
        assert np.array_equal(sp.data, expected)

    @pytest.mark.parametrize("a", ATOM_LEVELS)
    @pytest.mark.parametrize("b", ATOM_LEVELS)
    def test_adjoint_is_reverse(self, a, b):
        assert np.array_equal(atomic_op(a, b).dag().data, atomic_op(b, a).data)

    def test_decay_channel_projector(self):
        c = atomic_op("r", "s")  # |s><r|
        proj = c.dag() @ c
        expected = np.zeros((5, 5))
        expected[2, 2] = 1.0
        assert np.array_equal(proj.data, expected)

    def test_unknown_level(self):
        with pytest.raises(InvalidDimensionError):
            atomic_op("r", "q")


class TestEmbed:
    def test_identity(self):
        space = HilbertSpace.atom_cavity_qubit(2)
        assert np.array_equal(embed(space, {}).data, np.eye(space.dim))

    def test_mixed_product_same_factor(self, rng):
        space = HilbertSpace.atom_cavity(2)
        a = annihilation(2)
        prod = embed(space, {"cavity": a}) @ embed(space, {"cavity": a.dag()})
        direct = embed(space, {"cavity": a @ a.dag()})
        assert np.abs(prod.data - direct.data).max() < 1e-12

    def test_distinct_factors_commute_and_combine(self):
        space = HilbertSpace.atom_cavity(2)
        sp = atomic_op("r", "rp")
        a = annihilation(2)
        left = embed(space, {"atom": sp}) @ embed(space, {"cavity": a})
        right = embed(space, {"cavity": a}) @ embed(space, {"atom": sp})
        both = embed(space, {"atom": sp, "cavity": a})
        assert np.abs(left.data - right.data).max() < 1e-14
        assert np.abs(left.data - both.data).max() < 1e-14

    def test_trace_scaling(self):
        space = HilbertSpace.atom_cavity(3)
        proj = atomic_op("1", "1")
        emb = embed(space, {"atom": proj})
        assert emb.data.trace() == pytest.approx(1.0 * 4)

    def test_dimension_mismatch(self):
        space = HilbertSpace.atom_cavity(2)
        with pytest.raises(InvalidDimensionError):
            embed(space, {"cavity": annihilation(5)})
        with pytest.raises(InvalidDimensionError):
            embed(space, {"qubit": qops.qubit_lower()})


class TestPartialTrace:
    def test_product_state(self, rng):
        space = HilbertSpace.atom_cavity(2)
        rho_a = random_density(HilbertSpace.single("atom", 5), rng)
        rho_c = random_density(HilbertSpace.single("cavity", 3), rng)
        rho = DensityMatrix(space, np.kron(rho_a.data, rho_c.data))
        assert np.abs(partial_trace(rho, "atom").data - rho_a.data).max() < 1e-12
        assert np.abs(partial_trace(rho, "cavity").data - rho_c.data).max() < 1e-12

    def test_bell_state_reduction(self):
        space = HilbertSpace.cavity_qubit(1)
        bell = (basis_ket(space, cavity=0, qubit=0)
                + basis_ket(space, cavity=1, qubit=1)) / np.sqrt(2)
        rho = DensityMatrix.from_ket(space, bell)
        red = partial_trace(rho, "qubit")
        assert np.abs(red.data - np.eye(2) / 2).max() < 1e-12

    def test_trace_preserved(self, rng):
        space = HilbertSpace.atom_cavity_qubit(2)
        rho = random_density(space, rng)
        for keep in ("atom", "cavity", "qubit", ("atom", "cavity")):
            assert partial_trace(rho, keep).data.trace().real == pytest.approx(1.0, abs=1e-12)

    def test_keep_everything_is_identity(self, rng):
        space = HilbertSpace.atom_cavity(1)
        rho = random_density(space, rng)
        assert np.abs(partial_trace(rho, ("atom", "cavity")).data - rho.data).max() < 1e-14

    def test_empty_keep(self, rng):
        rho = random_density(HilbertSpace.atom_cavity(1), rng)
        with pytest.raises(InvalidDimensionError):
            partial_trace(rho, ())


class TestThermalState:
    def test_zero_temperature_is_vacuum(self):
        rho = thermal_state(3, 0.0)
        expected = np.zeros((4, 4))
        expected[0, 0] = 1.0
        assert np.array_equal(rho.data, expected)

    def test_population_ratio_100mk(self):
        # nbar = 0.0979 is the occupation of the 5.037 GHz mode at 100 mK;
        # the geometric ratio p1/p0 = nbar/(1 + nbar) ~ 0.0892
        nbar = 0.0979
        rho = thermal_state(5, nbar)
        ratio = rho.data[1, 1].real / rho.data[0, 0].real
        assert ratio == pytest.approx(nbar / (1 + nbar), rel=1e-12)
        assert ratio == pytest.approx(0.0892, abs=1e-4)

    def test_populations_decrease(self):
        rho = thermal_state(6, 0.7)
        pops = np.diag(rho.data).real
        assert np.all(np.diff(pops) < 0)

    def test_negative_nbar(self):
        with pytest.raises(InvalidStateError):
            thermal_state(3, -0.1)


class TestAutoNmax:
    def test_zero_temperature_floor(self):
        assert auto_nmax(0.0) == 3

    def test_small_occupation_uses_floor(self):
        assert auto_nmax(1e-3) == 3

    def test_tail_rule(self):
        # r = nbar/(1+nbar); smallest N with r^(N+1) < 1e-9
        nbar = 0.012
        n = auto_nmax(nbar)
        r = nbar / (1 + nbar)
        assert r ** (n + 1) < 1e-9
        assert not (n > 3 and r ** n < 1e-9)

    def test_cap_keeps_desk_scale(self):
        assert auto_nmax(0.8) == 5
        space = HilbertSpace.atom_cavity_qubit(auto_nmax(10.0))
        assert space.dim <= 60


class TestSpaceAndTypes:
    def test_index_row_major(self):
        space = HilbertSpace.atom_cavity_qubit(1)
        assert space.index(atom="1", cavity=1, qubit=0) == (1 * 2 + 1) * 2
        assert space.index(atom=0, cavity=0, qubit=1) == 1
        assert space.dim == 20

    def test_atom_dimension_enforced(self):
        with pytest.raises(InvalidDimensionError):
            HilbertSpace((("atom", 4), ("cavity", 2)))

    def test_nmax_at_least_one(self):
        with pytest.raises(InvalidDimensionError):
            HilbertSpace((("atom", 5), ("cavity", 1)))

    def test_operator_immutable(self):
        a = annihilation(2)
        with pytest.raises((ValueError, AttributeError)):
            a.data[0, 0] = 5.0
        with pytest.raises(AttributeError):
            a.data = np.eye(3)

    def test_density_matrix_invariants(self):
        space = HilbertSpace.single("cavity", 2)
        with pytest.raises(InvalidStateError):
            DensityMatrix(space, [[0.5, 0.5], [0.1, 0.5]])  # not Hermitian
        with pytest.raises(InvalidStateError):
            DensityMatrix(space, [[0.9, 0], [0, 0.2]])  # trace != 1
        with pytest.raises(InvalidStateError):
            DensityMatrix(space, [[1.2, 0], [0, -0.2]])  # negative eigenvalue

    def test_hermitian_check(self):
        space = HilbertSpace.single("cavity", 2)
        h = Operator(space, [[1.0, 2j], [-2j, 0.5]])
        assert h.is_hermitian()
        assert not Operator(space, [[0, 1], [0, 0]]).is_hermitian()
