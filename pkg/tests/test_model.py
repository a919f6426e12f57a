"""Parameter record, Hamiltonian terms and collapse channels."""

import math

import numpy as np
import pytest
import scipy.constants

from rydcav import qops
from rydcav.constants import TWO_PI
from rydcav.model import (PhysicalParams, SegmentConfig, collapse_ops,
                          hamiltonian, nbar_thermal)
from rydcav.qops import HilbertSpace, InvalidDimensionError


@pytest.fixture
def params():
    return PhysicalParams()


class TestPhysicalParams:
    def test_kappa_from_quality_factor(self, params):
        # Q = omega_c / kappa with omega_c/2pi = 5.037 GHz, Q = 2e5
        assert params.kappa / TWO_PI == pytest.approx(25185.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            PhysicalParams(gamma_r=-1.0)
        with pytest.raises(ValueError):
            PhysicalParams(q_factor=0.0)
        with pytest.raises(ValueError):
            PhysicalParams(temp=-0.01)

    def test_lossless_has_no_channels(self, params):
        pl = params.lossless()
        assert pl.kappa == 0.0
        assert pl.nbar == 0.0
        assert collapse_ops(pl, HilbertSpace.atom_cavity_qubit(2)) == []

    def test_paper_lifetimes(self, params):
        assert params.gamma_r == pytest.approx(1219.5121951, rel=1e-9)
        assert params.gamma_rp == pytest.approx(500.0, rel=1e-12)

    def test_segment_invariant(self):
        with pytest.raises(ValueError):
            SegmentConfig(drive_on=True, sc_coupled=True)


class TestNbarThermal:
    def test_zero_temperature_exact(self):
        assert nbar_thermal(TWO_PI * 5.037e9, 0.0) == 0.0

    def test_against_codata_oracle(self):
        # independent evaluation with scipy's CODATA constants
        w = TWO_PI * 5.037e9
        for temp in (0.040, 0.100, 0.300):
            expected = 1.0 / math.expm1(scipy.constants.hbar * w
                                        / (scipy.constants.k * temp))
            assert nbar_thermal(w, temp) == pytest.approx(expected, rel=1e-9)

    def test_frozen_values(self):
        w = TWO_PI * 5.037e9
        assert nbar_thermal(w, 0.040) == pytest.approx(2.379e-3, rel=2e-2)
        assert nbar_thermal(w, 0.100) == pytest.approx(0.0979, rel=1e-3)

    def test_monotone_in_temperature(self):
        w = TWO_PI * 5.037e9
        vals = [nbar_thermal(w, t) for t in np.linspace(0.001, 0.5, 40)]
        assert np.all(np.diff(vals) > 0)

    def test_bose_identity(self):
        w = TWO_PI * 5.037e9
        from rydcav.constants import HBAR, K_B
        for temp in (0.02, 0.08, 0.25):
            x = HBAR * w / (K_B * temp)
            assert nbar_thermal(w, temp) * math.expm1(x) == pytest.approx(1.0, rel=1e-12)


class TestHamiltonian:
    def test_jc_matrix_element(self, params):
        space = HilbertSpace.atom_cavity(2)
        h = hamiltonian(params, SegmentConfig(), space)
        i = space.index(atom="rp", cavity=0)
        j = space.index(atom="r", cavity=1)
        assert h.data[i, j] == pytest.approx(params.g, rel=1e-14)
        # sqrt(2) enhancement one rung up
        i2 = space.index(atom="rp", cavity=1)
        j2 = space.index(atom="r", cavity=2)
        assert h.data[i2, j2] == pytest.approx(params.g * np.sqrt(2), rel=1e-14)

    def test_detuning_only_diagonal(self, params):
        delta = TWO_PI * 0.3e9
        p = params.replace(g=0.0)
        space = HilbertSpace.atom_cavity(2)
        h = hamiltonian(p, SegmentConfig(detuning=delta), space)
        assert np.abs(h.data - np.diag(np.diag(h.data))).max() == 0.0
        for n in range(3):
            assert h.data[space.index(atom="rp", cavity=n)].sum() == pytest.approx(delta)
        assert h.data[space.index(atom="r", cavity=1), space.index(atom="r", cavity=1)] == 0.0

    def test_drive_term(self, params):
        space = HilbertSpace.atom_cavity(1)
        h = hamiltonian(params, SegmentConfig(drive_on=True), space)
        i = space.index(atom="r", cavity=0)
        j = space.index(atom="1", cavity=0)
        assert h.data[i, j] == pytest.approx(params.omega_rabi / 2, rel=1e-14)

    def test_sc_swap_term(self, params):
        space = HilbertSpace.atom_cavity_qubit(2)
        h = hamiltonian(params, SegmentConfig(sc_coupled=True), space)
        i = space.index(atom="0", cavity=0, qubit=1)
        j = space.index(atom="0", cavity=1, qubit=0)
        assert h.data[i, j] == pytest.approx(params.g_sc, rel=1e-14)
        i2 = space.index(atom="0", cavity=1, qubit=1)
        j2 = space.index(atom="0", cavity=2, qubit=0)
        assert h.data[i2, j2] == pytest.approx(params.g_sc * np.sqrt(2), rel=1e-14)

    def test_sc_requires_qubit_factor(self, params):
        with pytest.raises(InvalidDimensionError):
            hamiltonian(params, SegmentConfig(sc_coupled=True),
                        HilbertSpace.atom_cavity(2))

    @pytest.mark.parametrize("seg", [
        SegmentConfig(),
        SegmentConfig(detuning=TWO_PI * 0.5e9),
        SegmentConfig(detuning=TWO_PI * 0.5e9, drive_on=True),
        SegmentConfig(sc_coupled=True),
    ])
    def test_hermiticity(self, params, seg):
        space = HilbertSpace.atom_cavity_qubit(2)
        h = hamiltonian(params, seg, space)
        scale = max(1.0, np.abs(h.data).max())
        assert np.abs(h.data - h.data.conj().T).max() < 1e-12 * scale


class TestCollapseOps:
    def test_zero_temperature_channel_count(self, params):
        ops = collapse_ops(params, HilbertSpace.atom_cavity(2))
        assert len(ops) == 3  # gamma_r, gamma_rp, kappa; thermal pump absent

    def test_amplitudes(self, params):
        space = HilbertSpace.atom_cavity(1)
        c_r, c_rp, c_k = collapse_ops(params, space)
        assert c_r.data[space.index(atom="s", cavity=0),
                        space.index(atom="r", cavity=0)] == pytest.approx(
            math.sqrt(params.gamma_r), rel=1e-14)
        assert c_rp.data[space.index(atom="s", cavity=1),
                         space.index(atom="rp", cavity=1)] == pytest.approx(
            math.sqrt(params.gamma_rp), rel=1e-14)
        assert c_k.data[space.index(atom="0", cavity=0),
                        space.index(atom="0", cavity=1)] == pytest.approx(
            math.sqrt(params.kappa), rel=1e-14)

    def test_detailed_balance_at_finite_temperature(self, params):
        p = params.replace(temp=0.1)
        space = HilbertSpace.atom_cavity(3)
        ops = collapse_ops(p, space)
        assert len(ops) == 4
        down, up = ops[2], ops[3]
        amp_down = np.abs(down.data).max()   # sqrt(kappa (nbar+1)) * sqrt(nmax)
        amp_up = np.abs(up.data).max()       # sqrt(kappa nbar) * sqrt(nmax)
        assert (amp_up / amp_down) ** 2 == pytest.approx(p.nbar / (p.nbar + 1), rel=1e-12)

    def test_qubit_channel(self, params):
        ops = collapse_ops(params, HilbertSpace.atom_cavity_qubit(1))
        assert len(ops) == 4
        space = HilbertSpace.atom_cavity_qubit(1)
        c_sc = ops[-1]
        assert c_sc.data[space.index(atom="0", cavity=0, qubit=0),
                         space.index(atom="0", cavity=0, qubit=1)] == pytest.approx(
            math.sqrt(params.gamma_sc), rel=1e-14)

    def test_dephasing_channel(self, params):
        p = params.replace(gamma_phi=10.0)
        space = HilbertSpace.atom_cavity(1)
        ops = collapse_ops(p, space)
        assert len(ops) == 4
        deph = ops[-1]  # atom decay, cavity loss, then dephasing
        amp = math.sqrt(p.gamma_phi / 2)
        assert deph.data[space.index(atom="r", cavity=0),
                         space.index(atom="r", cavity=0)] == pytest.approx(amp)
        assert deph.data[space.index(atom="0", cavity=0),
                         space.index(atom="0", cavity=0)] == pytest.approx(-amp)

    def test_cavity_only_space(self, params):
        ops = collapse_ops(params, HilbertSpace.single("cavity", 3))
        assert len(ops) == 1
