"""Open-system simulation of a Rydberg-atom--microwave-photon phase gate."""

from .constants import HBAR, K_B, TWO_PI
from .qops import (DensityMatrix, HilbertSpace, Operator, annihilation,
                   atomic_op, auto_nmax, basis_ket, embed, partial_trace,
                   thermal_state)
from .model import (DETUNING_OFF_RESONANT, PhysicalParams, SegmentConfig,
                    collapse_ops, hamiltonian, nbar_thermal)
from .evolve import (EvolveStep, Liouvillian, Schedule, UnitaryStep,
                     apply_unitary, build_liouvillian, propagate,
                     rk4_propagate, run_schedule)
from .protocol import (BellPrepResult, bell_prep, cz_schedule, cz_truth_table,
                       prepare_cavity)
from .metrics import (SweepResult, analytic_fidelity, gate_duration,
                      pi_pulse_error, scaling_estimate, sweep_gq,
                      sweep_temperature, uhlmann_fidelity)
from .cpwfield import (CpwGeometry, FieldGrid, coupling_map,
                       normalize_zero_point, solve_potential)

__version__ = "0.1.0"
