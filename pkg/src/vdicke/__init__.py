"""Unbalanced three-level V-type Dicke model: phases, spectra, dynamics."""

from .params import (ModelParams, DerivedScalars, RamanInputs, SymmetryClass,
                     OMEGA_SIGN_CONVENTION, classify_symmetry, derived_scalars,
                     raman_map)
from .landscape import (OrderParams, equilibrium_residuals, me_landscape,
                        mean_field_energy, np_boundary_residual,
                        solve_order_params, sp_amplitude, sp_candidate_alphas)
from .fluctuations import (QuadraticForm, Sector, build_inverted_form,
                           build_ns_form)
from .closedphase import (ClosedPhasePoint, Phase, SpectrumResult,
                          classify_closed, hb_matrix, hb_spectrum,
                          soft_mode_norm, sweep_closed)
from .opensteady import (InvertedRegion, OpenPhasePoint, RapiditySet,
                         SteadyAtomicState, analytic_inverted_area,
                         classify_open, inverted_region, np_rapidities,
                         rapidities, shape_matrix, solve_sp_steady,
                         state_rapidities, su3_constraint_residuals,
                         sweep_open)
from .dynamics import (AttractorControls, AttractorReport, IntegrationControls,
                       MeanFieldODEState, TargetState, Trajectory, dark_state,
                       detect_attractor, eom_rhs, energy_of_state, fidelity,
                       integrate, run_fidelity, run_to_attractor)
from .datasets import Dataset, GridAxis, GridSpec, run_sweep, write_dataset

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
