"""Casimir forces between barriers in discrete scalar-field lattices."""
from .experiments import (ExperimentPreset, ExperimentResult, Reference, catalog,
                          get_preset, load_result, persist_result, run_custom, run_preset)
from .force_extract import (Convention, DerivativeMethod, GeometryFactors, PowerLawFit,
                            chain_force_closed_form, dimreg_plate_force, fit_power_law,
                            spline_derivative, zeta_force_1d)
from .kernels import get_backend, use_backend
from .lattice_modes import (Family, LatticeGeometry, ModeSpectrum, Wavevector, dispersion_grid,
                            group_velocity, mode_spectrum, omega_chain, omega_diagonal,
                            omega_spacetime_square, omega_square, omega_triangular)
from .zero_point import (ChopSpec, EnergyCurve, EnergySample, energy_curve, gap_energy,
                         lagrange_gap_sum, spacetime_chain_system_energy,
                         spacetime_square_system_energy, system_energy,
                         system_energy_chain_closed)

__version__ = "0.1.0"
