"""Dephasing of orbital-angular-momentum photon qubits in segmented fiber.

Monte Carlo propagation through Rayleigh phase-noise profiles, CPMG
dynamical decoupling with dove-prism flips, and the closed-form
``exp(-n^2 l^2 dphi2 / 2)`` coherence model.
"""
from .analytic import (AnalyticParams, analytic_fidelity, analytic_rho_out,
                       decay_rate, decoherence_factor, fit_power_law)
from .harness import (ComparisonRow, ConfigError, ExperimentConfig, FidelityCurve,
                      FidelityRow, compare_analytic, emit, load_config, preset_config,
                      run_experiment, run_preset, sweep_l)
from .noise import (Correlation, FiberSpec, NoiseProfile, generate_noise_profile,
                    generate_profiles, mix_seed, profile_statistics, rayleigh_pdf,
                    sample_rayleigh)
from .propagation import (Placement, PropagationResult, ScheduleMismatchError,
                          ScheduleSpec, Scheme, dove_prism_pulse, ensemble_density,
                          propagate, segment_operator)
from .qstate import (DensityMatrix2, InvariantViolation, LGModeParams, StateVector2,
                     bits_per_photon, density_from_state, fidelity, gouy_phase,
                     lg_radial, make_superposition_state, qudit_dimension)

__version__ = "0.1.0"
