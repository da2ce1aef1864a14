"""Dyadic-shell spectral diagnostics for MHD, Hall-MHD, and EMHD turbulence.

The package covers the full pipeline: seeded field generation with a
prescribed intermittency dimension, a dealiased pseudo-spectral solver,
shell-resolved diagnostics (spectra, fluxes, extremal dissipation rates,
structure functions), intermittency-dimension estimators, and closed-form
scaling-law predictors with rigorous bound checkers.
"""

__version__ = "1.0.0"

from .core import GridSpec, RealVectorField, Snapshot, SpectralVectorField
from .generate import (PRNG_VERSION, PacketLaw, intermittent_packets,
                       random_solenoidal, single_mode)
from .diagnostics import (DissipationSummary, FluxTable, ShellNormSeries,
                          SpectrumTable, StructureFunctionTable,
                          dissipation_rates, energy_spectrum,
                          extreme_dissipation, flux_table, magnetic_flux,
                          shell_norm_series, structure_function)
from .intermittency import (IntermittencyEstimate, bernstein_check, elsasser,
                            estimate_delta_fit, estimate_delta_sup)
from .phenomenology import (BoundReport, PowerLawFit, SpectrumRegime,
                            StructureFamily, TransitionKind,
                            check_spectrum_bounds, check_structure_bounds,
                            fit_power_law, predict_shell_amplitude,
                            predict_spectrum, predict_transition,
                            structure_exponent, structure_prefactor)
from .snapshot_io import SnapshotFormatError, crc64, read_snapshot, write_snapshot
from .solver import (DivergenceError, ForcingSpec, PhysicalParams, RunResult,
                     SolverConfig, SolverState, StepSizeError,
                     energy_balance_residual, run, step)
