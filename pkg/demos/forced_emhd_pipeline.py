"""Forced electron-MHD run followed by the full diagnostic chain:
spectrum, extremal dissipation rates, and the dyadic spectrum bound check.

Run:  python demos/forced_emhd_pipeline.py   (about a minute at 32^3)
"""

import numpy as np

from lpturb import diagnostics, intermittency
from lpturb.core import GridSpec
from lpturb.generate import random_solenoidal
from lpturb.phenomenology import check_spectrum_bounds
from lpturb.solver import (ForcingSpec, PhysicalParams, SolverConfig,
                           SolverState, run)

g = GridSpec(32, 1.0)
B0 = random_solenoidal(g, -1.0, [1, 2, 3], seed=11, amplitude=0.5)
params = PhysicalParams(nu=0.0, mu=2e-3, d_i=0.05, L=1.0)
config = SolverConfig(model="EMHD", params=params, dt=4e-4, t_end=0.4,
                      forcing=ForcingSpec(shells=(1, 2), amplitude=0.3, seed=5),
                      snapshot_stride=100)
result = run(config, SolverState(0.0, B0))
print(f"{len(result.budget)} steps, E_b {result.budget[0]['E_b']:.4f} -> "
      f"{result.budget[-1]['E_b']:.4f}")

# average over the second half of the run
window = [s for s in result.snapshots if s.t >= 0.5 * config.t_end]
qs = [1, 2, 3]
spectrum = diagnostics.energy_spectrum(window, "B")
series = diagnostics.shell_norm_series(window, "B", qs)
delta_b = intermittency.estimate_delta_fit(series).delta
eps_bar, eps_under = diagnostics.extreme_dissipation(window, params.d_i, qs)
print(f"delta_b = {delta_b:.2f}, eps_bar = {eps_bar:.3e}, "
      f"eps_under = {eps_under:.3e}")

report = check_spectrum_bounds(spectrum, eps_bar, eps_under, delta_b,
                               params.d_i, g.L, qs)
print(f"bounds passed: {report.passed}")
print(f"  max C_up          = {report.constants['max_c_up']:.3f} (<= 100)")
print(f"  min lower ratio   = {report.constants['min_lower_ratio']:.3f} (>= 0.01)")
