"""
Checking the closed form
========================

When every segment of a trial shares one noise draw, the relative phase is
n * l * delta and the coherence decays as exp(-(n l)^2 dphi2 / 2) for
small spreads. Here the Monte Carlo ensemble is set against that formula,
and the decay rate is fitted as a power of n.
"""
import math

import numpy as np

from oamfiber.analytic import decay_rate, fit_power_law
from oamfiber.harness import ExperimentConfig, compare_analytic
from oamfiber.noise import Correlation, FiberSpec, generate_profiles
from oamfiber.propagation import ScheduleSpec, ensemble_density
from oamfiber.qstate import make_superposition_state

sigma = 0.01
sd = sigma * math.sqrt((4 - math.pi) / 2)
fiber = FiberSpec(500.0, int(0.4 / sd), sigma, correlation=Correlation.FULLY_CORRELATED)
config = ExperimentConfig(fiber, ScheduleSpec.free(), (1,), trials=10_000, master_seed=3,
                          sample_points=8)
for row in compare_analytic(config):
    print(f"{row.distance_m:7.1f} m  |dF| = {row.abs_error:.2e}  ({row.abs_error / row.stderr_mc:.2f} SE)  {row.status}")

# the coherence decay rate should grow as n^2
profiles = generate_profiles(fiber, 3, 10_000)
psi = make_superposition_state(1, 0.0)
n = np.array([8, 16, 32, 61])
rates = [decay_rate(ensemble_density(psi, profiles, 1, ScheduleSpec.free(), upto=m).coherence)
         for m in n]
slope, _ = fit_power_law(n, rates)
print("fitted exponent:", round(slope, 3))

# outside the small-spread regime the comparison is flagged, not failed
far = ExperimentConfig(FiberSpec(500.0, 1000, sigma, correlation=Correlation.FULLY_CORRELATED),
                       ScheduleSpec.free(), (5,), trials=2000, sample_points=4)
print({row.status for row in compare_analytic(far)})
