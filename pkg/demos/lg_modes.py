"""
Laguerre-Gauss modes carry the qubit
====================================

The radial profiles of LG modes with the same l are orthonormal, and each
mode picks up a Gouy phase (2p + |l| + 1) atan(z / z_R) on propagation.
"""
import math

import matplotlib.pyplot as plt
import numpy as np
from scipy.integrate import quad

from oamfiber.qstate import LGModeParams, bits_per_photon, gouy_phase, lg_radial, qudit_dimension

w0, k = 1e-3, 2 * math.pi / 1550e-9
r = np.linspace(0, 3 * w0, 400)
for p, l in [(0, 1), (0, 3), (1, 1), (2, 2)]:
    plt.plot(r * 1e3, np.abs(lg_radial(LGModeParams(p, l, w0, k), r)) ** 2, label=f"p={p}, l={l}")
plt.xlabel("r (mm)")
plt.ylabel("|R(r)|^2")
plt.legend()
plt.savefig("lg_modes.png", dpi=120)

a, b = LGModeParams(0, 2, w0, k), LGModeParams(1, 2, w0, k)
overlap = quad(lambda x: (lg_radial(a, x) * np.conj(lg_radial(b, x))).real * x, 0, np.inf)[0]
print("overlap p=0 vs p=1:", overlap)

zr = a.rayleigh_range
print("Gouy phase at z_R for p=1, l=2:", gouy_phase(LGModeParams(1, 2, w0, k, zr)), "expected", 5 * math.pi / 4)
print("dimension and bits for p, l <= 3:", qudit_dimension(3, 3), bits_per_photon(3, 3))
