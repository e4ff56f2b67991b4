"""Rutherford cross sections from the regularized energy delta.

The sinc sequence is compared with the closed form ``4 Z^2 alpha^2 / q^4``
at ``eps = 1e-4``.  The residual ``ratio - 1`` is an O(eps) effect:
to first order it equals ``(eps / 2 pi) int_0^inf [f(x) + f(-x) - 2] / x^2 dx``
with ``f`` the Rutherford integrand normalized to ``f(0) = 1``.  It is
largest near threshold at forward angles.
"""

# %% Table of ratios
import math

import numpy as np
from scipy import integrate

from delta_forge import Kinematics, builtin, cross_section_ratio
from delta_forge.scattering import rutherford_test_function

eps = 1e-4
print(f"{'theta':>6} {'E_i':>5} {'ratio - 1':>12} {'first-order term':>17}")
for E_i in (1.05, 1.5):
    for theta in (30, 60, 90, 120, 180):
        kin = Kinematics.from_degrees(Z=1, E_i=E_i, theta_deg=theta)
        f = rutherford_test_function(kin)
        dev = cross_section_ratio(kin, builtin("sinc"), eps) - 1.0

        def g(x):
            x = np.asarray(x, dtype=float)
            return (f(x) + f(-x) - 2.0) / (x * x) if x != 0 else 0.0

        # the kink at the threshold x = E_i - m is passed to quad as a break point
        c = integrate.quad(g, 0, 10, points=[kin.E_i - kin.m], limit=400)[0] \
            + integrate.quad(g, 10, np.inf)[0]
        print(f"{theta:>6} {E_i:>5} {dev:>12.4e} {eps / (2 * math.pi) * c:>17.4e}")
