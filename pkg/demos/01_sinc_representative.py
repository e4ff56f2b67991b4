"""The sinc delta sequence: normalization, its square, and the golden rule.

Run with ``python3 demos/01_sinc_representative.py``.
"""

# %% The unit sinc and its scaled family
import math

from delta_forge import DeltaSequence, builtin, classify
from delta_forge.quadrature import integrate_moment
from delta_forge.sifting import constant_test, gaussian_test, sift, sift_squared

sinc = builtin("sinc")
print("rho(0)            =", sinc(0.0), " 1/pi =", 1 / math.pi)
print("int rho           =", integrate_moment(sinc, 0).real)
print("int z^2 rho       ->", "divergent" if integrate_moment(sinc, 2).divergent else "finite")

# %% Sifting converges, and the square of the sequence grows like 1/(pi eps)
f = gaussian_test()
for eps in (0.1, 0.01, 0.001):
    seq = DeltaSequence(sinc, eps)
    s1 = sift(f, seq).real
    s2 = sift_squared(constant_test(), seq).real
    print(f"eps={eps:<6} sift={s1:.15f}  int|rho_eps|^2 * pi eps = {s2 * math.pi * eps:.15f}")

# %% pi eps |rho_eps|^2 is itself a delta sequence
for eps in (1e-2, 1e-3, 1e-4):
    val = math.pi * eps * sift_squared(f, DeltaSequence(sinc, eps)).real
    print(f"eps={eps:<6} pi eps int f |rho_eps|^2 = {val:.8f}  (f(0) = 1)")

# %% The sinc passes the physical conditions but not the moment set
report = classify(sinc, 2)
print(report.overall.value, report.to_dict()["vanishing_moment_residuals"])
