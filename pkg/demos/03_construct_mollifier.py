"""Synthesizing a mollifier that meets every condition at once.

The search runs over Hermite functions of width sqrt(pi): linear rows fix
the normalization, the vanishing moments and ``rho(0) = 1/pi``; the
quadratic ``int |rho|^2 = 1/pi`` is met by a secular-equation start and a
Newton polish on the KKT system.
"""

# %% Feasibility depends on the basis size
from delta_forge import InfeasibleError, Kinematics, classify, construct_mollifier, cross_section_ratio
from delta_forge.construct import quadratic_gap, verify_roundtrip
from delta_forge.sifting import convergence_study, gaussian_test, richardson_limit

for K in range(4, 11):
    print(f"q=3 K={K:<2} quadratic gap {quadratic_gap(K, 3):.3e}")
try:
    construct_mollifier(3, 4)
except InfeasibleError as exc:
    print("q=3 K=4:", exc.to_dict()["status"], exc.residuals)

# %% A full solution at q = 3
rho = construct_mollifier(3, 10)
report = classify(rho, 3)
print(report.overall.value, "max residual", report.max_residual)
print("coefficients", rho.coefficients.round(6))
print("damper round trip", verify_roundtrip(rho).to_dict())

# %% Fourth-order sifting and the exact Rutherford limit
study = convergence_study(gaussian_test(), rho)
print("sift order", study.fitted_order)
kin = Kinematics.from_degrees(Z=1, E_i=1.5, theta_deg=90)
ladder = [0.02, 0.01, 0.005, 0.0025]
ratios = [cross_section_ratio(kin, rho, eps) for eps in ladder]
print("cross-section ratio", richardson_limit(ladder, ratios).real)
