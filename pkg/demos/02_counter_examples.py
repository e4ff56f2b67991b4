"""Why smooth cut-offs are not enough: Lorentzian and Gaussian mollifiers.

Both are normalized, but neither meets ``int |rho|^2 = rho(0) = 1/pi``.  The
regularized Rutherford cross section then converges to ``pi int |rho|^2``
times the closed form instead of the closed form itself.
"""

# %% Condition reports
import math

from delta_forge import Kinematics, builtin, check_physical, classify, cross_section_ratio
from delta_forge.conditions import squared_norm
from delta_forge.sifting import richardson_limit

for name in ("lorentzian", "gaussian"):
    rho = builtin(name)
    phys = check_physical(rho)
    print(f"{name:<10} rho(0)={phys.point_value:.6f} int|rho|^2={phys.squared_norm:.6f} "
          f"point-value residual={phys.point_value_residual:.3e} "
          f"squared-norm residual={phys.squared_norm_residual:.3e} overall(q=2)={classify(rho, 2).overall.value}")

# %% The failure factor shows up in the cross section
kin = Kinematics.from_degrees(Z=1, E_i=1.5, theta_deg=90)
ladder = [0.01, 0.005, 0.0025, 0.00125]
for name in ("lorentzian", "gaussian"):
    rho = builtin(name)
    ratios = [cross_section_ratio(kin, rho, eps) for eps in ladder]
    predicted = math.pi * squared_norm(rho).real
    print(f"{name:<10} ratios {[f'{r:.6f}' for r in ratios]} -> "
          f"{richardson_limit(ladder, ratios).real:.6f} (predicted {predicted:.6f})")
