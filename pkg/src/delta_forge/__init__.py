"""Delta sequences, mollifier conditions and regularized Coulomb scattering."""

__version__ = "0.1.0"

from .mollifier import (  # noqa: E402
    DecayClass,
    Damper,
    DeltaSequence,
    Mollifier,
    builtin,
    builtin_damper,
    damper_from_json,
    eval_delta,
    from_json,
    hermite,
    tabulate,
)
from .quadrature import IntegrandSpec, QuadratureResult, integrate_line, integrate_moment  # noqa: E402
from .transforms import (  # noqa: E402
    TransformError,
    damper_side_conditions,
    damper_to_mollifier,
    fourier_transform,
    inverse_fourier_transform,
    mollifier_to_damper,
    inverse_fourier_quad,
    parseval_residual,
)
from .conditions import (  # noqa: E402
    ConditionReport,
    Overall,
    check_colombeau,
    check_physical,
    classify,
    infeasibility_witness,
)
from .sifting import (  # noqa: E402
    ConvergenceStudy,
    GrowthClass,
    TestFunction,
    convergence_study,
    golden_rule_gap,
    sift,
    sift_squared,
)
from .construct import (  # noqa: E402
    ConstraintSystem,
    InfeasibleError,
    build_constraints,
    construct_mollifier,
    solve_mollifier,
    verify_roundtrip,
)
from .scattering import (  # noqa: E402
    Kinematics,
    coulomb_form_factor,
    cross_section_ratio,
    cross_section_regularized,
    rutherford_closed_form,
    rutherford_integrand,
)
