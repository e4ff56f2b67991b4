import csv
import io
import json
import math

import numpy as np
import pytest

from delta_forge.conditions import squared_moment, squared_norm
from delta_forge.construct import construct_mollifier
from delta_forge.mollifier import DeltaSequence, builtin, hermite
from delta_forge.sifting import (
    ConvergenceStudy,
    GrowthClass,
    TestFunction,
    constant_test,
    convergence_study,
    corpus,
    fit_order,
    gaussian_test,
    golden_rule_gap,
    lorentz_test,
    richardson_limit,
    shifted_gauss_test,
    sift,
    sift_squared,
    sift_x,
)

from oracles import (
    INV_SQRT_PI,
    SQNORM,
    gaussian_sift_gaussian,
    gaussian_sift_lorentz,
    sinc_sift_gaussian,
    sinc_squared_sift_one,
)


def gaussian_squared_sift_gaussian(eps):
    """int exp(-x^2) exp(-2 x^2/eps^2) / (pi eps^2) dx."""
    return 1 / (math.sqrt(math.pi) * eps * math.sqrt(eps * eps + 2))


def test_sift_sinc_gaussian():
    val = sift(gaussian_test(), DeltaSequence(builtin("sinc"), 1e-3), 1e-10)
    assert abs(val - 1) <= 5e-3
    assert val.real == pytest.approx(sinc_sift_gaussian(1e-3), abs=1e-9)


@pytest.mark.parametrize("eps", [0.3, 0.05, 0.01])
def test_sift_sinc_gaussian_oracle(eps):
    assert sift(gaussian_test(), DeltaSequence(builtin("sinc"), eps), 1e-11).real == \
        pytest.approx(sinc_sift_gaussian(eps), abs=1e-9)


@pytest.mark.parametrize("name", ["sinc", "lorentzian", "gaussian"])
@pytest.mark.parametrize("eps", [0.5, 0.01])
def test_sift_constant(name, eps):
    assert abs(sift(constant_test(), DeltaSequence(builtin(name), eps), 1e-10) - 1) <= 1e-8


def test_sift_constant_constructed(constructed_q3):
    assert abs(sift(constant_test(), DeltaSequence(constructed_q3, 0.1), 1e-12) - 1) <= 1e-10


@pytest.mark.parametrize("eps", [0.2, 0.1, 0.05])
def test_sift_gaussian_lorentz_oracle(eps):
    val = sift(lorentz_test(), DeltaSequence(builtin("gaussian"), eps), 1e-13)
    assert val.real == pytest.approx(gaussian_sift_lorentz(eps), abs=1e-12)


def test_sift_gaussian_lorentz_order():
    ladder = [0.2, 0.1, 0.05, 0.025]
    res = [abs(sift(lorentz_test(), DeltaSequence(builtin("gaussian"), e), 1e-13) - 1) for e in ladder]
    assert fit_order(ladder, res) == pytest.approx(2.0, abs=0.3)


@pytest.mark.parametrize("eps", [0.1, 0.01])
def test_sift_gaussian_gaussian_oracle(eps):
    val = sift(gaussian_test(), DeltaSequence(builtin("gaussian"), eps), 1e-13)
    assert val.real == pytest.approx(gaussian_sift_gaussian(eps), abs=1e-13)


def test_sift_squared_sinc_constant():
    eps = 0.01
    val = sift_squared(constant_test(), DeltaSequence(builtin("sinc"), eps), 1e-12)
    assert val.real == pytest.approx(sinc_squared_sift_one(eps), rel=1e-9)


def test_sift_squared_sinc_gaussian():
    eps = 1e-3
    val = sift_squared(gaussian_test(), DeltaSequence(builtin("sinc"), eps), 1e-12)
    assert val.real == pytest.approx(1000 / math.pi, rel=1e-2)


def test_sift_squared_gaussian_gaussian():
    eps = 0.01
    val = sift_squared(gaussian_test(), DeltaSequence(builtin("gaussian"), eps), 1e-12)
    assert val.real == pytest.approx(gaussian_squared_sift_gaussian(eps), rel=1e-10)
    # leading term is int|rho|^2 f(0) / eps; rho(0) = 1/sqrt(pi) would overshoot by sqrt(2)
    assert val.real * eps == pytest.approx(SQNORM["gaussian"], rel=1e-4)
    assert val.real * eps != pytest.approx(INV_SQRT_PI, rel=0.1)


def test_sinc_golden_rule_at_small_eps():
    eps = 1e-4
    val = sift_squared(gaussian_test(), DeltaSequence(builtin("sinc"), eps), 1e-12)
    assert abs(math.pi * eps * val - 1) <= 1e-3


@pytest.mark.parametrize("fname", ["exp(-x^2)", "1/(1+x^2)", "cos(x)exp(-x^2/4)", "rutherford"])
@pytest.mark.parametrize("name", ["lorentzian", "gaussian"])
def test_scaling_identity(fname, name):
    f = corpus()[fname]
    seq = DeltaSequence(builtin(name), 0.05)
    assert abs(sift(f, seq, 1e-12) - sift_x(f, seq, 1e-12)) <= 1e-8


@pytest.mark.parametrize("fname", ["exp(-x^2)", "1/(1+x^2)", "cos(x)exp(-x^2/4)"])
def test_scaling_identity_sinc(fname):
    f = corpus()[fname]
    seq = DeltaSequence(builtin("sinc"), 0.05)
    assert abs(sift(f, seq, 1e-11) - sift_x(f, seq, 1e-11)) <= 1e-8


def test_golden_gap_even_f_gaussian():
    # the Gaussian misses int|rho|^2 = rho(0), so the gap has an O(1) offset;
    # the even test function kills the linear term, leaving only O(eps^2) drift
    f = gaussian_test()
    rho = builtin("gaussian")
    offset = INV_SQRT_PI * abs(1 / math.sqrt(2) - 1)
    for eps in (0.05, 0.025):
        exact = INV_SQRT_PI * abs(1 / math.sqrt(2 + eps * eps) - 1 / math.sqrt(1 + eps * eps))
        gap = golden_rule_gap(f, rho, eps, 1e-13)
        assert gap == pytest.approx(exact, abs=1e-12)
        assert abs(gap - offset) <= 0.2 * eps * eps


def test_golden_gap_symmetric_density(constructed_q3):
    f = shifted_gauss_test()
    g1 = golden_rule_gap(f, constructed_q3, 0.05, 1e-13)
    g2 = golden_rule_gap(f, constructed_q3, 0.025, 1e-13)
    assert abs(squared_moment(constructed_q3, 1)) <= 1e-12
    assert g1 <= 1e-2 * 0.05
    assert g1 / g2 == pytest.approx(4.0, rel=0.1)


@pytest.fixture(scope="module")
def asymmetric():
    """Full at q = 1 with a pinned complex H_3 coefficient, so |rho|^2 is lopsided."""
    K = 8
    row = np.zeros(K + 1)
    row[3] = 1.0
    return construct_mollifier(1, K, 1e-8, pinned=[(row, 0.05 + 0.03j)])


def test_asymmetric_mollifier_shape(asymmetric):
    assert not asymmetric.is_real
    assert abs(asymmetric(1.3) - np.conj(asymmetric(-1.3))) > 1e-3
    assert squared_norm(asymmetric).real == pytest.approx(asymmetric(0.0).real, abs=1e-10)


def test_golden_gap_slope_asymmetric(asymmetric):
    f = shifted_gauss_test()
    m1 = squared_moment(asymmetric, 1)
    assert abs(m1) > 1e-3
    predicted = abs(f.derivative_at_zero * m1)
    ladder = [0.02, 0.01, 0.005, 0.0025]
    slopes = [golden_rule_gap(f, asymmetric, e, 1e-13) / e for e in ladder]
    assert richardson_limit(ladder, slopes).real == pytest.approx(predicted, rel=0.1)
    assert min(slopes) > 0.5 * predicted


def test_gaussian_convergence_order():
    study = convergence_study(gaussian_test(), builtin("gaussian"))
    assert study.fitted_order == pytest.approx(2.0, abs=0.3)


def test_constructed_convergence_order(constructed_q3):
    study = convergence_study(gaussian_test(), constructed_q3)
    assert study.fitted_order >= 3.5
    assert study.fitted_order == pytest.approx(4.0, abs=0.3)  # the fourth moment survives


def test_constant_saturates():
    study = convergence_study(constant_test(), builtin("gaussian"))
    assert study.saturated
    assert json.loads(study.to_json())["fitted_order"] == "saturated"


def test_study_csv_columns_and_determinism():
    a = convergence_study(lorentz_test(), builtin("gaussian"), (0.2, 0.1, 0.05, 0.025))
    b = convergence_study(lorentz_test(), builtin("gaussian"), (0.2, 0.1, 0.05, 0.025), workers=4)
    rows = list(csv.reader(io.StringIO(a.to_csv())))
    assert rows[0] == ["epsilon", "value_re", "value_im", "residual", "err_estimate"]
    assert len(rows) == 5
    assert a.to_csv() == b.to_csv()
    assert a.to_json() == b.to_json()


@pytest.mark.parametrize("ladder", [(0.1, 0.01, 0.001), (0.1, 0.1, 0.01, 0.001), (0.1, 0.2, 0.01, 0.001)])
def test_study_ladder_validation(ladder):
    with pytest.raises(ValueError):
        convergence_study(gaussian_test(), builtin("gaussian"), ladder)


def test_study_rejects_unknown_quantity():
    with pytest.raises(ValueError):
        convergence_study(gaussian_test(), builtin("gaussian"), quantity="cubed")


def test_golden_study_target():
    study = convergence_study(gaussian_test(), builtin("sinc"), (0.1, 0.03, 0.01, 0.003),
                              quantity="golden")
    assert study.limit.real == pytest.approx(1 / math.pi, rel=1e-3)


def test_test_function_validation():
    with pytest.raises(ValueError, match="f'"):
        TestFunction(lambda x: np.exp(-(np.asarray(x) - 1) ** 2), math.exp(-1), 0.0)
    with pytest.raises(ValueError, match="f\\(0\\)"):
        TestFunction(lambda x: np.cos(x), 2.0, 0.0)
    f = TestFunction(lambda x: 1 + np.asarray(x) ** 2, 1.0, 0.0, GrowthClass.POLYNOMIAL_GROWTH)
    assert f(2.0) == 5.0


def test_polynomial_growth_flagged_for_sinc():
    f = TestFunction(lambda x: np.exp(-np.asarray(x) ** 2) * (1 + np.asarray(x) ** 2), 1.0, 0.0,
                     GrowthClass.POLYNOMIAL_GROWTH, "poly")
    study = convergence_study(f, builtin("sinc"), (0.1, 0.03, 0.01, 0.003), tol=1e-10)
    assert study.notes


def test_corpus_contents():
    names = set(corpus())
    assert {"exp(-x^2)", "1/(1+x^2)", "cos(x)exp(-x^2/4)", "rutherford"} <= names


def test_richardson_and_fit_helpers():
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    assert richardson_limit(eps, 2 + 3 * eps - eps ** 2).real == pytest.approx(2.0, abs=1e-12)
    assert fit_order(eps, 7 * eps ** 3) == pytest.approx(3.0, abs=1e-10)
    assert fit_order(eps, np.full(4, 1e-16)) == "saturated"
