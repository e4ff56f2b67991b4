import math

import numpy as np
import pytest

from delta_forge.mollifier import builtin
from delta_forge.scattering import (
    ALPHA,
    Kinematics,
    NormalizationBox,
    coulomb_form_factor,
    cross_section_ratio,
    cross_section_regularized,
    momentum_transfer_sq,
    phase_space_cross_section,
    plane_wave_norm,
    rutherford_closed_form,
    rutherford_integrand,
    rutherford_test_function,
    screened_form_factor_radial,
    transition_probability,
)
from delta_forge.sifting import richardson_limit

from oracles import SQNORM, rutherford

KIN_PI = Kinematics(Z=1, E_i=1.25, theta=math.pi)


@pytest.mark.parametrize("E, V, expected", [
    (1.0, 1.0, 1 / math.sqrt(2)), (2.0, 1.0, 0.5), (0.5, 8.0, 1 / (2 * math.sqrt(2)))])
def test_plane_wave_norm(E, V, expected):
    assert plane_wave_norm(E, V) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("E, V", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0)])
def test_plane_wave_norm_rejects(E, V):
    with pytest.raises(ValueError):
        plane_wave_norm(E, V)


def test_coulomb_form_factor():
    assert coulomb_form_factor(2.0) == pytest.approx(math.pi, rel=1e-15)
    assert coulomb_form_factor(1.0, 1.0, check=True) == pytest.approx(2 * math.pi, rel=1e-15)
    assert screened_form_factor_radial(1.0, 1.0) == pytest.approx(2 * math.pi, abs=1e-8)
    assert screened_form_factor_radial(0.0, 2.0) == pytest.approx(math.pi, abs=1e-8)
    assert screened_form_factor_radial(3.0, 0.5) == pytest.approx(4 * math.pi / 9.25, abs=1e-8)
    with pytest.raises(ValueError):
        coulomb_form_factor(0.0, 0.0)


def test_rutherford_integrand_examples():
    kin = Kinematics(Z=1, E_i=1.5, theta=math.pi / 2)
    assert rutherford_integrand(1.5, kin) == pytest.approx(1 / (4 * kin.p_i ** 4), rel=1e-14)
    assert rutherford_integrand(1.0, kin) == 0.0
    kin = Kinematics(Z=1, E_i=1.25, theta=math.pi / 3)
    # p = 0.75, q^2 = 0.5625, f = 1 / 0.31640625
    assert rutherford_integrand(1.25, kin) == pytest.approx(3.160493827160494, rel=1e-13)


def test_rutherford_integrand_below_threshold_zero():
    kin = Kinematics(Z=1, E_i=1.5, theta=1.0)
    E = np.array([-3.0, -1.0, 0.0, 0.5, 0.999])
    assert np.all(rutherford_integrand(E, kin) == 0.0)


def test_rutherford_test_function_slope():
    kin = Kinematics(Z=1, E_i=1.3, theta=0.7)
    f = rutherford_test_function(kin)
    assert f.value_at_zero == 1.0
    assert f.derivative_at_zero == pytest.approx(-kin.E_i / kin.p_i ** 2)


def test_closed_form_examples():
    assert rutherford_closed_form(KIN_PI) == pytest.approx(4 / (137 ** 2 * 5.0625), rel=1e-14)
    assert rutherford_closed_form(KIN_PI) == pytest.approx(4.2096e-5, rel=1e-4)
    k2 = Kinematics(Z=2, E_i=1.25, theta=math.pi)
    assert rutherford_closed_form(k2) == pytest.approx(4 * rutherford_closed_form(KIN_PI), rel=1e-15)
    half = Kinematics(Z=1, E_i=1.25, theta=math.pi / 2)
    assert rutherford_closed_form(KIN_PI) / rutherford_closed_form(half) == pytest.approx(0.25)
    assert rutherford_closed_form(half) == pytest.approx(rutherford(1, ALPHA, 1.25, math.pi / 2))


def test_momentum_transfer_elastic():
    kin = Kinematics(Z=1, E_i=2.0, theta=1.1)
    assert momentum_transfer_sq(2.0, kin) == pytest.approx(kin.q2, rel=1e-14)
    assert kin.q2 > 0


@pytest.mark.parametrize("kwargs, key", [
    (dict(Z=1, E_i=0.5, theta=1.0), "E_i"),
    (dict(Z=1, E_i=1.5, theta=0.0), "theta"),
    (dict(Z=1, E_i=1.5, theta=4.0), "theta"),
    (dict(Z=1, E_i=1.5, theta=1.0, m=0.0), "m"),
    (dict(Z=1, E_i=1.5, theta=1.0, alpha=-1.0), "alpha"),
    (dict(Z=float("nan"), E_i=1.5, theta=1.0), "Z"),
])
def test_kinematics_validation(kwargs, key):
    with pytest.raises(ValueError, match=key):
        Kinematics(**kwargs)


def test_kinematics_json():
    kin = Kinematics.from_json({"Z": 2, "alpha": 0.01, "m": 1.0, "E_i": 1.5, "theta_deg": 60})
    assert kin.theta == pytest.approx(math.pi / 3)
    assert Kinematics.from_json(kin.to_json_dict()) == kin
    with pytest.raises(ValueError, match="E_i"):
        Kinematics.from_json({"Z": 1, "theta_deg": 30})
    with pytest.raises(ValueError, match="energy"):
        Kinematics.from_json({"Z": 1, "E_i": 1.5, "theta_deg": 30, "energy": 2})
    with pytest.raises(ValueError, match="theta_deg"):
        Kinematics.from_json({"Z": 1, "E_i": 1.5, "theta_deg": "30"})


def test_normalization_box():
    box = NormalizationBox.from_epsilon(3.0, 0.01)
    assert box.T == pytest.approx(200.0)
    with pytest.raises(ValueError):
        NormalizationBox(0.0, 1.0)


def test_sinc_reproduces_rutherford_backward():
    assert cross_section_ratio(KIN_PI, builtin("sinc"), 1e-4) == pytest.approx(1.0, abs=1e-3)


def test_constructed_extrapolates_to_one(constructed_q3):
    kin = Kinematics.from_degrees(1, 1.5, 90)
    ladder = [0.02, 0.01, 0.005, 0.0025]
    vals = [cross_section_ratio(kin, constructed_q3, e) for e in ladder]
    assert richardson_limit(ladder, vals).real == pytest.approx(1.0, abs=1e-3)


@pytest.mark.parametrize("name", ["lorentzian", "gaussian"])
def test_failure_factor_predicted(name):
    kin = Kinematics.from_degrees(1, 1.5, 90)
    ladder = [0.01, 0.005, 0.0025, 0.00125]
    vals = [cross_section_ratio(kin, builtin(name), e) for e in ladder]
    # the regularized cross section carries pi * int|rho|^2 in place of 1
    assert richardson_limit(ladder, vals).real == pytest.approx(math.pi * SQNORM[name], abs=1e-4)


def test_lorentzian_half():
    kin = Kinematics.from_degrees(1, 1.5, 60)
    ladder = [0.01, 0.005, 0.0025, 0.00125]
    vals = [cross_section_ratio(kin, builtin("lorentzian"), e) for e in ladder]
    assert richardson_limit(ladder, vals).real == pytest.approx(0.5, abs=1e-2)


@pytest.mark.parametrize("theta", [4.0, 2.0])
def test_forward_growth(constructed_q3, theta):
    big = cross_section_regularized(Kinematics.from_degrees(1, 1.5, theta), constructed_q3, 1e-3)
    small = cross_section_regularized(Kinematics.from_degrees(1, 1.5, theta / 2), constructed_q3, 1e-3)
    assert small / big == pytest.approx(16.0, rel=0.02)


@pytest.mark.parametrize("name", ["sinc", "gaussian"])
def test_phase_space_consistency(name):
    kin = Kinematics.from_degrees(1, 1.5, 75)
    eps = 1e-3
    rho = builtin(name)
    lhs = phase_space_cross_section(kin, rho, eps, 2.0)
    rhs = cross_section_regularized(kin, rho, eps) * 2 / eps
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_volume_independence():
    kin = Kinematics.from_degrees(1, 1.5, 75)
    rho = builtin("gaussian")
    a = phase_space_cross_section(kin, rho, 1e-2, 1.0)
    b = phase_space_cross_section(kin, rho, 1e-2, 2.0)
    assert b == pytest.approx(a, rel=1e-12)


def test_charge_path_agrees_with_alpha_path():
    kin = Kinematics.from_degrees(2, 1.5, 75)
    rho = builtin("gaussian")
    E = np.linspace(1.4, 1.6, 9)
    e2 = 4 * math.pi * kin.alpha
    a = transition_probability(kin, rho, 0.05, 3.0, E)
    b = transition_probability(kin, rho, 0.05, 3.0, E, e2=e2)
    assert np.allclose(a, b, rtol=1e-14, atol=0)


def test_transition_probability_below_threshold():
    kin = Kinematics.from_degrees(1, 1.5, 75)
    assert transition_probability(kin, builtin("gaussian"), 0.5, 1.0, 0.9) == 0.0
    with pytest.raises(ValueError):
        transition_probability(kin, builtin("gaussian"), 0.5, 0.0, 1.5)
