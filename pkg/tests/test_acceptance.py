"""Acceptance criteria 1-9 at their stated tolerances and runtime limits.

Each check records a sub-result; the terminal summary prints one PASS/FAIL
line per criterion.  Checks that fail for a documented reason are marked
``xfail(strict=True)``: they print FAIL and the suite breaks if they ever
start passing.
"""

import math
import time

import numpy as np
import pytest

from acceptance_log import record
from delta_forge.conditions import Overall, check_physical, classify, infeasibility_witness
from delta_forge.construct import build_constraints, construct_mollifier, solve_mollifier
from delta_forge.mollifier import DecayClass, DeltaSequence, builtin, builtin_damper
from delta_forge.quadrature import IntegrandSpec, integrate_line
from delta_forge.scattering import Kinematics, cross_section_ratio
from delta_forge.sifting import (
    DEFAULT_LADDER,
    constant_test,
    convergence_study,
    gaussian_test,
    richardson_limit,
    sift,
    sift_squared,
)
from delta_forge.transforms import damper_to_mollifier, inverse_fourier_quad, parseval_residual

from oracles import INV_PI, INV_SQRT_PI, SQ_MOMENT_2, SQNORM, sinc_sift_gaussian

pytestmark = pytest.mark.acceptance


# 1

def test_criterion_1_sinc_normalization():
    t0 = time.perf_counter()
    r = integrate_line(IntegrandSpec(builtin("sinc"), oscillation_frequency=1.0,
                                     decay_class=DecayClass.CONDITIONAL, complex_valued=False), 1e-8)
    dt = time.perf_counter() - t0
    err = abs(r.value - 1.0)
    assert record(1, "int sin(z)/(pi z)", err <= 1e-8 and dt < 1.0,
                  f"|I - 1| = {err:.1e} (tol 1e-8), {dt:.2f} s (limit 1 s)")


# 2

def test_criterion_2_squared_sinc():
    t0 = time.perf_counter()
    rels = []
    for eps in (0.1, 0.01, 0.001):
        v = sift_squared(constant_test(), DeltaSequence(builtin("sinc"), eps), 1e-12).real
        rels.append(abs(v * math.pi * eps - 1.0))
    dt = time.perf_counter() - t0
    worst = max(rels)
    assert record(2, "int |rho_eps|^2 vs 1/(pi eps)", worst <= 1e-6 and dt < 5.0,
                  f"worst rel. error {worst:.1e} over eps in {{0.1, 0.01, 0.001}} (tol 1e-6), "
                  f"{dt:.2f} s (limit 5 s)")


# 3

def test_criterion_3_sinc_sifting():
    errs = [abs(sift(gaussian_test(), DeltaSequence(builtin("sinc"), e), 1e-11) - 1) for e in DEFAULT_LADDER]
    bound_ok = all(err <= 5 * math.sqrt(e) for err, e in zip(errs, DEFAULT_LADDER))
    shrinking = all(b <= a + 1e-14 for a, b in zip(errs, errs[1:]))  # allowance for rounding
    # independent closed form erf(1 / (2 eps)) pins the values themselves
    oracle = max(abs(err - (1 - sinc_sift_gaussian(e))) for err, e in zip(errs, DEFAULT_LADDER))
    ok = bound_ok and shrinking and errs[-1] < 1e-12 and oracle <= 1e-9
    assert record(3, "sinc, f = exp(-x^2)", ok,
                  f"|sift - 1| = {errs[0]:.1e} .. {errs[-1]:.1e} <= 5 sqrt(eps), non-increasing to rounding, "
                  f"oracle dev. {oracle:.1e}")


def test_criterion_3_gaussian_order():
    study = convergence_study(gaussian_test(), builtin("gaussian"))
    ok = abs(study.fitted_order - 2.0) <= 0.3
    assert record(3, "Gaussian mollifier order", ok, f"fitted order {study.fitted_order:.3f} (2 +- 0.3)")


# 4

GOLDEN_LADDER = (0.1, 0.03, 0.01, 0.003)


@pytest.fixture(scope="module")
def golden_limits(constructed_q3):
    rhos = {"sinc": builtin("sinc"), "gaussian": builtin("gaussian"),
            "lorentzian": builtin("lorentzian"), "constructed": constructed_q3}
    return {name: (rho, convergence_study(gaussian_test(), rho, GOLDEN_LADDER, quantity="golden"))
            for name, rho in rhos.items()}


@pytest.mark.parametrize("name", [
    "sinc",
    "constructed",
    pytest.param("gaussian", marks=pytest.mark.xfail(
        strict=True, reason="the limit is f(0) int|rho|^2 = 0.399, not rho(0) f(0) = 0.564")),
    pytest.param("lorentzian", marks=pytest.mark.xfail(
        strict=True, reason="the limit is f(0) int|rho|^2 = 1/(2 pi), not rho(0) f(0) = 1/pi")),
])
def test_criterion_4_limit_is_point_value(golden_limits, name):
    rho, study = golden_limits[name]
    target = rho(0.0).real  # f(0) = 1
    rel = abs(study.limit.real - target) / target
    assert record(4, f"{name} -> rho(0) f(0)", rel <= 1e-3,
                  f"limit {study.limit.real:.7f} vs rho(0) f(0) = {target:.7f}, rel. {rel:.1e} (tol 1e-3)")


@pytest.mark.parametrize("name", ["sinc", "constructed", "gaussian", "lorentzian"])
def test_criterion_4_limit_is_squared_norm(golden_limits, name):
    _, study = golden_limits[name]
    target = {"sinc": SQNORM["sinc"], "gaussian": SQNORM["gaussian"],
              "lorentzian": SQNORM["lorentzian"], "constructed": INV_PI}[name]
    rel = abs(study.limit.real - target) / target
    assert record(4, f"{name} -> f(0) int|rho|^2", rel <= 1e-3,
                  f"limit {study.limit.real:.7f} vs {target:.7f}, rel. {rel:.1e}")


def test_criterion_4_lorentzian_factor_half(scatter_runs):
    lim = scatter_runs["lorentzian_limit"]
    assert record(4, "Lorentzian factor 1/2 in the scattering pipeline", abs(lim - 0.5) <= 1e-2,
                  f"extrapolated ratio {lim:.6f}")


# 5

def test_criterion_5_counter_examples():
    lor = check_physical(builtin("lorentzian"))
    gau = check_physical(builtin("gaussian"))
    d_lor = abs(lor.squared_norm_residual - 1 / (2 * math.pi))
    d_gau = abs(gau.point_value_residual - abs(INV_SQRT_PI - INV_PI))
    ok = (not lor.physical_ok and not gau.physical_ok and d_lor <= 1e-8 and d_gau <= 1e-8)
    assert record(5, "check_physical", ok,
                  f"Lorentzian squared-norm residual off by {d_lor:.1e}, "
                  f"Gaussian point-value residual off by {d_gau:.1e} (tol 1e-8), both flagged")


# 6

def test_criterion_6_infeasibility(constructed_q1, constructed_q3):
    rhos = {"sinc": builtin("sinc"), "lorentzian": builtin("lorentzian"), "gaussian": builtin("gaussian"),
            "constructed q1 K6": constructed_q1, "constructed q3 K10": constructed_q3,
            "constructed q2 K8": construct_mollifier(2, 8), "constructed q5 K12": construct_mollifier(5, 12)}
    vals = {name: infeasibility_witness(rho, 2) for name, rho in rhos.items()}
    oracle_ok = all(abs(vals[n] - SQ_MOMENT_2[n]) <= 1e-10 for n in ("lorentzian", "gaussian"))
    low = min(vals.values())
    assert record(6, "int z^2 |rho|^2", low > 1e-6 and oracle_ok,
                  f"smallest {low:.3e} over {len(vals)} mollifiers (> 1e-6); sinc "
                  f"{'divergent' if math.isinf(vals['sinc']) else vals['sinc']}")


# 7

ANGLES = (30, 60, 90, 120, 180)
ENERGIES = (1.05, 1.5)
POINTS = [(th, e) for e in ENERGIES for th in ANGLES]
LOR_LADDER = (0.01, 0.005, 0.0025, 0.00125)


@pytest.fixture(scope="module")
def scatter_runs():
    t0 = time.perf_counter()
    sinc = {pt: cross_section_ratio(Kinematics.from_degrees(1, pt[1], pt[0]), builtin("sinc"), 1e-4)
            for pt in POINTS}
    kin = Kinematics.from_degrees(1, 1.5, 90)
    lor = [cross_section_ratio(kin, builtin("lorentzian"), e) for e in LOR_LADDER]
    dt = time.perf_counter() - t0
    return {"sinc": sinc, "lorentzian_limit": richardson_limit(LOR_LADDER, lor).real, "seconds": dt}


@pytest.mark.parametrize("theta, E_i", [
    pytest.param(th, e, marks=pytest.mark.xfail(
        strict=True, reason="first-order eps term of the sinc tail is 1.47e-3 here at eps = 1e-4"))
    if (th, e) == (30, 1.05) else (th, e)
    for th, e in POINTS])
def test_criterion_7_sinc_point(scatter_runs, theta, E_i):
    dev = abs(scatter_runs["sinc"][(theta, E_i)] - 1.0)
    assert record(7, f"sinc theta={theta} E_i={E_i}", dev <= 1e-3, f"|ratio - 1| = {dev:.2e} (tol 1e-3)")


def test_criterion_7_lorentzian_and_runtime(scatter_runs):
    lim, dt = scatter_runs["lorentzian_limit"], scatter_runs["seconds"]
    assert record(7, "Lorentzian extrapolation", abs(lim - 0.5) <= 1e-2, f"ratio {lim:.6f} (0.5 +- 1e-2)")
    assert record(7, "runtime", dt < 60.0, f"{dt:.1f} s (limit 60 s)")


# 8

def test_criterion_8_construction():
    t0 = time.perf_counter()
    rho = solve_mollifier(build_constraints(10, 3, math.sqrt(math.pi)), 1e-8)
    report = classify(rho, 3, 1e-8)
    full = report.overall is Overall.FULL and report.max_residual <= 1e-8
    kin = Kinematics.from_degrees(1, 1.5, 90)
    ladder = (0.02, 0.01, 0.005, 0.0025)
    ratio = richardson_limit(ladder, [cross_section_ratio(kin, rho, e) for e in ladder]).real
    order = convergence_study(gaussian_test(), rho).fitted_order
    dt = time.perf_counter() - t0
    record(8, "classify", full, f"{report.overall.value}, max residual {report.max_residual:.1e} (tol 1e-8)")
    record(8, "cross-section ratio", abs(ratio - 1) <= 1e-3, f"extrapolated {ratio:.7f} (1 +- 1e-3)")
    record(8, "sift order", order >= 3.5, f"fitted {order:.3f} (>= 3.5)")
    record(8, "runtime", dt < 120.0, f"{dt:.1f} s (limit 120 s)")
    assert full and abs(ratio - 1) <= 1e-3 and order >= 3.5 and dt < 120.0


# 9

CLOSED = {
    "sharp_cutoff": lambda x: np.sin(x) / (math.pi * x),
    "exponential": lambda x: 1 / (math.pi * (1 + x * x)),
    "gaussian_damper": lambda x: np.exp(-x * x) / math.sqrt(math.pi),
}


def test_criterion_9_duality():
    x = np.linspace(-10.05, 10.05, 100)  # avoids x = 0 in the sinc closed form
    worst = {}
    for name, closed in CLOSED.items():
        damper = builtin_damper(name)
        ref = closed(x)
        worst[name] = max(float(np.max(np.abs(inverse_fourier_quad(damper, x) - ref))),
                          float(np.max(np.abs(damper_to_mollifier(damper)(x) - ref))))
    parseval = {n: parseval_residual(builtin(n)) for n in ("sinc", "lorentzian", "gaussian")}
    ok = max(worst.values()) <= 1e-8 and max(parseval.values()) <= 1e-6
    assert record(9, "damper -> mollifier", ok,
                  "max pair error " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                  + f" (tol 1e-8); Parseval {max(parseval.values()):.1e} (tol 1e-6)")
