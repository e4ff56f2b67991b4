"""Sifting with delta sequences, the squared rule, and convergence studies.

Integrals against ``rho_eps(x) = rho(x/eps)/eps`` are computed in the
scaled variable ``z = x/eps``::

    sift(f)         = int f(eps z) rho(z) dz
    sift_squared(f) = (1/eps) int f(eps z) |rho(z)|**2 dz

so that the mollifier always lives on its natural unit scale.  A direct
``x``-space path is kept for cross-checking the change of variables.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .mollifier import INV_PI, DecayClass, DeltaSequence, Mollifier
from .quadrature import IntegrandSpec, QuadratureResult, integrate_line, integrate_sine_squared

__all__ = [
    "GrowthClass",
    "TestFunction",
    "ConvergenceStudy",
    "DEFAULT_LADDER",
    "NOISE_FLOOR",
    "corpus",
    "sift",
    "sift_x",
    "sift_squared",
    "golden_rule_gap",
    "golden_rule_difference",
    "convergence_study",
    "fit_order",
    "richardson_limit",
]

DEFAULT_LADDER = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)
DEFAULT_TOL = 1e-12
# residuals this small are indistinguishable from rounding in the integrals
NOISE_FLOOR = 1e-14
SATURATED = "saturated"


class GrowthClass(str, Enum):
    COMPACT_SUPPORT = "CompactSupport"
    BOUNDED_SMOOTH = "BoundedSmooth"
    POLYNOMIAL_GROWTH = "PolynomialGrowth"


@dataclass(frozen=True)
class TestFunction:
    """A test function with its value and slope at the origin.

    Parameters
    ----------
    func : callable
        Vectorised ``f(x)``.
    value_at_zero, derivative_at_zero : float
        ``f(0)`` and ``f'(0)``; checked against a centred 5-point difference.
    growth_class : GrowthClass
    name : str
    scale : float
        Width over which ``f`` varies; guides the quadrature maps.
    points : tuple of float
        Abscissae where ``f`` is not smooth.
    """

    __test__ = False  # not a pytest class

    func: Callable
    value_at_zero: float
    derivative_at_zero: float
    growth_class: GrowthClass = GrowthClass.BOUNDED_SMOOTH
    name: str = ""
    scale: float = 1.0
    points: tuple = ()

    def __post_init__(self):
        def at(x):
            return complex(np.asarray(self.func(np.array([x]))).ravel()[0])

        h = 1e-4 * self.scale
        slope = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h)
        if abs(at(0.0) - self.value_at_zero) > 1e-6:
            raise ValueError(f"{self.name or 'test function'}: f(0) does not match the handle")
        if abs(slope - self.derivative_at_zero) > 1e-6:
            raise ValueError(f"{self.name or 'test function'}: f'(0) does not match the handle")

    def __call__(self, x):
        return self.func(x)


def _gauss(x):
    return np.exp(-np.square(x))


def _shifted_gauss(x):
    return np.exp(-np.square(np.asarray(x) - 1.0))


def _lorentz(x):
    return 1.0 / (1.0 + np.square(x))


def _cos_gauss(x):
    x = np.asarray(x)
    return np.cos(x) * np.exp(-x * x / 4.0)


def _one(x):
    return np.ones(np.shape(x))


def gaussian_test() -> TestFunction:
    return TestFunction(_gauss, 1.0, 0.0, GrowthClass.BOUNDED_SMOOTH, "exp(-x^2)")


def lorentz_test() -> TestFunction:
    return TestFunction(_lorentz, 1.0, 0.0, GrowthClass.BOUNDED_SMOOTH, "1/(1+x^2)")


def cos_gauss_test() -> TestFunction:
    return TestFunction(_cos_gauss, 1.0, 0.0, GrowthClass.BOUNDED_SMOOTH, "cos(x)exp(-x^2/4)", scale=2.0)


def shifted_gauss_test() -> TestFunction:
    e = math.exp(-1.0)
    return TestFunction(_shifted_gauss, e, 2.0 * e, GrowthClass.BOUNDED_SMOOTH, "exp(-(x-1)^2)")


def constant_test() -> TestFunction:
    return TestFunction(_one, 1.0, 0.0, GrowthClass.BOUNDED_SMOOTH, "1")


def corpus(include_rutherford: bool = True) -> dict:
    """The fixed test-function corpus, keyed by name."""
    fs = [gaussian_test(), lorentz_test(), cos_gauss_test()]
    if include_rutherford:
        from .scattering import Kinematics, rutherford_test_function
        fs.append(rutherford_test_function(Kinematics(Z=1, E_i=1.5, theta=math.pi / 2)))
    return {f.name: f for f in fs}


# sifting integrals

def _points_z(f: TestFunction, eps: float):
    return tuple(sorted({0.0, *(p / eps for p in f.points)}))


def _sift_result(f: TestFunction, seq: DeltaSequence, tol: float) -> QuadratureResult:
    rho, eps = seq.mollifier, seq.epsilon
    if rho.decay_class is DecayClass.CONDITIONAL:
        if rho.kind != "sinc":
            raise ValueError("oscillatory sifting is only available for the sinc family")
        # f(eps z) sin(z) / (pi z); the lobe path needs the carrier frequency only
        spec = IntegrandSpec(lambda z: f(eps * np.asarray(z)) * rho(z), oscillation_frequency=1.0,
                             decay_class=DecayClass.CONDITIONAL, points=_points_z(f, eps),
                             scale=f.scale / eps)
        return integrate_line(spec, tol)
    spec = IntegrandSpec(lambda z: f(eps * np.asarray(z)) * rho(z), points=_points_z(f, eps))
    return integrate_line(spec, tol)


def sift(f: TestFunction, seq: DeltaSequence, tol: float = DEFAULT_TOL, *,
         full_output: bool = False):
    """``int f(x) rho_eps(x) dx``, evaluated as ``int f(eps z) rho(z) dz``."""
    r = _sift_result(f, seq, tol)
    return r if full_output else complex(r.value)


def sift_x(f: TestFunction, seq: DeltaSequence, tol: float = DEFAULT_TOL, *,
           full_output: bool = False):
    """``int f(x) rho_eps(x) dx`` evaluated directly in ``x``."""
    rho, eps = seq.mollifier, seq.epsilon
    points = tuple(sorted({0.0, *f.points}))
    if rho.decay_class is DecayClass.CONDITIONAL:
        if rho.kind != "sinc":
            raise ValueError("oscillatory sifting is only available for the sinc family")
        spec = IntegrandSpec(lambda x: f(x) * seq(x), oscillation_frequency=1.0 / eps,
                             decay_class=DecayClass.CONDITIONAL, points=points, scale=f.scale)
    else:
        spec = IntegrandSpec(lambda x: f(x) * seq(x), points=points, scale=eps)
    r = integrate_line(spec, tol)
    return r if full_output else complex(r.value)


def _sift_squared_result(f: TestFunction, seq: DeltaSequence, tol: float) -> QuadratureResult:
    rho, eps = seq.mollifier, seq.epsilon
    if rho.kind == "sinc":
        # |rho|^2 = sin(z)^2 / (pi z)^2
        r = integrate_sine_squared(lambda z: f(eps * np.asarray(z)) * INV_PI ** 2, 1.0, tol * eps,
                                   points=tuple(p / eps for p in f.points),
                                   scale=f.scale / eps)
    elif rho.decay_class is DecayClass.CONDITIONAL:
        raise ValueError("squared sifting needs a known carrier for conditionally integrable mollifiers")
    else:
        spec = IntegrandSpec(lambda z: f(eps * np.asarray(z)) * np.abs(rho(z)) ** 2,
                             points=_points_z(f, eps))
        r = integrate_line(spec, tol * eps)
    return r.scaled(1.0 / eps)


def sift_squared(f: TestFunction, seq: DeltaSequence, tol: float = DEFAULT_TOL, *,
                 full_output: bool = False):
    """``int f(x) |rho_eps(x)|**2 dx = (1/eps) int f(eps z) |rho(z)|**2 dz``.

    ``tol`` applies to the scaled quantity ``eps * sift_squared``.
    """
    r = _sift_squared_result(f, seq, tol)
    return r if full_output else complex(r.value)


def golden_rule_difference(f: TestFunction, rho: Mollifier, eps: float,
                           tol: float = DEFAULT_TOL) -> complex:
    """``eps * (int f |rho_eps|**2 - rho_eps(0) int f rho_eps)``, signed."""
    seq = DeltaSequence(rho, eps)
    s2 = sift_squared(f, seq, tol)
    s1 = sift(f, seq, tol)
    return eps * s2 - complex(rho(0.0)) * s1


def golden_rule_gap(f: TestFunction, rho: Mollifier, eps: float, tol: float = DEFAULT_TOL) -> float:
    """``eps * |int f |rho_eps|**2 - rho_eps(0) int f rho_eps|``.

    For a mollifier with ``int |rho|**2 = rho(0)`` and vanishing first
    moment this is ``eps |f'(0) int z |rho|**2 dz| + O(eps**2)``.
    """
    return abs(golden_rule_difference(f, rho, eps, tol))


# extrapolation and order fits

def richardson_limit(eps, values, degree: int = 2) -> complex:
    """Least-squares fit of ``v = L + a eps + b eps**2 (+...)``; returns ``L``.

    The degree drops when there are too few rungs.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=complex)
    deg = min(degree, len(eps) - 1)
    if deg < 0:
        raise ValueError("need at least one rung")
    V = np.vander(eps, deg + 1, increasing=True)
    coef_re = np.linalg.lstsq(V, values.real, rcond=None)[0]
    coef_im = np.linalg.lstsq(V, values.imag, rcond=None)[0]
    return complex(coef_re[0], coef_im[0])


def fit_order(eps, residuals, err_estimates=None, floor: float = NOISE_FLOOR):
    """Slope of ``log residual`` against ``log eps``.

    Rungs whose residual is within 10x of ``max(err_estimate, floor)`` are
    discarded.  Returns ``"saturated"`` when fewer than two rungs remain.
    """
    eps = np.asarray(eps, dtype=float)
    res = np.abs(np.asarray(residuals, dtype=complex))
    errs = np.zeros_like(eps) if err_estimates is None else np.asarray(err_estimates, dtype=float)
    keep = res > 10.0 * np.maximum(errs, floor)
    if keep.sum() < 2:
        return SATURATED
    return float(np.polyfit(np.log(eps[keep]), np.log(res[keep]), 1)[0])


@dataclass(frozen=True)
class ConvergenceStudy:
    """Per-rung values of a sifting quantity and its fitted convergence order."""

    epsilon_ladder: tuple
    values: tuple
    err_estimates: tuple
    target: complex
    fitted_order: float | str
    limit: complex
    quantity: str = "sift"
    test_function: str = ""
    mollifier: str = ""
    notes: tuple = field(default=())

    def __post_init__(self):
        ladder = np.asarray(self.epsilon_ladder, dtype=float)
        if len(ladder) < 4:
            raise ValueError("a convergence study needs at least 4 rungs")
        if np.any(ladder <= 0) or np.any(np.diff(ladder) >= 0):
            raise ValueError("epsilon ladder must be positive and strictly decreasing")

    @property
    def residuals(self) -> tuple:
        return tuple(abs(v - self.target) for v in self.values)

    @property
    def saturated(self) -> bool:
        return self.fitted_order == SATURATED

    def rows(self):
        for e, v, r, err in zip(self.epsilon_ladder, self.values, self.residuals, self.err_estimates):
            yield [repr(float(e)), repr(v.real), repr(v.imag), repr(float(r)), repr(float(err))]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "value_re", "value_im", "residual", "err_estimate"])
        w.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "test_function": self.test_function,
            "mollifier": self.mollifier,
            "epsilon_ladder": list(self.epsilon_ladder),
            "target": [self.target.real, self.target.imag],
            "limit": [self.limit.real, self.limit.imag],
            "limit_residual": abs(self.limit - self.target),
            "fitted_order": self.fitted_order,
            "notes": list(self.notes),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


_QUANTITIES = ("sift", "golden")


def convergence_study(f: TestFunction, rho: Mollifier, ladder=DEFAULT_LADDER, *,
                      tol: float = DEFAULT_TOL, quantity: str = "sift",
                      workers: int = 1) -> ConvergenceStudy:
    """Evaluate a sifting quantity on an epsilon ladder and fit its order.

    ``quantity="sift"`` targets ``f(0)``; ``quantity="golden"`` studies
    ``eps * sift_squared`` against ``rho(0) f(0)``.
    """
    if quantity not in _QUANTITIES:
        raise ValueError(f"quantity must be one of {_QUANTITIES}")
    ladder = tuple(float(e) for e in ladder)

    def rung(eps):
        seq = DeltaSequence(rho, eps)
        if quantity == "sift":
            return _sift_result(f, seq, tol)
        return _sift_squared_result(f, seq, tol).scaled(eps)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(rung, ladder))
    else:
        results = [rung(e) for e in ladder]
    values = tuple(complex(r.value) for r in results)
    errs = tuple(float(r.error_estimate) for r in results)
    if quantity == "sift":
        target = complex(f.value_at_zero)
    else:
        target = complex(rho(0.0)) * f.value_at_zero
    residuals = [abs(v - target) for v in values]
    order = fit_order(ladder, residuals, errs)
    notes = []
    if f.growth_class is GrowthClass.POLYNOMIAL_GROWTH and rho.kind == "sinc":
        notes.append("polynomially growing test function with the sinc family: outside the proven regime")
    return ConvergenceStudy(ladder, values, errs, target, order, richardson_limit(ladder, values),
                            quantity, f.name, rho.name or rho.kind, tuple(notes))
