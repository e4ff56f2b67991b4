"""Moment, point-value and squared-norm conditions on mollifiers.

Two families of constraints are checked:

* the moment set: ``int rho = 1`` and ``int z**n rho = 0`` for ``n = 1..q``,
  together with rapid (Schwartz-class) decay;
* the physical set: ``rho(0) = 1/pi`` and ``int |rho|**2 = rho(0)``.

A divergent moment is a reported state (``inf``, serialised as
``"Divergent"``), never an exception.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .mollifier import INV_PI, DecayClass, Mollifier
from .quadrature import (
    IntegrandSpec,
    QuadratureResult,
    integrate_line,
    integrate_moment,
    integrate_sine_squared,
    tail_exponent,
)

__all__ = [
    "Overall",
    "ConditionReport",
    "DEFAULT_TOL",
    "MAX_Q_ORDER",
    "check_colombeau",
    "check_physical",
    "classify",
    "squared_norm",
    "squared_moment",
    "infeasibility_witness",
    "schwartz_tail_slope",
]

DEFAULT_TOL = 1e-8
MAX_Q_ORDER = 16
DIVERGENT = "Divergent"
# quadrature runs this far below the pass/fail tolerance
_QUAD_MARGIN = 1e-2
_TAIL_GRID = np.geomspace(8.0, 64.0, 33)


class Overall(str, Enum):
    COLOMBEAU_ONLY = "ColombeauOnly"
    PHYSICAL_ONLY = "PhysicalOnly"
    FULL = "Full"
    FAILS = "Fails"


def _jsonable(x):
    if isinstance(x, float) and math.isinf(x):
        return DIVERGENT if x > 0 else "-inf"
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Enum):
        return x.value
    return x


@dataclass(frozen=True)
class ConditionReport:
    """Residuals of every condition; fields left as ``None`` were not evaluated.

    ``overall`` is only meaningful on reports produced by :func:`classify`.
    """

    q_order: int
    tol: float
    normalization_residual: float | None = None
    vanishing_moment_residuals: tuple = ()
    point_value_residual: float | None = None
    squared_norm_residual: float | None = None
    squared_moment_values: tuple = ()
    schwartz_class_ok: bool | None = None
    overall: Overall | None = None
    point_value: float | None = None
    point_value_imag: float | None = None
    squared_norm: float | None = None
    tail_slope: float | None = None
    notes: tuple = field(default=())

    @property
    def colombeau_ok(self) -> bool:
        if self.normalization_residual is None:
            return False
        return (self.normalization_residual <= self.tol
                and all(r <= self.tol for r in self.vanishing_moment_residuals)
                and bool(self.schwartz_class_ok))

    @property
    def physical_ok(self) -> bool:
        if self.point_value_residual is None or self.squared_norm_residual is None:
            return False
        norm_ok = self.normalization_residual is None or self.normalization_residual <= self.tol
        return (norm_ok and self.point_value_residual <= self.tol
                and self.squared_norm_residual <= self.tol)

    @property
    def divergent_moments(self) -> tuple:
        return tuple(n for n, r in enumerate(self.vanishing_moment_residuals, 1) if math.isinf(r))

    @property
    def max_residual(self) -> float:
        vals = [self.normalization_residual, self.point_value_residual, self.squared_norm_residual]
        vals = [v for v in vals if v is not None] + list(self.vanishing_moment_residuals)
        return max(vals) if vals else 0.0

    def to_dict(self) -> dict:
        doc = {
            "normalization_residual": self.normalization_residual,
            "vanishing_moment_residuals": list(self.vanishing_moment_residuals),
            "point_value_residual": self.point_value_residual,
            "squared_norm_residual": self.squared_norm_residual,
            "squared_moment_values": list(self.squared_moment_values),
            "schwartz_class_ok": self.schwartz_class_ok,
            "overall": self.overall,
            "q_order": self.q_order,
            "tol": self.tol,
            "point_value": self.point_value,
            "point_value_imag": self.point_value_imag,
            "squared_norm": self.squared_norm,
            "tail_slope": self.tail_slope,
            "divergent_moments": list(self.divergent_moments),
            "notes": list(self.notes),
        }
        return {k: _jsonable(v) for k, v in doc.items()}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _check_q(q_order):
    if int(q_order) != q_order or not 1 <= q_order <= MAX_Q_ORDER:
        raise ValueError(f"q_order must be an integer in [1, {MAX_Q_ORDER}], got {q_order!r}")
    return int(q_order)


def _abs_or_inf(r: QuadratureResult, target=0.0) -> float:
    if r.divergent or not np.isfinite(r.value):
        return math.inf
    return float(abs(r.value - target))


def schwartz_tail_slope(rho: Mollifier) -> float:
    """Log-log slope of the running upper envelope of ``|rho|`` on ``z`` in [8, 64].

    Both sides are sampled and the slower one is kept.  The envelope (running
    maximum from the right) hides the zeros of oscillating tails.
    """
    slopes = []
    for sign in (1.0, -1.0):
        mags = np.abs(rho(sign * _TAIL_GRID))
        env = np.maximum.accumulate(mags[::-1])[::-1]
        keep = env > 1e-300
        if keep.sum() < 2:
            slopes.append(-math.inf)
            continue
        x, y = np.log(_TAIL_GRID[keep]), np.log(env[keep])
        if keep.sum() < len(_TAIL_GRID):
            # envelope hits zero: faster than any power on this window
            slopes.append(-math.inf)
            continue
        slopes.append(float(np.polyfit(x, y, 1)[0]))
    return max(slopes)


def check_colombeau(rho: Mollifier, q_order: int, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Normalization, vanishing moments ``n = 1..q_order`` and the Schwartz decay check."""
    q = _check_q(q_order)
    qtol = tol * _QUAD_MARGIN
    norm = _abs_or_inf(integrate_moment(rho, 0, qtol), 1.0)
    moments = []
    for n in range(1, q + 1):
        r = integrate_moment(rho, n, qtol)
        moments.append(_abs_or_inf(r))
    slope = schwartz_tail_slope(rho)
    schwartz = rho.decay_class is DecayClass.SCHWARTZ and slope <= -4.0
    notes = ["rapid decay of the mollifier is checked; compact support of its transform is not"]
    if any(math.isinf(m) for m in moments):
        notes.append("divergent moments count as failures of the moment set")
    return ConditionReport(q_order=q, tol=tol, normalization_residual=norm,
                           vanishing_moment_residuals=tuple(moments),
                           schwartz_class_ok=schwartz, tail_slope=slope, notes=tuple(notes))


def squared_norm(rho: Mollifier, tol: float = 1e-12) -> QuadratureResult:
    """``int |rho(z)|**2 dz``."""
    return _squared_moment_result(rho, 0, tol)


def _squared_moment_result(rho: Mollifier, n: int, tol: float) -> QuadratureResult:
    if rho.kind == "sinc":
        if n > 0:
            # |rho|**2 ~ 1/(pi z)**2, so z**n |rho|**2 is not absolutely integrable
            return QuadratureResult(math.inf, math.inf, False, 0, divergent=True)
        return integrate_sine_squared(lambda z: np.full(np.shape(z), INV_PI ** 2), 1.0, tol)
    if rho.decay_class is DecayClass.CONDITIONAL:
        raise ValueError("squared moments of conditionally integrable mollifiers need a known carrier")
    if rho.decay_class is DecayClass.POWER_LAW and 2.0 * tail_exponent(rho) - n <= 1.0 + 1e-3:
        return QuadratureResult(math.inf, math.inf, False, 0, divergent=True)

    def f(z):
        z = np.asarray(z, dtype=float)
        return z ** n * np.abs(rho(z)) ** 2

    return integrate_line(IntegrandSpec(f, points=(0.0,), complex_valued=False), tol)


def squared_moment(rho: Mollifier, n: int, tol: float = 1e-12) -> float:
    """``int z**n |rho(z)|**2 dz``; ``inf`` when it does not exist."""
    r = _squared_moment_result(rho, n, tol)
    return math.inf if r.divergent else float(r.value.real)


def check_physical(rho: Mollifier, tol: float = DEFAULT_TOL, q_order: int = 1) -> ConditionReport:
    """Point value ``rho(0) = 1/pi`` and squared norm ``int |rho|**2 = rho(0)``.

    ``q_order`` only sets how many squared moments are tabulated.
    """
    q = _check_q(q_order)
    qtol = tol * _QUAD_MARGIN
    v0 = complex(rho(0.0))
    sq = squared_norm(rho, qtol)
    sq_val = math.inf if sq.divergent else float(sq.value.real)
    sq_moments = tuple(squared_moment(rho, n, qtol) for n in range(1, q + 1))
    return ConditionReport(q_order=q, tol=tol,
                           point_value_residual=abs(v0 - INV_PI),
                           squared_norm_residual=abs(sq_val - v0) if math.isfinite(sq_val) else math.inf,
                           squared_moment_values=sq_moments,
                           point_value=v0.real, point_value_imag=v0.imag, squared_norm=sq_val)


def classify(rho: Mollifier, q_order: int, tol: float = DEFAULT_TOL) -> ConditionReport:
    """Run both condition sets and assign ``overall``."""
    col = check_colombeau(rho, q_order, tol)
    phys = check_physical(rho, tol, q_order)
    merged = ConditionReport(
        q_order=col.q_order, tol=tol,
        normalization_residual=col.normalization_residual,
        vanishing_moment_residuals=col.vanishing_moment_residuals,
        point_value_residual=phys.point_value_residual,
        squared_norm_residual=phys.squared_norm_residual,
        squared_moment_values=phys.squared_moment_values,
        schwartz_class_ok=col.schwartz_class_ok,
        point_value=phys.point_value, point_value_imag=phys.point_value_imag,
        squared_norm=phys.squared_norm, tail_slope=col.tail_slope, notes=col.notes,
    )
    if merged.colombeau_ok and merged.physical_ok:
        overall = Overall.FULL
    elif merged.colombeau_ok:
        overall = Overall.COLOMBEAU_ONLY
    elif merged.physical_ok:
        overall = Overall.PHYSICAL_ONLY
    else:
        overall = Overall.FAILS
    return replace(merged, overall=overall)


def infeasibility_witness(rho: Mollifier, n: int = 2, tol: float = 1e-6) -> float:
    """``int z**n |rho|**2`` for even ``n >= 2``; it is positive for any nonzero ``rho``.

    Raises
    ------
    ArithmeticError
        If the computed value is not above ``tol``: that is a quadrature
        failure, not a counter-example.
    """
    if n < 2 or n % 2:
        raise ValueError("the witness needs an even moment order n >= 2")
    value = squared_moment(rho, n, min(tol * 1e-3, 1e-12))
    if not value > tol:
        raise ArithmeticError(f"squared moment n={n} evaluated to {value!r} <= {tol}; quadrature failure")
    return value
