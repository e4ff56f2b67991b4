"""Fourier transforms linking dampers and mollifiers.

Convention (fixed)::

    F f(p) = int exp(+i p x) f(x) dx
    f(x)   = (1 / 2 pi) int exp(-i x p) F(p) dp

Named damper/mollifier pairs are mapped analytically.  Everything else goes
through a trapezoid rule on a uniform grid (4096 intervals on [-64, 64] by
default) with the leading Euler-Maclaurin end correction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mollifier import (
    DecayClass,
    Damper,
    Mollifier,
    builtin,
    builtin_damper,
)
from .quadrature import IntegrandSpec, integrate_line, integrate_sine_squared

__all__ = [
    "TransformError",
    "DamperConditions",
    "fourier_transform",
    "inverse_fourier_transform",
    "inverse_fourier_quad",
    "damper_to_mollifier",
    "mollifier_to_damper",
    "damper_side_conditions",
    "damper_integral",
    "point_value_from_damper",
    "parseval_residual",
    "GRID_HALF_WIDTH",
    "GRID_INTERVALS",
]

GRID_HALF_WIDTH = 64.0
GRID_INTERVALS = 4096
_CHUNK = 256

_MOLLIFIER_OF = {"sharp_cutoff": "sinc", "exponential": "lorentzian", "gaussian_damper": "gaussian"}
_DAMPER_OF = {v: k for k, v in _MOLLIFIER_OF.items()}


class TransformError(ValueError):
    """Raised when a transform does not exist or has no numerical path."""


def _endpoint_derivatives(values, h):
    f = values
    right = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    left = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    return left, right


def _grid_transform(samples, grid, k, sign):
    """``int exp(sign i k x) f(x) dx`` for each k, from samples of f on ``grid``."""
    h = grid[1] - grid[0]
    a, b = grid[0], grid[-1]
    w = np.full(len(grid), h)
    w[0] = w[-1] = h / 2
    fa_d, fb_d = _endpoint_derivatives(samples, h)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(k.shape, dtype=complex)
    flat_k = k.ravel()
    flat_out = out.ravel()
    for start in range(0, len(flat_k), _CHUNK):
        kk = flat_k[start:start + _CHUNK]
        phase = np.exp(sign * 1j * np.outer(kk, grid))
        trap = phase @ (w * samples)
        # leading Euler-Maclaurin term: -h^2/12 (g'(b) - g'(a)), g = exp(i s k x) f
        gb = np.exp(sign * 1j * kk * b) * (sign * 1j * kk * samples[-1] + fb_d)
        ga = np.exp(sign * 1j * kk * a) * (sign * 1j * kk * samples[0] + fa_d)
        flat_out[start:start + _CHUNK] = trap - h * h / 12.0 * (gb - ga)
    return flat_out.reshape(k.shape)


def _grid(half_width, intervals):
    return np.linspace(-half_width, half_width, intervals + 1)


def fourier_transform(func, p, *, half_width=GRID_HALF_WIDTH, intervals=GRID_INTERVALS):
    """Numerical ``F f(p) = int exp(i p x) f(x) dx`` for a rapidly decaying ``f``."""
    grid = _grid(half_width, intervals)
    samples = np.asarray(func(grid), dtype=complex)
    out = _grid_transform(samples, grid, p, +1)
    return complex(out[0]) if np.ndim(p) == 0 else out


def inverse_fourier_transform(func, x, *, half_width=GRID_HALF_WIDTH, intervals=GRID_INTERVALS):
    """Numerical ``f(x) = (1/2 pi) int exp(-i x p) F(p) dp``."""
    grid = _grid(half_width, intervals)
    samples = np.asarray(func(grid), dtype=complex)
    out = _grid_transform(samples, grid, x, -1) / (2.0 * math.pi)
    return complex(out[0]) if np.ndim(x) == 0 else out


def inverse_fourier_quad(damper: Damper, x, tol: float = 1e-13) -> np.ndarray:
    """Pointwise ``(1/2 pi) int exp(-i x p) rho_hat(p) dp`` by adaptive quadrature.

    Slower than the grid transform but exact at the damper's kinks, so it
    serves as the independent check of the closed-form pairs.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if damper.kind == "sharp_cutoff":
        lower, upper = -1.0, 1.0
    elif damper.kind == "table":
        lower, upper = -damper.width, damper.width
    else:
        lower, upper = -math.inf, math.inf
    out = np.empty(x.shape, dtype=complex)
    if damper.kind in _MOLLIFIER_OF:
        # named dampers are real and even: (1/pi) int_0^upper rho_hat(p) cos(x p) dp
        pts = tuple(p for p in damper.points if 0.0 < p < upper)
        for i, xi in enumerate(x):
            spec = IntegrandSpec(lambda p, xi=xi: damper(p) * np.cos(xi * np.asarray(p)),
                                 points=pts, complex_valued=False)
            out[i] = integrate_line(spec, tol, lower=0.0, upper=upper).value / math.pi
        return out
    pts = tuple(p for p in damper.points if lower < p < upper)
    for i, xi in enumerate(x):
        spec = IntegrandSpec(lambda p, xi=xi: damper(p) * np.exp(-1j * xi * np.asarray(p)),
                             points=pts, complex_valued=True)
        out[i] = integrate_line(spec, tol, lower=lower, upper=upper).value / (2.0 * math.pi)
    return out


def _infer_tail(x, values):
    mags = np.abs(values)
    peak = mags.max()
    edge = np.maximum(mags[x >= 0.875 * x[-1]].max(), mags[x <= 0.875 * x[0]].max())
    if peak == 0 or edge <= 1e-13 * peak:
        return ("gaussian", 1.0), DecayClass.SCHWARTZ
    i32 = np.argmin(np.abs(x - x[-1] / 2))
    p = math.log(max(mags[i32], 1e-300) / max(mags[-1], 1e-300)) / math.log(2.0)
    return ("power", max(p, 0.0)), DecayClass.POWER_LAW


def damper_to_mollifier(damper: Damper, tol: float = 1e-8) -> Mollifier:
    """Inverse-transform a damper into its mollifier.

    Named dampers map to their closed forms.  Table dampers are transformed on
    the sample grid and returned as a table mollifier whose tail class comes
    from a fit of the computed samples.
    """
    if damper.kind in _MOLLIFIER_OF:
        return builtin(_MOLLIFIER_OF[damper.kind])
    vals = np.asarray(damper.values, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise TransformError("damper samples are not finite")
    pgrid = np.linspace(-damper.width, damper.width, len(vals))
    if abs(vals[0]) > tol or abs(vals[-1]) > tol:
        raise TransformError("damper does not decay inside its sample window; not integrable as tabulated")
    x = _grid(GRID_HALF_WIDTH, GRID_INTERVALS)
    rho = _grid_transform(vals.astype(complex), pgrid, x, -1) / (2.0 * math.pi)
    tail, decay = _infer_tail(x, rho)
    return Mollifier(kind="table", decay_class=decay, coeffs=tuple(rho), width=GRID_HALF_WIDTH,
                     tail=tail, name="from_damper")


def mollifier_to_damper(rho: Mollifier, tol: float = 1e-8) -> Damper:
    """Forward-transform a mollifier into its (real) damper.

    The imaginary part of a numerical transform is dropped and its largest
    magnitude kept in ``Damper.imag_residual``.
    """
    if rho.kind in _DAMPER_OF:
        return builtin_damper(_DAMPER_OF[rho.kind])
    if rho.decay_class is not DecayClass.SCHWARTZ:
        raise TransformError(
            f"no numerical transform for {rho.decay_class.value} mollifiers without a closed form")
    p = _grid(GRID_HALF_WIDTH, GRID_INTERVALS)
    values = fourier_transform(rho, p)
    if not np.all(np.isfinite(values)):
        raise TransformError("transform produced non-finite values")
    return Damper(kind="table", values=tuple(values.real), width=GRID_HALF_WIDTH,
                  imag_residual=float(np.max(np.abs(values.imag))))


def damper_integral(damper: Damper, tol: float = 1e-12) -> float:
    if damper.kind == "table":
        return float(damper._spline.integrate(-damper.width, damper.width))
    r = integrate_line(IntegrandSpec(damper, points=damper.points, complex_valued=False), tol)
    return r.real


@dataclass(frozen=True)
class DamperConditions:
    value_at_zero: float
    integral: float
    value_residual: float
    integral_residual: float
    tol: float

    @property
    def value_ok(self) -> bool:
        return self.value_residual <= self.tol

    @property
    def integral_ok(self) -> bool:
        return self.integral_residual <= self.tol

    @property
    def passed(self) -> bool:
        return self.value_ok and self.integral_ok

    def to_dict(self) -> dict:
        return {
            "value_at_zero": self.value_at_zero,
            "integral": self.integral,
            "value_residual": self.value_residual,
            "integral_residual": self.integral_residual,
            "value_ok": self.value_ok,
            "integral_ok": self.integral_ok,
        }


def damper_side_conditions(damper: Damper, tol: float = 1e-8) -> DamperConditions:
    """Check ``rho_hat(0) = 1`` and ``int rho_hat = 2`` (the latter is ``rho(0) = 1/pi``)."""
    v0 = float(damper(0.0))
    total = damper_integral(damper, tol=min(tol * 1e-3, 1e-12))
    return DamperConditions(v0, total, abs(v0 - 1.0), abs(total - 2.0), tol)


def point_value_from_damper(rho: Mollifier) -> float:
    """``rho(0) = (1 / 2 pi) int rho_hat(p) dp``."""
    return damper_integral(mollifier_to_damper(rho)) / (2.0 * math.pi)


def parseval_residual(rho: Mollifier, tol: float = 1e-12) -> float:
    """``|int |rho|^2 dx - (1/2 pi) int |rho_hat|^2 dp|``, transforms computed independently."""
    if rho.kind == "sinc":
        lhs = integrate_sine_squared(lambda z: np.full(np.shape(z), 1 / math.pi ** 2), 1.0, tol).real
    else:
        lhs = integrate_line(IntegrandSpec(lambda z: np.abs(rho(z)) ** 2, points=(0.0,),
                                           complex_valued=False), tol).real
    if rho.kind in _DAMPER_OF:
        damper = mollifier_to_damper(rho)
        rhs = integrate_line(IntegrandSpec(lambda p: damper(p) ** 2, points=damper.points,
                                           complex_valued=False), tol).real
    else:
        grid = _grid(GRID_HALF_WIDTH, GRID_INTERVALS)
        sq = np.abs(fourier_transform(rho, grid)) ** 2
        rhs = float(np.trapezoid(sq, grid))
    return abs(lhs - rhs / (2.0 * math.pi))
