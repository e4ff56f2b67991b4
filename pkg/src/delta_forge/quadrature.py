"""Integration over the real line.

Two paths are provided.  Absolutely integrable integrands go through
adaptive Gauss-Kronrod (QUADPACK, via :func:`scipy.integrate.quad`) on a
compactified variable, ``x = s t / (1 - t**2)`` on ``(-1, 1)`` for the full
line.  Oscillatory, conditionally convergent integrands are split at the
zero crossings of the carrier, each lobe is integrated with Gauss-Legendre,
and the partial sums of the alternating lobe series are accelerated with
Euler's transformation (repeated averaging).

Integrand callables must accept numpy arrays.
"""

from __future__ import annotations

import contextlib
import contextvars
import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .mollifier import DecayClass, Mollifier

__all__ = [
    "QuadratureResult",
    "IntegrandSpec",
    "integrate_line",
    "integrate_moment",
    "integrate_sine_squared",
    "tail_exponent",
    "dump_lobes",
    "DEFAULT_TOL",
    "DEFAULT_OSC_TOL",
]

DEFAULT_TOL = 1e-10
DEFAULT_OSC_TOL = 1e-8
DIVERGENCE_RUN = 64
MAX_LOBES = 1 << 20
EULER_DEPTH = 24

_GL_HI = np.polynomial.legendre.leggauss(32)
_GL_LO = np.polynomial.legendre.leggauss(16)
_PROBES = np.array([0.37, -1.91, 2.63, -4.4, 5.3, 0.0123, -0.77])

_lobe_sink: contextvars.ContextVar = contextvars.ContextVar("lobe_sink", default=None)


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error_estimate: float
    converged: bool
    evaluations: int
    divergent: bool = False

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.converged and other.converged,
            self.evaluations + other.evaluations,
            self.divergent or other.divergent,
        )

    def __neg__(self) -> "QuadratureResult":
        return QuadratureResult(-self.value, self.error_estimate, self.converged,
                                self.evaluations, self.divergent)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor) -> "QuadratureResult":
        return QuadratureResult(self.value * factor, self.error_estimate * abs(factor),
                                self.converged, self.evaluations, self.divergent)

    @property
    def real(self) -> float:
        return float(np.real(self.value))


def _divergent(evaluations=0) -> QuadratureResult:
    return QuadratureResult(complex(math.nan, math.nan), math.inf, False, evaluations, True)


@dataclass(frozen=True)
class IntegrandSpec:
    """What the integrator needs to know about an integrand.

    ``oscillation_frequency`` is the carrier frequency ``omega``; the
    carrier's zero crossings sit at ``(k pi + phase) / omega``.  ``scale``
    is the characteristic width used by the compactification map and
    ``points`` lists abscissae where the integrand is not smooth.
    """

    func: object
    oscillation_frequency: float | None = None
    decay_class: DecayClass = DecayClass.SCHWARTZ
    phase: float = 0.0
    scale: float = 1.0
    points: tuple = field(default_factory=tuple)
    complex_valued: bool | None = None

    def __post_init__(self):
        w = self.oscillation_frequency
        if w is not None and not (w > 0 and math.isfinite(w)):
            raise ValueError("oscillation_frequency must be positive and finite")
        if self.decay_class is DecayClass.CONDITIONAL and w is None:
            raise ValueError("conditionally integrable integrands need an oscillation_frequency")
        if not self.scale > 0:
            raise ValueError("scale must be positive")


class _Counted:
    """Wraps an integrand, counts evaluations and rejects non-finite output."""

    def __init__(self, func):
        self.func = func
        self.count = 0

    def __call__(self, x):
        y = np.asarray(self.func(x))
        self.count += y.size
        if not np.all(np.isfinite(y)):
            raise ValueError("integrand returned non-finite values")
        return y


def _is_complex(g, lower, upper, override):
    if override is not None:
        return bool(override)
    probes = _PROBES
    if math.isfinite(lower) and math.isfinite(upper):
        probes = lower + (upper - lower) * (0.5 + 0.45 * np.tanh(_PROBES))
    elif math.isfinite(lower):
        probes = lower + np.abs(_PROBES)
    elif math.isfinite(upper):
        probes = upper - np.abs(_PROBES)
    return bool(np.any(np.imag(g(probes)) != 0))


def _quad_component(h, a, b, points, tol, rel_tol, limit):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(h, a, b, epsabs=tol, epsrel=rel_tol, limit=limit,
                             points=points or None, full_output=1)
    value, err, info = out[0], out[1], out[2]
    ok = len(out) == 3
    return value, err, ok


def _adaptive(g, lower, upper, *, scale=1.0, points=(), tol=DEFAULT_TOL, rel_tol=0.0,
              limit=400, complex_valued=None):
    """Adaptive quadrature of a vectorized ``g`` over ``[lower, upper]``."""
    s = float(scale)
    if math.isinf(lower) and math.isinf(upper):
        def phi(t):
            return s * t / (1.0 - t * t)

        def dphi(t):
            return s * (1.0 + t * t) / (1.0 - t * t) ** 2

        def inv(x):
            return 0.0 if x == 0 else (-s + math.sqrt(s * s + 4 * x * x)) / (2 * x)
        a, b = -1.0, 1.0
    elif math.isinf(upper):
        def phi(u):
            return lower + s * u / (1.0 - u)

        def dphi(u):
            return s / (1.0 - u) ** 2

        def inv(x):
            return (x - lower) / (s + x - lower)
        a, b = 0.0, 1.0
    elif math.isinf(lower):
        def phi(u):
            return upper - s * u / (1.0 - u)

        def dphi(u):
            return s / (1.0 - u) ** 2

        def inv(x):
            return (upper - x) / (s + upper - x)
        a, b = 0.0, 1.0
    else:
        def phi(t):
            return t

        def dphi(t):
            return 1.0

        def inv(x):
            return x
        a, b = float(lower), float(upper)

    mapped = sorted({inv(p) for p in points if lower < p < upper})
    mapped = tuple(t for t in mapped if a < t < b)
    counted = g if isinstance(g, _Counted) else _Counted(g)
    start = counted.count
    is_complex = _is_complex(counted, lower, upper, complex_valued)

    def h(t):
        return complex(counted(np.array([phi(t)]))[0]) * dphi(t)

    parts = [lambda t: h(t).real]
    if is_complex:
        parts.append(lambda t: h(t).imag)
    values, errs, oks = [], [], []
    for part in parts:
        v, e, ok = _quad_component(part, a, b, mapped, tol / len(parts), rel_tol, limit)
        values.append(v)
        errs.append(e)
        oks.append(ok)
    value = complex(values[0], values[1] if is_complex else 0.0)
    err = float(sum(errs))
    allowed = max(tol, rel_tol * abs(value))
    return QuadratureResult(value, err, all(oks) and err <= allowed, counted.count - start)


def _euler_sum(partial):
    """Euler-accelerated limit of an alternating series from its partial sums."""
    m = min(EULER_DEPTH, len(partial) - 1)
    if m < 1:
        return partial[-1], math.inf
    row = np.asarray(partial[-(m + 1):], dtype=complex)
    for _ in range(m - 1):
        row = 0.5 * (row[:-1] + row[1:])
    est = 0.5 * (row[0] + row[1])
    return complex(est), float(abs(row[1] - row[0]) / 2)


def _nondecreasing_run(mags):
    """Length of the longest run of consecutive lobes whose magnitude fails to decrease."""
    if len(mags) < 2:
        return 0
    ok = (mags[1:] >= mags[:-1] * (1.0 - 1e-10)) & (mags[:-1] > 1e-300)
    best = run = 0
    for flag in ok:
        run = run + 1 if flag else 0
        best = max(best, run)
    return best


def _gl_lobes(g, a, b):
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    x_hi, w_hi = _GL_HI
    x_lo, w_lo = _GL_LO
    f_hi = g((mid + half * x_hi).ravel()).reshape(len(a), -1)
    f_lo = g((mid + half * x_lo).ravel()).reshape(len(a), -1)
    hi = (f_hi @ w_hi) * half[:, 0]
    lo = (f_lo @ w_lo) * half[:, 0]
    return hi.astype(complex), np.abs(hi - lo)


def _lobe_tail(g, omega, phase, start, tol, points, side, max_lobes):
    """Integral of ``g`` over ``[start, inf)`` by accelerated lobe summation."""
    period = math.pi / omega
    k0 = math.floor((start * omega - phase) / math.pi) + 1
    first = (k0 * math.pi + phase) / omega
    if first - start < 1e-12 * period:
        first += period
        k0 += 1
    pts = sorted(p for p in points if p > start)
    last_point = pts[-1] if pts else start

    counted = g if isinstance(g, _Counted) else _Counted(g)
    evals0 = counted.count
    head = _adaptive(counted, start, first, points=tuple(p for p in pts if p < first),
                     tol=tol / 4, complex_valued=True)
    lobes = [head.value]
    lobe_err = [head.error_estimate]
    quad_ok = head.converged
    n = 0
    chunk = 64
    previous = None
    sink = _lobe_sink.get()
    while True:
        idx = np.arange(n, n + chunk, dtype=float)
        a = first + idx * period
        b = a + period
        vals, errs = _gl_lobes(counted, a, b)
        for p in pts:
            if a[0] <= p < b[-1]:
                j = int((p - first) // period) - n
                r = _adaptive(counted, a[j], b[j], points=(p,), tol=tol / 16, complex_valued=True)
                vals[j], errs[j] = r.value, r.error_estimate
                quad_ok = quad_ok and r.converged
        lobes.extend(vals.tolist())
        lobe_err.extend(errs.tolist())
        n += chunk
        if sink is not None:
            partial = np.cumsum(lobes)
            start_row = len(lobes) - chunk
            for j in range(start_row, len(lobes)):
                lo_edge = start if j == 0 else first + (j - 1) * period
                sink.append((side, j, lo_edge, first + j * period, lobes[j].real, lobes[j].imag,
                             partial[j].real, partial[j].imag))

        mags = np.abs(np.asarray(lobes[1:]))
        if _nondecreasing_run(mags) >= DIVERGENCE_RUN:
            return _divergent(counted.count - evals0)

        partial = np.cumsum(lobes)
        est, accel_err = _euler_sum(partial)
        qerr = float(np.sum(lobe_err))
        drift = math.inf if previous is None else abs(est - previous)
        done = (first + n * period > last_point and accel_err + qerr <= tol and drift <= tol)
        if done:
            return QuadratureResult(est, accel_err + qerr + drift, quad_ok,
                                    counted.count - evals0)
        if n >= max_lobes:
            return QuadratureResult(est, accel_err + qerr + drift, False, counted.count - evals0)
        previous = est
        chunk = min(n, max_lobes - n)


def _oscillatory(spec, lower, upper, tol, max_lobes):
    omega = spec.oscillation_frequency
    g = _Counted(spec.func)
    phase = spec.phase
    points = tuple(spec.points)

    def mirrored(y):
        return g(-np.asarray(y))

    if math.isfinite(lower) and math.isfinite(upper):
        r = _adaptive(g, lower, upper, points=points, tol=tol, limit=2000,
                      complex_valued=spec.complex_valued)
        return r
    if math.isinf(lower) and math.isinf(upper):
        right = _lobe_tail(g, omega, phase, 0.0, tol / 2, points, "right", max_lobes)
        if right.divergent:
            return right
        left = _lobe_tail(mirrored, omega, -phase, 0.0, tol / 2, tuple(-p for p in points),
                          "left", max_lobes)
        return right + left
    if math.isinf(upper):
        return _lobe_tail(g, omega, phase, float(lower), tol, points, "right", max_lobes)
    return _lobe_tail(mirrored, omega, -phase, -float(upper), tol, tuple(-p for p in points),
                      "left", max_lobes)


def integrate_line(spec: IntegrandSpec, tol: float | None = None, *, lower: float = -math.inf,
                   upper: float = math.inf, rel_tol: float = 0.0,
                   max_lobes: int = MAX_LOBES) -> QuadratureResult:
    """Integrate ``spec.func`` over ``[lower, upper]`` (default: the real line).

    Without an oscillation frequency the integrand must be absolutely
    integrable and adaptive quadrature on a compactified variable is used.
    With one, at least one bound must be infinite and the lobe-summation path
    is used; ``divergent=True`` flags a series whose lobes stopped decreasing.
    """
    if tol is None:
        tol = DEFAULT_TOL if spec.oscillation_frequency is None else DEFAULT_OSC_TOL
    if not tol > 0:
        raise ValueError("tol must be positive")
    if spec.oscillation_frequency is None:
        return _adaptive(spec.func, lower, upper, scale=spec.scale, points=spec.points,
                         tol=tol, rel_tol=rel_tol, complex_valued=spec.complex_valued)
    return _oscillatory(spec, lower, upper, tol, max_lobes)


def integrate_sine_squared(envelope, omega: float, tol: float = DEFAULT_TOL, *,
                           points=(), scale: float = 1.0, core_lobes: int = 8) -> QuadratureResult:
    """``int envelope(x) sin(omega x)**2 / x**2 dx`` over the real line.

    The squared carrier is positive, so lobe summation does not accelerate
    it.  Outside a core ``|x| < A`` the identity ``sin**2 = (1 - cos(2wx))/2``
    splits the tail into an absolutely integrable part and an alternating
    part handled by lobe summation.
    """
    A = core_lobes * math.pi / omega
    env = _Counted(envelope)

    def core(x):
        s = np.sinc(omega * np.asarray(x) / math.pi)
        return env(x) * (omega * omega) * s * s

    def smooth(x):
        x = np.asarray(x)
        return env(x) / (2.0 * x * x)

    def oscill(x):
        x = np.asarray(x)
        return env(x) * np.cos(2.0 * omega * x) / (2.0 * x * x)

    pts = tuple(points)
    inner = _adaptive(core, -A, A, points=tuple(p for p in pts if -A < p < A), tol=tol / 4,
                      limit=1000)
    width = max(A, scale)
    outer = (_adaptive(smooth, A, math.inf, scale=width, points=pts, tol=tol / 8)
             + _adaptive(smooth, -math.inf, -A, scale=width, points=pts, tol=tol / 8))
    wave = IntegrandSpec(oscill, oscillation_frequency=2.0 * omega, phase=math.pi / 2,
                         decay_class=DecayClass.CONDITIONAL, points=pts)
    osc = (integrate_line(wave, tol / 8, lower=A) + integrate_line(wave, tol / 8, upper=-A))
    total = inner + outer - osc
    return QuadratureResult(total.value, total.error_estimate,
                            total.converged and total.error_estimate <= tol,
                            env.count, total.divergent)


def tail_exponent(rho: Mollifier, z: float = 1e4) -> float:
    """Measured power-law decay exponent ``p`` in ``|rho(z)| ~ |z|**-p``."""
    probes = np.array([z, 2 * z, -z, -2 * z])
    mags = np.abs(rho(probes))
    if np.any(mags == 0):
        return math.inf
    return float(min(math.log(mags[0] / mags[1]), math.log(mags[2] / mags[3])) / math.log(2.0))


def integrate_moment(rho: Mollifier, n: int, tol: float | None = None) -> QuadratureResult:
    """``int z**n rho(z) dz``; ``divergent`` is set when the moment does not exist."""
    if n < 0 or int(n) != n:
        raise ValueError("moment order must be a non-negative integer")
    n = int(n)

    def f(z):
        z = np.asarray(z, dtype=float)
        return z ** n * rho(z)

    if rho.decay_class is DecayClass.CONDITIONAL:
        if rho.kind != "sinc":
            raise ValueError("oscillatory moments need a known carrier; only the sinc family has one")
        spec = IntegrandSpec(f, oscillation_frequency=1.0, decay_class=DecayClass.CONDITIONAL,
                             complex_valued=not rho.is_real)
        return integrate_line(spec, tol if tol is not None else DEFAULT_OSC_TOL)
    if rho.decay_class is DecayClass.POWER_LAW:
        # z**n rho(z) ~ z**(n - p): absolutely integrable only for p - n > 1
        if tail_exponent(rho) - n <= 1.0 + 1e-3:
            return _divergent()
    spec = IntegrandSpec(f, points=(0.0,), complex_valued=not rho.is_real)
    return integrate_line(spec, tol if tol is not None else DEFAULT_TOL)


@contextlib.contextmanager
def dump_lobes(path):
    """Collect lobe partial sums from every lobe summation in the block and write them as CSV."""
    rows: list = []
    token = _lobe_sink.set(rows)
    try:
        yield rows
    finally:
        _lobe_sink.reset(token)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["side", "lobe", "a", "b", "lobe_re", "lobe_im", "partial_re", "partial_im"])
            w.writerows(rows)
