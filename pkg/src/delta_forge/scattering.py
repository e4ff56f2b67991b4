"""Coulomb scattering with a regularized energy delta.

Natural units with the particle mass ``m = 1`` by default; energies are
multiples of ``m``.  The finite-``eps`` cross section is

    dSigma/dOmega = 8 pi Z^2 alpha^2 / T * int R(E_f) |rho_eps(E_f - E_i)|^2 dE_f

with ``T = 2/eps`` and the Rutherford integrand

    R(E_f) = (p_f / p_i) / (p_f^2 + p_i^2 - 2 p_f p_i cos(theta))^2.

Below threshold (``E_f < m``) ``R`` is set to zero.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .mollifier import INV_PI, DeltaSequence, Mollifier
from .quadrature import IntegrandSpec, QuadratureResult, integrate_line, integrate_sine_squared
from .sifting import GrowthClass, TestFunction, sift_squared

__all__ = [
    "ALPHA",
    "Kinematics",
    "NormalizationBox",
    "plane_wave_norm",
    "coulomb_form_factor",
    "screened_form_factor_radial",
    "momentum_transfer_sq",
    "rutherford_integrand",
    "rutherford_test_function",
    "rutherford_closed_form",
    "cross_section_regularized",
    "cross_section_ratio",
    "transition_probability",
    "phase_space_cross_section",
]

ALPHA = 1.0 / 137.0


@dataclass(frozen=True)
class Kinematics:
    """Elastic kinematics; ``theta`` in radians."""

    Z: float
    E_i: float
    theta: float
    alpha: float = ALPHA
    m: float = 1.0

    def __post_init__(self):
        for key in ("Z", "E_i", "theta", "alpha", "m"):
            v = getattr(self, key)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
                raise ValueError(f"{key}: expected a finite number, got {v!r}")
        if not self.m > 0:
            raise ValueError("m: mass must be positive")
        if self.E_i < self.m:
            raise ValueError(f"E_i: energy {self.E_i} is below the mass {self.m}")
        if not 0.0 < self.theta <= math.pi:
            raise ValueError(f"theta: angle must lie in (0, pi], got {self.theta}")
        if not self.alpha > 0:
            raise ValueError("alpha: coupling must be positive")

    @classmethod
    def from_degrees(cls, Z, E_i, theta_deg, alpha=ALPHA, m=1.0) -> "Kinematics":
        return cls(Z=Z, E_i=E_i, theta=math.radians(theta_deg), alpha=alpha, m=m)

    @classmethod
    def from_json(cls, doc: dict) -> "Kinematics":
        """Parse ``{"Z", "alpha", "m", "E_i", "theta_deg"}``; ``alpha`` and ``m`` are optional."""
        if not isinstance(doc, dict):
            raise ValueError("kinematics: expected a JSON object")
        known = {"Z", "alpha", "m", "E_i", "theta_deg"}
        for key in doc:
            if key not in known:
                raise ValueError(f"{key}: unknown kinematics key")
        for key in ("Z", "E_i", "theta_deg"):
            if key not in doc:
                raise ValueError(f"{key}: missing from kinematics document")
        for key, v in doc.items():
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ValueError(f"{key}: expected a number, got {v!r}")
        return cls.from_degrees(doc["Z"], doc["E_i"], doc["theta_deg"],
                                doc.get("alpha", ALPHA), doc.get("m", 1.0))

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["theta_deg"] = math.degrees(d.pop("theta"))
        return d

    @property
    def p_i(self) -> float:
        return math.sqrt(self.E_i * self.E_i - self.m * self.m)

    @property
    def q2(self) -> float:
        """Elastic momentum transfer squared, ``2 p_i^2 (1 - cos theta)``."""
        return 2.0 * self.p_i ** 2 * (1.0 - math.cos(self.theta))


@dataclass(frozen=True)
class NormalizationBox:
    V: float
    T: float

    def __post_init__(self):
        if not self.V > 0:
            raise ValueError("V: box volume must be positive")
        if not self.T > 0:
            raise ValueError("T: duration must be positive")

    @classmethod
    def from_epsilon(cls, V: float, eps: float) -> "NormalizationBox":
        return cls(V, 2.0 / eps)


def plane_wave_norm(E: float, V: float) -> float:
    """``1 / sqrt(2 E V)``."""
    if not E > 0:
        raise ValueError("E: energy must be positive")
    if not V > 0:
        raise ValueError("V: volume must be positive")
    return 1.0 / math.sqrt(2.0 * E * V)


def coulomb_form_factor(q: float, mu: float = 0.0, *, check: bool = False, tol: float = 1e-10) -> float:
    """``4 pi / (q^2 + mu^2)``; with ``check`` the radial integral must agree."""
    if q < 0 or mu < 0:
        raise ValueError("q and mu must be non-negative")
    if q == 0 and mu == 0:
        raise ValueError("q = mu = 0: the unscreened forward form factor diverges")
    value = 4.0 * math.pi / (q * q + mu * mu)
    if check and mu > 0:
        radial = screened_form_factor_radial(q, mu, tol=tol)
        if abs(radial - value) > 1e3 * tol * max(1.0, value):
            raise ArithmeticError(f"radial quadrature {radial} disagrees with {value}")
    return value


def screened_form_factor_radial(q: float, mu: float, tol: float = 1e-10) -> float:
    """Fourier transform of ``exp(-mu r) / r`` by radial quadrature.

    ``(4 pi / q) int_0^inf exp(-mu r) sin(q r) dr``, or
    ``4 pi int_0^inf r exp(-mu r) dr`` at ``q = 0``.
    """
    if not mu > 0:
        raise ValueError("mu: radial check needs a positive screening mass")
    if q == 0:
        r = integrate_line(IntegrandSpec(lambda r: r * np.exp(-mu * np.asarray(r)), scale=1.0 / mu),
                           tol, lower=0.0)
        return 4.0 * math.pi * r.real
    spec = IntegrandSpec(lambda r: np.exp(-mu * np.asarray(r)) * np.sin(q * np.asarray(r)),
                         oscillation_frequency=q, scale=1.0 / mu, complex_valued=False)
    return 4.0 * math.pi / q * integrate_line(spec, tol, lower=0.0).real


def _p(E, m):
    E = np.asarray(E, dtype=float)
    return np.sqrt(np.maximum(E * E - m * m, 0.0))


def momentum_transfer_sq(E_f, kin: Kinematics):
    """``p_f^2 + p_i^2 - 2 p_f p_i cos(theta)``."""
    pf, pi_ = _p(E_f, kin.m), kin.p_i
    return pf * pf + pi_ * pi_ - 2.0 * pf * pi_ * math.cos(kin.theta)


def rutherford_integrand(E_f, kin: Kinematics):
    """``(p_f/p_i) / q^4``; zero below threshold (``E_f < m``)."""
    if kin.E_i <= kin.m:
        raise ValueError("E_i: needs E_i > m (p_i = 0 otherwise)")
    scalar = np.ndim(E_f) == 0
    E_f = np.asarray(E_f, dtype=float)
    pf = _p(E_f, kin.m)
    q2 = momentum_transfer_sq(E_f, kin)
    out = np.where(E_f >= kin.m, (pf / kin.p_i) / (q2 * q2), 0.0)
    return float(out) if scalar else out


def rutherford_test_function(kin: Kinematics) -> TestFunction:
    """``R(E_i + x) / R(E_i)`` as a test function in the energy offset ``x``.

    ``f(0) = 1`` and ``f'(0) = -E_i / p_i^2``.
    """
    r0 = rutherford_integrand(kin.E_i, kin)

    def f(x):
        return rutherford_integrand(kin.E_i + np.asarray(x, dtype=float), kin) / r0

    return TestFunction(f, 1.0, -kin.E_i / kin.p_i ** 2, GrowthClass.BOUNDED_SMOOTH, "rutherford",
                        scale=min(kin.p_i, kin.E_i - kin.m), points=(kin.m - kin.E_i, -kin.m - kin.E_i))


def rutherford_closed_form(kin: Kinematics) -> float:
    """``4 Z^2 alpha^2 / q^4``."""
    return 4.0 * kin.Z ** 2 * kin.alpha ** 2 / kin.q2 ** 2


def cross_section_regularized(kin: Kinematics, rho: Mollifier, eps: float, tol: float = 1e-12, *,
                              full_output: bool = False):
    """Finite-``eps`` differential cross section ``dSigma / (T dOmega)``."""
    seq = DeltaSequence(rho, eps)
    f = rutherford_test_function(kin)
    s2 = sift_squared(f, seq, tol, full_output=True)
    # int R |rho_eps|^2 dE_f = R(E_i) * s2, then divide by T = 2/eps
    factor = 8.0 * math.pi * kin.Z ** 2 * kin.alpha ** 2 * rutherford_integrand(kin.E_i, kin) / seq.duration
    r = s2.scaled(factor)
    return r if full_output else float(r.value.real)


def cross_section_ratio(kin: Kinematics, rho: Mollifier, eps: float, tol: float = 1e-12) -> float:
    return cross_section_regularized(kin, rho, eps, tol) / rutherford_closed_form(kin)


def _prefactor(kin: Kinematics, e2: float | None):
    if e2 is None:
        return 8.0 * math.pi * kin.Z ** 2 * kin.alpha ** 2
    # same constant written with the charge: e^2 = 4 pi alpha
    return kin.Z ** 2 * e2 * e2 / (2.0 * math.pi)


def transition_probability(kin: Kinematics, rho: Mollifier, eps: float, V: float, E_f, *,
                           e2: float | None = None):
    """Transition probability density per ``d^3 p_f`` at final energy ``E_f``.

    ``8 pi Z^2 alpha^2 / (E_i V) * |rho_eps(E_f - E_i)|^2 / (q^4 E_f)``, zero
    below threshold.  Passing ``e2`` evaluates the same constant through the
    squared charge.
    """
    if not V > 0:
        raise ValueError("V: volume must be positive")
    scalar = np.ndim(E_f) == 0
    E_f = np.asarray(E_f, dtype=float)
    seq = DeltaSequence(rho, eps)
    q2 = momentum_transfer_sq(E_f, kin)
    dens = np.abs(seq(E_f - kin.E_i)) ** 2
    safe_E = np.where(E_f >= kin.m, E_f, 1.0)
    out = np.where(E_f >= kin.m,
                   _prefactor(kin, e2) / (kin.E_i * V) * dens / (q2 * q2 * safe_E), 0.0)
    return float(out) if scalar else out


def phase_space_cross_section(kin: Kinematics, rho: Mollifier, eps: float, V: float,
                              tol: float = 1e-12, *, e2: float | None = None) -> float:
    """Integrate :func:`transition_probability` over ``d^3 p_f = p_f E_f dE_f dOmega``
    and divide by the flux ``v_i / V``.

    Equals ``T * cross_section_regularized``.
    """
    flux = kin.p_i / (kin.E_i * V)
    m = kin.m
    # the constant prefactor is pulled out so that tol acts on an O(1) integral
    unit = _prefactor(kin, e2) / (kin.E_i * V)

    def dens(z):
        E = kin.E_i + eps * np.asarray(z, dtype=float)
        w = transition_probability(kin, rho, eps, V, E, e2=e2) / unit
        return w * _p(E, m) * E * eps

    points = (0.0, (m - kin.E_i) / eps)
    if rho.kind == "sinc":
        # eps |rho_eps|^2 = sin(z)^2 / (pi^2 eps z^2); strip the carrier
        def env(z):
            E = kin.E_i + eps * np.asarray(z, dtype=float)
            q2 = momentum_transfer_sq(E, kin)
            return np.where(E >= m, _p(E, m) / (q2 * q2), 0.0) * INV_PI ** 2 / eps
        r = integrate_sine_squared(env, 1.0, tol, points=points[1:], scale=kin.p_i / eps)
    else:
        r = integrate_line(IntegrandSpec(dens, points=points, complex_valued=False), tol)
    return unit * float(r.value.real) / flux
