"""Mollifiers, dampers and scaled delta sequences.

A mollifier ``rho`` is a function on the real line whose scaled family
``rho_eps(x) = rho(x / eps) / eps`` represents the delta function as
``eps -> 0``.  Its Fourier transform (the *damper*) acts as a frequency
cut-off.  Three representations are supported for mollifiers:

* named closed forms (``sinc``, ``lorentzian``, ``gaussian``),
* Hermite-function expansions ``exp(-u**2) * sum_k c_k H_k(u)`` with
  ``u = z / width`` and physicists' Hermite polynomials,
* uniform sample tables with cubic interpolation and a declared tail.

All objects are immutable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np
from numpy.polynomial.hermite import hermval
from scipy.interpolate import CubicSpline

__all__ = [
    "DecayClass",
    "Mollifier",
    "Damper",
    "DeltaSequence",
    "builtin",
    "builtin_damper",
    "hermite",
    "tabulate",
    "eval_delta",
    "from_json",
    "damper_from_json",
]

INV_PI = 1.0 / math.pi
INV_SQRT_PI = 1.0 / math.sqrt(math.pi)

# exp(-u**2) underflows to exactly zero beyond this
_HERMITE_CUTOFF = 38.0

NAMED_MOLLIFIERS = ("sinc", "lorentzian", "gaussian")
NAMED_DAMPERS = ("sharp_cutoff", "exponential", "gaussian_damper")


class DecayClass(str, Enum):
    SCHWARTZ = "SchwartzClass"
    POWER_LAW = "PowerLawDecay"
    CONDITIONAL = "ConditionallyIntegrable"


_NAMED_DECAY = {
    "sinc": DecayClass.CONDITIONAL,
    "lorentzian": DecayClass.POWER_LAW,
    "gaussian": DecayClass.SCHWARTZ,
}


def _as_output(values, scalar):
    out = np.asarray(values, dtype=complex)
    return complex(out) if scalar else out


@dataclass(frozen=True, eq=False)
class Mollifier:
    """A mollifier on the real line.

    Parameters
    ----------
    kind : str
        One of ``sinc``, ``lorentzian``, ``gaussian``, ``hermite``, ``table``.
    decay_class : DecayClass
        Declared tail behaviour, used to pick quadrature paths.
    coeffs : tuple of complex
        Hermite coefficients (``hermite``) or sample values (``table``).
    width : float
        Hermite basis width; ``1.0`` gives ``exp(-z**2) sum c_k H_k(z)``.
        For tables this is the half-width ``L`` of the sample grid.
    tail : tuple or None
        Table tail outside ``[-L, L]``: ``("power", p)`` continues as
        ``rho(+-L) * (L/|z|)**p``; ``("gaussian", a)`` as
        ``rho(+-L) * exp(-a (z**2 - L**2))``.
    """

    kind: str
    decay_class: DecayClass
    coeffs: tuple = ()
    width: float = 1.0
    tail: tuple | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in NAMED_MOLLIFIERS + ("hermite", "table"):
            raise ValueError(f"unknown mollifier kind {self.kind!r}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.kind == "hermite" and len(self.coeffs) == 0:
            raise ValueError("hermite mollifier needs at least one coefficient")
        if self.kind == "table":
            if len(self.coeffs) < 4:
                raise ValueError("table mollifier needs at least 4 samples")
            if self.tail is None or self.tail[0] not in ("power", "gaussian"):
                raise ValueError("table mollifier needs a ('power'|'gaussian', param) tail")

    @property
    def analytic_fourier_available(self) -> bool:
        return self.kind in NAMED_MOLLIFIERS

    @property
    def is_real(self) -> bool:
        if self.kind in NAMED_MOLLIFIERS:
            return True
        return not np.any(np.imag(self.coefficients))

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    @property
    def basis_size(self) -> int:
        """Highest Hermite degree K (``len(coeffs) - 1``)."""
        return len(self.coeffs) - 1

    @cached_property
    def _spline(self):
        values = self.coefficients
        grid = np.linspace(-self.width, self.width, len(values))
        return CubicSpline(grid, values)

    def __call__(self, z):
        scalar = np.ndim(z) == 0
        z = np.asarray(z, dtype=float)
        kind = self.kind
        if kind == "sinc":
            out = np.sinc(z / math.pi) * INV_PI
        elif kind == "lorentzian":
            with np.errstate(over="ignore"):
                out = INV_PI / (1.0 + z * z)
        elif kind == "gaussian":
            with np.errstate(over="ignore"):
                out = np.exp(-z * z) * INV_SQRT_PI
        elif kind == "hermite":
            u = z / self.width
            inside = np.abs(u) < _HERMITE_CUTOFF
            safe = np.where(inside, u, 0.0)
            out = np.where(inside, np.exp(-safe * safe) * hermval(safe, self.coefficients), 0.0)
        else:
            out = self._eval_table(z)
        return _as_output(out, scalar)

    def _eval_table(self, z):
        L = self.width
        values = self.coefficients
        inside = np.abs(z) <= L
        out = np.asarray(self._spline(np.clip(z, -L, L)), dtype=complex)
        if np.all(inside):
            return out
        edge = np.where(z > 0, values[-1], values[0])
        az = np.maximum(np.abs(z), L)
        kind, param = self.tail
        if kind == "power":
            factor = (L / az) ** param
        else:
            factor = np.exp(-param * (az * az - L * L))
        return np.where(inside, out, edge * factor)

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coefficients],
            "decay_class": self.decay_class.value,
        }
        if self.kind == "hermite":
            doc["width"] = self.width
        if self.kind == "table":
            doc["half_width"] = self.width
            doc["tail"] = [self.tail[0], float(self.tail[1])]
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def builtin(name: str) -> Mollifier:
    """Return the unit-scale named mollifier (``sinc``, ``lorentzian`` or ``gaussian``)."""
    key = str(name).strip().lower()
    if key not in _NAMED_DECAY:
        raise ValueError(f"unknown built-in mollifier {name!r}; expected one of {NAMED_MOLLIFIERS}")
    return Mollifier(kind=key, decay_class=_NAMED_DECAY[key], name=key)


def hermite(coeffs, width: float = 1.0, name: str = "") -> Mollifier:
    """Hermite-function mollifier ``exp(-u**2) sum c_k H_k(u)``, ``u = z/width``."""
    coeffs = tuple(complex(c) for c in np.atleast_1d(coeffs))
    return Mollifier(kind="hermite", decay_class=DecayClass.SCHWARTZ, coeffs=coeffs,
                     width=float(width), name=name)


def tabulate(func, half_width: float = 64.0, samples: int = 4097,
             tail=("gaussian", 1.0), name: str = "") -> Mollifier:
    """Sample ``func`` on a uniform grid over ``[-half_width, half_width]``."""
    grid = np.linspace(-half_width, half_width, samples)
    values = np.asarray(func(grid), dtype=complex)
    decay = DecayClass.SCHWARTZ if tail[0] == "gaussian" else DecayClass.POWER_LAW
    return Mollifier(kind="table", decay_class=decay, coeffs=tuple(values),
                     width=float(half_width), tail=(tail[0], float(tail[1])), name=name)


@dataclass(frozen=True, eq=False)
class Damper:
    """Real Fourier-side cut-off function ``rho_hat``.

    ``kind`` is one of ``sharp_cutoff`` (indicator of [-1, 1]),
    ``exponential`` (``exp(-|p|)``), ``gaussian_damper`` (``exp(-p**2/4)``)
    or ``table`` (real samples on ``[-width, width]``, zero outside).
    ``imag_residual`` records the largest discarded imaginary part when the
    damper came from a numerical transform.
    """

    kind: str
    values: tuple = ()
    width: float = 64.0
    imag_residual: float = 0.0

    def __post_init__(self):
        if self.kind not in NAMED_DAMPERS + ("table",):
            raise ValueError(f"unknown damper kind {self.kind!r}")
        if self.kind == "table" and len(self.values) < 4:
            raise ValueError("table damper needs at least 4 samples")

    @property
    def smooth_compact_support(self) -> bool:
        # none of the supported forms is both smooth and compactly supported
        return False

    @property
    def points(self) -> tuple:
        """Abscissae where the damper is not smooth."""
        if self.kind == "sharp_cutoff":
            return (-1.0, 1.0)
        if self.kind == "exponential":
            return (0.0,)
        return ()

    @cached_property
    def _spline(self):
        vals = np.asarray(self.values, dtype=float)
        grid = np.linspace(-self.width, self.width, len(vals))
        return CubicSpline(grid, vals)

    def __call__(self, p):
        scalar = np.ndim(p) == 0
        p = np.asarray(p, dtype=float)
        if self.kind == "sharp_cutoff":
            out = (np.abs(p) <= 1.0).astype(float)
        elif self.kind == "exponential":
            out = np.exp(-np.abs(p))
        elif self.kind == "gaussian_damper":
            out = np.exp(-p * p / 4.0)
        else:
            out = np.where(np.abs(p) <= self.width, self._spline(np.clip(p, -self.width, self.width)), 0.0)
        return float(out) if scalar else out

    @property
    def decay_class(self) -> str:
        return {"sharp_cutoff": "CompactSupport", "exponential": "ExponentialDecay"}.get(
            self.kind, "RapidDecay")

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "coeffs": [[float(v), 0.0] for v in self.values],
            "decay_class": self.decay_class,
        }
        if self.kind == "table":
            doc["half_width"] = self.width
            doc["imag_residual"] = self.imag_residual
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def builtin_damper(name: str) -> Damper:
    key = str(name).strip().lower().replace("-", "_")
    aliases = {"sharpcutoff": "sharp_cutoff", "gaussiandamper": "gaussian_damper",
               "gaussian": "gaussian_damper"}
    key = aliases.get(key, key)
    if key not in NAMED_DAMPERS:
        raise ValueError(f"unknown built-in damper {name!r}; expected one of {NAMED_DAMPERS}")
    return Damper(kind=key)


@dataclass(frozen=True)
class DeltaSequence:
    """The scaled family member ``rho_eps(x) = rho(x / eps) / eps``.

    ``eps`` corresponds to a measurement duration ``T = 2 / eps``.
    """

    mollifier: Mollifier
    epsilon: float

    def __post_init__(self):
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be a positive finite number")

    @property
    def duration(self) -> float:
        return 2.0 / self.epsilon

    @classmethod
    def from_duration(cls, mollifier: Mollifier, T: float) -> "DeltaSequence":
        return cls(mollifier, 2.0 / T)

    def __call__(self, x):
        x = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
        return self.mollifier(x / self.epsilon) / self.epsilon


def eval_delta(seq: DeltaSequence, x):
    """Evaluate ``seq.mollifier(x / eps) / eps``."""
    return seq(x)


def _parse_coeffs(doc, key="coeffs"):
    try:
        raw = doc[key]
        return tuple(complex(float(re), float(im)) for re, im in raw)
    except KeyError:
        raise ValueError(f"missing key {key!r}") from None
    except (TypeError, ValueError):
        raise ValueError(f"key {key!r} must be a list of [re, im] pairs") from None


def from_json(doc) -> Mollifier:
    """Build a mollifier from its JSON document (dict or string)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "kind" not in doc:
        raise ValueError("missing key 'kind'")
    kind = doc["kind"]
    if kind in NAMED_MOLLIFIERS:
        return builtin(kind)
    if kind == "hermite":
        return hermite(_parse_coeffs(doc), width=float(doc.get("width", 1.0)))
    if kind == "table":
        try:
            L = float(doc["half_width"])
            tail = doc["tail"]
        except KeyError as exc:
            raise ValueError(f"missing key {exc.args[0]!r}") from None
        values = _parse_coeffs(doc)
        decay = DecayClass(doc.get("decay_class", "SchwartzClass"))
        return Mollifier(kind="table", decay_class=decay, coeffs=values, width=L,
                         tail=(str(tail[0]), float(tail[1])))
    raise ValueError(f"unknown value for key 'kind': {kind!r}")


def damper_from_json(doc) -> Damper:
    if isinstance(doc, str):
        doc = json.loads(doc)
    if "kind" not in doc:
        raise ValueError("missing key 'kind'")
    kind = doc["kind"]
    if kind in NAMED_DAMPERS:
        return Damper(kind=kind)
    if kind == "table":
        values = tuple(c.real for c in _parse_coeffs(doc))
        return Damper(kind="table", values=values, width=float(doc.get("half_width", 64.0)),
                      imag_residual=float(doc.get("imag_residual", 0.0)))
    raise ValueError(f"unknown value for key 'kind': {kind!r}")
