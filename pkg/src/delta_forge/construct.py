"""Synthesis of mollifiers satisfying the moment and physical conditions together.

The mollifier is expanded in Hermite functions of width ``sigma``::

    rho(z) = exp(-(z/sigma)**2) * sum_k c_k H_k(z/sigma),   k = 0..K

Normalization, vanishing moments ``n = 1..q`` and the point value
``rho(0) = 1/pi`` are linear in ``c``; ``int |rho|**2 = 1/pi`` is the
quadratic form ``c* G c``.  The solver takes the least-norm point of the
affine family, moves along its null space to meet the quadratic constraint
(a secular equation in one multiplier), then polishes with Newton on the
full KKT system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.optimize import brentq
from scipy.special import gammaln

from .conditions import ConditionReport, Overall, classify
from .mollifier import INV_PI, Mollifier, hermite
from .transforms import TransformError, damper_integral, mollifier_to_damper

__all__ = [
    "ConstraintSystem",
    "InfeasibleError",
    "SolveInfo",
    "RoundtripReport",
    "SYNTHESIS_WIDTH",
    "build_constraints",
    "solve_mollifier",
    "construct_mollifier",
    "verify_roundtrip",
    "hermite_moment",
    "hermite_gram",
    "hermite_at_zero",
]

SYNTHESIS_WIDTH = math.sqrt(math.pi)
NEWTON_BUDGET = 200
_IDENTITY_RTOL = 1e-12


# analytic Hermite identities (physicists' polynomials, weight exp(-u**2))

def hermite_moment(n: int, k: int) -> float:
    """``int u**n exp(-u**2) H_k(u) du``."""
    if k > n or (n - k) % 2:
        return 0.0
    l = (n - k) // 2
    return math.exp(0.5 * math.log(math.pi) + math.lgamma(n + 1) - math.lgamma(l + 1)
                    + (k - n) * math.log(2.0))


def hermite_gram(m: int, n: int) -> float:
    """``int exp(-2 u**2) H_m(u) H_n(u) du``."""
    if (m + n) % 2:
        return 0.0
    sign = -1.0 if ((m - n) // 2) % 2 else 1.0
    return sign * math.exp(0.5 * (m + n - 1) * math.log(2.0) + gammaln(0.5 * (m + n + 1)))


def hermite_at_zero(k: int) -> float:
    if k % 2:
        return 0.0
    j = k // 2
    return (-1.0) ** j * math.exp(math.lgamma(k + 1) - math.lgamma(j + 1))


@dataclass(frozen=True)
class ConstraintSystem:
    """Linear rows ``A c = b`` plus the quadratic ``c* G c = target``.

    Row order: normalization, moments ``1..q_order``, point value, then any
    pinned rows.  ``A`` and ``b`` are complex when pinned rows are complex.
    """

    K: int
    q_order: int
    width: float
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    target: float = INV_PI
    nodes: int = 0
    identity_error: float = 0.0

    @property
    def n_unknowns(self) -> int:
        return self.K + 1

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def normalization_row(self) -> np.ndarray:
        return self.A[0]

    @property
    def point_value_row(self) -> np.ndarray:
        return self.A[self.q_order + 1]

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.A) and np.any(self.A.imag)) or bool(
            np.iscomplexobj(self.b) and np.any(self.b.imag))

    def residuals(self, c) -> dict:
        c = np.asarray(c, dtype=complex)
        lin = self.A @ c - self.b
        quad = float(np.real(np.conj(c) @ self.G @ c)) - self.target
        return {"linear": float(np.max(np.abs(lin))), "quadratic": abs(quad)}


class InfeasibleError(RuntimeError):
    """No coefficient vector meeting every constraint was found.

    Attributes
    ----------
    residuals : dict
        Best linear and quadratic residuals reached.
    coefficients : ndarray or None
        The best candidate, for inspection only.
    report : ConditionReport or None
        Independent re-check, when a candidate was produced.
    """

    def __init__(self, message, residuals=None, coefficients=None, report=None):
        super().__init__(message)
        self.residuals = residuals or {}
        self.coefficients = coefficients
        self.report = report

    def to_dict(self) -> dict:
        doc = {"status": "Infeasible", "reason": str(self), "residuals": self.residuals}
        if self.report is not None:
            doc["report"] = self.report.to_dict()
        return doc


def build_constraints(K: int, q_order: int, width: float = 1.0, *, pinned=()) -> ConstraintSystem:
    """Assemble the constraint rows for basis size ``K`` (degrees ``0..K``).

    Every entry is computed by Gauss-Hermite quadrature and cross-checked
    against the closed-form identities.

    Parameters
    ----------
    K : int
        Highest Hermite degree.
    q_order : int
        Number of vanishing moments.
    width : float
        Basis width ``sigma``.
    pinned : sequence of (row, value)
        Extra linear rows ``row . c = value``; may be complex.
    """
    if int(K) != K or int(q_order) != q_order or q_order < 1:
        raise ValueError("K and q_order must be integers with q_order >= 1")
    K, q = int(K), int(q_order)
    if K < q + 1:
        raise ValueError(f"basis size K={K} leaves fewer unknowns ({K + 1}) than constraint rows ({q + 2})")
    if not width > 0:
        raise ValueError("width must be positive")
    nodes = 2 * K + q + 8
    x, w = hermgauss(nodes)
    # orthonormal-scaled h_k = H_k / sqrt(2^k k!) keeps the sums free of cancellation
    norms = np.sqrt(np.exp(np.arange(K + 1) * math.log(2.0)
                           + np.array([math.lgamma(k + 1) for k in range(K + 1)])))
    h = _scaled_hermite(x, K)
    hs = _scaled_hermite(x / math.sqrt(2.0), K)
    powers = np.stack([x ** n for n in range(q + 1)])
    moments = powers @ (w * h).T  # int u^n e^{-u^2} h_k
    gram = (w * hs) @ hs.T / math.sqrt(2.0)  # u = v / sqrt(2)

    exact_m = np.array([[hermite_moment(n, k) for k in range(K + 1)] for n in range(q + 1)])
    exact_g = np.array([[hermite_gram(m, n) for n in range(K + 1)] for m in range(K + 1)])
    err = max(_rel_err(moments, exact_m / norms[None, :]),
              _rel_err(gram, exact_g / np.outer(norms, norms)))
    if err > _IDENTITY_RTOL:
        raise ArithmeticError(f"Gauss-Hermite rows disagree with analytic identities (rel. error {err:.2e})")

    scale = width ** np.arange(1, q + 2)[:, None]
    point = np.array([hermite_at_zero(k) for k in range(K + 1)])
    rows = [scale * exact_m, point[None, :]]
    rhs = [np.r_[1.0, np.zeros(q)], np.array([INV_PI])]
    for row, value in pinned:
        row = np.asarray(row, dtype=complex)
        if row.shape != (K + 1,):
            raise ValueError(f"pinned row must have length {K + 1}")
        rows.append(row[None, :])
        rhs.append(np.array([value], dtype=complex))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    if not (np.any(np.imag(A)) or np.any(np.imag(b))):
        A, b = A.real.astype(float), b.real.astype(float)
    return ConstraintSystem(K=K, q_order=q, width=float(width), A=A, b=b, G=width * exact_g,
                            nodes=nodes, identity_error=err)


def _scaled_hermite(x, K):
    out = np.empty((K + 1, len(x)))
    out[0] = 1.0
    if K >= 1:
        out[1] = math.sqrt(2.0) * x
    for k in range(1, K):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1)) * out[k - 1]
    return out


def _rel_err(approx, exact):
    # each entry against the magnitude of its row (entries vanishing by parity included)
    mag = np.maximum(np.max(np.abs(exact), axis=1, keepdims=True), 1e-300)
    return float(np.max(np.abs(approx - exact) / mag))


@dataclass(frozen=True)
class SolveInfo:
    coefficients: np.ndarray
    residuals: dict
    newton_steps: int
    multiplier: float
    quadratic_gap: float
    complex_search: bool
    notes: tuple = field(default=())


def _parity_phase(K):
    """``i**(k mod 2)``: odd Hermite terms carry an imaginary unit in the Hermitian family."""
    return np.where(np.arange(K + 1) % 2, 1j, 1.0)


def _real_form(system: ConstraintSystem, mode: str):
    """Real unknowns for the given search family.

    ``hermitian``: ``c_k = i**(k mod 2) r_k`` with ``r`` real, i.e.
    ``rho(-z) = conj(rho(z))``, the family whose transform is real.
    ``complex``: ``(Re c, Im c)`` stacked, no symmetry imposed.
    """
    A, b, G = np.asarray(system.A, dtype=complex), np.asarray(system.b, dtype=complex), system.G
    if mode == "hermitian":
        AD = A * _parity_phase(system.K)[None, :]
        A2 = np.vstack([AD.real, AD.imag])
        b2 = np.r_[b.real, b.imag]
        keep = np.any(A2 != 0, axis=1) | (b2 != 0)
        # parity-block Gram: D* G D = G
        return A2[keep], b2[keep], G
    Ar, Ai = A.real, A.imag
    A2 = np.block([[Ar, -Ai], [Ai, Ar]])
    b2 = np.r_[b.real, b.imag]
    keep = np.any(A2 != 0, axis=1) | (b2 != 0)
    G2 = np.block([[G, np.zeros_like(G)], [np.zeros_like(G), G]])
    return A2[keep], b2[keep], G2


def _affine_family(A, b):
    U, s, Vt = np.linalg.svd(A)
    rank = int(np.sum(s > s[0] * 1e-13)) if s.size else 0
    c0 = Vt[:rank].T @ ((U[:, :rank].T @ b) / s[:rank])
    Z = Vt[rank:].T
    lin_res = float(np.max(np.abs(A @ c0 - b))) if A.size else 0.0
    return c0, Z, lin_res


def _secular_start(c0, Z, G, t):
    """Point of least norm on ``{c0 + Z y}`` with ``c^T G c = t``.

    Returns ``(c, lam, gap)`` where ``gap = max(0, Qmin - t)`` is positive
    when the quadratic level is out of reach of the affine family.
    """
    s = float(c0 @ G @ c0)
    if Z.shape[1] == 0:
        return c0, 0.0, abs(s - t)
    Hm = Z.T @ G @ Z
    g = Z.T @ G @ c0
    mu, V = np.linalg.eigh(Hm)
    gt = V.T @ g
    qmin = s - float(np.sum(gt * gt / mu))

    def y_of(lam):
        return -lam * gt / (1.0 + lam * mu)

    def Q(lam):
        y = y_of(lam)
        return s + float(np.sum(mu * y * y + 2.0 * gt * y))

    if t < qmin:
        y = -gt / mu
        return c0 + Z @ (V @ y), math.inf, qmin - t
    if abs(s - t) <= 1e-15 * max(1.0, t):
        return c0, 0.0, 0.0
    if s > t:
        hi = 1.0
        while Q(hi) > t and hi < 1e300:
            hi *= 4.0
        lam = brentq(lambda l: Q(l) - t, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
        return c0 + Z @ (V @ y_of(lam)), lam, 0.0
    # s < t: lam in (-1/mu_max, 0), the interval where I + lam H stays positive
    top_val = float(mu[-1])
    lo_lim = -1.0 / top_val
    top = mu >= top_val * (1.0 - 1e-12)
    if np.any(np.abs(gt[top]) > 1e-14 * max(1.0, float(np.max(np.abs(gt))))):
        q_edge = math.inf
    else:
        rest = ~top
        y_edge = np.zeros_like(gt)
        y_edge[rest] = -lo_lim * gt[rest] / (1.0 - mu[rest] / top_val)
        q_edge = s + float(np.sum(mu * y_edge * y_edge + 2.0 * gt * y_edge))
    if q_edge > t:
        lo = lo_lim / 2.0
        while Q(lo) < t:
            lo = (lo + lo_lim) / 2.0
        lam = brentq(lambda l: Q(l) - t, lo, 0.0, xtol=1e-300, rtol=1e-15, maxiter=500)
        return c0 + Z @ (V @ y_of(lam)), lam, 0.0
    # hard case: the pole is absent, move along the top eigenvector
    y = y_edge.copy()
    y[int(np.argmax(mu))] += math.sqrt(max(t - q_edge, 0.0) / top_val)
    return c0 + Z @ (V @ y), lo_lim, 0.0


def _newton_kkt(c, lam, A, b, G, t, tol, budget=NEWTON_BUDGET):
    n, m = len(c), A.shape[0]
    nu = np.linalg.lstsq(A.T, -(2.0 * c + 2.0 * lam * G @ c), rcond=None)[0]
    x = np.r_[c, nu, lam]

    def F(x):
        c, nu, lam = x[:n], x[n:n + m], x[-1]
        Gc = G @ c
        return np.r_[2.0 * c + A.T @ nu + 2.0 * lam * Gc, A @ c - b, c @ Gc - t]

    steps = 0
    f = F(x)
    for steps in range(1, budget + 1):
        c, lam = x[:n], x[-1]
        Gc = G @ c
        J = np.zeros((n + m + 1, n + m + 1))
        J[:n, :n] = 2.0 * np.eye(n) + 2.0 * lam * G
        J[:n, n:n + m] = A.T
        J[:n, -1] = 2.0 * Gc
        J[n:n + m, :n] = A
        J[-1, :n] = 2.0 * Gc
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(J, -f, rcond=None)[0]
        x_new = x + dx
        f_new = F(x_new)
        if np.max(np.abs(f_new)) > np.max(np.abs(f)) and np.max(np.abs(f)) < tol:
            break  # at the rounding floor
        x, f = x_new, f_new
        if np.max(np.abs(f)) < tol and np.linalg.norm(dx) <= 1e-14 * (1.0 + np.linalg.norm(x)):
            break
    return x[:n], float(x[-1]), steps


def _solve_real(system, tol, mode):
    A, b, G = _real_form(system, mode)
    t = system.target
    c0, Z, lin_res = _affine_family(A, b)
    if lin_res > tol:
        return None, {"linear": lin_res, "quadratic": math.nan}, math.inf, 0, 0.0
    c, lam, gap = _secular_start(c0, Z, G, t)
    if gap > 0.0:
        res = {"linear": lin_res, "quadratic": gap}
        return c, res, lam, 0, gap
    c, lam, steps = _newton_kkt(c, lam, A, b, G, t, tol)
    res = {"linear": float(np.max(np.abs(A @ c - b))), "quadratic": abs(float(c @ G @ c) - t)}
    return c, res, lam, steps, 0.0


def _complexify(c, K):
    if len(c) == K + 1:
        return _parity_phase(K) * c
    return c[:K + 1] + 1j * c[K + 1:]


def solve_mollifier(system: ConstraintSystem, tol: float = 1e-8, *, verify: bool = True,
                    return_info: bool = False):
    """Minimum-norm coefficients meeting every row of ``system``.

    The Hermitian family (real transform, and real coefficients whenever the
    odd part vanishes) is searched first; unrestricted complex coefficients
    are the fallback.
    The result is re-checked by :func:`conditions.classify` and only returned
    when that independent check reports ``Full``.

    Raises
    ------
    InfeasibleError
        When neither search meets the constraints within ``tol`` or the
        independent check disagrees.
    """
    best, best_res = None, None
    for mode in ("hermitian", "complex"):
        c, res, lam, steps, gap = _solve_real(system, tol, mode)
        if c is None:
            best_res = best_res or res
            continue
        cand = SolveInfo(_complexify(c, system.K), res, steps, lam, gap, mode == "complex")
        if best is None or max(res.values()) < max(best.residuals.values()):
            best = cand
        if max(res.values()) <= tol:
            break
    if best is None:
        raise InfeasibleError("linear rows are inconsistent", residuals=best_res)
    if max(best.residuals.values()) > tol:
        raise InfeasibleError(
            f"no coefficient vector meets the quadratic constraint "
            f"(gap {best.quadratic_gap:.3e} above the target)",
            residuals=best.residuals, coefficients=best.coefficients)
    rho = hermite(best.coefficients, width=system.width,
                  name=f"constructed_q{system.q_order}_K{system.K}")
    if verify:
        report = classify(rho, system.q_order, tol)
        if report.overall is not Overall.FULL:
            raise InfeasibleError("independent condition check did not confirm the solution",
                                  residuals=best.residuals, coefficients=best.coefficients,
                                  report=report)
    return (rho, best) if return_info else rho


def quadratic_gap(K: int, q_order: int, width: float = SYNTHESIS_WIDTH) -> float:
    """``max(0, Qmin - 1/pi)``: how far the affine family sits above the quadratic level."""
    system = build_constraints(K, q_order, width)
    A, b, G = _real_form(system, "hermitian")
    c0, Z, _ = _affine_family(A, b)
    return _secular_start(c0, Z, G, system.target)[2]


def construct_mollifier(q_order: int, K: int, tol: float = 1e-8, *,
                        width: float = SYNTHESIS_WIDTH, pinned=()) -> Mollifier:
    """Build and solve in one call, on the synthesis width ``sqrt(pi)`` by default."""
    return solve_mollifier(build_constraints(K, q_order, width, pinned=pinned), tol)


@dataclass(frozen=True)
class RoundtripReport:
    imag_residual: float
    value_at_zero: float
    integral: float
    tail_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {"imag_residual": self.imag_residual, "value_at_zero": self.value_at_zero,
                "integral": self.integral, "tail_ratio": self.tail_ratio, "passed": self.passed}


def verify_roundtrip(rho: Mollifier, *, real_tol: float = 1e-7, tol: float = 1e-6) -> RoundtripReport:
    """Transform ``rho`` and check its damper: real, ``rho_hat(0) = 1``, ``int rho_hat = 2``, rapid decay."""
    try:
        damper = mollifier_to_damper(rho)
    except TransformError:
        return RoundtripReport(math.inf, math.nan, math.nan, math.inf, False)
    v0 = float(damper(0.0))
    total = damper_integral(damper)
    # rapid decay: tail of the damper far below its peak
    p = np.linspace(-damper.width, damper.width, 4097)
    vals = np.abs(damper(p))
    tail_ratio = float(max(vals[0], vals[-1]) / max(vals.max(), 1e-300))
    passed = (damper.imag_residual <= real_tol and abs(v0 - 1.0) <= tol
              and abs(total - 2.0) <= tol and tail_ratio <= 1e-12)
    return RoundtripReport(damper.imag_residual, v0, total, tail_ratio, passed)
