"""Coefficient extraction by the trapezoidal rule on circles.

All kernels here are Cauchy integrals of the form ``(1/2 pi i) oint phi(w) dw``
with ``phi`` analytic on an annulus. The trapezoidal rule on a circle is
spectrally accurate for such integrands; we double the node count until two
successive estimates agree. Integrands are handled through their logarithm so
that large powers of ``w``, ``1 - w`` and ``M(w)`` neither overflow nor
underflow, and the circle radius is chosen to minimise ``max |phi w|``, which
keeps cancellation (and hence roundoff) as small as the integrand allows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import binom

from .errors import ConvergenceError, DomainError
from .pgf_model import ModelKind, PGFModel, TimeKind, series_coefficients

RTOL = 1e-12
ATOL = 1e-14
MIN_NODES = 64
MAX_NODES = 2**16
IMAG_TOL = 1e-10
TINY = 1e-300
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ContourSpec:
    """A circle ``|w - center| = radius`` discretized with ``nodes`` points."""

    center: complex = 0j
    radius: float = 1.0
    nodes: int = MIN_NODES

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("contour radius must be positive")
        if self.nodes < MIN_NODES or self.nodes & (self.nodes - 1):
            raise DomainError("node count must be a power of two, at least 64")


@dataclass(frozen=True)
class Quadrature:
    """Outcome of an adaptive circle quadrature."""

    value: complex
    nodes: int
    radius: float
    log_scale: float  # log of the largest |phi(w) (w - c)| seen on the nodes
    difference: float  # |I_N - I_{N/2}| at acceptance


def circle_coefficient(f: Callable, k: int, spec: ContourSpec = ContourSpec(), rtol: float = RTOL,
                       atol: float = ATOL, max_nodes: int = MAX_NODES) -> complex:
    """Coefficient of ``(w - center)**k`` in the Laurent expansion of ``f``.

    >>> round(circle_coefficient(np.exp, 3).real, 12)
    0.166666666667
    """
    c, r = spec.center, spec.radius

    def logphi(w):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(f(w), dtype=complex)) - (k + 1) * np.log(w - c)

    return contour_integral(logphi, c, r, rtol, atol, spec.nodes, max_nodes).value


def contour_integral(logphi: Callable, center: complex, radius: float, rtol: float = RTOL, atol: float = ATOL,
                     min_nodes: int = MIN_NODES, max_nodes: int = MAX_NODES) -> Quadrature:
    """``(1/2 pi i) oint phi(w) dw`` over a circle, given ``log phi``.

    Convergence is declared when successive estimates differ by less than
    ``max(atol, rtol |I|)``, or by less than the roundoff level
    ``64 eps max|phi (w - c)|`` that no node count can beat.
    """
    n = min_nodes
    theta = 2 * np.pi * np.arange(n) / n
    logs = _node_logs(logphi, center, radius, theta)
    scale = float(np.max(logs.real))
    if scale < math.log(TINY) - 5:
        return Quadrature(0j, n, radius, scale, 0.0)
    total = np.sum(np.exp(logs - scale))
    prev = total / n
    history = []
    while 2 * n <= max_nodes:
        theta = 2 * np.pi * (np.arange(n) + 0.5) / n
        new = _node_logs(logphi, center, radius, theta)
        new_scale = max(scale, float(np.max(new.real)))
        total = total * math.exp(scale - new_scale) + np.sum(np.exp(new - new_scale))
        prev = prev * math.exp(scale - new_scale)
        scale = new_scale
        n *= 2
        est = total / n
        diff = abs(est - prev)
        tol = max(rtol * abs(est), 64 * _EPS, atol * math.exp(-scale) if scale > -700 else math.inf)
        if diff <= tol:
            return Quadrature(complex(est) * math.exp(scale), n, radius, scale, diff * math.exp(scale))
        history = [complex(v) * math.exp(scale) if scale < 700 else complex(math.inf) for v in (prev, est)]
        prev = est
    raise ConvergenceError(f"circle quadrature did not converge with {max_nodes} nodes (radius {radius:g})",
                           history)


def _node_logs(logphi, center, radius, theta):
    u = radius * np.exp(1j * theta)
    vals = logphi(center + u) + np.log(u)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    if np.any(np.isposinf(vals.real)):
        raise DomainError("integrand is singular on the contour")
    return vals


def _max_log_on_circle(logphi, radius, samples=128):
    theta = 2 * np.pi * (np.arange(samples) + 0.25) / samples
    w = radius * np.exp(1j * theta)
    vals = np.real(logphi(w)) + math.log(radius)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    return float(np.max(vals))


def best_radius(logphi: Callable, lo: float, hi: float) -> float:
    """Radius in [lo, hi] minimising ``max |phi(w) w|`` on the circle.

    ``log max|phi w|`` is convex in ``log r`` (Hadamard), so a bounded scalar
    search suffices.
    """
    if hi <= lo:
        raise DomainError(f"empty radius interval [{lo:g}, {hi:g}]")
    res = minimize_scalar(lambda s: _max_log_on_circle(logphi, math.exp(s)),
                          bounds=(math.log(lo), math.log(hi)), method="bounded", options={"xatol": 1e-3})
    return float(math.exp(res.x))


def _real(q: Quadrature, what: str) -> float:
    limit = max(IMAG_TOL, 64 * _EPS * math.exp(min(q.log_scale, 700)))
    if abs(q.value.imag) > limit:
        raise ConvergenceError(f"{what}: imaginary residue {abs(q.value.imag):.3g} exceeds {limit:.3g}",
                               (q.value,))
    return float(q.value.real)


def _check_time(model: PGFModel, t) -> float:
    if t < 0:
        raise DomainError(f"time must be nonnegative, got {t}")
    if model.time_kind is TimeKind.DISCRETE:
        if t != int(t):
            raise DomainError(f"discrete-time model needs integer time, got {t}")
        return int(t)
    return float(t)


def _pw(a, logz):
    """a * log z with the convention 0 * log 0 = 0."""
    if not a:
        return 0.0
    with np.errstate(invalid="ignore"):
        return a * logz


def _radius_cap(model: PGFModel) -> float:
    return min(model.radius * (1 - 1e-3), 1e3)


# F_n


def F_n(model: PGFModel, n: int, x: int, t) -> float:
    """``(-1)^n (1/2 pi i) oint_{Gamma_{0,1}} (1-w)^{-n} w^{-(x-n+1)} M(w)^t dw``.

    ``F_0(x, t)`` is the law of a single free particle's displacement. For
    ``n <= 0`` there is no pole at ``w = 1`` and the loop only has to enclose
    the origin.
    """
    t = _check_time(model, t)
    return _F_n_cached(model, int(n), int(x), t)


@lru_cache(maxsize=200_000)
def _F_n_cached(model, n, x, t):
    if n <= 0 and x - n < 0:
        return 0.0

    def logphi(w):
        with np.errstate(divide="ignore"):
            return _pw(-n, np.log(1 - w)) - _pw(x - n + 1, np.log(w)) + _pw(t, model.log_M(w))

    cap = _radius_cap(model)
    sign = -1.0 if n % 2 else 1.0
    if n <= 0:
        r = best_radius(logphi, 1e-3, cap)
        q = contour_integral(logphi, 0j, r)
        return sign * _real(q, "F_n")
    if cap > 1 + 2e-3:
        r = best_radius(logphi, 1 + 1e-3, cap)
        q = contour_integral(logphi, 0j, r)
        return sign * _real(q, "F_n")
    if model.radius <= 1:
        raise DomainError("no admissible loop around 0 and 1: radius of M is at most 1")
    # loop around 0 plus a small loop around 1
    delta = 0.5 * (model.radius - 1)
    q0 = contour_integral(logphi, 0j, 0.5)
    q1 = contour_integral(logphi, 1 + 0j, delta)
    return sign * (_real(q0, "F_n") + _real(q1, "F_n"))


def series_F_n(model: PGFModel, n: int, x: int, t) -> float:
    """F_n from the power-series coefficients m_k of M(w)^t.

    For n > 0 the residue at infinity gives ``sum_j C(n+j-1, j) m_{x+j}``;
    for n <= 0 it is ``(-1)^n [w^{x-n}] (1-w)^{-n} M^t``. Used as an
    independent route to the quadrature.
    """
    t = _check_time(model, t)
    m = power_series(model, t)
    if n > 0:
        j = np.arange(max(0, -x), max(0, len(m) - x))
        if len(j) == 0:
            return 0.0
        return float(np.sum(binom(n + j - 1, j) * m[x + j]))
    k, a = x - n, -n
    if k < 0:
        return 0.0
    total = 0.0
    for j in range(0, min(a, k) + 1):
        if k - j < len(m):
            total += binom(a, j) * (-1) ** j * m[k - j]
    return float((-1) ** a * total)


def power_series(model: PGFModel, t, tail: float = 1e-16) -> np.ndarray:
    """Coefficients of M(w)^t (the free-particle law at time t)."""
    t = _check_time(model, t)
    if model.kind is ModelKind.CONTINUOUS_POISSON:
        if t == 0:
            return np.array([1.0])
        scaled = PGFModel.continuous_poisson(model.rate * t, model.pmf)
        return series_coefficients(scaled, tail).coeffs
    base = series_coefficients(model, tail).coeffs
    out = np.array([1.0])
    for _ in range(int(t)):
        out = np.convolve(out, base)
    return out


# S and S-bar kernels


def S_kernel(model: PGFModel, t, n: int, z1: int, z2: int, normalized: bool = True) -> float:
    """``(1/2 pi i) oint_{Gamma_0} (1-w)^n / (2^{d} w^{n+1+d}) (M(w)/M(1/2))^t dw``, d = z2 - z1.

    With ``normalized=False`` the factor ``M(1/2)^{-t}`` is dropped. The
    value depends on z1, z2 only through their difference.
    """
    t = _check_time(model, t)
    return _S_cached(model, t, int(n), int(z2) - int(z1), bool(normalized))


@lru_cache(maxsize=500_000)
def _S_cached(model, t, n, d, normalized):
    k = n + d
    if k < 0:
        return 0.0
    shift = float(np.real(model.log_M(0.5))) if normalized else 0.0

    def logphi(w):
        with np.errstate(divide="ignore"):
            return _pw(n, np.log(1 - w)) - d * math.log(2) - (k + 1) * np.log(w) + _pw(t, model.log_M(w) - shift)

    hi = _radius_cap(model)
    if n < 0:
        hi = min(hi, 1 - 1e-3)
    r = best_radius(logphi, 1e-3, hi)
    if _max_log_on_circle(logphi, r) < math.log(TINY) - 5:
        return 0.0
    return _real(contour_integral(logphi, 0j, r), "S_kernel")


def sbar_radius_limit(model: PGFModel, t, n: int, d: int) -> float:
    """Largest admissible radius for the S-bar loop around the origin."""
    limit = math.inf
    if d + n - 1 < 0:
        limit = 1.0
    if t:
        for zeta in model.zeros():
            limit = min(limit, abs(1 - zeta))
        if model.time_kind is TimeKind.DISCRETE and t < 0:
            for pole in model.poles():
                limit = min(limit, abs(1 - pole))
    return min(limit * (1 - 1e-3), 1e3)


def Sbar_kernel(model: PGFModel, t, n: int, z1: int, z2: int, normalized: bool = True) -> float:
    """``(1/2 pi i) oint_{Gamma_0} (1-w)^{d+n-1} 2^{d} w^{-n} (M(1-w)/M(1/2))^{-t} dw``, d = z2 - z1."""
    t = _check_time(model, t)
    return _Sbar_cached(model, t, int(n), int(z2) - int(z1), bool(normalized))


@lru_cache(maxsize=500_000)
def _Sbar_cached(model, t, n, d, normalized):
    if n - 1 < 0:
        return 0.0
    shift = float(np.real(model.log_M(0.5))) if normalized else 0.0

    def logphi(w):
        with np.errstate(divide="ignore"):
            return (_pw(d + n - 1, np.log(1 - w)) + d * math.log(2) - _pw(n, np.log(w))
                    - _pw(t, model.log_M(1 - w) - shift))

    hi = sbar_radius_limit(model, t, n, d)
    r = best_radius(logphi, 1e-3, hi)
    if t and model.kind in (ModelKind.BERNOULLI, ModelKind.DISCRETE_PMF):
        w = r * np.exp(2j * np.pi * np.arange(256) / 256)
        if np.min(np.abs(model.M(1 - w))) < 1e-12:
            raise DomainError("M(1 - w) vanishes on the S-bar contour")
    if _max_log_on_circle(logphi, r) < math.log(TINY) - 5:
        return 0.0
    return _real(contour_integral(logphi, 0j, r), "Sbar_kernel")


def clear_caches() -> None:
    _F_n_cached.cache_clear()
    _S_cached.cache_clear()
    _Sbar_cached.cache_clear()
