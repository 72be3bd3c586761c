"""Jump-law generating functions and the quantities derived from them.

A model is the probability generating function ``M(w)`` of the displacement
of an unobstructed particle during one time unit. For discrete time the
n-step law has generating function ``M(w)**t``; for continuous time ``M`` is
compound Poisson and ``M(w)**t = exp(t * lam * (G_Z(w) - 1))`` for real t.

Everything downstream (KPZ coefficients, kernels, dynamics) is derived from
the normalized function ``gamma(w) = M((1 - w)/2) / M(1/2)``.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import jsonschema
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import AssumptionError, ConfigError, ConvergenceError, DomainError

TAIL_MASS = 1e-14
NORMALIZATION_TOL = 1e-12


class ModelKind(str, Enum):
    CONTINUOUS_POISSON = "continuous_poisson"
    BERNOULLI = "bernoulli"
    GEOMETRIC = "geometric"
    DISCRETE_PMF = "discrete_pmf"


class TimeKind(str, Enum):
    DISCRETE = "discrete"
    CONTINUOUS = "continuous"


@dataclass(frozen=True)
class PGFModel:
    """Generating function of the one-unit jump law.

    Use the constructors :meth:`continuous_poisson`, :meth:`bernoulli`,
    :meth:`geometric` and :meth:`discrete_pmf` rather than the raw fields.

    ``pmf`` is the law of a single compound-Poisson jump for continuous
    models and the law of the one-step displacement for ``DISCRETE_PMF``.
    ``tail_ratio`` > 0 extends a discrete pmf geometrically beyond its last
    listed entry: ``P(Y = K + j) = pmf[K] * tail_ratio**j``.
    """

    kind: ModelKind
    rate: float = 0.0
    p: float = 0.0
    alpha: float = 0.0
    pmf: tuple[float, ...] = ()
    tail_ratio: float = 0.0

    def __post_init__(self):
        kind = ModelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "pmf", tuple(float(c) for c in self.pmf))
        if kind is ModelKind.CONTINUOUS_POISSON:
            if not self.rate > 0:
                raise ConfigError(f"jump rate must be positive, got {self.rate}")
            if not self.pmf:
                object.__setattr__(self, "pmf", (0.0, 1.0))
            _check_pmf(self.pmf, 0.0)
        elif kind is ModelKind.BERNOULLI:
            if not 0 < self.p < 1:
                raise ConfigError(f"Bernoulli parameter must lie in (0, 1), got {self.p}")
        elif kind is ModelKind.GEOMETRIC:
            if not 0 < self.alpha < 1:
                raise ConfigError(f"geometric parameter must lie in (0, 1), got {self.alpha}")
        else:
            if not self.pmf:
                raise ConfigError("discrete_pmf needs a non-empty pmf")
            if not 0 <= self.tail_ratio < 1:
                raise ConfigError(f"tail_ratio must lie in [0, 1), got {self.tail_ratio}")
            _check_pmf(self.pmf, self.tail_ratio)

    # constructors

    @classmethod
    def continuous_poisson(cls, beta: float = 1.0, jump_pmf=None) -> "PGFModel":
        """Compound Poisson with rate ``beta``; unit jumps unless ``jump_pmf`` is given."""
        return cls(ModelKind.CONTINUOUS_POISSON, rate=float(beta), pmf=tuple(jump_pmf or (0.0, 1.0)))

    @classmethod
    def bernoulli(cls, p: float) -> "PGFModel":
        return cls(ModelKind.BERNOULLI, p=float(p))

    @classmethod
    def geometric(cls, alpha: float) -> "PGFModel":
        return cls(ModelKind.GEOMETRIC, alpha=float(alpha))

    @classmethod
    def discrete_pmf(cls, pmf, tail_ratio: float = 0.0) -> "PGFModel":
        return cls(ModelKind.DISCRETE_PMF, pmf=tuple(pmf), tail_ratio=float(tail_ratio))

    # basic properties

    @property
    def time_kind(self) -> TimeKind:
        if self.kind is ModelKind.CONTINUOUS_POISSON:
            return TimeKind.CONTINUOUS
        return TimeKind.DISCRETE

    @property
    def radius(self) -> float:
        """Radius of convergence of the power series of M."""
        if self.kind is ModelKind.GEOMETRIC:
            return 1.0 / self.alpha
        if self.kind is ModelKind.DISCRETE_PMF and self.tail_ratio > 0:
            return 1.0 / self.tail_ratio
        return math.inf

    @property
    def label(self) -> str:
        if self.kind is ModelKind.CONTINUOUS_POISSON:
            if self.pmf == (0.0, 1.0):
                return f"poisson(beta={self.rate:g})"
            return f"compound_poisson(rate={self.rate:g})"
        if self.kind is ModelKind.BERNOULLI:
            return f"bernoulli(p={self.p:g})"
        if self.kind is ModelKind.GEOMETRIC:
            return f"geometric(alpha={self.alpha:g})"
        return f"pmf(support={len(self.pmf)}, tail={self.tail_ratio:g})"

    # closed forms (analytic continuation, no domain check)

    def M(self, w):
        """Closed-form M(w); valid as an analytic continuation beyond the radius."""
        w = np.asarray(w, dtype=complex)
        if self.kind is ModelKind.CONTINUOUS_POISSON:
            return np.exp(self.log_M(w))
        if self.kind is ModelKind.BERNOULLI:
            return 1 - self.p + self.p * w
        if self.kind is ModelKind.GEOMETRIC:
            return (1 - self.alpha) / (1 - self.alpha * w)
        return _pmf_closed_form(self.pmf, self.tail_ratio, w)

    def log_M(self, w):
        """A branch of log M(w).

        For continuous time this is the analytic exponent ``lam*(G_Z(w)-1)``,
        so ``exp(t*log_M)`` is single valued for real t. Discrete models use
        the principal branch, which is enough because t is an integer there.
        """
        w = np.asarray(w, dtype=complex)
        if self.kind is ModelKind.CONTINUOUS_POISSON:
            return self.rate * (_polyval(self.pmf, w) - 1)
        if self.kind is ModelKind.GEOMETRIC:
            return math.log(1 - self.alpha) - np.log(1 - self.alpha * w)
        with np.errstate(divide="ignore"):
            return np.log(self.M(w))

    def zeros(self) -> np.ndarray:
        """Zeros of the closed form of M in the complex plane."""
        if self.kind is ModelKind.BERNOULLI:
            return np.array([-(1 - self.p) / self.p], dtype=complex)
        if self.kind is ModelKind.DISCRETE_PMF:
            num = _pmf_numerator(self.pmf, self.tail_ratio)
            return np.roots(num[::-1]).astype(complex)
        return np.zeros(0, dtype=complex)

    def poles(self) -> np.ndarray:
        if self.kind is ModelKind.GEOMETRIC:
            return np.array([1 / self.alpha], dtype=complex)
        if self.kind is ModelKind.DISCRETE_PMF and self.tail_ratio > 0:
            return np.array([1 / self.tail_ratio], dtype=complex)
        return np.zeros(0, dtype=complex)

    # serialization

    def to_dict(self) -> dict:
        if self.kind is ModelKind.CONTINUOUS_POISSON:
            out = {"kind": self.kind.value, "params": {"rate": self.rate}}
            if self.pmf != (0.0, 1.0):
                out["pmf"] = list(self.pmf)
            return out
        if self.kind is ModelKind.BERNOULLI:
            return {"kind": self.kind.value, "params": {"p": self.p}}
        if self.kind is ModelKind.GEOMETRIC:
            return {"kind": self.kind.value, "params": {"alpha": self.alpha}}
        return {"kind": self.kind.value, "params": {"tail_ratio": self.tail_ratio}, "pmf": list(self.pmf)}


def _check_pmf(pmf, tail_ratio):
    arr = np.asarray(pmf, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ConfigError("pmf entries must be finite and nonnegative")
    total = arr.sum() + (arr[-1] * tail_ratio / (1 - tail_ratio) if tail_ratio else 0.0)
    if abs(total - 1) > NORMALIZATION_TOL:
        raise ConfigError(f"pmf must sum to 1 (got {total!r})")


def _polyval(coeffs, w):
    # coeffs in increasing degree
    return np.polyval(np.asarray(coeffs, dtype=float)[::-1], w)


def _pmf_closed_form(pmf, rho, w):
    if not rho:
        return _polyval(pmf, w)
    head = _polyval(pmf[:-1], w) if len(pmf) > 1 else 0.0
    k = len(pmf) - 1
    return head + pmf[-1] * w**k / (1 - rho * w)


def _pmf_numerator(pmf, rho):
    """Polynomial N with M = N(w) / (1 - rho w), increasing degree."""
    coeffs = np.asarray(pmf, dtype=float)
    if not rho:
        return coeffs
    head = np.zeros(len(coeffs) + 1)
    head[: len(coeffs) - 1] = coeffs[:-1]
    num = head.copy()
    num[1:] -= rho * head[:-1]
    num[len(coeffs) - 1] += coeffs[-1]
    return np.trim_zeros(num, "b")


# evaluation with domain checks


def eval_M(model: PGFModel, w: complex) -> complex:
    """M(w) inside the disc of convergence of its power series."""
    if not abs(w) < model.radius:
        raise DomainError(f"|w|={abs(w):g} is outside the radius {model.radius:g}")
    return complex(model.M(w))


def eval_gamma(model: PGFModel, w: complex) -> complex:
    """gamma(w) = M((1-w)/2) / M(1/2)."""
    if not abs(1 - w) < 2 * model.radius:
        raise DomainError(f"|1-w|={abs(1 - w):g} needs to be below {2 * model.radius:g}")
    if w == 0:
        return 1.0 + 0j
    return complex(model.M(0.5 * (1 - w)) / model.M(0.5))


# series coefficients


@dataclass(frozen=True)
class SeriesCoefficients:
    coeffs: np.ndarray
    truncated_at: int  # index of the last kept coefficient
    tail_mass: float


def series_coefficients(model: PGFModel, tail: float = TAIL_MASS, max_terms: int = 1_000_000) -> SeriesCoefficients:
    """Power-series coefficients of M truncated once the remaining mass is below ``tail``."""
    if model.kind is ModelKind.BERNOULLI:
        c = np.array([1 - model.p, model.p])
    elif model.kind is ModelKind.GEOMETRIC:
        k = int(math.ceil(math.log(tail) / math.log(model.alpha)))
        c = (1 - model.alpha) * model.alpha ** np.arange(k + 1)
    elif model.kind is ModelKind.DISCRETE_PMF:
        base = np.asarray(model.pmf)
        if model.tail_ratio:
            rho = model.tail_ratio
            extra = int(math.ceil(math.log(tail * (1 - rho) / max(base[-1], 1e-300)) / math.log(rho)))
            extra = max(extra, 0)
            if extra > max_terms:
                raise ConvergenceError("geometric tail too heavy to truncate", (extra,))
            c = np.concatenate([base, base[-1] * rho ** np.arange(1, extra + 1)])
        else:
            c = base.copy()
    else:
        c = _compound_poisson_series(model.rate, np.asarray(model.pmf), tail, max_terms)
    total = c.sum()
    return SeriesCoefficients(c, len(c) - 1, max(0.0, 1.0 - total))


def _compound_poisson_series(lam, fz, tail, max_terms):
    # Panjer recursion for exp(lam * (G_Z - 1))
    out = [math.exp(-lam * (1 - fz[0]))]
    js = np.arange(1, len(fz))
    mass = out[0]
    k = 0
    while 1 - mass >= tail:
        k += 1
        if k > max_terms:
            raise ConvergenceError("compound Poisson series did not reach the tail tolerance", (mass,))
        jj = js[js <= k]
        prev = np.array([out[k - j] for j in jj])
        val = lam / k * float(np.sum(jj * fz[jj] * prev))
        out.append(val)
        mass += val
        if k > 50 and val == 0.0:
            break
    return np.array(out)


# gamma derivatives and KPZ coefficients


@dataclass(frozen=True)
class GammaDerivs:
    """First three derivatives of gamma at 0 and the cubic combination ``denom``."""

    g1: float
    g2: float
    g3: float
    denom: float = field(init=False)

    def __post_init__(self):
        g1, g2, g3 = self.g1, self.g2, self.g3
        object.__setattr__(self, "denom", g3 - 3 * g2 * g1 + 2 * g1**3 - 2 * g1)

    @property
    def curvature(self) -> float:
        """g2 - g1**2 - g1, which is nonnegative for every jump law."""
        return self.g2 - self.g1**2 - self.g1

    @property
    def scale(self) -> float:
        g1, g2, g3 = self.g1, self.g2, self.g3
        return max(1.0, abs(g3), abs(3 * g2 * g1), abs(2 * g1**3), abs(2 * g1))


def gamma_derivs(model: PGFModel) -> GammaDerivs:
    """Derivatives of gamma at 0 from closed forms where available."""
    if model.kind is ModelKind.CONTINUOUS_POISSON:
        fz = np.asarray(model.pmf)
        k = np.arange(len(fz), dtype=float)
        d1 = float(np.sum(k * fz * 0.5 ** np.maximum(k - 1, 0)))
        d2 = float(np.sum(k * (k - 1) * fz * 0.5 ** np.maximum(k - 2, 0)))
        d3 = float(np.sum(k * (k - 1) * (k - 2) * fz * 0.5 ** np.maximum(k - 3, 0)))
        lam = model.rate
        p1, p2, p3 = -lam * d1 / 2, lam * d2 / 4, -lam * d3 / 8
        return GammaDerivs(p1, p2 + p1**2, p3 + 3 * p2 * p1 + p1**3)
    if model.kind is ModelKind.BERNOULLI:
        c = model.p / (2 - model.p)
        return GammaDerivs(-c, 0.0, 0.0)
    if model.kind is ModelKind.GEOMETRIC:
        c = model.alpha / (2 - model.alpha)
        return GammaDerivs(-c, 2 * c**2, -6 * c**3)
    return moment_gamma_derivs(model)


def moment_gamma_derivs(model: PGFModel) -> GammaDerivs:
    """Derivatives of gamma from weighted factorial moments of the jump law.

    gamma^(n)(0) = (-1)^n E[Y(Y-1)...(Y-n+1) 2^-Y] / M(1/2).
    """
    c = series_coefficients(model).coeffs
    k = np.arange(len(c), dtype=float)
    weights = c * 0.5**k
    m_half = weights.sum()
    f1 = np.sum(k * weights)
    f2 = np.sum(k * (k - 1) * weights)
    f3 = np.sum(k * (k - 1) * (k - 2) * weights)
    return GammaDerivs(float(-f1 / m_half), float(f2 / m_half), float(-f3 / m_half))


class ImasReport(NamedTuple):
    passed: bool
    denom: float


def check_assumption_imas(model: PGFModel) -> ImasReport:
    """Positivity of the cubic combination that fixes the time scale D."""
    gd = gamma_derivs(model)
    return ImasReport(bool(gd.denom > 1e-12 * gd.scale), gd.denom)


@dataclass(frozen=True)
class ScalingCoeffs:
    D: float
    E: float
    F: float
    G: float
    drift: float


def scaling_coeffs(model: PGFModel) -> ScalingCoeffs:
    """KPZ scaling coefficients (time, label, space shifts and height drift)."""
    gd = gamma_derivs(model)
    if not gd.denom > 1e-12 * gd.scale:
        raise AssumptionError(f"cubic combination must be positive, got {gd.denom:.6g} for {model.label}")
    den = gd.denom
    D = 2 / den
    E = gd.curvature / den
    F = (gd.g1**2 - gd.g2 - gd.g1) / den
    G = 2 * (gd.g1**2 - gd.g2) / den
    drift = 2 * gd.curvature / den
    tol = 1e-12 * max(1.0, abs(D), abs(E), abs(F))
    assert abs(E + F + gd.g1 * D) <= tol, "E + F != -g1 D"
    assert abs(G - (F - E)) <= tol, "G != F - E"
    return ScalingCoeffs(D, E, F, G, drift)


# contour-condition check


@dataclass(frozen=True)
class LimconReport:
    max_condi10: float
    max_condi11: float
    theta10: float
    theta11: float
    grid_size: int
    passed: bool
    warnings: tuple[str, ...] = ()


def condi10(model: PGFModel, theta, coeffs: ScalingCoeffs | None = None):
    """E log|2 - e^{i theta}| + D log|gamma(1 - e^{i theta})|."""
    sc = coeffs or scaling_coeffs(model)
    e = np.exp(1j * np.asarray(theta, dtype=float))
    return sc.E * np.log(np.abs(2 - e)) + sc.D * _log_abs_gamma(model, 1 - e)


def condi11(model: PGFModel, theta, coeffs: ScalingCoeffs | None = None):
    """F log|2 - e^{i theta}| - D log|gamma(e^{i theta} - 1)|."""
    sc = coeffs or scaling_coeffs(model)
    e = np.exp(1j * np.asarray(theta, dtype=float))
    return sc.F * np.log(np.abs(2 - e)) - sc.D * _log_abs_gamma(model, e - 1)


def _log_abs_gamma(model, w):
    with np.errstate(divide="ignore"):
        return np.real(model.log_M(0.5 * (1 - w))) - math.log(abs(complex(model.M(0.5))))


def check_assumption_limcon(model: PGFModel, grid_size: int = 512) -> LimconReport:
    """Grid check, with local refinement, of the two contour inequalities.

    theta ranges over [-pi, -pi/3) U (pi/3, pi]. A passing report is a
    numerical verification on the grid, not a proof.
    """
    if grid_size < 64:
        raise ConfigError("grid_size must be at least 64")
    if not check_assumption_imas(model).passed:
        raise AssumptionError("the cubic combination is not positive")
    sc = scaling_coeffs(model)
    half = grid_size // 2
    pos = np.pi / 3 + (2 * np.pi / 3) * np.arange(1, half + 1) / half
    theta = np.concatenate([-pos[::-1], pos])
    notes = []
    if 1.5 >= model.radius:
        notes.append(
            f"|(2 - e^(i theta))/2| reaches 1.5 >= radius {model.radius:g}; "
            "evaluated through the analytic continuation of the closed form"
        )
    results = []
    for fn in (condi10, condi11):
        vals = fn(model, theta, sc)
        bad = ~np.isfinite(vals)
        if np.any(bad & (vals > 0)) or np.any(np.isnan(vals)):
            where = float(theta[np.argmax(bad)])
            notes.append(f"{fn.__name__}: non-finite value at theta={where:.6g}")
            results.append((math.inf, where))
            continue
        i = int(np.argmax(vals))
        best, at = float(vals[i]), float(theta[i])
        step = (2 * np.pi / 3) / half
        lo, hi = at - step, at + step
        if at > 0:
            lo, hi = max(lo, np.pi / 3 + 1e-12), min(hi, np.pi)
        else:
            lo, hi = max(lo, -np.pi), min(hi, -np.pi / 3 - 1e-12)
        res = minimize_scalar(lambda th: -float(fn(model, th, sc)), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        if res.success and -res.fun > best:
            best, at = float(-res.fun), float(res.x)
        results.append((best, at))
    (m10, t10), (m11, t11) = results
    return LimconReport(m10, m11, t10, t11, grid_size, bool(m10 < 0 and m11 < 0), tuple(notes))


# factorization into elementary Bernoulli steps


def bernoulli_factors(model: PGFModel, tol: float = 1e-10) -> tuple[float, ...] | None:
    """Write M as a product of factors (1 - q + q w), if possible.

    Returns the q's, or None when M has a non-real or positive root or an
    infinite support. A product of Bernoulli factors is realized by
    successive sequential-update substeps of the exclusion dynamics.
    """
    if model.kind is ModelKind.BERNOULLI:
        return (model.p,)
    if model.kind is not ModelKind.DISCRETE_PMF or model.tail_ratio:
        return None
    coeffs = np.trim_zeros(np.asarray(model.pmf, dtype=float), "b")
    if len(coeffs) == 1:
        return ()
    roots = np.roots(coeffs[::-1])
    if np.any(np.abs(roots.imag) > tol * (1 + np.abs(roots.real))) or np.any(roots.real > tol):
        return None
    qs = tuple(sorted(float(1 / (1 - min(r.real, 0.0))) for r in roots))
    rebuilt = np.array([1.0])
    for q in qs:
        rebuilt = np.convolve(rebuilt, [1 - q, q])
    if np.max(np.abs(rebuilt - coeffs)) > 1e-9:
        return None
    return qs


# JSON loading

MODEL_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": [k.value for k in ModelKind]},
        "params": {"type": "object"},
        "pmf": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "continuous_poisson"}}},
            "then": {
                "properties": {
                    "params": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "beta": {"type": "number", "exclusiveMinimum": 0},
                            "rate": {"type": "number", "exclusiveMinimum": 0},
                        },
                        "minProperties": 1,
                        "maxProperties": 1,
                    }
                },
                "required": ["params"],
            },
        },
        {
            "if": {"properties": {"kind": {"const": "bernoulli"}}},
            "then": {
                "properties": {
                    "params": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["p"],
                        "properties": {"p": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
                    }
                },
                "required": ["params"],
            },
        },
        {
            "if": {"properties": {"kind": {"const": "geometric"}}},
            "then": {
                "properties": {
                    "params": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["alpha"],
                        "properties": {"alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
                    }
                },
                "required": ["params"],
            },
        },
        {
            "if": {"properties": {"kind": {"const": "discrete_pmf"}}},
            "then": {
                "properties": {
                    "params": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {"tail_ratio": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}},
                    }
                },
                "required": ["pmf"],
            },
        },
    ],
}


def model_from_dict(data: dict) -> PGFModel:
    try:
        jsonschema.validate(data, MODEL_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid model definition: {exc.message}") from exc
    kind = ModelKind(data["kind"])
    params = data.get("params", {})
    if kind is ModelKind.CONTINUOUS_POISSON:
        rate = params.get("beta", params.get("rate"))
        return PGFModel.continuous_poisson(rate, data.get("pmf"))
    if kind is ModelKind.BERNOULLI:
        return PGFModel.bernoulli(params["p"])
    if kind is ModelKind.GEOMETRIC:
        return PGFModel.geometric(params["alpha"])
    return PGFModel.discrete_pmf(data["pmf"], params.get("tail_ratio", 0.0))


def load_model(path) -> PGFModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(data)


def model_report(model: PGFModel, grid_size: int = 512) -> dict:
    """Normalization, derivative and assumption summary used by ``model check``."""
    series = series_coefficients(model)
    gd = gamma_derivs(model)
    imas = check_assumption_imas(model)
    report = {
        "model": model.to_dict(),
        "label": model.label,
        "time_kind": model.time_kind.value,
        "radius": None if math.isinf(model.radius) else model.radius,
        "normalization": {
            "sum": float(series.coeffs.sum()),
            "truncated_at": series.truncated_at,
            "tail_mass": series.tail_mass,
            "min_coefficient": float(series.coeffs.min()),
        },
        "gamma_derivs": {"g1": gd.g1, "g2": gd.g2, "g3": gd.g3, "denom": gd.denom, "curvature": gd.curvature},
        "cubic_positivity": {"passed": imas.passed, "denom": imas.denom},
    }
    if imas.passed:
        sc = scaling_coeffs(model)
        report["scaling_coeffs"] = {"D": sc.D, "E": sc.E, "F": sc.F, "G": sc.G, "drift": sc.drift}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lim = check_assumption_limcon(model, grid_size)
        report["contour_conditions"] = {
            "max_condi10": lim.max_condi10,
            "max_condi11": lim.max_condi11,
            "theta10": lim.theta10,
            "theta11": lim.theta11,
            "passed": lim.passed,
            "warnings": list(lim.warnings),
        }
    else:
        report["contour_conditions"] = {"passed": False, "warnings": ["skipped: cubic combination not positive"]}
    return report
