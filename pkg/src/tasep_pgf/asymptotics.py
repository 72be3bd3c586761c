"""Limit kernels of the KPZ fixed point and the rescaled discrete kernels.

The limit kernel is

    S_{t,x}(v, u) = t^{-1/3} exp(2x^3/(3t^2) - (v-u)x/t) Ai(-t^{-1/3}(v-u) + t^{-4/3}x^2)
                  = (1/2 pi i) int exp(t w^3/3 + x w^2 + (v-u) w) dw        (t > 0)

over a contour from e^{-i pi/3} infinity to e^{i pi/3} infinity, extended
to t < 0 by S_{-t,x}(v, u) = S_{t,x}(u, v). Under the 1:2:3 scaling
``t = D eps^{-3/2} T``, ``n ~ E eps^{-3/2} T - x/eps``,
``z ~ G eps^{-3/2} T + 2x/eps + u/sqrt(eps)`` the discrete kernels ``S`` and
``Sbar`` (divided by sqrt(eps)) converge to ``S_{-T,x}`` and ``S_{-T,-x}``;
the hitting kernel converges to a Brownian first-passage expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .coeffx import S_kernel, Sbar_kernel
from .errors import ConfigError, ConvergenceError, DomainError
from .pathkernel import InitialCondition, Sbar_epi
from .pgf_model import PGFModel, ScalingCoeffs, TimeKind, scaling_coeffs
from .simulator import block_rng

AIRY_RANGE = 30.0
AIRY_SERIES_MAX = 5.0
AI0 = 1.0 / (3 ** (2 / 3) * math.gamma(2 / 3))
AIP0 = 1.0 / (3 ** (1 / 3) * math.gamma(1 / 3))


# Airy function


def airy_series(z: float) -> float:
    """Maclaurin two-series Ai(z) = Ai(0) f(z) + Ai'(0) g(z)."""
    z = float(z)
    z3 = z**3
    f = tf = 1.0
    g = tg = z
    k = 0
    while True:
        k += 1
        tf *= z3 / ((3 * k - 1) * (3 * k))
        tg *= z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if k > 3 and abs(tf) + abs(tg) <= 1e-18 * (abs(f) + abs(g)):
            return AI0 * f - AIP0 * g
        if k > 500:
            raise ConvergenceError("Airy series did not converge", (AI0 * f - AIP0 * g,))


@dataclass(frozen=True)
class CubicIntegral:
    """``exp(log_scale) * mantissa`` for an Airy-type contour integral."""

    log_scale: float
    mantissa: float
    points: int

    @property
    def value(self) -> float:
        if self.mantissa == 0.0:
            return 0.0
        return math.copysign(math.exp(self.log_scale + math.log(abs(self.mantissa))), self.mantissa)


def cubic_contour_integral(t: float, a2: float, a1: float, tol: float = 1e-14) -> CubicIntegral:
    """(1/2 pi i) int exp(t w^3/3 + a2 w^2 + a1 w) dw over the Airy contour, t > 0.

    The contour is deformed to the vertical line Re w = c with
    ``t c + a2 > 0``, along which ``|integrand| = exp(phi(c) - (t c + a2) rho^2)``.
    When the phase has a real saddle we put c there (the steepest-descent
    direction is vertical); otherwise c sits just right of the inflection
    point. The trapezoidal rule on the line is halved until converged.
    """
    if not t > 0:
        raise DomainError("cubic contour integral needs t > 0")
    disc = a2 * a2 - t * a1
    if disc > 0:
        c = (-a2 + math.sqrt(disc)) / t
        kappa = math.sqrt(disc)
        if kappa < 0.3 * t ** (1 / 3):
            kappa = 0.3 * t ** (1 / 3)
            c = (kappa - a2) / t
    else:
        kappa = 0.3 * t ** (1 / 3)
        c = (kappa - a2) / t
    phi_c = t * c**3 / 3 + a2 * c * c + a1 * c
    rmax = math.sqrt(46.0 / kappa)
    slope = t * (c * c + rmax * rmax) + 2 * abs(a2) * math.hypot(c, rmax) + abs(a1)
    h = min(0.1, 0.5 / slope)

    def integrand(rho):
        w = c + 1j * rho
        return np.real(np.exp(t * w**3 / 3 + a2 * w * w + a1 * w - phi_c))

    n = int(math.ceil(rmax / h))
    rho = np.linspace(0.0, rmax, n + 1)
    h = rho[1] - rho[0]
    vals = integrand(rho)
    est = h * (vals.sum() - 0.5 * vals[0])
    for _ in range(12):
        mids = rho[:-1] + 0.5 * h
        new_vals = integrand(mids)
        new = 0.5 * est + 0.5 * h * new_vals.sum()
        rho = np.sort(np.concatenate([rho, mids]))
        h *= 0.5
        if abs(new - est) <= tol * max(1.0, abs(new)):
            return CubicIntegral(phi_c, new / math.pi, rho.size)
        est = new
    raise ConvergenceError("Airy-type line integral did not converge", (est / math.pi,))


def airy_contour(z: float) -> float:
    """Ai(z) from its defining contour integral."""
    return cubic_contour_integral(1.0, 0.0, -float(z)).value


def airy(z: float) -> float:
    """Ai(z) for |z| <= 30, series near the origin and contour quadrature beyond |z| = 5."""
    z = float(z)
    if not abs(z) <= AIRY_RANGE:
        raise DomainError(f"Airy evaluation supports |z| <= {AIRY_RANGE:g}, got {z}")
    if abs(z) <= AIRY_SERIES_MAX:
        return airy_series(z)
    return airy_contour(z)


def _log_airy(z: float) -> tuple[float, float]:
    """(log|Ai(z)|, sign) without overflow, any z >= -30."""
    if z > AIRY_SERIES_MAX:
        ci = cubic_contour_integral(1.0, 0.0, -z)
        return ci.log_scale + math.log(abs(ci.mantissa)), math.copysign(1.0, ci.mantissa)
    a = airy(z)
    if a == 0.0:
        return -math.inf, 0.0
    return math.log(abs(a)), math.copysign(1.0, a)


# limit kernel


def S_limit(t_cap: float, x_cap: float, v: float, u: float) -> float:
    """S_{t,x}(v, u) in closed form; negative t through S_{-t,x}(v,u) = S_{t,x}(u,v)."""
    if t_cap == 0:
        raise DomainError("S_limit needs t != 0")
    if t_cap < 0:
        t_cap, v, u = -t_cap, u, v
    c = v - u
    arg = -(t_cap ** (-1 / 3)) * c + t_cap ** (-4 / 3) * x_cap * x_cap
    log_pre = -math.log(t_cap) / 3 + 2 * x_cap**3 / (3 * t_cap**2) - c * x_cap / t_cap
    log_ai, sign = _log_airy(arg)
    if sign == 0.0:
        return 0.0
    total = log_pre + log_ai
    if total > 700:
        raise ConvergenceError(f"S_limit overflows (log value {total:.1f})", (total,))
    return sign * math.exp(total)


def S_limit_contour(t_cap: float, x_cap: float, v: float, u: float) -> float:
    """S_{t,x}(v, u) from its contour integral (independent of the Airy shift identity)."""
    if t_cap < 0:
        t_cap, v, u = -t_cap, u, v
    return cubic_contour_integral(t_cap, x_cap, v - u).value


# scaling frame


@dataclass(frozen=True)
class ScalingFrame:
    """Integer lattice coordinates attached to macroscopic (T, x, a, u, v).

    ``t`` is rounded (half to even) for discrete time and kept real for
    continuous time; ``n``, ``z`` and ``y`` are always rounded. The
    ``effective`` coordinates are the macroscopic values that the rounded
    integers represent exactly.
    """

    epsilon: float
    t_cap: float
    x_cap: float
    a_cap: float
    u: float
    v: float
    coeffs: ScalingCoeffs
    time_kind: TimeKind
    t: float = field(init=False)
    n: int = field(init=False)
    a: int = field(init=False)
    z: int = field(init=False)
    y: int = field(init=False)
    nominal: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        eps, sc = self.epsilon, self.coeffs
        if not eps > 0:
            raise DomainError("epsilon must be positive")
        tau = eps**-1.5 * self.t_cap
        nominal = {
            "t": sc.D * tau,
            "n": sc.E * tau - self.x_cap / eps - 0.5 * self.a_cap / math.sqrt(eps) + 1,
            "a": 2 * self.x_cap / eps - 2,
            "z": sc.G * tau + 2 * self.x_cap / eps + (self.u + self.a_cap) / math.sqrt(eps) - 2,
            "y": self.v / math.sqrt(eps),
        }
        t = nominal["t"] if self.time_kind is TimeKind.CONTINUOUS else int(round(nominal["t"]))
        n = int(round(nominal["n"]))
        if not t > 0:
            raise DomainError(f"time rounds to {t} at epsilon={eps:g}")
        if n < 1:
            raise DomainError(f"particle label rounds to {n} < 1 at epsilon={eps:g}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", int(round(nominal["a"])))
        object.__setattr__(self, "z", int(round(nominal["z"])))
        object.__setattr__(self, "y", int(round(nominal["y"])))
        object.__setattr__(self, "nominal", nominal)

    @classmethod
    def build(cls, model: PGFModel, epsilon: float, t_cap: float, x_cap: float = 0.0, a_cap: float = 0.0,
              u: float = 0.0, v: float = 0.0) -> "ScalingFrame":
        return cls(float(epsilon), float(t_cap), float(x_cap), float(a_cap), float(u), float(v),
                   scaling_coeffs(model), model.time_kind)

    @property
    def effective(self) -> dict:
        eps, sc = self.epsilon, self.coeffs
        root = math.sqrt(eps)
        tau = self.t / sc.D
        x = eps * (sc.E * tau - 0.5 * self.a_cap / root + 1 - self.n)
        u = root * (self.z - sc.G * tau - 2 * x / eps + 2) - self.a_cap
        return {"t_cap": eps**1.5 * tau, "x_cap": x, "u": u, "v": root * self.y}

    @property
    def residuals(self) -> dict:
        return {k: float(getattr(self, k) - self.nominal[k]) for k in ("t", "n", "a", "z", "y")}


def eps_S(model: PGFModel, frame: ScalingFrame) -> float:
    """eps^{-1/2} S_{-t,-n}(y', z)."""
    return S_kernel(model, frame.t, frame.n, frame.y, frame.z) / math.sqrt(frame.epsilon)


def eps_Sbar(model: PGFModel, frame: ScalingFrame) -> float:
    """eps^{-1/2} Sbar_{-t,n}(y', z)."""
    return Sbar_kernel(model, frame.t, frame.n, frame.y, frame.z) / math.sqrt(frame.epsilon)


def eps_Sbar_epi(model: PGFModel, ic: InitialCondition, frame: ScalingFrame) -> float:
    """eps^{-1/2} Sbar^epi_{-t,n}(y', z) for initial data ``ic``."""
    if ic.count < frame.n:
        raise ConfigError(f"initial condition has {ic.count} particles, label {frame.n} needed")
    return Sbar_epi(model, ic, frame.t, frame.n, frame.y, frame.z) / math.sqrt(frame.epsilon)


def limit_A1(frame: ScalingFrame, effective: bool = True) -> float:
    """S_{-T,x}(v, u) at the frame's (effective or nominal) coordinates."""
    c = frame.effective if effective else {"t_cap": frame.t_cap, "x_cap": frame.x_cap, "u": frame.u, "v": frame.v}
    return S_limit(-c["t_cap"], c["x_cap"], c["v"], c["u"])


def limit_A2(frame: ScalingFrame, effective: bool = True) -> float:
    """S_{-T,-x}(v, u)."""
    c = frame.effective if effective else {"t_cap": frame.t_cap, "x_cap": frame.x_cap, "u": frame.u, "v": frame.v}
    return S_limit(-c["t_cap"], -c["x_cap"], c["v"], c["u"])


# Brownian hitting kernel


@dataclass(frozen=True)
class Barrier:
    """Piecewise-linear function on [0, inf), extended linearly past the last knot."""

    xs: tuple[float, ...]
    gs: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.gs) or len(self.xs) < 1 or self.xs[0] != 0:
            raise ConfigError("barrier knots must start at x = 0")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise ConfigError("barrier knots must increase")

    @classmethod
    def linear(cls, slope: float, g0: float = 0.0) -> "Barrier":
        return cls((0.0, 1.0), (g0, g0 + slope))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if len(self.xs) == 1:
            return np.full_like(x, self.gs[0])
        xs, gs = np.asarray(self.xs), np.asarray(self.gs)
        inner = np.interp(x, xs, gs)
        last = (gs[-1] - gs[-2]) / (xs[-1] - xs[-2])
        return np.where(x > xs[-1], gs[-1] + last * (x - xs[-1]), inner)

    @property
    def is_linear(self) -> bool:
        if len(self.xs) <= 2:
            return True
        slopes = np.diff(self.gs) / np.diff(self.xs)
        return bool(np.allclose(slopes, slopes[0], rtol=0, atol=1e-14))


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    paths: int
    dt: float
    horizon: float
    hit_fraction: float
    bias_bound: float  # payoff bound beyond the horizon


def _payoff(g: Barrier, t_cap, x_cap, u, tau):
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    gt = g(tau)
    return np.array([S_limit(t_cap, x_cap - s, b, u) for s, b in zip(tau, gt)])


def _horizon(g, t_cap, x_cap, u, tol=1e-9, cap=40.0):
    grid = np.linspace(0.0, cap, 801)
    vals = np.abs(_payoff(g, t_cap, x_cap, u, grid))
    tail_max = np.maximum.accumulate(vals[::-1])[::-1]
    ok = np.nonzero(tail_max < tol)[0]
    if ok.size == 0:
        return cap, float(tail_max[-1])
    k = int(ok[0])
    return float(grid[k]), float(tail_max[k])


def brownian_epi(g: Barrier, t_cap: float, x_cap: float, v: float, u: float, paths: int = 100_000,
                 seed: int = 0, dt: float = 5e-4, horizon: float | None = None,
                 block: int = 20_000) -> MCEstimate:
    """Monte Carlo for E_{B(0)=v}[S_{t, x - tau}(B(tau), u); tau < inf].

    B is a Brownian motion with diffusion coefficient 2 (variance 2 per unit
    time) and tau its first entrance into {y >= g(s)}. Paths are advanced by
    exact Gaussian increments on a grid of mesh ``dt``; between grid points a
    Brownian-bridge test catches crossings that the grid misses. At the
    hitting time B equals the barrier, so the payoff only depends on tau.
    """
    if dt > 1e-3 or paths < 1:
        raise ConfigError("need dt <= 1e-3 and a positive path count")
    g0 = float(g(0.0))
    if v >= g0:
        return MCEstimate(S_limit(t_cap, x_cap, v, u), 0.0, paths, dt, 0.0, 1.0, 0.0)
    if horizon is None:
        horizon, bias = _horizon(g, t_cap, x_cap, u)
    else:
        bias = float(np.max(np.abs(_payoff(g, t_cap, x_cap, u, np.linspace(horizon, horizon + 20, 201)))))
    steps = int(math.ceil(horizon / dt))
    grid = np.arange(steps + 1) * dt
    barrier = g(grid)
    sd = math.sqrt(2 * dt)
    taus = []
    for b, start in enumerate(range(0, paths, block)):
        count = min(block, paths - start)
        rng = block_rng(seed, b)
        pos = np.full(count, float(v))
        alive = np.arange(count)
        for k in range(steps):
            if alive.size == 0:
                break
            new = pos + sd * rng.standard_normal(alive.size)
            d0 = pos - barrier[k]
            d1 = new - barrier[k + 1]
            direct = d1 >= 0
            bridge = np.zeros_like(direct)
            under = ~direct
            bridge[under] = rng.random(int(under.sum())) < np.exp(-d0[under] * d1[under] / dt)
            if direct.any():
                frac = d0[direct] / (d0[direct] - d1[direct])
                taus.append(grid[k] + frac * dt)
            if bridge.any():
                taus.append(np.full(int(bridge.sum()), grid[k] + 0.5 * dt))
            keep = ~(direct | bridge)
            alive, pos = alive[keep], new[keep]
    taus = np.concatenate(taus) if taus else np.zeros(0)
    pay = np.zeros(paths)
    if taus.size:
        # the payoff is smooth in tau: tabulate on a fine grid and interpolate
        table_x = np.linspace(0.0, horizon, 4001)
        table = _payoff(g, t_cap, x_cap, u, table_x)
        pay[: taus.size] = np.interp(taus, table_x, table)
    mean = float(pay.mean())
    stderr = float(pay.std(ddof=1) / math.sqrt(paths)) if paths > 1 else 0.0
    return MCEstimate(mean, stderr, paths, dt, horizon, taus.size / paths, bias)


def brownian_epi_linear(slope: float, g0: float, t_cap: float, x_cap: float, v: float, u: float) -> float:
    """Exact value of the Brownian hitting expectation for a linear barrier.

    With a = g0 - v > 0, the first time B - g reaches 0 has density
    a / sqrt(4 pi s^3) exp(-(a + slope s)^2 / (4 s)).
    """
    if v >= g0:
        return S_limit(t_cap, x_cap, v, u)
    a = g0 - v
    g = Barrier.linear(slope, g0)

    def integrand(s):
        if s <= 0:
            return 0.0
        dens = a / math.sqrt(4 * math.pi * s**3) * math.exp(-((a + slope * s) ** 2) / (4 * s))
        return dens * S_limit(t_cap, x_cap - s, float(g(s)), u)

    horizon, _ = _horizon(g, t_cap, x_cap, u, tol=1e-14)
    val, err = integrate.quad(integrand, 0.0, max(horizon, 1.0), limit=400, epsabs=1e-13, epsrel=1e-11)
    return float(val)


# saddle-point phase


def phase_function(model: PGFModel, t_hat: float):
    """f(x) = t (E log(1+x) - F log(1-x) + D log gamma(x)) with t = t_hat."""
    sc = scaling_coeffs(model)
    shift = complex(model.log_M(0.5))

    def f(x):
        x = np.asarray(x, dtype=complex)
        log_gamma = model.log_M(0.5 * (1 - x)) - shift
        return t_hat * (sc.E * np.log(1 + x) - sc.F * np.log(1 - x) + sc.D * log_gamma)

    return f


def phase_derivatives(model: PGFModel, t_hat: float, radius: float = 0.05, nodes: int = 64) -> np.ndarray:
    """f(0), f'(0), f''(0), f'''(0) from a complex finite-difference stencil on a circle."""
    f = phase_function(model, t_hat)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    vals = f(w)
    out = []
    for k in range(4):
        out.append(float(np.real(math.factorial(k) * np.mean(vals * w ** (-k)))))
    return np.array(out)


# convergence studies


@dataclass(frozen=True)
class SamplePoint:
    t_cap: float
    x_cap: float
    u: float
    v: float
    a_cap: float = 0.0


@dataclass(frozen=True)
class ConvergenceRow:
    which: str
    epsilon: float
    point: SamplePoint
    value: float
    limit: float
    error: float
    stderr: float
    frame: dict


def convergence_row(model: PGFModel, which: str, point: SamplePoint, epsilon: float, effective: bool = True,
                    slope: float = 1.0, limit: str = "exact", paths: int = 100_000, seed: int = 0,
                    dt: float = 5e-4) -> ConvergenceRow:
    """One (epsilon, point) entry of an (A1)/(A2)/(A3) convergence study.

    For A3 the initial data is the wedge with barrier ``slope * x`` and the
    limit is either the exact linear-barrier integral or the Monte Carlo
    estimator ``brownian_epi``.
    """
    frame = ScalingFrame.build(model, epsilon, point.t_cap, point.x_cap, point.a_cap, point.u, point.v)
    stderr = 0.0
    if which == "A1":
        value, lim = eps_S(model, frame), limit_A1(frame, effective)
    elif which == "A2":
        value, lim = eps_Sbar(model, frame), limit_A2(frame, effective)
    elif which == "A3":
        ic = InitialCondition.wedge(epsilon, slope, frame.n + 1)
        value = eps_Sbar_epi(model, ic, frame)
        c = frame.effective if effective else {"t_cap": frame.t_cap, "x_cap": frame.x_cap, "u": frame.u,
                                               "v": frame.v}
        if limit == "exact":
            lim = brownian_epi_linear(slope, 0.0, -c["t_cap"], -c["x_cap"], c["v"], c["u"])
        else:
            est = brownian_epi(Barrier.linear(slope), -c["t_cap"], -c["x_cap"], c["v"], c["u"], paths, seed, dt)
            lim, stderr = est.mean, est.stderr
    else:
        raise ConfigError(f"unknown kernel {which!r}; expected A1, A2 or A3")
    info = {"t": frame.t, "n": frame.n, "z": frame.z, "y": frame.y, "residuals": frame.residuals,
            "effective": frame.effective}
    return ConvergenceRow(which, epsilon, point, value, lim, abs(value - lim), stderr, info)


def convergence_study(model: PGFModel, which: str, points, eps_list, **kwargs) -> list[ConvergenceRow]:
    rows = []
    for point in points:
        for eps in eps_list:
            rows.append(convergence_row(model, which, point, eps, **kwargs))
    return rows
