"""End-to-end acceptance checks with measured errors and runtimes.

Each check returns a ``CriterionResult``; ``run_all`` evaluates every check
without stopping at the first failure. Tolerances can be overridden per
criterion, which is how negative controls are run.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

from .asymptotics import (
    AI0,
    Barrier,
    SamplePoint,
    ScalingFrame,
    S_limit,
    S_limit_contour,
    airy,
    airy_series,
    brownian_epi,
    eps_S,
    eps_Sbar,
    eps_Sbar_epi,
    limit_A1,
    limit_A2,
    phase_derivatives,
)
from .coeffx import F_n
from .pathkernel import InitialCondition, event_probability, joint_probability
from .pgf_model import PGFModel, check_assumption_limcon, condi10, gamma_derivs, scaling_coeffs
from .simulator import simulate
from .transition import brute_force_distribution, reachable_targets, transition_probability


@dataclass(frozen=True)
class CriterionResult:
    id: int
    name: str
    passed: bool
    measured: float
    tolerance: float
    runtime: float
    budget: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.id:2d} {self.name}: measured={self.measured:.3e} tol={self.tolerance:.1e} "
                f"runtime={self.runtime:.1f}s/{self.budget:.0f}s {self.detail}")


BUILTIN_MODELS = (PGFModel.continuous_poisson(1.0), PGFModel.bernoulli(0.5), PGFModel.geometric(0.4))
KERNEL_POINTS = (
    SamplePoint(1.0, 0.0, 0.0, 0.0),
    SamplePoint(1.0, 0.3, 0.5, -0.2),
    SamplePoint(1.0, -0.3, -0.4, 0.3),
    SamplePoint(2.0, 0.2, 0.1, 0.6),
    SamplePoint(0.5, 0.0, 0.3, 0.0),
)
KERNEL_EPS = (0.1, 0.05, 0.025, 0.0125)
EPI_POINTS = (
    SamplePoint(1.0, 0.0, 0.0, -0.5),
    SamplePoint(1.0, 0.2, 0.3, -0.4),
    SamplePoint(1.5, -0.2, -0.3, -0.3),
)
# a finite jump law that factors as (0.7 + 0.3 w)(0.6 + 0.4 w)
FACTORED_PMF = (0.42, 0.46, 0.12)

DEFAULT_TOLERANCES = {1: 1e-12, 2: 1e-12, 3: 1e-12, 4: 1e-10, 5: 1e-9, 6: 1e-7, 7: 4.0, 8: 0.01, 9: 3.0,
                      10: 1e-8, 11: 1e-12}


def _result(cid, name, start, budget, ok, measured, tol, detail=""):
    runtime = time.perf_counter() - start
    return CriterionResult(cid, name, bool(ok and runtime < budget), float(measured), float(tol), runtime,
                           budget, detail)


def criterion_1(tol=1e-12):
    """Closed-form gamma derivatives for the continuous Poisson model."""
    start = time.perf_counter()
    err = 0.0
    for beta in (0.25, 1.0, 2.0, 5.0):
        gd = gamma_derivs(PGFModel.continuous_poisson(beta))
        want = (-beta / 2, beta**2 / 4, -(beta**3) / 8, beta)
        got = (gd.g1, gd.g2, gd.g3, gd.denom)
        err = max(err, max(abs(a - b) for a, b in zip(got, want)))
    return _result(1, "gamma derivatives (Poisson)", start, 1.0, err < tol, err, tol)


def criterion_2(tol=1e-12):
    """Scaling coefficients D = 2/beta and E = F = 1/2."""
    start = time.perf_counter()
    err = 0.0
    for beta in (0.25, 1.0, 2.0, 5.0):
        sc = scaling_coeffs(PGFModel.continuous_poisson(beta))
        err = max(err, abs(sc.D - 2 / beta), abs(sc.E - 0.5), abs(sc.F - 0.5))
    return _result(2, "scaling coefficients (Poisson)", start, 1.0, err < tol, err, tol)


def _w4_model(p):
    return PGFModel.discrete_pmf((1 - p, 0.0, 0.0, 0.0, p))


def _w4_closed_form(p):
    m_half = 1 - p + p / 16
    return p * (1 - p) * (23 * p - 16) / (16 * m_half**3)


def criterion_3(tol=1e-12):
    """Cubic combination of 1 - p + p w^4 and its sign change at p = 16/23."""
    start = time.perf_counter()
    err = max(abs(gamma_derivs(_w4_model(p)).denom - _w4_closed_form(p)) for p in np.arange(1, 10) / 10)
    lo = gamma_derivs(_w4_model(16 / 23 - 1e-4)).denom
    hi = gamma_derivs(_w4_model(16 / 23 + 1e-4)).denom
    bracket = lo < 0 < hi
    return _result(3, "cubic combination counterexample", start, 1.0, err < tol and bracket, err, tol,
                   f"sign bracket {'ok' if bracket else 'missing'} ({lo:.2e}, {hi:.2e})")


def criterion_4(tol=1e-10):
    """F_0(x, t) equals the free-particle law."""
    start = time.perf_counter()
    x = np.arange(0, 21)
    err = 0.0
    cases = [
        (PGFModel.continuous_poisson(1.0), (0.5, 1.0, 2.5, 5.0), lambda t: stats.poisson.pmf(x, t)),
        (PGFModel.bernoulli(0.3), (1, 2, 3, 4, 5), lambda t: stats.binom.pmf(x, t, 0.3)),
        (PGFModel.geometric(0.4), (1, 2, 3, 4, 5), lambda t: stats.nbinom.pmf(x, t, 0.6)),
    ]
    for model, times, oracle in cases:
        for t in times:
            got = np.array([F_n(model, 0, int(k), t) for k in x])
            err = max(err, float(np.max(np.abs(got - oracle(t)))))
    return _result(4, "free-particle pmf", start, 10.0, err < tol, err, tol)


def criterion_5(tol=1e-9):
    """Determinant formula against exhaustive enumeration."""
    start = time.perf_counter()
    models = ((PGFModel.bernoulli(0.5), 1), (PGFModel.discrete_pmf(FACTORED_PMF), 2))
    initials = ((0,), (1, 0), (0, -1, -2), (2, 0, -3))
    err, count = 0.0, 0
    for model, max_jump in models:
        for frm in initials:
            for t in (1, 2, 3):
                dist = brute_force_distribution(model, frm, t)
                for target in reachable_targets(frm, t, max_jump):
                    p = transition_probability(model, frm, target, t)
                    err = max(err, abs(p - dist.get(target, 0.0)))
                    count += 1
    return _result(5, "determinant vs enumeration", start, 120.0, err < tol, err, tol, f"{count} targets")


def criterion_6(tol=1e-7):
    """Fredholm determinant against enumerated event probabilities."""
    start = time.perf_counter()
    models = (PGFModel.bernoulli(0.5), PGFModel.discrete_pmf(FACTORED_PMF))
    initials = ((-1, -2, -3), (0, -2, -5))
    events = (((1,), (-1,)), ((3,), (-3,)), ((1, 3), (0, -3)), ((2, 3), (-2, -4)), ((1, 2), (1, -1)))
    err, spread, range_err, count = 0.0, 0.0, 0.0, 0
    for model in models:
        for frm in initials:
            ic = InitialCondition(frm)
            for t in (1, 2, 3):
                dist = brute_force_distribution(model, frm, t)
                for ns, a in events:
                    res = joint_probability(model, ic, t, ns, a)
                    err = max(err, abs(res.raw - event_probability(dist, ns, a)))
                    spread = max(spread, res.depth_report["difference"])
                    range_err = max(range_err, -res.raw, res.raw - 1, 0.0)
                    count += 1
    ok = err < tol and spread < 1e-8 and range_err <= 1e-8
    return _result(6, "Fredholm joint distribution", start, 300.0, ok, err, tol,
                   f"{count} events, depth spread {spread:.1e}, range excess {range_err:.1e}")


def criterion_7(tol=4.0, samples=1_000_000, seed=2024):
    """Fredholm determinant against Monte Carlo, continuous time."""
    start = time.perf_counter()
    model = PGFModel.continuous_poisson(1.0)
    frm = (-1, -2, -3)
    events = (((1, 3), (-1, -3)), ((1, 2), (-1, -2)))
    ens = simulate(model, frm, 1.0, samples=samples, seed=seed)
    last = ens.positions[-1]
    worst = 0.0
    parts = []
    for ns, a in events:
        exact = joint_probability(model, InitialCondition(frm), 1.0, ns, a).probability
        hit = np.all([last[:, n - 1] > aj for n, aj in zip(ns, a)], axis=0)
        p = hit.mean()
        se = math.sqrt(p * (1 - p) / samples)
        z = abs(p - exact) / se
        worst = max(worst, z)
        parts.append(f"{exact:.5f} vs {p:.5f}")
    return _result(7, "Monte Carlo cross-check", start, 300.0, worst < tol, worst, tol, "; ".join(parts))


def kernel_errors(models=BUILTIN_MODELS, points=KERNEL_POINTS, eps_list=KERNEL_EPS):
    """Errors of the rescaled S and Sbar against their limits, keyed by (model, kernel, point)."""
    table = {}
    for model in models:
        for which, kernel, limit in (("A1", eps_S, limit_A1), ("A2", eps_Sbar, limit_A2)):
            for point in points:
                errs = []
                for eps in eps_list:
                    frame = ScalingFrame.build(model, eps, point.t_cap, point.x_cap, point.a_cap, point.u, point.v)
                    errs.append(abs(kernel(model, frame) - limit(frame)))
                table[(model.label, which, point)] = errs
    return table


def criterion_8(tol=0.01):
    """Monotone convergence of the rescaled kernels with a final-error cap."""
    start = time.perf_counter()
    table = kernel_errors()
    final = max(errs[-1] for errs in table.values())
    monotone = sum(all(b < a for a, b in zip(errs, errs[1:])) for errs in table.values())
    ok = final < tol and monotone == len(table)
    return _result(8, "kernel convergence (A1/A2)", start, 600.0, ok, final, tol,
                   f"monotone {monotone}/{len(table)}")


def criterion_9(tol=3.0, epsilon=0.0125, paths=100_000, dt=5e-4, seed=7, slope=1.0):
    """Hitting kernel of the wedge against the Brownian first-passage estimator."""
    start = time.perf_counter()
    model = PGFModel.bernoulli(0.5)
    worst, parts = 0.0, []
    for point in EPI_POINTS:
        frame = ScalingFrame.build(model, epsilon, point.t_cap, point.x_cap, point.a_cap, point.u, point.v)
        ic = InitialCondition.wedge(epsilon, slope, frame.n + 1)
        value = eps_Sbar_epi(model, ic, frame)
        c = frame.effective
        est = brownian_epi(Barrier.linear(slope), -c["t_cap"], -c["x_cap"], c["v"], c["u"], paths, seed, dt)
        z = abs(value - est.mean) / est.stderr if est.stderr > 0 else math.inf * abs(value - est.mean)
        worst = max(worst, z)
        parts.append(f"{value:.4f} vs {est.mean:.4f}+-{est.stderr:.1e}")
    return _result(9, "kernel convergence (A3)", start, 600.0, worst < tol, worst, tol, "; ".join(parts))


def criterion_10(tol=1e-8):
    """Airy value, two routes to the limit kernel, and the saddle identities."""
    start = time.perf_counter()
    closed_ai0 = 1.0 / (3 ** (2 / 3) * math.gamma(2 / 3))
    ai_err = max(abs(airy(0.0) - closed_ai0), abs(airy_series(0.0) - AI0))
    grid_err = 0.0
    for t in (-2.0, -0.7, 0.5, 1.0, 3.0):
        for x in (-1.0, -0.4, 0.0, 0.5, 1.2):
            for c in (-2.0, -0.5, 0.0, 0.8, 2.5):
                a, b = S_limit(t, x, c, 0.0), S_limit_contour(t, x, c, 0.0)
                grid_err = max(grid_err, abs(a - b) / max(1.0, abs(a)))
    saddle = 0.0
    t_hat = 0.05**-1.5
    for model in BUILTIN_MODELS:
        d = phase_derivatives(model, t_hat)
        scale = 2 * t_hat
        saddle = max(saddle, abs(d[0]) / scale, abs(d[1]) / scale, abs(d[2]) / scale, abs(d[3] - scale) / scale)
    ok = ai_err < 1e-10 and grid_err < tol and saddle < 1e-6
    return _result(10, "Airy and limit-kernel integrity", start, 60.0, ok, grid_err, tol,
                   f"Ai(0) err {ai_err:.1e}, saddle rel err {saddle:.1e}")


def criterion_11(tol=1e-12):
    """Contour inequalities for the built-in models and a golden value at theta = pi."""
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = [check_assumption_limcon(m, 512) for m in BUILTIN_MODELS]
    worst = max(max(r.max_condi10, r.max_condi11) for r in reports)
    at_pi = float(condi10(PGFModel.continuous_poisson(1.0), math.pi))
    golden = 0.5 * math.log(3) - 1
    err = abs(at_pi - golden)
    ok = worst < -1e-3 and err < tol
    return _result(11, "contour inequalities", start, 60.0, ok, err, tol,
                   f"max over models {worst:.4f}; condi10(pi) = {at_pi:.12f}, expected {golden:.12f}")


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10, 11: criterion_11}


def run_criterion(cid: int, tolerance: float | None = None) -> CriterionResult:
    tol = DEFAULT_TOLERANCES[cid] if tolerance is None else tolerance
    start = time.perf_counter()
    try:
        return CRITERIA[cid](tol=tol)
    except Exception as exc:  # a crashing check is a failed check, not an aborted suite
        return CriterionResult(cid, CRITERIA[cid].__doc__.strip().splitlines()[0], False, math.nan, tol,
                               time.perf_counter() - start, math.nan, f"{type(exc).__name__}: {exc}")


def run_all(tolerances: dict | None = None, only=None) -> list[CriterionResult]:
    tolerances = tolerances or {}
    ids = sorted(CRITERIA) if only is None else list(only)
    return [run_criterion(cid, tolerances.get(cid)) for cid in ids]


def summary_table(results) -> list[dict]:
    return [asdict(r) for r in results]
