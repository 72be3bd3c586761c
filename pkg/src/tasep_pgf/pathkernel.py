"""Hitting-time kernel, the composite kernel K_t and the Fredholm joint law.

The joint distribution of finitely many particle positions is

    P(X_t(n_j) > a_j for all j) = det(I - chi K_t chi)

on the index set ``{(n_j, x) : x <= a_j}``. ``K_t`` combines a binomial
kernel ``Q^m`` with the composition of the contour kernels ``S`` and
``Sbar^epi``; the latter averages ``Sbar`` over where and when a leftward
geometric random walk first jumps strictly above the initial data.

Two structural facts make the computation finite and exact:

* the walk only moves left, so it can never hit once it is at or below
  ``X_0(n)``; the hitting recursion needs only sites above that floor, and
  ``Sbar^epi(nu, .)`` vanishes for ``nu <= X_0(n)``;
* ``S(nu, x)`` vanishes for ``nu > x + n``; together with the previous point
  the sum over ``nu`` has finitely many terms, and rows with
  ``x < X_0(n_M) + 1 - n_M`` only feed a nilpotent block, so truncating there
  leaves the determinant unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter
from scipy.special import binom

from .coeffx import S_kernel, Sbar_kernel
from .errors import ConfigError, ConvergenceError, NegativeProbabilityError
from .pgf_model import PGFModel

LOST_MASS_TOL = 1e-10
DEPTH_TOL = 1e-8
RANGE_TOL = 1e-8


@dataclass(frozen=True)
class InitialCondition:
    """Initial positions X_0(1) > X_0(2) > ... of the first ``count`` particles.

    X_0(j) is +infinity for j <= 0.
    """

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(x) for x in self.positions)
        if not pos:
            raise ConfigError("initial condition needs at least one particle")
        if any(a <= b for a, b in zip(pos, pos[1:])):
            raise ConfigError("initial positions must be strictly decreasing")
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return len(self.positions)

    def X0(self, j: int) -> float:
        if j <= 0:
            return math.inf
        if j > self.count:
            raise ConfigError(f"initial position of particle {j} is not specified (count {self.count})")
        return self.positions[j - 1]

    @classmethod
    def step(cls, count: int) -> "InitialCondition":
        """X_0(j) = -j."""
        return cls(tuple(-j for j in range(1, count + 1)))

    @classmethod
    def half_flat(cls, count: int) -> "InitialCondition":
        """X_0(j) = -2j: a flat profile to the left of the origin."""
        return cls(tuple(-2 * j for j in range(1, count + 1)))

    @classmethod
    def wedge(cls, epsilon: float, slope: float, count: int) -> "InitialCondition":
        """X_0(m+1) = -2m - 1 + round(slope sqrt(eps) m).

        The rescaled barrier ``sqrt(eps) (X_0(m+1) + 2m - 1)`` at ``x = eps m``
        converges to ``slope * x``.
        """
        root = math.sqrt(epsilon)
        if slope * root >= 1:
            raise ConfigError("slope * sqrt(epsilon) must stay below 1 to keep positions ordered")
        return cls(tuple(-2 * m - 1 + round(slope * root * m) for m in range(count)))

    @classmethod
    def from_dict(cls, data: dict) -> "InitialCondition":
        kind = data.get("kind", "positions")
        if kind == "positions":
            return cls(tuple(data["positions"]))
        if kind == "step":
            return cls.step(int(data["count"]))
        if kind == "half_flat":
            return cls.half_flat(int(data["count"]))
        if kind == "wedge":
            return cls.wedge(float(data["epsilon"]), float(data["slope"]), int(data["count"]))
        raise ConfigError(f"unknown initial-condition kind {kind!r}")


def Q_pow(m: int, x: int, y: int) -> float:
    """m-fold power of the kernel Q(x, y) = 2^{-(x-y)} 1_{x>y}."""
    if m < 1:
        raise ConfigError("Q_pow needs m >= 1")
    if x < y + m:
        return 0.0
    return float(2.0 ** (-(x - y)) * binom(x - y - 1, m - 1))


# hitting law


@dataclass(frozen=True)
class HittingLaw:
    """Joint law of (tau, RW_tau) on {tau < n} for a walk started at ``start``.

    The walk jumps strictly left with P(k) = 2^{-k}, k >= 1, and
    tau = min{m >= 0 : RW_m > X_0(m+1)}.
    """

    start: int
    horizon: int
    floor: int
    steps: np.ndarray
    sites: np.ndarray
    probs: np.ndarray
    survival: float  # mass still above the floor and not stopped at step n-1
    lost: float  # mass that dropped below the floor

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def entries(self):
        return list(zip(self.steps.tolist(), self.sites.tolist(), self.probs.tolist()))


def exact_floor(ic: InitialCondition, n: int) -> int:
    """Lowest site from which the walk can still hit before step n."""
    return int(ic.X0(n)) + 1


def rw_hitting_law(ic: InitialCondition, start: int, n: int, floor: int | None = None) -> HittingLaw:
    """Dynamic program over steps 0..n-1 for the first strict upcrossing.

    Mass below ``floor`` is dropped and reported as ``lost``. Below
    ``X_0(n) + 1`` the walk can never hit (it only moves left and X_0 is
    decreasing), so the default floor makes the recursion exact. A
    user-supplied higher floor is lowered until the lost mass is below 1e-10.
    """
    if n < 1:
        raise ConfigError("horizon n must be at least 1")
    lowest = exact_floor(ic, n)
    floor = lowest if floor is None else max(int(floor), lowest)
    while True:
        law = _hitting_dp(ic, int(start), n, floor)
        if law.lost < LOST_MASS_TOL or floor == lowest:
            return law
        floor = max(lowest, floor - 2 * max(1, start - floor))


def _hitting_dp(ic, start, n, floor):
    steps, sites, probs = [], [], []
    width = start - floor + 1
    if width <= 0:
        empty = np.zeros(0)
        return HittingLaw(start, n, floor, empty.astype(int), empty.astype(int), empty, 0.0, 1.0)
    # index j corresponds to site start - j
    mass = np.zeros(width)
    mass[0] = 1.0
    lost = 0.0
    for m in range(n):
        cut = int(min(max(start - ic.X0(m + 1), 0), width))  # sites with index < cut are above X_0(m+1)
        hit = np.nonzero(mass[:cut])[0]
        if hit.size:
            steps.extend([m] * hit.size)
            sites.extend((start - hit).tolist())
            probs.extend(mass[hit].tolist())
            mass[:cut] = 0.0
        if m == n - 1:
            break
        before = mass.sum()
        mass = lfilter([0.0, 0.5], [1.0, -0.5], mass)
        lost += before - mass.sum()
    return HittingLaw(start, n, floor, np.array(steps, dtype=int), np.array(sites, dtype=int),
                      np.array(probs), float(mass.sum()), float(max(lost, 0.0)))


def Sbar_epi(model: PGFModel, ic: InitialCondition, t, n: int, z1: int, z2: int,
             law: HittingLaw | None = None, normalized: bool = True) -> float:
    """E[Sbar_{-t, n - tau}(RW_tau, z2); tau < n] for the walk started at z1."""
    law = law or rw_hitting_law(ic, z1, n)
    total = 0.0
    for m, y, p in zip(law.steps, law.sites, law.probs):
        total += p * Sbar_kernel(model, t, n - int(m), int(y), z2, normalized)
    return float(total)


# kernel assembly and determinant


@dataclass(frozen=True)
class KernelMatrix:
    """Truncation of K_t to ``{(n_j, x) : depth <= x <= a_j}``."""

    index: tuple[tuple[int, int], ...]
    matrix: np.ndarray = field(repr=False)
    depth: int
    ns: tuple[int, ...]
    a: tuple[int, ...]
    t: float
    model: str
    nu_ranges: tuple[tuple[int, int], ...]


def default_depth(ic: InitialCondition, ns) -> int:
    """Lowest row index that can influence the determinant."""
    return int(ic.X0(ns[-1])) + 1 - ns[-1]


def _validate(ic, ns, a):
    ns, a = tuple(int(v) for v in ns), tuple(int(v) for v in a)
    if len(ns) != len(a) or not ns:
        raise ConfigError("n and a must be non-empty and of equal length")
    if ns[0] < 1 or any(p >= q for p, q in zip(ns, ns[1:])):
        raise ConfigError("labels n must be strictly increasing and at least 1")
    if ns[-1] > ic.count:
        raise ConfigError(f"label {ns[-1]} exceeds the {ic.count} specified initial particles")
    return ns, a


def assemble_Kt(model: PGFModel, ic: InitialCondition, t, ns, a, depth: int | None = None,
                normalized: bool = True) -> KernelMatrix:
    """Dense truncation of K_t.

    The sum over nu runs exactly over [X_0(n_j) + 1, x + n_i]: outside this
    range one of the two factors vanishes identically.
    """
    ns, a = _validate(ic, ns, a)
    L = default_depth(ic, ns) if depth is None else int(depth)
    blocks = [np.arange(L, aj + 1) for aj in a]
    nu_hi = max(ai + ni for ai, ni in zip(a, ns))
    S_blocks = []
    epi_blocks = []
    nu_ranges = []
    for j, nj in enumerate(ns):
        lo = exact_floor(ic, nj)
        nu = np.arange(lo, nu_hi + 1)
        nu_ranges.append((lo, nu_hi))
        epi = np.zeros((nu.size, blocks[j].size))
        for r, v in enumerate(nu):
            law = rw_hitting_law(ic, int(v), nj)
            for m, z, p in zip(law.steps, law.sites, law.probs):
                row = np.array([Sbar_kernel(model, t, nj - int(m), int(z), int(y), normalized) for y in blocks[j]])
                epi[r] += p * row
        epi_blocks.append((lo, epi))
    for i, ni in enumerate(ns):
        lo = min(exact_floor(ic, nj) for nj in ns)
        nu = np.arange(lo, nu_hi + 1)
        S_blocks.append((lo, np.array([[S_kernel(model, t, ni, int(v), int(x), normalized)
                                        for x in blocks[i]] for v in nu]).reshape(nu.size, blocks[i].size)))
    sizes = [b.size for b in blocks]
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    K = np.zeros((offsets[-1], offsets[-1]))
    for i, ni in enumerate(ns):
        s_lo, smat = S_blocks[i]
        for j, nj in enumerate(ns):
            e_lo, emat = epi_blocks[j]
            part = smat[e_lo - s_lo:].T @ emat
            if ni < nj:
                part -= np.array([[Q_pow(nj - ni, int(x), int(y)) for y in blocks[j]] for x in blocks[i]]).reshape(part.shape)
            K[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = part
    index = tuple((ns[j], int(x)) for j in range(len(ns)) for x in blocks[j])
    return KernelMatrix(index, K, L, ns, a, t, model.label, tuple(nu_ranges))


def fredholm_det(kernel: KernelMatrix) -> float:
    """det(I - K) by LU with partial pivoting."""
    if kernel.matrix.size == 0:
        return 1.0
    return float(np.linalg.det(np.eye(kernel.matrix.shape[0]) - kernel.matrix))


@dataclass(frozen=True)
class JointResult:
    probability: float
    raw: float
    depth_report: dict
    diagnostics: dict


def joint_probability(model: PGFModel, ic: InitialCondition, t, ns, a, depth: int | None = None,
                      delta: int = 4, normalized: bool = True) -> JointResult:
    """P(X_t(n_j) > a_j for all j) as a truncated Fredholm determinant.

    The determinant is evaluated at depths L and L - delta and accepted when
    the two agree within 1e-8.
    """
    ns, a = _validate(ic, ns, a)
    L = default_depth(ic, ns) if depth is None else int(depth)
    k1 = assemble_Kt(model, ic, t, ns, a, L, normalized)
    k2 = assemble_Kt(model, ic, t, ns, a, L - delta, normalized)
    d1, d2 = fredholm_det(k1), fredholm_det(k2)
    report = {"depths": [L, L - delta], "determinants": [d1, d2], "difference": abs(d1 - d2),
              "exact_depth": default_depth(ic, ns)}
    if abs(d1 - d2) >= DEPTH_TOL:
        raise ConvergenceError(f"truncation not converged: |det(L) - det(L - {delta})| = {abs(d1 - d2):.3e}",
                               (d1, d2))
    if d1 < -RANGE_TOL:
        raise NegativeProbabilityError(f"determinant {d1:.3e} is below 0: kernel assembly failure")
    if d1 > 1 + RANGE_TOL:
        raise ConvergenceError(f"determinant {d1:.12g} exceeds 1: kernel assembly failure", (d1,))
    diagnostics = {
        "matrix_size": int(k1.matrix.shape[0]),
        "nu_ranges": [list(r) for r in k1.nu_ranges],
        "max_abs_entry": float(np.max(np.abs(k1.matrix))) if k1.matrix.size else 0.0,
        "clamped": not (0.0 <= d1 <= 1.0),
    }
    return JointResult(min(max(d1, 0.0), 1.0), d1, report, diagnostics)


def event_probability(distribution: dict, ns, a) -> float:
    """Sum of a distribution over configurations with X(n_j) > a_j for all j."""
    total = 0.0
    for cfg, p in distribution.items():
        pos = cfg.positions if hasattr(cfg, "positions") else tuple(cfg)
        if all(pos[n - 1] > aj for n, aj in zip(ns, a)):
            total += p
    return total
