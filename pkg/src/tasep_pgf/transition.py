"""Determinantal transition probabilities and their enumeration oracles."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .coeffx import F_n
from .errors import ConfigError, NegativeProbabilityError, SizeCapError
from .pgf_model import PGFModel, TimeKind
from .simulator import Substep, dynamics_for, simulate

NEGATIVE_TOL = 1e-9
BRUTE_MAX_PARTICLES = 4
BRUTE_MAX_TIME = 5
GEOMETRIC_TAIL = 1e-12


@dataclass(frozen=True, order=True)
class Configuration:
    """Particle positions in label order, ``positions[0] = x_1 > x_2 > ...``."""

    positions: tuple[int, ...]

    def __post_init__(self):
        pos = tuple(int(x) for x in self.positions)
        if not pos:
            raise ConfigError("a configuration needs at least one particle")
        if any(a <= b for a, b in zip(pos, pos[1:])):
            raise ConfigError(f"positions must be strictly decreasing, got {pos}")
        object.__setattr__(self, "positions", pos)

    @property
    def N(self) -> int:
        return len(self.positions)

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        return cls(tuple(int(v) for v in text.replace(" ", "").split(",") if v))

    def __str__(self):
        return ",".join(str(x) for x in self.positions)


def _config(c) -> Configuration:
    return c if isinstance(c, Configuration) else Configuration(tuple(c))


def schutz_matrix(model: PGFModel, frm, to, t) -> np.ndarray:
    """Matrix [F_{i-j}(x_{N+1-i} - y_{N+1-j}, t)] with x = ``to`` and y = ``frm``."""
    y, x = _config(frm).positions, _config(to).positions
    if len(x) != len(y):
        raise ConfigError("configurations must have the same number of particles")
    N = len(x)
    A = np.empty((N, N))
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            A[i - 1, j - 1] = F_n(model, i - j, x[N - i] - y[N - j], t)
    return A


def transition_probability(model: PGFModel, frm, to, t) -> float:
    """P(X_t = to | X_0 = frm) as an N x N determinant of F_n values."""
    value = float(np.linalg.det(schutz_matrix(model, frm, to, t)))
    if value < -NEGATIVE_TOL:
        raise NegativeProbabilityError(f"determinant {value:.3e} is negative beyond roundoff")
    return value


# brute-force enumeration


def _jump_law(sub: Substep):
    if sub.kind == "bernoulli":
        return np.array([1 - sub.param, sub.param])
    k = int(math.ceil(math.log(GEOMETRIC_TAIL) / math.log(sub.param)))
    return (1 - sub.param) * sub.param ** np.arange(k + 1)


def _apply_substep(dist: dict, sub: Substep) -> dict:
    pmf = _jump_law(sub)
    tail = np.concatenate([np.cumsum(pmf[::-1])[::-1], [0.0]])  # tail[k] = P(W >= k) within support
    out: dict = {}
    for cfg, prob in dist.items():
        partial = [((), prob)]
        for i, x in enumerate(cfg):
            nxt = []
            for new, pr in partial:
                if i == 0:
                    for w, pw in enumerate(pmf):
                        nxt.append(((x + w,), pr * pw))
                    continue
                lead = new[i - 1] if sub.rule == "sequential" else cfg[i - 1]
                gap = lead - 1 - x
                for w in range(min(gap, len(pmf))):
                    nxt.append((new + (x + w,), pr * pmf[w]))
                if gap < len(pmf):
                    nxt.append((new + (x + gap,), pr * tail[gap]))
            partial = nxt
        for new, pr in partial:
            out[new] = out.get(new, 0.0) + pr
    return out


def brute_force_distribution(model: PGFModel, frm, t: int) -> dict[Configuration, float]:
    """Exact law of X_t by enumerating every jump sequence.

    Blocked jumps are merged into a single outcome, so only the free leading
    particle's geometric support is truncated (at mass 1e-12 per step).
    """
    frm = _config(frm)
    if model.time_kind is TimeKind.CONTINUOUS:
        raise ConfigError("enumeration needs a discrete-time model; use mc_distribution instead")
    if frm.N > BRUTE_MAX_PARTICLES or t > BRUTE_MAX_TIME or t < 0 or t != int(t):
        raise SizeCapError(f"enumeration supports N <= {BRUTE_MAX_PARTICLES} and integer t <= {BRUTE_MAX_TIME}")
    steps = dynamics_for(model)
    dist = {frm.positions: 1.0}
    for _ in range(int(t)):
        for sub in steps:
            dist = _apply_substep(dist, sub)
    return {Configuration(k): v for k, v in dist.items()}


def reachable_targets(frm, t: int, max_jump: int) -> list[Configuration]:
    """Every configuration with x_i in [y_i, y_i + t max_jump] in the Weyl chamber."""
    frm = _config(frm)
    ranges = [range(y, y + t * max_jump + 1) for y in frm.positions]
    out = []
    for pos in itertools.product(*ranges):
        if all(a > b for a, b in zip(pos, pos[1:])):
            out.append(Configuration(pos))
    return out


# Monte Carlo


@dataclass(frozen=True)
class MCDistribution:
    probabilities: dict
    stderr: dict
    samples: int
    seed: int

    def estimate(self, cfg) -> tuple[float, float]:
        cfg = _config(cfg)
        p = self.probabilities.get(cfg, 0.0)
        return p, math.sqrt(max(p * (1 - p), 0.0) / self.samples)


def mc_distribution(model: PGFModel, frm, t, samples: int, seed: int) -> MCDistribution:
    """Empirical law of X_t with binomial standard errors per cell."""
    frm = _config(frm)
    ens = simulate(model, frm.positions, t, samples=samples, seed=seed)
    rows, counts = np.unique(ens.positions[-1], axis=0, return_counts=True)
    probs, errs = {}, {}
    for row, c in zip(rows, counts):
        p = c / samples
        cfg = Configuration(tuple(int(v) for v in row))
        probs[cfg] = float(p)
        errs[cfg] = math.sqrt(p * (1 - p) / samples)
    return MCDistribution(probs, errs, samples, seed)
