"""Forward simulation of exclusion dynamics and height-function views.

Positions are stored in label order: column 0 is the rightmost particle
``X(1)``, so every row is strictly decreasing. Batches of samples are
advanced together as ``(samples, N)`` integer arrays.

Discrete-time models are realized as a sequence of elementary substeps:

* a Bernoulli factor ``1 - q + q w`` is a sequential update, particle 1
  first, each particle blocked by the *new* position of its leader;
* a geometric factor ``(1 - a)/(1 - a w)`` is a parallel update, each
  particle blocked by the *old* position of its leader.

These are the updates for which the determinantal transition formula holds.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import os

import numpy as np

from .errors import AssumptionError, ConfigError, DomainError
from .pgf_model import ModelKind, PGFModel, TimeKind, bernoulli_factors, scaling_coeffs

BLOCK_SIZE = 1 << 16
WORKERS_ENV = "TASEP_PGF_WORKERS"


@dataclass(frozen=True)
class Substep:
    """One elementary update: ``rule`` is "sequential" or "parallel"."""

    rule: str
    kind: str  # "bernoulli" or "geometric"
    param: float


def dynamics_for(model: PGFModel) -> tuple[Substep, ...]:
    """Elementary substeps whose composition realizes one time unit of ``model``."""
    if model.kind is ModelKind.BERNOULLI:
        return (Substep("sequential", "bernoulli", model.p),)
    if model.kind is ModelKind.GEOMETRIC:
        return (Substep("parallel", "geometric", model.alpha),)
    if model.kind is ModelKind.DISCRETE_PMF:
        if len(model.pmf) == 1 and model.tail_ratio and abs(model.pmf[0] - (1 - model.tail_ratio)) < 1e-12:
            return (Substep("parallel", "geometric", model.tail_ratio),)
        qs = bernoulli_factors(model)
        if qs is None:
            raise AssumptionError(
                f"{model.label}: no exclusion dynamics known; the pmf must factor into Bernoulli steps"
            )
        return tuple(Substep("sequential", "bernoulli", q) for q in qs)
    raise ConfigError("continuous-time models have no discrete substeps")


def continuous_rate(model: PGFModel) -> float:
    """Effective unit-jump rate of a continuous-time model."""
    fz = model.pmf
    if any(c > 0 for c in fz[2:]):
        raise AssumptionError(f"{model.label}: only jumps of size 0 or 1 are simulated")
    return model.rate * (fz[1] if len(fz) > 1 else 0.0)


# elementary steps


def _as_batch(config):
    arr = np.array(config, dtype=np.int64)
    return (arr[None, :], True) if arr.ndim == 1 else (arr, False)


def _sequential(pos, jumps):
    new = pos + jumps
    for i in range(1, pos.shape[1]):
        np.minimum(new[:, i], new[:, i - 1] - 1, out=new[:, i])
    return new


def _parallel(pos, jumps):
    new = pos + jumps
    new[:, 1:] = np.minimum(new[:, 1:], pos[:, :-1] - 1)
    return new


def step_bernoulli(config, p: float, rng: np.random.Generator):
    """One sequential update with Bernoulli(p) jumps, leader first."""
    if not 0 < p <= 1:
        raise DomainError("p must lie in (0, 1]")
    pos, single = _as_batch(config)
    new = _sequential(pos, (rng.random(pos.shape) < p).astype(np.int64))
    return new[0] if single else new


def step_geometric_parallel(config, alpha: float, rng: np.random.Generator):
    """One parallel update with jumps P(k) = (1 - alpha) alpha^k, k >= 0."""
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    pos, single = _as_batch(config)
    jumps = rng.geometric(1 - alpha, size=pos.shape).astype(np.int64) - 1
    new = _parallel(pos, jumps)
    return new[0] if single else new


def step_continuous(config, beta: float, duration: float, rng: np.random.Generator):
    """Continuous-time exclusion over ``duration`` with rate-``beta`` clocks.

    Exact in law: the superposition of the N particle clocks is a Poisson
    process of rate N beta whose events pick a uniform particle; a jump is
    suppressed when the target site is occupied.
    """
    if beta <= 0 or duration < 0:
        raise DomainError("need beta > 0 and duration >= 0")
    pos, single = _as_batch(config)
    pos = pos.copy()
    S, N = pos.shape
    events = rng.poisson(N * beta * duration, size=S)
    rows = np.arange(S)
    for k in range(int(events.max(initial=0))):
        live = rows[events > k]
        who = rng.integers(0, N, size=live.size)
        free = who == 0
        lead = np.where(free, 0, pos[live, np.maximum(who - 1, 0)])
        ok = free | (lead > pos[live, who] + 1)
        pos[live[ok], who[ok]] += 1
    return pos[0] if single else pos


def advance(model: PGFModel, pos: np.ndarray, duration, rng: np.random.Generator) -> np.ndarray:
    """Advance a batch by ``duration`` time units of ``model``."""
    if model.time_kind is TimeKind.CONTINUOUS:
        return step_continuous(pos, continuous_rate(model), float(duration), rng)
    if duration != int(duration):
        raise DomainError("discrete-time models advance by integer steps")
    steps = dynamics_for(model)
    for _ in range(int(duration)):
        for sub in steps:
            if sub.kind == "bernoulli":
                jumps = (rng.random(pos.shape) < sub.param).astype(np.int64)
            else:
                jumps = rng.geometric(1 - sub.param, size=pos.shape).astype(np.int64) - 1
            pos = _sequential(pos, jumps) if sub.rule == "sequential" else _parallel(pos, jumps)
    return pos


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Independent stream for a block of samples; identical under any schedule."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


# ensembles


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """Positions of all samples at the requested times.

    ``positions[k, s, i]`` is the position of particle ``i + 1`` in sample
    ``s`` at time ``times[k]``.
    """

    model: str
    initial: tuple[int, ...]
    samples: int
    seed: int
    times: tuple[float, ...]
    positions: np.ndarray = field(repr=False)

    def at(self, time) -> np.ndarray:
        return self.positions[self.times.index(time)]

    def particle(self, label: int, time=None) -> np.ndarray:
        k = -1 if time is None else self.times.index(time)
        return self.positions[k, :, label - 1]


def _simulate_block(args):
    model, initial, times, seed, block, count = args
    rng = block_rng(seed, block)
    pos = np.tile(np.asarray(initial, dtype=np.int64), (count, 1))
    out = []
    now = 0
    for time in times:
        pos = advance(model, pos, time - now, rng)
        now = time
        out.append(pos.copy())
    return np.stack(out)


def simulate(model: PGFModel, initial, t=None, samples: int = 1, seed: int = 0, times=None,
             block_size: int = BLOCK_SIZE, workers: int | None = None) -> TrajectoryEnsemble:
    """Simulate ``samples`` independent trajectories from ``initial``.

    Samples are split in fixed blocks with one random stream per block, so the
    result does not depend on ``workers``.
    """
    initial = tuple(int(x) for x in initial)
    if any(a <= b for a, b in zip(initial, initial[1:])):
        raise ConfigError("initial positions must be strictly decreasing in label order")
    if samples < 1:
        raise ConfigError("samples must be positive")
    if times is None:
        times = (t,)
    times = tuple(sorted(times))
    if times[0] < 0:
        raise DomainError("times must be nonnegative")
    if model.time_kind is TimeKind.CONTINUOUS:
        times = tuple(float(s) for s in times)
    workers = workers or int(os.environ.get(WORKERS_ENV, "1"))
    jobs = []
    for block in range(math.ceil(samples / block_size)):
        count = min(block_size, samples - block * block_size)
        jobs.append((model, initial, times, seed, block, count))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_simulate_block, jobs))
    else:
        parts = [_simulate_block(job) for job in jobs]
    positions = np.concatenate(parts, axis=1)
    return TrajectoryEnsemble(model.label, initial, samples, seed, times, positions)


# height function


def inverse_position(positions, u: int) -> int:
    """min{k >= 1 : X(k) <= u} for a finite strictly decreasing configuration."""
    pos = np.asarray(positions)
    if u < pos[-1]:
        raise DomainError(f"site {u} lies left of the last known particle {int(pos[-1])}")
    return int(np.argmax(pos <= u)) + 1


def reference_count(initial) -> int:
    """X_0^{-1}(-1), the label pinned by the height frame."""
    return inverse_position(initial, -1)


@dataclass(frozen=True)
class HeightProfile:
    """h(z) = -2 (X^{-1}(z - 1) - ref) - z, linearly interpolated between integers."""

    positions: tuple[int, ...]
    ref_count: int

    @property
    def leftmost(self) -> int:
        return int(self.positions[-1]) + 1

    def at_int(self, z: int) -> int:
        return -2 * (inverse_position(self.positions, int(z) - 1) - self.ref_count) - int(z)

    def __call__(self, z):
        z = float(z)
        lo = math.floor(z)
        if lo == z:
            return float(self.at_int(lo))
        frac = z - lo
        return (1 - frac) * self.at_int(lo) + frac * self.at_int(lo + 1)

    def window(self, z0: int, z1: int) -> np.ndarray:
        return np.array([self.at_int(z) for z in range(z0, z1 + 1)])


def height_function(config_t, ref_count: int) -> HeightProfile:
    pos = tuple(int(x) for x in config_t)
    if any(a <= b for a, b in zip(pos, pos[1:])):
        raise ConfigError("configuration must be strictly decreasing in label order")
    return HeightProfile(pos, int(ref_count))


def height_event(z: int, s: int, ref_count: int) -> tuple[int, int]:
    """Label n and site m with {h(z) <= s} = {X(n) >= m}.

    A returned n <= 0 means the event is certain (X(k) = +inf for k <= 0).
    """
    k0 = math.ceil(ref_count - (s + z) / 2)
    return k0 - 1, int(z)


def scaled_height(model: PGFModel, h: HeightProfile, epsilon: float, t_cap: float):
    """x -> eps^{1/2} [h(2 x / eps) + drift eps^{-3/2} t_cap].

    ``h`` must be the height profile at time ``D eps^{-3/2} t_cap``.
    """
    drift = scaling_coeffs(model).drift
    root = math.sqrt(epsilon)

    def profile(x):
        return root * (h(2 * x / epsilon) + drift * epsilon**-1.5 * t_cap)

    return profile
