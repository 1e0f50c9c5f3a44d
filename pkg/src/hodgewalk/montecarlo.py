"""Trajectory simulation of absorbing chains, checked against exact matrix powers.

Randomness is counter based: trajectory ``i`` always consumes the Philox
stream block starting at counter ``i * stride`` under the key
``master_seed``, so counts do not depend on how trajectories are split
across workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .complex import SimplicialComplex
from .walks import TransitionMatrix

CHUNK = 8192
THREADS_ENV = "HODGEWALK_THREADS"


def worker_count() -> int:
    """Worker cap from ``HODGEWALK_THREADS`` (default: all cores)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


@dataclass
class SimulationConfig:
    n_steps: int
    n_trajectories: int
    master_seed: int = 0
    initial: int | np.ndarray = 0
    """Start state index, or a probability vector over states (mixture start)."""

    def __post_init__(self):
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be at least 1")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")


@dataclass
class EmpiricalDistribution:
    """Per-state counts after each step ``0..n_steps`` of a simulation."""

    history: np.ndarray = field(repr=False)
    n_trajectories: int

    @property
    def n_steps(self) -> int:
        return self.history.shape[0] - 1

    @property
    def counts(self) -> np.ndarray:
        return self.history[-1]

    def frequencies(self, step: int | None = None) -> np.ndarray:
        row = self.history[-1 if step is None else step]
        return row / self.n_trajectories

    def standard_errors(self, step: int | None = None) -> np.ndarray:
        q = self.frequencies(step)
        return np.sqrt(q * (1 - q) / self.n_trajectories)

    def to_dict(self, step: int | None = None) -> dict:
        return {
            "n_trajectories": self.n_trajectories,
            "step": self.n_steps if step is None else step,
            "counts": self.history[-1 if step is None else step].tolist(),
            "frequencies": self.frequencies(step).tolist(),
            "standard_errors": self.standard_errors(step).tolist(),
        }


def _column_cdfs(m: np.ndarray) -> np.ndarray:
    """Row ``s`` is the CDF of the jump distribution out of state ``s``."""
    cdf = np.cumsum(m.T, axis=1)
    for s in range(m.shape[0]):
        support = np.nonzero(m[:, s] > 0)[0]
        cdf[s, support[-1]:] = 1.0
    return cdf


def _run_chunk(cdf, initial, seed, stride, first, count, n_steps):
    n_states = cdf.shape[0]
    bits = np.random.Philox(key=seed)
    bits.advance(first * (stride // 4))
    draws = np.random.Generator(bits).random((count, stride))
    state = _initial_states(initial, n_states, draws[:, 0])
    history = np.zeros((n_steps + 1, n_states), dtype=np.int64)
    history[0] = np.bincount(state, minlength=n_states)
    for t in range(n_steps):
        u = draws[:, t + 1]
        nxt = (cdf[state] <= u[:, None]).sum(axis=1)
        state = np.minimum(nxt, n_states - 1)
        history[t + 1] = np.bincount(state, minlength=n_states)
    return history


def _initial_states(initial, n_states, draws_first):
    if np.ndim(initial) == 0:
        s = int(initial)
        if not 0 <= s < n_states:
            raise ValueError(f"initial state {s} outside 0..{n_states - 1}")
        return np.full(draws_first.shape[0], s, dtype=np.int64)
    nu = np.asarray(initial, dtype=float)
    if nu.shape != (n_states,) or np.any(nu < 0) or abs(nu.sum() - 1) > 1e-12:
        raise ValueError("initial distribution must be a probability vector over the states")
    cdf = np.cumsum(nu)
    cdf[np.nonzero(nu > 0)[0][-1]:] = 1.0
    return np.minimum(np.searchsorted(cdf, draws_first, side="right"), n_states - 1)


def simulate(P: TransitionMatrix, cfg: SimulationConfig, workers: int | None = None) -> EmpiricalDistribution:
    """Run ``cfg.n_trajectories`` independent walks and tally states after every step.

    Draw 0 of each trajectory picks the start state (mixture start); draw
    ``t+1`` drives step ``t`` by inverse-CDF sampling over a fixed state order.
    """
    m = P.matrix if isinstance(P, TransitionMatrix) else np.asarray(P)
    n_states = m.shape[0]
    cdf = _column_cdfs(m)
    stride = 4 * ((cfg.n_steps + 1 + 3) // 4)
    seed = int(cfg.master_seed)
    workers = worker_count() if workers is None else workers
    bounds = [(a, min(a + CHUNK, cfg.n_trajectories)) for a in range(0, cfg.n_trajectories, CHUNK)]

    def job(bound):
        a, b = bound
        return _run_chunk(cdf, cfg.initial, seed, stride, a, b - a, cfg.n_steps)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]
    history = np.zeros((cfg.n_steps + 1, n_states), dtype=np.int64)
    for part in parts:
        history += part
    return EmpiricalDistribution(history=history, n_trajectories=cfg.n_trajectories)


def exact_marginals(P: TransitionMatrix, initial, n_steps: int) -> np.ndarray:
    """Rows ``P^t nu`` for ``t = 0..n_steps``."""
    m = P.matrix if isinstance(P, TransitionMatrix) else np.asarray(P)
    if np.ndim(initial) == 0:
        nu = np.zeros(m.shape[0])
        nu[int(initial)] = 1.0
    else:
        nu = np.asarray(initial, dtype=float)
    out = [nu]
    for _ in range(n_steps):
        out.append(m @ out[-1])
    return np.array(out)


def empirical_marginal_difference(emp: EmpiricalDistribution, c: SimplicialComplex, k: int,
                                  step: int | None = None) -> np.ndarray:
    """Frequency on each positive orientation minus frequency on its negative."""
    n_simplices = c.n_simplices(k)
    freq = emp.frequencies(step)
    if freq.shape != (2 * n_simplices + 1,):
        raise ValueError(f"distribution over {freq.shape[0]} states does not match "
                         f"{n_simplices} simplexes")
    return freq[:n_simplices] - freq[n_simplices:2 * n_simplices]


def agreement_fraction(emp: EmpiricalDistribution, exact: np.ndarray, steps, n_sigma: float = 3.0) -> float:
    """Fraction of ``(state, step)`` pairs whose frequency is within ``n_sigma`` exact standard errors."""
    hits, total = 0, 0
    n = emp.n_trajectories
    for t in steps:
        q = exact[t]
        tol = n_sigma * np.sqrt(np.clip(q * (1 - q), 0, None) / n) + 1e-12
        hits += int(np.sum(np.abs(emp.frequencies(t) - q) <= tol))
        total += q.size
    return hits / total
