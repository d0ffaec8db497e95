"""Multi-worker optimizer: independent samplers ranked by accumulated
normalizer estimates, with the point estimate read off the best worker.

Workers never exchange particles.  Each one owns an RNG stream spawned
from the master seed, builds its own mini-batch schedule, and runs the
same number of steps; results are therefore identical whatever the
thread count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import CostModel, SearchSpace, build_schedule
from .kde import KernelDensitySpec, bandwidth_rule, map_estimate
from .sampler import JitterKernelSpec, ParticleSystem, init_particles, sampler_step


class NoViableWorkerError(RuntimeError):
    """Every worker's accumulated normalizer is -inf; none can be ranked."""


class RunFailureError(RuntimeError):
    """The whole run degenerated.  Carries the per-step normalizer trace
    for diagnosis."""

    def __init__(self, message: str, log_z_by_step: np.ndarray):
        self.log_z_by_step = np.asarray(log_z_by_step)
        super().__init__(message)


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for a full multi-worker run.

    estimate_every=None emits a single estimate at the final step;
    estimate_every=1 emits one per step.  worker_seeds overrides the
    per-worker streams (normally spawned from `seed`), mainly for
    isolation experiments.
    """

    m_workers: int
    n_particles: int
    batch_size: int
    proposal_std: float
    epsilon: Optional[float] = None
    seed: int = 0
    estimate_every: Optional[int] = None
    threads: int = 1
    init_point: Optional[Tuple[float, ...]] = None
    init_std: float = 0.0
    keep_final_particles: bool = False
    worker_seeds: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.m_workers < 1:
            raise ValueError("need at least one worker")
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.estimate_every is not None and self.estimate_every < 1:
            raise ValueError("estimate_every must be positive")
        if self.worker_seeds is not None and len(self.worker_seeds) != self.m_workers:
            raise ValueError("worker_seeds must list one seed per worker")


@dataclass(frozen=True)
class MinimumEstimate:
    theta: np.ndarray
    worker: int
    iteration: int
    log_z: float
    f_value: float


@dataclass(frozen=True)
class EstimateRow:
    iteration: int
    worker: int
    log_z: Tuple[float, ...]  # cumulative per worker at this iteration
    theta: np.ndarray
    f_value: float


@dataclass
class RunRecord:
    problem: str
    config: OptimizerConfig
    rows: List[EstimateRow]
    final: MinimumEstimate
    log_z_by_step: np.ndarray  # (T, M) per-step normalizer estimates
    wall_time: float
    final_particles: Optional[np.ndarray] = None  # (M, N, d) when kept


def select_best_worker(log_z: Sequence[float]) -> int:
    """Index of the highest accumulated normalizer; ties pick the lowest
    index.  All -inf raises NoViableWorkerError; NaN is rejected."""
    arr = np.asarray(log_z, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("need a non-empty 1-d array of values")
    if np.isnan(arr).any():
        raise ValueError("NaN normalizer value")
    if (arr == -np.inf).all():
        raise NoViableWorkerError("all workers have log Z = -inf")
    return int(np.argmax(arr))


def run_psmco(
    model: CostModel,
    space: SearchSpace,
    config: OptimizerConfig,
    problem_name: str = "cost",
) -> Tuple[MinimumEstimate, RunRecord]:
    """Run M independent samplers over one pass of the data; returns the
    final estimate plus the full trace of best-worker estimates.

    Every worker consumes its own schedule of T = ceil(n/K) disjoint
    batches.  At each emission the workers are ranked by cumulative
    log-normalizer, the winner's particle cloud is summarized by its
    KDE mode (bandwidth from the population-size rule), and the full
    cost is evaluated there.
    """
    start = time.perf_counter()
    m_workers = config.m_workers
    if config.worker_seeds is not None:
        rngs = [np.random.default_rng(s) for s in config.worker_seeds]
    else:
        seq = np.random.SeedSequence(config.seed)
        rngs = [np.random.default_rng(child) for child in seq.spawn(m_workers)]

    init_point = None
    if config.init_point is not None:
        init_point = np.asarray(config.init_point, dtype=float)

    systems: List[ParticleSystem] = []
    schedules = []
    kernel = JitterKernelSpec(
        space=space,
        proposal_std=config.proposal_std,
        n_particles=config.n_particles,
        epsilon=config.epsilon,
    )
    for m, rng in enumerate(rngs):
        schedules.append(build_schedule(model.n, config.batch_size, rng))
        systems.append(
            init_particles(
                space,
                config.n_particles,
                rng,
                worker_id=m,
                init_point=init_point,
                init_std=config.init_std,
            )
        )

    total_steps = schedules[0].num_batches
    stride = config.estimate_every if config.estimate_every is not None else total_steps
    log_z_by_step = np.empty((total_steps, m_workers))
    rows: List[EstimateRow] = []
    kde_spec = KernelDensitySpec(
        dim=space.dim, bandwidth=bandwidth_rule(config.n_particles, space.dim)
    )

    def one_step(t: int, m: int) -> float:
        return sampler_step(systems[m], model, schedules[m].batches[t], kernel)

    def emit(iteration: int) -> None:
        cumulative = tuple(s.log_z_cumulative for s in systems)
        try:
            winner = select_best_worker(cumulative)
        except NoViableWorkerError:
            raise RunFailureError(
                f"every worker degenerated by iteration {iteration}",
                log_z_by_step[:iteration],
            ) from None
        _, theta = map_estimate(kde_spec, systems[winner].particles)
        rows.append(
            EstimateRow(
                iteration=iteration,
                worker=winner,
                log_z=cumulative,
                theta=theta,
                f_value=model.total_cost(theta),
            )
        )

    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for t in range(total_steps):
            if pool is None:
                for m in range(m_workers):
                    log_z_by_step[t, m] = one_step(t, m)
            else:
                for m, value in enumerate(pool.map(partial(one_step, t), range(m_workers))):
                    log_z_by_step[t, m] = value
            if (t + 1) % stride == 0 or t + 1 == total_steps:
                emit(t + 1)
    finally:
        if pool is not None:
            pool.shutdown()

    last = rows[-1]
    final = MinimumEstimate(
        theta=last.theta,
        worker=last.worker,
        iteration=last.iteration,
        log_z=last.log_z[last.worker],
        f_value=last.f_value,
    )
    final_particles = None
    if config.keep_final_particles:
        final_particles = np.stack([s.particles for s in systems])
    record = RunRecord(
        problem=problem_name,
        config=config,
        rows=rows,
        final=final,
        log_z_by_step=log_z_by_step,
        wall_time=time.perf_counter() - start,
        final_particles=final_particles,
    )
    return final, record
