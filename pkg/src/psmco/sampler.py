"""Single-worker particle sampler: jitter, weight, resample.

One step processes one mini-batch: every particle is jittered, weighted
by the batch potential, and the population is resampled from the
normalized weights.  The per-step normalizer estimates are accumulated
in the log domain so workers can later be ranked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    CostModel,
    DegenerateWeightsError,
    LogWeightVector,
    SearchSpace,
    clip_to_space,
    log_potentials,
)


@dataclass(frozen=True)
class JitterKernelSpec:
    """Sticky Gaussian move: keep the particle with probability 1-epsilon,
    otherwise add isotropic N(0, proposal_std**2 I) noise and clip back
    into the box.

    epsilon may not exceed 1/sqrt(n_particles); that cap keeps the
    per-step perturbation small enough for the population size.  When
    epsilon is omitted it defaults to the cap itself.
    """

    space: SearchSpace
    proposal_std: float
    n_particles: int
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("need at least one particle")
        if not (self.proposal_std >= 0.0 and math.isfinite(self.proposal_std)):
            raise ValueError("proposal_std must be finite and non-negative")
        cap = 1.0 / math.sqrt(self.n_particles)
        eps = self.epsilon
        if eps is None:
            eps = cap
            object.__setattr__(self, "epsilon", eps)
        if not (0.0 < eps <= 1.0):
            raise ValueError("epsilon must lie in (0, 1]")
        if eps > cap:
            raise ValueError(
                f"epsilon={eps} exceeds 1/sqrt(N)={cap} for N={self.n_particles}"
            )


@dataclass
class ParticleSystem:
    """Mutable state of one worker's particle population.

    log_z_cumulative is the running sum of per-step normalizer estimates,
    kept equal to sum(log_z_steps) by accumulating in step order.
    """

    particles: np.ndarray
    space: SearchSpace
    rng: np.random.Generator
    worker_id: int = 0
    iteration: int = 0
    log_z_cumulative: float = 0.0
    log_z_steps: list = field(default_factory=list)

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]


def init_particles(
    space: SearchSpace,
    n_particles: int,
    rng: np.random.Generator,
    worker_id: int = 0,
    init_point: Optional[np.ndarray] = None,
    init_std: float = 0.0,
) -> ParticleSystem:
    """Draw the initial population.

    Default is uniform over the box.  When init_point is given the
    population is Gaussian around that point with the given std, clipped
    into the box.
    """
    if n_particles < 1:
        raise ValueError("need at least one particle")
    d = space.dim
    if init_point is None:
        width = space.upper - space.lower
        if not (width > 0).all():
            raise ValueError("box must have positive width in every coordinate")
        pts = space.lower + rng.random((n_particles, d)) * width
    else:
        center = np.asarray(init_point, dtype=float)
        if center.shape != (d,):
            raise ValueError("init_point has the wrong dimension")
        pts = center + rng.normal(0.0, init_std, size=(n_particles, d))
        pts = clip_to_space(pts, space)
    return ParticleSystem(particles=pts, space=space, rng=rng, worker_id=worker_id)


def jitter(system: ParticleSystem, kernel: JitterKernelSpec) -> int:
    """Apply the sticky Gaussian move in place; returns how many moved.

    The uniform mask and the full noise matrix are always drawn, so the
    RNG stream advances identically whatever the mask turns out to be.
    """
    n, d = system.particles.shape
    move = system.rng.random(n) < kernel.epsilon
    noise = system.rng.normal(0.0, kernel.proposal_std, size=(n, d))
    out = system.particles.copy()
    out[move] += noise[move]
    system.particles = clip_to_space(out, system.space)
    return int(move.sum())


def weight_and_accumulate(
    system: ParticleSystem, model: CostModel, batch: np.ndarray
) -> LogWeightVector:
    """Weight the population by the batch potential.

    Records the per-step normalizer estimate, the mean potential
    log Z_t = log((1/N) sum_i G(theta_i)), and adds it to the running
    total before any normalization, so a degenerate step still counts
    toward the cumulative value.  Raises DegenerateWeightsError when
    every potential is -inf.

    The max-shift and exp-sum are shared between the normalizer and the
    normalized weights, matching core.normalize_log_weights bit for bit.
    """
    log_g = log_potentials(model, batch, system.particles)
    n = system.n_particles
    m = np.max(log_g)
    if m == -np.inf:
        system.log_z_steps.append(-math.inf)
        system.log_z_cumulative += -math.inf
        raise DegenerateWeightsError("all batch potentials are -inf")
    shifted = log_g - m
    log_norm = np.log(np.sum(np.exp(shifted)))
    log_z_t = float(m + log_norm - math.log(n))
    system.log_z_steps.append(log_z_t)
    system.log_z_cumulative += log_z_t
    return LogWeightVector(shifted - log_norm, normalized=True)


def draw_ancestors(
    weights: LogWeightVector, n_draws: int, rng: np.random.Generator
) -> np.ndarray:
    """n_draws iid categorical indices from the normalized weights.

    Inverse-CDF draws: u lands in the first slot whose cumulative weight
    reaches it, so a u exactly on a boundary selects the lower index.
    """
    if not weights.normalized:
        weights = weights.normalize()
    cum = np.cumsum(weights.probabilities())
    cum[-1] = 1.0  # guard against round-off shortfall at the top
    u = rng.random(n_draws)
    return np.searchsorted(cum, u, side="left")


def resample_multinomial(system: ParticleSystem, weights: LogWeightVector) -> None:
    """Replace the population with N draws from the weighted one."""
    idx = draw_ancestors(weights, system.n_particles, system.rng)
    system.particles = system.particles[idx].copy()


def sampler_step(
    system: ParticleSystem,
    model: CostModel,
    batch: np.ndarray,
    kernel: JitterKernelSpec,
) -> float:
    """One full jitter/weight/resample iteration; returns this step's
    normalizer estimate.

    When every potential underflows to -inf the population is kept as
    jittered (no resampling) and the step contributes -inf to the
    cumulative total; the run carries on.
    """
    jitter(system, kernel)
    try:
        weights = weight_and_accumulate(system, model, batch)
    except DegenerateWeightsError:
        system.iteration += 1
        return system.log_z_steps[-1]
    resample_multinomial(system, weights)
    system.iteration += 1
    return system.log_z_steps[-1]
