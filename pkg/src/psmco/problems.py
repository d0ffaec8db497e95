"""Benchmark problems and the stochastic-gradient baseline.

Two finite-sum costs are provided: a two-dimensional Gaussian-mixture
landscape with four wells, and a one-feature sigmoid regression whose
cost surface has large flat regions.  Both expose exact per-component
evaluation plus a vectorized batch path, and both are generated from a
seed so datasets are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from .core import CostModel, SearchSpace, logsumexp_last


# ---------------------------------------------------------------------------
# four-well Gaussian mixture cost


@dataclass(frozen=True)
class MixtureProblemSpec:
    """Finite sum of per-datum mixture surprisals.

    Component i is -(1/lam) * log of a 4-part equal-weight Gaussian
    mixture with isotropic covariance r*I in 2-d; the 4 centers for each
    datum are drawn once around the base centers with variance mean_var.
    """

    n: int = 1000
    lam: float = 10.0
    r: float = 0.2
    mean_var: float = 0.5
    base_means: Tuple[Tuple[float, float], ...] = (
        (4.0, 4.0),
        (-4.0, -4.0),
        (-4.0, 4.0),
        (4.0, -4.0),
    )
    seed: int = 0
    half_width: float = 50.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one component")
        if self.lam <= 0 or self.r <= 0 or self.mean_var < 0:
            raise ValueError("lam and r must be positive, mean_var non-negative")


@dataclass(frozen=True)
class MixtureProblem:
    spec: MixtureProblemSpec
    model: CostModel
    space: SearchSpace
    means: np.ndarray  # (n, 4, 2) mixture centers per component


def make_mixture_problem(spec: MixtureProblemSpec) -> MixtureProblem:
    """Draw the per-component centers and wrap the cost as a CostModel."""
    rng = np.random.default_rng(spec.seed)
    base = np.asarray(spec.base_means, dtype=float)  # (4, 2)
    k_parts, d = base.shape
    means = base[None, :, :] + rng.normal(
        0.0, math.sqrt(spec.mean_var), size=(spec.n, k_parts, d)
    )
    inv_two_r = 1.0 / (2.0 * spec.r)
    log_norm = math.log(2.0 * math.pi * spec.r)  # 2-d isotropic normalizer

    def component_eval(i: int, theta: np.ndarray) -> float:
        diff = np.asarray(theta, dtype=float)[None, :] - means[i]  # (4, 2)
        sq = np.einsum("kd,kd->k", diff, diff)
        return float(-(logsumexp_last(-sq * inv_two_r) - log_norm) / spec.lam)

    def batch_eval(indices: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices)
        thetas = np.asarray(thetas, dtype=float)
        m = means[indices]  # (K, 4, 2)
        out = np.empty(thetas.shape[0])
        chunk = max(1, (1 << 22) // max(1, m.shape[0] * k_parts * d))
        for start in range(0, thetas.shape[0], chunk):
            block = thetas[start:start + chunk]
            diff = block[:, None, None, :] - m[None, :, :, :]  # (P, K, 4, 2)
            sq = np.einsum("pkcd,pkcd->pkc", diff, diff)
            inner = logsumexp_last(-sq * inv_two_r) - log_norm  # (P, K)
            out[start:start + block.shape[0]] = -inner.sum(axis=1) / spec.lam
        return out

    model = CostModel(
        n=spec.n, component_eval=component_eval, batch_eval=batch_eval, name="mixture"
    )
    space = SearchSpace(
        lower=np.full(d, -spec.half_width), upper=np.full(d, spec.half_width)
    )
    return MixtureProblem(spec=spec, model=model, space=space, means=means)


def find_grid_minima(
    model: CostModel,
    lower: np.ndarray,
    upper: np.ndarray,
    num_points: int = 200,
) -> Tuple[np.ndarray, np.ndarray]:
    """Locate interior local minima of the total cost on a regular 2-d grid.

    A grid node is a minimum when strictly below all 8 neighbors (edges
    padded with +inf).  Returns (coords, values) sorted by ascending
    value.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    xs = np.linspace(lower[0], upper[0], num_points)
    ys = np.linspace(lower[1], upper[1], num_points)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    vals = model.total_cost_many(pts).reshape(num_points, num_points)
    padded = np.pad(vals, 1, constant_values=np.inf)
    is_min = np.ones_like(vals, dtype=bool)
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            neighbor = padded[1 + dx:1 + dx + num_points, 1 + dy:1 + dy + num_points]
            is_min &= vals < neighbor
    ii, jj = np.nonzero(is_min)
    coords = np.column_stack([xs[ii], ys[jj]])
    found = vals[ii, jj]
    order = np.argsort(found)
    return coords[order], found[order]


# ---------------------------------------------------------------------------
# sigmoid regression cost


@dataclass(frozen=True)
class SigmoidProblemSpec:
    """Squared-error fit of a two-parameter sigmoid to scalar data.

    g_i(theta) = sigmoid(theta_0 + theta_1 * x_i) and component i is
    (y_i - g_i)^2.  Inputs are uniform on [x_low, x_high]; targets are
    the noiseless sigmoid at theta_true unless noise_std > 0.
    """

    n: int = 100000
    x_low: float = -2.5
    x_high: float = 2.5
    theta_true: Tuple[float, float] = (1.0, -2.0)
    noise_std: float = 0.0
    seed: int = 0
    half_width: float = 200.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one component")
        if not self.x_low < self.x_high:
            raise ValueError("need x_low < x_high")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")


@dataclass(frozen=True)
class SigmoidProblem:
    spec: SigmoidProblemSpec
    model: CostModel
    space: SearchSpace
    x: np.ndarray
    y: np.ndarray

    def mean_gradient(self, theta: np.ndarray, indices: np.ndarray) -> np.ndarray:
        """Average gradient of the components in `indices` at theta."""
        theta = np.asarray(theta, dtype=float)
        xb = self.x[indices]
        yb = self.y[indices]
        g = expit(theta[0] + theta[1] * xb)
        common = -2.0 * (yb - g) * g * (1.0 - g)
        return np.array([common.mean(), (common * xb).mean()])


def make_sigmoid_problem(spec: SigmoidProblemSpec) -> SigmoidProblem:
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(spec.x_low, spec.x_high, size=spec.n)
    t0, t1 = spec.theta_true
    y = expit(t0 + t1 * x)
    if spec.noise_std > 0:
        y = y + rng.normal(0.0, spec.noise_std, size=spec.n)

    def component_eval(i: int, theta: np.ndarray) -> float:
        theta = np.asarray(theta, dtype=float)
        g = expit(theta[0] + theta[1] * x[i])
        return float((y[i] - g) ** 2)

    def batch_eval(indices: np.ndarray, thetas: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices)
        thetas = np.asarray(thetas, dtype=float)
        xb = x[indices]
        yb = y[indices]
        out = np.empty(thetas.shape[0])
        chunk = max(1, (1 << 23) // max(1, xb.size))
        for start in range(0, thetas.shape[0], chunk):
            block = thetas[start:start + chunk]
            z = block[:, 0][:, None] + block[:, 1][:, None] * xb[None, :]
            resid = yb[None, :] - expit(z)
            out[start:start + block.shape[0]] = np.einsum("pk,pk->p", resid, resid)
        return out

    model = CostModel(
        n=spec.n, component_eval=component_eval, batch_eval=batch_eval, name="sigmoid"
    )
    space = SearchSpace(
        lower=np.full(2, -spec.half_width), upper=np.full(2, spec.half_width)
    )
    return SigmoidProblem(spec=spec, model=model, space=space, x=x, y=y)


# ---------------------------------------------------------------------------
# parallel stochastic-gradient baseline


@dataclass(frozen=True)
class PSGDConfig:
    """Independent gradient-descent chains on the same finite sum.

    Each chain starts at init_point plus Gaussian noise of std init_std,
    walks its own without-replacement mini-batch stream, and uses the
    decaying step eta_t = step_size / sqrt(t).  step_size=0 freezes the
    chains at their starting points.
    """

    n_chains: int = 25
    step_size: float = 0.5
    init_point: Tuple[float, float] = (0.0, 0.0)
    init_std: float = 0.0
    batch_size: int = 100
    iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValueError("need at least one chain")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.step_size < 0:
            raise ValueError("step_size must be non-negative")
        if self.init_std < 0:
            raise ValueError("init_std must be non-negative")


@dataclass
class PSGDRecord:
    config: PSGDConfig
    f_best: np.ndarray        # (iterations + 1,), entry t is min over chains after t updates
    thetas: np.ndarray        # (n_chains, 2) final chain positions
    f_final: np.ndarray       # (n_chains,) final full costs


def run_psgd_baseline(problem: SigmoidProblem, config: PSGDConfig) -> PSGDRecord:
    """Run all chains in lockstep; tracks min-over-chains full cost.

    Chains never talk to each other; the only aggregate is the reported
    best cost at each iteration, which gives the baseline the benefit of
    oracle chain selection.
    """
    rng = np.random.default_rng(config.seed)
    m = config.n_chains
    n = problem.spec.n
    k = min(config.batch_size, n)
    thetas = np.asarray(config.init_point, dtype=float)[None, :] + rng.normal(
        0.0, config.init_std, size=(m, 2)
    )
    f_best = np.empty(config.iterations + 1)
    f_best[0] = problem.model.total_cost_many(thetas).min()

    perms = np.empty((m, n), dtype=np.intp)
    offset = n  # forces a reshuffle on first use
    for t in range(1, config.iterations + 1):
        if offset + k > n:
            for c in range(m):
                perms[c] = rng.permutation(n)
            offset = 0
        batch = perms[:, offset:offset + k]  # (m, k)
        offset += k
        xb = problem.x[batch]
        yb = problem.y[batch]
        z = thetas[:, 0][:, None] + thetas[:, 1][:, None] * xb
        g = expit(z)
        common = -2.0 * (yb - g) * g * (1.0 - g)
        grad = np.column_stack([common.mean(axis=1), (common * xb).mean(axis=1)])
        thetas = thetas - (config.step_size / math.sqrt(t)) * grad
        f_best[t] = problem.model.total_cost_many(thetas).min()

    return PSGDRecord(
        config=config,
        f_best=f_best,
        thetas=thetas,
        f_final=problem.model.total_cost_many(thetas),
    )
