"""Search spaces, finite-sum cost models, mini-batch schedules, log-weights.

Everything downstream works in the log domain: batch potentials are
log-potentials, weights are log-weights, and normalization subtracts the
max before exponentiating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


def logsumexp_last(a: np.ndarray) -> np.ndarray:
    """log(sum(exp(a))) over the last axis via the max-shift trick.

    Lean replacement for the general scipy routine on hot paths; inputs
    are log-values in [-inf, inf).  Rows that are all -inf map to -inf.
    """
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=-1, keepdims=True)
    # freeze all--inf rows so the subtraction below cannot produce NaN;
    # those rows then reduce to 0 + log(0) = -inf, which is the answer
    safe = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return safe[..., 0] + np.log(np.sum(np.exp(a - safe), axis=-1))


class EvaluationError(RuntimeError):
    """A cost component returned a non-finite value.

    Carries the component index and the point so the caller can report
    which evaluation blew up.
    """

    def __init__(self, index: int, theta: np.ndarray, value: float):
        self.index = int(index)
        self.theta = np.asarray(theta, dtype=float).copy()
        self.value = float(value)
        super().__init__(
            f"component {self.index} returned non-finite value {self.value!r} "
            f"at theta={self.theta.tolist()}"
        )


class DegenerateWeightsError(RuntimeError):
    """All log-weights are -inf; there is nothing to normalize."""


@dataclass(frozen=True)
class SearchSpace:
    """Axis-aligned box in R^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.ndim != 1 or upper.ndim != 1:
            raise ValueError("bounds must be 1-d arrays")
        if lower.shape != upper.shape:
            raise ValueError("lower and upper must have the same length")
        if lower.size < 1:
            raise ValueError("dimension must be at least 1")
        if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
            raise ValueError("bounds must be finite")
        if not (lower < upper).all():
            raise ValueError("need lower[j] < upper[j] for every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, theta: np.ndarray) -> bool:
        """True if theta (a single point) lies inside the box, bounds included."""
        t = np.asarray(theta, dtype=float)
        return bool((t >= self.lower).all() and (t <= self.upper).all())

    def contains_all(self, thetas: np.ndarray) -> bool:
        """True if every row of thetas lies inside the box."""
        t = np.asarray(thetas, dtype=float)
        return bool((t >= self.lower).all() and (t <= self.upper).all())


def clip_to_space(thetas: np.ndarray, space: SearchSpace) -> np.ndarray:
    """Project points onto the box, coordinate-wise."""
    return np.clip(np.asarray(thetas, dtype=float), space.lower, space.upper)


@dataclass(frozen=True)
class CostModel:
    """Finite-sum cost f(theta) = sum_{i=1}^{n} f_i(theta).

    component_eval(i, theta) evaluates a single component; indices are
    0-based internally.  batch_eval, when given, takes (indices, thetas)
    with thetas of shape (P, d) and returns the (P,) array of summed
    component values over the batch; it must agree with component_eval.
    Evaluations must be deterministic.
    """

    n: int
    component_eval: Callable[[int, np.ndarray], float]
    batch_eval: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    name: str = "cost"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one component")

    def batch_cost(self, indices: np.ndarray, theta: np.ndarray) -> float:
        """Sum of f_i(theta) over i in indices, for a single point."""
        if self.batch_eval is not None:
            out = self.batch_eval(np.asarray(indices), np.asarray(theta, dtype=float)[None, :])
            return float(out[0])
        return float(sum(self.component_eval(int(i), theta) for i in indices))

    def total_cost(self, theta: np.ndarray) -> float:
        """Full cost f(theta); an O(n) sweep."""
        return self.batch_cost(np.arange(self.n), theta)

    def total_cost_many(self, thetas: np.ndarray) -> np.ndarray:
        """Full cost at each row of thetas."""
        thetas = np.asarray(thetas, dtype=float)
        if self.batch_eval is not None:
            return np.asarray(self.batch_eval(np.arange(self.n), thetas), dtype=float)
        return np.array([self.total_cost(t) for t in thetas])


@dataclass(frozen=True)
class MiniBatchSchedule:
    """Disjoint mini-batches covering all component indices exactly once.

    batches[t] has size K for t < T-1; the last batch holds the
    remainder n - K*(T-1), so it may be shorter.
    """

    n: int
    batch_size: int
    batches: tuple

    def __post_init__(self):
        if self.batch_size < 1 or self.batch_size > self.n:
            raise ValueError("batch size must be in [1, n]")
        seen = np.concatenate([np.asarray(b) for b in self.batches])
        if seen.size != self.n or not np.array_equal(np.sort(seen), np.arange(self.n)):
            raise ValueError("batches must partition the index set exactly")
        t = len(self.batches)
        expected_t = -(-self.n // self.batch_size)  # ceil division
        if t != expected_t:
            raise ValueError(f"expected {expected_t} batches, got {t}")
        for b in self.batches[:-1]:
            if len(b) != self.batch_size:
                raise ValueError("every batch but the last must have the full size")
        if len(self.batches[-1]) != self.n - self.batch_size * (t - 1):
            raise ValueError("last batch has the wrong size")

    @property
    def num_batches(self) -> int:
        return len(self.batches)

    def __iter__(self):
        return iter(self.batches)


def build_schedule(n: int, batch_size: int, rng: np.random.Generator) -> MiniBatchSchedule:
    """Chunk a uniformly random permutation of the n indices into batches.

    Raises ValueError when batch_size is 0, negative, or larger than n.
    """
    if batch_size < 1 or batch_size > n:
        raise ValueError(f"batch size must be in [1, n]; got {batch_size} with n={n}")
    perm = rng.permutation(n)
    batches = tuple(perm[start:start + batch_size] for start in range(0, n, batch_size))
    return MiniBatchSchedule(n=n, batch_size=batch_size, batches=batches)


def log_potential(model: CostModel, batch: Sequence[int], theta: np.ndarray) -> float:
    """log G(theta) = -sum of f_i(theta) over the batch, never exponentiated.

    Any non-finite component value raises EvaluationError with the
    offending index and point.
    """
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for i in batch:
        v = float(model.component_eval(int(i), theta))
        if not np.isfinite(v):
            raise EvaluationError(int(i), theta, v)
        total += v
    return -total


def log_potentials(model: CostModel, batch: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Vectorized log G over the rows of thetas, shape (P,).

    Uses the model's batch_eval fast path when available; a non-finite
    batch sum triggers a scalar rescan to locate the offending component.
    """
    batch = np.asarray(batch)
    thetas = np.asarray(thetas, dtype=float)
    if model.batch_eval is None:
        return np.array([log_potential(model, batch, t) for t in thetas])
    sums = np.asarray(model.batch_eval(batch, thetas), dtype=float)
    bad = ~np.isfinite(sums)
    if bad.any():
        # Rescan component-by-component at the first bad point to attribute
        # the failure.  A batch sum of +inf with every component finite is
        # plain overflow; represent it as log G = -inf instead of an error.
        for p in np.nonzero(bad)[0]:
            for i in batch:
                v = float(model.component_eval(int(i), thetas[p]))
                if not np.isfinite(v):
                    raise EvaluationError(int(i), thetas[p], v)
        sums = sums.copy()
        sums[bad & (sums > 0)] = np.inf
        still_bad = ~np.isfinite(sums) & ~(sums == np.inf)
        if still_bad.any():
            p = int(np.nonzero(still_bad)[0][0])
            raise EvaluationError(-1, thetas[p], float(sums[p]))
    return -sums


@dataclass
class LogWeightVector:
    """Log-weights for a particle system.

    normalized=True asserts that exp(log_values) sums to 1 (within
    1e-12).  Construction never exponentiates; normalize() subtracts the
    running max first.
    """

    log_values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.ndim != 1 or lv.size < 1:
            raise ValueError("log-weights must be a non-empty 1-d array")
        if np.isnan(lv).any() or (lv == np.inf).any():
            raise ValueError("log-weights must be in [-inf, inf)")
        self.log_values = lv

    def normalize(self) -> "LogWeightVector":
        return LogWeightVector(normalize_log_weights(self.log_values), normalized=True)

    def probabilities(self) -> np.ndarray:
        """Plain-domain weights; only meaningful once normalized."""
        if not self.normalized:
            return self.normalize().probabilities()
        return np.exp(self.log_values)


def normalize_log_weights(log_w: np.ndarray) -> np.ndarray:
    """Shift by the max and renormalize so that exp sums to one.

    Shift-invariant by construction.  Raises DegenerateWeightsError when
    every entry is -inf.
    """
    log_w = np.asarray(log_w, dtype=float)
    if np.isnan(log_w).any() or (log_w == np.inf).any():
        raise ValueError("log-weights must be in [-inf, inf)")
    m = np.max(log_w)
    if m == -np.inf:
        raise DegenerateWeightsError("all log-weights are -inf")
    shifted = log_w - m
    # log of the normalizer, computed from the shifted values
    log_norm = np.log(np.sum(np.exp(shifted)))
    return shifted - log_norm
