"""Core domain types: ensemble matrices, vote profiles, and the two orderings.

All values are immutable after construction (numpy arrays are stored
read-only), so instances are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateAbstain,
    DegenerateBound,
    DimensionError,
    InfeasibleConstraint,
    InvalidCost,
)

# Input validation slack; solver-side assertions use SOLVER_TOL.
VALIDATION_TOL = 1e-12
SOLVER_TOL = 1e-9


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_array(vector) -> np.ndarray:
    """Accept a domain vector type or any 1-D sequence of reals."""
    values = getattr(vector, "values", None)
    if values is None:
        values = getattr(vector, "probs", vector)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionError("expected a 1-D vector")
    return arr


def compensated_cumsum(values) -> np.ndarray:
    """Kahan-compensated running sums.

    Threshold scans compare prefix sums against n*lambda; compensation keeps
    those inclusive comparisons stable when the constraint binds exactly.
    """
    arr = np.asarray(values, dtype=float)
    out = np.empty(arr.size)
    total = 0.0
    carry = 0.0
    for k, x in enumerate(arr):
        y = float(x) - carry
        t = total + y
        carry = (t - total) - y
        total = t
        out[k] = total
    return out


@dataclass(frozen=True)
class EnsembleMatrix:
    """Sign predictions of the base classifiers on the unlabeled examples.

    Rows index examples, columns index classifiers; every entry is -1 or +1.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = _readonly(self.entries)
        if entries.ndim != 2:
            raise DimensionError("prediction matrix must be 2-D")
        if entries.shape[0] < 1 or entries.shape[1] < 1:
            raise DimensionError("prediction matrix must be non-empty")
        if not np.all(np.abs(entries) == 1.0):
            raise ValueError("prediction entries must be exactly -1 or +1")
        object.__setattr__(self, "entries", entries)

    @property
    def num_examples(self) -> int:
        return self.entries.shape[0]

    @property
    def num_hypotheses(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class WeightVector:
    """A distribution over the hypotheses (posterior or prior)."""

    weights: np.ndarray
    role: str = "posterior"

    def __post_init__(self):
        weights = _readonly(self.weights)
        if weights.ndim != 1 or weights.size < 1:
            raise DimensionError("weights must form a non-empty 1-D vector")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > VALIDATION_TOL:
            raise ValueError("weights must sum to 1")
        if self.role not in ("posterior", "prior"):
            raise ValueError("role must be 'posterior' or 'prior'")
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.weights.size


def _validate_box(values: np.ndarray, what: str) -> np.ndarray:
    if np.any(np.abs(values) > 1.0 + VALIDATION_TOL):
        raise ValueError(f"{what} components must lie in [-1, 1]")
    return np.clip(values, -1.0, 1.0)


@dataclass(frozen=True)
class PredictionVector:
    """Confidence-rated label predictions, one real in [-1, 1] per example."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError("predictions must form a 1-D vector")
        object.__setattr__(self, "values", _readonly(_validate_box(values, "prediction")))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class LabelVector:
    """Stochastic labels, one real in [-1, 1] per example."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DimensionError("labels must form a 1-D vector")
        object.__setattr__(self, "values", _readonly(_validate_box(values, "label")))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class AbstainStrategy:
    """Per-example abstain probabilities together with the abstain cost."""

    probs: np.ndarray
    alpha: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1:
            raise DimensionError("abstain probabilities must form a 1-D vector")
        if np.any(probs < -VALIDATION_TOL) or np.any(probs > 1.0 + VALIDATION_TOL):
            raise ValueError("abstain probabilities must lie in [0, 1]")
        if not self.alpha > 0:
            raise InvalidCost("abstain cost must be positive")
        object.__setattr__(self, "probs", _readonly(np.clip(probs, 0.0, 1.0)))
        object.__setattr__(self, "alpha", float(self.alpha))

    def __len__(self) -> int:
        return self.probs.size


@dataclass(frozen=True)
class LabeledSample:
    """Training predictions with their known labels."""

    predictions: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        predictions = _readonly(self.predictions)
        labels = _readonly(self.labels)
        if predictions.ndim != 2 or labels.ndim != 1:
            raise DimensionError("expected a 2-D prediction grid and 1-D labels")
        if predictions.shape[0] != labels.size:
            raise DimensionError("label count must equal prediction row count")
        if not np.all(np.abs(predictions) == 1.0):
            raise ValueError("training predictions must be exactly -1 or +1")
        if not np.all(np.abs(labels) == 1.0):
            raise ValueError("training labels must be exactly -1 or +1")
        object.__setattr__(self, "predictions", predictions)
        object.__setattr__(self, "labels", labels)

    @property
    def num_examples(self) -> int:
        return self.labels.size

    @property
    def num_hypotheses(self) -> int:
        return self.predictions.shape[1]


@dataclass(frozen=True)
class VoteProfile:
    """Ensemble votes plus the margin ordering every solver works in.

    ``order[k]`` is the original index of the k-th largest |vote|; ties break
    by ascending original index, so zero votes always sort last.  Construction
    fails unless the mean absolute vote covers the correlation bound ``lam``.
    """

    votes: np.ndarray
    lam: float
    order: np.ndarray = field(init=False)
    abs_sorted: np.ndarray = field(init=False)
    prefix_abs: np.ndarray = field(init=False)

    def __post_init__(self):
        votes = np.asarray(self.votes, dtype=float)
        if votes.ndim != 1 or votes.size < 1:
            raise DimensionError("votes must form a non-empty 1-D vector")
        votes = _readonly(_validate_box(votes, "vote"))
        lam = float(self.lam)
        if lam <= 0:
            raise DegenerateBound(
                "correlation bound must be positive; callers may fall back to "
                "the averaged prediction g = a"
            )
        if lam > 1.0 + VALIDATION_TOL:
            raise InfeasibleConstraint("correlation bound cannot exceed 1")
        magnitudes = np.abs(votes)
        order = _readonly(np.argsort(-magnitudes, kind="stable"), dtype=int)
        abs_sorted = _readonly(magnitudes[order])
        prefix_abs = _readonly(compensated_cumsum(abs_sorted))
        if prefix_abs[-1] < votes.size * lam - VALIDATION_TOL:
            raise InfeasibleConstraint(
                f"mean |vote| {prefix_abs[-1] / votes.size:.6g} is below the "
                f"correlation bound {lam:.6g}"
            )
        object.__setattr__(self, "votes", votes)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "abs_sorted", abs_sorted)
        object.__setattr__(self, "prefix_abs", prefix_abs)

    @property
    def n(self) -> int:
        return self.votes.size

    def sorted_votes(self) -> np.ndarray:
        return self.votes[self.order]

    def to_original_order(self, sorted_values: np.ndarray) -> np.ndarray:
        out = np.empty(self.n)
        out[self.order] = sorted_values
        return out


def compute_votes(matrix: EnsembleMatrix, q: WeightVector) -> np.ndarray:
    """Weighted-average ensemble prediction per example, each in [-1, 1]."""
    if len(q) != matrix.num_hypotheses:
        raise DimensionError(
            f"weight vector has length {len(q)}, matrix has "
            f"{matrix.num_hypotheses} hypotheses"
        )
    votes = matrix.entries @ q.weights
    # |votes| <= sum(q) = 1 mathematically; clip float residue only.
    return np.clip(votes, -1.0, 1.0)


def sort_profile(votes, lam: float) -> VoteProfile:
    """Build the feasible, margin-sorted profile used by all solvers."""
    return VoteProfile(votes=as_array(votes), lam=lam)


def payoff(g, z) -> float:
    """Average correlation (1/n) * sum(g_i * z_i) between predictions and labels."""
    gv = as_array(g)
    zv = as_array(z)
    if gv.size != zv.size:
        raise DimensionError("prediction and label vectors differ in length")
    return float(gv @ zv) / gv.size


def ordering2_keys(votes, strategy: AbstainStrategy) -> tuple[np.ndarray, np.ndarray]:
    """Commitment-adjusted margins |a_i| / (1 - p_i) and their sort order.

    Returns the keys in original index order and the permutation that sorts
    them in nonincreasing order (ties by ascending original index).  Requires
    every abstain probability to stay clear of 1.
    """
    a = as_array(votes)
    probs = strategy.probs
    if a.size != probs.size:
        raise DimensionError("votes and abstain probabilities differ in length")
    if np.any(probs >= 1.0 - 1e-9):
        raise DegenerateAbstain("abstain probability too close to 1 for reweighting")
    keys = np.abs(a) / (1.0 - probs)
    order = np.argsort(-keys, kind="stable")
    return keys, order
