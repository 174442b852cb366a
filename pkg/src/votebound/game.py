"""Closed-form solution of the confidence-rated prediction game.

The predictor maximizes, and nature minimizes, the average correlation
(1/n) z.g over the box [-1,1]^n, with nature constrained to keep the votes'
average correlation (1/n) z.a at least lam.  Everything below works in the
descending-|vote| ordering carried by the profile and translates results
back to original index order.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np

from .model import (
    SOLVER_TOL,
    VALIDATION_TOL,
    LabelVector,
    PredictionVector,
    VoteProfile,
    payoff,
)


@dataclass(frozen=True)
class GameSolution:
    """Threshold index, game value, optimal strategies, and the value bound.

    ``v`` is 1-based in sorted order; ``g_star`` and ``z_star`` are reported
    in original example order.
    """

    v: int
    value: float
    g_star: PredictionVector
    z_star: LabelVector
    lower_bound: float


def find_threshold(profile: VoteProfile) -> int:
    """Smallest count v of top-margin examples whose margins cover the bound.

    v = min { i : (1/n) * sum_{j<=i} |a_j| >= lam } in sorted order.
    Feasibility of the profile guarantees 1 <= v <= n and |a_v| > 0.
    """
    need = profile.n * profile.lam - VALIDATION_TOL
    hits = np.nonzero(profile.prefix_abs >= need)[0]
    v = int(hits[0]) + 1
    if profile.abs_sorted[v - 1] <= 0.0:
        # Unreachable for lam > 0: a zero margin cannot complete the prefix.
        raise AssertionError("threshold landed on a zero vote")
    return v


def _head_sum(profile: VoteProfile, v: int) -> float:
    """Sum of the v-1 largest margins."""
    return float(profile.prefix_abs[v - 2]) if v > 1 else 0.0


def game_value(profile: VoteProfile) -> float:
    """Minimax value of the game.

    V = (v-1)/n + (lam - (1/n) sum_{i<v} |a_i|) / |a_v|, which lies in
    [lam, 1] and equals v/n exactly when the margin prefix sum hits n*lam
    at index v.
    """
    n = profile.n
    v = find_threshold(profile)
    head = _head_sum(profile, v)
    pivot = float(profile.abs_sorted[v - 1])
    value = (v - 1) / n + (profile.lam - head / n) / pivot
    if value > 1.0 + SOLVER_TOL or value < profile.lam - SOLVER_TOL:
        raise AssertionError(f"game value {value} escaped [lam, 1]")
    return min(max(value, profile.lam), 1.0)


def optimal_predictor(profile: VoteProfile) -> PredictionVector:
    """Minimax optimal predictions, in original example order.

    In sorted order the predictor commits fully (sign of the vote) on the v
    most confident examples and scales the rest by 1/|a_v|.
    """
    v = find_threshold(profile)
    pivot = float(profile.abs_sorted[v - 1])
    sorted_votes = profile.sorted_votes()
    g = np.empty(profile.n)
    g[:v] = np.sign(sorted_votes[:v])
    g[v:] = sorted_votes[v:] / pivot
    return PredictionVector(profile.to_original_order(g))


def optimal_nature(profile: VoteProfile) -> LabelVector:
    """Nature's optimal labels, in original example order.

    Sorted order: sign of the vote before the threshold, the fractional
    value that makes the correlation constraint bind exactly at the
    threshold, and zero afterwards.
    """
    n = profile.n
    v = find_threshold(profile)
    head = _head_sum(profile, v)
    sorted_votes = profile.sorted_votes()
    z = np.zeros(n)
    z[: v - 1] = np.sign(sorted_votes[: v - 1])
    pivot_label = (n * profile.lam - head) / float(sorted_votes[v - 1])
    if abs(pivot_label) > 1.0 + SOLVER_TOL:
        raise AssertionError("fractional label escaped the box")
    z[v - 1] = min(max(pivot_label, -1.0), 1.0)
    return LabelVector(profile.to_original_order(z))


def nature_greedy(profile: VoteProfile) -> LabelVector:
    """Nature's optimum built by the literal sequential greedy procedure.

    Repeatedly pick the unused example with the largest margin (ties by
    ascending original index), fill it with the sign of its vote while the
    selected margins still fall short of n*lam, and finish with the
    fractional fill that makes the constraint bind.  Agrees with
    ``optimal_nature`` under the shared tie-break.
    """
    votes = profile.votes
    n = profile.n
    target = n * profile.lam
    z = np.zeros(n)
    chosen: list[int] = []
    remaining = set(range(n))
    while True:
        pick = max(remaining, key=lambda j: (abs(votes[j]), -j))
        remaining.discard(pick)
        chosen.append(pick)
        selected_sum = fsum(abs(votes[j]) for j in chosen)
        if selected_sum < target - VALIDATION_TOL:
            z[pick] = np.sign(votes[pick])
            continue
        fill = np.sign(votes[pick]) - (selected_sum - target) / votes[pick]
        z[pick] = min(max(fill, -1.0), 1.0)
        return LabelVector(z)


def value_lower_bound(profile: VoteProfile) -> float:
    """lam + (1/n) sum_{i<v} (1 - |a_i|), never above the game value.

    The gap to the exact value is (1/|a_v| - 1)(lam - (1/n) sum_{i<v} |a_i|),
    so the bound is tight when the top margins are all 1 or the constraint
    binds with no fractional remainder.
    """
    n = profile.n
    v = find_threshold(profile)
    head = _head_sum(profile, v)
    return profile.lam + ((v - 1) - head) / n


def solve_game(profile: VoteProfile) -> GameSolution:
    """Assemble the full solution and sanity-check the saddle identities."""
    v = find_threshold(profile)
    value = game_value(profile)
    g_star = optimal_predictor(profile)
    z_star = optimal_nature(profile)
    lower = value_lower_bound(profile)

    binding = payoff(z_star, profile.votes)
    if abs(binding - profile.lam) > SOLVER_TOL:
        raise AssertionError("nature's optimum does not bind the constraint")
    if abs(payoff(g_star, z_star) - value) > SOLVER_TOL:
        raise AssertionError("saddle payoff does not match the game value")
    if lower > value + VALIDATION_TOL:
        raise AssertionError("value lower bound exceeds the value")
    return GameSolution(v=v, value=value, g_star=g_star, z_star=z_star, lower_bound=lower)
