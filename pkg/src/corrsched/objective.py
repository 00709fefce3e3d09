"""Collision model: exact per-channel probabilities and the pairwise bound.

For a joint activation matrix A and a (soft or hard) schedule E, the exact
collision probability of channel j is

    P_j = 1 - prod_{i1 < i2} (1 - A[i1,i2] * E[i1,j] * E[i2,j]),

the network average is P_c = mean_j P_j, and the pairwise (union-bound)
surrogate is

    F(E) = (1/L) * sum_j sum_{i1 < i2} A[i1,i2] * E[i1,j] * E[i2,j].

F(E) >= P_c always; it is the quantity every solver in this package
minimizes.  F is not clamped to [0, 1] -- it is a bound, not a
probability, and clamping would break solver comparisons.

All functions ignore the diagonal of A (it stores marginals, and the sums
above run over i1 < i2 only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrsched import _rng
from corrsched.model import (
    Assignment,
    CollisionReport,
    JointActivationMatrix,
    ScheduleMatrix,
    ValidationError,
    assignment_to_schedule,
)
from corrsched.sim import ActivationModel, DeviceLayout, _chunk_rounds, _iter_chunks

#: factors below this switch the product in P_j to exp-sum-log1p form
_PRODUCT_SWITCH = 0.99


def _pair_terms(a: JointActivationMatrix, e: ScheduleMatrix) -> np.ndarray:
    """(n_pairs, L) array of A[i1,i2] * E[i1,:] * E[i2,:] over i1 < i2."""
    if a.dim != e.rows:
        raise ValidationError(f"matrix is {a.dim}x{a.dim} but schedule has {e.rows} rows")
    i1, i2 = np.triu_indices(a.dim, k=1)
    return a.entries[i1, i2][:, None] * e.entries[i1, :] * e.entries[i2, :]


def _collision_from_terms(x: np.ndarray) -> float:
    """P = 1 - prod(1 - x) for one channel's pair terms."""
    factors = 1.0 - x
    if factors.size == 0 or factors.min() >= _PRODUCT_SWITCH:
        return float(1.0 - np.prod(factors))
    # many / large terms: exp of summed log1p is accurate and underflow-safe
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.sum(np.log1p(-x))))


def channel_collision_probability(
    a: JointActivationMatrix, e: ScheduleMatrix, j: int
) -> float:
    """Exact collision probability of channel j under schedule e."""
    if not 0 <= j < e.cols:
        raise ValidationError(f"channel {j} out of range [0, {e.cols})")
    return _collision_from_terms(_pair_terms(a, e)[:, j])


def pairwise_bound(a: JointActivationMatrix, e: ScheduleMatrix) -> float:
    """Union-bound surrogate F(E); may exceed 1."""
    terms = _pair_terms(a, e)
    return float(terms.sum() / e.cols)


def trace_objective(a: JointActivationMatrix, e: ScheduleMatrix) -> float:
    """F(E) in trace form, (1/2L) * Tr(E^T A_off E).

    Algebraically identical to `pairwise_bound`; computed through a
    different route (matrix products instead of a pair expansion) so the
    two implementations can check each other.
    """
    if a.dim != e.rows:
        raise ValidationError(f"matrix is {a.dim}x{a.dim} but schedule has {e.rows} rows")
    a_off = a.off_diagonal()
    return float(np.trace(e.entries.T @ a_off @ e.entries) / (2.0 * e.cols))


def network_collision_probability(
    a: JointActivationMatrix, e: ScheduleMatrix
) -> CollisionReport:
    """Per-channel collision probabilities, their mean, and F(E)."""
    terms = _pair_terms(a, e)
    per_channel = np.array([_collision_from_terms(terms[:, j]) for j in range(e.cols)])
    return CollisionReport(
        per_channel=per_channel,
        network_average=float(np.mean(per_channel)),
        pairwise_bound=float(terms.sum() / e.cols),
    )


def assignment_collision_report(
    a: JointActivationMatrix, assignment: Assignment, l: int
) -> CollisionReport:
    """Convenience: the report for a hard assignment on l channels."""
    return network_collision_probability(a, assignment_to_schedule(assignment, l))


@dataclass(frozen=True)
class MonteCarloReport:
    """Empirical collision rates from simulated alarm rounds."""

    per_channel: np.ndarray
    network_average: float
    rounds: int

    def __post_init__(self):
        arr = np.array(self.per_channel, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "per_channel", arr)

    def to_dict(self) -> dict:
        return {
            "per_channel": [float(p) for p in self.per_channel],
            "network_average": float(self.network_average),
            "rounds": int(self.rounds),
        }


def monte_carlo_collision_rate(
    layout: DeviceLayout,
    model: ActivationModel,
    assignment: Assignment,
    rounds: int,
    seed: int,
) -> MonteCarloReport:
    """Simulate alarm rounds and count actual collisions per channel.

    A channel collides in a round iff at least two active devices are
    assigned to it.  This is an empirical sanity channel for the analytic
    model: the analytic P_c multiplies pairwise terms as if independent,
    while the alarm process correlates pair events, so the two numbers
    need not coincide exactly.

    Uses the per-round stream rule of `corrsched.sim` under its own stream
    domain, so rates are reproducible and chunking-independent.
    """
    if rounds < 1:
        raise ValidationError("rounds must be >= 1")
    ch = assignment.channel_of
    if assignment.n_devices != layout.n_devices:
        raise ValidationError("assignment and layout disagree on device count")
    l = int(ch.max()) + 1 if ch.size else 1
    onehot = np.zeros((layout.n_devices, l))
    onehot[np.arange(layout.n_devices), ch] = 1.0
    collisions = np.zeros(l)
    n = layout.n_devices
    for t0, t1 in _iter_chunks(rounds, 4 * _rng.blocks_per_round(n + 2)):
        active = _chunk_rounds(layout, model, seed, t0, t1, domain=_rng.DOMAIN_EVAL)
        per_channel_active = active.astype(float) @ onehot
        collisions += (per_channel_active >= 2.0).sum(axis=0)
    rates = collisions / rounds
    return MonteCarloReport(rates, float(np.mean(rates)), rounds)
