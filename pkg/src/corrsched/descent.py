"""Rounding soft schedules to hard ones and single-device local search.

Fixing one device at a time: with every other row of E held fixed, the
terms of F(E) involving device i reduce to sum_j E[i,j] * w(j) with

    w(j) = sum_{k != i} A[i,k] * E[k,j],

so putting the whole row mass on an argmin channel never increases F.
`round_to_hard` applies this once per device to make a soft schedule hard
without increasing F; `coordinate_descent` iterates strictly-improving
single-device moves on hard schedules until a local optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrsched.model import (
    Assignment,
    JointActivationMatrix,
    ScheduleMatrix,
    ValidationError,
    is_hard,
    schedule_to_assignment,
)


@dataclass(frozen=True)
class DeviceChannelCost:
    """Per-channel cost of one device against all other rows of E."""

    device: int
    costs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.costs, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "costs", arr)


def _cost_row(a_entries: np.ndarray, e_entries: np.ndarray, i: int) -> np.ndarray:
    w = a_entries[i].copy()
    w[i] = 0.0
    return w @ e_entries


def device_costs(a: JointActivationMatrix, e: ScheduleMatrix, i: int) -> DeviceChannelCost:
    """costs[j] = sum_{k != i} A[i,k] * E[k,j]."""
    if a.dim != e.rows:
        raise ValidationError(f"matrix is {a.dim}x{a.dim} but schedule has {e.rows} rows")
    if not 0 <= i < a.dim:
        raise ValidationError(f"device {i} out of range [0, {a.dim})")
    return DeviceChannelCost(i, _cost_row(a.entries, e.entries, i))


def round_to_hard(a: JointActivationMatrix, e: ScheduleMatrix) -> Assignment:
    """Collapse a soft schedule to a hard one without increasing F.

    Devices are processed in ascending index order; each is assigned to
    its argmin-cost channel (ties to the lowest channel index) with costs
    recomputed against the current mixed matrix, so every step is one
    application of the single-device argument above and F never increases.

    Already-hard schedules are returned unchanged: rounding is a no-op on
    them, which also makes the operator idempotent (its output is hard).
    """
    if a.dim != e.rows:
        raise ValidationError(f"matrix is {a.dim}x{a.dim} but schedule has {e.rows} rows")
    if is_hard(e):
        return schedule_to_assignment(e)
    work = e.entries.copy()
    channels = np.empty(a.dim, dtype=np.int64)
    for i in range(a.dim):
        costs = _cost_row(a.entries, work, i)
        j = int(np.argmin(costs))
        work[i, :] = 0.0
        work[i, j] = 1.0
        channels[i] = j
    return Assignment(channels)


def coordinate_descent(
    a: JointActivationMatrix,
    start: Assignment,
    max_sweeps: int = 100,
    l: int | None = None,
) -> Assignment:
    """Iterate strictly-improving single-device moves until a local optimum.

    Each sweep re-visits devices in ascending order and moves a device to
    its argmin-cost channel only when that strictly lowers its cost (ties
    keep the current channel, so F strictly decreases on every accepted
    move and the search terminates).  Stops after a sweep with no moves or
    after max_sweeps.  ``l`` defaults to the number of channels the start
    uses; pass it explicitly to let the search open unused channels.
    """
    n = a.dim
    if start.n_devices != n:
        raise ValidationError("assignment and matrix disagree on device count")
    channels = start.channel_of.copy()
    if l is None:
        l = int(channels.max()) + 1 if n else 1
    elif n and l <= int(channels.max()):
        raise ValidationError(f"start uses channel {int(channels.max())} but l={l}")
    onehot = np.zeros((n, l))
    onehot[np.arange(n), channels] = 1.0
    for _ in range(max_sweeps):
        moved = False
        for i in range(n):
            costs = _cost_row(a.entries, onehot, i)
            j = int(np.argmin(costs))
            cur = channels[i]
            if costs[j] < costs[cur]:
                onehot[i, cur] = 0.0
                onehot[i, j] = 1.0
                channels[i] = j
                moved = True
        if not moved:
            break
    return Assignment(channels)
