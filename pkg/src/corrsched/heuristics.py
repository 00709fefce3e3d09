"""Sub-optimal clustering baselines: K-Medoids and K-Medoids++.

Devices that rarely activate together should share a channel, so the
dissimilarity between devices i and k defaults to A[i,k] itself (low joint
activation = "close"); ``dissimilarity="one-minus-A"`` is available for
sensitivity runs.  Note K-Medoids minimizes its own medoid cost, not the
pairwise bound F; report F of the resulting assignment when comparing
against the exact solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from corrsched import _rng
from corrsched.model import Assignment, JointActivationMatrix, ValidationError

DISSIMILARITIES = ("A", "one-minus-A")


@dataclass(frozen=True)
class MedoidState:
    """Medoid set (ascending device indices), induced assignment, and cost."""

    medoids: tuple
    assignment: Assignment
    cost: float


def _dissimilarity(a: JointActivationMatrix, kind: str) -> np.ndarray:
    if kind not in DISSIMILARITIES:
        raise ValidationError(f"unknown dissimilarity {kind!r}; use one of {DISSIMILARITIES}")
    d = a.entries.copy() if kind == "A" else 1.0 - a.entries
    np.fill_diagonal(d, 0.0)
    return d


def _assign_to_medoids(d: np.ndarray, medoids: np.ndarray) -> np.ndarray:
    """Nearest-medoid cluster per device; ties go to the lowest-index medoid.

    Medoids are kept sorted ascending, so argmin over their columns breaks
    ties toward the lowest device index.  Each medoid owns its cluster.
    """
    clusters = np.argmin(d[:, medoids], axis=1)
    clusters[medoids] = np.arange(len(medoids))
    return clusters


def _update_medoids(d: np.ndarray, medoids: np.ndarray, clusters: np.ndarray) -> np.ndarray:
    """Per cluster, the member minimizing summed dissimilarity (ties: lowest index)."""
    new = np.empty_like(medoids)
    for c in range(len(medoids)):
        members = np.flatnonzero(clusters == c)
        within = d[np.ix_(members, members)].sum(axis=1)
        new[c] = members[int(np.argmin(within))]
    return np.sort(new)


def _cost(d: np.ndarray, medoids: np.ndarray, clusters: np.ndarray) -> float:
    return float(d[np.arange(d.shape[0]), medoids[clusters]].sum())


def _run_kmedoids(
    d: np.ndarray, medoids: np.ndarray, max_iter: int
) -> tuple[Assignment, MedoidState]:
    medoids = np.sort(np.asarray(medoids, dtype=np.int64))
    clusters = _assign_to_medoids(d, medoids)
    cost = _cost(d, medoids, clusters)
    for _ in range(max_iter):
        new_medoids = _update_medoids(d, medoids, clusters)
        if np.array_equal(new_medoids, medoids):
            break
        new_clusters = _assign_to_medoids(d, new_medoids)
        new_cost = _cost(d, new_medoids, new_clusters)
        if new_cost >= cost:  # accept strict improvements only
            break
        medoids, clusters, cost = new_medoids, new_clusters, new_cost
    assignment = Assignment(clusters)
    return assignment, MedoidState(tuple(int(m) for m in medoids), assignment, cost)


def kmedoids(
    a: JointActivationMatrix,
    l: int,
    seed: int,
    max_iter: int = 100,
    dissimilarity: str = "A",
) -> tuple[Assignment, MedoidState]:
    """K-Medoids with initial medoids drawn uniformly at random.

    Alternates nearest-medoid assignment and per-cluster medoid update,
    accepting a sweep only when the summed dissimilarity cost strictly
    improves; stops when the medoid set is stable or after max_iter
    sweeps.  The cost is non-increasing across sweeps and the run is
    deterministic given the seed.
    """
    if l > a.dim:
        raise ValidationError(f"cannot place {l} medoids among {a.dim} devices")
    d = _dissimilarity(a, dissimilarity)
    g = _rng.generator(seed, _rng.DOMAIN_SEEDING)
    medoids = g.choice(a.dim, size=l, replace=False)
    return _run_kmedoids(d, medoids, max_iter)


def kmeanspp_init(
    a: JointActivationMatrix, l: int, seed: int, dissimilarity: str = "A"
) -> tuple:
    """K-Means++-style medoid seeding on the dissimilarity matrix.

    The first medoid is uniform; each next medoid is drawn among unchosen
    devices with probability proportional to D(i)^2, D(i) being the
    dissimilarity to the nearest chosen medoid.  If every candidate has
    D(i) = 0, the draw falls back to uniform over the unchosen devices.
    Returns the medoid set sorted ascending.
    """
    if l > a.dim:
        raise ValidationError(f"cannot place {l} medoids among {a.dim} devices")
    d = _dissimilarity(a, dissimilarity)
    g = _rng.generator(seed, _rng.DOMAIN_SEEDING)
    n = a.dim
    chosen = [int(g.integers(n))]
    while len(chosen) < l:
        candidates = np.setdiff1d(np.arange(n), np.array(chosen, dtype=np.int64))
        nearest = d[np.ix_(candidates, np.array(chosen, dtype=np.int64))].min(axis=1)
        weights = nearest * nearest
        total = weights.sum()
        if total > 0.0:
            probs = weights / total
            chosen.append(int(g.choice(candidates, p=probs)))
        else:
            chosen.append(int(g.choice(candidates)))
    return tuple(sorted(chosen))


def kmedoids_pp(
    a: JointActivationMatrix,
    l: int,
    seed: int,
    max_iter: int = 100,
    dissimilarity: str = "A",
) -> tuple[Assignment, MedoidState]:
    """K-Medoids refined from a K-Means++-style seeding."""
    medoids = kmeanspp_init(a, l, seed, dissimilarity)
    d = _dissimilarity(a, dissimilarity)
    return _run_kmedoids(d, np.array(medoids, dtype=np.int64), max_iter)


def best_of_restarts(
    a: JointActivationMatrix,
    l: int,
    seed: int,
    restarts: int,
    method: str = "kmedoids-pp",
    max_iter: int = 100,
    dissimilarity: str = "A",
) -> tuple[Assignment, MedoidState]:
    """Run the chosen variant with seeds seed..seed+restarts-1, keep the best cost."""
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    fn = {"kmedoids": kmedoids, "kmedoids-pp": kmedoids_pp}.get(method)
    if fn is None:
        raise ValidationError(f"unknown method {method!r}")
    best = None
    for k in range(restarts):
        cand = fn(a, l, seed + k, max_iter=max_iter, dissimilarity=dissimilarity)
        if best is None or cand[1].cost < best[1].cost:
            best = cand
    return best
