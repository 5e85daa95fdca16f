"""Vectorized batch sampling on regular trees.

On a k-regular tree the root cluster explored by layers is a branching process:
the root opens Binomial(k, p) edges, and every later frontier vertex exposes
k-1 fresh edges, so an entire batch of replicates advances one BFS layer with a
single vectorized binomial draw on the array of frontier sizes.  Touched-edge
counts follow from the layer sizes (root contributes k, every other discovered
vertex k-1), intrinsic and extrinsic radius coincide with the layer index, and
the cluster law is exactly that of the per-edge exploration.

Budgets are enforced at layer granularity: a replicate is edge-censored when
expanding its current frontier would exceed ``max_edges``.  A per-edge
exploration could finish clusters that straddle the boundary, so the two paths
may classify samples within one layer of the budget differently; estimators
keep thresholds a factor 50 below the budget, far away from this boundary.
"""

from __future__ import annotations

import numpy as np

from . import engine


def _hist_add(target, values, counts):
    for v, c in zip(values.tolist(), counts.tolist()):
        target[v] = target.get(v, 0) + c


def sample_tree_chunk(model, p, budget, n, rng, skinny_grid=(), conditional_grid=()):
    """Summary of ``n`` independent root-cluster explorations on a regular tree."""
    from .engine import SampleSummary, Status

    k = model.k
    max_edges = budget.max_edges
    max_radius = budget.max_radius

    volume = np.ones(n, dtype=np.int64)
    edges = np.full(n, k, dtype=np.int64)
    radius = np.zeros(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)           # 0 finite, 1 edge-censored, 2 radius-censored

    frontier = rng.binomial(k, p, size=n).astype(np.int64)
    volume += frontier
    alive = frontier > 0
    radius[alive] = 1
    idx = np.nonzero(alive)[0]
    z = frontier[idx]
    depth = 1
    while idx.size:
        if max_radius is not None and depth >= max_radius:
            status[idx] = 2
            break
        fresh = z * (k - 1)
        over = edges[idx] + fresh > max_edges
        if over.any():
            status[idx[over]] = 1
            keep = ~over
            idx, z, fresh = idx[keep], z[keep], fresh[keep]
            if not idx.size:
                break
        edges[idx] += fresh
        z = rng.binomial(fresh, p)
        volume[idx] += z
        alive = z > 0
        idx = idx[alive]
        z = z[alive]
        depth += 1
        radius[idx] = depth

    summary = SampleSummary.empty(model, p, budget, skinny_grid, conditional_grid)
    summary.replicates = n
    code_of = {Status.FINITE: 0, Status.CENSORED_EDGES: 1, Status.CENSORED_RADIUS: 2}
    for st, code in code_of.items():
        mask = status == code
        if not mask.any():
            continue
        for stat, arr in (("volume", volume), ("touched_edges", edges),
                          ("intrinsic_radius", radius), ("extrinsic_radius", radius)):
            vals, counts = np.unique(arr[mask], return_counts=True)
            _hist_add(summary.hist[stat][st], vals, counts)
    finite = status == 0
    for r in summary.skinny_base:
        summary.skinny_base[r] = int(np.count_nonzero(finite & (radius >= r)))
    for (r, alpha) in summary.skinny:
        hit = finite & (radius >= r) & (edges <= alpha * radius)
        summary.skinny[(r, alpha)] = int(np.count_nonzero(hit))
    for (r, s) in summary.conditional:
        hit = finite & (radius >= r) & (edges <= r * r / s)
        summary.conditional[(r, s)] = int(np.count_nonzero(hit))
    return summary
