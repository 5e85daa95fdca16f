"""Probes of the standing hypotheses: two-point function, triangle diagram,
and finite-ball operator norms of the two-point matrix.

Finite-ball quantities only lower-bound their infinite-volume counterparts, so
reports always present saturation sequences over increasing radius, never a
boolean verdict.

On regular trees everything is exact: T_p(u, v) = p^d(u,v) along the unique
path, and the ball operator commutes with the root-fixing automorphisms, so
its Perron eigenvector is radial and the norm is computed by power iteration
on the small shell-indexed symmetrization (equality with the dense matrix is
asserted in tests).  Other models get Monte Carlo entries from whole-window
configurations (common random numbers across all pairs, as independent
per-entry noise would destabilize the power iteration), with the window bias
documented as part of the control role of those models.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .engine import ExplorationBudget
from .estimators import wilson_interval
from .graphs import RegularTree, canonical_edge
from .rng import stream

BALL_VERTEX_CAP = 2 * 10 ** 4


class IterationError(RuntimeError):
    """Power iteration failed to converge."""


# ----- two-point function --------------------------------------------------

@dataclass
class TwoPointEstimate:
    p: float
    distance: int
    point: float
    ci_low: float
    ci_high: float
    exact: bool
    replicates: int = 0


def two_point(model, p, u, v, replicates=10 ** 4, seed=0, budget=None):
    """P_p(u <-> v).  Exact p^d on trees (unique path); Monte Carlo otherwise."""
    d = model.distance(u, v)
    if u == v:
        return TwoPointEstimate(p, 0, 1.0, 1.0, 1.0, True)
    if isinstance(model, RegularTree):
        val = p ** d
        return TwoPointEstimate(p, d, val, val, val, True)
    if budget is None:
        budget = ExplorationBudget(max(2000, 200 * d), max_radius=None)
    hits = 0
    for i in range(replicates):
        rng = stream(seed, i)
        smp = _explore_until(model, p, budget, rng, u, v)
        hits += smp
    lo, hi = wilson_interval(hits, replicates)
    return TwoPointEstimate(p, d, hits / replicates, float(lo), float(hi),
                            False, replicates)


def _explore_until(model, p, budget, rng, u, v):
    """1 if v is found in the cluster of u before the budget, else 0."""
    open_state = {}
    seen = {u}
    queue = deque([u])
    touched = 0
    while queue:
        x = queue.popleft()
        for y in model.neighbors(x):
            eid = canonical_edge(model, x, y)
            state = open_state.get(eid)
            if state is None:
                if touched >= budget.max_edges:
                    return 0
                touched += 1
                state = rng.random() < p
                open_state[eid] = state
            if state and y not in seen:
                if y == v:
                    return 1
                seen.add(y)
                queue.append(y)
    return 0


# ----- ball machinery ------------------------------------------------------

def ball_vertices(model, R):
    """Vertices within distance R of the root, BFS order, with their depths."""
    root = model.root
    depth = {root: 0}
    order = [root]
    q = deque([root])
    while q:
        x = q.popleft()
        if depth[x] >= R:
            continue
        for y in model.neighbors(x):
            if y not in depth:
                depth[y] = depth[x] + 1
                order.append(y)
                q.append(y)
                if len(order) > BALL_VERTEX_CAP:
                    raise ValueError(f"ball exceeds {BALL_VERTEX_CAP} vertices")
    return order, np.array([depth[v] for v in order], dtype=np.int64)


def _tree_shell_counts(k, R):
    n = np.empty(R + 1)
    n[0] = 1.0
    for b in range(1, R + 1):
        n[b] = k * (k - 1) ** (b - 1)
    return n


def tree_radial_weights(k, p, R):
    """(N, W): shell sizes and W[a, b] = sum over shell-b vertices w of
    p^d(u, w) for any fixed vertex u at depth a of the radius-R ball."""
    N = _tree_shell_counts(k, R)
    W = np.zeros((R + 1, R + 1))
    for a in range(R + 1):
        for b in range(R + 1):
            if a == 0:
                W[a, b] = N[b] * p ** b
                continue
            if b == 0:
                W[a, b] = p ** a
                continue
            tot = (k - 1) ** b * p ** (a + b)          # meet at the root
            for c in range(1, min(a, b)):
                tot += (k - 2) * (k - 1) ** (b - c - 1) * p ** (a + b - 2 * c)
            if a < b:
                tot += (k - 1) ** (b - a) * p ** (b - a)
            elif a == b:
                tot += 1.0
            else:
                tot += p ** (a - b)
            W[a, b] = tot
    return N, W


@dataclass
class BallOperator:
    """Two-point matrix restricted to a ball.  Entries exact on trees."""

    model: str
    p: float
    radius: int
    vertices: list
    depths: np.ndarray
    matrix: np.ndarray
    exact: bool
    replicates: int = 0

    def check(self):
        m = self.matrix
        return (np.allclose(m, m.T) and np.allclose(np.diag(m), 1.0)
                and m.min() >= 0.0 and m.max() <= 1.0)


def ball_operator(model, p, R, *, replicates=2000, seed=0, window_margin=2):
    """Assemble the ball two-point matrix (exact on trees, MC CRN otherwise)."""
    order, depths = ball_vertices(model, R)
    n = len(order)
    if isinstance(model, RegularTree):
        D = np.empty((n, n), dtype=np.int64)
        for i, u in enumerate(order):
            for j in range(i, n):
                D[i, j] = D[j, i] = model.distance(u, order[j])
        return BallOperator(model.describe(), p, R, order, depths,
                            p ** D.astype(float), True)
    # window configurations: all pair connectivities from each sample
    worder, _ = ball_vertices(model, R + window_margin)
    windex = {v: i for i, v in enumerate(worder)}
    edges = []
    for v in worder:
        for u in model.neighbors(v):
            if u in windex and windex[u] > windex[v]:
                edges.append((windex[v], windex[u]))
    edges = np.array(edges, dtype=np.int64)
    rng = stream(seed, 0)
    ball_idx = np.array([windex[v] for v in order], dtype=np.int64)
    hits = np.zeros((n, n), dtype=np.int64)
    parent = np.empty(len(worder), dtype=np.int64)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for _ in range(replicates):
        opens = rng.random(len(edges)) < p
        parent[:] = np.arange(len(worder))
        for a, b in edges[opens]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra
        labels = np.array([find(x) for x in ball_idx])
        hits += labels[:, None] == labels[None, :]
    mat = hits / replicates
    np.fill_diagonal(mat, 1.0)
    return BallOperator(model.describe(), p, R, order, depths, mat, False,
                        replicates)


def _power_iteration(mat, tol, max_iter):
    v = np.ones(mat.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(1, max_iter + 1):
        u = mat @ v
        nl = float(np.linalg.norm(u))
        if nl == 0.0:
            return 0.0, it
        u /= nl
        if abs(nl - lam) <= tol * max(nl, 1e-300):
            return nl, it
        lam, v = nl, u
    raise IterationError(f"power iteration did not converge in {max_iter} steps")


@dataclass
class NormEstimate:
    p: float
    radius: int
    norm: float
    iterations: int
    exact: bool


def ball_operator_norm(model, p, R, *, tol=1e-8, max_iter=10 ** 4,
                       replicates=2000, seed=0):
    """Largest eigenvalue of the ball-restricted two-point operator.

    A lower bound for the operator norm on the whole graph; non-decreasing in
    R by restriction monotonicity.
    """
    if isinstance(model, RegularTree):
        N, W = tree_radial_weights(model.k, p, R)
        sq = np.sqrt(N)
        sym = sq[:, None] * W / sq[None, :]
        norm, iters = _power_iteration(sym, tol, max_iter)
        return NormEstimate(p, R, norm, iters, True)
    op = ball_operator(model, p, R, replicates=replicates, seed=seed)
    norm, iters = _power_iteration(op.matrix, tol, max_iter)
    return NormEstimate(p, R, norm, iters, op.exact)


@dataclass
class TriangleReport:
    p: float
    radii: list
    partial_sums: list
    exact: bool


def triangle_diagram(model, p, R, *, replicates=2000, seed=0):
    """Partial sums of the triangle diagram sum_{u,w in ball(r)}
    T(v,u) T(u,w) T(w,v) for r = 0..R, so saturation or divergence is visible.
    """
    if isinstance(model, RegularTree):
        if R > 12:
            raise ValueError("exact tree triangle summation capped at R = 12")
        sums = []
        for r in range(R + 1):
            N, W = tree_radial_weights(model.k, p, r)
            pa = p ** np.arange(r + 1)
            sums.append(float(np.sum(N[:, None] * pa[:, None] * pa[None, :] * W)))
        return TriangleReport(p, list(range(R + 1)), sums, True)
    if R > 6:
        raise ValueError("Monte Carlo triangle summation capped at R = 6")
    op = ball_operator(model, p, R, replicates=replicates, seed=seed)
    sums = []
    for r in range(R + 1):
        mask = op.depths <= r
        sub = op.matrix[np.ix_(mask, mask)]
        a = sub[0, :]
        sums.append(float(a @ sub @ a))
    return TriangleReport(p, list(range(R + 1)), sums, op.exact)
