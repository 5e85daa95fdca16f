"""Cluster exploration engine.

``explore_cluster`` grows the cluster of the root by lazy breadth-first search,
drawing each edge's state exactly once (memoized by canonical edge id).  Budgets
turn unbounded growth into a censoring status instead of an error: a sample is
``FINITE`` only if the BFS frontier emptied before any budget was hit.

``sample_batch`` runs many independent explorations and accumulates a mergeable
``SampleSummary``.  Replicate ``i`` uses the Philox stream keyed ``(seed, i)``;
on ``RegularTree`` models with no per-sample records requested the batch is
delegated to a vectorized layer-count simulation (see ``fastpath``) with one
stream per fixed-size chunk.  Either way the result is a deterministic function
of ``(seed, replicates, model, p, budget)``, independent of worker count.
"""

from __future__ import annotations

import enum
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import fastpath
from .graphs import RegularTree, parse_model
from .rng import stream

STATISTICS = ("volume", "touched_edges", "intrinsic_radius", "extrinsic_radius")

CHUNK_SIZE = 1 << 20

WITNESS_K = 4


class Status(enum.Enum):
    FINITE = "finite"
    CENSORED_EDGES = "censored_edges"
    CENSORED_RADIUS = "censored_radius"


@dataclass(frozen=True)
class ExplorationBudget:
    """Caps on one exploration.  ``max_radius=None`` means unbounded depth."""

    max_edges: int
    max_radius: int | None = None

    def __post_init__(self):
        if self.max_edges < 1:
            raise ValueError("max_edges must be positive")
        if self.max_radius is not None and self.max_radius < 1:
            raise ValueError("max_radius must be positive or None")

    def check_model(self, model):
        if self.max_edges < model.degree:
            raise ValueError(
                f"max_edges={self.max_edges} below model degree {model.degree}")


@dataclass(frozen=True)
class ClusterSample:
    volume: int
    touched_edges: int
    intrinsic_radius: int
    extrinsic_radius: int
    status: Status
    witnesses: tuple = ()
    edges: tuple | None = None


def explore_cluster(model, p, budget, rng, *, witness_k=WITNESS_K,
                    record_edges=False, shared_variates=None):
    """Explore the root cluster under Bernoulli-p bond percolation.

    ``shared_variates`` may be a mutable dict mapping canonical edge ids to
    uniforms; it is filled lazily and lets callers couple explorations at
    different p through common edge variates.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    budget.check_model(model)
    root = model.root
    max_edges = budget.max_edges
    max_radius = budget.max_radius

    open_state = {}
    depth = {root: 0}
    queue = deque([root])
    touched = 0
    volume = 1
    ext_radius = 0
    int_radius = 0
    status = Status.FINITE
    witnesses = [root]
    seen = 1
    open_edges = [] if record_edges else None
    sort_key = model.sort_key

    while queue:
        x = queue.popleft()
        dx = depth[x]
        if max_radius is not None and dx >= max_radius:
            # never expand the capped layer; its presence already censors
            continue
        kx = sort_key(x)
        for y in model.neighbors(x):
            # canonical edge id, inlined: adjacency holds by construction
            eid = (x, y) if kx <= sort_key(y) else (y, x)
            state = open_state.get(eid)
            if state is None:
                if touched >= max_edges:
                    status = Status.CENSORED_EDGES
                    queue.clear()
                    break
                touched += 1
                if shared_variates is not None:
                    u = shared_variates.get(eid)
                    if u is None:
                        u = rng.random()
                        shared_variates[eid] = u
                    state = u < p
                else:
                    state = rng.random() < p
                open_state[eid] = state
            if state and y not in depth:
                depth[y] = dx + 1
                volume += 1
                int_radius = dx + 1
                dist = model.distance(root, y)
                if dist > ext_radius:
                    ext_radius = dist
                if record_edges:
                    open_edges.append(eid)
                # reservoir sample of witnesses over discovery order
                if len(witnesses) < witness_k:
                    witnesses.append(y)
                else:
                    j = int(rng.integers(0, seen + 1))
                    if j < witness_k:
                        witnesses[j] = y
                seen += 1
                queue.append(y)
    if status is Status.FINITE and max_radius is not None and int_radius >= max_radius:
        status = Status.CENSORED_RADIUS
    edges = None
    if record_edges and status is Status.FINITE:
        edges = tuple(open_edges)
    return ClusterSample(volume, touched, int_radius, ext_radius, status,
                         tuple(witnesses), edges)


@dataclass
class SampleSummary:
    """Mergeable statistics of a batch of explorations.

    Histograms are keyed statistic -> status -> value -> count.  The skinny
    counters hold, per configured grid point, the number of finite samples in
    the corresponding event (see ``estimators.skinny_probability``).
    """

    model: str
    p: float
    budget: ExplorationBudget
    replicates: int = 0
    hist: dict = field(default_factory=lambda: {
        s: {st: {} for st in Status} for s in STATISTICS})
    skinny: dict = field(default_factory=dict)        # (r, alpha) -> count
    skinny_base: dict = field(default_factory=dict)   # r -> count of finite R >= r
    conditional: dict = field(default_factory=dict)   # (r, s) -> count
    witness_records: list | None = None

    @classmethod
    def empty(cls, model, p, budget, skinny_grid=(), conditional_grid=(),
              witness_records=False):
        s = cls(model.describe() if hasattr(model, "describe") else str(model),
                p, budget)
        for r, alpha in skinny_grid:
            s.skinny[(int(r), float(alpha))] = 0
            s.skinny_base.setdefault(int(r), 0)
        for r, sv in conditional_grid:
            s.conditional[(int(r), float(sv))] = 0
            s.skinny_base.setdefault(int(r), 0)
        if witness_records:
            s.witness_records = []
        return s

    def add_sample(self, smp):
        self.replicates += 1
        for stat, value in (("volume", smp.volume),
                            ("touched_edges", smp.touched_edges),
                            ("intrinsic_radius", smp.intrinsic_radius),
                            ("extrinsic_radius", smp.extrinsic_radius)):
            h = self.hist[stat][smp.status]
            h[value] = h.get(value, 0) + 1
        if smp.status is Status.FINITE:
            for r in self.skinny_base:
                if smp.intrinsic_radius >= r:
                    self.skinny_base[r] += 1
            for (r, alpha) in self.skinny:
                if smp.intrinsic_radius >= r and smp.touched_edges <= alpha * smp.intrinsic_radius:
                    self.skinny[(r, alpha)] += 1
            for (r, sv) in self.conditional:
                if smp.intrinsic_radius >= r and smp.touched_edges <= r * r / sv:
                    self.conditional[(r, sv)] += 1
        if self.witness_records is not None:
            self.witness_records.append(
                (smp.volume, smp.touched_edges, smp.status, smp.witnesses))

    def merge(self, other):
        if (other.model, other.p, other.budget) != (self.model, self.p, self.budget):
            raise ValueError("cannot merge summaries of different runs")
        if set(other.skinny) != set(self.skinny) or set(other.conditional) != set(self.conditional):
            raise ValueError("cannot merge summaries with different grids")
        self.replicates += other.replicates
        for stat in STATISTICS:
            for st in Status:
                h = self.hist[stat][st]
                for v, c in other.hist[stat][st].items():
                    h[v] = h.get(v, 0) + c
        for k, c in other.skinny.items():
            self.skinny[k] += c
        for k, c in other.skinny_base.items():
            self.skinny_base[k] += c
        for k, c in other.conditional.items():
            self.conditional[k] += c
        if self.witness_records is not None and other.witness_records is not None:
            self.witness_records.extend(other.witness_records)
        return self

    def count(self, statistic, status=None):
        """Total samples, optionally restricted to one status."""
        statuses = [status] if status is not None else list(Status)
        return sum(sum(self.hist[statistic][st].values()) for st in statuses)

    def finite_items(self, statistic):
        """Sorted (value, count) pairs over FINITE samples."""
        h = self.hist[statistic][Status.FINITE]
        return sorted(h.items())


def _chunk_spec(model, p, budget, seed, start, length, skinny_grid,
                conditional_grid, witness_records, fast):
    return dict(model=model.describe(), p=p, max_edges=budget.max_edges,
                max_radius=budget.max_radius, seed=seed, start=start,
                length=length, skinny_grid=tuple(skinny_grid),
                conditional_grid=tuple(conditional_grid),
                witness_records=witness_records, fast=fast)


def _run_chunk(spec):
    model = parse_model(spec["model"])
    budget = ExplorationBudget(spec["max_edges"], spec["max_radius"])
    if spec["fast"]:
        rng = stream(spec["seed"], spec["start"])
        return fastpath.sample_tree_chunk(
            model, spec["p"], budget, spec["length"], rng,
            spec["skinny_grid"], spec["conditional_grid"])
    summary = SampleSummary.empty(model, spec["p"], budget, spec["skinny_grid"],
                                  spec["conditional_grid"], spec["witness_records"])
    for i in range(spec["start"], spec["start"] + spec["length"]):
        smp = explore_cluster(model, spec["p"], budget, stream(spec["seed"], i))
        summary.add_sample(smp)
    return summary


def sample_batch(model, p, budget, replicates, seed, workers=1, *,
                 skinny_grid=(), conditional_grid=(), witness_records=False,
                 chunk_size=CHUNK_SIZE):
    """Merge of ``replicates`` independent explorations.

    Deterministic given (seed, replicates, model, p, budget) and the grids,
    regardless of ``workers``.
    """
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    budget.check_model(model)
    fast = isinstance(model, RegularTree) and not witness_records
    specs = []
    start = 0
    while start < replicates:
        length = min(chunk_size, replicates - start)
        specs.append(_chunk_spec(model, p, budget, seed, start, length,
                                 skinny_grid, conditional_grid, witness_records,
                                 fast))
        start += length
    total = SampleSummary.empty(model, p, budget, skinny_grid, conditional_grid,
                                witness_records)
    if workers <= 1 or len(specs) == 1:
        for spec in specs:
            total.merge(_run_chunk(spec))
        return total
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_run_chunk, specs):
            total.merge(part)
    return total
