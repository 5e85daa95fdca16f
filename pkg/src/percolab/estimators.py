"""Estimators: tail curves, rate/exponent fits, moments, skinny events,
generating-function values, and scaling collapses.

Conventions shared by everything here:

* Censored samples are never counted as finite; a tail point at threshold t is
  #(finite samples with statistic >= t) / replicates, and the edge budget used
  for the finiteness classification travels with the curve.
* Confidence intervals for tail points are Wilson score intervals (rare-event
  safe); moments and fitted exponents get bootstrap intervals instead because
  their summands are heavy-tailed near criticality.
* Fit windows keep thresholds outside the scaling window: eps^2 * n >= 1 for
  volume-like statistics and eps * r >= 4 for radii (window factors are
  arguments; see the fit functions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bridges import FiniteSubgraph, br_statistic, decompose
from .engine import ExplorationBudget, Status, explore_cluster, sample_batch
from .rng import stream

VOLUME_BUDGET_FACTOR = 50
RADIUS_BUDGET_FACTOR = 10

Z95 = 1.959963984540054


class BudgetError(ValueError):
    """Thresholds too close to the exploration budget: refuse biased output."""


class WindowError(ValueError):
    """Not enough usable thresholds outside the scaling window."""


class DataError(ValueError):
    """Input table violates the assumptions of a fit."""


class RangeError(ValueError):
    """Curves do not overlap on a common rescaled range."""


class ConfigurationError(ValueError):
    """Estimator invoked with inconsistent options."""


def wilson_interval(successes, n, z=Z95):
    """Wilson 95% score interval, vectorized over successes.

    The endpoints are pinned exactly at 0 successes (lower bound 0) and at n
    successes (upper bound 1); the algebraic formula leaves cancellation dust
    there that would spuriously exclude extreme tail values.
    """
    s = np.asarray(successes, dtype=float)
    phat = s / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = (z / denom) * np.sqrt(phat * (1.0 - phat) / n + z * z / (4 * n * n))
    lo = np.where(s == 0, 0.0, np.maximum(center - half, 0.0))
    hi = np.where(s == n, 1.0, np.minimum(center + half, 1.0))
    if np.ndim(successes) == 0:
        return float(lo), float(hi)
    return lo, hi


# ----- tail curves ---------------------------------------------------------

_STAT_KIND = {"volume": "volume", "touched_edges": "volume",
              "intrinsic_radius": "radius", "extrinsic_radius": "radius"}


@dataclass
class TailCurve:
    statistic: str
    p: float
    thresholds: np.ndarray
    point: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    replicates: int
    budget_edges: int
    budget_radius: int | None = None
    counts: np.ndarray | None = None


def tail_curve(summary, statistic, thresholds):
    """Tail estimates P(threshold <= statistic, finite) with Wilson intervals.

    Refuses thresholds within a factor 50 (volume/edges) or 10 (bounded radius
    budget) of the budget used for the finiteness rule.
    """
    if statistic not in _STAT_KIND:
        raise ConfigurationError(f"unknown statistic {statistic!r}")
    thresholds = np.asarray(sorted(int(t) for t in thresholds), dtype=np.int64)
    if thresholds.size == 0 or thresholds[0] < 0:
        raise ConfigurationError("thresholds must be nonnegative and nonempty")
    budget = summary.budget
    if _STAT_KIND[statistic] == "volume":
        cap = budget.max_edges // VOLUME_BUDGET_FACTOR
        if thresholds[-1] > cap:
            raise BudgetError(
                f"threshold {thresholds[-1]} exceeds edge budget safety bound "
                f"{cap} (= {budget.max_edges}/{VOLUME_BUDGET_FACTOR})")
    elif budget.max_radius is not None:
        cap = budget.max_radius // RADIUS_BUDGET_FACTOR
        if thresholds[-1] > cap:
            raise BudgetError(
                f"threshold {thresholds[-1]} exceeds radius budget safety bound "
                f"{cap} (= {budget.max_radius}/{RADIUS_BUDGET_FACTOR})")
    items = summary.finite_items(statistic)
    values = np.array([v for v, _ in items], dtype=np.int64)
    counts = np.array([c for _, c in items], dtype=np.int64)
    # suffix sums: number of finite samples with value >= t
    suffix = np.concatenate([np.cumsum(counts[::-1])[::-1], [0]])
    pos = np.searchsorted(values, thresholds, side="left")
    succ = suffix[pos]
    n = summary.replicates
    lo, hi = wilson_interval(succ, n)
    return TailCurve(statistic, summary.p, thresholds, succ / n, lo, hi,
                     n, budget.max_edges, budget.max_radius, succ)


# ----- exponent fits -------------------------------------------------------

@dataclass
class ExponentFit:
    name: str
    value: float
    stderr: float
    window: tuple
    r_squared: float
    max_abs_residual: float
    n_points: int
    details: dict = field(default_factory=dict)


def _weighted_line_fit(x, y, w):
    W = np.sum(w)
    xm = np.sum(w * x) / W
    ym = np.sum(w * y) / W
    sxx = np.sum(w * (x - xm) ** 2)
    if sxx == 0:
        raise DataError("degenerate fit window")
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    intercept = ym - slope * xm
    resid = y - slope * x - intercept
    # standard WLS slope error with unit-variance scaling by weights
    dof = max(len(x) - 2, 1)
    sigma2 = np.sum(w * resid ** 2) / dof
    stderr = math.sqrt(sigma2 / sxx)
    syy = np.sum(w * (y - ym) ** 2)
    r2 = 1.0 - np.sum(w * resid ** 2) / syy if syy > 0 else 1.0
    return slope, intercept, stderr, r2, float(np.max(np.abs(resid)))


def zeta_fit(curve, p_c, *, window_volume=1.0, window_radius=4.0, min_points=8):
    """Fit the exponential tail-decay rate from a tail curve.

    Volume-like: weighted least squares of log(point * sqrt(t)) against t;
    radius: log(point * t) against t.  Slope is -zeta_hat.  Only thresholds
    outside the scaling window enter (t * eps^2 >= window_volume for volume,
    t * eps >= window_radius for radius); at p = p_c every threshold counts.
    Weights are inverse squared relative CI widths.
    """
    eps = abs(curve.p - p_c)
    kind = _STAT_KIND[curve.statistic]
    t = curve.thresholds.astype(float)
    point = curve.point
    if kind == "volume":
        inside = t * eps * eps >= window_volume if eps > 0 else np.ones_like(t, bool)
        y_all = np.where(point > 0, np.log(np.maximum(point, 1e-300)) + 0.5 * np.log(t), 0.0)
    else:
        inside = t * eps >= window_radius if eps > 0 else np.ones_like(t, bool)
        y_all = np.where(point > 0, np.log(np.maximum(point, 1e-300)) + np.log(t), 0.0)
    usable = inside & (point > 0) & (curve.ci_high > curve.ci_low)
    if np.count_nonzero(usable) < min_points:
        raise WindowError(
            f"only {np.count_nonzero(usable)} usable thresholds outside the "
            f"scaling window; need {min_points}")
    x = t[usable]
    y = y_all[usable]
    relw = (curve.ci_high[usable] - curve.ci_low[usable]) / point[usable]
    w = 1.0 / relw ** 2
    slope, intercept, stderr, r2, maxres = _weighted_line_fit(x, y, w)
    return ExponentFit("zeta", -slope, stderr, (float(x[0]), float(x[-1])),
                       r2, maxres, len(x),
                       details={"intercept": float(intercept),
                                "statistic": curve.statistic, "p": curve.p})


# ----- moments -------------------------------------------------------------

@dataclass
class MomentEstimate:
    order: int
    value: float
    ci_low: float
    ci_high: float
    replicates: int


def truncated_moments(summary, k_max=3, *, bootstrap=1000, seed=0):
    """E[|K|^k ; finite] for k = 1..k_max with bootstrap 95% intervals.

    The empirical mean runs over all replicates, censored samples contributing
    zero (they are the "infinite" part of the truncation).
    """
    if k_max > 3:
        raise ConfigurationError("k_max <= 3: higher moments are too noisy")
    items = summary.finite_items("volume")
    values = np.array([v for v, _ in items], dtype=float)
    counts = np.array([c for _, c in items], dtype=np.int64)
    n = summary.replicates
    rng = stream(seed, 0)
    out = []
    probs = counts / counts.sum() if counts.size else None
    n_finite = int(counts.sum())
    for order in range(1, k_max + 1):
        powers = values ** order if values.size else values
        point = float(np.dot(powers, counts)) / n
        if values.size == 0:
            out.append(MomentEstimate(order, 0.0, 0.0, 0.0, n))
            continue
        # bootstrap over the finite-sample histogram and the finite count
        boots = np.empty(bootstrap)
        for b in range(bootstrap):
            m = rng.binomial(n, n_finite / n)
            resampled = rng.multinomial(m, probs)
            boots[b] = np.dot(powers, resampled) / n
        lo, hi = np.quantile(boots, [0.025, 0.975])
        out.append(MomentEstimate(order, point, float(lo), float(hi), n))
    return out


def exponent_fit_gamma_delta(moment_table, side="sub"):
    """gamma' and Delta' from a table {epsilon: {k: moment}}.

    Log-log regression per order k: the k = 1 slope gives -gamma', increments
    between consecutive orders give -Delta' (averaged when k_max = 3).
    """
    eps = np.array(sorted(moment_table), dtype=float)
    if eps.size < 4:
        raise DataError(f"need >= 4 epsilon values, got {eps.size}")
    orders = sorted({k for row in moment_table.values() for k in row})
    if not orders or orders[0] != 1:
        raise DataError("moment table must contain order 1")
    slopes = {}
    errs = {}
    for k in orders:
        m = np.array([moment_table[e][k] for e in eps], dtype=float)
        if np.any(m <= 0) or np.any(np.diff(m) >= 0):
            raise DataError(f"order-{k} moments must be positive and "
                            "decreasing in epsilon")
        x = np.log(eps)
        y = np.log(m)
        w = np.ones_like(x)
        slope, _, err, _, _ = _weighted_line_fit(x, y, w)
        slopes[k] = slope
        errs[k] = err
    gamma = ExponentFit("gamma_prime", -slopes[1], errs[1],
                        (float(eps[0]), float(eps[-1])), 1.0, 0.0, eps.size)
    deltas = [slopes[k] - slopes[k + 1] for k in orders[:-1] if k + 1 in slopes]
    if not deltas:
        raise DataError("need at least orders 1 and 2 for Delta'")
    derr = math.sqrt(sum(errs[k] ** 2 + errs[k + 1] ** 2 for k in orders[:-1])
                     / len(deltas) ** 2)
    delta = ExponentFit("delta_prime", float(np.mean(deltas)), derr,
                        (float(eps[0]), float(eps[-1])), 1.0, 0.0, eps.size,
                        details={"side": side, "per_step": deltas})
    return gamma, delta


# ----- skinny clusters -----------------------------------------------------

@dataclass
class SkinnyEstimate:
    p: float
    r: int
    alpha: float
    probability: float
    ci_low: float
    ci_high: float
    conditional: dict        # s -> (estimate, lo, hi) of P(E <= r^2/s | R >= r, finite)
    base_count: int
    event_count: int
    replicates: int


def skinny_probability(model, p, r, alpha, replicates, seed, *,
                       s_grid=(2.0, 4.0, 6.0, 8.0), budget=None, workers=1):
    """Monte Carlo estimate of P(r <= R < inf, E <= alpha R) plus the
    conditional lower-volume profile P(E <= r^2/s | R >= r, finite) on s_grid.
    """
    if alpha < 1 or r < 1:
        raise ConfigurationError("need alpha >= 1 and r >= 1")
    if budget is None:
        budget = ExplorationBudget(max(10 ** 5, 4 * r * r))
    summary = sample_batch(model, p, budget, replicates, seed, workers,
                           skinny_grid=[(r, alpha)],
                           conditional_grid=[(r, s) for s in s_grid])
    hits = summary.skinny[(r, float(alpha))]
    base = summary.skinny_base[r]
    lo, hi = wilson_interval(hits, replicates)
    conditional = {}
    for s in s_grid:
        c = summary.conditional[(r, float(s))]
        if base > 0:
            clo, chi = wilson_interval(c, base)
            conditional[float(s)] = (c / base, float(clo), float(chi))
        else:
            conditional[float(s)] = (0.0, 0.0, 1.0)
    return SkinnyEstimate(p, r, float(alpha), hits / replicates,
                          float(lo), float(hi), conditional, base, hits,
                          replicates)


# ----- generating function -------------------------------------------------

@dataclass
class GenFunctionEstimate:
    p: float
    n: int
    k: int
    s_grid: tuple
    t_grid: tuple
    values: np.ndarray       # shape (len(s_grid), len(t_grid))
    ci_low: np.ndarray
    ci_high: np.ndarray
    replicates: int
    tuples_per_sample: int


def gen_function_estimate(model, p, n, k, s_grid, t_grid, replicates, seed, *,
                          tuples_per_sample=8):
    """Unbiased Monte Carlo estimate of the k-point generating function
    E_{p,n}[ sum_{x_1..x_k in K} e^{s E + t Br(root, x_1..x_k)} ].

    Per finite sample with E <= n: |K|^k * e^{sE} * (average of e^{t Br} over
    uniformly drawn k-tuples of cluster vertices), Br computed on the bridge
    tree of the recorded open-edge list.  Requires s <= 0 (positive s diverges
    on infinite graphs).
    """
    if k not in (1, 2, 3):
        raise ConfigurationError(f"k must be 1, 2 or 3, got {k}")
    s_grid = tuple(float(s) for s in s_grid)
    t_grid = tuple(float(t) for t in t_grid)
    if any(s > 0 for s in s_grid):
        raise ConfigurationError("s must be <= 0")
    budget = ExplorationBudget(n + 1)
    shape = (len(s_grid), len(t_grid))
    total = np.zeros(shape)
    total_sq = np.zeros(shape)
    s_arr = np.array(s_grid)[:, None]
    t_arr = np.array(t_grid)[None, :]
    for i in range(replicates):
        rng = stream(seed, i)
        smp = explore_cluster(model, p, budget, rng, record_edges=True)
        if smp.status is not Status.FINITE or smp.touched_edges > n:
            continue
        if smp.volume == 1:
            # single vertex: Br = 0 for every tuple
            contrib = np.exp(s_arr * smp.touched_edges) * np.ones_like(t_arr)
            total += contrib
            total_sq += contrib ** 2
            continue
        cluster = FiniteSubgraph.from_cluster_edges(smp.edges, model.root)
        dec = decompose(cluster)
        verts = cluster.vertices
        br_vals = np.empty(tuples_per_sample)
        for j in range(tuples_per_sample):
            xs = [verts[int(rng.integers(0, len(verts)))] for _ in range(k)]
            br_vals[j] = br_statistic(dec, model.root, xs)
        mean_exp = np.mean(np.exp(br_vals[:, None] * np.asarray(t_grid)[None, :]),
                           axis=0)
        contrib = (smp.volume ** k) * np.exp(s_arr * smp.touched_edges) * mean_exp[None, :]
        total += contrib
        total_sq += contrib ** 2
    mean = total / replicates
    var = np.maximum(total_sq / replicates - mean ** 2, 0.0)
    half = Z95 * np.sqrt(var / replicates)
    return GenFunctionEstimate(p, n, k, s_grid, t_grid, mean,
                               mean - half, mean + half, replicates,
                               tuples_per_sample)


# ----- scaling collapse ----------------------------------------------------

@dataclass
class CollapseReport:
    kind: str
    x_lo: float
    x_hi: float
    max_distance: float
    pair_distances: dict
    grid: np.ndarray
    rescaled: dict           # curve label -> values on grid


def scaling_collapse(curves, p_c, *, x_range=(0.5, 8.0), grid_points=25,
                     normalize_at=1.0):
    """Rescale tail curves onto window coordinates and measure their spread.

    Volume curves map t -> (eps^2 t, sqrt(t) P(t)); radius curves map
    t -> (eps t, t P(t)).  Each curve is normalized by its interpolated value
    at x = ``normalize_at``, and the report holds the max pairwise sup-distance
    over the common log-spaced grid.
    """
    if len(curves) < 2:
        raise ConfigurationError("need >= 2 curves to collapse")
    kinds = {_STAT_KIND[c.statistic] for c in curves}
    if len(kinds) != 1:
        raise ConfigurationError("cannot mix volume and radius curves")
    kind = kinds.pop()
    data = {}
    lo = x_range[0]
    hi = x_range[1]
    for c in curves:
        eps = abs(c.p - p_c)
        if eps == 0:
            raise ConfigurationError("collapse needs off-critical curves")
        t = c.thresholds.astype(float)
        if kind == "volume":
            x = eps * eps * t
            y = np.sqrt(t) * c.point
        else:
            x = eps * t
            y = t * c.point
        keep = y > 0
        x, y = x[keep], y[keep]
        if x.size < 2:
            raise RangeError(f"curve at p={c.p} has no positive points")
        lo = max(lo, x.min())
        hi = min(hi, x.max())
        data[f"p={c.p:.12g}"] = (x, y)
    if not lo < hi:
        raise RangeError(f"curves do not overlap on a common range "
                         f"(lo={lo:.3g} >= hi={hi:.3g})")
    if not min(lo, normalize_at) <= normalize_at <= hi:
        raise RangeError(f"normalization point {normalize_at} outside overlap")
    grid = np.geomspace(lo, hi, grid_points)
    rescaled = {}
    for label, (x, y) in data.items():
        vals = np.interp(grid, x, y)
        ref = np.interp(normalize_at, x, y)
        if ref <= 0:
            raise RangeError(f"curve {label} vanishes at normalization point")
        rescaled[label] = vals / ref
    labels = sorted(rescaled)
    pair = {}
    worst = 0.0
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            d = float(np.max(np.abs(rescaled[a] - rescaled[b])))
            pair[(a, b)] = d
            worst = max(worst, d)
    return CollapseReport(kind, float(lo), float(hi), worst, pair, grid, rescaled)
