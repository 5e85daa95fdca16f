"""Experiment implementations behind the CLI.

Each experiment consumes a validated ExperimentConfig, runs engine/oracle/
estimator calls seeded deterministically from the config seed, and registers
CSV tables plus verdicts on a ResultWriter.  Estimator budget/window errors
are recorded as structured manifest errors (exit code 3 upstream); failed
oracle comparisons set a failing verdict (exit code 4 upstream).
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import estimators
from .bridges import FiniteSubgraph
from .config import ConfigError, ExperimentConfig
from .engine import ExplorationBudget, Status, sample_batch
from .enumeration import (configuration_table, d_term,
                          enumerate_truncated_expectation, functional_one,
                          functional_volume, functional_volume_sq,
                          make_radius_indicator, u_term)
from .estimators import (BudgetError, ConfigurationError, DataError,
                         RangeError, WindowError, exponent_fit_gamma_delta,
                         gen_function_estimate, scaling_collapse,
                         skinny_probability, tail_curve, truncated_moments,
                         wilson_interval, zeta_fit)
from .diagnostics import ball_operator_norm, triangle_diagram, two_point
from .graphs import RegularTree, parse_model
from .manifest import TAIL_SCHEMA, ResultWriter
from .oracles import TreeOracle
from .rng import stream, subseed

ESTIMATOR_ERRORS = (BudgetError, WindowError, DataError, RangeError,
                    ConfigurationError)


class OracleComparisonError(RuntimeError):
    """An oracle-comparison verdict failed (CLI exit code 4)."""


def resolve_p_c(cfg, model):
    """Trees know p_c analytically; other models must be given one."""
    if isinstance(model, RegularTree):
        return model.p_c
    if cfg.p_c is None:
        raise ConfigError(
            f"model {cfg.model!r} has no analytic p_c; set `p_c = ...` "
            "explicitly (use pc-scan to inspect the survival curve)")
    return cfg.p_c


def _epsilon_ps(cfg, model):
    p_c = resolve_p_c(cfg, model)
    sign = 1.0 if cfg.side == "super" else -1.0
    return p_c, [(e, p_c + sign * e) for e in cfg.epsilons]


def _curve_rows(curve):
    budget = curve.budget_edges
    for i, t in enumerate(curve.thresholds):
        yield (curve.statistic, curve.p, int(t), float(curve.point[i]),
               float(curve.ci_low[i]), float(curve.ci_high[i]),
               curve.replicates, budget)


# ----- tail ---------------------------------------------------------------


def run_tail(cfg, model, writer):
    if not cfg.p_values:
        raise ConfigError("tail experiment needs `p = ...`")
    thresholds = cfg.thresholds or list(range(1, 1001))
    budget = ExplorationBudget(
        cfg.budget_edges or estimators.VOLUME_BUDGET_FACTOR * max(thresholds),
        cfg.budget_radius)
    rows = []
    for i, p in enumerate(cfg.p_values):
        summary = sample_batch(model, p, budget, cfg.replicates,
                               subseed(cfg.seed, i), cfg.workers)
        for stat in cfg.statistics:
            rows.extend(_curve_rows(tail_curve(summary, stat, thresholds)))
    writer.add_table("tail.csv", TAIL_SCHEMA, rows)


# ----- oracle-compare ------------------------------------------------------


def run_oracle_compare(cfg, model, writer):
    if not isinstance(model, RegularTree):
        raise ConfigError("oracle-compare needs a tree model")
    if not cfg.p_values:
        raise ConfigError("oracle-compare needs `p = ...`")
    oracle = TreeOracle(model.k)
    n_max = int(cfg.extras.get("max_threshold_volume", 1000))
    r_max = int(cfg.extras.get("max_threshold_radius", 1000))
    # at p_c the finite-volume tail is polynomial, so the censored fraction of
    # deep finite clusters only decays like budget^(-1/2); an unbiased
    # comparison against the oracle needs a budget far above 50*threshold
    budget = ExplorationBudget(cfg.budget_edges or 10 ** 10, cfg.budget_radius)
    curve_rows, oracle_rows, coverage_rows = [], [], []
    all_pass = True
    for i, p in enumerate(cfg.p_values):
        summary = sample_batch(model, p, budget, cfg.replicates,
                               subseed(cfg.seed, i), cfg.workers)
        vol_truth = oracle.volume_tail_finite(p, n_max)
        rad_truth = oracle.radius_tail_finite(p, r_max)[1:]
        for stat, truth, tmax in (("volume", vol_truth, n_max),
                                  ("intrinsic_radius", rad_truth, r_max)):
            thresholds = list(range(1, tmax + 1))
            curve = tail_curve(summary, stat, thresholds)
            curve_rows.extend(_curve_rows(curve))
            oracle_rows.extend((stat, p, t, float(truth[j]))
                               for j, t in enumerate(thresholds))
            covered = int(np.count_nonzero(
                (curve.ci_low <= truth) & (truth <= curve.ci_high)))
            coverage = covered / len(thresholds)
            coverage_rows.append((stat, p, len(thresholds), covered, coverage))
            if coverage < 0.90:
                all_pass = False
    writer.add_table("tail.csv", TAIL_SCHEMA, curve_rows)
    writer.add_table("oracle.csv", ("statistic", "p", "threshold", "oracle"),
                     oracle_rows)
    writer.add_table("coverage.csv",
                     ("statistic", "p", "n_thresholds", "n_covered", "coverage"),
                     coverage_rows)
    writer.add_verdict("oracle_coverage_pass", all_pass)
    if not all_pass:
        raise OracleComparisonError("Wilson CI coverage below 90% against the "
                                    "tree oracle")


# ----- zeta ----------------------------------------------------------------


def _default_zeta_thresholds(eps, kind):
    # spans chosen so the deepest default threshold still collects O(1) hits
    # per 1e7 replicates on the 3-regular tree (rate*span ~ 4..6)
    if kind == "volume":
        lo = max(8, math.ceil(1.35 / (eps * eps)))
        hi = math.ceil(2.8 / (eps * eps))
        points = 12
    else:
        lo = max(8, math.ceil(4.2 / eps))
        hi = math.ceil(6.5 / eps)
        points = 10
    grid = np.unique(np.rint(np.geomspace(lo, hi, points)).astype(int))
    return [int(x) for x in grid]


def run_zeta(cfg, model, writer):
    if not isinstance(model, RegularTree):
        raise ConfigError("zeta experiment needs a tree model")
    if not cfg.epsilons:
        raise ConfigError("zeta experiment needs `epsilon = ...`")
    stat = cfg.statistics[0]
    kind = "volume" if stat in ("volume", "touched_edges") else "radius"
    oracle = TreeOracle(model.k)
    p_c, eps_ps = _epsilon_ps(cfg, model)
    curve_rows, fit_rows = [], []
    fits = {}
    for i, (eps, p) in enumerate(eps_ps):
        thresholds = cfg.thresholds or _default_zeta_thresholds(eps, kind)
        if kind == "volume":
            default_budget = estimators.VOLUME_BUDGET_FACTOR * max(thresholds)
        else:
            # tall subcritical clusters carry volume ~ r/eps; keep the budget
            # far above it so censoring cannot bend the measured rate
            default_budget = max(10 ** 5, math.ceil(40 * max(thresholds) / eps))
        budget = ExplorationBudget(cfg.budget_edges or default_budget,
                                   cfg.budget_radius)
        summary = sample_batch(model, p, budget, cfg.replicates,
                               subseed(cfg.seed, i), cfg.workers)
        curve = tail_curve(summary, stat, thresholds)
        curve_rows.extend(_curve_rows(curve))
        fit = zeta_fit(curve, p_c)
        truth = (oracle.zeta_exact(p, "volume") if stat == "volume"
                 else oracle.zeta_exact(p, "edges") if stat == "touched_edges"
                 else oracle.radius_decay_rate(p))
        rel = (fit.value - truth) / truth if truth else None
        fits[eps] = fit
        fit_rows.append(("zeta", stat, p, eps, fit.value, fit.stderr,
                         fit.r_squared, fit.max_abs_residual,
                         fit.window[0], fit.window[1], fit.n_points,
                         truth if truth is not None else "",
                         rel if rel is not None else ""))
    writer.add_table("curves.csv", TAIL_SCHEMA, curve_rows)
    writer.add_table("zeta_fits.csv",
                     ("name", "statistic", "p", "epsilon", "value", "stderr",
                      "r_squared", "max_abs_residual", "window_lo", "window_hi",
                      "n_points", "oracle", "rel_err"),
                     fit_rows)
    ratio_rows = []
    eps_sorted = sorted(fits)
    for eps in eps_sorted:
        if 2 * eps in fits:
            ratio_rows.append((eps, 2 * eps,
                               fits[2 * eps].value / fits[eps].value))
    if ratio_rows:
        writer.add_table("zeta_ratios.csv",
                         ("epsilon", "epsilon2", "ratio"), ratio_rows)


# ----- moments / exponents --------------------------------------------------


def _moment_table(cfg, model, writer):
    if not cfg.epsilons:
        raise ConfigError("needs `epsilon = ...`")
    k_max = int(cfg.extras.get("k_max", 2))
    use_oracle = bool(cfg.extras.get("oracle", False))
    p_c, eps_ps = _epsilon_ps(cfg, model)
    oracle = TreeOracle(model.k) if isinstance(model, RegularTree) else None
    if use_oracle and oracle is None:
        raise ConfigError("oracle moments need a tree model")
    budget = ExplorationBudget(cfg.budget_edges or 10 ** 5, cfg.budget_radius)
    rows = []
    table = {}
    for i, (eps, p) in enumerate(eps_ps):
        table[eps] = {}
        if use_oracle:
            for k in range(1, k_max + 1):
                val = oracle.truncated_moment(p, k)
                table[eps][k] = val
                rows.append((p, eps, k, val, val, val, 0))
        else:
            summary = sample_batch(model, p, budget, cfg.replicates,
                                   subseed(cfg.seed, i), cfg.workers)
            for m in truncated_moments(summary, k_max,
                                       seed=subseed(cfg.seed, 10 ** 6 + i)):
                table[eps][m.order] = m.value
                rows.append((p, eps, m.order, m.value, m.ci_low, m.ci_high,
                             m.replicates))
    writer.add_table("moments.csv",
                     ("p", "epsilon", "k", "estimate", "ci_low", "ci_high",
                      "replicates"), rows)
    return table


def run_moments(cfg, model, writer):
    _moment_table(cfg, model, writer)


def run_exponents(cfg, model, writer):
    table = _moment_table(cfg, model, writer)
    gamma, delta = exponent_fit_gamma_delta(table, cfg.side)
    writer.add_table("exponent_fits.csv",
                     ("name", "value", "stderr", "window_lo", "window_hi",
                      "n_points"),
                     [(f.name, f.value, f.stderr, f.window[0], f.window[1],
                       f.n_points) for f in (gamma, delta)])


# ----- skinny ---------------------------------------------------------------


def run_skinny(cfg, model, writer):
    if not cfg.p_values:
        raise ConfigError("skinny experiment needs `p = ...`")
    r_grid = cfg.extras.get("r_grid") or [int(cfg.extras.get("r", 100))]
    alphas = cfg.extras.get("alpha") or [4.0]
    s_grid = cfg.extras.get("s_grid") or [2.0, 4.0, 6.0, 8.0]
    rows, cond_rows = [], []
    task = 0
    for p in cfg.p_values:
        for r in r_grid:
            for alpha in alphas:
                budget = (ExplorationBudget(cfg.budget_edges, cfg.budget_radius)
                          if cfg.budget_edges else None)
                est = skinny_probability(model, p, int(r), alpha,
                                         cfg.replicates,
                                         subseed(cfg.seed, task),
                                         s_grid=s_grid, budget=budget,
                                         workers=cfg.workers)
                task += 1
                rows.append((p, int(r), alpha, est.probability, est.ci_low,
                             est.ci_high, est.event_count, est.base_count,
                             est.replicates))
                for s, (val, lo, hi) in sorted(est.conditional.items()):
                    cond_rows.append((p, int(r), s, val, lo, hi,
                                      est.base_count))
    writer.add_table("skinny.csv",
                     ("p", "r", "alpha", "estimate", "ci_low", "ci_high",
                      "event_count", "base_count", "replicates"), rows)
    writer.add_table("skinny_conditional.csv",
                     ("p", "r", "s", "estimate", "ci_low", "ci_high",
                      "base_count"), cond_rows)


# ----- genfn ----------------------------------------------------------------


def run_genfn(cfg, model, writer):
    if not cfg.p_values:
        raise ConfigError("genfn experiment needs `p = ...`")
    n = int(cfg.extras.get("n_trunc", 200))
    k = int(cfg.extras.get("genfn_k", 1))
    s_grid = cfg.extras.get("s_grid") or [0.0, -0.01, -0.1]
    t_grid = cfg.extras.get("t_grid") or [0.0, 0.05, 0.1]
    tuples = int(cfg.extras.get("tuples_per_sample", 8))
    rows = []
    for i, p in enumerate(cfg.p_values):
        est = gen_function_estimate(model, p, n, k, s_grid, t_grid,
                                    cfg.replicates, subseed(cfg.seed, i),
                                    tuples_per_sample=tuples)
        for si, s in enumerate(est.s_grid):
            for ti, t in enumerate(est.t_grid):
                rows.append((p, n, k, s, t, float(est.values[si, ti]),
                             float(est.ci_low[si, ti]),
                             float(est.ci_high[si, ti]), est.replicates))
    writer.add_table("genfn.csv",
                     ("p", "n", "k", "s", "t", "estimate", "ci_low", "ci_high",
                      "replicates"), rows)


# ----- russo-check -----------------------------------------------------------


def random_connected_subgraph(rng, max_edges):
    """Random connected simple graph with 2..max_edges edges (tree + extras)."""
    n = int(rng.integers(3, max(4, max_edges)))
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v))
        if len(edges) >= max_edges:
            break
    present = set(edges)
    n = max(max(e[1] for e in edges) + 1, 2)
    candidates = [(u, v) for u in range(n) for v in range(u + 1, n)
                  if (u, v) not in present]
    rng.shuffle(candidates)
    for u, v in candidates:
        if len(edges) >= max_edges:
            break
        if rng.random() < 0.5:
            edges.append((u, v))
    return FiniteSubgraph(list(range(n)), edges)


FUNCTIONALS = (("one", lambda r: functional_one),
               ("volume", lambda r: functional_volume),
               ("volume_sq", lambda r: functional_volume_sq),
               ("radius_ge_r", None))


def run_russo_check(cfg, model, writer):
    max_edges = int(cfg.extras.get("edges", 10))
    trials = int(cfg.extras.get("trials", 50))
    if max_edges > 12:
        raise ConfigError("russo-check caps at 12 edges (enumeration cost)")
    rng = stream(cfg.seed, 0)
    rows = []
    worst = 0.0
    for trial in range(trials):
        H = random_connected_subgraph(rng, max_edges)
        root = H.vertices[0]
        table = configuration_table(H, root)
        n_trunc = int(rng.integers(1, H.n_edges + 2))
        fname, fmake = FUNCTIONALS[trial % len(FUNCTIONALS)]
        if fmake is None:
            r = int(rng.integers(1, 4))
            F = make_radius_indicator(r, root)
            fname = f"radius_ge_{r}"
        else:
            F = fmake(root)
        poly = enumerate_truncated_expectation(H, F, n_trunc, root, table)
        dpoly = poly.derivative()
        for p in (0.2, 0.5, 0.8):
            lhs = float(dpoly(p))
            rhs = (u_term(H, F, n_trunc, p, root, table)
                   - d_term(H, F, n_trunc, p, root, table))
            resid = abs(lhs - rhs)
            worst = max(worst, resid)
            rows.append((trial, H.n_edges, fname, n_trunc, p, lhs, rhs, resid))
    writer.add_table("russo.csv",
                     ("trial", "edges", "functional", "n", "p",
                      "poly_derivative", "u_minus_d", "residual"), rows)
    ok = worst < 1e-9
    writer.add_verdict("russo_identity_pass", ok)
    writer.add_verdict("russo_max_residual", worst)
    if not ok:
        raise OracleComparisonError(f"Russo residual {worst} >= 1e-9")


# ----- diagnostics -----------------------------------------------------------


def run_diagnostics(cfg, model, writer):
    if not cfg.p_values:
        raise ConfigError("diagnostics needs `p = ...`")
    radii = cfg.extras.get("radii") or [6, 7, 8, 9, 10, 11, 12]
    norm_rows, tri_rows, tp_rows = [], [], []
    for i, p in enumerate(cfg.p_values):
        for R in radii:
            est = ball_operator_norm(model, p, int(R),
                                     replicates=cfg.replicates,
                                     seed=subseed(cfg.seed, i))
            norm_rows.append((cfg.model, p, int(R), est.norm, est.iterations,
                              est.exact))
        tri = triangle_diagram(model, p, int(max(radii)),
                               replicates=cfg.replicates,
                               seed=subseed(cfg.seed, 10 ** 3 + i))
        tri_rows.extend((cfg.model, p, r, s, tri.exact)
                        for r, s in zip(tri.radii, tri.partial_sums))
        root = model.root
        v = root
        for d in range(1, 6):
            nbrs = model.neighbors(v)
            v = nbrs[-1]
            tp = two_point(model, p, root, v, replicates=cfg.replicates,
                           seed=subseed(cfg.seed, 10 ** 6 + i))
            tp_rows.append((cfg.model, p, d, tp.point, tp.ci_low, tp.ci_high,
                            tp.exact))
    writer.add_table("ball_norms.csv",
                     ("model", "p", "radius", "norm", "iterations", "exact"),
                     norm_rows)
    writer.add_table("triangle.csv",
                     ("model", "p", "radius", "partial_sum", "exact"), tri_rows)
    writer.add_table("twopoint.csv",
                     ("model", "p", "distance", "estimate", "ci_low", "ci_high",
                      "exact"), tp_rows)


# ----- collapse ---------------------------------------------------------------


def _oracle_curve(oracle, p, statistic, thresholds):
    n_max = max(thresholds)
    if statistic == "volume":
        tail = oracle.volume_tail_finite(p, n_max)
        pts = np.array([tail[t - 1] for t in thresholds])
    else:
        tail = oracle.radius_tail_finite(p, n_max)
        pts = np.array([tail[t] for t in thresholds])
    thr = np.asarray(thresholds, dtype=np.int64)
    return estimators.TailCurve(statistic, p, thr, pts, pts.copy(), pts.copy(),
                                0, 0, None)


def run_collapse(cfg, model, writer):
    if not isinstance(model, RegularTree) and cfg.p_c is None:
        raise ConfigError("collapse on non-tree models needs `p_c = ...`")
    if len(cfg.epsilons) < 2:
        raise ConfigError("collapse needs >= 2 epsilons")
    stat = cfg.statistics[0]
    kind = "volume" if stat in ("volume", "touched_edges") else "radius"
    use_oracle = bool(cfg.extras.get("oracle", False))
    p_c, eps_ps = _epsilon_ps(cfg, model)
    oracle = TreeOracle(model.k) if isinstance(model, RegularTree) else None
    if use_oracle and oracle is None:
        raise ConfigError("oracle collapse needs a tree model")
    curves = []
    for i, (eps, p) in enumerate(eps_ps):
        if kind == "volume":
            lo = max(2, math.ceil(0.3 / (eps * eps)))
            hi = math.ceil(9.0 / (eps * eps))
        else:
            lo = max(2, math.ceil(0.3 / eps))
            hi = math.ceil(9.0 / eps)
        thresholds = cfg.thresholds or [int(x) for x in np.unique(
            np.rint(np.geomspace(lo, hi, 60)).astype(int))]
        if use_oracle:
            curves.append(_oracle_curve(oracle, p, stat, thresholds))
        else:
            budget = ExplorationBudget(
                cfg.budget_edges
                or estimators.VOLUME_BUDGET_FACTOR * max(thresholds))
            summary = sample_batch(model, p, budget, cfg.replicates,
                                   subseed(cfg.seed, i), cfg.workers)
            curves.append(tail_curve(summary, stat, thresholds))
    report = scaling_collapse(curves, p_c)
    rows = []
    for label in sorted(report.rescaled):
        for x, y in zip(report.grid, report.rescaled[label]):
            rows.append((label, float(x), float(y)))
    writer.add_table("collapse_curves.csv", ("curve", "x", "y"), rows)
    writer.add_table("collapse_summary.csv",
                     ("kind", "x_lo", "x_hi", "max_distance", "n_curves"),
                     [(report.kind, report.x_lo, report.x_hi,
                       report.max_distance, len(report.rescaled))])
    writer.add_verdict("collapse_max_distance", report.max_distance)


# ----- pc-scan -----------------------------------------------------------------


def run_pc_scan(cfg, model, writer):
    grid = cfg.extras.get("p_grid") or cfg.p_values
    if not grid:
        raise ConfigError("pc-scan needs `p_grid = ...` or `p = ...`")
    budget = ExplorationBudget(cfg.budget_edges or 10 ** 5, cfg.budget_radius)
    rows = []
    for i, p in enumerate(grid):
        summary = sample_batch(model, p, budget, cfg.replicates,
                               subseed(cfg.seed, i), cfg.workers)
        censored = summary.count("volume", Status.CENSORED_EDGES)
        lo, hi = wilson_interval(censored, cfg.replicates)
        rows.append((p, censored / cfg.replicates, float(lo), float(hi),
                     cfg.replicates, budget.max_edges))
    writer.add_table("pcscan.csv",
                     ("p", "theta_hat", "ci_low", "ci_high", "replicates",
                      "budget"), rows)


DISPATCH = {
    "tail": run_tail,
    "zeta": run_zeta,
    "moments": run_moments,
    "exponents": run_exponents,
    "skinny": run_skinny,
    "genfn": run_genfn,
    "russo-check": run_russo_check,
    "oracle-compare": run_oracle_compare,
    "diagnostics": run_diagnostics,
    "collapse": run_collapse,
    "pc-scan": run_pc_scan,
}


def run(cfg: ExperimentConfig):
    """Execute one experiment; returns (exit_code, manifest_path)."""
    model = parse_model(cfg.model)
    writer = ResultWriter(cfg.out, cfg.echo())
    t0 = time.time()
    code = 0
    try:
        DISPATCH[cfg.experiment](cfg, model, writer)
    except ConfigError:
        raise
    except ESTIMATOR_ERRORS as exc:
        writer.add_verdict("error", {"kind": type(exc).__name__,
                                     "message": str(exc)})
        code = 3
    except ValueError as exc:
        writer.add_verdict("error", {"kind": type(exc).__name__,
                                     "message": str(exc)})
        code = 3
    except OracleComparisonError as exc:
        writer.add_verdict("error", {"kind": "OracleComparisonError",
                                     "message": str(exc)})
        code = 4
    path = writer.write_manifest(time.time() - t0)
    return code, path
