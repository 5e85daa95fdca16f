"""Acceptance suite.

One test per criterion, run at the stated tolerances with pre-registered
seeds and replicate counts; each prints a PASS/FAIL line (visible with -rA or
-s).  Criteria 4a and 7b are known-red: the exact tree values sit outside the
stated bands (see the analysis printed by the tests); they are asserted at
their stated tolerances regardless.

Heavy Monte Carlo lives here, not in the unit tests: the full suite is
dominated by criterion 3 (about 14 minutes of vectorized sampling).
"""

import time
from collections import deque

import numpy as np

import percolab as pl
from percolab import (ExplorationBudget, FiniteSubgraph, RegularTree, Status,
                      TreeOracle, br_statistic, decompose,
                      exponent_fit_gamma_delta, explore_cluster, sample_batch,
                      skinny_probability, stream, tail_curve,
                      truncated_moments, zeta_fit)
from percolab.enumeration import (configuration_table, d_term,
                                  enumerate_truncated_expectation,
                                  functional_one, functional_volume,
                                  functional_volume_sq, make_radius_indicator,
                                  u_term)
from percolab.runner import _default_zeta_thresholds, random_connected_subgraph

TREE = RegularTree(3)
ORACLE = TreeOracle(3)


def report(criterion, ok, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


# --- criterion 1: Russo identity ------------------------------------------


def test_criterion_1_russo_identity():
    t0 = time.time()
    rng = stream(1001, 0)
    worst = 0.0
    instances = 0
    while instances < 50:
        H = random_connected_subgraph(rng, 12)
        if H.n_edges > 12:
            continue
        table = configuration_table(H, 0)
        n = int(rng.integers(1, H.n_edges + 2))
        r = int(rng.integers(1, 4))
        for F in (functional_one, functional_volume, functional_volume_sq,
                  make_radius_indicator(r, 0)):
            dpoly = enumerate_truncated_expectation(H, F, n, 0,
                                                    table).derivative()
            for p in (0.2, 0.5, 0.8):
                resid = abs(float(dpoly(p))
                            - (u_term(H, F, n, p, 0, table)
                               - d_term(H, F, n, p, 0, table)))
                worst = max(worst, resid)
        instances += 1
    elapsed = time.time() - t0
    ok = worst < 1e-9 and elapsed < 60
    assert report(1, ok, f"50 instances, max |d/dp E - (U-D)| = {worst:.3g}, "
                         f"{elapsed:.1f}s")


# --- criterion 2: engine vs oracle ------------------------------------------


def test_criterion_2_engine_oracle_agreement():
    t0 = time.time()
    replicates = 10 ** 6
    thresholds = list(range(1, 1001))
    worst = 1.0
    details = []
    for i, p in enumerate((0.40, 0.50, 0.55)):
        summary = sample_batch(TREE, p, ExplorationBudget(10 ** 10),
                               replicates, seed=20260401)
        vol_truth = ORACLE.volume_tail_finite(p, 1000)
        rad_truth = ORACLE.radius_tail_finite(p, 1000)[1:]
        for stat, truth in (("volume", vol_truth),
                            ("intrinsic_radius", rad_truth)):
            curve = tail_curve(summary, stat, thresholds)
            cov = float(np.mean((curve.ci_low <= truth)
                                & (truth <= curve.ci_high)))
            worst = min(worst, cov)
            details.append(f"{stat}@p={p}: {cov:.3f}")
    elapsed = time.time() - t0
    ok = worst >= 0.90 and elapsed < 600
    assert report(2, ok, f"min CI coverage {worst:.3f} ({'; '.join(details)}), "
                         f"{elapsed:.0f}s")


# --- criterion 3: volume tail law -------------------------------------------


def test_criterion_3_volume_zeta_fits():
    t0 = time.time()
    fits = {}
    rel_errs = {}
    rates = {}
    for eps, reps in ((0.08, 6 * 10 ** 7), (0.04, 8 * 10 ** 7)):
        p = 0.5 + eps
        thr = _default_zeta_thresholds(eps, "volume")
        budget = ExplorationBudget(50 * max(thr))
        t1 = time.time()
        summary = sample_batch(TREE, p, budget, reps, seed=20260809)
        rates[eps] = (time.time() - t1) * 10 ** 7 / reps
        curve = tail_curve(summary, "volume", thr)
        fit = zeta_fit(curve, 0.5)
        truth = ORACLE.zeta_exact(p)      # Cramer rate at the dual parameter
        fits[eps] = fit.value
        rel_errs[eps] = abs(fit.value - truth) / truth
    ratio = fits[0.08] / fits[0.04]
    elapsed = time.time() - t0
    ok = (all(r < 0.20 for r in rel_errs.values())
          and 3.0 <= ratio <= 5.0
          and all(r < 1200 for r in rates.values()))
    assert report(3, ok,
                  f"rel err eps=0.08: {rel_errs[0.08]:.3f}, eps=0.04: "
                  f"{rel_errs[0.04]:.3f} (tol 0.20); ratio {ratio:.2f} in "
                  f"[3,5]; {rates[0.08]:.0f}s and {rates[0.04]:.0f}s per 1e7 "
                  f"replicates (budget 1200s); total {elapsed:.0f}s")


# --- criterion 4: radius tail law -------------------------------------------


def test_criterion_4a_radius_window_band():
    # Implemented at the stated band.  The exact iterated-pgf value of
    # r*P(r <= R < inf) at p = 0.5 on the 3-regular tree climbs to
    # 2k/(k-2) = 6 (5.13 at r=46, 5.94 at r=1000), so the upper edge 5 is
    # exceeded from r ~ 46 on; the unbiased measurement reproduces that.
    grid = [10, 22, 46, 100, 215, 464, 1000]
    summary = sample_batch(TREE, 0.5, ExplorationBudget(10 ** 10), 10 ** 6,
                           seed=20260402)
    curve = tail_curve(summary, "intrinsic_radius", grid)
    products = {int(t): float(t * pt)
                for t, pt in zip(curve.thresholds, curve.point)}
    ok = all(0.2 <= v <= 5.0 for v in products.values())
    report("4a", ok, "r*P(r<=R<inf) at p=0.5: "
           + ", ".join(f"r={r}: {v:.2f}" for r, v in products.items())
           + " (band [0.2, 5])")
    assert ok


def test_criterion_4b_radius_decay_linear_in_eps():
    t0 = time.time()
    rates = {}
    for eps in (0.04, 0.08):
        p = 0.5 + eps
        thr = _default_zeta_thresholds(eps, "radius")
        budget = ExplorationBudget(max(10 ** 5, int(40 * max(thr) / eps)))
        summary = sample_batch(TREE, p, budget, 10 ** 7, seed=20260403)
        fit = zeta_fit(tail_curve(summary, "intrinsic_radius", thr), 0.5)
        rates[eps] = fit.value
    ratio = rates[0.08] / rates[0.04]
    elapsed = time.time() - t0
    ok = abs(ratio / 2.0 - 1.0) <= 0.30 and elapsed < 1200
    assert report("4b", ok,
                  f"log-decay rates {rates[0.04]:.4f} (eps=0.04), "
                  f"{rates[0.08]:.4f} (eps=0.08); ratio/2 = {ratio / 2:.3f} "
                  f"(tol 0.30); {elapsed:.0f}s")


# --- criterion 5: mean-field gamma', Delta' ---------------------------------


def test_criterion_5_exponents():
    t0 = time.time()
    # exact oracle moment tables
    oracle_tbl = {eps: {k: ORACLE.truncated_moment(0.5 - eps, k)
                        for k in (1, 2, 3)}
                  for eps in (0.01, 0.02, 0.04, 0.06, 0.08)}
    gamma_o, delta_o = exponent_fit_gamma_delta(oracle_tbl, "sub")
    # Monte Carlo tables, k <= 2
    mc_tbl = {}
    for i, eps in enumerate((0.02, 0.04, 0.06, 0.08)):
        summary = sample_batch(TREE, 0.5 - eps, ExplorationBudget(10 ** 5),
                               10 ** 7, seed=20260406 + i)
        mc_tbl[eps] = {m.order: m.value
                       for m in truncated_moments(summary, 2, seed=99 + i)}
    gamma_mc, _ = exponent_fit_gamma_delta(mc_tbl, "sub")
    elapsed = time.time() - t0
    ok = (abs(gamma_o.value - 1.0) <= 0.10
          and abs(delta_o.value - 2.0) <= 0.15
          and abs(gamma_mc.value - 1.0) <= 0.20
          and elapsed < 900)
    assert report(5, ok,
                  f"oracle gamma'={gamma_o.value:.3f} (1 +- 0.1), "
                  f"Delta'={delta_o.value:.3f} (2 +- 0.15); MC gamma'="
                  f"{gamma_mc.value:.3f} (1 +- 0.2); {elapsed:.0f}s")


# --- criterion 6: bridge statistic vs brute force ----------------------------


def _brute_bridges(H):
    out = []
    for skip in range(H.n_edges):
        seen = {0}
        q = deque([0])
        while q:
            x = q.popleft()
            for y, ei in H.adj[x]:
                if ei != skip and y not in seen:
                    seen.add(y)
                    q.append(y)
        if len(seen) != H.n_vertices:
            out.append(skip)
    return tuple(out)


def _brute_br(H, dec, v, xs):
    terminals = [H.index[v]] + [H.index[x] for x in xs]
    count = 0
    for skip in dec.bridges:
        comp = [-1] * H.n_vertices
        label = 0
        for s in range(H.n_vertices):
            if comp[s] != -1:
                continue
            comp[s] = label
            q = deque([s])
            while q:
                x = q.popleft()
                for y, ei in H.adj[x]:
                    if ei != skip and comp[y] == -1:
                        comp[y] = label
                        q.append(y)
            label += 1
        if len({comp[t] for t in terminals}) > 1:
            count += 1
    return count


def test_criterion_6_bridge_statistic():
    t0 = time.time()
    models = (TREE, pl.TreeTimesCycle(3, 4))
    rng = stream(1006, 0)
    checked = 0
    i = 0
    while checked < 10 ** 4:
        model = models[i % 2]
        smp = explore_cluster(model, 0.45, ExplorationBudget(220),
                              stream(1006, i), record_edges=True)
        i += 1
        if smp.status is not Status.FINITE or smp.volume < 2:
            continue
        H = FiniteSubgraph.from_cluster_edges(smp.edges, model.root)
        if H.n_edges > 200:
            continue
        dec = decompose(H)
        assert dec.bridges == _brute_bridges(H)
        xs = []
        for _ in range(3):
            xs.append(H.vertices[int(rng.integers(0, H.n_vertices))])
            assert br_statistic(dec, model.root, xs) == _brute_br(
                H, dec, model.root, xs)
        checked += 1
    elapsed = time.time() - t0
    ok = elapsed < 120
    assert report(6, ok, f"{checked} clusters, exact bridge sets and Br for "
                         f"witness sizes 1-3; {elapsed:.0f}s (budget 120s)")


# --- criterion 7: skinny clusters --------------------------------------------


def test_criterion_7a_skinny_conditional_drop():
    t0 = time.time()
    est = skinny_probability(TREE, 0.5, 100, 4.0, 4 * 10 ** 6, seed=20260404,
                             s_grid=(2.0, 8.0))
    v2 = est.conditional[2.0][0]
    v8 = est.conditional[8.0][0]
    ratio = v2 / v8 if v8 > 0 else float("inf")
    elapsed = time.time() - t0
    ok = ratio >= 5.0 and elapsed < 600
    assert report("7a", ok,
                  f"P(E<=r^2/s | R>=r) at r=100: s=2: {v2:.4f}, s=8: {v8:.5f}"
                  f" (base {est.base_count}); drop {ratio:.1f}x >= 5x; "
                  f"{elapsed:.0f}s")


def test_criterion_7b_skinny_exponential_decay():
    # Implemented at the stated grid.  With E_v >= 2R_v + 1 on the 3-tree,
    # alpha = 4 forces mean layer width <= 2, a large-deviation event with
    # per-step rate ~0.19; P at r = 200 is ~1e-17 and no desk-scale replicate
    # count can populate the deeper grid points.
    t0 = time.time()
    probs = {}
    counts = {}
    for r in (50, 100, 200):
        est = skinny_probability(TREE, 0.5, r, 4.0, 10 ** 7,
                                 seed=20260405 + r)
        probs[r] = est.probability
        counts[r] = est.event_count
    elapsed = time.time() - t0
    detail = (", ".join(f"r={r}: {counts[r]} events" for r in (50, 100, 200))
              + f"; {elapsed:.0f}s")
    if 0 in (probs[50], probs[100], probs[200]):
        report("7b", False, "unmeasurable log-decrements: " + detail)
        assert False, ("alpha=4 skinny decay not measurable by direct MC: "
                       + detail)
    rate1 = (np.log(probs[50]) - np.log(probs[100])) / 50
    rate2 = (np.log(probs[100]) - np.log(probs[200])) / 100
    ok = abs(rate2 / rate1 - 1.0) <= 0.30
    assert report("7b", ok, f"per-r log-decrements {rate1:.4f}, {rate2:.4f}; "
                            + detail)


# --- criterion 8: diagnostics -------------------------------------------------


def test_criterion_8_diagnostics_saturation():
    t0 = time.time()
    norms5 = {R: pl.ball_operator_norm(TREE, 0.5, R).norm for R in range(6, 13)}
    norms75 = {R: pl.ball_operator_norm(TREE, 0.75, R).norm for R in range(6, 13)}
    inc5 = norms5[12] / norms5[11] - 1.0
    inc75 = norms75[12] / norms75[11] - 1.0
    tri = pl.triangle_diagram(TREE, 0.5, 12)
    tri_inc = (tri.partial_sums[12] - tri.partial_sums[11]) / tri.partial_sums[12]
    elapsed = time.time() - t0
    ok = inc5 < 0.05 and inc75 > 0.15 and tri_inc < 0.01 and elapsed < 180
    assert report(8, ok,
                  f"norm increment at R=12: {inc5:.3%} at p=0.5 (< 5%), "
                  f"{inc75:.3%} at p=0.75 (> 15%); triangle increment "
                  f"{tri_inc:.3%} (< 1%); {elapsed:.1f}s")


# --- criterion 9: CLI determinism ---------------------------------------------


def test_criterion_9_cli_determinism(tmp_path):
    import hashlib
    import os

    from percolab.cli import main

    jobs = {
        "tail": ["tail", "--model", "tree:k=3", "--p", "0.45",
                 "--thresholds", "1:40", "--replicates", "20000"],
        "zeta": ["zeta", "--model", "tree:k=3", "--epsilon", "0.15",
                 "--side", "sub", "--thresholds", "geom:45:80:10",
                 "--replicates", "500000"],
        "moments": ["moments", "--model", "tree:k=3", "--epsilon", "0.05,0.1",
                    "--side", "sub", "--k-max", "2", "--replicates", "20000"],
        "exponents": ["exponents", "--model", "tree:k=3",
                      "--epsilon", "0.02,0.04,0.06,0.08", "--side", "sub",
                      "--oracle", "true", "--k-max", "3"],
        "skinny": ["skinny", "--model", "tree:k=3", "--p", "0.5", "--r", "20",
                   "--alpha", "6", "--replicates", "50000"],
        "genfn": ["genfn", "--model", "tree:k=3", "--p", "0.4",
                  "--n-trunc", "40", "--genfn-k", "1", "--replicates", "2000"],
        "russo-check": ["russo-check", "--model", "tree:k=3", "--edges", "8",
                        "--trials", "5"],
        "oracle-compare": ["oracle-compare", "--model", "tree:k=3", "--p",
                           "0.45", "--replicates", "100000",
                           "--max-threshold-volume", "40",
                           "--max-threshold-radius", "20",
                           "--budget-edges", "1000000"],
        "diagnostics": ["diagnostics", "--model", "tree:k=3", "--p", "0.5",
                        "--radii", "4,5,6", "--replicates", "400"],
        "collapse": ["collapse", "--model", "tree:k=3",
                     "--epsilon", "0.04,0.08", "--oracle", "true"],
        "pc-scan": ["pc-scan", "--model", "tree:k=3", "--p-grid",
                    "0.3,0.5,0.6", "--replicates", "5000",
                    "--budget-edges", "5000"],
    }

    def digests(path):
        out = {}
        for name in sorted(os.listdir(path)):
            if name.endswith(".csv"):
                with open(os.path.join(path, name), "rb") as fh:
                    out[name] = hashlib.sha256(fh.read()).hexdigest()
        return out

    all_ok = True
    for name, args in jobs.items():
        runs = []
        for tag, workers in (("a", 1), ("b", 1), ("w4", 4)):
            out = tmp_path / f"{name}-{tag}"
            code = main(args + ["--seed", "42", "--workers", str(workers),
                                "--out", str(out)])
            assert code == 0, (name, code)
            runs.append(digests(out))
        same = runs[0] == runs[1] == runs[2]
        all_ok = all_ok and same
        assert same, f"{name} not byte-identical across reruns/workers"
    assert report(9, all_ok, f"{len(jobs)} subcommands byte-identical across "
                             "two runs and workers in {1, 4}")
