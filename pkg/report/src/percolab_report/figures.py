"""Figure renderers, one per figure kind.

Rendering is deterministic: fixed fonts, a fixed SVG hash salt, and no
embedded timestamps, so re-rendering a manifest reproduces byte-identical
files.  Every number shown in captions is copied from the CSV strings.
"""

from __future__ import annotations

import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams.update({
    "svg.fonttype": "none",
    "svg.hashsalt": "percolab-report",
    "font.family": "DejaVu Sans",
    "figure.figsize": (6.4, 4.2),
    "axes.grid": True,
    "grid.alpha": 0.3,
})

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .reader import SchemaError  # noqa: E402

FIGURE_KINDS = ("tails", "collapse", "zeta", "exponents", "diagnostics")

TAIL_COLS = ("statistic", "p", "threshold", "estimate", "ci_low", "ci_high")


def _save(fig, out_dir, name, fmt):
    path = os.path.join(out_dir, f"{name}.{fmt}")
    fig.savefig(path, format=fmt, metadata={"Date": None})
    plt.close(fig)
    return path


def render_tails(manifests, out_dir, fmt):
    paths = []
    for mi, manifest in enumerate(manifests):
        if not manifest.has_table("tail.csv"):
            continue
        rows = manifest.load("tail.csv", required=TAIL_COLS)
        oracle = defaultdict(dict)
        if manifest.has_table("oracle.csv"):
            for row in manifest.load("oracle.csv",
                                     required=("statistic", "p", "threshold",
                                               "oracle")):
                oracle[(row["statistic"], row["p"])][int(row["threshold"])] = \
                    float(row["oracle"])
        groups = defaultdict(list)
        for row in rows:
            groups[(row["statistic"], row["p"])].append(row)
        for stat in sorted({s for s, _ in groups}):
            fig, ax = plt.subplots()
            for (s, p), grp in sorted(groups.items()):
                if s != stat:
                    continue
                thr = [int(r["threshold"]) for r in grp]
                est = [float(r["estimate"]) for r in grp]
                lo = [float(r["ci_low"]) for r in grp]
                hi = [float(r["ci_high"]) for r in grp]
                line, = ax.plot(thr, est, lw=1.2, label=f"p={p}")
                ax.fill_between(thr, lo, hi, alpha=0.25,
                                color=line.get_color(), lw=0)
                key = (s, p)
                if key in oracle:
                    ot = sorted(oracle[key])
                    ax.plot(ot, [oracle[key][t] for t in ot], "--", lw=1.0,
                            color=line.get_color(), label=f"oracle p={p}")
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_xlabel("threshold")
            ax.set_ylabel("tail probability (finite clusters)")
            ax.set_title(f"{stat} tail")
            ax.legend(fontsize=8)
            paths.append(_save(fig, out_dir, f"tails_{mi}_{stat}", fmt))
    if not paths:
        raise SchemaError("no manifest provided a tail.csv table")
    return paths


def render_collapse(manifests, out_dir, fmt):
    paths = []
    for mi, manifest in enumerate(manifests):
        if not manifest.has_table("collapse_curves.csv"):
            continue
        rows = manifest.load("collapse_curves.csv",
                             required=("curve", "x", "y"))
        summary = manifest.load("collapse_summary.csv",
                                required=("kind", "max_distance"))[0]
        groups = defaultdict(list)
        for row in rows:
            groups[row["curve"]].append((float(row["x"]), float(row["y"])))
        fig, ax = plt.subplots()
        for curve in sorted(groups):
            pts = sorted(groups[curve])
            ax.plot([x for x, _ in pts], [y for _, y in pts], lw=1.2,
                    label=curve)
        ax.set_xscale("log")
        ax.set_xlabel("rescaled threshold")
        ax.set_ylabel("rescaled tail (normalized at x=1)")
        ax.set_title(f"scaling collapse ({summary['kind']}), "
                     f"max distance {summary['max_distance']}")
        ax.legend(fontsize=8)
        paths.append(_save(fig, out_dir, f"collapse_{mi}", fmt))
    if not paths:
        raise SchemaError("no manifest provided a collapse_curves.csv table")
    return paths


def render_zeta(manifests, out_dir, fmt):
    paths = []
    for mi, manifest in enumerate(manifests):
        if not manifest.has_table("zeta_fits.csv"):
            continue
        fits = manifest.load("zeta_fits.csv",
                             required=("statistic", "p", "epsilon", "value",
                                       "stderr"))
        curves = (manifest.load("curves.csv", required=TAIL_COLS)
                  if manifest.has_table("curves.csv") else [])
        groups = defaultdict(list)
        for row in curves:
            groups[row["p"]].append(row)
        fig, ax = plt.subplots()
        for fit in fits:
            p = fit["p"]
            grp = groups.get(p, [])
            if grp:
                thr = [int(r["threshold"]) for r in grp]
                est = [float(r["estimate"]) for r in grp]
                pts = [(t, e * t ** 0.5) for t, e in zip(thr, est) if e > 0]
                if pts:
                    ax.semilogy([t for t, _ in pts], [y for _, y in pts],
                                "o", ms=3, label=f"p={p}")
            label = (f"fit eps={fit['epsilon']}: zeta={fit['value']}"
                     f" +- {fit['stderr']}")
            ax.plot([], [], " ", label=label)
        ax.set_xlabel("threshold")
        ax.set_ylabel("sqrt(threshold) * tail")
        ax.set_title("tail decay-rate fits")
        ax.legend(fontsize=7)
        paths.append(_save(fig, out_dir, f"zeta_{mi}", fmt))
    if not paths:
        raise SchemaError("no manifest provided a zeta_fits.csv table")
    return paths


def render_exponents(manifests, out_dir, fmt):
    paths = []
    for mi, manifest in enumerate(manifests):
        if not manifest.has_table("moments.csv"):
            continue
        rows = manifest.load("moments.csv",
                             required=("epsilon", "k", "estimate"))
        fits = (manifest.load("exponent_fits.csv",
                              required=("name", "value", "stderr"))
                if manifest.has_table("exponent_fits.csv") else [])
        groups = defaultdict(list)
        for row in rows:
            groups[row["k"]].append((float(row["epsilon"]),
                                     float(row["estimate"])))
        fig, ax = plt.subplots()
        for k in sorted(groups):
            pts = sorted(groups[k])
            ax.loglog([x for x, _ in pts], [y for _, y in pts], "o-",
                      ms=4, lw=1.0, label=f"k={k}")
        for fit in fits:
            ax.plot([], [], " ",
                    label=f"{fit['name']}={fit['value']} +- {fit['stderr']}")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("truncated moment")
        ax.set_title("truncated cluster moments vs distance to criticality")
        ax.legend(fontsize=8)
        paths.append(_save(fig, out_dir, f"exponents_{mi}", fmt))
    if not paths:
        raise SchemaError("no manifest provided a moments.csv table")
    return paths


def render_diagnostics(manifests, out_dir, fmt):
    paths = []
    for mi, manifest in enumerate(manifests):
        if not manifest.has_table("ball_norms.csv"):
            continue
        norms = manifest.load("ball_norms.csv",
                              required=("p", "radius", "norm"))
        tri = (manifest.load("triangle.csv",
                             required=("p", "radius", "partial_sum"))
               if manifest.has_table("triangle.csv") else [])
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.2, 4.0))
        groups = defaultdict(list)
        for row in norms:
            groups[row["p"]].append((int(row["radius"]), float(row["norm"])))
        for p in sorted(groups):
            pts = sorted(groups[p])
            ax1.plot([r for r, _ in pts], [v for _, v in pts], "o-", ms=4,
                     label=f"p={p}")
        ax1.set_xlabel("ball radius")
        ax1.set_ylabel("operator norm (ball restriction)")
        ax1.legend(fontsize=8)
        tgroups = defaultdict(list)
        for row in tri:
            tgroups[row["p"]].append((int(row["radius"]),
                                      float(row["partial_sum"])))
        for p in sorted(tgroups):
            pts = sorted(tgroups[p])
            ax2.plot([r for r, _ in pts], [v for _, v in pts], "o-", ms=4,
                     label=f"p={p}")
        ax2.set_xlabel("summation radius")
        ax2.set_ylabel("triangle diagram partial sum")
        ax2.legend(fontsize=8)
        fig.suptitle("two-point operator diagnostics")
        paths.append(_save(fig, out_dir, f"diagnostics_{mi}", fmt))
    if not paths:
        raise SchemaError("no manifest provided a ball_norms.csv table")
    return paths


RENDERERS = {
    "tails": render_tails,
    "collapse": render_collapse,
    "zeta": render_zeta,
    "exponents": render_exponents,
    "diagnostics": render_diagnostics,
}
