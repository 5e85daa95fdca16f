"""Plain-text summary tables.

Cell values are the CSV strings verbatim; the report never recomputes or
reformats a number.
"""

from __future__ import annotations

import os

FIT_TABLES = (
    ("zeta_fits.csv", ("name", "statistic", "p", "epsilon", "value", "stderr",
                       "r_squared", "oracle", "rel_err")),
    ("exponent_fits.csv", ("name", "value", "stderr", "window_lo",
                           "window_hi", "n_points")),
)


def write_summary_table(manifests, out_dir):
    """One aligned text table of every exponent fit found in the manifests."""
    sections = []
    for name, cols in FIT_TABLES:
        rows = []
        for manifest in manifests:
            if not manifest.has_table(name):
                continue
            for row in manifest.load(name, required=[c for c in cols
                                                     if c in ("name", "value",
                                                              "stderr")]):
                rows.append([row.get(c, "") for c in cols])
        if not rows:
            continue
        widths = [max(len(c), *(len(r[i]) for r in rows))
                  for i, c in enumerate(cols)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
        lines.append("  ".join("-" * w for w in widths))
        for r in rows:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        sections.append(f"# {name}\n" + "\n".join(lines))
    path = os.path.join(out_dir, "summary_table.txt")
    body = "\n\n".join(sections) if sections else "# no exponent fits found"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(body + "\n")
    return path
