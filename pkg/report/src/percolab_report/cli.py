"""`percolab-report` (alias `report`): render figures and tables from manifests.

    report --manifest <path>... --figures tails,collapse --out <dir>

Rendering never mutates inputs, verifies every manifest digest first, and is
byte-deterministic for a fixed input set.  Exit codes: 0 ok, 2 bad arguments,
5 integrity error, 6 schema error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .figures import FIGURE_KINDS, RENDERERS
from .reader import IntegrityError, Manifest, SchemaError
from .tables import write_summary_table


def render(manifest_paths, figure_kinds, out_dir, fmt="svg"):
    manifests = [Manifest(p) for p in manifest_paths]
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for kind in figure_kinds:
        written.extend(RENDERERS[kind](manifests, out_dir, fmt))
    written.append(write_summary_table(manifests, out_dir))
    return written


def main(argv=None):
    parser = argparse.ArgumentParser(prog="percolab-report")
    parser.add_argument("--manifest", action="append", required=True,
                        metavar="PATH", help="run_manifest.json (repeatable)")
    parser.add_argument("--figures", default="tails",
                        help=f"comma list from {','.join(FIGURE_KINDS)}")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--format", default="svg", choices=("svg", "png"))
    args = parser.parse_args(argv)
    kinds = [k.strip() for k in args.figures.split(",") if k.strip()]
    for kind in kinds:
        if kind not in FIGURE_KINDS:
            print(f"unknown figure kind {kind!r}", file=sys.stderr)
            return 2
    try:
        written = render(args.manifest, kinds, args.out, args.format)
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 5
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 6
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
