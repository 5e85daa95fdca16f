"""Result output: atomically written CSV tables plus a digest manifest.

CSV conventions (pinned; the report package consumes them verbatim):
RFC-4180 quoting, LF line endings, header row, probabilities and other floats
printed with 12 significant digits.  The manifest is JSON with sorted keys so
its digests are stable, and records the config echo, per-file SHA-256 digests,
and any oracle-comparison verdicts.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

ARTIFACT_VERSION = "0.1.0"

TAIL_SCHEMA = ("statistic", "p", "threshold", "estimate", "ci_low", "ci_high",
               "replicates", "budget")


def fmt(value):
    """Canonical cell formatting: floats at 12 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_atomic(path, data):
    """Write bytes to path via a temp file + rename in the same directory."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_bytes(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue().encode("utf-8")


def sha256_hex(data):
    return hashlib.sha256(data).hexdigest()


class ResultWriter:
    """Collects output tables for one run and writes them plus the manifest."""

    def __init__(self, out_dir, config_echo):
        self.out_dir = out_dir
        self.config_echo = config_echo
        self.outputs = []
        self.verdicts = {}

    def add_table(self, name, header, rows):
        data = csv_bytes(header, rows)
        path = os.path.join(self.out_dir, name)
        write_atomic(path, data)
        self.outputs.append({"path": name, "sha256": sha256_hex(data),
                             "bytes": len(data)})

    def add_verdict(self, key, value):
        self.verdicts[key] = value

    def write_manifest(self, wall_clock_seconds):
        doc = {
            "artifact_version": ARTIFACT_VERSION,
            "config": self.config_echo,
            "outputs": sorted(self.outputs, key=lambda o: o["path"]),
            "verdicts": self.verdicts,
            "wall_clock_seconds": round(wall_clock_seconds, 3),
        }
        data = (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")
        path = os.path.join(self.out_dir, "run_manifest.json")
        write_atomic(path, data)
        return path


def load_manifest(path):
    with open(path, "rb") as fh:
        return json.load(fh)


def verify_manifest(path):
    """Check every listed output digest; returns the manifest dict.

    Raises ValueError on the first mismatch or missing file.
    """
    doc = load_manifest(path)
    base = os.path.dirname(os.path.abspath(path))
    for entry in doc.get("outputs", []):
        fpath = os.path.join(base, entry["path"])
        if not os.path.exists(fpath):
            raise ValueError(f"manifest output missing: {entry['path']}")
        with open(fpath, "rb") as fh:
            digest = sha256_hex(fh.read())
        if digest != entry["sha256"]:
            raise ValueError(f"digest mismatch for {entry['path']}")
    return doc
