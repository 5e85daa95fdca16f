"""Manifest-driven input: digest verification and CSV table loading.

The report package consumes percolab runs only through their on-disk
interface: a `run_manifest.json` with per-file SHA-256 digests next to CSV
tables.  Every referenced file is re-hashed before use.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os


class IntegrityError(ValueError):
    """A manifest digest does not match the file on disk."""


class SchemaError(ValueError):
    """A CSV table lacks a required column."""


class Manifest:
    def __init__(self, path):
        self.path = os.path.abspath(path)
        self.base = os.path.dirname(self.path)
        with open(self.path, "rb") as fh:
            self.doc = json.load(fh)
        self._verify()

    def _verify(self):
        for entry in self.doc.get("outputs", []):
            fpath = os.path.join(self.base, entry["path"])
            if not os.path.exists(fpath):
                raise IntegrityError(f"missing output {entry['path']}")
            with open(fpath, "rb") as fh:
                digest = hashlib.sha256(fh.read()).hexdigest()
            if digest != entry["sha256"]:
                raise IntegrityError(f"digest mismatch for {entry['path']}")

    @property
    def experiment(self):
        return self.doc.get("config", {}).get("experiment", "")

    def tables(self):
        return [e["path"] for e in self.doc.get("outputs", [])]

    def has_table(self, name):
        return name in self.tables()

    def load(self, name, required=()):
        """Rows of a CSV table as dicts of strings (never parsed numbers are
        recomputed; parsing happens at point of use)."""
        if not self.has_table(name):
            raise SchemaError(f"{self.path}: no table {name!r}")
        fpath = os.path.join(self.base, name)
        with open(fpath, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            rows = list(reader)
            header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{name}: missing column {col!r}")
        return rows
