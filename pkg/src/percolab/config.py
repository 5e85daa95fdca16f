"""Experiment configuration: line-oriented `key = value` text, UTF-8, `#` comments.

Every run is fully determined by its config; in particular a seed is required
(no implicit entropy) and all list-valued keys keep their file order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EXPERIMENTS = ("tail", "zeta", "moments", "exponents", "skinny", "genfn",
               "russo-check", "oracle-compare", "diagnostics", "collapse",
               "pc-scan")

STATISTICS = ("volume", "touched_edges", "intrinsic_radius", "extrinsic_radius")


class ConfigError(ValueError):
    """Invalid configuration; message is anchored to file:line when parsed."""


@dataclass
class ExperimentConfig:
    experiment: str
    model: str
    seed: int
    out: str = "results"
    workers: int = 1
    replicates: int = 10 ** 4
    p_values: list = field(default_factory=list)
    epsilons: list = field(default_factory=list)
    side: str = "super"
    p_c: float | None = None
    statistics: list = field(default_factory=lambda: ["volume"])
    thresholds: list | None = None
    budget_edges: int | None = None
    budget_radius: int | None = None
    extras: dict = field(default_factory=dict)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.seed is None:
            raise ConfigError("seed is required (no implicit entropy)")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed {self.seed} outside u64 range")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"p={p} outside [0, 1]")
        for e in self.epsilons:
            if not 0.0 < e < 1.0:
                raise ConfigError(f"epsilon={e} outside (0, 1)")
        for s in self.statistics:
            if s not in STATISTICS:
                raise ConfigError(f"unknown statistic {s!r}")
        if self.side not in ("sub", "super"):
            raise ConfigError(f"side must be sub or super, got {self.side!r}")
        return self

    def echo(self):
        d = dict(experiment=self.experiment, model=self.model, seed=self.seed,
                 out=self.out, workers=self.workers, replicates=self.replicates,
                 p=self.p_values, epsilon=self.epsilons, side=self.side,
                 p_c=self.p_c, statistic=self.statistics,
                 thresholds=self.thresholds, budget_edges=self.budget_edges,
                 budget_radius=self.budget_radius)
        d.update(self.extras)
        return {k: v for k, v in d.items() if v not in (None, [], ())}


def parse_thresholds(text):
    """Threshold grammar: `1,2,5`, `lo:hi[:step]`, or `geom:lo:hi:count`."""
    text = text.strip()
    if text.startswith("geom:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"geom thresholds need geom:lo:hi:count, got {text!r}")
        lo, hi, count = int(parts[1]), int(parts[2]), int(parts[3])
        if not (1 <= lo < hi and count >= 2):
            raise ConfigError(f"bad geom threshold range {text!r}")
        grid = np.unique(np.rint(np.geomspace(lo, hi, count)).astype(int))
        return [int(x) for x in grid]
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"range thresholds need lo:hi[:step], got {text!r}")
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        if step < 1 or hi < lo:
            raise ConfigError(f"bad threshold range {text!r}")
        return list(range(lo, hi + 1, step))
    return [int(x) for x in text.split(",")]


def _to_int(text):
    """Integer parsing that accepts scientific notation like 1e6."""
    text = str(text).strip()
    try:
        return int(text)
    except ValueError:
        value = float(text)
        if not value.is_integer():
            raise ValueError(f"expected an integer, got {text!r}")
        return int(value)


def _parse_scalar(text):
    text = text.strip()
    low = text.lower()
    if low in ("none", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def _parse_list(text, kind=float):
    return [kind(x) for x in text.split(",") if x.strip() != ""]


_INT_KEYS = {"seed", "workers", "replicates", "budget_edges", "budget_radius",
             "k_max", "n_trunc", "genfn_k", "edges", "trials", "r",
             "tuples_per_sample", "grid_points", "max_threshold_volume",
             "max_threshold_radius"}
_FLOAT_LIST_KEYS = {"p", "epsilon", "alpha", "s_grid", "t_grid", "p_grid"}
_INT_LIST_KEYS = {"radii", "r_grid"}
_STR_LIST_KEYS = {"statistic"}


def config_from_pairs(pairs, origin="<args>"):
    """Build a validated ExperimentConfig from (key, value, line) triples."""
    seen = {}
    for key, value, line in pairs:
        if key in seen:
            raise ConfigError(f"{origin}:{line}: duplicate key {key!r}")
        seen[key] = (value, line)

    def take(key, default=None):
        if key in seen:
            value, line = seen.pop(key)
            return value, line
        return default, None

    def anchored(key, line, msg):
        return ConfigError(f"{origin}:{line}: {key}: {msg}")

    try:
        experiment, _ = take("experiment")
        if experiment is None:
            raise ConfigError(f"{origin}: missing required key 'experiment'")
        model, _ = take("model")
        if model is None:
            raise ConfigError(f"{origin}: missing required key 'model'")
        seed, seed_line = take("seed")
        if seed is None:
            raise ConfigError(f"{origin}: missing required key 'seed' "
                              "(no implicit entropy)")
        try:
            seed = _to_int(seed)
        except (TypeError, ValueError) as exc:
            raise anchored("seed", seed_line, str(exc)) from None
        cfg = ExperimentConfig(str(experiment).strip(), str(model).strip(),
                               seed)
        for key in list(seen):
            value, line = seen[key]
            try:
                if key == "thresholds":
                    cfg.thresholds = parse_thresholds(value)
                elif key == "p":
                    cfg.p_values = _parse_list(value)
                elif key == "epsilon":
                    cfg.epsilons = _parse_list(value)
                elif key == "statistic":
                    cfg.statistics = [s.strip() for s in value.split(",")]
                elif key == "side":
                    cfg.side = value.strip()
                elif key == "p_c":
                    cfg.p_c = float(value)
                elif key == "out":
                    cfg.out = value.strip()
                elif key in ("workers", "replicates", "budget_edges",
                             "budget_radius"):
                    setattr(cfg, key, None if str(value).strip().lower() == "none"
                            else _to_int(value))
                elif key in _INT_KEYS:
                    cfg.extras[key] = _to_int(value)
                elif key in _FLOAT_LIST_KEYS:
                    cfg.extras[key] = _parse_list(value)
                elif key in _INT_LIST_KEYS:
                    cfg.extras[key] = _parse_list(value, int)
                elif key in _STR_LIST_KEYS:
                    cfg.extras[key] = [s.strip() for s in value.split(",")]
                else:
                    cfg.extras[key] = _parse_scalar(value)
            except ConfigError:
                raise
            except (TypeError, ValueError) as exc:
                raise anchored(key, line, str(exc)) from None
            del seen[key]
        if cfg.workers is None or cfg.replicates is None:
            raise ConfigError(f"{origin}: workers/replicates cannot be none")
        return cfg.validate()
    except ConfigError as exc:
        if str(exc).startswith(origin):
            raise
        # anchor errors from validate() to the file as a whole
        raise ConfigError(f"{origin}: {exc}") from None


def load_config(path):
    """Parse a `key = value` config file into a validated ExperimentConfig."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            body = raw.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', "
                                  f"got {raw.rstrip()!r}")
            key, _, value = body.partition("=")
            pairs.append((key.strip(), value.strip(), lineno))
    return config_from_pairs(pairs, origin=str(path))
