"""Experiment configuration: parsing, defaults and a stable content hash."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .distributions import Transform, ValuationDistribution
from .errors import ConfigError
from .theory import C1_DEFAULT, C2_DEFAULT, RateSchedule

KINDS = ("welfare-convergence", "budget-growth", "revenue-ceiling", "impossibility", "ex-post",
         "incentives", "profit", "theory-only")
SCHEMES = ("pivotal", "double-dagger", "dagger")

DEFAULTS: dict[str, Any] = {
    "distributions": [{"family": "uniform", "lo": 0.0, "hi": 1.0}],
    "transform": "identity",
    "schedule": {"kappa_alpha": 1.0, "beta": 0.25, "kappa_c": 2.0, "gamma": 0.4},
    "n_grid": [1000, 4000, 16000],
    "replications": 10000,
    "seed": 20240601,
    "constants": {"C1": C1_DEFAULT, "C2": C2_DEFAULT},
    "output": "out",
    "delta": 0.5,
    "scheme": "double-dagger",
    "value_levels": [1 / 6, 2 / 6, 3 / 6, 4 / 6, 5 / 6],
    "report_levels": [k / 20 for k in range(21)],
    "curve_points": 33,
    "probe_agent": 0,
}

# schedules and grids that suit each kind unless the config says otherwise
KIND_DEFAULTS: dict[str, dict] = {
    "revenue-ceiling": {"schedule": {"kappa_c": 1.0, "gamma": 0.7}, "n_grid": [100, 1000, 10000]},
    "impossibility": {"schedule": {"kappa_c": 0.4, "gamma": 1.0}, "n_grid": [1000, 4000]},
    "ex-post": {"n_grid": [400, 1600]},
    "incentives": {"n_grid": [1000, 4000]},
    "profit": {"distributions": [{"family": "weibull", "shape": 0.7, "scale": 1.0}],
               "schedule": {"kappa_c": 1.0, "gamma": 0.3}, "n_grid": [10000]},
}

_PARAM_NAMES = {
    "uniform": ("lo", "hi"),
    "exponential": ("rate",),
    "weibull": ("shape", "scale"),
    "exp-mixture": ("weight", "rate1", "rate2"),
}
_PARAM_DEFAULTS = {"lo": 0.0, "hi": 1.0, "rate": 1.0, "scale": 1.0}


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_distribution(entry: dict, root: Path | None = None) -> ValuationDistribution:
    if not isinstance(entry, dict) or "family" not in entry:
        raise ConfigError(f"distribution entry needs a 'family': {entry!r}")
    fam = entry["family"]
    if fam == "tabulated":
        if "csv" in entry:
            path = Path(entry["csv"])
            if root is not None and not path.is_absolute():
                path = root / path
            d = ValuationDistribution.from_csv(path)
        elif "v" in entry and "F" in entry:
            d = ValuationDistribution.tabulated(entry["v"], entry["F"])
        else:
            raise ConfigError("tabulated laws need 'csv' or 'v' and 'F'")
    elif fam in _PARAM_NAMES:
        names = _PARAM_NAMES[fam]
        try:
            params = tuple(float(entry.get(k, _PARAM_DEFAULTS.get(k))) for k in names)
        except TypeError:
            raise ConfigError(f"{fam} needs parameters {names}") from None
        d = ValuationDistribution(fam, params)
    else:
        raise ConfigError(f"unknown distribution family {fam!r}")
    if entry.get("cap") is not None:
        d = d.truncated(float(entry["cap"]))
    return d


def parse_transform(entry) -> Transform:
    if isinstance(entry, str):
        entry = {"kind": entry}
    kind = entry.get("kind")
    if kind == "identity":
        return Transform.identity()
    if kind in ("virtual-valuation", "virtual"):
        return Transform.virtual()
    if kind == "power":
        return Transform.power(float(entry.get("exponent", 1.0)))
    if kind == "affine":
        return Transform.affine(float(entry.get("intercept", 0.0)), float(entry.get("slope", 1.0)))
    raise ConfigError(f"unknown transform {entry!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    raw: dict
    dists: tuple[ValuationDistribution, ...]
    transform: Transform
    adjustment: RateSchedule
    cost: RateSchedule
    n_grid: tuple[int, ...]
    replications: int
    seed: int
    C1: float
    C2: float
    output: Path

    def agents(self, n: int) -> tuple[ValuationDistribution, ...]:
        """Agent j draws from ``dists[j % len(dists)]``."""
        k = len(self.dists)
        return tuple(self.dists[j % k] for j in range(n))

    @property
    def digest(self) -> str:
        return config_hash(self.raw)

    def get(self, key: str):
        return self.raw[key]


def config_hash(raw: dict) -> str:
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def resolve(user: dict, *, kind: str | None = None, seed: int | None = None,
            output: str | None = None, root: Path | None = None) -> ExperimentConfig:
    """Fill defaults, apply command-line overrides and validate."""
    if not isinstance(user, dict):
        raise ConfigError("config must be a JSON object")
    if kind is not None and "kind" in user and user["kind"] != kind:
        raise ConfigError(f"config kind {user['kind']!r} does not match subcommand ({kind})")
    chosen = user.get("kind", kind)
    user = dict(user)
    if "distribution" in user:
        user["distributions"] = [user.pop("distribution")]
    raw = _merge(_merge(DEFAULTS, KIND_DEFAULTS.get(chosen, {})), user)
    raw["kind"] = chosen
    if seed is not None:
        raw["seed"] = int(seed)
    if output is not None:
        raw["output"] = str(output)
    if raw.get("kind") not in KINDS:
        raise ConfigError(f"experiment kind must be one of {KINDS}")
    unknown = set(raw) - set(DEFAULTS) - {"kind"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    dists = raw["distributions"]
    if isinstance(dists, dict):
        dists = [dists]
        raw["distributions"] = dists
    if not dists:
        raise ConfigError("need at least one distribution")
    parsed = tuple(parse_distribution(d, root) for d in dists)
    h = parse_transform(raw["transform"])

    sch = raw["schedule"]
    try:
        adjustment = RateSchedule.adjustment(float(sch["kappa_alpha"]), float(sch["beta"]))
        cost = RateSchedule.cost(float(sch["kappa_c"]), float(sch["gamma"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}") from None
    if raw["kind"] in ("welfare-convergence", "budget-growth", "ex-post", "incentives") and not (
        0.0 < adjustment.exponent < 0.5
    ):
        raise ConfigError("beta must lie in (0, 1/2) for this experiment")

    grid = [int(n) for n in raw["n_grid"]]
    if not grid or any(n < 2 for n in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("n_grid must be strictly ascending integers >= 2")
    R = int(raw["replications"])
    if R < 100:
        raise ConfigError("replications must be at least 100")
    s = int(raw["seed"])
    if not 0 <= s < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    C1, C2 = float(raw["constants"]["C1"]), float(raw["constants"]["C2"])
    if not (C1 > 0.0 and C2 > 0.0 and math.isfinite(C1) and math.isfinite(C2)):
        raise ConfigError("constants must be positive")
    if raw["scheme"] not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    if not 0.0 < float(raw["delta"]) < 1.0:
        raise ConfigError("delta must lie in (0, 1)")
    return ExperimentConfig(raw["kind"], raw, parsed, h, adjustment, cost, tuple(grid), R, s,
                            C1, C2, Path(raw["output"]))


def load(path: str | Path, **overrides) -> ExperimentConfig:
    path = Path(path)
    try:
        user = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return resolve(user, root=path.parent, **overrides)
