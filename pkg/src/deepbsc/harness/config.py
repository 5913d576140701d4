"""Experiment configuration: schema validation, defaults and seed streams."""
from __future__ import annotations

import copy
import hashlib
import json
from importlib import resources
from pathlib import Path

import jsonschema

from ..errors import ConfigError

# Defaults follow the published system settings where they exist; the rest are
# desk-scale choices (small grid, short horizon) documented in the README.
DEFAULTS = {
    "schema_version": 1,
    "seed": 0,
    "data": {
        "source": "synthetic",
        "synthetic": {
            "grid_shape": [10, 10],
            "days": 30,
            "n_pairs": 6,
            "base": 40.0,
            "amplitude": 30.0,
            "noise_std": 4.0,
            "day_scale_std": 0.1,
        },
    },
    "split": {"train_days": 24, "eval_days": 6},
    "topology": {
        "bs_shape": [10, 10],
        "radius": 1.5,
        "capacity_rule": "peak",
        "capacity": None,
        "headroom": 1.5,
        "floor": 1.0,
    },
    "costs": {
        "fixed_power": 160.0,
        "load_power": 216.0,
        "sleep_power": 0.0,
        "beta_d": 50.0,
        "beta_s": 100.0,
        "delay_coeff": 0.01,
        "overflow_penalty": None,
        "util_cap": 0.95,
    },
    "forecast": {
        "predictor": "gsstn",
        "K": 12,
        "hidden": 48,
        "filters": 10,
        "epochs": 20,
        "batch_size": 32,
        "lr": 2e-3,
        "graph_mode": "window",
        "val_days": 1,
    },
    "agent": {
        "variant": "ddpg_bt_en",
        "episodes": 100,
        "gamma": 0.9,
        "tau": 1e-3,
        "lr_actor": 1e-4,
        "lr_critic": 1e-4,
        "batch_size": 64,
        "replay_capacity": 100000,
        "actor_hidden": [800, 600],
        "critic_hidden": [800, 600],
        "final_init": 3e-3,
        "bn_momentum": 0.99,
        "explorer_alpha": 0.05,
        "sigma0": 0.1,
        "sigma_decay": 0.995,
        "merge_mode": "delta",
        "ou_theta": 0.15,
        "ou_mu": 0.0,
        "ou_sigma": 0.2,
        "ou_sigma_final": 0.02,
        "cost_scale": None,
        "updates_per_step": 1,
        "final_window": 10,
    },
    "baselines": {
        "p_sleep_grid": [0.0, 0.05, 0.1, 0.2, 0.3, 0.5],
        "ttp_sleep_grid": [0.1, 0.2, 0.3, 0.4],
        "ttp_active_grid": [0.5, 0.6, 0.7, 0.8],
        "benchmark_policy": "goff",
        "base_dnn_hidden": [256, 128],
        "base_dnn_epochs": 100,
        "base_dnn_lr": 1e-3,
        "compare_methods": ["all_active", "to", "goff", "ttp", "ddpg_bt_en"],
    },
    "output": {"dir": "out"},
}


def schema():
    text = resources.files("deepbsc.harness").joinpath("schema.json").read_text()
    return json.loads(text)


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, value in over.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _describe(error):
    where = "/".join(str(p) for p in error.absolute_path)
    if error.validator == "additionalProperties":
        allowed = set(error.schema.get("properties", {}))
        extra = sorted(set(error.instance) - allowed)
        key = ".".join([*(str(p) for p in error.absolute_path), extra[0]]) if extra else where
        return f"unknown config key '{key}'"
    return f"invalid value at '{where or '<root>'}': {error.message}"


def validate(raw):
    """Check a raw config mapping against the schema; raise ConfigError naming the culprit."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        raise ConfigError(_describe(errors[0]))
    src = raw.get("data", {}).get("source", "synthetic")
    if src == "cdr" and "cdr" not in raw.get("data", {}):
        raise ConfigError("data.source is 'cdr' but data.cdr is missing")
    return raw


def load_config(path=None, overrides=None):
    """Read, validate and complete a config. ``path=None`` yields the defaults."""
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
    validate(raw)
    cfg = _merge(DEFAULTS, raw)
    if overrides:
        cfg = _merge(cfg, overrides)
        validate(cfg)
    return cfg


def canonical(cfg):
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def config_hash(cfg):
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()


def stream_seed(master, name):
    """Independent 64-bit seed for component ``name`` under ``master``."""
    digest = hashlib.sha256(f"{int(master)}/{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")
