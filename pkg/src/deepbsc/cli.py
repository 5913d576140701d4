"""``deepbsc`` command line: forecasting, simulation, agent training and sweeps."""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .agent import DdpgAgent, agent_policy, evaluate
from .errors import ArgumentError, ConfigError, DeepBscError
from .forecast import load_model, save_model
from .harness import config as cfgmod
from .harness import pipeline as pl
from .harness.report import SLOT_HEADER, dumps, emit_report, slot_rows

COMMANDS = ("forecast-train", "forecast-eval", "sim-run", "agent-train", "agent-eval", "compare", "sweep-switching")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def threads():
    raw = os.environ.get("DEEPBSC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"DEEPBSC_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"DEEPBSC_THREADS must be a positive integer, got {raw!r}")
    return n


def parse_ratios(text):
    try:
        ratios = [float(r) for r in text.split(",") if r.strip()]
    except ValueError:
        raise ConfigError(f"--ratios must be a comma-separated list of numbers, got {text!r}") from None
    if not ratios or min(ratios) <= 0:
        raise ConfigError("--ratios needs at least one positive ratio")
    return ratios


def method_entry(name, ev, settings=None, **extra):
    entry = {"name": name, **ev.summary(), **extra}
    if settings:
        entry["settings"] = settings
    return entry


def rank(methods):
    order = sorted(range(len(methods)), key=lambda i: (methods[i]["normalized_cost"], methods[i]["name"]))
    for r, i in enumerate(order, 1):
        methods[i]["rank"] = r
    return [methods[i] for i in order]


def header(cfg, command, seed):
    return {
        "command": command,
        "config_hash": cfgmod.config_hash(cfg),
        "seed": seed,
        "threads": threads(),
    }


def forecast_block(run):
    block = run.report.summary()
    block["train_loss"] = run.loss
    block["val_loss"] = run.val_loss
    return block


def forecast_trace(report, grid_shape):
    X, Y = grid_shape
    rows = []
    for i, t in enumerate(report.slots):
        for gx in range(X):
            for gy in range(Y):
                rows.append((int(t), gx, gy, float(report.pred[i, gx, gy]), float(report.truth[i, gx, gy])))
    return ["slot", "gx", "gy", "pred", "truth"], rows


# ---------------------------------------------------------------- subcommands


def cmd_forecast_train(cfg, seed, args, out):
    method = args.method or ("geo" if cfg["forecast"]["predictor"] == "geo" else "gsstn")
    if method not in ("gsstn", "geo"):
        raise ArgumentError(f"forecast-train trains 'gsstn' or 'geo', not {method!r}")
    series = pl.build_series(cfg, seed)
    train_T, eval_slots = pl.split_slots(cfg, series)
    run = pl.train_forecaster(cfg, series, train_T, eval_slots, seed, semantic=method == "gsstn")
    save_model(run.model, out / "model.dbsc")
    loss_rows = [(e, l, run.val_loss[e] if e < len(run.val_loss) else "") for e, l in enumerate(run.loss)]
    results = {**header(cfg, "forecast-train", seed), "forecast": {"method": method, **forecast_block(run)}}
    traces = {"forecast": forecast_trace(run.report, series.grid_shape), "loss": (["epoch", "loss", "val_loss"], loss_rows)}
    return results, traces


def cmd_forecast_eval(cfg, seed, args, out):
    method = args.method or "gsstn"
    series = pl.build_series(cfg, seed)
    train_T, eval_slots = pl.split_slots(cfg, series)
    if method in ("gsstn", "geo"):
        path = out / "model.dbsc"
        if not path.exists():
            raise ArgumentError(f"no trained forecaster at {path}; run forecast-train first")
        report = pl.reuse_forecaster(load_model(path), cfg, series, train_T, eval_slots).report
    elif method in ("persistence", "mean"):
        from .forecast import ForecastReport

        pred = pl.reference_forecast(method, series, train_T, eval_slots)
        report = ForecastReport(eval_slots, pred, series.values[eval_slots])
    else:
        raise ArgumentError(f"unknown forecasting method {method!r}")
    results = {**header(cfg, "forecast-eval", seed), "forecast": {"method": method, **report.summary()}}
    return results, {"forecast": forecast_trace(report, series.grid_shape)}


def cmd_sim_run(cfg, seed, args, out):
    method = args.method or "goff"
    if method not in pl.BASELINES:
        raise ArgumentError(f"sim-run runs one of {', '.join(pl.BASELINES)}; got {method!r}")
    sc = pl.build_scenario(cfg, seed)
    ev, settings = pl.run_baseline(sc, method)
    results = {**header(cfg, "sim-run", seed), "methods": rank([method_entry(method, ev, settings)])}
    if sc.forecast is not None:
        results["forecast"] = sc.forecast.report.summary()
    return results, {method: (SLOT_HEADER, slot_rows(sc.eval_slots, ev.costs))}


def _agent_extra(run):
    return dict(final_window_median=run.final_median, episodes=len(run.result.eval_costs),
                explorer_wins=run.result.explorer_wins, eval_curve=run.result.eval_costs)


def cmd_agent_train(cfg, seed, args, out):
    variant = args.method or cfg["agent"]["variant"]
    sc = pl.build_scenario(cfg, seed)
    base = None
    if pl.VARIANTS.get(variant, {}).get("benchmark"):
        base, _ = pl.benchmark_model(sc)
        base.save(out / "base_dnn.dbsc")
    run = pl.run_agent(sc, variant, base)
    run.result.agent.save(out / "agent.dbsc")
    trace = [(e, s, c, g, n, int(x)) for e, s, c, g, n, x in run.result.trace]
    results = {
        **header(cfg, "agent-train", seed),
        "methods": rank([method_entry(variant, run.evaluation, **_agent_extra(run))]),
        "hyperparams": pl.hyperparams(cfg, variant).as_dict(),
    }
    traces = {
        "train": (["episode", "slot", "cost", "gap", "active_count", "explorer_chosen"], trace),
        "eval_curve": (["episode", "normalized_cost"], list(enumerate(run.result.eval_costs))),
        variant: (SLOT_HEADER, slot_rows(sc.eval_slots, run.evaluation.costs)),
    }
    return results, traces


def cmd_agent_eval(cfg, seed, args, out):
    variant = args.method or cfg["agent"]["variant"]
    path = out / "agent.dbsc"
    if not path.exists():
        raise ArgumentError(f"no trained agent at {path}; run agent-train first")
    sc = pl.build_scenario(cfg, seed)
    hyper = pl.hyperparams(cfg, variant)
    agent = DdpgAgent(sc.task.state_dim, sc.task.n_bs, hyper, np.random.default_rng(0)).load(path)
    ev = evaluate(sc.task, agent_policy(agent, sc.task), sc.eval_slots)
    results = {**header(cfg, "agent-eval", seed), "methods": rank([method_entry(variant, ev)])}
    return results, {variant: (SLOT_HEADER, slot_rows(sc.eval_slots, ev.costs))}


def compare_methods(sc, methods):
    """Evaluate every method on the same realised series; returns ``(entries, traces)``."""
    entries, traces, base = [], {}, None
    for name in methods:
        if name in pl.BASELINES:
            ev, settings = pl.run_baseline(sc, name)
            entries.append(method_entry(name, ev, settings))
        elif name in pl.VARIANTS:
            if pl.VARIANTS[name]["benchmark"] and base is None:
                base, _ = pl.benchmark_model(sc)
            run = pl.run_agent(sc, name, base)
            ev = run.evaluation
            entries.append(method_entry(name, ev, **_agent_extra(run)))
        else:
            raise ArgumentError(f"unknown method {name!r}; choose from {', '.join(pl.METHODS)}")
        traces[name] = (SLOT_HEADER, slot_rows(sc.eval_slots, ev.costs))
    return rank(entries), traces


def cmd_compare(cfg, seed, args, out):
    methods = args.method.split(",") if args.method else cfg["baselines"]["compare_methods"]
    sc = pl.build_scenario(cfg, seed)
    entries, traces = compare_methods(sc, methods)
    results = {**header(cfg, "compare", seed), "methods": entries}
    if sc.forecast is not None:
        results["forecast"] = sc.forecast.report.summary()
    return results, traces


def five_numbers(values):
    q = np.percentile(np.asarray(values, dtype=float), [0, 25, 50, 75, 100])
    return dict(zip(("min", "q1", "median", "q3", "max"), (float(v) for v in q)))


def sweep_cell(sc, ratio, variant, base=None):
    """Train and evaluate one agent with the switching cost scaled by ``ratio``.

    ``base`` reuses a benchmark model fitted under the same scaled costs.
    """
    sc = sc.with_params(sc.task.params.scaled_switching(ratio))
    run = pl.run_agent(sc, variant, base)
    counts = run.evaluation.active_counts
    return {
        "seed": sc.seed,
        "ratio": ratio,
        "active": {**five_numbers(counts), "mean": float(counts.mean()), "variance": float(counts.var())},
        "toggles_per_slot": run.evaluation.toggles_per_slot,
        "normalized_cost": run.evaluation.normalized,
        "final_window_median": run.final_median,
    }


def non_increasing(values, tol=0.0):
    return all(b <= a + tol for a, b in zip(values, values[1:]))


def sweep_summary(cells, ratios):
    seeds = sorted({c["seed"] for c in cells})
    by = {(c["seed"], c["ratio"]): c for c in cells}
    per_seed = []
    for s in seeds:
        toggles = [by[s, r]["toggles_per_slot"] for r in ratios]
        variances = [by[s, r]["active"]["variance"] for r in ratios]
        per_seed.append({"seed": s, "toggles_non_increasing": non_increasing(toggles),
                         "active_variance_non_increasing": non_increasing(variances)})
    per_ratio = []
    for r in ratios:
        rows = [by[s, r] for s in seeds]
        per_ratio.append({
            "ratio": r,
            "toggles_per_slot": float(np.mean([c["toggles_per_slot"] for c in rows])),
            "active_mean": float(np.mean([c["active"]["mean"] for c in rows])),
            "active_variance": float(np.mean([c["active"]["variance"] for c in rows])),
            "normalized_cost": float(np.mean([c["normalized_cost"] for c in rows])),
        })
    return per_ratio, per_seed


def cmd_sweep(cfg, seed, args, out):
    ratios = parse_ratios(args.ratios or "0.1,1,10")
    variant = args.method or cfg["agent"]["variant"]
    if variant not in pl.VARIANTS:
        raise ArgumentError(f"sweep-switching trains an agent variant, not {variant!r}")
    seeds = [seed] if args.seed is not None or "seeds" not in cfg else cfg["seeds"]
    scenarios = {s: pl.build_scenario(cfg, s) for s in seeds}
    jobs = [(scenarios[s], r, variant) for s in seeds for r in ratios]
    n = min(threads(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            cells = list(pool.map(sweep_cell, *zip(*jobs)))
    else:
        cells = [sweep_cell(*j) for j in jobs]
    per_ratio, per_seed = sweep_summary(cells, ratios)
    results = {
        **header(cfg, "sweep-switching", seed),
        "variant": variant,
        "ratios": ratios,
        "cells": cells,
        "per_ratio": per_ratio,
        "per_seed": per_seed,
        "toggles_non_increasing": non_increasing([r["toggles_per_slot"] for r in per_ratio]),
        "active_variance_non_increasing": non_increasing([r["active_variance"] for r in per_ratio]),
    }
    rows = [(c["seed"], c["ratio"], c["active"]["min"], c["active"]["q1"], c["active"]["median"], c["active"]["q3"],
             c["active"]["max"], c["active"]["mean"], c["active"]["variance"], c["toggles_per_slot"],
             c["normalized_cost"]) for c in cells]
    head = ["seed", "ratio", "active_min", "active_q1", "active_median", "active_q3", "active_max", "active_mean",
            "active_variance", "toggles_per_slot", "normalized_cost"]
    return results, {"sweep": (head, rows)}


HANDLERS = {
    "forecast-train": cmd_forecast_train,
    "forecast-eval": cmd_forecast_eval,
    "sim-run": cmd_sim_run,
    "agent-train": cmd_agent_train,
    "agent-eval": cmd_agent_eval,
    "compare": cmd_compare,
    "sweep-switching": cmd_sweep,
}


def build_parser():
    parser = _Parser(prog="deepbsc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--out", type=Path, help="output directory (overrides the config)")
        p.add_argument("--method", help="method or variant name; comma list for compare")
        if name == "sweep-switching":
            p.add_argument("--ratios", help="comma-separated switching-cost ratios")
    return parser


def run(argv=None):
    """Execute one subcommand; returns 0 on success, 1 on configuration errors, 2 on runtime errors."""
    try:
        args = build_parser().parse_args(argv)
        cfg = cfgmod.load_config(args.config)
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        if getattr(args, "ratios", None) is not None:
            parse_ratios(args.ratios)
        threads()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    seed = cfg["seed"] if args.seed is None else args.seed
    out = args.out or Path(cfg["output"]["dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        results, traces = HANDLERS[args.command](cfg, seed, args, out)
        emit_report(results, out, traces)
        timing = {"command": args.command, "runtime_seconds": time.perf_counter() - start}
        (out / "timing.json").write_text(dumps(timing))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DeepBscError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"report": str(out / "report.json")}))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
