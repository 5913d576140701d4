"""Experiment building blocks shared by the CLI subcommands and the acceptance suite."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..agent import AgentHyperparams, Evaluation, SleepTask, agent_policy, all_active, evaluate, train_agent
from ..baselines import (
    TtpThresholds,
    collect_benchmark_pairs,
    goff_policy,
    to_policy,
    train_base_dnn,
    ttp_policy,
)
from ..cellsim import CostParams, EnergyParams, NetworkTopology, build_topology, lattice_positions
from ..errors import ArgumentError
from ..forecast import GsStnModel, ForecastReport, prepare, statistical_mean_forecast, train
from ..forecast import evaluate as forecast_evaluate
from ..forecast import predict as forecast_predict
from ..traffic import (
    CdrSchema,
    MILAN_SCHEMA,
    TrafficSeries,
    aggregate,
    gen_synthetic,
    load_cdr,
    semantic_pair_config,
)
from .config import stream_seed

VARIANTS = {
    "ddpg": dict(benchmark=False, explorer=False),
    "ddpg_bt": dict(benchmark=True, explorer=False),
    "ddpg_en": dict(benchmark=False, explorer=True),
    "ddpg_bt_en": dict(benchmark=True, explorer=True),
}
BASELINES = ("all_active", "to", "goff", "ttp")
METHODS = BASELINES + tuple(VARIANTS)


def rng_for(seed, name):
    return np.random.default_rng(stream_seed(seed, name))


# ---------------------------------------------------------------- data


def build_series(cfg, seed):
    data = cfg["data"]
    if data["source"] == "cdr":
        c = data["cdr"]
        schema = MILAN_SCHEMA if c.get("layout", "simple") == "milan" else CdrSchema()
        records = load_cdr(c["path"], schema)
        return aggregate(
            records,
            micro_shape=tuple(c.get("micro_shape", (100, 100))),
            spatial_factor=c.get("spatial_factor", 10),
            temporal_factor=c.get("temporal_factor", 3),
        )
    s = data["synthetic"]
    conf = semantic_pair_config(
        seed=stream_seed(seed, "data") % 2**32,
        grid_shape=tuple(s["grid_shape"]),
        days=s["days"],
        n_pairs=s["n_pairs"],
        base=s["base"],
        amplitude=s["amplitude"],
        noise_std=s["noise_std"],
        day_scale_std=s["day_scale_std"],
    )
    return gen_synthetic(conf)


def split_slots(cfg, series):
    spd = series.slots_per_day
    train_days, eval_days = cfg["split"]["train_days"], cfg["split"]["eval_days"]
    if (train_days + eval_days) * spd > len(series):
        raise ArgumentError(
            f"{train_days}+{eval_days} days need {(train_days + eval_days) * spd} slots, series has {len(series)}"
        )
    train_T = train_days * spd
    return train_T, np.arange(train_T, train_T + eval_days * spd)


def cost_params(cfg):
    c = cfg["costs"]
    params = CostParams(
        beta_d=c["beta_d"],
        beta_s=c["beta_s"],
        delay_coeff=c["delay_coeff"],
        overflow_penalty=c["overflow_penalty"],
        util_cap=c["util_cap"],
    )
    energy = EnergyParams(fixed=c["fixed_power"], load=c["load_power"], sleep=c["sleep_power"])
    return params, energy


def make_topology(cfg, series, train_T):
    t = cfg["topology"]
    if "path" in t:
        return NetworkTopology.load(t["path"])
    grid = series.grid_shape
    positions = np.asarray(t["positions"], dtype=float) if "positions" in t else lattice_positions(grid, t["bs_shape"])
    return build_topology(
        positions,
        t["radius"],
        grid,
        capacity=t["capacity"],
        capacity_rule=t["capacity_rule"],
        demand=series.values[:train_T],
        headroom=t["headroom"],
        floor=t["floor"],
    )


# ---------------------------------------------------------------- forecasting


@dataclass
class ForecastRun:
    model: GsStnModel
    scaler: object
    loss: list
    val_loss: list
    report: ForecastReport  # on the evaluation days
    predicted: np.ndarray  # raw (T, N); the first K slots copy the actual traffic


def _validation_split(cfg, data, spd):
    n_val = cfg["forecast"]["val_days"] * spd
    if n_val <= 0 or n_val >= len(data.train_inputs):
        return data.train_inputs, data.train_targets, None
    cut = len(data.train_inputs) - n_val
    val = (data.train_inputs[cut:], data.train_targets[cut:])
    return data.train_inputs[:cut], data.train_targets[:cut], val


def train_forecaster(cfg, series, train_T, eval_slots, seed, semantic=True):
    f = cfg["forecast"]
    data = prepare(series, f["K"], train_T)
    inputs, targets, val = _validation_split(cfg, data, series.slots_per_day)
    model = GsStnModel.init(
        series.grid_shape, rng_for(seed, "forecast/init"), K=f["K"], hidden=f["hidden"],
        n_filters=f["filters"], semantic=semantic, graph_mode=f["graph_mode"],
    )
    if f["graph_mode"] == "fixed":
        model.fit_graph(data.scaler.transform(series.values[:train_T]))
    val_trace = []
    loss = train(
        model, inputs, targets, f["epochs"], batch_size=f["batch_size"], lr=f["lr"],
        seed=stream_seed(seed, "forecast/shuffle"), val=val, log=lambda e, l, v: val_trace.append(v),
    )
    return _finish_forecast(model, data, series, eval_slots, loss, [v for v in val_trace if v is not None])


def _finish_forecast(model, data, series, eval_slots, loss=(), val_loss=()):
    K = model.K
    norm = data.scaler.transform(series.values)
    windows = np.lib.stride_tricks.sliding_window_view(norm, K, axis=0)[:-1].transpose(0, 3, 1, 2)
    pred = data.scaler.inverse(forecast_predict(model, windows))
    flat = series.values.reshape(len(series), -1)
    predicted = flat.copy()
    predicted[K:] = pred
    report = ForecastReport(
        eval_slots,
        predicted[eval_slots].reshape(-1, *series.grid_shape),
        series.values[eval_slots],
    )
    return ForecastRun(model, data.scaler, list(loss), list(val_loss), report, predicted)


def reuse_forecaster(model, cfg, series, train_T, eval_slots):
    data = prepare(series, model.K, train_T)
    return _finish_forecast(model, data, series, eval_slots)


def reference_forecast(method, series, train_T, slots):
    """Persistence or same-slot historical mean for ``slots``; raw ``(len(slots), X, Y)``."""
    values = series.values
    if method == "persistence":
        return np.stack([values[max(t - 1, 0)] for t in slots])
    if method == "mean":
        train = TrafficSeries(values[:train_T], slot_minutes=series.slot_minutes)
        return np.stack([statistical_mean_forecast(train, int(t)).values for t in slots])
    raise ArgumentError(f"unknown reference forecast {method!r}")


# ---------------------------------------------------------------- scenario


@dataclass
class Scenario:
    cfg: dict
    seed: int
    series: TrafficSeries
    train_T: int
    eval_slots: np.ndarray
    topology: NetworkTopology
    task: SleepTask
    forecast: ForecastRun | None = None

    @property
    def train_days(self):
        return list(range(self.cfg["split"]["train_days"]))

    def with_params(self, params):
        return replace(self, task=replace(self.task, params=params))


def build_scenario(cfg, seed, forecaster=True):
    """Realised traffic, topology and the forecasts that sleep decisions see."""
    series = build_series(cfg, seed)
    train_T, eval_slots = split_slots(cfg, series)
    topology = make_topology(cfg, series, train_T)
    params, energy = cost_params(cfg)
    actual = series.values.reshape(len(series), -1)
    predictor = cfg["forecast"]["predictor"]
    run = None
    if predictor in ("gsstn", "geo") and forecaster:
        run = train_forecaster(cfg, series, train_T, eval_slots, seed, semantic=predictor == "gsstn")
        predicted = run.predicted
    elif predictor in ("persistence", "mean"):
        predicted = reference_forecast(predictor, series, train_T, range(len(series))).reshape(actual.shape)
    else:
        predicted = actual
    task = SleepTask(
        topology, actual, predicted, params, energy,
        traffic_scale=float(actual[:train_T].max()), slots_per_day=series.slots_per_day,
    )
    return Scenario(cfg, seed, series, train_T, eval_slots, topology, task, run)


# ---------------------------------------------------------------- baselines


def _tuning_slots(sc, days=2):
    spd = sc.series.slots_per_day
    start = max(0, sc.train_T - days * spd)
    return np.arange(start, sc.train_T)


def tune_to(sc):
    """Pick the sleep probability with the lowest cost on the last training days."""
    slots = _tuning_slots(sc)
    scores = []
    for p in sc.cfg["baselines"]["p_sleep_grid"]:
        rng = rng_for(sc.seed, "to/tune")
        scores.append(evaluate(sc.task, lambda f, prev: to_policy(p, sc.task.n_bs, rng), slots).normalized)
    best = int(np.argmin(scores))
    return sc.cfg["baselines"]["p_sleep_grid"][best], scores


def tune_ttp(sc):
    b = sc.cfg["baselines"]
    slots = _tuning_slots(sc)
    best, best_score, scores = None, np.inf, []
    for lo in b["ttp_sleep_grid"]:
        for hi in b["ttp_active_grid"]:
            if not lo < hi:
                continue
            th = TtpThresholds(lo, hi)
            score = evaluate(sc.task, lambda f, prev: ttp_policy(f, prev, sc.topology, th), slots).normalized
            scores.append([lo, hi, score])
            if score < best_score:
                best, best_score = th, score
    if best is None:
        raise ArgumentError("TTP grid has no pair with sleep threshold below active threshold")
    return best, scores


def goff(sc):
    return lambda f, prev: goff_policy(f, prev, sc.topology, sc.task.params, sc.task.energy)


def baseline_policy(sc, name):
    """``(policy, settings)`` for a classical method, tuned where it has knobs."""
    if name == "all_active":
        return all_active, {}
    if name == "goff":
        return goff(sc), {}
    if name == "to":
        p, scores = tune_to(sc)
        rng = rng_for(sc.seed, "to/eval")
        return (lambda f, prev: to_policy(p, sc.task.n_bs, rng)), {"p_sleep": p, "tuning": scores}
    if name == "ttp":
        th, scores = tune_ttp(sc)
        return (lambda f, prev: ttp_policy(f, prev, sc.topology, th)), {
            "sleep_threshold": th.sleep, "active_threshold": th.active, "tuning": scores,
        }
    raise ArgumentError(f"unknown baseline {name!r}")


def run_baseline(sc, name):
    policy, settings = baseline_policy(sc, name)
    return evaluate(sc.task, policy, sc.eval_slots), settings


# ---------------------------------------------------------------- agent


def hyperparams(cfg, variant=None):
    a = dict(cfg["agent"])
    variant = variant or a.pop("variant")
    a.pop("variant", None)
    for key in ("episodes", "final_window"):
        a.pop(key)
    if variant not in VARIANTS:
        raise ArgumentError(f"unknown agent variant {variant!r}")
    a["actor_hidden"] = tuple(a["actor_hidden"])
    a["critic_hidden"] = tuple(a["critic_hidden"])
    return AgentHyperparams(**a, **VARIANTS[variant])


def benchmark_model(sc):
    """BaseDNN fitted to the benchmark policy's realised costs on the training days."""
    b = sc.cfg["baselines"]
    if b["benchmark_policy"] == "goff":
        policy = goff(sc)
    else:
        th, _ = tune_ttp(sc)
        policy = lambda f, prev: ttp_policy(f, prev, sc.topology, th)  # noqa: E731
    T = sc.train_T
    data = collect_benchmark_pairs(
        policy, sc.topology, sc.task.actual[:T], sc.task.predicted[:T], sc.task.params, sc.task.energy,
    )
    model = train_base_dnn(
        data, epochs=b["base_dnn_epochs"], lr=b["base_dnn_lr"], seed=stream_seed(sc.seed, "benchmark"),
        hidden=tuple(b["base_dnn_hidden"]),
    )
    return model, data


@dataclass
class AgentRun:
    variant: str
    result: object  # TrainResult
    evaluation: Evaluation
    final_median: float


def run_agent(sc, variant=None, base=None, episodes=None):
    """Train one agent variant and evaluate its greedy policy on the evaluation days."""
    hyper = hyperparams(sc.cfg, variant)
    variant = variant or sc.cfg["agent"]["variant"]
    if hyper.benchmark and base is None:
        base, _ = benchmark_model(sc)
    episodes = sc.cfg["agent"]["episodes"] if episodes is None else episodes
    result = train_agent(
        sc.task, hyper, episodes, sc.train_days, sc.eval_slots, base if hyper.benchmark else None,
        seed=stream_seed(sc.seed, "agent"),
    )
    ev = evaluate(sc.task, agent_policy(result.agent, sc.task), sc.eval_slots)
    window = sc.cfg["agent"]["final_window"]
    final = float(np.median(result.eval_costs[-window:])) if result.eval_costs else ev.normalized
    return AgentRun(variant, result, ev, final)
