"""One test per acceptance criterion; each prints a single PASS/FAIL line."""
import json
import time
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from deepbsc import cli
from deepbsc.agent import AgentHyperparams, DdpgAgent, policy_q_gradient, rollout
from deepbsc.baselines import predict_benchmark, to_policy
from deepbsc.cellsim import CostParams, EnergyParams, NetworkTopology, dispatch_traffic, energy_cost
from deepbsc.cellsim import service_delay_cost, switching_cost
from deepbsc.errors import TopologyError
from deepbsc.harness import load_config
from deepbsc.harness import pipeline as pl
from deepbsc.nn import (
    AttentionParams,
    ConvParams,
    DenseParams,
    LstmParams,
    attention_backward,
    attention_pool,
    conv1d_apply,
    conv1d_backward,
    conv2d_apply,
    conv2d_backward,
    dense_apply,
    dense_backward,
    lstm_sequence,
    lstm_sequence_backward,
)
from deepbsc.nn.gradcheck import numerical_gradient, relative_error
from deepbsc.traffic import nrmse
from oracles import enumerate_dispatch

SEEDS = range(5)
TINY = Path(__file__).parent / "fixtures" / "tiny.json"


@pytest.fixture
def verdict(capsys):
    def emit(number, name, ok, detail, note=None):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
            if note:
                print(f"  {note}")

    return emit


def small_config():
    text = resources.files("deepbsc.harness").joinpath("presets/small.json").read_text()
    path = Path(__file__).parent / ".small.json"
    path.write_text(text)
    try:
        return load_config(path)
    finally:
        path.unlink()


_CACHE = {}


def small_instance(seed):
    """Scenario plus GOFF-trained benchmark for one seed, shared by criteria 5-7."""
    if seed not in _CACHE:
        sc = pl.build_scenario(small_config(), seed)
        base, _ = pl.benchmark_model(sc)
        _CACHE[seed] = (sc, base)
    return _CACHE[seed]


# ---------------------------------------------------------------- 1


def _check(loss, pairs):
    return max(relative_error(g, numerical_gradient(loss, x)) for g, x in pairs)


def _dense(rng):
    p = DenseParams(rng.normal(size=(3, 4)), rng.normal(size=3))
    x, up = rng.normal(size=(2, 4)), rng.normal(size=(2, 3))
    loss = lambda: float((dense_apply(p, x, "sigmoid")[0] * up).sum())  # noqa: E731
    dx, g = dense_backward(p, dense_apply(p, x, "sigmoid")[1], up)
    return _check(loss, [(g["weights"], p.weights), (g["bias"], p.bias), (dx, x)])


def _conv(rng, kind):
    shape = (2, 3, 3) if kind == "2d" else (2, 1, 3)
    p = ConvParams(rng.normal(size=shape), rng.normal(size=2), kind=kind)
    x, up = rng.normal(size=(2, 3, 4)), rng.normal(size=(2, 2, 3, 4))
    apply, back = (conv2d_apply, conv2d_backward) if kind == "2d" else (conv1d_apply, conv1d_backward)
    loss = lambda: float((apply(p, x, "tanh")[0] * up).sum())  # noqa: E731
    dx, g = back(p, apply(p, x, "tanh")[1], up)
    return _check(loss, [(g["filters"], p.filters), (g["bias"], p.bias), (dx, x)])


def _lstm(rng):
    p = LstmParams(rng.normal(scale=0.5, size=(4, 3, 5)), rng.normal(scale=0.5, size=(4, 3)))
    xs, up = rng.normal(size=(2, 3, 2)), rng.normal(size=(2, 3, 3))
    loss = lambda: float((lstm_sequence(p, xs)[0] * up).sum())  # noqa: E731
    dxs, g = lstm_sequence_backward(p, lstm_sequence(p, xs)[1], up)
    return _check(loss, [(g["weights"], p.weights), (g["bias"], p.bias), (dxs, xs)])


def _attention(rng):
    p = AttentionParams.init(3, rng, projection=True)
    h, up = rng.normal(size=(2, 4, 3)), rng.normal(size=(2, 3))
    loss = lambda: float((attention_pool(p, h)[0] * up).sum())  # noqa: E731
    dh, g = attention_backward(p, attention_pool(p, h)[2], up)
    return _check(loss, [(dh, h)] + [(g[k], v) for k, v in p.tensors().items()])


def _actor_critic(rng):
    hyper = AgentHyperparams(actor_hidden=(6, 5), critic_hidden=(7, 5), batch_size=4, replay_capacity=10)
    agent = DdpgAgent(5, 3, hyper, rng)
    # move the critic's running statistics away from their initial values
    agent.critic.forward(rng.normal(size=(8, 8)), training=True)
    states = rng.normal(size=(4, 5))
    _, grads = policy_q_gradient(agent.actor, agent.critic, states)
    loss = lambda: policy_q_gradient(agent.actor, agent.critic, states)[0]  # noqa: E731
    return _check(loss, [(grads[k], v) for k, v in agent.actor.params().items()])


def test_1_kernel_gradients(verdict):
    kernels = {
        "dense": _dense,
        "conv2d": lambda r: _conv(r, "2d"),
        "conv1d": lambda r: _conv(r, "1d"),
        "lstm-3-steps": _lstm,
        "attention": _attention,
        "actor-through-critic": _actor_critic,
    }
    start = time.perf_counter()
    worst = {name: max(f(np.random.default_rng(1000 + s)) for s in range(20)) for name, f in kernels.items()}
    elapsed = time.perf_counter() - start
    ok = all(v < 1e-4 for v in worst.values()) and elapsed < 60
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    verdict(1, "kernel gradient checks", ok, f"worst rel. error over 20 seeds: {detail}; {elapsed:.1f} s")
    assert ok


# ---------------------------------------------------------------- 2


def test_2_dispatch_optimality(verdict):
    rng = np.random.default_rng(2024)
    params = CostParams()
    solved, worst_gap, worst_conservation = 0, 0.0, 0.0
    while solved < 50:
        positions = rng.uniform([0, 0], [3, 1], size=(2, 2))
        radius = rng.uniform(1.0, 3.5, size=2)
        cap_units = rng.integers(3, 15, size=2) / 10.0
        try:
            topo = NetworkTopology(positions, radius, cap_units / params.util_cap, (3, 1))
        except TopologyError:
            continue
        demand = rng.integers(0, 11, size=3) / 10.0
        res = dispatch_traffic(demand, [1, 1], topo, params)
        cost = np.where(topo.cover, params.delay_coeff * topo.dist, np.inf)
        oracle = enumerate_dispatch(demand, cost, cap_units, res.penalty)
        worst_gap = max(worst_gap, abs(res.objective - oracle))
        worst_conservation = max(worst_conservation, np.abs(res.flow.sum(axis=1) + res.overflow - demand).max())
        solved += 1
    # integral instances have integral optima, so the 0.1 lattice search is exact
    ok = worst_gap <= 1e-9 and worst_conservation <= 1e-12
    verdict(2, "dispatch optimality", ok,
            f"50 instances, max |MCF - enumeration| = {worst_gap:.1e}, max conservation residual = {worst_conservation:.1e}")
    assert ok


# ---------------------------------------------------------------- 3


def test_3_cost_unit_oracles(verdict):
    e = EnergyParams()
    idle, _ = energy_cost(np.array([0.0]), np.array([1]), np.array([10.0]), e)
    half, _ = energy_cost(np.array([5.0]), np.array([1]), np.array([10.0]), e)
    turn_on = switching_cost(np.array([0]), np.array([1]), CostParams().beta_s)
    ser = service_delay_cost(np.array([8.0]), np.array([10.0]), np.array([1]))
    values = (float(idle[0]), float(half[0]), float(turn_on), float(ser))
    ok = values == (160.0, 268.0, 100.0, 0.5)
    verdict(3, "cost-model unit oracles", ok, f"idle, half-load, turn-on, service = {values}")
    assert ok


# ---------------------------------------------------------------- 4


@pytest.mark.slow
def test_4_forecasting(verdict):
    cfg = load_config()
    start = time.perf_counter()
    rows = []
    for seed in SEEDS:
        series = pl.build_series(cfg, seed)
        train_T, eval_slots = pl.split_slots(cfg, series)
        gs = pl.train_forecaster(cfg, series, train_T, eval_slots, seed, semantic=True).report.nrmse
        geo = pl.train_forecaster(cfg, series, train_T, eval_slots, seed, semantic=False).report.nrmse
        persist = nrmse(pl.reference_forecast("persistence", series, train_T, eval_slots), series.values[eval_slots])
        rows.append((gs, geo, persist))
    elapsed = time.perf_counter() - start
    sem_wins = sum(gs <= geo for gs, geo, _ in rows)
    beat = sum(gs < p and geo < p for gs, geo, p in rows)
    ok = sem_wins >= 4 and beat >= 4 and elapsed < 15 * 60
    table = "; ".join(f"seed {s}: {gs:.4f}/{geo:.4f}/{p:.4f}" for s, (gs, geo, p) in zip(SEEDS, rows))
    verdict(4, "forecasting", ok, f"NRMSE GS-STN/geo/persistence {table}; GS-STN<=geo {sem_wins}/5, "
                                  f"both<persistence {beat}/5; {elapsed:.0f} s")
    assert ok


# ---------------------------------------------------------------- 5


@pytest.mark.slow
def test_5_benchmark_variance(verdict):
    rows = []
    for seed in SEEDS:
        sc, base = small_instance(seed)
        day = sc.eval_slots[: sc.series.slots_per_day]
        rng = np.random.default_rng([seed, 5])
        policy = lambda f, prev: to_policy(0.2, sc.task.n_bs, rng)  # noqa: E731
        costs, actions = rollout(sc.task, policy, day)
        prevs = np.vstack([np.ones(sc.task.n_bs, dtype=np.int8), actions[:-1]])
        c = np.array([x.total for x in costs])
        c_base = np.array([predict_benchmark(base, sc.task.raw_state(t, p)) for t, p in zip(day, prevs)])
        rows.append((np.var(c - c_base, ddof=1), np.var(c, ddof=1)))
    holds = sum(g < c for g, c in rows)
    ok = holds >= 4
    table = "; ".join(f"seed {s}: var(g)={g:.3g} var(c)={c:.3g}" for s, (g, c) in zip(SEEDS, rows))
    verdict(5, "benchmark-transformation variance", ok, f"{table}; holds on {holds}/5")
    assert ok


# ---------------------------------------------------------------- 6


def _ordering(m, tol=1.05):
    return {
        "bt_en<=bt": m["ddpg_bt_en"] <= tol * m["ddpg_bt"],
        "bt<=plain": m["ddpg_bt"] <= tol * m["ddpg"],
        "bt_en<=en": m["ddpg_bt_en"] <= tol * m["ddpg_en"],
        "en<=plain": m["ddpg_en"] <= tol * m["ddpg"],
    }


@pytest.mark.slow
def test_6_learning_outcome(verdict):
    start = time.perf_counter()
    rows, orderings = [], []
    for seed in SEEDS:
        sc, base = small_instance(seed)
        goff = pl.run_baseline(sc, "goff")[0].normalized
        to = pl.run_baseline(sc, "to")[0].normalized
        medians = {v: pl.run_agent(sc, v, base).final_median for v in pl.VARIANTS}
        rows.append((medians["ddpg_bt_en"], goff, to))
        orderings.append((medians, _ordering(medians)))
    elapsed = time.perf_counter() - start
    wins = sum(a <= 1.05 * g and a <= 1.05 * t for a, g, t in rows)
    ok = wins >= 4 and elapsed < 60 * 60
    table = "; ".join(f"seed {s}: {a:.3f} vs GOFF {g:.3f}, TO {t:.3f}" for s, (a, g, t) in zip(SEEDS, rows))
    holds = {k: sum(o[k] for _, o in orderings) for k in orderings[0][1]}
    per_seed = "; ".join(f"seed {s}: " + ", ".join(f"{k} {v:.3f}" for k, v in m.items())
                         for s, (m, _) in zip(SEEDS, orderings))
    verdict(6, "learning outcome", ok,
            f"DDPG+BT+EN final-10 median {table}; within 5% of both on {wins}/5; {elapsed:.0f} s",
            note=f"ablation ordering (reported, 5% tolerance), seeds holding each relation {json.dumps(holds)}; "
                 f"final-10 medians {per_seed}")
    assert ok


# ---------------------------------------------------------------- 7


@pytest.mark.slow
def test_7_switching_sweep(verdict):
    ratios = (0.1, 1.0, 10.0)
    rows = []
    for seed in SEEDS:
        sc, base = small_instance(seed)
        cells = [cli.sweep_cell(sc, r, "ddpg_bt_en", base if r == 1.0 else None) for r in ratios]
        rows.append([c["toggles_per_slot"] for c in cells])
    holds = sum(cli.non_increasing(t) for t in rows)
    ok = holds >= 4
    table = "; ".join(f"seed {s}: " + "/".join(f"{v:.3f}" for v in t) for s, t in zip(SEEDS, rows))
    verdict(7, "switching-cost sweep", ok, f"toggles per slot at ratios 0.1/1/10 {table}; non-increasing on {holds}/5")
    assert ok


# ---------------------------------------------------------------- 8


def test_8_reproducible_reports(tmp_path, verdict):
    cfg = tmp_path / "c.json"
    cfg.write_text(TINY.read_text())
    same, checked = True, []
    for command in cli.COMMANDS:
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / command / run
            args = [command, "--config", str(cfg), "--out", str(out)]
            if command in ("forecast-eval", "agent-eval"):
                # evaluation reads the model trained into the same directory
                prior = "forecast-train" if command == "forecast-eval" else "agent-train"
                assert cli.run([prior, "--config", str(cfg), "--out", str(out)]) == 0
            if command == "sweep-switching":
                args += ["--ratios", "0.1,1,10"]
            assert cli.run(args) == 0
            outputs.append({p.name: p.read_bytes() for p in sorted(out.glob("*")) if p.name != "timing.json"})
        same &= outputs[0] == outputs[1]
        checked.append(f"{command} {len(outputs[0])} files")
    verdict(8, "reproducibility", same, "; ".join(checked))
    assert same
