import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deepbsc.errors import ArgumentError, DimensionError, MetricError, ParseError, RangeError, ScalerError
from deepbsc.traffic import (
    MILAN_SCHEMA,
    CdrRecords,
    CdrSchema,
    Scaler,
    SyntheticConfig,
    TrafficSeries,
    aggregate,
    denormalize,
    gen_synthetic,
    load_cdr,
    make_windows,
    nmae,
    normalize,
    nrmse,
    semantic_pair_config,
    synthetic_mean,
)
from deepbsc.traffic.cdr import parse_line

T0 = 1383260400000  # 2013-11-01 00:00 CET in ms
TEN_MIN = 600_000


def test_parse_line_basic():
    assert parse_line("42,1383260400000,12.5", CdrSchema()) == (42, 1383260400000, 12.5)


def test_parse_line_missing_value_is_zero():
    assert parse_line("42,1383260400000,", CdrSchema()) == (42, 1383260400000, 0.0)


def test_milan_tab_layout():
    line = "42\t1383260400000\t39\t0.1\t0.2\t0.3\t0.4\t7.25"
    assert parse_line(line, MILAN_SCHEMA) == (42, 1383260400000, 7.25)
    # Milan rows with no internet activity end early
    assert parse_line("42\t1383260400000\t39\t0.1", MILAN_SCHEMA)[2] == 0.0


def test_load_cdr_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,1383260400000,1\nxx,1383260400000,2\n")
    with pytest.raises(ParseError) as info:
        load_cdr(bad)
    assert info.value.line == 2
    out_of_range = tmp_path / "range.csv"
    out_of_range.write_text("10001,1383260400000,1\n")
    with pytest.raises(RangeError):
        load_cdr(out_of_range)


def test_three_records_one_window_sum(tmp_path):
    path = tmp_path / "cdr.csv"
    path.write_text(
        f"1,{T0},1\n1,{T0 + TEN_MIN},2\n1,{T0 + 2 * TEN_MIN},3\n"
    )
    rec = load_cdr(path)
    series = aggregate(rec, micro_shape=(100, 100), spatial_factor=10, temporal_factor=3)
    assert len(series) == 1
    assert series.values[0, 0, 0] == 6.0
    assert series.values.sum() == 6.0
    assert series.slot_minutes == 30


def test_uniform_micro_grid_sums_to_100():
    cells = np.arange(100 * 100)
    rec = CdrRecords(cells, np.full(cells.size, T0), np.ones(cells.size))
    series = aggregate(rec, (100, 100), spatial_factor=10, temporal_factor=1)
    assert series.values.shape == (1, 10, 10)
    assert (series.values == 100).all()


def test_temporal_factor_three():
    rec = CdrRecords(np.zeros(3, int), T0 + TEN_MIN * np.arange(3), np.ones(3))
    series = aggregate(rec, (10, 10), spatial_factor=10, temporal_factor=3)
    assert series.values.shape == (1, 1, 1)
    assert series.values[0, 0, 0] == 3.0


def test_aggregate_errors():
    rec = CdrRecords(np.zeros(2, int), np.array([T0, T0 + 5 * TEN_MIN]), np.ones(2))
    with pytest.raises(RangeError):
        aggregate(rec, (10, 10), 10, 1, start_ms=T0, n_source_slots=3)
    with pytest.raises(ArgumentError):
        aggregate(rec, (10, 10), 3, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4), st.integers(1, 60))
def test_aggregate_matches_brute_force(seed, tf, n):
    rng = np.random.default_rng(seed)
    cells = rng.integers(0, 20 * 20, size=n)
    times = T0 + TEN_MIN * rng.integers(0, 12, size=n)
    vals = rng.uniform(0, 10, size=n)
    series = aggregate(CdrRecords(cells, times, vals), (20, 20), spatial_factor=5, temporal_factor=tf,
                       start_ms=T0, n_source_slots=12)
    expected = np.zeros((-(-12 // tf), 4, 4))
    for c, t, v in zip(cells, times, vals):
        r, col = divmod(int(c), 20)
        expected[((t - T0) // TEN_MIN) // tf, r // 5, col // 5] += v
    np.testing.assert_allclose(series.values, expected, rtol=0, atol=1e-9)
    # mass conservation
    assert series.values.sum() == pytest.approx(vals.sum(), rel=1e-12)


def test_normalize_contract():
    series = TrafficSeries(np.array([[[4.0, 2.0]], [[0.0, 1.0]]]))
    norm, scaler = normalize(series)
    assert scaler.max == 4.0
    assert norm.values[0, 0, 1] == 0.5
    back = denormalize(norm, scaler)
    np.testing.assert_allclose(back.values, series.values, rtol=0, atol=1e-12)
    test = TrafficSeries(np.array([[[8.0, 0.0]]]))
    tnorm, _ = normalize(test, scaler)
    assert tnorm.values[0, 0, 0] == 2.0


def test_normalize_all_zero():
    with pytest.raises(ScalerError):
        normalize(TrafficSeries(np.zeros((2, 2, 2))))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_scaler_roundtrip_property(seed):
    v = np.random.default_rng(seed).uniform(0, 1000, size=(3, 4, 4))
    s = Scaler.fit(v)
    np.testing.assert_allclose(s.inverse(s.transform(v)), v, rtol=1e-12, atol=1e-12)


def test_synthetic_constant():
    cfg = SyntheticConfig(grid_shape=(3, 3), days=2, base=5.0, amplitude=0.0, noise_std=0.0)
    series = gen_synthetic(cfg)
    assert (series.values == 5.0).all()


def test_synthetic_deterministic():
    cfg = semantic_pair_config(seed=3, days=2)
    a, b = gen_synthetic(cfg), gen_synthetic(cfg)
    assert a.values.tobytes() == b.values.tobytes()
    assert gen_synthetic(semantic_pair_config(seed=4, days=2)).values.tobytes() != a.values.tobytes()


def test_synthetic_config_validation():
    with pytest.raises(ArgumentError):
        SyntheticConfig(base=5.0, amplitude=6.0).validate()


def test_synthetic_monte_carlo_mean():
    cfg = semantic_pair_config(seed=1, days=30, day_scale_std=0.0, noise_std=3.0)
    series = gen_synthetic(cfg)
    mean = synthetic_mean(cfg)
    # the truncated noise never reaches the clip at zero, so it stays unbiased
    assert mean.min() > cfg.noise_clip * cfg.noise_std
    per_cell = series.values.reshape(30, 48, 10, 10).mean(axis=0)
    curve = mean[:48]
    bound = 3 * cfg.noise_std / np.sqrt(30)
    per_slot = per_cell.mean(axis=(1, 2))
    assert (np.abs(per_slot - curve.mean(axis=(1, 2))) <= bound).all()
    # per cell the band is a 3-sigma interval: ~99.7% coverage for Gaussian noise, truncation only tightens it
    assert (np.abs(per_cell - curve) <= bound).mean() > 0.99


def test_windows_count_and_targets():
    values = np.arange(14 * 4, dtype=float).reshape(14, 2, 2)
    w = make_windows(TrafficSeries(values), 12)
    assert len(w.inputs) == 2
    np.testing.assert_array_equal(w.targets[0], values[12])
    np.testing.assert_array_equal(w.inputs[1], values[1:13])
    with pytest.raises(ArgumentError):
        make_windows(TrafficSeries(values), 14)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 30), st.integers(1, 5))
def test_windows_reassemble(T, K):
    if T <= K:
        return
    values = np.random.default_rng(T * 31 + K).uniform(size=(T, 2, 3))
    w = make_windows(values, K)
    assert len(w.inputs) == T - K
    rebuilt = np.concatenate([w.inputs[0], w.targets])
    np.testing.assert_array_equal(rebuilt, values)
    assert (np.diff(w.target_index) > 0).all()


def test_metrics_hand_values():
    assert nmae([2.0, 0.0], [1.0, 1.0]) == 1.0
    assert nrmse([2.0, 0.0], [1.0, 1.0]) == 1.0
    t = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert nmae(t, t) == 0.0 and nrmse(t, t) == 0.0


def test_metrics_errors():
    with pytest.raises(MetricError):
        nmae([1.0], [0.0])
    with pytest.raises(DimensionError):
        nrmse([1.0, 2.0], [1.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_metrics_formula_oracle(seed):
    rng = np.random.default_rng(seed)
    truth = rng.uniform(0.1, 5, size=(3, 4))
    pred = truth + rng.normal(size=(3, 4))
    N = truth.size
    dbar = sum(truth.ravel()) / N
    mae = sum(abs(p - d) for p, d in zip(pred.ravel(), truth.ravel())) / N / dbar
    rmse = np.sqrt(sum((p - d) ** 2 for p, d in zip(pred.ravel(), truth.ravel())) / N) / dbar
    assert abs(nmae(pred, truth) - mae) < 1e-12
    assert abs(nrmse(pred, truth) - rmse) < 1e-12
    assert nmae(pred, truth) >= 0 and nrmse(pred, truth) >= 0


def test_series_csv_roundtrip(tmp_path):
    values = np.random.default_rng(0).uniform(size=(3, 2, 2))
    s = TrafficSeries(values, start_slot=5)
    path = s.to_csv(tmp_path / "s.csv")
    assert path.read_text().splitlines()[0] == "slot,gx,gy,value"
    back = TrafficSeries.from_csv(path)
    assert back.start_slot == 5
    np.testing.assert_array_equal(back.values, values)


def test_series_immutable():
    s = TrafficSeries(np.ones((2, 2, 2)))
    with pytest.raises(ValueError):
        s.values[0, 0, 0] = 3.0
