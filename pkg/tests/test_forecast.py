import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from deepbsc.errors import ArgumentError, DimensionError
from deepbsc.forecast import (
    ForecastReport,
    GsStnModel,
    backward,
    build_similarity_graph,
    evaluate,
    forward,
    load_model,
    persistence_forecast,
    predict_next,
    prepare,
    save_model,
    statistical_mean_forecast,
    train,
)
from deepbsc.forecast.kernels import semantic_backward, semantic_forward, semantic_reference
from deepbsc.nn.gradcheck import numerical_gradient, relative_error
from deepbsc.traffic import Scaler, TrafficSeries, gen_synthetic, nrmse, semantic_pair_config


# --- similarity graph ------------------------------------------------------

def test_identical_histories_similarity_one():
    w = np.array([[1.0, 1.0], [2.0, 2.0], [0.5, 0.5]])
    assert build_similarity_graph(w, flat=True)[0, 1] == pytest.approx(1.0)


def test_orthogonal_histories():
    w = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert build_similarity_graph(w, flat=True)[0, 1] == 0.0


def test_zero_history_has_zero_row():
    w = np.array([[0.0, 1.0], [0.0, 2.0]])
    a = build_similarity_graph(w, flat=True)
    assert a[0, 0] == 0.0 and a[0, 1] == 0.0 and a[1, 1] == 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6))
def test_similarity_dot_product_oracle(seed, K):
    w = np.random.default_rng(seed).normal(size=(K, 2, 2))
    a = build_similarity_graph(w)
    h = w.reshape(K, 4)
    for i in range(4):
        for j in range(4):
            num = sum(h[k, i] * h[k, j] for k in range(K))
            den = np.sqrt(sum(h[k, i] ** 2 for k in range(K))) * np.sqrt(sum(h[k, j] ** 2 for k in range(K)))
            assert abs(a[i, j] - (1.0 if i == j else num / den)) < 1e-12
    assert (a == a.T).all()
    assert (np.abs(a) <= 1.0).all()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_similarity_relabel_covariant(seed):
    rng = np.random.default_rng(seed)
    h = rng.uniform(size=(5, 6))
    perm = rng.permutation(6)
    a = build_similarity_graph(h, flat=True)
    np.testing.assert_allclose(build_similarity_graph(h[:, perm], flat=True), a[np.ix_(perm, perm)], atol=1e-14)


# --- semantic kernel -------------------------------------------------------

def _preactivation_margin(A, d, w, b):
    """Smallest |pre-relu value|; finite differences are meaningless within one step of the kink."""
    rows = A[:, None, :, :] * d[:, :, None, :]
    half, N = w.shape[1] // 2, rows.shape[-1]
    padded = np.pad(rows, [(0, 0)] * 3 + [(half, half)])
    z = sum(w[None, None, :, None, None, t] * padded[:, :, None, :, t : t + N] for t in range(w.shape[1]))
    return np.abs(z + b[None, None, :, None, None]).min()


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 3, 5]))
def test_semantic_kernel_matches_reference(seed, L):
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1, 1, size=(2, 7, 7))
    d = rng.uniform(0, 1, size=(2, 3, 7))
    w = rng.normal(size=(4, L))
    b = rng.normal(size=4) * 0.1
    np.testing.assert_allclose(semantic_forward(A, d, w, b), semantic_reference(A, d, w, b), atol=1e-13)
    dout = rng.normal(size=(2, 3, 7))
    dw, db = semantic_backward(A, d, w, b, dout)
    assume(_preactivation_margin(A, d, w, b) > 1e-4)

    def loss():
        return float((semantic_reference(A, d, w, b) * dout).sum())

    assert relative_error(dw, numerical_gradient(loss, w)) < 1e-6
    assert relative_error(db, numerical_gradient(loss, b)) < 1e-6


# --- model -----------------------------------------------------------------

def toy_model(seed, semantic=True, K=2, grid=(3, 3), hidden=5):
    return GsStnModel.init(grid, np.random.default_rng(seed), K=K, hidden=hidden, n_filters=3, semantic=semantic)


def test_outputs_strictly_inside_unit_interval():
    m = toy_model(0)
    x = np.random.default_rng(1).uniform(0, 5, size=(4, 2, 3, 3))
    pred, _ = forward(m, x)
    assert pred.shape == (4, 9)
    assert ((pred > 0) & (pred < 1)).all()


def test_zero_head_predicts_half():
    m = toy_model(0)
    m.head.weights[...] = 0.0
    m.head.bias[...] = 0.0
    pred, _ = forward(m, np.random.default_rng(2).uniform(size=(3, 2, 3, 3)))
    assert (pred == 0.5).all()


def test_window_shape_checked():
    with pytest.raises(DimensionError):
        forward(toy_model(0), np.zeros((1, 3, 3, 3)))


@pytest.mark.parametrize("semantic", [True, False])
@pytest.mark.parametrize("seed", range(3))
def test_end_to_end_gradient(seed, semantic):
    m = toy_model(seed, semantic)
    rng = np.random.default_rng(100 + seed)
    x = rng.uniform(0.1, 1.0, size=(2, 2, 3, 3))
    target = rng.uniform(size=(2, 9))

    def loss():
        pred, _ = forward(m, x)
        return float(((pred - target) ** 2).mean())

    pred, cache = forward(m, x)
    grads = backward(m, cache, 2 * (pred - target) / pred.size)
    for name, p in m.params().items():
        num = numerical_gradient(loss, p)
        assert relative_error(grads[name], num) < 1e-4, name


def test_symmetric_window_transpose_invariant():
    m = toy_model(4)
    x = np.random.default_rng(5).uniform(size=(2, 3, 3))
    x = x + np.swapaxes(x, -1, -2)
    a, _ = forward(m, x)
    b, _ = forward(m, np.swapaxes(x, -1, -2))
    np.testing.assert_array_equal(a, b)


def test_fixed_graph_mode():
    m = toy_model(6)
    history = np.random.default_rng(7).uniform(size=(10, 3, 3))
    m.fit_graph(history)
    x = history[:2]
    fixed, _ = forward(m, x)
    m.graph_mode = "window"
    per_window, _ = forward(m, x)
    assert fixed.shape == per_window.shape
    assert not np.array_equal(fixed, per_window)


# --- training ---------------------------------------------------------------

def _toy_data(seed, S=6):
    rng = np.random.default_rng(seed)
    return rng.uniform(size=(S, 2, 3, 3)), rng.uniform(0.2, 0.8, size=(S, 3, 3))


def test_zero_lr_trace_constant():
    x, y = _toy_data(0)
    trace = train(toy_model(0), x, y, epochs=4, batch_size=4, lr=0.0, seed=1)
    assert len(trace) == 4
    assert len(set(trace)) == 1


def test_training_deterministic():
    x, y = _toy_data(1)
    a = train(toy_model(2), x, y, epochs=3, batch_size=2, lr=1e-2, seed=5)
    b = train(toy_model(2), x, y, epochs=3, batch_size=2, lr=1e-2, seed=5)
    assert a == b


def test_overfit_one_sample():
    x, y = _toy_data(3, S=1)
    trace = train(toy_model(3), x, y, epochs=500, batch_size=1, lr=1e-2, seed=0)
    assert trace[-1] < 1e-3


def test_empty_training_rejected():
    with pytest.raises(ArgumentError):
        train(toy_model(0), np.zeros((0, 2, 3, 3)), np.zeros((0, 3, 3)), epochs=1)


def test_predict_next_composition():
    m = toy_model(8)
    history = np.random.default_rng(9).uniform(0, 40, size=(5, 3, 3))
    scaler = Scaler(50.0)
    frame = predict_next(m, scaler, history)
    direct, _ = forward(m, history[-2:] / 50.0)
    np.testing.assert_array_equal(frame.values, (direct * 50.0).reshape(3, 3))
    assert ((frame.values > 0) & (frame.values < 50.0)).all()
    with pytest.raises(ArgumentError):
        predict_next(m, scaler, history[:1])


def test_model_checkpoint_roundtrip(tmp_path):
    m = toy_model(10)
    m.fit_graph(np.random.default_rng(1).uniform(size=(6, 3, 3)))
    save_model(m, tmp_path / "m.dbsc")
    back = load_model(tmp_path / "m.dbsc")
    x = np.random.default_rng(11).uniform(size=(2, 2, 3, 3))
    np.testing.assert_array_equal(forward(m, x)[0], forward(back, x)[0])


@pytest.mark.slow
def test_trained_model_beats_persistence():
    series = gen_synthetic(semantic_pair_config(seed=0, grid_shape=(4, 4), days=22))
    data = prepare(series, K=12, train_slots=20 * 48)
    m = GsStnModel.init((4, 4), np.random.default_rng(0), K=12, hidden=48)
    cut = len(data.train_inputs) - 48
    val = (data.train_inputs[cut:], data.train_targets[cut:])
    train(m, data.train_inputs[:cut], data.train_targets[:cut], epochs=20, batch_size=32, lr=2e-3, seed=0, val=val)
    report = evaluate(m, data.scaler, data.test_inputs, data.test_targets, data.test_slots)
    persistence = nrmse(series.values[data.test_slots - 1], data.test_targets)
    assert report.nrmse < persistence


# --- reports and baselines ------------------------------------------------

def test_report_consistency(tmp_path):
    rng = np.random.default_rng(0)
    truth = rng.uniform(1, 5, size=(4, 2, 3))
    report = ForecastReport(np.arange(10, 14), truth + rng.normal(size=truth.shape), truth)
    assert report.nmae == pytest.approx(report.per_slot_nmae.mean(), rel=1e-12)
    assert report.nrmse == pytest.approx(np.sqrt((report.per_slot_nrmse**2).mean()), rel=1e-12)
    path = report.to_csv(tmp_path / "f.csv")
    assert path.read_text().splitlines()[0] == "slot,gx,gy,pred,truth"
    back = ForecastReport.from_csv(path, (2, 3))
    assert back.nrmse == report.nrmse and back.nmae == report.nmae


def test_statistical_mean_values():
    values = np.zeros((96, 1, 1))
    values[7], values[48 + 7] = 2.0, 4.0
    assert statistical_mean_forecast(values, 7).values[0, 0] == 3.0
    const = np.full((96, 2, 2), 5.0)
    assert (statistical_mean_forecast(const, 30).values == 5.0).all()
    with pytest.raises(ArgumentError):
        statistical_mean_forecast(np.zeros((0, 1, 1)), 0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(0, 47), st.integers(1, 4))
def test_statistical_mean_group_by_oracle(seed, slot, days):
    values = np.random.default_rng(seed).uniform(size=(days * 48 + 5, 2, 2))
    expected = np.zeros((2, 2))
    count = 0
    for t in range(len(values)):
        if t % 48 == slot:
            expected += values[t]
            count += 1
    got = statistical_mean_forecast(TrafficSeries(values), slot).values
    np.testing.assert_array_equal(got, statistical_mean_forecast(values, slot).values)
    np.testing.assert_allclose(got, expected / count, rtol=1e-12)


def test_persistence():
    values = np.random.default_rng(0).uniform(size=(5, 2, 2))
    np.testing.assert_array_equal(persistence_forecast(values).values, values[-1])
    const = np.full((6, 2, 2), 3.0)
    assert nrmse(persistence_forecast(const[:-1]).values, const[-1]) == 0.0
    series = gen_synthetic(semantic_pair_config(seed=0, grid_shape=(3, 3), days=2))
    preds = np.array([persistence_forecast(series.values[:t]).values for t in range(1, len(series))])
    assert nrmse(preds, series.values[1:]) > 0
    with pytest.raises(ArgumentError):
        persistence_forecast(np.zeros((0, 2, 2)))
