"""Mean-normalised forecast errors."""
import numpy as np

from ..errors import DimensionError, MetricError


def _errors(pred, truth, d_bar):
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if pred.shape != truth.shape:
        raise DimensionError(f"prediction {pred.shape} and truth {truth.shape} differ")
    if d_bar is None:
        d_bar = float(truth.mean())
    if not d_bar > 0:
        raise MetricError("mean ground-truth traffic must be positive")
    return pred - truth, d_bar


def nmae(pred, truth, d_bar=None):
    """mean |pred - truth| / d_bar, d_bar defaulting to the mean of ``truth``."""
    e, d_bar = _errors(pred, truth, d_bar)
    return float(np.abs(e).mean() / d_bar)


def nrmse(pred, truth, d_bar=None):
    e, d_bar = _errors(pred, truth, d_bar)
    return float(np.sqrt((e * e).mean()) / d_bar)
