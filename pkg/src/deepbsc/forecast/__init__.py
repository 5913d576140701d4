from .baselines import persistence_forecast, statistical_mean_forecast
from .model import GsStnModel, backward, forward
from .similarity import build_similarity_graph
from .train import ForecastData, ForecastReport, evaluate, load_model, predict, predict_next, prepare, save_model, train

__all__ = [
    "ForecastData",
    "ForecastReport",
    "GsStnModel",
    "backward",
    "build_similarity_graph",
    "evaluate",
    "forward",
    "load_model",
    "persistence_forecast",
    "predict",
    "predict_next",
    "prepare",
    "save_model",
    "statistical_mean_forecast",
    "train",
]
