from .benchmark import BaseDnn, BenchmarkData, collect_benchmark_pairs, predict_benchmark, train_base_dnn
from .policies import TtpThresholds, goff_policy, proxy_utilization, slot_cost, to_policy, ttp_policy

__all__ = [
    "BaseDnn",
    "BenchmarkData",
    "TtpThresholds",
    "collect_benchmark_pairs",
    "goff_policy",
    "predict_benchmark",
    "proxy_utilization",
    "slot_cost",
    "to_policy",
    "train_base_dnn",
    "ttp_policy",
]
