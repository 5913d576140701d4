from .cdr import MILAN_SCHEMA, CdrRecords, CdrSchema, aggregate, load_cdr
from .metrics import nmae, nrmse
from .series import Scaler, TrafficFrame, TrafficSeries, Windows, denormalize, make_windows, normalize
from .synthetic import Hotspot, SemanticPair, SyntheticConfig, gen_synthetic, semantic_pair_config, synthetic_mean

__all__ = [
    "MILAN_SCHEMA",
    "CdrRecords",
    "CdrSchema",
    "Hotspot",
    "Scaler",
    "SemanticPair",
    "SyntheticConfig",
    "TrafficFrame",
    "TrafficSeries",
    "Windows",
    "aggregate",
    "denormalize",
    "gen_synthetic",
    "load_cdr",
    "make_windows",
    "nmae",
    "normalize",
    "nrmse",
    "semantic_pair_config",
    "synthetic_mean",
]
