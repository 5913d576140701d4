from .config import DEFAULTS, config_hash, load_config, schema, stream_seed, validate
from .report import emit_report

__all__ = ["DEFAULTS", "config_hash", "emit_report", "load_config", "schema", "stream_seed", "validate"]
