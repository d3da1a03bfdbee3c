from .commands import (
    cmd_evaluate,
    cmd_generate,
    cmd_gradcheck,
    cmd_sanitize,
    cmd_sweep,
    cmd_synthesize,
    cmd_train,
    load_config,
    parse_sizes,
    parse_thresholds,
)
from .run_config import KEYS, RunConfig
