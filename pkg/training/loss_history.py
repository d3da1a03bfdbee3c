from collections import deque
import logging
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd

logger = logging.getLogger("Trainer")

LOSS_COLUMNS = ["l_adv_c", "l_adv_g", "mse_y", "mse_v", "mse_s"]


class LossHistory:
    """Rolling window of per-step loss records, also grouped by epoch."""
    def __init__(self, window: int = 20):
        self.records = deque(maxlen=1000)
        self.window = window
        self.epoch_segments: Dict[int, List[Dict[str, float]]] = {}
        self.epoch_means: Dict[int, Dict[str, float]] = {}

    def add_record(self, epoch: int, losses: Dict[str, float]):
        record = {k: float(losses[k]) for k in LOSS_COLUMNS}
        self.records.append(record)
        self.epoch_segments.setdefault(epoch, []).append(record)

    def moving_average(self, key: str) -> float:
        """Mean of `key` over the last `window` steps."""
        recent = list(self.records)[-self.window:]
        return float(np.mean([r[key] for r in recent])) if recent else float("nan")

    def close_epoch(self, epoch: int) -> Dict[str, float]:
        segment = self.epoch_segments.pop(epoch, [])
        means = {k: float(np.mean([r[k] for r in segment])) for k in LOSS_COLUMNS}
        self.epoch_means[epoch] = means
        return means

    def get_all_epoch_keys(self) -> List[int]:
        return sorted(self.epoch_means.keys())

    def to_frame(self) -> pd.DataFrame:
        rows = [{"epoch": e, **self.epoch_means[e]} for e in self.get_all_epoch_keys()]
        return pd.DataFrame(rows, columns=["epoch"] + LOSS_COLUMNS)

    def save_to_file(self, file_path: Union[str, Path]):
        """Write the per-epoch loss log as CSV."""
        try:
            self.to_frame().to_csv(file_path, index=False, lineterminator="\n")
        except OSError as e:
            logger.error(f"Error saving loss log: {e}")
            raise

    @classmethod
    def load_from_file(cls, file_path: Union[str, Path], window: int = 20) -> "LossHistory":
        history = cls(window)
        frame = pd.read_csv(file_path, float_precision="round_trip")
        for row in frame.to_dict(orient="records"):
            history.epoch_means[int(row["epoch"])] = {k: float(row[k]) for k in LOSS_COLUMNS}
        return history
