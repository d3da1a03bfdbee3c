import logging

import numpy as np

from csi_model import AmplitudeTensor, CsiSequence, extract_amplitudes
from errors import DataError

from .hampel import HampelConfig, sanitize

logger = logging.getLogger("Sanitizer")


class AmplitudeMatrix:
    """Sanitised amplitudes condensed over antenna pairs, shaped (P, K)."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or min(values.shape) < 1:
            raise DataError(f"amplitude matrix must be a non-empty (P, K) array, got {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError("amplitude matrix values must be finite and nonnegative")
        values = values.copy()
        values.setflags(write=False)
        self._values = values

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def n_pkt(self) -> int:
        return self._values.shape[0]

    @property
    def n_sub(self) -> int:
        return self._values.shape[1]

    def __eq__(self, other):
        if not isinstance(other, AmplitudeMatrix):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __repr__(self):
        return f"AmplitudeMatrix(n_pkt={self.n_pkt}, n_sub={self.n_sub})"


def condense(sanitized: AmplitudeTensor) -> AmplitudeMatrix:
    """Median over all rx/tx pairs for every (packet, subcarrier) cell."""
    values = sanitized.values
    n_rx, n_tx, n_sub, n_pkt = values.shape
    stacked = values.reshape(n_rx * n_tx, n_sub, n_pkt)
    return AmplitudeMatrix(np.median(stacked, axis=0).T)


def amplitude_matrix(seq: CsiSequence, cfg: HampelConfig, workers: int = 1) -> AmplitudeMatrix:
    """Extract, Hampel-filter and condense a CSI sequence into the student's input matrix."""
    matrix = condense(sanitize(extract_amplitudes(seq), cfg, workers=workers))
    logger.debug(f"Condensed {seq!r} into {matrix!r}")
    return matrix
