import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from csi_model import AmplitudeTensor
from errors import EmptySeries, InvalidConfigValue

logger = logging.getLogger("Sanitizer")


@dataclass(frozen=True)
class HampelConfig:
    """Sliding window length (odd, packets) and the MAD multiple accepted around the median."""
    window: int = 51
    n_sigmas: float = 3.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise InvalidConfigValue(f"Hampel window must be odd and >= 3, got {self.window}")
        if not self.n_sigmas > 0:
            raise InvalidConfigValue(f"Hampel n_sigmas must be > 0, got {self.n_sigmas}")


def _lower_median(values: np.ndarray) -> float:
    """Middle element of the sorted values; the lower of the two for an even count."""
    return np.sort(values)[(values.shape[0] - 1) // 2]


def local_statistics(series: np.ndarray, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Median and MAD of the centred window at every index.

    Near the ends the window is clipped to the series, so index p sees
    series[max(0, p - window // 2) : min(P, p + window // 2 + 1)]. Clipped windows
    may hold an even count; their median is the lower middle element.
    """
    n = series.shape[0]
    half = window // 2
    mu = np.empty(n)
    mad = np.empty(n)

    if n >= window:
        windows = sliding_window_view(series, window)
        centre = np.median(windows, axis=1)
        mu[half:n - half] = centre
        mad[half:n - half] = np.median(np.abs(windows - centre[:, None]), axis=1)
        edges = list(range(half)) + list(range(n - half, n))
    else:
        edges = range(n)

    for p in edges:
        values = series[max(0, p - half):min(n, p + half + 1)]
        mu[p] = _lower_median(values)
        mad[p] = _lower_median(np.abs(values - mu[p]))
    return mu, mad


def _validated(series) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1 or series.shape[0] == 0:
        raise EmptySeries("Hampel filter needs a non-empty 1-D series")
    return series


def _flag(series: np.ndarray, cfg: HampelConfig) -> Tuple[np.ndarray, np.ndarray]:
    mu, mad = local_statistics(series, cfg.window)
    bound = cfg.n_sigmas * mad
    return (series < mu - bound) | (series > mu + bound), mu


def hampel_outliers(series, cfg: HampelConfig) -> np.ndarray:
    outliers, _ = _flag(_validated(series), cfg)
    return outliers


def hampel_filter(series, cfg: HampelConfig) -> np.ndarray:
    """Replace every outlier with the last preceding non-outlier value.

    All windows are evaluated on the raw series before any replacement. Outliers
    with no inlier before them take their window's local median.
    """
    series = _validated(series)
    outliers, mu = _flag(series, cfg)
    if not outliers.any():
        return series.copy()

    # index of the most recent inlier at or before each position, -1 if none
    positions = np.where(~outliers, np.arange(series.shape[0]), -1)
    last_inlier = np.maximum.accumulate(positions)
    cleaned = series.copy()
    replaced = np.where(last_inlier >= 0, series[np.maximum(last_inlier, 0)], mu)
    cleaned[outliers] = replaced[outliers]
    return cleaned


def sanitize(amps: AmplitudeTensor, cfg: HampelConfig, workers: int = 1) -> AmplitudeTensor:
    """Hampel-filter every (rx, tx, subcarrier) series along the packet axis."""
    values = amps.values
    n_rx, n_tx, n_sub, n_pkt = values.shape
    series = values.reshape(-1, n_pkt)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(lambda s: hampel_filter(s, cfg), series))
    else:
        rows = [hampel_filter(s, cfg) for s in series]

    cleaned = np.stack(rows).reshape(values.shape)
    changed = int(np.count_nonzero(cleaned != values))
    logger.debug(f"Hampel window={cfg.window} n_sigmas={cfg.n_sigmas}: replaced {changed} of {values.size} samples")
    return AmplitudeTensor(cleaned)
