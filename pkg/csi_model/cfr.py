import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from errors import DataError, ZeroCfr


@dataclass(frozen=True)
class ComplexCfr:
    """One channel frequency response value H for a single antenna pair and subcarrier."""
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise DataError(f"CFR components must be finite, got ({self.re}, {self.im})")


def conjugate(h: ComplexCfr) -> ComplexCfr:
    return ComplexCfr(h.re, -h.im)


def cfr_amplitude(h: ComplexCfr) -> float:
    return math.hypot(h.re, h.im)


def cfr_phase(h: ComplexCfr) -> float:
    """Phase in (-pi, pi]. Undefined for the zero response."""
    if h.re == 0 and h.im == 0:
        raise ZeroCfr("phase of the zero CFR is undefined")
    # atan2(-0.0, -1) would give -pi
    return math.atan2(h.im + 0.0, h.re)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class CsiSequence:
    """P packets of complex CFR values indexed [packet][rx][tx][subcarrier].

    Timestamps are optional millisecond stamps, one per packet, non-decreasing.
    Instances are read-only once constructed.
    """

    def __init__(self, values: np.ndarray, timestamps: Optional[Sequence[int]] = None):
        values = np.asarray(values)
        if values.ndim != 4:
            raise DataError(f"CSI values must be shaped (P, rx, tx, sub), got {values.shape}")
        if min(values.shape) < 1:
            raise DataError(f"CSI dimensions must all be >= 1, got {values.shape}")
        values = values.astype(np.complex128)
        if not np.all(np.isfinite(values)):
            raise DataError("CSI values must be finite")
        self._values = _frozen(values)

        if timestamps is None:
            self._timestamps = None
        else:
            stamps = np.asarray(timestamps, dtype=np.uint64)
            if stamps.shape != (values.shape[0],):
                raise DataError(f"expected {values.shape[0]} timestamps, got {stamps.shape}")
            if np.any(stamps[1:] < stamps[:-1]):
                raise DataError("timestamps must be non-decreasing")
            self._timestamps = _frozen(stamps)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def timestamps(self) -> Optional[np.ndarray]:
        return self._timestamps

    @property
    def n_pkt(self) -> int:
        return self._values.shape[0]

    @property
    def n_rx(self) -> int:
        return self._values.shape[1]

    @property
    def n_tx(self) -> int:
        return self._values.shape[2]

    @property
    def n_sub(self) -> int:
        return self._values.shape[3]

    def cfr(self, p: int, rx: int, tx: int, k: int) -> ComplexCfr:
        value = self._values[p, rx, tx, k]
        return ComplexCfr(float(value.real), float(value.imag))

    def __eq__(self, other):
        if not isinstance(other, CsiSequence):
            return NotImplemented
        if not np.array_equal(self._values, other._values):
            return False
        if self._timestamps is None or other._timestamps is None:
            return self._timestamps is None and other._timestamps is None
        return np.array_equal(self._timestamps, other._timestamps)

    def __repr__(self):
        return (f"CsiSequence(n_pkt={self.n_pkt}, n_rx={self.n_rx}, n_tx={self.n_tx}, "
                f"n_sub={self.n_sub}, timestamps={self._timestamps is not None})")


def packet_permuted(seq: CsiSequence, order: Sequence[int]) -> CsiSequence:
    """Reorder packets; timestamps are dropped since a permutation breaks their ordering."""
    return CsiSequence(seq.values[np.asarray(order)])


class AmplitudeTensor:
    """Nonnegative amplitudes shaped (rx, tx, sub, P)."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 4:
            raise DataError(f"amplitude tensor must be 4-D (rx, tx, sub, P), got {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError("amplitudes must be finite and nonnegative")
        self._values = _frozen(values)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def shape(self):
        return self._values.shape

    def __eq__(self, other):
        if not isinstance(other, AmplitudeTensor):
            return NotImplemented
        return np.array_equal(self._values, other._values)


def extract_amplitudes(seq: CsiSequence) -> AmplitudeTensor:
    # (P, rx, tx, sub) -> (rx, tx, sub, P)
    return AmplitudeTensor(np.moveaxis(np.abs(seq.values), 0, -1))
