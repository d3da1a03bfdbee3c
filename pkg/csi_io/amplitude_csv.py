import io
import logging

import numpy as np
import pandas as pd

from errors import FormatError
from sanitizer import AmplitudeMatrix

logger = logging.getLogger("CsiIO")


def export_amplitude_csv(a: AmplitudeMatrix) -> str:
    """One row per packet, one column per subcarrier, header k0..k{K-1}."""
    frame = pd.DataFrame(a.values, columns=[f"k{k}" for k in range(a.n_sub)])
    return frame.to_csv(index=False, float_format="%.6f", lineterminator="\n")


def read_amplitude_csv(text: str) -> AmplitudeMatrix:
    try:
        frame = pd.read_csv(io.StringIO(text), dtype=np.float64)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"could not parse amplitude CSV: {e}") from e

    expected = [f"k{k}" for k in range(frame.shape[1])]
    if list(frame.columns) != expected:
        raise FormatError(f"amplitude CSV header must be {','.join(expected)}, got {','.join(frame.columns)}")
    if frame.empty:
        raise FormatError("amplitude CSV has no packet rows")
    return AmplitudeMatrix(frame.to_numpy())
