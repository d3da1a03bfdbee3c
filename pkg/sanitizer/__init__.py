from .condense import AmplitudeMatrix, amplitude_matrix, condense
from .hampel import HampelConfig, hampel_filter, hampel_outliers, local_statistics, sanitize
