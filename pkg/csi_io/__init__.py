from .amplitude_csv import export_amplitude_csv, read_amplitude_csv
from .csib import (
    HEADER_SIZE,
    load_csib,
    quantize_cfr,
    read_csib,
    save_csib,
    write_csib,
)
