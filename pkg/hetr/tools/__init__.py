"""Basic utilities."""

from .cpu_count import cpu_count, set_n_jobs
from .shaping import (
    CumulativeSeries,
    IncidenceSeries,
    parse_cumulative_csv,
    to_incidence,
    rolling_average,
)
from .window_functions import split_windows
