"""Reshape case-count data into daily incidence series."""
import io
import json
import hashlib
from dataclasses import dataclass
import numpy as np
import pandas as pd
from hetr.tools.exceptions import (
    RegionNotFoundError,
    MalformedRowError,
    NonContiguousDatesError,
    SeriesTooShortError,
)

# wide JHU-style files label rows with one of these, most general first
label_columns = [
    'country/region',
    'country_region',
    'province/state',
    'province_state',
    'admin2',
    'combined_key',
    'region',
]


def _check_daily_index(index):
    if len(index) > 1:
        steps = np.diff(index.values).astype('timedelta64[D]').astype(int)
        if (steps != 1).any():
            raise NonContiguousDatesError(
                "dates must increase by exactly one day, found gaps or repeats"
            )


@dataclass(frozen=True, eq=False)
class CumulativeSeries:
    """Cumulative confirmed cases of one region.

    Args:
        region (str): label of the region
        cumulative (pd.Series): non-negative integer totals on a daily DatetimeIndex
    """

    region: str
    cumulative: pd.Series

    def __post_init__(self):
        if not isinstance(self.cumulative.index, pd.DatetimeIndex):
            raise ValueError("cumulative must be indexed by a DatetimeIndex")
        _check_daily_index(self.cumulative.index)
        if (self.cumulative < 0).any():
            raise MalformedRowError("cumulative counts must be non-negative")

    @property
    def dates(self):
        return self.cumulative.index

    def __len__(self):
        return len(self.cumulative)


@dataclass(frozen=True, eq=False)
class IncidenceSeries:
    """Daily new cases of one region, the data currency of the package.

    Args:
        region (str): label of the region
        incidence (pd.Series): non-negative daily values on a daily DatetimeIndex,
            real valued once smoothed
        population (int): region population, needed only for population-capped simulation
    """

    region: str
    incidence: pd.Series
    population: int = None

    def __post_init__(self):
        if not isinstance(self.incidence.index, pd.DatetimeIndex):
            raise ValueError("incidence must be indexed by a DatetimeIndex")
        _check_daily_index(self.incidence.index)
        if (self.incidence.to_numpy() < 0).any():
            raise ValueError("incidence must be non-negative")
        if self.population is not None and int(self.population) <= 0:
            raise ValueError("population must be a positive integer")

    def __len__(self):
        return len(self.incidence)

    def __repr__(self):
        start = "no dates" if self.start_date is None else f"from {self.start_date.date()}"
        return f"IncidenceSeries({self.region}, {len(self)} days {start}, population={self.population})"

    @property
    def values(self):
        return self.incidence.to_numpy(dtype=float)

    @property
    def dates(self):
        return self.incidence.index

    @property
    def start_date(self):
        return self.incidence.index[0] if len(self) > 0 else None

    def iloc(self, start: int, stop: int):
        """Positional slice keeping region and population."""
        return IncidenceSeries(
            self.region, self.incidence.iloc[start:stop], self.population
        )

    def tail(self, n: int):
        return self.iloc(max(len(self) - n, 0), len(self))

    def with_population(self, population):
        return IncidenceSeries(self.region, self.incidence, population)

    def to_dict(self):
        return {
            'region': self.region,
            'start_date': None
            if self.start_date is None
            else self.start_date.strftime('%Y-%m-%d'),
            'incidence': [float(x) for x in self.values],
            'population': None if self.population is None else int(self.population),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1)

    def digest(self):
        """sha256 of the canonical JSON, identifies a fitted window."""
        payload = json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha256(payload).hexdigest()

    @classmethod
    def from_dict(cls, record: dict):
        values = record.get('incidence', [])
        index = pd.date_range(
            start=record.get('start_date') or '1970-01-01', periods=len(values), freq='D'
        )
        population = record.get('population')
        return cls(
            region=record['region'],
            incidence=pd.Series(np.asarray(values, dtype=float), index=index),
            population=None if population is None else int(population),
        )

    @classmethod
    def from_json(cls, text: str):
        return cls.from_dict(json.loads(text))

    @classmethod
    def read_json(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            return cls.from_json(f.read())


def _parse_date_columns(columns):
    """Map header labels in month/day/year form to Timestamps, NaT otherwise."""
    labels = pd.Index([str(c).strip() for c in columns])
    parsed = pd.to_datetime(labels, format='%m/%d/%y', errors='coerce')
    four_digit = pd.to_datetime(labels, format='%m/%d/%Y', errors='coerce')
    parsed = parsed.where(~parsed.isna(), four_digit)
    return parsed


def parse_cumulative_csv(raw_text: str, region: str):
    """Read a wide cumulative case-count CSV and total the rows of one region.

    Rows are matched on the first label column (country, then province, then county)
    holding the region name; all matching rows are summed.

    Args:
        raw_text (str): CSV text with label columns and one column per date (m/d/yy)
        region (str): name to match

    Returns:
        CumulativeSeries
    """
    df = pd.read_csv(io.StringIO(raw_text), dtype=str, keep_default_na=False)
    parsed = _parse_date_columns(df.columns)
    date_mask = ~parsed.isna()
    if not date_mask.any():
        raise MalformedRowError("header has no month/day/year date columns")
    date_cols = df.columns[date_mask]
    dates = pd.DatetimeIndex(parsed[date_mask])

    lower_names = {str(c).strip().lower(): c for c in df.columns[~date_mask]}
    candidates = [lower_names[x] for x in label_columns if x in lower_names]
    if not candidates:
        # headerless label layout: every non-date column is a label
        candidates = list(df.columns[~date_mask])
    target = str(region).strip().casefold()
    rows = None
    for col in candidates:
        match = df[col].astype(str).str.strip().str.casefold() == target
        if match.any():
            rows = df.loc[match, date_cols]
            break
    if rows is None:
        raise RegionNotFoundError(f"region '{region}' not found in any label column")

    numeric = rows.apply(lambda col: pd.to_numeric(col.str.strip(), errors='coerce'))
    bad = numeric.isna().any(axis=1) | (numeric < 0).any(axis=1)
    if bad.any():
        raise MalformedRowError(
            f"non-numeric or negative cell in row(s) {list(numeric.index[bad] + 2)}"
        )
    totals = pd.Series(numeric.sum(axis=0).to_numpy(), index=dates)
    totals = totals.sort_index()
    _check_daily_index(totals.index)
    return CumulativeSeries(region=region, cumulative=totals.round().astype(np.int64))


def to_incidence(c: CumulativeSeries, population: int = None):
    """First differences of cumulative counts, negative corrections thresholded to 0.

    The first day keeps the first cumulative value.
    """
    if len(c) < 2:
        raise SeriesTooShortError("need at least 2 days of cumulative counts")
    values = c.cumulative.to_numpy(dtype=float)
    daily = np.diff(values, prepend=0.0)
    daily = np.where(daily < 0, 0.0, daily)
    return IncidenceSeries(
        region=c.region,
        incidence=pd.Series(daily, index=c.dates),
        population=population,
    )


def to_cumulative(s: IncidenceSeries):
    """Running total of an incidence series (inverse of to_incidence on clean data)."""
    totals = s.incidence.cumsum().round().astype(np.int64)
    return CumulativeSeries(region=s.region, cumulative=totals)


def rolling_average(s: IncidenceSeries, window: int = 7):
    """Trailing mean over the last `window` days, shorter at the head of the series."""
    if int(window) < 1:
        raise ValueError("window must be >= 1")
    if int(window) == 1:
        return s
    smooth = s.incidence.rolling(int(window), min_periods=1).mean()
    # rolling sums can leave -1e-13 style residue
    smooth = smooth.clip(lower=0.0)
    return IncidenceSeries(region=s.region, incidence=smooth, population=s.population)


def preprocess(raw_text: str, region: str, population: int = None, window: int = 7):
    """Cumulative CSV text to smoothed daily incidence, smoothing the whole series."""
    cumulative = parse_cumulative_csv(raw_text, region)
    return rolling_average(to_incidence(cumulative, population=population), window)
