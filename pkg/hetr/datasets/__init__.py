"""
Case-count snapshots and synthetic datasets
"""
from hetr.datasets._base import (
    snapshot_path,
    load_cumulative_csv,
    load_synthetic,
)

__all__ = ['snapshot_path', 'load_cumulative_csv', 'load_synthetic']
