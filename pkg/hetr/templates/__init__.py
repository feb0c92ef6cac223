"""Default run configuration and study regions."""
from hetr.templates.general import (
    default_run_config,
    region_populations,
    study_template,
)

__all__ = ['default_run_config', 'region_populations', 'study_template']
