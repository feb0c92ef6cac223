"""
Diagnostics, fit metrics, summaries and experiments
"""
from hetr.evaluator.diagnostics import Diagnostics, diagnose
from hetr.evaluator.metrics import FitMetrics, predictive_ordinates, envelope_coverage
from hetr.evaluator.summary import r_law_summary
