"""Effect metrics, performance profiles and rank-based significance tests."""

from .metrics import METRICS, abs_error_ate, pehe
from .profiles import ProfileCurve, log_ratios, performance_profile, profiles_to_long_csv
from .stats import (
    Comparison,
    FarReport,
    aligned_ranks,
    chi2_sf,
    far_statistic,
    far_test,
    finner_adjust,
    finner_posthoc,
    format_far_table,
    norm_sf,
    rank_standard_error,
)
from .table import MetricsTable

__all__ = [
    "METRICS",
    "Comparison",
    "FarReport",
    "MetricsTable",
    "ProfileCurve",
    "abs_error_ate",
    "aligned_ranks",
    "chi2_sf",
    "far_statistic",
    "far_test",
    "finner_adjust",
    "finner_posthoc",
    "format_far_table",
    "log_ratios",
    "norm_sf",
    "pehe",
    "performance_profile",
    "profiles_to_long_csv",
    "rank_standard_error",
]
