"""Evaluation harness: comparisons, heatmaps, full reproduction bundle."""

from .compare import (
    ComparisonReport,
    PairwiseDelta,
    PolicyStats,
    bootstrap_mean_ci,
    compare,
    evaluate_policies,
    intervals_overlap,
)
from .heatmap import (
    S_FA_VALUES,
    S_T_VALUES,
    export_heatmap,
    heatmap_grid,
    read_heatmap_csv,
    render_heatmap_svg,
    shaping_contrast,
    write_heatmap_csv,
)
from .reproduce import reproduce

__all__ = [
    "ComparisonReport",
    "PairwiseDelta",
    "PolicyStats",
    "S_FA_VALUES",
    "S_T_VALUES",
    "bootstrap_mean_ci",
    "compare",
    "evaluate_policies",
    "export_heatmap",
    "heatmap_grid",
    "intervals_overlap",
    "read_heatmap_csv",
    "render_heatmap_svg",
    "reproduce",
    "shaping_contrast",
    "write_heatmap_csv",
]
