"""Text metrics, paired significance tests, win counting and radar data."""
from .external import fetch_external_scores, read_external_scores
from .metrics import (
    METRICS,
    accuracy,
    bleu4,
    lcs_length,
    meteor_simplified,
    rouge_l,
    score_pairs,
    tokenize,
)
from .scores import (
    CellTest,
    RadarPoint,
    ScoreRow,
    ScoreTable,
    WinReport,
    count_significant_wins,
    normalize_radar,
    radar_csv,
    rank_models,
)
from .stats import PairedTTestResult, betainc, paired_ttest, t_cdf, t_sf2

__all__ = [
    "fetch_external_scores", "read_external_scores",
    "METRICS", "accuracy", "bleu4", "lcs_length", "meteor_simplified", "rouge_l",
    "score_pairs", "tokenize",
    "CellTest", "RadarPoint", "ScoreRow", "ScoreTable", "WinReport",
    "count_significant_wins", "normalize_radar", "radar_csv", "rank_models",
    "PairedTTestResult", "betainc", "paired_ttest", "t_cdf", "t_sf2",
]
