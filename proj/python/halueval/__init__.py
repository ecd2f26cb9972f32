"""Hallucination detection and evaluation toolkit."""

from ._core import (
    ConsistencyJudgment,
    Dataset,
    Error,
    GoldLabel,
    JudgeConfig,
    Label,
    MetricsReport,
    Sample,
    Task,
    aggregate_segments,
    baseline_score,
    classify,
    compute_cdf,
    convert_halueval,
    decompose_qa,
    default_grid,
    evaluate,
    fabrication_anchors,
    ingest_dataset,
    judge_sample,
    length_stats,
    metrics_from_counts,
    non_fabrication_check,
    parse_dataset,
    retrieve,
    segment_summary,
    split_sentences,
    subsample,
    sweep_threshold,
    tokenize,
)

__all__ = [
    "ConsistencyJudgment",
    "Dataset",
    "Error",
    "GoldLabel",
    "JudgeConfig",
    "Label",
    "MetricsReport",
    "Sample",
    "Task",
    "aggregate_segments",
    "baseline_score",
    "classify",
    "compute_cdf",
    "convert_halueval",
    "decompose_qa",
    "default_grid",
    "evaluate",
    "fabrication_anchors",
    "ingest_dataset",
    "judge_sample",
    "length_stats",
    "metrics_from_counts",
    "non_fabrication_check",
    "parse_dataset",
    "retrieve",
    "segment_summary",
    "split_sentences",
    "subsample",
    "sweep_threshold",
    "tokenize",
]
