"""Autoencoder drift detection and novelty recognition for tabular streams."""

from ._core import (
    Autoencoder,
    CentroidNovelty,
    ChunkVerdict,
    ClassificationReport,
    DetectionLog,
    Detector,
    DetectorConfig,
    EventType,
    GroundTruth,
    KdeModel,
    KsddDetector,
    Stream,
    StreamConfig,
    StreamEvent,
    TrainConfig,
    TrainLoss,
    TTestResult,
    __version__,
    classification_metrics,
    d1,
    d2,
    event_schedule,
    export_stream_csv,
    generate_stream,
    kde_fit,
    kde_score,
    ks_two_sample,
    one_sided_t_test,
    r_measure,
    read_stream,
    student_t_cdf,
    subsample,
    write_stream,
)

__all__ = [
    "Autoencoder",
    "CentroidNovelty",
    "ChunkVerdict",
    "ClassificationReport",
    "DetectionLog",
    "Detector",
    "DetectorConfig",
    "EventType",
    "GroundTruth",
    "KdeModel",
    "KsddDetector",
    "Stream",
    "StreamConfig",
    "StreamEvent",
    "TrainConfig",
    "TrainLoss",
    "TTestResult",
    "__version__",
    "classification_metrics",
    "d1",
    "d2",
    "event_schedule",
    "export_stream_csv",
    "generate_stream",
    "kde_fit",
    "kde_score",
    "ks_two_sample",
    "one_sided_t_test",
    "r_measure",
    "read_stream",
    "student_t_cdf",
    "subsample",
    "write_stream",
]
