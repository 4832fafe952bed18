from .config import TrainConfig, Objective, LambdaPlacement, LambdaMode, ProgressScope, SupervisionSignal
from .metrics import (
    MetricsRecord, Phase, EvalReport, METRIC_NAMES, OPEN_SET_METRICS,
    component_metric_name, format_metrics_log, parse_metrics_log, is_known_metric,
)
from .manifest import RunManifest, ArtifactPaths
from .sweep import SweepSpec, SweepKnob, KnobTarget, DatasetSpec, DatasetKind
