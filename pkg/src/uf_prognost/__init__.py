"""Explainable similarity-based remaining-useful-life estimation for UF membranes."""

from .config import ColumnMapping, ConfigError, DataError, HealthWeights, PipelineConfig
from .evaluation import EvalReport, chronological_split, compute_metrics, run_evaluation, stratify
from .features import (
    CycleFeatures,
    NormalizedCycle,
    aggregate_cycle,
    compute_recovery,
    compute_resistance,
    compute_tmp,
    normalize_run,
    viscosity_correction,
)
from .fuzzy import FuzzyPartition, FuzzySignature, encode_signature, make_uniform_partition, membership
from .ingest import SensorRecord, SensorSeries, parse_sensor_csv, validate_series
from .prognosis import (
    ExemplarLibrary,
    Match,
    MinedRule,
    Prediction,
    build_library,
    explain,
    jaccard_similarity,
    mine_rule,
    predict,
    predict_rul,
    prediction_interval,
    retrieve_top_k,
)
from .segmentation import Run, detect_backwash_events, group_runs, label_rul, segment_cycles, segment_series
from .simulate import ScenarioConfig, generate_scenario, standard_fixture

__version__ = "0.1.0"
