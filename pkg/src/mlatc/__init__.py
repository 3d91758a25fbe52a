"""Streaming topological mapping with a layered nearest-neighbor index.

The package learns a sparse graph over a 3D point stream one sample at a
time. The flat learner scans every node per sample; the layered learner
stacks coarser maps over the base one so the scan shrinks to a few
candidate lists, while layer 1 stays the flat learner's map. A cost model
predicts the layer factor that balances descent width against depth, and
the benchmark harness measures both learners on synthetic or recorded
frame streams.
"""

from .bench import (
    DriftReport,
    FrameMetrics,
    OracleReport,
    RunResult,
    RunSpec,
    SweepRow,
    alpha_sweep,
    drift_audit,
    fit,
    oracle_check,
    run_benchmark,
)
from .config import (
    LearnerConfig,
    layer_vigilance,
    search_threshold,
    search_thresholds,
)
from .flat import FlatLearner, InputPoint, OutcomeKind, StepOutcome, WinnerPair
from .graph import (
    AgeStats,
    EdgeRecord,
    GraphContractError,
    InsufficientStatistics,
    LayerGraph,
    MultiLayerMap,
    NodeRecord,
)
from .hierarchy import MlatcLearner, WinnerSets, hierarchical_nns
from .mapio import export_map, import_map, map_to_doc
from .streams import (
    Frame,
    StreamFormatError,
    SyntheticStreamConfig,
    load_frame_file,
    save_frame_file,
    synthetic_frame,
)

__version__ = "0.1.0"

__all__ = [
    "AgeStats",
    "DriftReport",
    "EdgeRecord",
    "FlatLearner",
    "Frame",
    "FrameMetrics",
    "GraphContractError",
    "InputPoint",
    "InsufficientStatistics",
    "LayerGraph",
    "LearnerConfig",
    "MlatcLearner",
    "MultiLayerMap",
    "NodeRecord",
    "OracleReport",
    "OutcomeKind",
    "RunResult",
    "RunSpec",
    "StepOutcome",
    "StreamFormatError",
    "SweepRow",
    "SyntheticStreamConfig",
    "WinnerPair",
    "WinnerSets",
    "alpha_sweep",
    "drift_audit",
    "export_map",
    "fit",
    "hierarchical_nns",
    "import_map",
    "layer_vigilance",
    "load_frame_file",
    "map_to_doc",
    "oracle_check",
    "run_benchmark",
    "save_frame_file",
    "search_threshold",
    "search_thresholds",
    "synthetic_frame",
    "__version__",
]
