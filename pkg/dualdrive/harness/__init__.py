from .bench import bench, bench_dual_pipeline, bench_frames
from .closed_loop import (
    SCENARIOS,
    TABLE_SCENARIOS,
    ConstantDriver,
    LeadSpawn,
    ModelDriver,
    OracleDriver,
    ScenarioSpec,
    autonomy,
    get_scenario,
    run_closed_loop,
    run_table,
)
from .evaluate import (
    OfflineMetrics,
    constant_baseline,
    evaluate_offline,
    mirror_consistency,
)
from .gen_data import DataGenConfig, generate_dataset
from .report import (
    BenchReport,
    DualPipelineReport,
    EvalReport,
    ModelBench,
    ReportDeserializeError,
    ScenarioResult,
    TrainingHistory,
    deserialize_report,
    serialize_report,
)
from .train import TrainConfig, TrainingDivergedError, TrainResult, train
