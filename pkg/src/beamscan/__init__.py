"""Directional 60 GHz channel-sounder simulator and analysis toolkit."""

from .analysis import (
    OmniPdp,
    PathEstimate,
    PathSeries,
    PowerReport,
    TruePathMatch,
    blockage_timeseries,
    correlation_rho,
    detect_los_index,
    detect_nlos_peaks,
    estimate_path,
    estimate_paths,
    extract_rssi,
    ls_direction_find,
    match_bin,
    match_candidates,
    power_report,
    synthesize_omni,
)
from .codebook import (
    AoaAodPair,
    OrientationCase,
    Pac,
    PatternTable,
    combined_gain,
    combined_gain_vector,
    global_to_local,
    load_orientation_cases,
    load_pattern_table,
    local_to_global,
    oriented_pose,
    save_pattern_table,
    synth_codebook,
)
from .raytracer import (
    Interaction,
    RayPath,
    RssiPrediction,
    dump_paths_csv,
    fspl,
    predict_rssi,
    reflection_angle_errors,
    trace_paths,
    visible_paths,
)
from .reports import (
    CaseResult,
    ReferenceRow,
    analyze_case,
    implied_los_power,
    load_reference_table,
    p_prime_db,
    write_blockage_csv,
    write_case_summary_csv,
    write_path_table_csv,
    write_summary_json,
)
from .scene import (
    BlockerTrajectory,
    Environment,
    NodePose,
    Point3,
    Scene,
    Surface,
    blocker_position,
    load_environment,
    save_environment,
)
from .sounder import (
    PdpTensor,
    SimConfig,
    blockage_attenuation,
    delay_to_bin,
    load_tensor,
    save_tensor,
    synthesize_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "AoaAodPair",
    "BlockerTrajectory",
    "CaseResult",
    "Environment",
    "Interaction",
    "NodePose",
    "OmniPdp",
    "OrientationCase",
    "Pac",
    "PathEstimate",
    "PathSeries",
    "PatternTable",
    "PdpTensor",
    "Point3",
    "PowerReport",
    "RayPath",
    "ReferenceRow",
    "RssiPrediction",
    "Scene",
    "SimConfig",
    "Surface",
    "TruePathMatch",
    "analyze_case",
    "blockage_attenuation",
    "blockage_timeseries",
    "blocker_position",
    "combined_gain",
    "combined_gain_vector",
    "correlation_rho",
    "delay_to_bin",
    "detect_los_index",
    "detect_nlos_peaks",
    "dump_paths_csv",
    "estimate_path",
    "estimate_paths",
    "extract_rssi",
    "fspl",
    "global_to_local",
    "implied_los_power",
    "load_environment",
    "load_orientation_cases",
    "load_pattern_table",
    "load_reference_table",
    "load_tensor",
    "local_to_global",
    "ls_direction_find",
    "match_bin",
    "match_candidates",
    "oriented_pose",
    "p_prime_db",
    "power_report",
    "predict_rssi",
    "reflection_angle_errors",
    "save_environment",
    "save_pattern_table",
    "save_tensor",
    "synth_codebook",
    "synthesize_omni",
    "synthesize_tensor",
    "trace_paths",
    "visible_paths",
    "write_blockage_csv",
    "write_case_summary_csv",
    "write_path_table_csv",
    "write_summary_json",
]
