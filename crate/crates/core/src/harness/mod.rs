//! Running searches: the episode loop, the two comparison methods, mapping
//! and navigation metrics, and benchmark tables.

mod bench;
mod config;
mod episode;
mod metrics;
mod paths;
mod stationary;

pub use bench::{
    house_suite, load_suite, read_results_csv, read_timeseries_csv, run_benchmark, suite_entries, summarize,
    write_results_csv, write_summary_csv, write_timeseries_csv, MetricsReport, ResultRow, SuiteEntry, TimeseriesRow,
    HOUSE_SUITE_TARGET,
};
pub use config::{learned_networks, DetectorSpec, EnvSource, Method, NetworkSource, ScenarioConfig, SensorSpec};
pub use episode::{
    choose_start, run_episode, run_scenario, DetectionRecord, EpisodeLog, EpisodeOutcome, EpisodeRun, GoalRecord,
    PlannerTrace, StepRecord, StopReason, WORK_UNIT_SECONDS,
};
pub use metrics::{
    mapping_metrics, median, shortest_target_distance, spl, spl_term, target_region, MappingSample, SplEpisode,
};
pub use paths::{shortest_path, PathResult};
pub use stationary::{run_stationary, stationary_environment, StationaryConfig, StationaryTrace};
