//! Batches of episodes, result tables and CSV files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::{EnvSource, Method, ScenarioConfig};
use super::episode::{run_episode, EpisodeRun};
use super::metrics::MappingSample;
use crate::error::Result;
use crate::semantics::BayesianNetwork;
use crate::world::Environment;

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: Method,
    pub success: bool,
    pub path_length_m: f64,
    pub spl: f64,
    pub planning_time_s: f64,
    pub scenario: String,
    pub seed: u64,
}

impl ResultRow {
    pub fn from_run(run: &EpisodeRun) -> Self {
        let log = &run.log;
        ResultRow {
            method: log.method,
            success: log.outcome.success,
            path_length_m: log.outcome.path_length_m,
            spl: log.outcome.spl,
            planning_time_s: log.outcome.planning_time_s,
            scenario: log.scenario.clone(),
            seed: log.seed,
        }
    }
}

/// Per-method aggregate over a set of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: Method,
    pub episodes: usize,
    pub success_rate: f64,
    pub mean_path_length_m: f64,
    pub spl: f64,
    pub mean_planning_time_s: f64,
}

pub fn summarize(rows: &[ResultRow]) -> Vec<MetricsReport> {
    let mut by: BTreeMap<Method, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        by.entry(r.method).or_default().push(r);
    }
    by.into_iter()
        .map(|(method, rs)| {
            let n = rs.len() as f64;
            let mean = |f: &dyn Fn(&ResultRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            MetricsReport {
                method,
                episodes: rs.len(),
                success_rate: mean(&|r| f64::from(u8::from(r.success))),
                mean_path_length_m: mean(&|r| r.path_length_m),
                spl: mean(&|r| r.spl),
                mean_planning_time_s: mean(&|r| r.planning_time_s),
            }
        })
        .collect()
}

/// A scenario with its world and networks loaded.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub config: ScenarioConfig,
    pub env: Environment,
    pub networks: Vec<BayesianNetwork>,
}

/// Target class of the generated house suite.
pub const HOUSE_SUITE_TARGET: &str = "towel";

/// Scenarios for `houses` generated houses, one per house, all searching
/// for a towel. Rooms are 14 cells wide, frontier edges of three cells
/// count, and rooms without evidence get a prior of 0.3.
pub fn house_suite(houses: u64) -> Vec<ScenarioConfig> {
    (0..houses)
        .map(|h| {
            let mut c = ScenarioConfig::new(
                EnvSource::Generated {
                    seed: h,
                    rooms: 6,
                    objects: 40,
                    room_cells: 14,
                },
                HOUSE_SUITE_TARGET,
            );
            c.name = format!("house{h:02}");
            c.min_edge_size = 3;
            c.fallback_prior = 0.3;
            c.seed = 100 * h;
            c
        })
        .collect()
}

/// Resolves environments and networks for in-memory scenarios.
pub fn suite_entries(configs: Vec<ScenarioConfig>, base: &Path) -> Result<Vec<SuiteEntry>> {
    configs
        .into_iter()
        .map(|config| {
            config.validate()?;
            let env = config.load_environment(base)?;
            let networks = config.load_networks(base)?;
            Ok(SuiteEntry { config, env, networks })
        })
        .collect()
}

/// Every scenario file (`*.json` that parses as a scenario) in `dir`, by
/// file name.
pub fn load_suite(dir: &Path) -> Result<Vec<SuiteEntry>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        let Ok(mut config) = ScenarioConfig::from_json(&text) else {
            continue;
        };
        if config.name.is_empty() {
            config.name = f
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
        }
        let env = config.load_environment(dir)?;
        let networks = config.load_networks(dir)?;
        out.push(SuiteEntry { config, env, networks });
    }
    Ok(out)
}

/// Runs `episodes` seeds of every scenario under every method. Episode `k`
/// of a scenario uses seed `config.seed + k` for all methods, so methods
/// share start positions. Results come back in (scenario, method, episode)
/// order regardless of `threads`.
pub fn run_benchmark(
    suite: &[SuiteEntry],
    methods: &[Method],
    episodes: usize,
    threads: usize,
) -> Result<Vec<EpisodeRun>> {
    let mut jobs = Vec::new();
    for (i, entry) in suite.iter().enumerate() {
        for &m in methods {
            for k in 0..episodes {
                let mut c = entry.config.clone();
                c.method = m;
                c.seed = entry.config.seed.wrapping_add(k as u64);
                jobs.push((i, c));
            }
        }
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<EpisodeRun>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1) {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some((i, config)) = jobs.get(j) else { break };
                let entry = &suite[*i];
                let run = run_episode(config, &entry.env, &entry.networks);
                results.lock().expect("result slots")[j] = Some(run);
            });
        }
    });
    results
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_summary_csv(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of `metrics_timeseries.csv`; metric columns are empty before the
/// first object is mapped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesRow {
    pub step: usize,
    pub median_err: Option<f64>,
    pub mean_err: Option<f64>,
    pub cross_entropy: Option<f64>,
    pub class_entropy: Option<f64>,
    pub a_opt: Option<f64>,
    pub d_opt: Option<f64>,
    pub e_opt: Option<f64>,
    pub n_objects: usize,
}

impl TimeseriesRow {
    pub fn new(step: usize, s: Option<&MappingSample>) -> Self {
        TimeseriesRow {
            step,
            median_err: s.map(|s| s.median_err),
            mean_err: s.map(|s| s.mean_err),
            cross_entropy: s.map(|s| s.cross_entropy),
            class_entropy: s.map(|s| s.class_entropy),
            a_opt: s.map(|s| s.a_opt),
            d_opt: s.map(|s| s.d_opt),
            e_opt: s.map(|s| s.e_opt),
            n_objects: s.map_or(0, |s| s.n_objects),
        }
    }
}

pub fn write_timeseries_csv(path: &Path, series: &[(usize, Option<MappingSample>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (step, s) in series {
        w.serialize(TimeseriesRow::new(*step, s.as_ref()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_timeseries_csv(path: &Path) -> Result<Vec<TimeseriesRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
