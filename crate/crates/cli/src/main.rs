use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use semsearch::harness::{
    house_suite, load_suite, run_benchmark, run_scenario, summarize, write_results_csv, write_summary_csv,
    write_timeseries_csv, Method, MetricsReport, ResultRow, ScenarioConfig,
};
use semsearch::world::{generate_house, HouseSpec};

#[derive(Parser)]
#[command(
    name = "semsearch",
    version,
    about = "Semantic object search on synthetic indoor worlds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write results.csv, metrics_timeseries.csv and
    /// episode.log.json into the output directory.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's method.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every scenario of a suite directory under each method.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "ours,fess,ours-ns")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 5)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write a procedurally generated house as an environment document.
    GenEnv {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        rooms: usize,
        #[arg(long, default_value_t = 40)]
        objects: usize,
        /// Nominal room width in cells.
        #[arg(long, default_value_t = 14)]
        room_cells: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the generated house benchmark as a suite directory.
    GenSuite {
        #[arg(long, default_value_t = 20)]
        houses: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            method,
            out,
        } => run(&scenario, seed, method, &out),
        Command::Bench {
            suite,
            methods,
            episodes,
            out,
            threads,
        } => bench(&suite, &methods, episodes, &out, threads),
        Command::GenEnv {
            seed,
            rooms,
            objects,
            room_cells,
            out,
        } => {
            let spec = HouseSpec {
                rooms,
                objects,
                room_cells,
                ..HouseSpec::default()
            };
            let env = generate_house(seed, &spec)?;
            fs::write(&out, env.to_json()).with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{}: {}x{} cells, {} rooms, {} objects",
                out.display(),
                env.map.width(),
                env.map.height(),
                rooms,
                env.objects.len()
            );
            Ok(())
        }
        Command::GenSuite { houses, out } => {
            fs::create_dir_all(&out)?;
            for c in house_suite(houses) {
                let path = out.join(format!("{}.json", c.name));
                fs::write(&path, serde_json::to_string_pretty(&c)?)?;
            }
            println!("{} scenarios in {}", houses, out.display());
            Ok(())
        }
    }
}

fn run(scenario: &Path, seed: Option<u64>, method: Option<Method>, out: &Path) -> Result<()> {
    let text = fs::read_to_string(scenario).with_context(|| format!("reading {}", scenario.display()))?;
    let mut config = ScenarioConfig::from_json(&text).with_context(|| format!("parsing {}", scenario.display()))?;
    if config.name.is_empty() {
        config.name = scenario
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(m) = method {
        config.method = m;
    }
    let base = scenario.parent().unwrap_or(Path::new("."));
    let run = run_scenario(&config, base)?;
    fs::create_dir_all(out)?;
    write_results_csv(&out.join("results.csv"), &[ResultRow::from_run(&run)])?;
    write_timeseries_csv(&out.join("metrics_timeseries.csv"), &run.timeseries)?;
    fs::write(out.join("episode.log.json"), run.log.to_json())?;
    // measured, so not reproducible
    fs::write(
        out.join("wall_time.json"),
        serde_json::to_string_pretty(&serde_json::json!({ "planning_wall_s": run.wall_planning_s }))?,
    )?;
    let o = &run.log.outcome;
    println!(
        "{} seed {} {}: {:?} after {} steps, path {:.2} m, spl {:.3}, planning {:.3} s",
        config.name, config.seed, config.method, o.reason, o.steps_used, o.path_length_m, o.spl, o.planning_time_s
    );
    Ok(())
}

fn bench(suite: &Path, methods: &[Method], episodes: usize, out: &Path, threads: Option<usize>) -> Result<()> {
    if episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let entries = load_suite(suite).with_context(|| format!("loading suite {}", suite.display()))?;
    if entries.is_empty() {
        bail!("no scenario files in {}", suite.display());
    }
    let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    eprintln!(
        "{} scenarios x {} methods x {} episodes on {} threads",
        entries.len(),
        methods.len(),
        episodes,
        threads
    );
    let runs = run_benchmark(&entries, methods, episodes, threads)?;
    let rows: Vec<ResultRow> = runs.iter().map(ResultRow::from_run).collect();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_results_csv(out, &rows)?;
    let reports = summarize(&rows);
    write_summary_csv(&out.with_extension("summary.csv"), &reports)?;
    print_table(&reports);
    Ok(())
}

fn print_table(reports: &[MetricsReport]) {
    println!(
        "{:<8} {:>8} {:>8} {:>14} {:>8} {:>12}",
        "method", "episodes", "success", "path length m", "spl", "planning s"
    );
    for r in reports {
        println!(
            "{:<8} {:>8} {:>8.2} {:>14.2} {:>8.3} {:>12.3}",
            r.method.name(),
            r.episodes,
            r.success_rate,
            r.mean_path_length_m,
            r.spl,
            r.mean_planning_time_s
        );
    }
}
