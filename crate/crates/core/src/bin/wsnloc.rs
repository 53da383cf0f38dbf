use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wsnloc::config::{ConfigLayer, RunConfig, OUT_DIR_ENV};
use wsnloc::experiments::{self, Method, Scenario, ScenarioReport};
use wsnloc::network::Deployment;
use wsnloc::report::{self, Summary};

#[derive(Parser)]
#[command(name = "wsnloc", version, about = "WSN node localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare localization methods over repeated random deployments.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write each run's deployment as JSON under deployments/.
        #[arg(long)]
        save_deployments: bool,
    },
    /// Mean best-fitness curves of the swarm methods.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Run methods on a saved deployment and write per-node estimates.
    Replay {
        /// Deployment JSON file.
        deployment: PathBuf,
        /// Use the seed of run R under --seed, as `run` does, instead of
        /// --seed itself.
        #[arg(long, value_name = "R")]
        run: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config file, or the manifest.json of an earlier invocation.
    /// Flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    layer: ConfigLayer,
}

/// Written next to every set of outputs. Passing it back through
/// `--config` reproduces the CSV files exactly.
#[derive(Serialize, Deserialize)]
struct Manifest {
    version: String,
    command: String,
    config: ConfigLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    replay: Option<ReplayInfo>,
    resolved: Vec<RunConfig>,
    /// SHA-256 of every file written, keyed by path relative to the output
    /// directory.
    artifacts: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct ReplayInfo {
    deployment: PathBuf,
    deployment_hash: String,
    run: Option<usize>,
    run_seed: u64,
}

/// Errors the user can fix by changing the invocation.
fn is_config_error(e: &anyhow::Error) -> bool {
    matches!(
        e.downcast_ref::<wsnloc::Error>(),
        Some(wsnloc::Error::Config(_) | wsnloc::Error::InvalidParams(_) | wsnloc::Error::InvalidDeployment(_))
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_config_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Run { common, save_deployments } => cmd_run(&common, save_deployments),
        Command::Convergence { common } => cmd_convergence(&common),
        Command::Replay { deployment, run, common } => cmd_replay(&deployment, run, &common),
    }
}

/// Environment, then file, then flags. Also returns the file's replay run
/// index when the file is a replay manifest.
fn merged_layer(common: &Common) -> anyhow::Result<(ConfigLayer, Option<usize>)> {
    let env = ConfigLayer {
        out: std::env::var_os(OUT_DIR_ENV).map(PathBuf::from),
        ..ConfigLayer::default()
    };
    let (file, run) = match &common.config {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| wsnloc::Error::Config(format!("{}: {e}", path.display())))?;
            (m.config, m.replay.and_then(|r| r.run))
        }
        Some(path) => (ConfigLayer::from_file(path)?, None),
        None => (ConfigLayer::default(), None),
    };
    Ok((env.overlay(&file).overlay(&common.layer), run))
}

/// One resolved config per scenario; `--scenario all` expands to the four
/// presets with the remaining fields applied to each.
fn resolve_all(layer: &ConfigLayer) -> anyhow::Result<Vec<RunConfig>> {
    if layer.scenario.as_deref().is_some_and(|s| s.eq_ignore_ascii_case("all")) {
        Scenario::presets()
            .into_iter()
            .map(|p| {
                let l = ConfigLayer { scenario: Some(p.name), ..layer.clone() };
                Ok(RunConfig::resolve(&l)?)
            })
            .collect()
    } else {
        Ok(vec![RunConfig::resolve(layer)?])
    }
}

/// The layer recorded in a manifest: fully resolved for a single scenario,
/// otherwise the merged layer as given.
fn manifest_layer(layer: &ConfigLayer, configs: &[RunConfig]) -> ConfigLayer {
    match configs {
        [one] => one.to_layer(),
        _ => layer.clone(),
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `files` under `dir`, then the manifest. On any failure every file
/// already written is removed.
fn commit(dir: &Path, files: Vec<(String, Vec<u8>)>, mut manifest: Manifest) -> anyhow::Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> anyhow::Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            written.push(path);
            manifest.artifacts.insert(name.clone(), sha256_hex(bytes));
        }
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)?;
        fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result
}

fn run_reports(configs: &[RunConfig]) -> anyhow::Result<Vec<ScenarioReport>> {
    let mut reports = Vec::with_capacity(configs.len());
    for (i, c) in configs.iter().enumerate() {
        let names: Vec<_> = c.methods.iter().map(|m| m.name()).collect();
        eprintln!(
            "[{}/{}] {}: {} runs of {} ...",
            i + 1,
            configs.len(),
            c.scenario.name,
            c.scenario.n_runs,
            names.join(",")
        );
        let start = Instant::now();
        let rep = experiments::run_scenario(&c.scenario, &c.methods, c.master_seed, &c.settings)?;
        eprintln!("[{}/{}] {}: done in {:.1} s", i + 1, configs.len(), c.scenario.name, start.elapsed().as_secs_f64());
        reports.push(rep);
    }
    Ok(reports)
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn new_manifest(command: &str, config: ConfigLayer, resolved: Vec<RunConfig>) -> Manifest {
    Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config,
        replay: None,
        resolved,
        artifacts: BTreeMap::new(),
    }
}

fn cmd_run(common: &Common, save_deployments: bool) -> anyhow::Result<()> {
    let (layer, _) = merged_layer(common)?;
    let configs = resolve_all(&layer)?;
    let reports = run_reports(&configs)?;
    let summary = Summary::new(&reports)?;

    let mut files = vec![
        ("runs.csv".to_string(), csv_bytes(|b| report::write_runs_csv(&reports, b))?),
        ("convergence.csv".to_string(), csv_bytes(|b| report::write_convergence_csv(&reports, b))?),
        ("summary.json".to_string(), (summary.to_json() + "\n").into_bytes()),
    ];
    if save_deployments {
        for c in &configs {
            for r in 0..c.scenario.n_runs {
                let d = c.scenario.deploy(experiments::run_seed(c.master_seed, r))?;
                files.push((format!("deployments/{}/run-{r:03}.json", c.scenario.name), (d.to_json() + "\n").into_bytes()));
            }
        }
    }
    let out_dir = configs[0].out_dir.clone();
    commit(&out_dir, files, new_manifest("run", manifest_layer(&layer, &configs), configs))?;
    print!("{}", summary.table());
    Ok(())
}

fn cmd_convergence(common: &Common) -> anyhow::Result<()> {
    let (mut layer, _) = merged_layer(common)?;
    match &layer.methods {
        Some(list) => {
            for m in list {
                if m.parse::<Method>()? == Method::DvHop {
                    bail!(wsnloc::Error::Config("convergence: dvhop has no iterative trace".into()));
                }
            }
        }
        None => layer.methods = Some(Method::SWARM.iter().map(|m| m.name().to_string()).collect()),
    }
    let configs = resolve_all(&layer)?;
    let reports = run_reports(&configs)?;
    let csv = csv_bytes(|b| report::write_convergence_csv(&reports, b))?;
    let out_dir = configs[0].out_dir.clone();
    commit(
        &out_dir,
        vec![("convergence.csv".to_string(), csv)],
        new_manifest("convergence", manifest_layer(&layer, &configs), configs),
    )?;

    println!("{:<12}{:<12}{:>16}{:>16}", "scenario", "method", "first", "last");
    for rep in &reports {
        for &m in &rep.methods {
            let curve = rep.convergence(m);
            let (Some(first), Some(last)) = (curve.first(), curve.last()) else { continue };
            println!("{:<12}{:<12}{first:>16.4}{last:>16.4}", rep.scenario.name, m.name());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ReplaySummary {
    deployment_hash: String,
    run_seed: u64,
    methods: BTreeMap<Method, ReplayMethod>,
}

#[derive(Serialize)]
struct ReplayMethod {
    avg_error: Option<f64>,
    localized: usize,
    skipped: usize,
}

fn cmd_replay(path: &Path, run: Option<usize>, common: &Common) -> anyhow::Result<()> {
    let (layer, file_run) = merged_layer(common)?;
    let run = run.or(file_run);
    let config = RunConfig::resolve(&layer)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let d = Deployment::from_json(&text)?;
    let run_seed = run.map_or(config.master_seed, |r| experiments::run_seed(config.master_seed, r));

    eprintln!("replay: {} nodes, seed {run_seed} ...", d.nodes.len());
    let outcomes = experiments::run_methods(&d, &config.methods, run_seed, &config.settings, config.scenario.noise_sigma)?;
    let summary = ReplaySummary {
        deployment_hash: experiments::deployment_hash(&d),
        run_seed,
        methods: outcomes
            .iter()
            .map(|o| {
                let r = &o.localization.result;
                let m = ReplayMethod {
                    avg_error: experiments::avg_error(r, &d).ok(),
                    localized: r.estimates.len(),
                    skipped: r.skipped.len(),
                };
                (o.method, m)
            })
            .collect(),
    };
    let files = vec![
        ("estimates.csv".to_string(), csv_bytes(|b| report::write_estimates_csv(&d, &outcomes, b))?),
        ("summary.json".to_string(), (serde_json::to_string_pretty(&summary)? + "\n").into_bytes()),
    ];
    let mut manifest = new_manifest("replay", config.to_layer(), vec![config.clone()]);
    manifest.replay = Some(ReplayInfo {
        deployment: path.to_path_buf(),
        deployment_hash: summary.deployment_hash.clone(),
        run,
        run_seed,
    });
    commit(&config.out_dir, files, manifest)?;

    println!("deployment {}", summary.deployment_hash);
    for (m, s) in &summary.methods {
        let err = s.avg_error.map_or("-".to_string(), |e| format!("{e:.4} m"));
        println!("{:<12}{err:>14}  localized {}  skipped {}", m.name(), s.localized, s.skipped);
    }
    Ok(())
}
