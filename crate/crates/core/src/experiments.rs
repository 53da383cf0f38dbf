//! Scenario presets, the Monte-Carlo harness and result aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{self, BaselineMethod};
use crate::error::{Error, Result};
use crate::localization::{self, Localization, LocalizationResult, LocalizeOptions};
use crate::network::{CommGraph, Deployment};
use crate::seed;
use crate::swarm::{SelectorPolicy, SwarmParams, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    DvHop,
    Pso,
    Scapso,
    AdapScaPso,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DvHop, Method::Pso, Method::Scapso, Method::AdapScaPso];
    pub const SWARM: [Method; 3] = [Method::Pso, Method::Scapso, Method::AdapScaPso];

    pub fn name(self) -> &'static str {
        match self {
            Method::DvHop => "dvhop",
            Method::Pso => "pso",
            Method::Scapso => "scapso",
            Method::AdapScaPso => "adapscapso",
        }
    }

    pub fn is_swarm(self) -> bool {
        self != Method::DvHop
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "dvhop" => Ok(Method::DvHop),
            "pso" => Ok(Method::Pso),
            "scapso" => Ok(Method::Scapso),
            "adapscapso" => Ok(Method::AdapScaPso),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n_nodes: usize,
    pub anchor_ratio: f64,
    pub comm_range: f64,
    pub area: (f64, f64),
    pub n_runs: usize,
    pub noise_sigma: f64,
}

impl Scenario {
    fn preset(name: &str, n_nodes: usize, anchor_ratio: f64, comm_range: f64) -> Self {
        Self {
            name: name.to_string(),
            n_nodes,
            anchor_ratio,
            comm_range,
            area: (100.0, 100.0),
            n_runs: 50,
            noise_sigma: 0.0,
        }
    }

    /// Small network, 10 % anchors.
    pub fn s1() -> Self {
        Self::preset("s1", 100, 0.10, 30.0)
    }

    /// Small network, 20 % anchors.
    pub fn s2() -> Self {
        Self::preset("s2", 100, 0.20, 30.0)
    }

    /// Large network, 10 % anchors.
    pub fn s3() -> Self {
        Self::preset("s3", 200, 0.10, 15.0)
    }

    /// Large network, 20 % anchors.
    pub fn s4() -> Self {
        Self::preset("s4", 200, 0.20, 15.0)
    }

    pub fn presets() -> [Scenario; 4] {
        [Self::s1(), Self::s2(), Self::s3(), Self::s4()]
    }

    pub fn by_name(name: &str) -> Option<Self> {
        Self::presets().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
    }

    pub fn with_runs(mut self, n_runs: usize) -> Self {
        self.n_runs = n_runs;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_nodes < 3 {
            return Err(Error::Config("n_nodes must be >= 3".into()));
        }
        if !(self.anchor_ratio > 0.0 && self.anchor_ratio < 1.0) {
            return Err(Error::Config("anchor_ratio must lie in (0, 1)".into()));
        }
        if !(self.comm_range > 0.0) {
            return Err(Error::Config("comm_range must be positive".into()));
        }
        if !(self.area.0 > 0.0 && self.area.1 > 0.0) {
            return Err(Error::Config("area must be positive".into()));
        }
        if self.n_runs < 1 {
            return Err(Error::Config("n_runs must be >= 1".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn deploy(&self, run_seed: u64) -> Result<Deployment> {
        Deployment::deploy(
            self.n_nodes,
            self.anchor_ratio,
            self.area,
            self.comm_range,
            &mut seed::stream(run_seed, seed::tag("deploy")),
        )
    }
}

/// Optimizer settings for every method of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    /// AdapSCA-PSO parameters. `comm_range` is replaced by the deployment's.
    pub params: SwarmParams,
    pub refine_passes: usize,
    pub parallel_tiers: bool,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            params: SwarmParams::default(),
            refine_passes: 2,
            parallel_tiers: false,
        }
    }
}

impl MethodSettings {
    /// Parameters for `method` on a network with range `comm_range`.
    ///
    /// Baselines keep their own coefficients but share the iteration budget,
    /// swarm size and inertia schedule with AdapSCA-PSO.
    pub fn params_for(&self, method: Method, comm_range: f64) -> SwarmParams {
        let adaptive = self.params.with_comm_range(comm_range);
        let baseline = |m: BaselineMethod| SwarmParams {
            omega_max: adaptive.omega_max,
            omega_min: adaptive.omega_min,
            max_iters: adaptive.max_iters,
            n_particles: adaptive.n_particles,
            ..m.params(comm_range)
        };
        match method {
            Method::Pso => baseline(BaselineMethod::Pso),
            Method::Scapso => baseline(BaselineMethod::Scapso),
            Method::AdapScaPso | Method::DvHop => adaptive,
        }
    }
}

/// `sum ||true - est|| / UN` over the localized unknown nodes.
pub fn avg_error(result: &LocalizationResult, d: &Deployment) -> Result<f64> {
    if result.estimates.is_empty() {
        return Err(Error::NoEstimates);
    }
    let total: f64 = result
        .estimates
        .iter()
        .map(|(&id, est)| d.pos(id).distance(est))
        .sum();
    Ok(total / result.estimates.len() as f64)
}

/// SHA-256 of the deployment's JSON form.
pub fn deployment_hash(d: &Deployment) -> String {
    hex::encode(Sha256::digest(d.to_json().as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRun {
    /// `None` when no unknown node was localized.
    pub avg_error: Option<f64>,
    pub skipped: usize,
    /// Per-iteration sum of node traces, and the number of traces summed.
    pub trace_sum: Vec<f64>,
    pub trace_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub deployment_hash: String,
    pub methods: BTreeMap<Method, MethodRun>,
}

/// Full output of one method on one deployment.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    pub localization: Localization,
}

fn sum_traces<'a>(traces: impl Iterator<Item = &'a Trace>) -> (Vec<f64>, usize) {
    let mut sum: Vec<f64> = Vec::new();
    let mut count = 0;
    for t in traces {
        if sum.len() < t.len() {
            sum.resize(t.len(), 0.0);
        }
        for (s, f) in sum.iter_mut().zip(&t.best_fitness_per_iter) {
            *s += f;
        }
        count += 1;
    }
    (sum, count)
}

/// Runs `methods` on a fixed deployment. Each method draws from its own
/// stream under `run_seed`, so the method list does not affect results.
pub fn run_methods(
    d: &Deployment,
    methods: &[Method],
    run_seed: u64,
    settings: &MethodSettings,
    noise_sigma: f64,
) -> Result<Vec<MethodOutcome>> {
    let g = CommGraph::build(d);
    let tables = baselines::dvhop_tables(d, &g).ok();
    let mut outcomes = Vec::with_capacity(methods.len());
    for &method in methods {
        let mut rng = seed::stream(run_seed, seed::tag(method.name()));
        let p = settings.params_for(method, d.comm_range);
        let localization = match method {
            Method::DvHop => Localization {
                result: baselines::dvhop_localize(d, &g),
                traces: BTreeMap::new(),
            },
            Method::Pso | Method::Scapso => {
                let which = if method == Method::Pso {
                    BaselineMethod::Pso
                } else {
                    BaselineMethod::Scapso
                };
                let empty = baselines::DvHopTables::default();
                baselines::baseline_localize(which, d, &g, tables.as_ref().unwrap_or(&empty), &p, &mut rng)?
            }
            Method::AdapScaPso => {
                let opts = LocalizeOptions {
                    refine_passes: settings.refine_passes,
                    noise_sigma,
                    parallel_tiers: settings.parallel_tiers,
                    ..LocalizeOptions::default()
                };
                localization::localize_all(d, &g, &p, SelectorPolicy::Adaptive, &opts, &mut rng)?
            }
        };
        outcomes.push(MethodOutcome { method, localization });
    }
    Ok(outcomes)
}

pub fn summarize_run(run: usize, seed: u64, d: &Deployment, outcomes: &[MethodOutcome]) -> RunRecord {
    let methods = outcomes
        .iter()
        .map(|o| {
            let (trace_sum, trace_count) = sum_traces(o.localization.traces.values());
            let run = MethodRun {
                avg_error: avg_error(&o.localization.result, d).ok(),
                skipped: o.localization.result.skipped.len(),
                trace_sum,
                trace_count,
            };
            (o.method, run)
        })
        .collect();
    RunRecord {
        run,
        seed,
        deployment_hash: deployment_hash(d),
        methods,
    }
}

/// Seed of run `r` under `master_seed`.
pub fn run_seed(master_seed: u64, run: usize) -> u64 {
    seed::derive(master_seed, run as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodStats {
    pub mean_error: Option<f64>,
    pub std_error: Option<f64>,
    /// Runs that produced an error value.
    pub valid_runs: usize,
    pub mean_skipped: f64,
}

impl ScenarioReport {
    /// Per-run average errors of `method`, in run order.
    pub fn errors(&self, method: Method) -> Vec<Option<f64>> {
        self.runs
            .iter()
            .map(|r| r.methods.get(&method).and_then(|m| m.avg_error))
            .collect()
    }

    pub fn skipped_counts(&self, method: Method) -> Vec<usize> {
        self.runs
            .iter()
            .map(|r| r.methods.get(&method).map_or(0, |m| m.skipped))
            .collect()
    }

    pub fn stats(&self, method: Method) -> MethodStats {
        let vals: Vec<f64> = self.errors(method).into_iter().flatten().collect();
        let n = vals.len();
        let mean = (n > 0).then(|| vals.iter().sum::<f64>() / n as f64);
        let std = mean.filter(|_| n > 1).map(|m| {
            (vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        });
        let skipped = self.skipped_counts(method);
        MethodStats {
            mean_error: mean,
            std_error: std,
            valid_runs: n,
            mean_skipped: skipped.iter().sum::<usize>() as f64 / skipped.len().max(1) as f64,
        }
    }

    pub fn mean_error(&self, method: Method) -> Option<f64> {
        self.stats(method).mean_error
    }

    /// Mean best fitness per iteration over every node trace of every run.
    pub fn convergence(&self, method: Method) -> Vec<f64> {
        let mut sum: Vec<f64> = Vec::new();
        let mut count = 0;
        for m in self.runs.iter().filter_map(|r| r.methods.get(&method)) {
            if sum.len() < m.trace_sum.len() {
                sum.resize(m.trace_sum.len(), 0.0);
            }
            for (s, v) in sum.iter_mut().zip(&m.trace_sum) {
                *s += v;
            }
            count += m.trace_count;
        }
        if count == 0 {
            return Vec::new();
        }
        sum.into_iter().map(|s| s / count as f64).collect()
    }
}

/// Runs every method on `s.n_runs` fresh deployments. All methods of a run
/// share one deployment. Runs execute in parallel and are collected in run
/// order, so the report depends only on the inputs.
pub fn run_scenario(
    s: &Scenario,
    methods: &[Method],
    master_seed: u64,
    settings: &MethodSettings,
) -> Result<ScenarioReport> {
    s.validate()?;
    settings.params.validate()?;
    let runs = (0..s.n_runs)
        .into_par_iter()
        .map(|r| {
            let rs = run_seed(master_seed, r);
            let d = s.deploy(rs)?;
            let outcomes = run_methods(&d, methods, rs, settings, s.noise_sigma)?;
            Ok(summarize_run(r, rs, &d, &outcomes))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioReport {
        scenario: s.clone(),
        methods: methods.to_vec(),
        master_seed,
        runs,
    })
}

/// `100 * (baseline - adaptive) / baseline`; `None` when the baseline error
/// is zero or either mean is missing.
pub fn reduction(baseline: Option<f64>, adaptive: Option<f64>) -> Option<f64> {
    match (baseline, adaptive) {
        (Some(b), Some(a)) if b != 0.0 => Some(100.0 * (b - a) / b),
        _ => None,
    }
}

/// Error reduction of AdapSCA-PSO relative to each other method in a report.
pub fn compare(report: &ScenarioReport) -> Result<BTreeMap<Method, Option<f64>>> {
    if !report.methods.contains(&Method::AdapScaPso) {
        return Err(Error::Config("comparison needs adapscapso in the method list".into()));
    }
    let ours = report.mean_error(Method::AdapScaPso);
    let out: BTreeMap<_, _> = report
        .methods
        .iter()
        .filter(|&&m| m != Method::AdapScaPso)
        .map(|&m| (m, reduction(report.mean_error(m), ours)))
        .collect();
    if out.is_empty() {
        return Err(Error::Config("comparison needs at least one baseline".into()));
    }
    Ok(out)
}

/// Unweighted mean of per-scenario reductions. A method whose reduction is
/// undefined in any scenario has no pooled value.
pub fn pooled_reduction(reports: &[ScenarioReport]) -> Result<BTreeMap<Method, Option<f64>>> {
    let per: Vec<_> = reports.iter().map(compare).collect::<Result<_>>()?;
    let mut methods: Vec<Method> = per.iter().flat_map(|c| c.keys().copied()).collect();
    methods.sort();
    methods.dedup();
    Ok(methods
        .into_iter()
        .map(|m| {
            let vals: Option<Vec<f64>> = per.iter().map(|c| c.get(&m).copied().flatten()).collect();
            let pooled = vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64);
            (m, pooled)
        })
        .collect())
}
