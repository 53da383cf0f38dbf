//! CSV and JSON artifacts for scenario reports.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::experiments::{self, Method, MethodOutcome, MethodStats, ScenarioReport};
use crate::localization::ESTIMATE_COLUMNS;
use crate::network::Deployment;

/// `scenario,run,method,avg_error_m,skipped`. Runs without any estimate leave
/// `avg_error_m` empty.
pub fn write_runs_csv<W: Write>(reports: &[ScenarioReport], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scenario", "run", "method", "avg_error_m", "skipped"])?;
    for rep in reports {
        for run in &rep.runs {
            for m in &rep.methods {
                let Some(mr) = run.methods.get(m) else { continue };
                out.write_record([
                    rep.scenario.name.clone(),
                    run.run.to_string(),
                    m.to_string(),
                    mr.avg_error.map(|e| e.to_string()).unwrap_or_default(),
                    mr.skipped.to_string(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// `scenario,method,iteration,mean_best_fitness` for the swarm methods.
pub fn write_convergence_csv<W: Write>(reports: &[ScenarioReport], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scenario", "method", "iteration", "mean_best_fitness"])?;
    for rep in reports {
        for m in rep.methods.iter().filter(|m| m.is_swarm()) {
            for (t, f) in rep.convergence(*m).iter().enumerate() {
                out.write_record([rep.scenario.name.clone(), m.to_string(), t.to_string(), f.to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Per-node estimates of several methods on one deployment, with a leading
/// `method` column.
pub fn write_estimates_csv<W: Write>(d: &Deployment, outcomes: &[MethodOutcome], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["method"];
    header.extend(ESTIMATE_COLUMNS);
    out.write_record(&header)?;
    for o in outcomes {
        o.localization.result.write_rows(d, Some(o.method.name()), &mut out)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub scenario: String,
    pub n_runs: usize,
    pub methods: BTreeMap<Method, MethodStats>,
    /// Percentage error reduction of AdapSCA-PSO against each baseline.
    pub reductions: BTreeMap<Method, Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub master_seed: u64,
    pub scenarios: Vec<ScenarioSummary>,
    /// Unweighted mean of the per-scenario reductions.
    pub pooled_reductions: BTreeMap<Method, Option<f64>>,
}

impl Summary {
    pub fn new(reports: &[ScenarioReport]) -> Result<Self> {
        let has_ours = reports.iter().all(|r| r.methods.contains(&Method::AdapScaPso));
        let has_baseline = reports.iter().all(|r| r.methods.len() > 1);
        let comparable = has_ours && has_baseline && !reports.is_empty();
        let scenarios = reports
            .iter()
            .map(|r| {
                Ok(ScenarioSummary {
                    scenario: r.scenario.name.clone(),
                    n_runs: r.runs.len(),
                    methods: r.methods.iter().map(|&m| (m, r.stats(m))).collect(),
                    reductions: if comparable { experiments::compare(r)? } else { BTreeMap::new() },
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            master_seed: reports.first().map_or(0, |r| r.master_seed),
            scenarios,
            pooled_reductions: if comparable {
                experiments::pooled_reduction(reports)?
            } else {
                BTreeMap::new()
            },
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    /// Plain-text table of mean errors, one row per scenario.
    pub fn table(&self) -> String {
        let mut methods: Vec<Method> = self.scenarios.iter().flat_map(|s| s.methods.keys().copied()).collect();
        methods.sort();
        methods.dedup();
        let mut s = format!("{:<12}", "scenario");
        for m in &methods {
            s.push_str(&format!("{:>14}", m.name()));
        }
        s.push('\n');
        for sc in &self.scenarios {
            s.push_str(&format!("{:<12}", sc.scenario));
            for m in &methods {
                let cell = sc
                    .methods
                    .get(m)
                    .and_then(|st| st.mean_error)
                    .map_or("-".to_string(), |e| format!("{e:.4} m"));
                s.push_str(&format!("{cell:>14}"));
            }
            s.push('\n');
        }
        if !self.pooled_reductions.is_empty() {
            s.push_str("adapscapso error reduction (pooled):");
            for (m, r) in &self.pooled_reductions {
                match r {
                    Some(r) => s.push_str(&format!(" vs {m} {r:.2}%")),
                    None => s.push_str(&format!(" vs {m} n/a")),
                }
            }
            s.push('\n');
        }
        s
    }
}
