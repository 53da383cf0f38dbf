//! Run configuration.
//!
//! A configuration is resolved from three layers, later ones winning:
//! scenario preset defaults, an optional TOML file, then command-line flags.
//! The file and the flags share one schema, [`ConfigLayer`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Method, MethodSettings, Scenario};
use crate::swarm::SwarmParams;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT_DIR: &str = "wsnloc-out";
/// Environment variable the CLI reads for the output directory when neither
/// a config file nor a flag sets one.
pub const OUT_DIR_ENV: &str = "WSNLOC_OUT_DIR";

/// One layer of settings; unset fields defer to lower layers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigLayer {
    /// Scenario preset: s1, s2, s3 or s4.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Fraction of nodes that are anchors.
    #[arg(long)]
    pub anchor_ratio: Option<f64>,
    /// One-hop communication range, meters.
    #[arg(long)]
    pub range: Option<f64>,
    /// Deployment area width, meters.
    #[arg(long)]
    pub area_width: Option<f64>,
    /// Deployment area height, meters.
    #[arg(long)]
    pub area_height: Option<f64>,
    /// Monte-Carlo runs.
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated methods: dvhop, pso, scapso, adapscapso.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full localization passes for AdapSCA-PSO.
    #[arg(long)]
    pub refine_passes: Option<usize>,
    /// Standard deviation of range noise, meters.
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Solve nodes of one hop tier concurrently.
    #[arg(long)]
    pub parallel_tiers: Option<bool>,
    /// Upper inertia weight.
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Lower inertia weight.
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Personal-best acceleration coefficient.
    #[arg(long)]
    pub c1: Option<f64>,
    /// Global-best acceleration coefficient.
    #[arg(long)]
    pub c2: Option<f64>,
    /// Initial SCA amplitude.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Decay rate of the SCA selection probability.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Iterations per swarm.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Particles per swarm.
    #[arg(long)]
    pub particles: Option<usize>,
    /// Initial speed per hop, meters.
    #[arg(long)]
    pub delta: Option<f64>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),* $(,)?) => {
        ConfigLayer { $($f: $top.$f.clone().or_else(|| $base.$f.clone())),* }
    };
}

impl ConfigLayer {
    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&s)
    }

    /// `self` with every field set in `top` replaced.
    pub fn overlay(&self, top: &ConfigLayer) -> ConfigLayer {
        let base = self;
        overlay!(base, top;
            scenario, nodes, anchor_ratio, range, area_width, area_height, runs, seed, methods,
            out, refine_passes, noise_sigma, parallel_tiers, omega_max, omega_min, c1, c2,
            amplitude, beta, iters, particles, delta)
    }
}

/// Fully resolved configuration of a CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub out_dir: PathBuf,
    pub settings: MethodSettings,
}

impl RunConfig {
    /// Resolves a merged layer against preset defaults and validates it.
    pub fn resolve(layer: &ConfigLayer) -> Result<Self> {
        let mut scenario = match &layer.scenario {
            Some(name) => Scenario::by_name(name)
                .ok_or_else(|| Error::Config(format!("scenario: unknown preset `{name}`")))?,
            None => Scenario::s1(),
        };
        if let Some(v) = layer.nodes {
            scenario.n_nodes = v;
        }
        if let Some(v) = layer.anchor_ratio {
            scenario.anchor_ratio = v;
        }
        if let Some(v) = layer.range {
            scenario.comm_range = v;
        }
        if let Some(v) = layer.area_width {
            scenario.area.0 = v;
        }
        if let Some(v) = layer.area_height {
            scenario.area.1 = v;
        }
        if let Some(v) = layer.runs {
            scenario.n_runs = v;
        }
        if let Some(v) = layer.noise_sigma {
            scenario.noise_sigma = v;
        }
        scenario.name = Scenario::presets()
            .into_iter()
            .find(|p| Scenario { name: p.name.clone(), n_runs: p.n_runs, ..scenario.clone() } == *p)
            .map_or_else(|| "custom".to_string(), |p| p.name);
        scenario.validate()?;

        let methods = match &layer.methods {
            Some(list) => {
                let mut out = Vec::new();
                for m in list {
                    let m: Method = m.parse()?;
                    if !out.contains(&m) {
                        out.push(m);
                    }
                }
                if out.is_empty() {
                    return Err(Error::Config("methods: list is empty".into()));
                }
                out
            }
            None => Method::ALL.to_vec(),
        };

        let d = SwarmParams::default();
        let params = SwarmParams {
            omega_max: layer.omega_max.unwrap_or(d.omega_max),
            omega_min: layer.omega_min.unwrap_or(d.omega_min),
            c1: layer.c1.unwrap_or(d.c1),
            c2: layer.c2.unwrap_or(d.c2),
            a: layer.amplitude.unwrap_or(d.a),
            beta: layer.beta.unwrap_or(d.beta),
            max_iters: layer.iters.unwrap_or(d.max_iters),
            n_particles: layer.particles.unwrap_or(d.n_particles),
            delta: layer.delta.unwrap_or(d.delta),
            comm_range: scenario.comm_range,
        };
        params.validate()?;
        let refine_passes = layer.refine_passes.unwrap_or(2);
        if refine_passes < 1 {
            return Err(Error::Config("refine-passes must be >= 1".into()));
        }

        Ok(Self {
            scenario,
            methods,
            master_seed: layer.seed.unwrap_or(DEFAULT_SEED),
            out_dir: layer.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            settings: MethodSettings {
                params,
                refine_passes,
                parallel_tiers: layer.parallel_tiers.unwrap_or(false),
            },
        })
    }

    /// A layer with every field set, which resolves back to `self`.
    pub fn to_layer(&self) -> ConfigLayer {
        let s = &self.scenario;
        let p = &self.settings.params;
        ConfigLayer {
            scenario: Scenario::by_name(&s.name).map(|_| s.name.clone()),
            nodes: Some(s.n_nodes),
            anchor_ratio: Some(s.anchor_ratio),
            range: Some(s.comm_range),
            area_width: Some(s.area.0),
            area_height: Some(s.area.1),
            runs: Some(s.n_runs),
            seed: Some(self.master_seed),
            methods: Some(self.methods.iter().map(|m| m.name().to_string()).collect()),
            out: Some(self.out_dir.clone()),
            refine_passes: Some(self.settings.refine_passes),
            noise_sigma: Some(s.noise_sigma),
            parallel_tiers: Some(self.settings.parallel_tiers),
            omega_max: Some(p.omega_max),
            omega_min: Some(p.omega_min),
            c1: Some(p.c1),
            c2: Some(p.c2),
            amplitude: Some(p.a),
            beta: Some(p.beta),
            iters: Some(p.max_iters),
            particles: Some(p.n_particles),
            delta: Some(p.delta),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(f: impl FnOnce(&mut ConfigLayer)) -> ConfigLayer {
        let mut l = ConfigLayer::default();
        f(&mut l);
        l
    }

    #[test]
    fn defaults_are_s1_with_published_params() {
        let c = RunConfig::resolve(&ConfigLayer::default()).unwrap();
        assert_eq!(c.scenario, Scenario::s1());
        assert_eq!(c.methods, Method::ALL.to_vec());
        assert_eq!(c.settings.params, SwarmParams::default());
        assert_eq!(c.master_seed, DEFAULT_SEED);
    }

    #[test]
    fn explicit_fields_matching_preset_keep_its_name() {
        let l = layer(|l| {
            l.nodes = Some(100);
            l.anchor_ratio = Some(0.10);
            l.range = Some(30.0);
            l.runs = Some(50);
        });
        assert_eq!(RunConfig::resolve(&l).unwrap().scenario, Scenario::s1());
        let l = layer(|l| l.runs = Some(3));
        assert_eq!(RunConfig::resolve(&l).unwrap().scenario, Scenario::s1().with_runs(3));
        let l = layer(|l| l.nodes = Some(120));
        assert_eq!(RunConfig::resolve(&l).unwrap().scenario.name, "custom");
    }

    #[test]
    fn preset_range_propagates_to_params() {
        let l = layer(|l| l.scenario = Some("s3".into()));
        let c = RunConfig::resolve(&l).unwrap();
        assert_eq!(c.settings.params.comm_range, 15.0);
    }

    #[test]
    fn flags_override_file_override_preset() {
        let file = ConfigLayer::from_toml(
            "scenario = \"s2\"\nruns = 7\nseed = 5\nc1 = 1.5\nmethods = [\"pso\"]\nrefine-passes = 3\n",
        )
        .unwrap();
        let flags = layer(|l| {
            l.runs = Some(3);
            l.c1 = Some(2.0);
        });
        let c = RunConfig::resolve(&file.overlay(&flags)).unwrap();
        assert_eq!(c.scenario.anchor_ratio, 0.20);
        assert_eq!(c.scenario.n_runs, 3);
        assert_eq!(c.master_seed, 5);
        assert_eq!(c.settings.params.c1, 2.0);
        assert_eq!(c.settings.params.c2, 1.8);
        assert_eq!(c.settings.refine_passes, 3);
        assert_eq!(c.methods, vec![Method::Pso]);
    }

    #[test]
    fn every_field_overrides() {
        let file = ConfigLayer::from_toml(
            r#"
            scenario = "s1"
            nodes = 50
            anchor-ratio = 0.3
            range = 25.0
            area-width = 80.0
            area-height = 60.0
            runs = 4
            seed = 9
            methods = ["dvhop"]
            out = "a"
            refine-passes = 3
            noise-sigma = 0.5
            parallel-tiers = true
            omega-max = 0.8
            omega-min = 0.3
            c1 = 1.0
            c2 = 1.1
            amplitude = 2.0
            beta = 2.0
            iters = 10
            particles = 5
            delta = 0.7
            "#,
        )
        .unwrap();
        let base = RunConfig::resolve(&file).unwrap();
        assert_eq!(base.scenario.n_nodes, 50);
        assert_eq!(base.scenario.area, (80.0, 60.0));
        assert_eq!(base.settings.params.delta, 0.7);
        assert!(base.settings.parallel_tiers);

        let flags = ConfigLayer {
            scenario: Some("s4".into()),
            nodes: Some(60),
            anchor_ratio: Some(0.25),
            range: Some(20.0),
            area_width: Some(90.0),
            area_height: Some(70.0),
            runs: Some(2),
            seed: Some(1),
            methods: Some(vec!["pso".into(), "scapso".into()]),
            out: Some("b".into()),
            refine_passes: Some(1),
            noise_sigma: Some(0.1),
            parallel_tiers: Some(false),
            omega_max: Some(0.7),
            omega_min: Some(0.2),
            c1: Some(1.2),
            c2: Some(1.3),
            amplitude: Some(1.5),
            beta: Some(1.0),
            iters: Some(20),
            particles: Some(6),
            delta: Some(0.9),
        };
        let c = RunConfig::resolve(&file.overlay(&flags)).unwrap();
        let p = c.settings.params;
        assert_eq!((c.scenario.n_nodes, c.scenario.anchor_ratio, c.scenario.comm_range), (60, 0.25, 20.0));
        assert_eq!((c.scenario.area, c.scenario.n_runs, c.scenario.noise_sigma), ((90.0, 70.0), 2, 0.1));
        assert_eq!((c.master_seed, c.out_dir.clone()), (1, PathBuf::from("b")));
        assert_eq!(c.methods, vec![Method::Pso, Method::Scapso]);
        assert_eq!((c.settings.refine_passes, c.settings.parallel_tiers), (1, false));
        assert_eq!((p.omega_max, p.omega_min, p.c1, p.c2, p.a, p.beta), (0.7, 0.2, 1.2, 1.3, 1.5, 1.0));
        assert_eq!((p.max_iters, p.n_particles, p.delta, p.comm_range), (20, 6, 0.9, 20.0));
    }

    #[test]
    fn to_layer_round_trips() {
        let l = layer(|l| {
            l.scenario = Some("s3".into());
            l.c2 = Some(1.0);
            l.runs = Some(4);
        });
        let c = RunConfig::resolve(&l).unwrap();
        assert_eq!(RunConfig::resolve(&c.to_layer()).unwrap(), c);
        let custom = RunConfig::resolve(&layer(|l| l.nodes = Some(30))).unwrap();
        assert_eq!(custom.to_layer().scenario, None);
        assert_eq!(RunConfig::resolve(&custom.to_layer()).unwrap(), custom);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ConfigLayer::from_toml("bogus = 1").is_err());
        assert!(RunConfig::resolve(&layer(|l| l.scenario = Some("s9".into()))).is_err());
        assert!(RunConfig::resolve(&layer(|l| l.omega_min = Some(0.95))).is_err());
        assert!(RunConfig::resolve(&layer(|l| l.iters = Some(0))).is_err());
        assert!(RunConfig::resolve(&layer(|l| l.anchor_ratio = Some(1.5))).is_err());
        assert!(RunConfig::resolve(&layer(|l| l.methods = Some(vec!["ga".into()]))).is_err());
        assert!(RunConfig::resolve(&layer(|l| l.refine_passes = Some(0))).is_err());
    }
}
