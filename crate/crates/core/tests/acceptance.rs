//! Acceptance suite. Each criterion prints one PASS or FAIL line; the binary
//! exits non-zero if a criterion fails that is not in `KNOWN_FAILURES`.
//! Pass criterion numbers as arguments to run a subset.

#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsnloc::baselines::multilaterate;
use wsnloc::experiments::{avg_error, pooled_reduction, run_scenario, Method, MethodSettings, Scenario, ScenarioReport};
use wsnloc::geometry::Bounds;
use wsnloc::localization::{
    init_swarm, localize_all, ranging_fitness, sample_disk, LocalizationResult, LocalizeOptions, NeighborContext,
    NeighborEntry, ANCHOR_WEIGHT, UNKNOWN_WEIGHT,
};
use wsnloc::network::CommGraph;
use wsnloc::swarm::{
    inertia_weight, optimize, pso_step, sca_amplitude, sca_step, select_module, uniform_particles, Module, Particle,
    SelectorPolicy, SwarmParams,
};
use wsnloc::Point;

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const MASTER_SEED: u64 = 42;

/// Criteria that fail with the method implemented as specified, each with the
/// reason. They still print FAIL; the exit status only reflects failures that
/// are not listed here, or listed ones that start passing.
const KNOWN_FAILURES: [(usize, &str); 1] = [(
    10,
    "the ranging fitness is an unnormalized weighted sum over one-hop neighbors while the \
     baseline fitness is a mean over anchors, so their iteration-0 values are not on one scale",
)];

fn main() {
    let criteria: [Criterion; 11] = [
        ("update-equation oracles", c1_oracles),
        ("monotone convergence", c2_monotone),
        ("selector statistics", c3_selector),
        ("initialization law", c4_init),
        ("small-instance exactness", c5_small_instance),
        ("multilateration oracle", c6_multilateration),
        ("method ordering", c7_ordering),
        ("improvement magnitude", c8_magnitude),
        ("anchor-density effect", c9_density),
        ("convergence shape", c10_convergence),
        ("reproducibility", c11_reproducibility),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    panic::set_hook(Box::new(|_| {}));
    let (mut failed, mut stale) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == n).map(|(_, why)| *why);
        match (outcome, known) {
            (Ok(detail), None) => println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1}s)"),
            (Ok(detail), Some(_)) => {
                stale += 1;
                println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1}s); listed as a known failure");
            }
            (Err(detail), known) => {
                println!("criterion {n:>2} FAIL  {name}: {detail} ({secs:.1}s)");
                match known {
                    Some(why) => println!("             known failure: {why}"),
                    None => failed += 1,
                }
            }
        }
    }
    if failed + stale > 0 {
        println!("{failed} unexpected failure(s), {stale} known failure(s) now passing");
        std::process::exit(1);
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- criterion 1

fn random_params<R: Rng>(rng: &mut R) -> SwarmParams {
    let omega_min = rng.random_range(0.0..0.8);
    SwarmParams {
        omega_max: rng.random_range(omega_min..1.2),
        omega_min,
        c1: rng.random_range(0.0..3.0),
        c2: rng.random_range(0.0..3.0),
        a: rng.random_range(0.5..3.0),
        beta: rng.random_range(0.5..5.0),
        max_iters: rng.random_range(1..200),
        n_particles: 10,
        delta: rng.random_range(0.1..1.0),
        comm_range: rng.random_range(1.0..60.0),
    }
}

fn random_particle<R: Rng>(b: &Bounds<2>, vmax: f64, rng: &mut R) -> Particle<2> {
    let mut pt = uniform_particles(1, b, vmax, rng).remove(0);
    pt.pbest = [rng.random_range(b.lo[0]..b.hi[0]), rng.random_range(b.lo[1]..b.hi[1])];
    pt
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Tracks the largest relative deviation seen for one function.
#[derive(Default)]
struct Worst(f64);

impl Worst {
    fn check(&mut self, what: &str, got: f64, want: f64) -> Result<(), String> {
        self.0 = self.0.max(rel_err(got, want));
        ensure(rel_close(got, want, 1e-9), || format!("{what}: {got} vs oracle {want}"))
    }
}

fn c1_oracles() -> Outcome {
    const N: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: BTreeMap<&str, Worst> = BTreeMap::new();

    for _ in 0..N {
        let p = random_params(&mut rng);
        let t = rng.random_range(0..=p.max_iters);
        let tt = p.max_iters as f64;

        // Schedules, written from their closed forms.
        let omega = p.omega_min + (p.omega_max - p.omega_min) * (tt - t as f64) / tt;
        worst.entry("inertia_weight").or_default().check("omega", inertia_weight(t, &p), omega)?;
        let r1 = p.a * (tt - t as f64) / tt;
        worst.entry("sca_amplitude").or_default().check("r1", sca_amplitude(t, &p), r1)?;

        let b = Bounds::new([rng.random_range(-50.0..0.0), rng.random_range(-50.0..0.0)], [
            rng.random_range(1.0..100.0),
            rng.random_range(1.0..100.0),
        ]);
        let pt = random_particle(&b, 2.0 * p.comm_range, &mut rng);
        let g = [rng.random_range(b.lo[0]..b.hi[0]), rng.random_range(b.lo[1]..b.hi[1])];

        // PSO: two scalar draws, velocity limited to [-L, L], then the move.
        let mut oracle_rng = rng.clone();
        let (ra, rb) = (oracle_rng.random::<f64>(), oracle_rng.random::<f64>());
        let next = pso_step(&pt, &g, omega, &p, &b, &mut rng);
        let w = worst.entry("pso_step").or_default();
        for d in 0..2 {
            let raw = omega * pt.vel[d] + p.c1 * ra * (pt.pbest[d] - pt.pos[d]) + p.c2 * rb * (g[d] - pt.pos[d]);
            let v = clamp(raw, -p.comm_range, p.comm_range);
            let x = clamp(pt.pos[d] + v, b.lo[d], b.hi[d]);
            w.check("pso velocity", next.vel[d], v)?;
            w.check("pso position", next.pos[d], x)?;
        }
        ensure(rng.random::<u64>() == oracle_rng.random::<u64>(), || "pso_step draw count".into())?;

        // SCA: r2 in [0, 2pi), r3 in [-1, 1), r4 picks sine or cosine.
        let mut oracle_rng = rng.clone();
        let r2 = TAU * oracle_rng.random::<f64>();
        let r3 = 2.0 * oracle_rng.random::<f64>() - 1.0;
        let r4 = oracle_rng.random::<f64>();
        let next = sca_step(&pt, &g, t, &p, &b, &mut rng);
        let w = worst.entry("sca_step").or_default();
        let trig = if r4 < 0.5 { r2.sin() } else { r2.cos() };
        for d in 0..2 {
            let x = clamp(pt.pos[d] + r1 * trig * (r3 * g[d] - pt.pos[d]).abs(), b.lo[d], b.hi[d]);
            w.check("sca position", next.pos[d], x)?;
            ensure(next.vel[d] == pt.vel[d], || "sca_step changed the velocity".into())?;
        }
        ensure(rng.random::<u64>() == oracle_rng.random::<u64>(), || "sca_step draw count".into())?;

        // Selector.
        let mut oracle_rng = rng.clone();
        let want = if oracle_rng.random::<f64>() < (-p.beta * t as f64 / tt).exp() {
            Module::Sca
        } else {
            Module::Pso
        };
        ensure(select_module(t, &p, &mut rng) == want, || format!("select_module at t={t}"))?;
        worst.entry("select_module").or_default();

        // Ranging fitness.
        let k = rng.random_range(1..=8);
        let ctx = NeighborContext {
            entries: (0..k)
                .map(|id| NeighborEntry {
                    id,
                    measured: rng.random_range(0.0..40.0),
                    pos: Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)),
                    weight: if rng.random_bool(0.5) { ANCHOR_WEIGHT } else { UNKNOWN_WEIGHT },
                })
                .collect(),
        };
        let cand = [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)];
        let mut sum = 0.0;
        for e in &ctx.entries {
            let dist = (cand[0] - e.pos.x).hypot(cand[1] - e.pos.y);
            sum += e.weight * (e.measured - dist) * (e.measured - dist);
        }
        let got = ranging_fitness(&cand, &ctx).map_err(|e| e.to_string())?;
        worst.entry("ranging_fitness").or_default().check("fitness", got, sum)?;

        // Average error.
        let n = rng.random_range(4..20);
        let pts = random_points(n, 100.0, 100.0, &mut rng);
        let d = deployment(100.0, 100.0, 30.0, &pts, &[0]);
        let mut res = LocalizationResult::default();
        let mut total = 0.0;
        for (id, &(x, y)) in pts.iter().enumerate().skip(1) {
            if rng.random_bool(0.8) || res.estimates.is_empty() {
                let est = Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
                total += (x - est.x).hypot(y - est.y);
                res.estimates.insert(id, est);
            }
        }
        let want = total / res.estimates.len() as f64;
        let got = avg_error(&res, &d).map_err(|e| e.to_string())?;
        worst.entry("avg_error").or_default().check("avg_error", got, want)?;
    }
    let detail: Vec<String> = worst.iter().map(|(k, w)| format!("{k} {:.1e}", w.0)).collect();
    Ok(format!("{N} inputs per function, max relative error: {}", detail.join(", ")))
}

// ---------------------------------------------------------------- criterion 2

fn c2_monotone() -> Outcome {
    let p = SwarmParams::default();
    let b = Bounds::new([0.0, 0.0], [100.0, 100.0]);
    let policies = [SelectorPolicy::Adaptive, SelectorPolicy::Fixed(0.5), SelectorPolicy::PsoOnly];
    let mut traces = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let policy = policies[seed as usize % policies.len()];

        let c = [rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)];
        let init = uniform_particles(p.n_particles, &b, p.comm_range, &mut rng);
        let sphere = |x: &[f64; 2]| Ok::<_, ()>((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2));
        let o = optimize(sphere, init, &b, &p, policy, &mut rng).map_err(|_| "sphere failed".to_string())?;
        ensure(o.trace.len() == p.max_iters && o.trace.is_non_increasing(), || format!("sphere seed {seed}"))?;

        let truth = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
        let k = rng.random_range(3..=8);
        let ctx = NeighborContext {
            entries: (0..k)
                .map(|id| {
                    let pos = Point::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
                    let anchor = id < 3 || rng.random_bool(0.5);
                    NeighborEntry {
                        id,
                        measured: (pos.x - truth.0).hypot(pos.y - truth.1) * rng.random_range(0.9..1.1),
                        pos,
                        weight: if anchor { ANCHOR_WEIGHT } else { UNKNOWN_WEIGHT },
                    }
                })
                .collect(),
        };
        let init = uniform_particles(p.n_particles, &b, p.comm_range, &mut rng);
        let o = optimize(|x: &[f64; 2]| ranging_fitness(x, &ctx), init, &b, &p, policy, &mut rng)
            .map_err(|e| e.to_string())?;
        ensure(o.trace.len() == p.max_iters && o.trace.is_non_increasing(), || format!("ranging seed {seed}"))?;
        traces += 2;
    }
    Ok(format!("{traces} traces of {} iterations, all non-increasing", p.max_iters))
}

// ---------------------------------------------------------------- criterion 3

fn c3_selector() -> Outcome {
    const DRAWS: usize = 100_000;
    let p = SwarmParams::default();
    let tt = p.max_iters;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut parts = Vec::new();
    for t in [0, tt / 4, tt / 2, tt] {
        let sca = (0..DRAWS).filter(|_| select_module(t, &p, &mut rng) == Module::Sca).count();
        let freq = sca as f64 / DRAWS as f64;
        let want = (-p.beta * t as f64 / tt as f64).exp();
        let se = (want * (1.0 - want) / DRAWS as f64).sqrt();
        if t == 0 {
            ensure(sca == DRAWS, || format!("t=0 frequency {freq}"))?;
        } else {
            ensure((freq - want).abs() <= 3.0 * se, || format!("t={t}: {freq:.5} vs {want:.5} (se {se:.5})"))?;
        }
        parts.push(format!("t={t} {freq:.4}/{want:.4}"));
    }
    Ok(format!("{DRAWS} draws each, observed/expected {}", parts.join(", ")))
}

// ---------------------------------------------------------------- criterion 4

fn c4_init() -> Outcome {
    const SAMPLES: usize = 10_000;
    let p = SwarmParams::default().with_comm_range(30.0);
    let s = Scenario::s1();
    let (mut n, mut in_disk, mut in_speed) = (0usize, 0usize, 0usize);
    let mut hops_seen = std::collections::BTreeSet::new();
    let mut run = 0u64;
    while n < SAMPLES {
        let d = s.deploy(wsnloc::seed::derive(4, run)).map_err(|e| e.to_string())?;
        run += 1;
        let g = CommGraph::build(&d);
        let bounds = d.bounds();
        for u in d.unknowns() {
            let Ok((anchor, hops)) = g.nearest_anchor(u.id) else { continue };
            let center = d.pos(anchor);
            let bound = p.delta * f64::from(hops);
            // Replay the draws to see each position before it is clamped.
            let mut replay = ChaCha8Rng::seed_from_u64(run * 1000 + u.id as u64);
            let mut rng = replay.clone();
            let swarm = init_swarm(u.id, &g, &d, &p, &mut rng).map_err(|e| e.to_string())?;
            for pt in swarm {
                let raw = sample_disk(center, p.comm_range, &mut replay);
                let (v0, v1) = (replay.random::<f64>(), replay.random::<f64>());
                ensure(bounds.clamp(raw.into()) == pt.pos, || "position is not the clamped disk sample".into())?;
                ensure(pt.vel == [bound * (2.0 * v0 - 1.0), bound * (2.0 * v1 - 1.0)], || "velocity draw".into())?;
                n += 1;
                if raw.distance(&center) <= p.comm_range && Point::from(pt.pos).distance(&center) <= p.comm_range {
                    in_disk += 1;
                }
                if pt.vel.iter().all(|v| v.abs() <= bound) {
                    in_speed += 1;
                }
                hops_seen.insert(hops);
            }
        }
    }
    ensure(in_disk == n && in_speed == n, || format!("disk {in_disk}/{n}, speed {in_speed}/{n}"))?;
    Ok(format!(
        "{n} particles over hop counts {:?}: disk constraint {in_disk}/{n}, speed bound {in_speed}/{n}",
        hops_seen
    ))
}

// ---------------------------------------------------------------- criterion 5

fn c5_small_instance() -> Outcome {
    let range = 40.0;
    let p = SwarmParams::default().with_comm_range(range);
    let mut hits = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let u = (rng.random_range(20.0..80.0), rng.random_range(20.0..80.0));
        let k = rng.random_range(3..=5);
        // Anchors within range of the unknown, the first three well spread.
        let anchors: Vec<(f64, f64)> = loop {
            let a: Vec<(f64, f64)> = (0..k)
                .map(|_| {
                    let (r, th) = (rng.random_range(5.0..range), rng.random_range(0.0..TAU));
                    (u.0 + r * th.cos(), u.1 + r * th.sin())
                })
                .collect();
            let inside = a.iter().all(|&(x, y)| (0.0..=100.0).contains(&x) && (0.0..=100.0).contains(&y));
            if inside && triangle_quality(a[0], a[1], a[2]) > 0.1 {
                break a;
            }
        };
        let mut pts = anchors.clone();
        pts.push(u);
        let ids: Vec<usize> = (0..k).collect();
        let d = deployment(100.0, 100.0, range, &pts, &ids);
        let g = CommGraph::build(&d);
        let loc = localize_all(&d, &g, &p, SelectorPolicy::Adaptive, &LocalizeOptions::default(), &mut rng)
            .map_err(|e| e.to_string())?;
        let r = |i: usize| (anchors[i].0 - u.0).hypot(anchors[i].1 - u.1);
        let closed = trilaterate3([anchors[0], anchors[1], anchors[2]], [r(0), r(1), r(2)]);
        let Some(est) = loc.result.estimates.get(&k) else { continue };
        let err = (est.x - closed.0).hypot(est.y - closed.1);
        worst = worst.max(err);
        if err <= 0.5 {
            hits += 1;
        }
    }
    ensure(hits >= 95, || format!("{hits}/100 seeds within 0.5 m"))?;
    Ok(format!("{hits}/100 seeds within 0.5 m of the closed form, worst {worst:.2e} m"))
}

// ---------------------------------------------------------------- criterion 6

fn c6_multilateration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    while instances < 50 {
        let k = rng.random_range(3..=6);
        let anchors = random_points(k, 100.0, 100.0, &mut rng);
        let good = (0..k).any(|i| {
            (i + 1..k).any(|j| (j + 1..k).any(|l| triangle_quality(anchors[i], anchors[j], anchors[l]) > 0.1))
        });
        if !good {
            continue;
        }
        let u = (rng.random_range(0.0..100.0), rng.random_range(0.0..100.0));
        // Distances perturbed the way hop-size estimates are, so the system
        // is not consistent.
        let refs: Vec<(Point, f64)> = anchors
            .iter()
            .map(|&(x, y)| (Point::new(x, y), (x - u.0).hypot(y - u.1) * rng.random_range(0.8..1.2)))
            .collect();
        let Ok(est) = multilaterate(&refs) else {
            return Err(format!("well-conditioned instance rejected: {refs:?}"));
        };
        // Only instances whose solution lies inside the searched grid count.
        if !(0.0..=100.0).contains(&est.x) || !(0.0..=100.0).contains(&est.y) {
            continue;
        }
        let (gx, gy) = grid_search(&refs, 100.0, 100.0, 0.25);
        let err = (est.x - gx).hypot(est.y - gy);
        worst = worst.max(err);
        ensure(err <= 0.5, || format!("{k} anchors: multilateration {est:?} vs grid ({gx}, {gy})"))?;
        instances += 1;
    }
    Ok(format!("{instances} instances with 3 to 6 anchors, worst distance to the grid optimum {worst:.3} m"))
}

// ------------------------------------------------------------ criteria 7 to 10

/// Published mean errors per preset: DV-Hop, PSO, SCAPSO, AdapSCA-PSO.
const REPORTED: [(&str, [f64; 4]); 4] = [
    ("s1", [10.9359, 8.8107, 8.6088, 0.6722]),
    ("s2", [9.2539, 6.4227, 6.4436, 0.4778]),
    ("s3", [8.3332, 5.8671, 5.7791, 1.4689]),
    ("s4", [7.6721, 4.5913, 4.5987, 0.9194]),
];

fn preset_reports() -> &'static [ScenarioReport] {
    static REPORTS: std::sync::OnceLock<Vec<ScenarioReport>> = std::sync::OnceLock::new();
    REPORTS.get_or_init(|| {
        Scenario::presets()
            .iter()
            .map(|s| {
                run_scenario(&s.clone().with_runs(50), &Method::ALL, MASTER_SEED, &MethodSettings::default())
                    .expect("preset run")
            })
            .collect()
    })
}

fn mean(rep: &ScenarioReport, m: Method) -> Result<f64, String> {
    rep.mean_error(m).ok_or_else(|| format!("{}: no {m} estimates", rep.scenario.name))
}

fn c7_ordering() -> Outcome {
    let mut lines = Vec::new();
    let mut bad = Vec::new();
    for (rep, (_, reported)) in preset_reports().iter().zip(REPORTED) {
        let [dv, pso, sca, ours] = [Method::DvHop, Method::Pso, Method::Scapso, Method::AdapScaPso].map(|m| mean(rep, m));
        let (dv, pso, sca, ours) = (dv?, pso?, sca?, ours?);
        if !(dv > pso && dv > sca && ours < pso.min(sca)) {
            bad.push(rep.scenario.name.clone());
        }
        lines.push(format!(
            "{} dvhop {dv:.2} pso {pso:.2} scapso {sca:.2} adapscapso {ours:.2} (reported {:.2}/{:.2}/{:.2}/{:.2})",
            rep.scenario.name, reported[0], reported[1], reported[2], reported[3]
        ));
    }
    let detail = format!("50 runs, seed {MASTER_SEED}; {}", lines.join("; "));
    ensure(bad.is_empty(), || format!("ordering violated in {bad:?}; {detail}"))?;
    Ok(detail)
}

fn c8_magnitude() -> Outcome {
    let pooled = pooled_reduction(preset_reports()).map_err(|e| e.to_string())?;
    let get = |m| pooled.get(&m).copied().flatten().ok_or_else(|| format!("no pooled reduction vs {m}"));
    let (pso, dv, sca) = (get(Method::Pso)?, get(Method::DvHop)?, get(Method::Scapso)?);
    let detail = format!(
        "pooled reduction vs pso {pso:.2}% (reported 84.97%), vs scapso {sca:.2}% (reported 84.84%), vs dvhop {dv:.2}% (reported 89.77%)"
    );
    ensure(pso >= 50.0, || detail.clone())?;
    Ok(detail)
}

fn c9_density() -> Outcome {
    let reps = preset_reports();
    let m = |i: usize| mean(&reps[i], Method::AdapScaPso);
    let (s1, s2, s3, s4) = (m(0)?, m(1)?, m(2)?, m(3)?);
    let cut = |lo: f64, hi: f64| 100.0 * (lo - hi) / lo;
    let detail = format!(
        "adapscapso s1 {s1:.3} -> s2 {s2:.3} ({:.1}% lower), s3 {s3:.3} -> s4 {s4:.3} ({:.1}% lower); reported average 33.17%",
        cut(s1, s2),
        cut(s3, s4)
    );
    ensure(s2 < s1 && s4 < s3, || detail.clone())?;
    Ok(detail)
}

fn c10_convergence() -> Outcome {
    let rep = run_scenario(&Scenario::s1().with_runs(20), &Method::SWARM, MASTER_SEED, &MethodSettings::default())
        .map_err(|e| e.to_string())?;
    let curve = |m| rep.convergence(m);
    let (ours, pso, sca) = (curve(Method::AdapScaPso), curve(Method::Pso), curve(Method::Scapso));
    for (m, c) in [("adapscapso", &ours), ("pso", &pso), ("scapso", &sca)] {
        ensure(!c.is_empty(), || format!("no {m} convergence data"))?;
    }
    let last = |c: &Vec<f64>| *c.last().unwrap();
    let detail = format!(
        "iteration 0: adapscapso {:.2} vs pso {:.2}; final: adapscapso {:.3}, pso {:.3}, scapso {:.3}",
        ours[0],
        pso[0],
        last(&ours),
        last(&pso),
        last(&sca)
    );
    ensure(ours[0] < pso[0] && last(&ours) < last(&pso).min(last(&sca)), || detail.clone())?;
    Ok(detail)
}

// --------------------------------------------------------------- criterion 11

fn cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_wsnloc"))
        .args(args)
        .current_dir(dir)
        .env_remove("WSNLOC_OUT_DIR")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn same_csvs(dir: &Path, a: &str, b: &str) -> Result<usize, String> {
    let mut n = 0;
    for entry in fs::read_dir(dir.join(a)).map_err(|e| e.to_string())? {
        let name = entry.map_err(|e| e.to_string())?.file_name();
        if Path::new(&name).extension().is_some_and(|e| e == "csv") {
            let x = fs::read(dir.join(a).join(&name)).map_err(|e| e.to_string())?;
            let y = fs::read(dir.join(b).join(&name)).map_err(|e| format!("{b}/{name:?}: {e}"))?;
            ensure(x == y, || format!("{a} and {b} differ in {name:?}"))?;
            n += 1;
        }
    }
    ensure(n > 0, || format!("{a} has no csv outputs"))?;
    Ok(n)
}

fn c11_reproducibility() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = tmp.path();
    let quick = ["--runs", "2", "--iters", "20", "--particles", "15"];
    let with = |base: &[&'static str]| -> Vec<&'static str> { base.iter().chain(&quick).copied().collect() };

    cli(t, &with(&["run", "--scenario", "s3", "--seed", "9", "--out", "run", "--save-deployments"]))?;
    cli(t, &with(&["convergence", "--scenario", "s2", "--seed", "9", "--out", "conv"]))?;
    cli(t, &["replay", "run/deployments/s3/run-001.json", "--run", "1", "--seed", "9", "--out", "replay"])?;
    let mut files = 0;
    for (cmd, dir) in [("run", "run"), ("convergence", "conv"), ("replay", "replay")] {
        let manifest = format!("{dir}/manifest.json");
        let mut args = vec![cmd];
        if cmd == "replay" {
            args.push("run/deployments/s3/run-001.json");
        }
        for k in 1..=2 {
            let out = format!("{dir}-again-{k}");
            let mut a = args.clone();
            a.extend(["--config", &manifest, "--out", &out]);
            cli(t, &a)?;
            files += same_csvs(t, dir, &out)?;
        }
    }
    Ok(format!("run, convergence and replay each rerun twice from their manifests; {files} csv comparisons identical"))
}
