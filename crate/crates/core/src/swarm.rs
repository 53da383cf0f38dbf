//! Swarm optimizer kernel.
//!
//! Particles move either by the PSO velocity rule or by the sine-cosine (SCA)
//! rule. Which rule a particle uses at iteration `t` is decided by a
//! [`SelectorPolicy`]; the adaptive policy picks SCA with probability
//! `exp(-beta * t / T)`, so early iterations explore and late ones exploit.
//!
//! Iterations are numbered `0..T`. The trace holds the global-best fitness
//! after each full sweep, so it has exactly `T` entries.

use std::f64::consts::TAU;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Bounds;

/// Optimizer constants. `Default` yields the tuned localization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwarmParams {
    pub omega_max: f64,
    pub omega_min: f64,
    pub c1: f64,
    pub c2: f64,
    /// Initial SCA amplitude.
    pub a: f64,
    /// Decay rate of the SCA selection probability.
    pub beta: f64,
    pub max_iters: usize,
    pub n_particles: usize,
    /// Base initial speed per hop, meters.
    pub delta: f64,
    /// One-hop range, meters. Also the per-component velocity limit.
    pub comm_range: f64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            omega_max: 0.9,
            omega_min: 0.4,
            c1: 2.2,
            c2: 1.8,
            a: 2.5,
            beta: 3.0,
            max_iters: 60,
            n_particles: 30,
            delta: 0.5,
            comm_range: 30.0,
        }
    }
}

impl SwarmParams {
    pub fn with_comm_range(mut self, comm_range: f64) -> Self {
        self.comm_range = comm_range;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidParams(m.to_string()));
        let finite = [
            self.omega_max,
            self.omega_min,
            self.c1,
            self.c2,
            self.a,
            self.beta,
            self.delta,
            self.comm_range,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("all parameters must be finite");
        }
        if !(self.omega_min > 0.0) {
            return fail("omega_min must be positive");
        }
        if self.omega_max < self.omega_min {
            return fail("omega_max must be >= omega_min");
        }
        if self.max_iters < 1 {
            return fail("max_iters must be >= 1");
        }
        if self.n_particles < 1 {
            return fail("n_particles must be >= 1");
        }
        if !(self.a > 0.0) {
            return fail("a must be positive");
        }
        if self.beta < 0.0 {
            return fail("beta must be non-negative");
        }
        if self.c1 < 0.0 || self.c2 < 0.0 {
            return fail("c1 and c2 must be non-negative");
        }
        if self.delta < 0.0 {
            return fail("delta must be non-negative");
        }
        if !(self.comm_range > 0.0) {
            return fail("comm_range must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<const D: usize> {
    pub pos: [f64; D],
    pub vel: [f64; D],
    pub pbest: [f64; D],
    pub pbest_fitness: f64,
}

impl<const D: usize> Particle<D> {
    /// A particle whose personal best is its starting position, not yet
    /// evaluated.
    pub fn new(pos: [f64; D], vel: [f64; D]) -> Self {
        Self {
            pos,
            vel,
            pbest: pos,
            pbest_fitness: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Module {
    Sca,
    Pso,
}

/// `omega(t) = omega_max - (omega_max - omega_min) * t / T`.
pub fn inertia_weight(t: usize, p: &SwarmParams) -> f64 {
    p.omega_max - (p.omega_max - p.omega_min) * t as f64 / p.max_iters as f64
}

/// `r1(t) = a * (1 - t / T)`.
pub fn sca_amplitude(t: usize, p: &SwarmParams) -> f64 {
    p.a * (1.0 - t as f64 / p.max_iters as f64)
}

/// Probability that the adaptive selector picks SCA at iteration `t`.
pub fn sca_probability(t: usize, p: &SwarmParams) -> f64 {
    (-p.beta * t as f64 / p.max_iters as f64).exp()
}

/// Uniform draws consumed by one PSO step, one per attraction term and
/// shared across dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoDraws {
    pub r_personal: f64,
    pub r_global: f64,
}

impl PsoDraws {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r_personal = rng.random::<f64>();
        let r_global = rng.random::<f64>();
        Self {
            r_personal,
            r_global,
        }
    }
}

/// Draws consumed by one SCA step, shared across dimensions:
/// `r2 ~ U[0, 2pi)`, `r3 ~ U[-1, 1)`, `r4 ~ U[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaDraws {
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

impl ScaDraws {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r2 = TAU * rng.random::<f64>();
        let r3 = 2.0 * rng.random::<f64>() - 1.0;
        let r4 = rng.random::<f64>();
        Self { r2, r3, r4 }
    }
}

/// PSO move with explicit draws. The new velocity is clamped to
/// `[-L, L]` per component before it is added to the position; the position
/// is then clamped to `bounds`.
pub fn pso_update<const D: usize>(
    pt: &Particle<D>,
    g: &[f64; D],
    omega: f64,
    p: &SwarmParams,
    bounds: &Bounds<D>,
    draws: PsoDraws,
) -> Particle<D> {
    let mut next = *pt;
    let vmax = p.comm_range;
    for d in 0..D {
        let v = omega * pt.vel[d]
            + p.c1 * draws.r_personal * (pt.pbest[d] - pt.pos[d])
            + p.c2 * draws.r_global * (g[d] - pt.pos[d]);
        next.vel[d] = v.clamp(-vmax, vmax);
        next.pos[d] = pt.pos[d] + next.vel[d];
    }
    next.pos = bounds.clamp(next.pos);
    next
}

pub fn pso_step<const D: usize, R: Rng + ?Sized>(
    pt: &Particle<D>,
    g: &[f64; D],
    omega: f64,
    p: &SwarmParams,
    bounds: &Bounds<D>,
    rng: &mut R,
) -> Particle<D> {
    pso_update(pt, g, omega, p, bounds, PsoDraws::sample(rng))
}

/// SCA move with explicit amplitude and draws. Velocity is left untouched.
pub fn sca_update<const D: usize>(
    pt: &Particle<D>,
    g: &[f64; D],
    r1: f64,
    bounds: &Bounds<D>,
    draws: ScaDraws,
) -> Particle<D> {
    let wave = if draws.r4 < 0.5 {
        draws.r2.sin()
    } else {
        draws.r2.cos()
    };
    let mut next = *pt;
    for d in 0..D {
        next.pos[d] = pt.pos[d] + r1 * wave * (draws.r3 * g[d] - pt.pos[d]).abs();
    }
    next.pos = bounds.clamp(next.pos);
    next
}

pub fn sca_step<const D: usize, R: Rng + ?Sized>(
    pt: &Particle<D>,
    g: &[f64; D],
    t: usize,
    p: &SwarmParams,
    bounds: &Bounds<D>,
    rng: &mut R,
) -> Particle<D> {
    sca_update(pt, g, sca_amplitude(t, p), bounds, ScaDraws::sample(rng))
}

/// Adaptive selector: SCA iff `s < exp(-beta * t / T)` with `s ~ U[0, 1)`.
pub fn select_module<R: Rng + ?Sized>(t: usize, p: &SwarmParams, rng: &mut R) -> Module {
    let s = rng.random::<f64>();
    if s < sca_probability(t, p) {
        Module::Sca
    } else {
        Module::Pso
    }
}

/// How each particle picks its move, once per particle per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorPolicy {
    /// SCA with probability `exp(-beta * t / T)`.
    Adaptive,
    /// SCA with a constant probability.
    Fixed(f64),
    /// Plain PSO; no selector draw is consumed.
    PsoOnly,
}

impl SelectorPolicy {
    pub fn select<R: Rng + ?Sized>(&self, t: usize, p: &SwarmParams, rng: &mut R) -> Module {
        match *self {
            SelectorPolicy::Adaptive => select_module(t, p, rng),
            SelectorPolicy::Fixed(prob) => {
                if rng.random::<f64>() < prob {
                    Module::Sca
                } else {
                    Module::Pso
                }
            }
            SelectorPolicy::PsoOnly => Module::Pso,
        }
    }
}

/// Global-best fitness after each iteration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub best_fitness_per_iter: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.best_fitness_per_iter.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best_fitness_per_iter.is_empty()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.best_fitness_per_iter.windows(2).all(|w| w[1] <= w[0])
    }

    /// Writes `iteration,best_fitness` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "best_fitness"])?;
        for (t, f) in self.best_fitness_per_iter.iter().enumerate() {
            out.write_record([t.to_string(), f.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SwarmState<const D: usize> {
    pub particles: Vec<Particle<D>>,
    pub gbest: [f64; D],
    pub gbest_fitness: f64,
    pub iter: usize,
}

impl<const D: usize> SwarmState<D> {
    fn refresh_gbest(&mut self) {
        for pt in &self.particles {
            if pt.pbest_fitness < self.gbest_fitness {
                self.gbest_fitness = pt.pbest_fitness;
                self.gbest = pt.pbest;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimum<const D: usize> {
    pub best: [f64; D],
    pub best_fitness: f64,
    pub trace: Trace,
    /// Number of SCA moves made over the whole run.
    pub sca_moves: usize,
    /// Number of PSO moves made over the whole run.
    pub pso_moves: usize,
}

/// Runs `p.max_iters` sweeps over the swarm and returns the global best.
///
/// Initial personal bests are re-evaluated, so `init` only needs positions,
/// velocities and `pbest` points. Within a sweep every particle moves
/// against the global best from the previous sweep; the global best is
/// refreshed once the sweep is complete.
pub fn optimize<const D: usize, F, E, R>(
    mut fitness: F,
    init: Vec<Particle<D>>,
    bounds: &Bounds<D>,
    p: &SwarmParams,
    policy: SelectorPolicy,
    rng: &mut R,
) -> std::result::Result<Optimum<D>, E>
where
    F: FnMut(&[f64; D]) -> std::result::Result<f64, E>,
    R: Rng + ?Sized,
{
    assert!(!init.is_empty(), "optimize needs at least one particle");
    let mut state = SwarmState {
        particles: init,
        gbest: [0.0; D],
        gbest_fitness: f64::INFINITY,
        iter: 0,
    };
    for pt in &mut state.particles {
        pt.pbest_fitness = fitness(&pt.pbest)?;
    }
    state.gbest = state.particles[0].pbest;
    state.refresh_gbest();

    let mut trace = Vec::with_capacity(p.max_iters);
    let (mut sca_moves, mut pso_moves) = (0, 0);
    for t in 0..p.max_iters {
        state.iter = t;
        let g = state.gbest;
        let omega = inertia_weight(t, p);
        for pt in &mut state.particles {
            let next = match policy.select(t, p, rng) {
                Module::Sca => {
                    sca_moves += 1;
                    sca_step(pt, &g, t, p, bounds, rng)
                }
                Module::Pso => {
                    pso_moves += 1;
                    pso_step(pt, &g, omega, p, bounds, rng)
                }
            };
            *pt = next;
            let f = fitness(&pt.pos)?;
            if f < pt.pbest_fitness {
                pt.pbest = pt.pos;
                pt.pbest_fitness = f;
            }
        }
        state.refresh_gbest();
        trace.push(state.gbest_fitness);
    }
    Ok(Optimum {
        best: state.gbest,
        best_fitness: state.gbest_fitness,
        trace: Trace {
            best_fitness_per_iter: trace,
        },
        sca_moves,
        pso_moves,
    })
}

/// [`optimize`] for fitness functions that cannot fail.
pub fn minimize<const D: usize, F, R>(
    mut fitness: F,
    init: Vec<Particle<D>>,
    bounds: &Bounds<D>,
    p: &SwarmParams,
    policy: SelectorPolicy,
    rng: &mut R,
) -> Optimum<D>
where
    F: FnMut(&[f64; D]) -> f64,
    R: Rng + ?Sized,
{
    match optimize(
        |x: &[f64; D]| Ok::<_, std::convert::Infallible>(fitness(x)),
        init,
        bounds,
        p,
        policy,
        rng,
    ) {
        Ok(o) => o,
        Err(e) => match e {},
    }
}

/// Particles with positions uniform over `bounds` and velocity components
/// uniform over `[-vmax, vmax]`.
pub fn uniform_particles<const D: usize, R: Rng + ?Sized>(
    n: usize,
    bounds: &Bounds<D>,
    vmax: f64,
    rng: &mut R,
) -> Vec<Particle<D>> {
    (0..n)
        .map(|_| {
            let mut pos = [0.0; D];
            let mut vel = [0.0; D];
            for d in 0..D {
                pos[d] = bounds.lo[d] + rng.random::<f64>() * (bounds.hi[d] - bounds.lo[d]);
            }
            for v in vel.iter_mut() {
                *v = vmax * (2.0 * rng.random::<f64>() - 1.0);
            }
            Particle::new(pos, vel)
        })
        .collect()
}
