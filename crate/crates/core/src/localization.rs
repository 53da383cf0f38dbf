//! AdapSCA-PSO localizer.
//!
//! Each unknown node gets its own swarm. Particles start inside the one-hop
//! disk of the node's nearest anchor with a speed proportional to the hop
//! count, and minimize the weighted squared mismatch between measured ranges
//! and candidate distances to one-hop neighbors. Nodes are solved nearest
//! tier first so that later nodes can range against earlier estimates.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{CommGraph, Deployment};
use crate::seed;
use crate::swarm::{self, Particle, SelectorPolicy, SwarmParams, Trace};

pub const ANCHOR_WEIGHT: f64 = 0.8;
pub const UNKNOWN_WEIGHT: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub id: usize,
    /// Measured range to the neighbor, meters.
    pub measured: f64,
    /// Anchor position, or the neighbor's current estimate.
    pub pos: Point,
    pub weight: f64,
}

/// Ranging information available to one node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NeighborContext {
    pub entries: Vec<NeighborEntry>,
}

impl NeighborContext {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn anchor_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.weight == ANCHOR_WEIGHT)
            .count()
    }
}

/// `sum_k w_k * (d_jk - |X_j - X_k|)^2` over the context.
pub fn ranging_fitness(candidate: &[f64; 2], ctx: &NeighborContext) -> Result<f64> {
    if ctx.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    Ok(ctx
        .entries
        .iter()
        .map(|e| {
            let (dx, dy) = (candidate[0] - e.pos.x, candidate[1] - e.pos.y);
            let r = e.measured - (dx * dx + dy * dy).sqrt();
            e.weight * r * r
        })
        .sum())
}

/// Uniform point in the disk of `radius` around `center`, by rejection from
/// the bounding square.
pub fn sample_disk<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Point {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        if u * u + v * v <= 1.0 {
            return Point::new(center.x + radius * u, center.y + radius * v);
        }
    }
}

/// Hop-aware initial swarm for `node`.
///
/// Positions are uniform over the one-hop disk of the nearest anchor and then
/// clamped into the deployment area. Each velocity component is
/// `delta * h * (2r - 1)` with its own `r ~ U(0, 1)`.
pub fn init_swarm<R: Rng + ?Sized>(
    node: usize,
    g: &CommGraph,
    d: &Deployment,
    p: &SwarmParams,
    rng: &mut R,
) -> Result<Vec<Particle<2>>> {
    let (anchor, hops) = g.nearest_anchor(node)?;
    let center = d.pos(anchor);
    let bounds = d.bounds();
    let speed = p.delta * f64::from(hops);
    Ok((0..p.n_particles)
        .map(|_| {
            let pos = bounds.clamp(sample_disk(center, p.comm_range, rng).into());
            let vel = [
                speed * (2.0 * rng.random::<f64>() - 1.0),
                speed * (2.0 * rng.random::<f64>() - 1.0),
            ];
            Particle::new(pos, vel)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Localized,
    /// Localized, but too few references to pin a unique position.
    AmbiguousGeometry,
    /// No anchor reachable through the graph.
    Unreachable,
    /// No neighbor with a known or estimated position.
    EmptyContext,
    /// Anchors collinear or otherwise rank deficient.
    DegenerateGeometry,
    /// Too few anchors with a usable distance estimate.
    InsufficientAnchors,
}

impl NodeStatus {
    pub fn is_estimated(self) -> bool {
        matches!(self, NodeStatus::Localized | NodeStatus::AmbiguousGeometry)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeStatus::Localized => "localized",
            NodeStatus::AmbiguousGeometry => "ambiguous_geometry",
            NodeStatus::Unreachable => "unreachable",
            NodeStatus::EmptyContext => "empty_context",
            NodeStatus::DegenerateGeometry => "degenerate_geometry",
            NodeStatus::InsufficientAnchors => "insufficient_anchors",
        }
    }
}

/// Columns of the per-node estimates CSV, after the optional `method`.
pub const ESTIMATE_COLUMNS: [&str; 7] = ["node_id", "true_x", "true_y", "est_x", "est_y", "error_m", "status"];

/// Estimates for every unknown node of a deployment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocalizationResult {
    pub estimates: BTreeMap<usize, Point>,
    pub skipped: Vec<usize>,
    pub per_node_fitness: BTreeMap<usize, f64>,
    pub status: BTreeMap<usize, NodeStatus>,
}

impl LocalizationResult {
    pub(crate) fn record(&mut self, node: usize, status: NodeStatus, estimate: Option<(Point, f64)>) {
        self.status.insert(node, status);
        match estimate {
            Some((pos, fit)) if status.is_estimated() => {
                self.estimates.insert(node, pos);
                self.per_node_fitness.insert(node, fit);
            }
            _ => self.skipped.push(node),
        }
    }

    /// Writes `node_id,true_x,true_y,est_x,est_y,error_m,status` rows, one per
    /// unknown node, prefixed by a `method` column when one is given. Skipped
    /// nodes leave the estimate and error fields empty.
    pub fn write_csv<W: Write>(&self, d: &Deployment, method: Option<&str>, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = ESTIMATE_COLUMNS.to_vec();
        if method.is_some() {
            header.insert(0, "method");
        }
        out.write_record(&header)?;
        self.write_rows(d, method, &mut out)?;
        out.flush()?;
        Ok(())
    }

    /// Writes one row per unknown node, without a header.
    pub fn write_rows<W: Write>(
        &self,
        d: &Deployment,
        method: Option<&str>,
        out: &mut csv::Writer<W>,
    ) -> csv::Result<()> {
        for n in d.unknowns() {
            let status = self.status.get(&n.id).copied().unwrap_or(NodeStatus::Unreachable);
            let (ex, ey, err) = match self.estimates.get(&n.id) {
                Some(e) => (e.x.to_string(), e.y.to_string(), e.distance(&n.pos()).to_string()),
                None => (String::new(), String::new(), String::new()),
            };
            let mut row = vec![
                n.id.to_string(),
                n.x.to_string(),
                n.y.to_string(),
                ex,
                ey,
                err,
                status.as_str().to_string(),
            ];
            if let Some(m) = method {
                row.insert(0, m.to_string());
            }
            out.write_record(&row)?;
        }
        Ok(())
    }
}

/// Result of a localizer run: estimates plus, per node, the convergence
/// trace of its first solve. That solve starts from the hop-aware
/// initialization with no earlier estimate to fall back on.
#[derive(Debug, Clone, Default)]
pub struct Localization {
    pub result: LocalizationResult,
    pub traces: BTreeMap<usize, Trace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizeOptions {
    /// Full passes over the unknown nodes. Later passes re-solve every node
    /// against the estimates of the previous ones.
    pub refine_passes: usize,
    pub noise_sigma: f64,
    /// Solve nodes of the same hop tier concurrently. Same-tier nodes then
    /// no longer see each other's estimates within a pass, so results differ
    /// from the sequential order.
    pub parallel_tiers: bool,
    /// References (anchors plus estimated neighbors) a node needs before it
    /// is solved during the refinement passes.
    pub min_references: usize,
    /// Minimum [`reference_spread`] during the refinement passes, as a
    /// fraction of the communication range.
    pub min_spread: f64,
}

impl Default for LocalizeOptions {
    fn default() -> Self {
        Self {
            refine_passes: 2,
            noise_sigma: 0.0,
            parallel_tiers: false,
            min_references: MIN_REFERENCES,
            min_spread: MIN_SPREAD,
        }
    }
}

/// References needed to pin a point in the plane.
pub const MIN_REFERENCES: usize = 3;
/// Default minimum reference spread, as a fraction of the range.
pub const MIN_SPREAD: f64 = 0.05;

/// Standard deviation of the reference positions along their narrowest
/// axis: the square root of the smaller eigenvalue of their covariance.
/// Zero for fewer than two references or collinear ones.
pub fn reference_spread(ctx: &NeighborContext) -> f64 {
    if ctx.len() < 2 {
        return 0.0;
    }
    let n = ctx.len() as f64;
    let mx = ctx.entries.iter().map(|e| e.pos.x).sum::<f64>() / n;
    let my = ctx.entries.iter().map(|e| e.pos.y).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for e in &ctx.entries {
        let (dx, dy) = (e.pos.x - mx, e.pos.y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let (sxx, sxy, syy) = (sxx / n, sxy / n, syy / n);
    let half_trace = 0.5 * (sxx + syy);
    let gap = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
    (half_trace - gap).max(0.0).sqrt()
}

/// Range measurements for every edge, taken once per localizer run.
struct Ranges {
    rows: Vec<Vec<f64>>,
}

impl Ranges {
    fn measure<R: Rng + ?Sized>(g: &CommGraph, sigma: f64, rng: &mut R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = g.adjacency.iter().map(|r| vec![0.0; r.len()]).collect();
        for (j, row) in g.adjacency.iter().enumerate() {
            for (slot, &(k, _)) in row.iter().enumerate() {
                if k > j {
                    let m = g.measure_distance(j, k, sigma, rng)?;
                    rows[j][slot] = m;
                    let back = g.adjacency[k]
                        .binary_search_by_key(&j, |&(id, _)| id)
                        .expect("symmetric adjacency");
                    rows[k][back] = m;
                }
            }
        }
        Ok(Self { rows })
    }
}

fn context(
    node: usize,
    d: &Deployment,
    g: &CommGraph,
    ranges: &Ranges,
    estimates: &[Option<Point>],
) -> NeighborContext {
    let entries = g
        .neighbors(node)
        .iter()
        .zip(&ranges.rows[node])
        .filter_map(|(&(k, _), &measured)| {
            if d.nodes[k].is_anchor() {
                Some(NeighborEntry { id: k, measured, pos: d.pos(k), weight: ANCHOR_WEIGHT })
            } else {
                estimates[k].map(|pos| NeighborEntry { id: k, measured, pos, weight: UNKNOWN_WEIGHT })
            }
        })
        .collect();
    NeighborContext { entries }
}

struct Solve {
    node: usize,
    estimate: Point,
    fitness: f64,
    well_posed: bool,
    trace: Trace,
}

/// Shared inputs of every per-node solve in one localizer run.
struct Problem<'a> {
    d: &'a Deployment,
    g: &'a CommGraph,
    p: &'a SwarmParams,
    policy: SelectorPolicy,
    ranges: Ranges,
    min_references: usize,
    min_spread: f64,
}

impl Problem<'_> {
    /// Solves `node` against the current estimates. With `gated` set, nodes
    /// whose references are not well posed are left for later.
    fn solve(&self, node: usize, estimates: &[Option<Point>], gated: bool, node_seed: u64) -> Result<Option<Solve>> {
        let ctx = context(node, self.d, self.g, &self.ranges, estimates);
        let well_posed = ctx.len() >= self.min_references
            && reference_spread(&ctx) >= self.min_spread * self.p.comm_range;
        if ctx.is_empty() || (gated && !well_posed) {
            return Ok(None);
        }
        debug_assert!(ctx
            .entries
            .iter()
            .all(|e| self.d.nodes[e.id].is_anchor() || estimates[e.id].is_some()));
        let mut rng = seed::stream(node_seed, 0);
        let init = init_swarm(node, self.g, self.d, self.p, &mut rng)?;
        let opt = swarm::optimize(|x| ranging_fitness(x, &ctx), init, &self.d.bounds(), self.p, self.policy, &mut rng)?;
        // Ungated solves can lean on estimates that were themselves guesses,
        // so only gated ones count as well posed.
        let mut solve = Solve {
            node,
            estimate: opt.best.into(),
            fitness: opt.best_fitness,
            well_posed: gated,
            trace: opt.trace,
        };
        // A re-solve never discards a previous estimate that still fits better.
        if let Some(prev) = estimates[node] {
            let f = ranging_fitness(&prev.into(), &ctx)?;
            if f < solve.fitness {
                solve.estimate = prev;
                solve.fitness = f;
            }
        }
        Ok(Some(solve))
    }

    /// One sweep over `order`. Sequential sweeps let each node see the
    /// estimates made earlier in the same sweep; tier-parallel sweeps only
    /// see those of earlier tiers.
    fn sweep(
        &self,
        order: &[(u32, usize)],
        estimates: &mut [Option<Point>],
        gated: bool,
        sweep_seed: u64,
        parallel: bool,
        mut apply: impl FnMut(Solve),
    ) -> Result<()> {
        if parallel {
            for tier in order.chunk_by(|a, b| a.0 == b.0) {
                let snapshot: &[Option<Point>] = estimates;
                let solved: Vec<Option<Solve>> = tier
                    .par_iter()
                    .map(|&(_, node)| self.solve(node, snapshot, gated, seed::derive(sweep_seed, node as u64)))
                    .collect::<Result<_>>()?;
                for s in solved.into_iter().flatten() {
                    estimates[s.node] = Some(s.estimate);
                    apply(s);
                }
            }
        } else {
            for &(_, node) in order {
                if let Some(s) = self.solve(node, estimates, gated, seed::derive(sweep_seed, node as u64))? {
                    estimates[s.node] = Some(s.estimate);
                    apply(s);
                }
            }
        }
        Ok(())
    }
}

/// Localizes every unknown node of `d`.
///
/// Unknown nodes are visited in ascending order of hops to their nearest
/// anchor, ties by id. Each node ranges against its anchor neighbors (true
/// positions) and against unknown neighbors that already have an estimate.
///
/// During the `refine_passes` full passes a node is only solved once its
/// references are well posed: at least `min_references` of them, spread
/// over at least `min_spread * L` in every direction. An under-determined or
/// near-collinear reference set admits a mirrored solution, and a wrong
/// estimate handed on to neighbors drags whole clusters with it. A final
/// sweep solves the nodes still not well posed with whatever references they
/// have and marks them [`NodeStatus::AmbiguousGeometry`]; nodes with no
/// reference at all are skipped.
pub fn localize_all<R: Rng + ?Sized>(
    d: &Deployment,
    g: &CommGraph,
    p: &SwarmParams,
    policy: SelectorPolicy,
    opts: &LocalizeOptions,
    rng: &mut R,
) -> Result<Localization> {
    p.validate()?;
    if opts.refine_passes < 1 {
        return Err(Error::InvalidParams("refine_passes must be >= 1".into()));
    }
    let base = rng.random::<u64>();
    let problem = Problem {
        d,
        g,
        p,
        policy,
        ranges: Ranges::measure(g, opts.noise_sigma, &mut seed::stream(base, seed::tag("ranges")))?,
        min_references: opts.min_references,
        min_spread: opts.min_spread,
    };

    let mut out = Localization::default();
    let mut order = Vec::new();
    for n in d.unknowns() {
        match g.nearest_anchor(n.id) {
            Ok((_, h)) => order.push((h, n.id)),
            Err(_) => out.result.record(n.id, NodeStatus::Unreachable, None),
        }
    }
    order.sort_unstable();

    let mut estimates: Vec<Option<Point>> = vec![None; d.len()];
    let mut solved: BTreeMap<usize, (f64, bool)> = BTreeMap::new();
    let mut apply = |s: Solve| {
        solved.insert(s.node, (s.fitness, s.well_posed));
        out.traces.entry(s.node).or_insert(s.trace);
    };
    for pass in 0..opts.refine_passes {
        let seed = seed::derive(base, pass as u64);
        problem.sweep(&order, &mut estimates, true, seed, opts.parallel_tiers, &mut apply)?;
    }
    let pending: Vec<(u32, usize)> = order.iter().copied().filter(|&(_, n)| estimates[n].is_none()).collect();
    let seed = seed::derive(base, opts.refine_passes as u64);
    problem.sweep(&pending, &mut estimates, false, seed, opts.parallel_tiers, &mut apply)?;

    for &(_, node) in &order {
        match (estimates[node], solved.get(&node)) {
            (Some(pos), Some(&(fit, well_posed))) => {
                let status = if well_posed {
                    NodeStatus::Localized
                } else {
                    NodeStatus::AmbiguousGeometry
                };
                out.result.record(node, status, Some((pos, fit)));
            }
            _ => out.result.record(node, NodeStatus::EmptyContext, None),
        }
    }
    out.result.skipped.sort_unstable();
    Ok(out)
}
