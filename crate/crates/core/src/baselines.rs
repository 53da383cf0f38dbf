//! Comparison methods: DV-Hop, and PSO / SCAPSO with a DV-Hop fitness.
//!
//! DV-Hop runs in three phases. Hop counts are flooded from every anchor;
//! each anchor turns the hop counts to its peers into an average hop size;
//! an unknown node multiplies its nearest anchor's hop size by its hop count
//! to every anchor and multilaterates from those distance estimates.
//!
//! The swarm baselines minimize the mean squared mismatch between those
//! DV-Hop distance estimates and candidate distances, starting from a swarm
//! spread over the whole area. SCAPSO is the hybrid without its
//! localization-specific tuning: a constant 0.5 switching probability,
//! conventional coefficients and random initialization.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::localization::{Localization, LocalizationResult, NodeStatus};
use crate::network::{CommGraph, Deployment};
use crate::seed;
use crate::swarm::{self, SelectorPolicy, SwarmParams};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DvHopTables {
    /// Average meters per hop, per anchor.
    pub hop_size: BTreeMap<usize, f64>,
    /// Distance estimate from an unknown node to an anchor, keyed by
    /// `(unknown, anchor)`.
    pub est_dist: BTreeMap<(usize, usize), f64>,
}

impl DvHopTables {
    /// `(anchor position, estimated distance)` for every anchor `node` has an
    /// estimate to, in anchor-id order.
    pub fn references(&self, node: usize, d: &Deployment) -> Vec<(Point, f64)> {
        self.est_dist
            .range((node, 0)..=(node, usize::MAX))
            .map(|(&(_, a), &dist)| (d.pos(a), dist))
            .collect()
    }
}

pub fn dvhop_tables(d: &Deployment, g: &CommGraph) -> Result<DvHopTables> {
    let mut tables = DvHopTables::default();
    for a in d.anchors() {
        let (mut dist_sum, mut hop_sum) = (0.0, 0u64);
        for b in d.anchors().filter(|b| b.id != a.id) {
            if let Some(h) = g.hops(a.id, b.id) {
                dist_sum += a.pos().distance(&b.pos());
                hop_sum += u64::from(h);
            }
        }
        if hop_sum > 0 {
            tables.hop_size.insert(a.id, dist_sum / hop_sum as f64);
        }
    }
    if tables.hop_size.is_empty() {
        return Err(Error::InsufficientAnchors);
    }
    for u in d.unknowns() {
        let Ok((nearest, _)) = g.nearest_anchor(u.id) else {
            continue;
        };
        let Some(&size) = tables.hop_size.get(&nearest) else {
            continue;
        };
        for (&a, &h) in &g.hop_table[u.id] {
            tables.est_dist.insert((u.id, a), size * f64::from(h));
        }
    }
    Ok(tables)
}

/// Linear least-squares position from `(reference, distance)` pairs.
///
/// Subtracting the last circle equation from the others gives a linear system
/// in `(x, y)`, solved through its normal equations. Fewer than three
/// references or a (near) rank-deficient system are rejected.
pub fn multilaterate(refs: &[(Point, f64)]) -> std::result::Result<Point, NodeStatus> {
    if refs.len() < 3 {
        return Err(NodeStatus::InsufficientAnchors);
    }
    let (last, d_last) = refs[refs.len() - 1];
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(p, d) in &refs[..refs.len() - 1] {
        let r0 = 2.0 * (last.x - p.x);
        let r1 = 2.0 * (last.y - p.y);
        let rhs = d * d - d_last * d_last - p.x * p.x + last.x * last.x - p.y * p.y + last.y * last.y;
        a11 += r0 * r0;
        a12 += r0 * r1;
        a22 += r1 * r1;
        b1 += r0 * rhs;
        b2 += r1 * rhs;
    }
    let det = a11 * a22 - a12 * a12;
    let scale = (a11 + a22) * (a11 + a22);
    if !(det > 1e-10 * scale) {
        return Err(NodeStatus::DegenerateGeometry);
    }
    Ok(Point::new((a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det))
}

fn clamp_to_area(p: Point, d: &Deployment) -> Point {
    d.bounds().clamp(p.into()).into()
}

/// DV-Hop localization of every unknown node. Nodes with fewer than three
/// distance estimates, or with collinear anchors, are skipped.
pub fn dvhop_localize(d: &Deployment, g: &CommGraph) -> LocalizationResult {
    let mut result = LocalizationResult::default();
    let tables = dvhop_tables(d, g).ok();
    for u in d.unknowns() {
        if g.hop_table[u.id].is_empty() {
            result.record(u.id, NodeStatus::Unreachable, None);
            continue;
        }
        let refs = tables.as_ref().map(|t| t.references(u.id, d)).unwrap_or_default();
        match multilaterate(&refs) {
            Ok(p) => {
                let p = clamp_to_area(p, d);
                let residual = refs.iter().map(|(a, dist)| (dist - a.distance(&p)).powi(2)).sum::<f64>() / refs.len() as f64;
                result.record(u.id, NodeStatus::Localized, Some((p, residual)));
            }
            Err(status) => result.record(u.id, status, None),
        }
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMethod {
    Pso,
    Scapso,
}

impl BaselineMethod {
    /// Conventional coefficients for the untuned baselines.
    pub fn params(self, comm_range: f64) -> SwarmParams {
        let mut p = SwarmParams {
            c1: 2.0,
            c2: 2.0,
            ..SwarmParams::default()
        };
        if self == BaselineMethod::Scapso {
            p.a = 2.0;
        }
        p.with_comm_range(comm_range)
    }

    pub fn policy(self) -> SelectorPolicy {
        match self {
            BaselineMethod::Pso => SelectorPolicy::PsoOnly,
            BaselineMethod::Scapso => SelectorPolicy::Fixed(0.5),
        }
    }
}

/// Mean squared mismatch between DV-Hop distance estimates and candidate
/// distances to the referenced anchors.
pub fn dvhop_fitness(candidate: &[f64; 2], refs: &[(Point, f64)]) -> f64 {
    let sum: f64 = refs
        .iter()
        .map(|(a, est)| {
            let (dx, dy) = (candidate[0] - a.x, candidate[1] - a.y);
            let r = est - (dx * dx + dy * dy).sqrt();
            r * r
        })
        .sum();
    sum / refs.len() as f64
}

/// PSO or SCAPSO localization of every unknown node against the DV-Hop
/// fitness. Nodes are solved independently, each with its own stream.
pub fn baseline_localize<R: Rng + ?Sized>(
    method: BaselineMethod,
    d: &Deployment,
    g: &CommGraph,
    tables: &DvHopTables,
    p: &SwarmParams,
    rng: &mut R,
) -> Result<Localization> {
    p.validate()?;
    let base = rng.random::<u64>();
    let bounds = d.bounds();
    let mut out = Localization::default();
    for u in d.unknowns() {
        if g.hop_table[u.id].is_empty() {
            out.result.record(u.id, NodeStatus::Unreachable, None);
            continue;
        }
        let refs = tables.references(u.id, d);
        if refs.is_empty() {
            out.result.record(u.id, NodeStatus::InsufficientAnchors, None);
            continue;
        }
        let mut node_rng = seed::stream(base, u.id as u64);
        let init = swarm::uniform_particles(p.n_particles, &bounds, p.comm_range, &mut node_rng);
        let opt = swarm::minimize(|x| dvhop_fitness(x, &refs), init, &bounds, p, method.policy(), &mut node_rng);
        let status = if refs.len() < 3 {
            NodeStatus::AmbiguousGeometry
        } else {
            NodeStatus::Localized
        };
        out.result.record(u.id, status, Some((opt.best.into(), opt.best_fitness)));
        out.traces.insert(u.id, opt.trace);
    }
    Ok(out)
}
