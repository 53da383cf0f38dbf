//! Deployments, the one-hop communication graph and range measurements.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Anchor,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub kind: NodeKind,
}

impl Node {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn is_anchor(&self) -> bool {
        self.kind == NodeKind::Anchor
    }
}

/// A set of sensor nodes scattered over a rectangular area.
///
/// Node ids are dense, `nodes[i].id == i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Deployment {
    pub area_width: f64,
    pub area_height: f64,
    pub comm_range: f64,
    pub nodes: Vec<Node>,
}

impl Deployment {
    /// Builds a deployment from explicit nodes and checks every invariant.
    pub fn new(area_width: f64, area_height: f64, comm_range: f64, nodes: Vec<Node>) -> Result<Self> {
        let d = Self {
            area_width,
            area_height,
            comm_range,
            nodes,
        };
        d.validate()?;
        Ok(d)
    }

    /// Scatters `n_nodes` uniformly over the area and marks
    /// `round(n_nodes * anchor_ratio)` of them, chosen uniformly, as anchors.
    pub fn deploy<R: Rng + ?Sized>(
        n_nodes: usize,
        anchor_ratio: f64,
        area: (f64, f64),
        comm_range: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if n_nodes < 3 {
            return Err(Error::InvalidDeployment(format!(
                "n_nodes must be at least 3, got {n_nodes}"
            )));
        }
        if !(anchor_ratio > 0.0 && anchor_ratio < 1.0) {
            return Err(Error::InvalidDeployment(format!(
                "anchor_ratio must lie in (0, 1), got {anchor_ratio}"
            )));
        }
        let n_anchors = (n_nodes as f64 * anchor_ratio).round() as usize;
        if n_anchors == 0 {
            return Err(Error::InvalidDeployment(format!(
                "anchor_ratio {anchor_ratio} yields no anchors for {n_nodes} nodes"
            )));
        }
        let (w, h) = area;
        let mut nodes: Vec<Node> = (0..n_nodes)
            .map(|id| Node {
                id,
                x: rng.random::<f64>() * w,
                y: rng.random::<f64>() * h,
                kind: NodeKind::Unknown,
            })
            .collect();
        for i in rand::seq::index::sample(rng, n_nodes, n_anchors.min(n_nodes)) {
            nodes[i].kind = NodeKind::Anchor;
        }
        Self::new(w, h, comm_range, nodes)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDeployment(m));
        if !(self.area_width.is_finite() && self.area_width > 0.0) {
            return bad(format!("area_width must be positive, got {}", self.area_width));
        }
        if !(self.area_height.is_finite() && self.area_height > 0.0) {
            return bad(format!("area_height must be positive, got {}", self.area_height));
        }
        if !(self.comm_range.is_finite() && self.comm_range > 0.0) {
            return bad(format!("comm_range must be positive, got {}", self.comm_range));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return bad(format!("nodes[{i}].id is {}, expected {i}", n.id));
            }
            if !(0.0..=self.area_width).contains(&n.x) {
                return bad(format!("nodes[{i}].x = {} lies outside the area", n.x));
            }
            if !(0.0..=self.area_height).contains(&n.y) {
                return bad(format!("nodes[{i}].y = {} lies outside the area", n.y));
            }
        }
        if !self.nodes.iter().any(Node::is_anchor) {
            return bad("nodes: at least one anchor is required".into());
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: Self = serde_json::from_str(s).map_err(|e| Error::InvalidDeployment(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("deployment serializes")
    }

    pub fn bounds(&self) -> Bounds<2> {
        Bounds::rect(self.area_width, self.area_height)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: usize) -> Result<&Node> {
        self.nodes.get(id).ok_or(Error::UnknownNode(id))
    }

    pub fn pos(&self, id: usize) -> Point {
        self.nodes[id].pos()
    }

    pub fn anchors(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_anchor())
    }

    pub fn unknowns(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| !n.is_anchor())
    }
}

/// One-hop adjacency plus per-anchor BFS hop counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    /// Per node, `(neighbor id, true distance)` sorted by neighbor id.
    pub adjacency: Vec<Vec<(usize, f64)>>,
    /// Per node, anchor id to hop count. Unreachable anchors are absent.
    pub hop_table: Vec<BTreeMap<usize, u32>>,
}

impl CommGraph {
    /// Connects every pair within `comm_range` (inclusive) and floods hop
    /// counts from each anchor.
    pub fn build(d: &Deployment) -> Self {
        let n = d.len();
        let range = d.comm_range;
        let mut adjacency = vec![Vec::new(); n];
        for j in 0..n {
            for k in (j + 1)..n {
                let dist = d.pos(j).distance(&d.pos(k));
                if dist <= range {
                    adjacency[j].push((k, dist));
                    adjacency[k].push((j, dist));
                }
            }
        }
        for row in &mut adjacency {
            row.sort_by_key(|&(k, _)| k);
        }

        let mut hop_table = vec![BTreeMap::new(); n];
        let mut dist = vec![u32::MAX; n];
        let mut queue = VecDeque::new();
        for anchor in d.anchors().map(|a| a.id) {
            dist.fill(u32::MAX);
            dist[anchor] = 0;
            queue.push_back(anchor);
            while let Some(u) = queue.pop_front() {
                hop_table[u].insert(anchor, dist[u]);
                for &(v, _) in &adjacency[u] {
                    if dist[v] == u32::MAX {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        Self {
            adjacency,
            hop_table,
        }
    }

    pub fn neighbors(&self, j: usize) -> &[(usize, f64)] {
        &self.adjacency[j]
    }

    /// True distance of edge `(j, k)`, if it exists.
    pub fn edge(&self, j: usize, k: usize) -> Option<f64> {
        let row = self.adjacency.get(j)?;
        row.binary_search_by_key(&k, |&(id, _)| id)
            .ok()
            .map(|i| row[i].1)
    }

    pub fn hops(&self, node: usize, anchor: usize) -> Option<u32> {
        self.hop_table.get(node)?.get(&anchor).copied()
    }

    /// The anchor with the fewest hops to `node`, smallest id on ties.
    pub fn nearest_anchor(&self, node: usize) -> Result<(usize, u32)> {
        self.hop_table
            .get(node)
            .ok_or(Error::UnknownNode(node))?
            .iter()
            .min_by_key(|&(_, &h)| h)
            .map(|(&a, &h)| (a, h))
            .ok_or(Error::Unlocalizable(node))
    }

    /// Range measurement between one-hop neighbors: the true distance plus
    /// zero-mean Gaussian noise, floored at zero. No draw is made when
    /// `noise_sigma` is zero.
    pub fn measure_distance<R: Rng + ?Sized>(
        &self,
        j: usize,
        k: usize,
        noise_sigma: f64,
        rng: &mut R,
    ) -> Result<f64> {
        let d = self.edge(j, k).ok_or(Error::NotNeighbors(j, k))?;
        if noise_sigma == 0.0 {
            return Ok(d);
        }
        let z: f64 = rng.sample(StandardNormal);
        Ok((d + noise_sigma * z).max(0.0))
    }
}
