//! Weighted metric graph storage, continuous positions, and shortest-path
//! primitives.
//!
//! A [`MetricGraph`] is an undirected graph with strictly positive edge
//! lengths. It is viewed both discretely (a node set) and as a continuum in
//! which every edge of length `L` is an interval `[0, L]`; points inside
//! edges are represented by [`GraphPosition`]. Node labels are opaque
//! strings at the API surface and are mapped to dense indices in
//! lexicographic label order at load time, so index order and label order
//! agree everywhere.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;

use crate::{Error, Result};

/// Absolute tolerance for distance and offset comparisons.
pub const DIST_TOL: f64 = 1e-9;

/// Dense node handle into a [`MetricGraph`].
///
/// Ordering follows lexicographic label order of the owning graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A point of the continuous graph: either a node or a point strictly
/// inside an edge, at `offset` from endpoint `u`.
///
/// Edge-interior positions are stored in canonical orientation (`u < v`);
/// boundary offsets normalize to the `Node` form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphPosition {
    Node(NodeId),
    Edge { u: NodeId, v: NodeId, offset: f64 },
}

impl GraphPosition {
    /// Canonical position on edge `(u, v)` at `offset` from `u`.
    /// Offsets at (or numerically past) either end collapse to a node.
    pub fn on_edge(g: &MetricGraph, u: NodeId, v: NodeId, offset: f64) -> GraphPosition {
        let len = g
            .edge_len(u, v)
            .unwrap_or_else(|| panic!("no edge between {} and {}", g.label(u), g.label(v)));
        if offset <= DIST_TOL {
            return GraphPosition::Node(u);
        }
        if offset >= len - DIST_TOL {
            return GraphPosition::Node(v);
        }
        if u < v {
            GraphPosition::Edge { u, v, offset }
        } else {
            GraphPosition::Edge {
                u: v,
                v: u,
                offset: len - offset,
            }
        }
    }

    /// True when the position satisfies its invariants on `g`.
    pub fn is_valid(&self, g: &MetricGraph) -> bool {
        match *self {
            GraphPosition::Node(u) => u.index() < g.node_count(),
            GraphPosition::Edge { u, v, offset } => match g.edge_len(u, v) {
                Some(len) => u < v && offset > 0.0 && offset < len,
                None => false,
            },
        }
    }

    /// Render against the owning graph's labels (`label` for nodes,
    /// `u--v@offset` for edge-interior points).
    pub fn display<'a>(&'a self, g: &'a MetricGraph) -> PositionDisplay<'a> {
        PositionDisplay { pos: self, g }
    }
}

pub struct PositionDisplay<'a> {
    pos: &'a GraphPosition,
    g: &'a MetricGraph,
}

impl fmt::Display for PositionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self.pos {
            GraphPosition::Node(u) => write!(f, "{}", self.g.label(u)),
            GraphPosition::Edge { u, v, offset } => {
                write!(f, "{}--{}@{}", self.g.label(u), self.g.label(v), offset)
            }
        }
    }
}

/// Weighted measure on the node set, stored as dense weights plus total.
#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    weights: Vec<f64>,
    total: f64,
}

impl EmpiricalMeasure {
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "measure weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::EmptyInput("measure".into()));
        }
        Ok(EmpiricalMeasure { weights, total })
    }

    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        Self::from_weights(counts.iter().map(|&c| c as f64).collect())
    }

    pub fn point_mass(g: &MetricGraph, at: NodeId) -> Self {
        let mut weights = vec![0.0; g.node_count()];
        weights[at.index()] = 1.0;
        EmpiricalMeasure {
            weights,
            total: 1.0,
        }
    }

    pub fn uniform(g: &MetricGraph) -> Self {
        EmpiricalMeasure {
            weights: vec![1.0; g.node_count()],
            total: g.node_count() as f64,
        }
    }

    pub fn weight(&self, y: NodeId) -> f64 {
        self.weights[y.index()]
    }

    /// Normalized weight (sums to 1 over the support).
    pub fn normalized(&self, y: NodeId) -> f64 {
        self.weights[y.index()] / self.total
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Nodes with strictly positive weight.
    pub fn support(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| NodeId(i as u32))
    }
}

/// Geodesic from a position toward a destination node: an optional partial
/// first segment (`origin` to `entry[0]`), then whole edges along `entry`.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    pub origin: GraphPosition,
    /// Nodes visited in order; empty iff the origin is the destination.
    pub entry: Vec<NodeId>,
    /// Distance from the origin to `entry[0]` (0 when the origin is a node).
    pub lead: f64,
    pub length: f64,
}

impl GeodesicPath {
    /// Position reached after walking `s` along the path from the origin.
    /// `s` is clamped to `[0, length]`.
    pub fn position_at(&self, g: &MetricGraph, s: f64) -> GraphPosition {
        if self.entry.is_empty() || s <= 0.0 {
            return self.origin;
        }
        if s >= self.length - DIST_TOL {
            return GraphPosition::Node(*self.entry.last().unwrap());
        }
        let mut remaining = s;
        if self.lead > 0.0 {
            if remaining < self.lead - DIST_TOL {
                // Still on the origin's edge, moving toward entry[0].
                if let GraphPosition::Edge { u, v, offset } = self.origin {
                    let first = self.entry[0];
                    let new_offset = if first == u {
                        offset - remaining
                    } else {
                        offset + remaining
                    };
                    return GraphPosition::on_edge(g, u, v, new_offset);
                }
                unreachable!("lead segment without edge origin");
            }
            remaining -= self.lead;
        }
        for w in self.entry.windows(2) {
            let (a, b) = (w[0], w[1]);
            let len = g.edge_len(a, b).expect("geodesic uses graph edges");
            if remaining < len - DIST_TOL {
                return GraphPosition::on_edge(g, a, b, remaining);
            }
            remaining -= len;
        }
        GraphPosition::Node(*self.entry.last().unwrap())
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest distance
        // (ties broken by node index for determinism).
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite weighted undirected graph with positive edge lengths.
///
/// Immutable after construction; all queries are read-only and safe to run
/// from parallel workers.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    labels: Vec<String>,
    index: HashMap<String, u32>,
    adj: Vec<Vec<(u32, f64)>>,
    edges: HashMap<(u32, u32), f64>,
    edge_count: usize,
}

impl MetricGraph {
    /// Build a graph from explicit node labels and edges. Parallel edges
    /// collapse to the minimum length; self-loops are dropped with a
    /// warning. Nodes mentioned only in `nodes` stay isolated.
    pub fn from_parts<S: AsRef<str>>(nodes: &[S], edges: &[(S, S, f64)]) -> Result<Self> {
        let mut label_set: BTreeSet<String> = nodes.iter().map(|s| s.as_ref().to_owned()).collect();
        let mut collapsed: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (u, v, len) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            if !len.is_finite() || *len <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "edge ({u}, {v}) has nonpositive length {len}"
                )));
            }
            if u == v {
                log::warn!("dropping self-loop at node {u:?}");
                label_set.insert(u.to_owned());
                continue;
            }
            label_set.insert(u.to_owned());
            label_set.insert(v.to_owned());
            let key = if u < v {
                (u.to_owned(), v.to_owned())
            } else {
                (v.to_owned(), u.to_owned())
            };
            collapsed
                .entry(key)
                .and_modify(|l| *l = l.min(*len))
                .or_insert(*len);
        }
        if label_set.is_empty() {
            return Err(Error::EmptyInput("graph".into()));
        }

        let labels: Vec<String> = label_set.into_iter().collect();
        let index: HashMap<String, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i as u32))
            .collect();
        let mut adj = vec![Vec::new(); labels.len()];
        let mut edge_map = HashMap::with_capacity(collapsed.len());
        for ((u, v), len) in &collapsed {
            let (ui, vi) = (index[u], index[v]);
            adj[ui as usize].push((vi, *len));
            adj[vi as usize].push((ui, *len));
            let key = if ui < vi { (ui, vi) } else { (vi, ui) };
            edge_map.insert(key, *len);
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        Ok(MetricGraph {
            labels,
            index,
            adj,
            edge_count: edge_map.len(),
            edges: edge_map,
        })
    }

    /// Convenience constructor from an edge slice only.
    pub fn from_edges(edges: &[(&str, &str, f64)]) -> Result<Self> {
        Self::from_parts::<&str>(&[], edges)
    }

    /// Parse the edge-list format: one `<u> <v> <length>` per line,
    /// whitespace-separated, `#` lines ignored.
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `<u> <v> <length>`, got {} fields", fields.len()),
                });
            }
            let len: f64 = fields[2].parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("bad edge length {:?}", fields[2]),
            })?;
            if !len.is_finite() || len <= 0.0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("edge length must be positive, got {len}"),
                });
            }
            edges.push((fields[0].to_owned(), fields[1].to_owned(), len));
        }
        Self::from_parts(&[], &edges.iter().map(|(u, v, l)| (u.as_str(), v.as_str(), *l)).collect::<Vec<_>>())
    }

    pub fn load_path(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn node(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).map(|&i| NodeId(i))
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id.index()]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adj[id.index()].len()
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adj[id.index()].iter().map(|&(n, l)| (NodeId(n), l))
    }

    pub fn edge_len(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let key = if u.0 < v.0 { (u.0, v.0) } else { (v.0, u.0) };
        self.edges.get(&key).copied()
    }

    /// Edges in canonical order (`u < v`, ascending).
    pub fn edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|(&(u, v), &l)| (NodeId(u), NodeId(v), l))
            .collect();
        out.sort_by_key(|&(u, v, _)| (u, v));
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.labels.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.labels.len()];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adj[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.labels.len()
    }

    /// Dijkstra distances from `src`; `f64::INFINITY` marks unreachable.
    pub(crate) fn dijkstra_dense(&self, src: u32) -> Vec<f64> {
        self.dijkstra_impl(src, |_| true, None)
    }

    /// Dijkstra within the subgraph induced by `allowed` nodes.
    pub(crate) fn dijkstra_dense_filtered<F: Fn(u32) -> bool>(&self, src: u32, allowed: F) -> Vec<f64> {
        self.dijkstra_impl(src, allowed, None)
    }

    /// Dijkstra that stops once every node in `targets` is settled.
    pub(crate) fn dijkstra_until(&self, src: u32, targets: &[u32]) -> Vec<f64> {
        self.dijkstra_impl(src, |_| true, Some(targets))
    }

    fn dijkstra_impl<F: Fn(u32) -> bool>(
        &self,
        src: u32,
        allowed: F,
        targets: Option<&[u32]>,
    ) -> Vec<f64> {
        let n = self.labels.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pending = targets.map(|t| {
            let set: HashSet<u32> = t.iter().copied().collect();
            set
        });
        dist[src as usize] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            node: src,
        });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if d > dist[u as usize] {
                continue; // stale entry
            }
            if let Some(pending) = pending.as_mut() {
                pending.remove(&u);
                if pending.is_empty() {
                    break;
                }
            }
            for &(v, len) in &self.adj[u as usize] {
                if !allowed(v) {
                    continue;
                }
                let nd = d + len;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        dist
    }

    /// Dijkstra from `src` returning `(dist, next_hop_toward_src)`.
    /// `pred[v]` is the neighbor of `v` on a shortest path from `v` to
    /// `src` (deterministic under distance ties).
    pub(crate) fn dijkstra_pred(&self, src: u32) -> (Vec<f64>, Vec<u32>) {
        let n = self.labels.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        dist[src as usize] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            node: src,
        });
        while let Some(HeapEntry { dist: d, node: u }) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            for &(v, len) in &self.adj[u as usize] {
                let nd = d + len;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    pred[v as usize] = u;
                    heap.push(HeapEntry { dist: nd, node: v });
                }
            }
        }
        (dist, pred)
    }

    /// Shortest-path distances from `src`, optionally within the subgraph
    /// induced by `restrict`. Unreachable nodes are absent from the map.
    pub fn shortest_dist_from_node(
        &self,
        src: NodeId,
        restrict: Option<&HashSet<NodeId>>,
    ) -> Result<HashMap<NodeId, f64>> {
        if src.index() >= self.node_count() {
            return Err(Error::UnknownNode {
                label: format!("#{}", src.0),
                line: None,
            });
        }
        if let Some(set) = restrict {
            if !set.contains(&src) {
                return Err(Error::UnknownNode {
                    label: self.label(src).to_owned(),
                    line: None,
                });
            }
        }
        let dist = match restrict {
            Some(set) => self.dijkstra_dense_filtered(src.0, |v| set.contains(&NodeId(v))),
            None => self.dijkstra_dense(src.0),
        };
        Ok(dist
            .into_iter()
            .enumerate()
            .filter(|(_, d)| d.is_finite())
            .map(|(i, d)| (NodeId(i as u32), d))
            .collect())
    }

    /// Geodesic distance from a continuous position to a node.
    ///
    /// For `Edge { u, v, offset }` this is
    /// `min(offset + d(u, dst), (L - offset) + d(v, dst))`.
    pub fn dist_from_position(&self, pos: &GraphPosition, dst: NodeId) -> Result<f64> {
        match *pos {
            GraphPosition::Node(u) => {
                let dist = self.dijkstra_until(dst.0, &[u.0]);
                self.dist_from_sp(pos, &dist, dst)
            }
            GraphPosition::Edge { u, v, .. } => {
                let dist = self.dijkstra_until(dst.0, &[u.0, v.0]);
                self.dist_from_sp(pos, &dist, dst)
            }
        }
    }

    /// `dist_from_position` against a precomputed distance field rooted at
    /// `dst` (as produced by `dijkstra_pred(dst)`).
    pub(crate) fn dist_from_sp(
        &self,
        pos: &GraphPosition,
        dist: &[f64],
        dst: NodeId,
    ) -> Result<f64> {
        let best = match *pos {
            GraphPosition::Node(u) => dist[u.index()],
            GraphPosition::Edge { u, v, offset } => {
                let len = self.edge_len(u, v).expect("valid position");
                (offset + dist[u.index()]).min((len - offset) + dist[v.index()])
            }
        };
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::Unreachable {
                from: format!("{}", pos.display(self)),
                to: self.label(dst).to_owned(),
            })
        }
    }

    /// Shortest path from `pos` to `dst` as a walkable [`GeodesicPath`].
    pub fn geodesic_toward(&self, pos: &GraphPosition, dst: NodeId) -> Result<GeodesicPath> {
        let (dist, pred) = self.dijkstra_pred(dst.0);
        self.geodesic_from_sp(pos, dst, &dist, &pred)
    }

    /// `geodesic_toward` against precomputed `(dist, pred)` fields rooted
    /// at `dst`.
    pub(crate) fn geodesic_from_sp(
        &self,
        pos: &GraphPosition,
        dst: NodeId,
        dist: &[f64],
        pred: &[u32],
    ) -> Result<GeodesicPath> {
        let trace = |from: u32| -> Vec<NodeId> {
            let mut nodes = vec![NodeId(from)];
            let mut cur = from;
            while cur != dst.0 {
                cur = pred[cur as usize];
                debug_assert!(cur != u32::MAX, "predecessor chain broken");
                nodes.push(NodeId(cur));
            }
            nodes
        };
        match *pos {
            GraphPosition::Node(u) => {
                if u == dst {
                    return Ok(GeodesicPath {
                        origin: *pos,
                        entry: Vec::new(),
                        lead: 0.0,
                        length: 0.0,
                    });
                }
                if !dist[u.index()].is_finite() {
                    return Err(Error::Unreachable {
                        from: self.label(u).to_owned(),
                        to: self.label(dst).to_owned(),
                    });
                }
                Ok(GeodesicPath {
                    origin: *pos,
                    entry: trace(u.0),
                    lead: 0.0,
                    length: dist[u.index()],
                })
            }
            GraphPosition::Edge { u, v, offset } => {
                let len = self.edge_len(u, v).expect("valid position");
                let via_u = offset + dist[u.index()];
                let via_v = (len - offset) + dist[v.index()];
                if !via_u.is_finite() && !via_v.is_finite() {
                    return Err(Error::Unreachable {
                        from: format!("{}", pos.display(self)),
                        to: self.label(dst).to_owned(),
                    });
                }
                // Ties go to the u side (canonical smaller endpoint).
                let (first, lead, total) = if via_u <= via_v {
                    (u, offset, via_u)
                } else {
                    (v, len - offset, via_v)
                };
                Ok(GeodesicPath {
                    origin: *pos,
                    entry: trace(first.0),
                    lead,
                    length: total,
                })
            }
        }
    }

    /// Nearest node to a position. Edge-interior ties at the exact midpoint
    /// go to the lexicographically smaller label.
    pub fn position_nearest_node(&self, pos: &GraphPosition) -> NodeId {
        match *pos {
            GraphPosition::Node(u) => u,
            GraphPosition::Edge { u, v, offset } => {
                let len = self.edge_len(u, v).expect("valid position");
                let rest = len - offset;
                if offset < rest {
                    u
                } else if offset > rest {
                    v
                } else {
                    u.min(v)
                }
            }
        }
    }

    /// Fréchet functional `F(x) = sum_y d^2(x, y) m(y) / m.total`.
    pub fn frechet_value(&self, x: NodeId, m: &EmpiricalMeasure) -> Result<f64> {
        let dist = self.dijkstra_dense(x.0);
        let mut acc = 0.0;
        for y in m.support() {
            let d = dist[y.index()];
            if !d.is_finite() {
                return Err(Error::Unreachable {
                    from: self.label(x).to_owned(),
                    to: self.label(y).to_owned(),
                });
            }
            acc += d * d * m.weight(y);
        }
        Ok(acc / m.total())
    }

    /// Stable content hash of the node and edge sets (canonical order).
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(b"gbary-graph-v1\n");
        for label in &self.labels {
            hasher.update(label.as_bytes());
            hasher.update(b"\n");
        }
        for (u, v, len) in self.edges() {
            hasher.update(self.label(u).as_bytes());
            hasher.update(b" ");
            hasher.update(self.label(v).as_bytes());
            hasher.update(format!(" {len}\n").as_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    pub(crate) fn p3() -> MetricGraph {
        MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap()
    }

    fn n(g: &MetricGraph, l: &str) -> NodeId {
        g.node(l).unwrap()
    }

    #[test]
    fn load_parses_simple_edge_list() {
        let g = MetricGraph::load(Cursor::new("a b 1\nb c 1\n")).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn load_collapses_parallel_edges_to_min() {
        let g = MetricGraph::load(Cursor::new("a b 2\na b 1\n")).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge_len(n(&g, "a"), n(&g, "b")), Some(1.0));
    }

    #[test]
    fn load_reports_malformed_line_number() {
        let err = MetricGraph::load(Cursor::new("a b 1\na b\n")).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_rejects_nonpositive_length() {
        assert!(MetricGraph::load(Cursor::new("a b 0\n")).is_err());
        assert!(MetricGraph::load(Cursor::new("a b -3\n")).is_err());
    }

    #[test]
    fn load_rejects_empty_graph() {
        assert!(matches!(
            MetricGraph::load(Cursor::new("# nothing\n")),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn self_loops_are_dropped() {
        let g = MetricGraph::load(Cursor::new("a a 1\na b 2\n")).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(n(&g, "a")), 1);
    }

    #[test]
    fn labels_sort_lexicographically() {
        let g = MetricGraph::from_edges(&[("z", "a", 1.0), ("m", "a", 1.0)]).unwrap();
        assert_eq!(g.label(NodeId(0)), "a");
        assert_eq!(g.label(NodeId(1)), "m");
        assert_eq!(g.label(NodeId(2)), "z");
    }

    #[test]
    fn shortest_dist_on_path() {
        let g = p3();
        let d = g.shortest_dist_from_node(n(&g, "a"), None).unwrap();
        assert_eq!(d[&n(&g, "a")], 0.0);
        assert_eq!(d[&n(&g, "b")], 1.0);
        assert_eq!(d[&n(&g, "c")], 2.0);
    }

    #[test]
    fn restricted_dijkstra_uses_induced_subgraph() {
        let g = p3();
        let set: HashSet<NodeId> = [n(&g, "a"), n(&g, "c")].into_iter().collect();
        let d = g.shortest_dist_from_node(n(&g, "a"), Some(&set)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[&n(&g, "a")], 0.0);
    }

    #[test]
    fn dist_from_edge_interior() {
        let g = p3();
        let pos = GraphPosition::on_edge(&g, n(&g, "a"), n(&g, "b"), 0.5);
        assert!((g.dist_from_position(&pos, n(&g, "c")).unwrap() - 1.5).abs() < 1e-12);
        assert!((g.dist_from_position(&pos, n(&g, "a")).unwrap() - 0.5).abs() < 1e-12);
        let b = GraphPosition::Node(n(&g, "b"));
        assert_eq!(g.dist_from_position(&b, n(&g, "b")).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_on_path() {
        let g = p3();
        let path = g
            .geodesic_toward(&GraphPosition::Node(n(&g, "a")), n(&g, "c"))
            .unwrap();
        assert_eq!(path.length, 2.0);
        assert_eq!(path.entry, vec![n(&g, "a"), n(&g, "b"), n(&g, "c")]);

        let pos = GraphPosition::on_edge(&g, n(&g, "a"), n(&g, "b"), 0.5);
        let path = g.geodesic_toward(&pos, n(&g, "c")).unwrap();
        assert!((path.length - 1.5).abs() < 1e-12);
        assert_eq!(path.entry, vec![n(&g, "b"), n(&g, "c")]);
        assert!((path.lead - 0.5).abs() < 1e-12);

        let empty = g
            .geodesic_toward(&GraphPosition::Node(n(&g, "b")), n(&g, "b"))
            .unwrap();
        assert!(empty.entry.is_empty());
        assert_eq!(empty.length, 0.0);
    }

    #[test]
    fn geodesic_walk_positions_are_consistent() {
        let g = p3();
        let pos = GraphPosition::on_edge(&g, n(&g, "a"), n(&g, "b"), 0.5);
        let path = g.geodesic_toward(&pos, n(&g, "c")).unwrap();
        assert_eq!(path.position_at(&g, 0.0), pos);
        assert_eq!(
            path.position_at(&g, 0.5),
            GraphPosition::Node(n(&g, "b"))
        );
        match path.position_at(&g, 1.0) {
            GraphPosition::Edge { u, v, offset } => {
                assert_eq!((u, v), (n(&g, "b"), n(&g, "c")));
                assert!((offset - 0.5).abs() < 1e-12);
            }
            p => panic!("unexpected {p:?}"),
        }
        assert_eq!(path.position_at(&g, 99.0), GraphPosition::Node(n(&g, "c")));
    }

    #[test]
    fn nearest_node_rules() {
        let g = MetricGraph::from_edges(&[("a", "b", 4.0)]).unwrap();
        let (a, b) = (n(&g, "a"), n(&g, "b"));
        assert_eq!(
            g.position_nearest_node(&GraphPosition::on_edge(&g, a, b, 1.0)),
            a
        );
        // Exact midpoint: lexicographically smaller label wins.
        assert_eq!(
            g.position_nearest_node(&GraphPosition::on_edge(&g, a, b, 2.0)),
            a
        );
        assert_eq!(
            g.position_nearest_node(&GraphPosition::on_edge(&g, a, b, 3.0)),
            b
        );
        assert_eq!(g.position_nearest_node(&GraphPosition::Node(b)), b);
    }

    #[test]
    fn on_edge_normalizes_boundaries_and_orientation() {
        let g = p3();
        let (a, b) = (n(&g, "a"), n(&g, "b"));
        assert_eq!(GraphPosition::on_edge(&g, a, b, 0.0), GraphPosition::Node(a));
        assert_eq!(GraphPosition::on_edge(&g, a, b, 1.0), GraphPosition::Node(b));
        // Same point expressed from either endpoint.
        assert_eq!(
            GraphPosition::on_edge(&g, b, a, 0.75),
            GraphPosition::on_edge(&g, a, b, 0.25)
        );
    }

    #[test]
    fn frechet_values_on_p3() {
        let g = p3();
        let uniform = EmpiricalMeasure::uniform(&g);
        assert!((g.frechet_value(n(&g, "b"), &uniform).unwrap() - 2.0 / 3.0).abs() < 1e-12);

        let point = EmpiricalMeasure::point_mass(&g, n(&g, "a"));
        assert_eq!(g.frechet_value(n(&g, "a"), &point).unwrap(), 0.0);

        // weights a: 0.8, b: 0.1, c: 0.1 -> F(a) = 0.1*1 + 0.1*4 = 0.5
        let m = EmpiricalMeasure::from_weights(vec![0.8, 0.1, 0.1]).unwrap();
        assert!((g.frechet_value(n(&g, "a"), &m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frechet_rejects_disconnected_support() {
        let g = MetricGraph::from_edges(&[("a", "b", 1.0), ("c", "d", 1.0)]).unwrap();
        let m = EmpiricalMeasure::uniform(&g);
        assert!(g.frechet_value(n(&g, "a"), &m).is_err());
    }

    #[test]
    fn connectivity_check() {
        assert!(p3().is_connected());
        let g = MetricGraph::from_edges(&[("a", "b", 1.0), ("c", "d", 1.0)]).unwrap();
        assert!(!g.is_connected());
    }

    #[test]
    fn content_hash_is_stable_and_sensitive() {
        let g1 = MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap();
        let g2 = MetricGraph::from_edges(&[("b", "c", 1.0), ("a", "b", 1.0)]).unwrap();
        let g3 = MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 2.0)]).unwrap();
        assert_eq!(g1.content_hash(), g2.content_hash());
        assert_ne!(g1.content_hash(), g3.content_hash());
    }
}
