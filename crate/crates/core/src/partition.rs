//! Node partitions, validity checks, and per-cluster sub-graph extraction
//! with boundary records.
//!
//! A partition is valid when it is a disjoint cover of the node set and
//! every induced sub-graph is connected. Sub-graph extraction is a single
//! pass over the edge set: intra-cluster edges go to the cluster's edge
//! list, crossing edges produce a mirrored pair of boundary records.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeMap, HashMap};
use std::io::BufRead;

use rand::Rng;
use rayon::prelude::*;

use crate::graph::{MetricGraph, NodeId};
use crate::{Error, Result};

/// Dense cluster handle. Ordering follows lexicographic order of the
/// original cluster labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClusterId(pub(crate) u32);

impl ClusterId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Disjoint cover of the node set by clusters.
#[derive(Debug, Clone)]
pub struct Partition {
    assignment: Vec<u32>,
    clusters: Vec<Vec<u32>>,
    labels: Vec<String>,
}

impl Partition {
    /// Build from a per-node cluster-label assignment. Cluster ids are
    /// assigned in lexicographic label order.
    pub fn from_assignment(g: &MetricGraph, by_node: &[(NodeId, String)]) -> Result<Self> {
        let mut label_ids: BTreeMap<&str, u32> = BTreeMap::new();
        for (_, l) in by_node {
            let next = label_ids.len() as u32;
            label_ids.entry(l.as_str()).or_insert(next);
        }
        // BTreeMap iteration is sorted; re-number in that order.
        let labels: Vec<String> = label_ids.keys().map(|s| s.to_string()).collect();
        let renumber: HashMap<&str, u32> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i as u32))
            .collect();

        let mut assignment = vec![u32::MAX; g.node_count()];
        for (node, l) in by_node {
            if assignment[node.index()] != u32::MAX {
                return Err(Error::DuplicateAssignment {
                    label: g.label(*node).to_owned(),
                    line: 0,
                });
            }
            assignment[node.index()] = renumber[l.as_str()];
        }
        if let Some(i) = assignment.iter().position(|&c| c == u32::MAX) {
            return Err(Error::MissingAssignment {
                label: g.label(NodeId(i as u32)).to_owned(),
            });
        }
        let mut clusters = vec![Vec::new(); labels.len()];
        for (i, &c) in assignment.iter().enumerate() {
            clusters[c as usize].push(i as u32);
        }
        Ok(Partition {
            assignment,
            clusters,
            labels,
        })
    }

    /// Parse the partition file format: one `<node> <cluster-id>` per line.
    /// Every node of `g` must be assigned exactly once.
    pub fn load<R: BufRead>(reader: R, g: &MetricGraph) -> Result<Self> {
        let mut by_node: Vec<(NodeId, String)> = Vec::new();
        let mut seen = vec![false; g.node_count()];
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected `<node> <cluster-id>`, got {} fields", fields.len()),
                });
            }
            let node = g.node(fields[0]).ok_or_else(|| Error::UnknownNode {
                label: fields[0].to_owned(),
                line: Some(lineno),
            })?;
            if seen[node.index()] {
                return Err(Error::DuplicateAssignment {
                    label: fields[0].to_owned(),
                    line: lineno,
                });
            }
            seen[node.index()] = true;
            by_node.push((node, fields[1].to_owned()));
        }
        Self::from_assignment(g, &by_node)
    }

    pub fn load_path(path: &std::path::Path, g: &MetricGraph) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file), g)
    }

    /// Test/internal constructor that tolerates empty clusters.
    pub fn from_parts(assignment: Vec<u32>, k: usize, labels: Option<Vec<String>>) -> Self {
        let mut clusters = vec![Vec::new(); k];
        for (i, &c) in assignment.iter().enumerate() {
            clusters[c as usize].push(i as u32);
        }
        let labels = labels.unwrap_or_else(|| (0..k).map(|i| i.to_string()).collect());
        Partition {
            assignment,
            clusters,
            labels,
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters.len()
    }

    pub fn clusters(&self) -> impl Iterator<Item = ClusterId> + '_ {
        (0..self.clusters.len() as u32).map(ClusterId)
    }

    pub fn cluster_of(&self, node: NodeId) -> Option<ClusterId> {
        match self.assignment.get(node.index()) {
            Some(&c) if c != u32::MAX => Some(ClusterId(c)),
            _ => None,
        }
    }

    pub fn members(&self, c: ClusterId) -> &[u32] {
        &self.clusters[c.index()]
    }

    pub fn member_ids(&self, c: ClusterId) -> impl Iterator<Item = NodeId> + '_ {
        self.clusters[c.index()].iter().map(|&i| NodeId(i))
    }

    pub fn label(&self, c: ClusterId) -> &str {
        &self.labels[c.index()]
    }

    pub fn cluster_by_label(&self, label: &str) -> Option<ClusterId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| ClusterId(i as u32))
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.len()).collect()
    }

    /// Write the `<node> <cluster-id>` file format.
    pub fn write<W: std::io::Write>(&self, g: &MetricGraph, mut w: W) -> Result<()> {
        let sizes = self.sizes();
        let (min, max) = (
            sizes.iter().min().copied().unwrap_or(0),
            sizes.iter().max().copied().unwrap_or(0),
        );
        writeln!(w, "# k={} min_size={} max_size={}", self.cluster_count(), min, max)?;
        for i in 0..self.assignment.len() {
            writeln!(
                w,
                "{} {}",
                g.label(NodeId(i as u32)),
                self.labels[self.assignment[i] as usize]
            )?;
        }
        Ok(())
    }

    /// Stable content hash of the assignment.
    pub fn content_hash(&self, g: &MetricGraph) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(b"gbary-partition-v1\n");
        for i in 0..self.assignment.len() {
            hasher.update(g.label(NodeId(i as u32)).as_bytes());
            hasher.update(b" ");
            hasher.update(self.labels[self.assignment[i] as usize].as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Per-cluster connectivity verdicts from [`validate_partition`].
#[derive(Debug, Clone)]
pub struct ValidityReport {
    pub valid: bool,
    /// Clusters whose induced sub-graph is disconnected.
    pub disconnected: Vec<ClusterId>,
    /// Clusters with no member nodes.
    pub empty: Vec<ClusterId>,
}

/// Check conditions for a valid partition: disjoint cover (structural),
/// nonempty clusters, and connected induced sub-graphs.
pub fn validate_partition(g: &MetricGraph, p: &Partition) -> ValidityReport {
    let verdicts: Vec<(u32, bool, bool)> = p
        .clusters
        .par_iter()
        .enumerate()
        .map(|(ci, members)| {
            let ci = ci as u32;
            if members.is_empty() {
                return (ci, true, false);
            }
            // BFS within the induced sub-graph.
            let member_set: HashMap<u32, usize> = members
                .iter()
                .enumerate()
                .map(|(i, &n)| (n, i))
                .collect();
            let mut seen = vec![false; members.len()];
            let mut stack = vec![members[0]];
            seen[0] = true;
            let mut count = 1usize;
            while let Some(u) = stack.pop() {
                for (v, _) in g.neighbors(NodeId(u)) {
                    if let Some(&slot) = member_set.get(&v.0) {
                        if !seen[slot] {
                            seen[slot] = true;
                            count += 1;
                            stack.push(v.0);
                        }
                    }
                }
            }
            (ci, false, count == members.len())
        })
        .collect();

    let mut disconnected = Vec::new();
    let mut empty = Vec::new();
    for (ci, is_empty, connected) in verdicts {
        if is_empty {
            empty.push(ClusterId(ci));
        } else if !connected {
            disconnected.push(ClusterId(ci));
        }
    }
    disconnected.sort();
    empty.sort();
    ValidityReport {
        valid: disconnected.is_empty() && empty.is_empty(),
        disconnected,
        empty,
    }
}

/// One crossing-edge record at a cluster boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryRecord {
    /// Node inside the cluster owning this record.
    pub inner: NodeId,
    /// Node on the other side of the crossing edge.
    pub outer: NodeId,
    /// Length of the crossing edge.
    pub weight: f64,
    /// Cluster of `outer`.
    pub outer_cluster: ClusterId,
    /// Distance from `inner` to the cluster representative within the
    /// induced sub-graph; filled by `multiscale::boundary_distances`.
    pub rep_dist: Option<f64>,
}

/// Result of the single-pass sub-graph extraction: per-cluster edge lists
/// and per-cluster boundary records.
#[derive(Debug, Clone)]
pub struct SubgraphData {
    pub edges: Vec<Vec<(NodeId, NodeId, f64)>>,
    pub boundaries: Vec<Vec<BoundaryRecord>>,
}

impl SubgraphData {
    pub fn crossing_edge_count(&self) -> usize {
        self.boundaries.iter().map(|b| b.len()).sum::<usize>() / 2
    }
}

/// Single pass over the edge set: intra-cluster edges are appended to the
/// cluster's list, each crossing edge yields mirrored boundary records in
/// both clusters.
pub fn extract_subgraphs(g: &MetricGraph, p: &Partition) -> SubgraphData {
    let k = p.cluster_count();
    let mut edges = vec![Vec::new(); k];
    let mut boundaries: Vec<Vec<BoundaryRecord>> = vec![Vec::new(); k];
    for (u, v, len) in g.edges() {
        let cu = p.cluster_of(u).expect("partition covers graph");
        let cv = p.cluster_of(v).expect("partition covers graph");
        if cu == cv {
            edges[cu.index()].push((u, v, len));
        } else {
            boundaries[cu.index()].push(BoundaryRecord {
                inner: u,
                outer: v,
                weight: len,
                outer_cluster: cv,
                rep_dist: None,
            });
            boundaries[cv.index()].push(BoundaryRecord {
                inner: v,
                outer: u,
                weight: len,
                outer_cluster: cu,
                rep_dist: None,
            });
        }
    }
    SubgraphData { edges, boundaries }
}

#[derive(Copy, Clone, PartialEq)]
struct GrowEntry {
    dist: f64,
    node: u32,
}

impl Eq for GrowEntry {}

impl Ord for GrowEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for GrowEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Size-aware region growing: at every step the smallest active cluster
/// claims its nearest unassigned node reachable through its own
/// territory. Clusters stay connected by construction (each claim is
/// relaxed from an already-claimed node of the same cluster) and sizes
/// stay homogeneous.
fn grow_regions(g: &MetricGraph, seeds: &[u32]) -> Vec<u32> {
    let k = seeds.len();
    let mut assignment = vec![u32::MAX; g.node_count()];
    let mut heaps: Vec<BinaryHeap<GrowEntry>> = vec![BinaryHeap::new(); k];
    let mut sizes = vec![0usize; k];
    let mut active = vec![true; k];
    let mut unassigned = g.node_count();

    let claim = |c: usize,
                     node: u32,
                     dist: f64,
                     assignment: &mut Vec<u32>,
                     heaps: &mut Vec<BinaryHeap<GrowEntry>>,
                     sizes: &mut Vec<usize>| {
        assignment[node as usize] = c as u32;
        sizes[c] += 1;
        for (v, len) in g.neighbors(NodeId(node)) {
            if assignment[v.index()] == u32::MAX {
                heaps[c].push(GrowEntry {
                    dist: dist + len,
                    node: v.0,
                });
            }
        }
    };

    for (c, &s) in seeds.iter().enumerate() {
        claim(c, s, 0.0, &mut assignment, &mut heaps, &mut sizes);
        unassigned -= 1;
    }
    while unassigned > 0 {
        // Smallest active cluster expands next (ties: smaller id).
        let mut pick = usize::MAX;
        for c in 0..k {
            if active[c] && (pick == usize::MAX || sizes[c] < sizes[pick]) {
                pick = c;
            }
        }
        if pick == usize::MAX {
            break; // unreachable on a connected graph
        }
        let mut claimed = false;
        while let Some(GrowEntry { dist, node }) = heaps[pick].pop() {
            if assignment[node as usize] != u32::MAX {
                continue;
            }
            claim(pick, node, dist, &mut assignment, &mut heaps, &mut sizes);
            unassigned -= 1;
            claimed = true;
            break;
        }
        if !claimed {
            active[pick] = false;
        }
    }
    assignment
}

/// Node of the cluster minimizing the sum of intra-cluster distances
/// (graph 1-median of the induced sub-graph). Ties go to the smaller node.
fn cluster_median(g: &MetricGraph, members: &[u32]) -> u32 {
    let member_set: HashMap<u32, usize> = members.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut best = (f64::INFINITY, u32::MAX);
    for &m in members {
        let dist = g.dijkstra_dense_filtered(m, |v| member_set.contains_key(&v));
        let sum: f64 = members.iter().map(|&n| dist[n as usize]).sum();
        if sum < best.0 {
            best = (sum, m);
        }
    }
    best.1
}

/// Region-growing partition into `k` connected clusters of roughly
/// homogeneous size: farthest-point seeding, multi-source growth, then a
/// few median-recentering sweeps.
pub fn balanced_partition(g: &MetricGraph, k: usize, rng: &mut impl Rng) -> Result<Partition> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "cluster count {k} out of range 1..={n}"
        )));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected("balanced_partition".into()));
    }

    // Farthest-point seeding.
    let mut seeds = vec![rng.random_range(0..n as u32)];
    let mut min_dist = g.dijkstra_dense(seeds[0]);
    while seeds.len() < k {
        let mut far = (f64::NEG_INFINITY, 0u32);
        for (i, &d) in min_dist.iter().enumerate() {
            if d > far.0 {
                far = (d, i as u32);
            }
        }
        seeds.push(far.1);
        let dist = g.dijkstra_dense(far.1);
        for (m, d) in min_dist.iter_mut().zip(dist) {
            if d < *m {
                *m = d;
            }
        }
    }

    // Lloyd-style refinement: grow, recenter on cluster medians, repeat.
    let mut assignment = grow_regions(g, &seeds);
    for _ in 0..10 {
        let mut clusters = vec![Vec::new(); k];
        for (node, &c) in assignment.iter().enumerate() {
            clusters[c as usize].push(node as u32);
        }
        let new_seeds: Vec<u32> = clusters
            .par_iter()
            .map(|members| cluster_median(g, members))
            .collect();
        if new_seeds == seeds {
            break;
        }
        seeds = new_seeds;
        let next = grow_regions(g, &seeds);
        if next == assignment {
            break;
        }
        assignment = next;
    }

    // Canonical cluster ids: order clusters by their smallest member.
    let mut order: Vec<(u32, u32)> = (0..k as u32)
        .map(|c| {
            let smallest = assignment
                .iter()
                .enumerate()
                .filter(|(_, &a)| a == c)
                .map(|(i, _)| i as u32)
                .min()
                .expect("clusters are nonempty");
            (smallest, c)
        })
        .collect();
    order.sort();
    let mut renumber = vec![0u32; k];
    for (new_id, &(_, old_id)) in order.iter().enumerate() {
        renumber[old_id as usize] = new_id as u32;
    }
    let assignment: Vec<u32> = assignment.iter().map(|&c| renumber[c as usize]).collect();
    // Zero-padded labels keep lexicographic and numeric order aligned.
    let width = (k.max(2) - 1).to_string().len();
    let labels: Vec<String> = (0..k).map(|i| format!("{i:0width$}")).collect();
    Ok(Partition::from_parts(assignment, k, Some(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand::SeedableRng;
    use std::io::Cursor;

    fn p3() -> MetricGraph {
        MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap()
    }

    fn path(n: usize) -> MetricGraph {
        let labels: Vec<String> = (0..n).map(|i| format!("n{i:02}")).collect();
        let edges: Vec<(&str, &str, f64)> = (0..n - 1)
            .map(|i| (labels[i].as_str(), labels[i + 1].as_str(), 1.0))
            .collect();
        MetricGraph::from_edges(&edges).unwrap()
    }

    #[test]
    fn load_partition_counts_clusters() {
        let g = p3();
        let p = Partition::load(Cursor::new("a 1\nb 1\nc 2\n"), &g).unwrap();
        assert_eq!(p.cluster_count(), 2);
        assert_eq!(p.cluster_of(g.node("a").unwrap()), p.cluster_of(g.node("b").unwrap()));
    }

    #[test]
    fn load_partition_reports_missing_node() {
        let g = p3();
        let err = Partition::load(Cursor::new("a 1\nb 1\n"), &g).unwrap_err();
        match err {
            Error::MissingAssignment { label } => assert_eq!(label, "c"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_partition_rejects_duplicates_and_unknowns() {
        let g = p3();
        assert!(matches!(
            Partition::load(Cursor::new("a 1\na 2\nb 1\nc 1\n"), &g),
            Err(Error::DuplicateAssignment { .. })
        ));
        assert!(matches!(
            Partition::load(Cursor::new("z 1\n"), &g),
            Err(Error::UnknownNode { .. })
        ));
    }

    #[test]
    fn validate_flags_disconnected_cluster() {
        let g = p3();
        let ok = Partition::load(Cursor::new("a 1\nb 1\nc 2\n"), &g).unwrap();
        assert!(validate_partition(&g, &ok).valid);

        let bad = Partition::load(Cursor::new("a 1\nb 2\nc 1\n"), &g).unwrap();
        let report = validate_partition(&g, &bad);
        assert!(!report.valid);
        assert_eq!(report.disconnected.len(), 1);
    }

    #[test]
    fn validate_flags_empty_cluster() {
        let g = p3();
        let p = Partition::from_parts(vec![0, 0, 0], 2, None);
        let report = validate_partition(&g, &p);
        assert!(!report.valid);
        assert_eq!(report.empty, vec![ClusterId(1)]);
    }

    #[test]
    fn extract_on_p3_produces_mirrored_records() {
        let g = p3();
        let p = Partition::load(Cursor::new("a 1\nb 1\nc 2\n"), &g).unwrap();
        let data = extract_subgraphs(&g, &p);
        let c1 = p.cluster_by_label("1").unwrap();
        let c2 = p.cluster_by_label("2").unwrap();
        assert_eq!(data.edges[c1.index()].len(), 1);
        assert!(data.edges[c2.index()].is_empty());
        let b1 = &data.boundaries[c1.index()];
        let b2 = &data.boundaries[c2.index()];
        assert_eq!(b1.len(), 1);
        assert_eq!(b2.len(), 1);
        assert_eq!(g.label(b1[0].inner), "b");
        assert_eq!(g.label(b1[0].outer), "c");
        assert_eq!(b1[0].weight, 1.0);
        assert_eq!(b1[0].outer_cluster, c2);
        assert_eq!(g.label(b2[0].inner), "c");
        assert_eq!(g.label(b2[0].outer), "b");
        assert_eq!(b2[0].outer_cluster, c1);
    }

    #[test]
    fn extract_with_single_cluster_has_no_boundary() {
        let g = p3();
        let p = Partition::load(Cursor::new("a x\nb x\nc x\n"), &g).unwrap();
        let data = extract_subgraphs(&g, &p);
        assert_eq!(data.edges[0].len(), g.edge_count());
        assert!(data.boundaries[0].is_empty());
    }

    #[test]
    fn balanced_partition_on_p3() {
        let g = p3();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p1 = balanced_partition(&g, 1, &mut rng).unwrap();
        assert_eq!(p1.cluster_count(), 1);
        assert_eq!(p1.sizes(), vec![3]);

        let p3c = balanced_partition(&g, 3, &mut rng).unwrap();
        assert_eq!(p3c.sizes(), vec![1, 1, 1]);
    }

    #[test]
    fn balanced_partition_on_nine_path_is_even() {
        let g = path(9);
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = balanced_partition(&g, 3, &mut rng).unwrap();
            let mut sizes = p.sizes();
            sizes.sort();
            assert_eq!(sizes, vec![3, 3, 3], "seed {seed}");
            assert!(validate_partition(&g, &p).valid);
        }
    }

    #[test]
    fn balanced_partition_is_always_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Random connected graph: path backbone plus chords.
        let n = 40;
        let labels: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
        let mut edges: Vec<(String, String, f64)> = (0..n - 1)
            .map(|i| (labels[i].clone(), labels[i + 1].clone(), 1.0 + (i % 5) as f64))
            .collect();
        for _ in 0..30 {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((labels[a].clone(), labels[b].clone(), 2.5));
            }
        }
        let edge_refs: Vec<(&str, &str, f64)> =
            edges.iter().map(|(a, b, l)| (a.as_str(), b.as_str(), *l)).collect();
        let g = MetricGraph::from_edges(&edge_refs).unwrap();
        for k in [1, 2, 5, 11, n] {
            let p = balanced_partition(&g, k, &mut rng).unwrap();
            assert!(validate_partition(&g, &p).valid, "k={k}");
            assert_eq!(p.sizes().iter().sum::<usize>(), n);
        }
    }
}
