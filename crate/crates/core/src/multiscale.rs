//! Upscale and multiscale graph construction, the two-stage estimation
//! pipeline, and cheap online re-estimation from persisted pipeline state.
//!
//! The upscale graph has one representative node per cluster; two
//! representatives are linked iff their clusters share a crossing edge,
//! with length minimized over single crossings:
//! `rep_dist(inner) + weight + rep_dist(outer)`. The multiscale graph
//! keeps the central cluster at full resolution and collapses every other
//! cluster to its representative; edges from central boundary nodes to a
//! neighbor representative use only the crossing weight plus the far-side
//! representative distance.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealing::{estimate_barycenter, EstimationReport, ScheduleParams};
use crate::graph::{MetricGraph, NodeId};
use crate::partition::{
    extract_subgraphs, validate_partition, BoundaryRecord, ClusterId, Partition, SubgraphData,
};
use crate::seeds;
use crate::stream::{project_multiscale, project_upscale, ObservationStream, ReplayMode};
use crate::{Error, Result};

/// How each cluster picks its representative node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepStrategy {
    /// Uniform draw among the cluster's nodes.
    Random,
    /// Barycenter of the induced sub-graph, estimated on the cluster's own
    /// observation sub-stream (uniform fallback when the sub-stream is
    /// empty).
    ClusterBarycenter,
}

impl RepStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            RepStrategy::Random => "random",
            RepStrategy::ClusterBarycenter => "per-cluster-barycenter",
        }
    }
}

/// Upscale graph: one node per cluster.
#[derive(Debug, Clone)]
pub struct UpscaleGraph {
    pub graph: MetricGraph,
    /// Representative node (in the base graph) per cluster.
    pub representatives: Vec<NodeId>,
    rep_cluster: HashMap<String, u32>,
}

impl UpscaleGraph {
    /// Cluster represented by an upscale node label.
    pub fn cluster_of_label(&self, label: &str) -> Option<ClusterId> {
        self.rep_cluster.get(label).map(|&c| ClusterId(c))
    }
}

/// Multiscale graph: the central cluster at full resolution plus one
/// representative per other cluster.
#[derive(Debug, Clone)]
pub struct MultiscaleGraph {
    pub graph: MetricGraph,
    pub central: ClusterId,
    pub representatives: Vec<NodeId>,
}

/// Induced sub-graph of one cluster as a standalone [`MetricGraph`]
/// (original node labels are preserved).
pub fn cluster_subgraph(g: &MetricGraph, p: &Partition, c: ClusterId, data: &SubgraphData) -> Result<MetricGraph> {
    let nodes: Vec<&str> = p.member_ids(c).map(|n| g.label(n)).collect();
    let edges: Vec<(&str, &str, f64)> = data.edges[c.index()]
        .iter()
        .map(|&(u, v, len)| (g.label(u), g.label(v), len))
        .collect();
    MetricGraph::from_parts(&nodes, &edges)
}

/// Pick one representative node per cluster.
pub fn choose_representatives(
    g: &MetricGraph,
    p: &Partition,
    data: &SubgraphData,
    strategy: RepStrategy,
    stream: Option<&ObservationStream>,
    params: &ScheduleParams,
) -> Result<Vec<NodeId>> {
    // Observations per cluster, in stream order (labels resolve against
    // the cluster sub-graph later).
    let mut per_cluster_obs: Vec<Vec<NodeId>> = vec![Vec::new(); p.cluster_count()];
    if let Some(stream) = stream {
        for y in stream.observations() {
            let c = p.cluster_of(y).expect("partition covers graph");
            per_cluster_obs[c.index()].push(y);
        }
        for (ci, obs) in per_cluster_obs.iter().enumerate() {
            if obs.is_empty() {
                log::warn!(
                    "cluster {} has no observed mass; falling back to a uniform sub-stream",
                    p.label(ClusterId(ci as u32))
                );
            }
        }
    }

    let picks: Vec<Result<NodeId>> = (0..p.cluster_count())
        .into_par_iter()
        .map(|ci| {
            let c = ClusterId(ci as u32);
            let members = p.members(c);
            let seed = seeds::derive(
                seeds::derive(params.seed, seeds::SALT_REPRESENTATIVES),
                ci as u64,
            );
            if members.len() == 1 {
                return Ok(NodeId(members[0]));
            }
            match strategy {
                RepStrategy::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    Ok(NodeId(members[rng.random_range(0..members.len())]))
                }
                RepStrategy::ClusterBarycenter => {
                    let sub = cluster_subgraph(g, p, c, data)?;
                    let obs_here = &per_cluster_obs[ci];
                    let sub_obs: Vec<NodeId> = if obs_here.is_empty() {
                        p.member_ids(c)
                            .map(|n| sub.node(g.label(n)).expect("member label"))
                            .collect()
                    } else {
                        obs_here
                            .iter()
                            .map(|&n| sub.node(g.label(n)).expect("member label"))
                            .collect()
                    };
                    let mut sub_stream =
                        ObservationStream::new(sub_obs, ReplayMode::ShuffleReplay, seed)?;
                    let mut sub_params = params.clone();
                    sub_params.seed = seed;
                    sub_params.record_trajectory = false;
                    let schedule = sub_params.resolve(sub.node_count())?;
                    let report = estimate_barycenter(&sub, &mut sub_stream, &schedule, None)?;
                    Ok(g.node(&report.barycenter).expect("label round-trip"))
                }
            }
        })
        .collect();
    picks.into_iter().collect()
}

/// Fill `rep_dist` on every boundary record: the Dijkstra distance from
/// the cluster representative within the induced sub-graph.
pub fn boundary_distances(
    g: &MetricGraph,
    p: &Partition,
    reps: &[NodeId],
    data: &mut SubgraphData,
) -> Result<()> {
    let results: Vec<Result<()>> = data
        .boundaries
        .par_iter_mut()
        .enumerate()
        .map(|(ci, records)| {
            if records.is_empty() {
                return Ok(());
            }
            let c = ClusterId(ci as u32);
            let rep = reps[ci];
            let dist = g.dijkstra_dense_filtered(rep.0, |v| {
                p.cluster_of(NodeId(v)) == Some(c)
            });
            for r in records.iter_mut() {
                let d = dist[r.inner.index()];
                if !d.is_finite() {
                    return Err(Error::Internal(format!(
                        "boundary node {} unreachable from representative {} inside cluster {}",
                        g.label(r.inner),
                        g.label(rep),
                        p.label(c)
                    )));
                }
                r.rep_dist = Some(d);
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

fn rep_dist_of(record: &BoundaryRecord) -> Result<f64> {
    record
        .rep_dist
        .ok_or_else(|| Error::Internal("rep_dist not filled before edge construction".into()))
}

/// Upscale edge list per the single-crossing minimization: for each
/// boundary record (taken once per unordered cluster pair), locate the
/// mirror record on the other side and keep the minimum
/// `weight + rep_dist_i + rep_dist_j` per representative pair.
pub fn build_upscale_edges(
    data: &SubgraphData,
    reps: &[NodeId],
) -> Result<Vec<(NodeId, NodeId, f64)>> {
    // Mirror lookup: (inner, outer) -> record index, per cluster.
    let mirrors: Vec<HashMap<(u32, u32), usize>> = data
        .boundaries
        .iter()
        .map(|records| {
            records
                .iter()
                .enumerate()
                .map(|(idx, r)| ((r.inner.0, r.outer.0), idx))
                .collect()
        })
        .collect();

    let mut best: HashMap<(u32, u32), f64> = HashMap::new();
    for (ci, records) in data.boundaries.iter().enumerate() {
        for r in records {
            let cj = r.outer_cluster.index();
            if ci >= cj {
                continue;
            }
            let mirror_idx = mirrors[cj]
                .get(&(r.outer.0, r.inner.0))
                .copied()
                .ok_or_else(|| {
                    Error::Internal(format!(
                        "missing mirror record for crossing edge ({}, {})",
                        r.inner.0, r.outer.0
                    ))
                })?;
            let mirror = &data.boundaries[cj][mirror_idx];
            let tmp = r.weight + rep_dist_of(r)? + rep_dist_of(mirror)?;
            best.entry((ci as u32, cj as u32))
                .and_modify(|d| *d = d.min(tmp))
                .or_insert(tmp);
        }
    }
    let mut edges: Vec<(NodeId, NodeId, f64)> = best
        .into_iter()
        .map(|((ci, cj), len)| (reps[ci as usize], reps[cj as usize], len))
        .collect();
    edges.sort_by_key(|&(u, v, _)| (u, v));
    Ok(edges)
}

/// Assemble the upscale graph from filled boundary data.
pub fn build_upscale_graph(
    g: &MetricGraph,
    p: &Partition,
    data: &SubgraphData,
    reps: &[NodeId],
) -> Result<UpscaleGraph> {
    debug_assert_eq!(reps.len(), p.cluster_count());
    let edges = build_upscale_edges(data, reps)?;
    let node_labels: Vec<&str> = reps.iter().map(|&r| g.label(r)).collect();
    let edge_labels: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|&(u, v, len)| (g.label(u), g.label(v), len))
        .collect();
    let graph = MetricGraph::from_parts(&node_labels, &edge_labels)?;
    if !graph.is_connected() {
        return Err(Error::InvalidPartition(
            "upscale graph is disconnected (is the partition valid and the base graph connected?)"
                .into(),
        ));
    }
    let rep_cluster = reps
        .iter()
        .enumerate()
        .map(|(ci, &r)| (g.label(r).to_owned(), ci as u32))
        .collect();
    Ok(UpscaleGraph {
        graph,
        representatives: reps.to_vec(),
        rep_cluster,
    })
}

/// Assemble the multiscale graph for a given central cluster.
///
/// Internal edges of the central cluster are read straight off the base
/// graph; edges from central boundary nodes to neighbor representatives
/// drop the central-side representative distance.
pub fn build_multiscale_graph(
    g: &MetricGraph,
    p: &Partition,
    data: &SubgraphData,
    reps: &[NodeId],
    central: ClusterId,
) -> Result<MultiscaleGraph> {
    if central.index() >= p.cluster_count() {
        return Err(Error::InvalidConfig(format!(
            "central cluster {} out of range",
            central.0
        )));
    }
    let mut labels: Vec<&str> = p.member_ids(central).map(|n| g.label(n)).collect();
    for (ci, &r) in reps.iter().enumerate() {
        if ci != central.index() {
            labels.push(g.label(r));
        }
    }

    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    // Internal edges of the central cluster, verbatim.
    for u in p.member_ids(central) {
        for (v, len) in g.neighbors(u) {
            if u < v && p.cluster_of(v) == Some(central) {
                edges.push((u, v, len));
            }
        }
    }
    // Upscale edges not incident to the central representative.
    for (u, v, len) in build_upscale_edges(data, reps)? {
        let cu = p.cluster_of(u).expect("rep is a graph node");
        let cv = p.cluster_of(v).expect("rep is a graph node");
        if cu != central && cv != central {
            edges.push((u, v, len));
        }
    }
    // Border edges: central boundary node -> neighbor representative,
    // crossing weight plus far-side rep_dist only; keep the minimum per
    // (node, representative) pair.
    let mut border: HashMap<(u32, u32), f64> = HashMap::new();
    let far_side: Vec<HashMap<u32, f64>> = data
        .boundaries
        .iter()
        .map(|records| {
            records
                .iter()
                .filter_map(|r| r.rep_dist.map(|d| (r.inner.0, d)))
                .collect()
        })
        .collect();
    for r in &data.boundaries[central.index()] {
        let cj = r.outer_cluster;
        let far = far_side[cj.index()].get(&r.outer.0).copied().ok_or_else(|| {
            Error::Internal(format!(
                "missing far-side rep_dist for boundary node {}",
                g.label(r.outer)
            ))
        })?;
        let len = r.weight + far;
        let key = (r.inner.0, reps[cj.index()].0);
        border
            .entry(key)
            .and_modify(|d| *d = d.min(len))
            .or_insert(len);
    }
    let mut border: Vec<_> = border.into_iter().collect();
    border.sort_by_key(|&((u, v), _)| (u, v));
    for ((u, v), len) in border {
        edges.push((NodeId(u), NodeId(v), len));
    }

    let edge_labels: Vec<(&str, &str, f64)> = edges
        .iter()
        .map(|&(u, v, len)| (g.label(u), g.label(v), len))
        .collect();
    let graph = MetricGraph::from_parts(&labels, &edge_labels)?;
    if !graph.is_connected() {
        return Err(Error::InvalidPartition(
            "multiscale graph is disconnected".into(),
        ));
    }
    Ok(MultiscaleGraph {
        graph,
        central,
        representatives: reps.to_vec(),
    })
}

/// Everything produced by one full pipeline run.
#[derive(Debug)]
pub struct MultiscaleRun {
    /// Final-stage report; `barycenter` names a node of the base graph,
    /// `upscale_barycenter` and `central_cluster` record the first stage.
    pub report: EstimationReport,
    pub representatives: Vec<NodeId>,
    /// Boundary data with filled `rep_dist`.
    pub data: SubgraphData,
    pub upscale: UpscaleGraph,
    pub central: ClusterId,
}

/// Run the full two-stage pipeline: extract sub-graphs, build the upscale
/// graph, estimate on it with the projected stream, keep the winning
/// cluster at full resolution, and estimate again on the multiscale graph.
///
/// The final stage reuses the caller's seeds unchanged, so with a single
/// cluster the pipeline degenerates to exactly the single-scale run.
pub fn estimate_multiscale(
    g: &MetricGraph,
    stream: &ObservationStream,
    params: &ScheduleParams,
    p: &Partition,
    strategy: RepStrategy,
) -> Result<MultiscaleRun> {
    let validity = validate_partition(g, p);
    if !validity.valid {
        let mut bad: Vec<String> = validity
            .disconnected
            .iter()
            .map(|&c| format!("{} (disconnected)", p.label(c)))
            .collect();
        bad.extend(validity.empty.iter().map(|&c| format!("{} (empty)", p.label(c))));
        return Err(Error::InvalidPartition(bad.join(", ")));
    }

    let mut data = extract_subgraphs(g, p);
    let reps = choose_representatives(g, p, &data, strategy, Some(stream), params)?;
    boundary_distances(g, p, &reps, &mut data)?;
    let upscale = build_upscale_graph(g, p, &data, &reps)?;

    // Stage 1: upscale estimation on the projected stream.
    let up_seed = seeds::derive(params.seed, seeds::SALT_UPSCALE_STAGE);
    let mut up_stream = stream.project_to(
        g,
        &upscale.graph,
        seeds::derive(stream.seed(), seeds::SALT_UPSCALE_STAGE),
        |y| project_upscale(y, p, &reps),
    )?;
    let mut up_params = params.clone();
    up_params.seed = up_seed;
    up_params.record_trajectory = false;
    let up_schedule = up_params.resolve(upscale.graph.node_count())?;
    let up_report = estimate_barycenter(&upscale.graph, &mut up_stream, &up_schedule, None)?;
    let central = upscale
        .cluster_of_label(&up_report.barycenter)
        .ok_or_else(|| Error::Internal("upscale barycenter is not a representative".into()))?;

    // Stage 2: full-resolution central cluster.
    let hat = build_multiscale_graph(g, p, &data, &reps, central)?;
    let mut hat_stream = stream.project_to(g, &hat.graph, stream.seed(), |y| {
        project_multiscale(y, p, central, &reps)
    })?;
    let hat_schedule = params.resolve(hat.graph.node_count())?;
    let mut report = estimate_barycenter(&hat.graph, &mut hat_stream, &hat_schedule, None)?;

    let in_base = g
        .node(&report.barycenter)
        .ok_or_else(|| Error::Internal("multiscale barycenter missing from base graph".into()))?;
    report.barycenter_id = in_base;
    report.upscale_barycenter = Some(up_report.barycenter.clone());
    report.central_cluster = Some(p.label(central).to_owned());
    Ok(MultiscaleRun {
        report,
        representatives: reps,
        data,
        upscale,
        central,
    })
}

/// Persisted pipeline: everything needed to refresh the estimate when new
/// observations arrive, without re-running sub-graph extraction or the
/// boundary Dijkstras.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineState {
    pub schema_version: u32,
    pub graph_hash: String,
    pub partition_hash: String,
    pub cluster_labels: Vec<String>,
    /// Cluster index per node, in lexicographic node-label order.
    pub assignment: Vec<u32>,
    /// Representative node label per cluster.
    pub representatives: Vec<String>,
    pub boundaries: Vec<Vec<StoredBoundary>>,
    pub upscale_edges: Vec<(String, String, f64)>,
    /// Central cluster label of the last estimation.
    pub central: String,
    pub strategy: String,
    pub schedule: ScheduleParams,
    pub stream_mode: String,
    pub stream_seed: u64,
    /// Observations consumed into the state so far (stream cursor).
    pub observations_seen: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoredBoundary {
    pub inner: String,
    pub outer: String,
    pub weight: f64,
    pub outer_cluster: u32,
    pub rep_dist: f64,
}

impl PipelineState {
    pub fn from_run(
        g: &MetricGraph,
        p: &Partition,
        run: &MultiscaleRun,
        strategy: RepStrategy,
        params: &ScheduleParams,
        stream: &ObservationStream,
    ) -> Result<Self> {
        let boundaries = run
            .data
            .boundaries
            .iter()
            .map(|records| {
                records
                    .iter()
                    .map(|r| {
                        Ok(StoredBoundary {
                            inner: g.label(r.inner).to_owned(),
                            outer: g.label(r.outer).to_owned(),
                            weight: r.weight,
                            outer_cluster: r.outer_cluster.0,
                            rep_dist: rep_dist_of(r)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let upscale_edges = run
            .upscale
            .graph
            .edges()
            .iter()
            .map(|&(u, v, len)| {
                (
                    run.upscale.graph.label(u).to_owned(),
                    run.upscale.graph.label(v).to_owned(),
                    len,
                )
            })
            .collect();
        Ok(PipelineState {
            schema_version: crate::report::SCHEMA_VERSION,
            graph_hash: g.content_hash(),
            partition_hash: p.content_hash(g),
            cluster_labels: (0..p.cluster_count())
                .map(|c| p.label(ClusterId(c as u32)).to_owned())
                .collect(),
            assignment: g
                .nodes()
                .map(|n| p.cluster_of(n).expect("cover").0)
                .collect(),
            representatives: run
                .representatives
                .iter()
                .map(|&r| g.label(r).to_owned())
                .collect(),
            boundaries,
            upscale_edges,
            central: p.label(run.central).to_owned(),
            strategy: strategy.as_str().to_owned(),
            schedule: params.clone(),
            stream_mode: stream.mode().as_str().to_owned(),
            stream_seed: stream.seed(),
            observations_seen: stream.len(),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let data = std::fs::read_to_string(path)?;
        let state: PipelineState = serde_json::from_str(&data)?;
        if state.schema_version != crate::report::SCHEMA_VERSION {
            return Err(Error::StaleState(format!(
                "state schema version {} does not match {}",
                state.schema_version,
                crate::report::SCHEMA_VERSION
            )));
        }
        Ok(state)
    }

    /// Rebuild the partition against a freshly loaded graph.
    pub fn partition(&self, g: &MetricGraph) -> Result<Partition> {
        if self.assignment.len() != g.node_count() {
            return Err(Error::StaleState("node count mismatch".into()));
        }
        Ok(Partition::from_parts(
            self.assignment.clone(),
            self.cluster_labels.len(),
            Some(self.cluster_labels.clone()),
        ))
    }

    fn reconstruct(
        &self,
        g: &MetricGraph,
    ) -> Result<(Partition, Vec<NodeId>, SubgraphData, UpscaleGraph)> {
        let p = self.partition(g)?;
        let reps: Vec<NodeId> = self
            .representatives
            .iter()
            .map(|l| {
                g.node(l).ok_or_else(|| Error::StaleState(format!("unknown representative {l}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let boundaries: Vec<Vec<BoundaryRecord>> = self
            .boundaries
            .iter()
            .map(|records| {
                records
                    .iter()
                    .map(|r| {
                        Ok(BoundaryRecord {
                            inner: g
                                .node(&r.inner)
                                .ok_or_else(|| Error::StaleState(format!("unknown node {}", r.inner)))?,
                            outer: g
                                .node(&r.outer)
                                .ok_or_else(|| Error::StaleState(format!("unknown node {}", r.outer)))?,
                            weight: r.weight,
                            outer_cluster: ClusterId(r.outer_cluster),
                            rep_dist: Some(r.rep_dist),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let data = SubgraphData {
            edges: vec![Vec::new(); p.cluster_count()],
            boundaries,
        };
        let node_labels: Vec<&str> = reps.iter().map(|&r| g.label(r)).collect();
        let edge_labels: Vec<(&str, &str, f64)> = self
            .upscale_edges
            .iter()
            .map(|(u, v, len)| (u.as_str(), v.as_str(), *len))
            .collect();
        let graph = MetricGraph::from_parts(&node_labels, &edge_labels)?;
        let rep_cluster = reps
            .iter()
            .enumerate()
            .map(|(ci, &r)| (g.label(r).to_owned(), ci as u32))
            .collect();
        let upscale = UpscaleGraph {
            graph,
            representatives: reps.clone(),
            rep_cluster,
        };
        Ok((p, reps, data, upscale))
    }
}

/// Refresh the barycenter estimate against the current stream using
/// persisted pipeline structures. Re-estimates on the stored upscale
/// graph; when the winning cluster moves, the multiscale graph is
/// reassembled from the stored boundary records (no sub-graph extraction
/// and no boundary Dijkstras). Returns the new report and whether the
/// central cluster changed.
pub fn update_online(
    g: &MetricGraph,
    stream: &ObservationStream,
    state: &mut PipelineState,
) -> Result<(EstimationReport, bool)> {
    if state.graph_hash != g.content_hash() {
        return Err(Error::StaleState(
            "graph content hash does not match the persisted pipeline".into(),
        ));
    }
    if stream.len() < state.observations_seen {
        return Err(Error::StaleState(format!(
            "stream shrank: {} observations known, state had {}",
            stream.len(),
            state.observations_seen
        )));
    }
    let params = state.schedule.clone();
    let (p, reps, data, upscale) = state.reconstruct(g)?;

    let up_seed = seeds::derive(params.seed, seeds::SALT_UPSCALE_STAGE);
    let mut up_stream = stream.project_to(
        g,
        &upscale.graph,
        seeds::derive(stream.seed(), seeds::SALT_UPSCALE_STAGE),
        |y| project_upscale(y, &p, &reps),
    )?;
    let mut up_params = params.clone();
    up_params.seed = up_seed;
    let up_schedule = up_params.resolve(upscale.graph.node_count())?;
    let up_report = estimate_barycenter(&upscale.graph, &mut up_stream, &up_schedule, None)?;
    let central = upscale
        .cluster_of_label(&up_report.barycenter)
        .ok_or_else(|| Error::Internal("upscale barycenter is not a representative".into()))?;
    let changed = p.label(central) != state.central;

    let hat = build_multiscale_graph(g, &p, &data, &reps, central)?;
    let mut hat_stream = stream.project_to(g, &hat.graph, stream.seed(), |y| {
        project_multiscale(y, &p, central, &reps)
    })?;
    let hat_schedule = params.resolve(hat.graph.node_count())?;
    let mut report = estimate_barycenter(&hat.graph, &mut hat_stream, &hat_schedule, None)?;
    let in_base = g
        .node(&report.barycenter)
        .ok_or_else(|| Error::Internal("multiscale barycenter missing from base graph".into()))?;
    report.barycenter_id = in_base;
    report.upscale_barycenter = Some(up_report.barycenter);
    report.central_cluster = Some(p.label(central).to_owned());

    state.central = p.label(central).to_owned();
    state.observations_seen = stream.len();
    Ok((report, changed))
}
