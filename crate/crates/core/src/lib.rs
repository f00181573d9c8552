//! Barycenter estimation for weighted graphs under a node observation
//! stream.
//!
//! The barycenter of a graph with a probability measure on its nodes is
//! the node minimizing the expected squared distance to a random node.
//! This crate estimates it without knowing the measure: a simulated
//! annealing process runs on the continuous graph (edge interiors
//! included), consuming one observation per Poisson arrival. Large graphs
//! go through a partition-based pipeline: estimate on a coarse graph of
//! cluster representatives first, then refine inside the winning cluster
//! at full resolution. An exact brute-force oracle and a Monte Carlo
//! harness cover validation at desk scale.
//!
//! # Quick start
//!
//! ```
//! use gbary::annealing::{estimate_barycenter, ScheduleParams};
//! use gbary::graph::MetricGraph;
//! use gbary::stream::{ObservationStream, ReplayMode};
//!
//! let g = MetricGraph::from_edges(&[
//!     ("hub", "a", 1.0),
//!     ("hub", "b", 1.0),
//!     ("hub", "c", 1.0),
//! ])
//! .unwrap();
//! let obs: Vec<_> = ["a", "b", "c"]
//!     .iter()
//!     .cycle()
//!     .take(120)
//!     .map(|l| g.node(l).unwrap())
//!     .collect();
//! let mut stream = ObservationStream::new(obs, ReplayMode::ShuffleReplay, 1).unwrap();
//! let schedule = ScheduleParams::with_seed(42).resolve(g.node_count()).unwrap();
//! let report = estimate_barycenter(&g, &mut stream, &schedule, None).unwrap();
//! assert_eq!(report.barycenter, "hub");
//! ```

pub mod annealing;
pub mod bench;
pub mod cli;
pub mod error;
pub mod graph;
pub mod multiscale;
pub mod partition;
pub mod report;
mod seeds;
pub mod stream;

pub use error::{Error, Result};
pub use graph::{EmpiricalMeasure, GraphPosition, MetricGraph, NodeId};
pub use partition::{ClusterId, Partition};
