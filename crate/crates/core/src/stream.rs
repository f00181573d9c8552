//! Node observation sequences: ingestion, replay, empirical measures, and
//! the projections onto upscale and multiscale graphs.

use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{EmpiricalMeasure, MetricGraph, NodeId};
use crate::partition::{ClusterId, Partition};
use crate::{Error, Result};

/// How observations are drawn once the stored list is in hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplayMode {
    /// Uniform random index per draw; no pass structure.
    Subsample,
    /// Shuffle the whole list, emit it once, reshuffle, repeat.
    ShuffleReplay,
    /// Emit stored observations once in order, then report exhaustion.
    Resumable,
}

impl ReplayMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReplayMode::Subsample => "subsample",
            ReplayMode::ShuffleReplay => "replay",
            ReplayMode::Resumable => "resume",
        }
    }

    pub fn parse(s: &str) -> Option<ReplayMode> {
        match s {
            "subsample" => Some(ReplayMode::Subsample),
            "replay" | "shuffle-replay" => Some(ReplayMode::ShuffleReplay),
            "resume" | "resumable" => Some(ReplayMode::Resumable),
            _ => None,
        }
    }
}

/// Finite or resumable sequence of node observations bound to one graph.
///
/// Replay shuffling uses the stream's own RNG substream, independent of
/// any annealing RNG, so the stochastic components can be varied in
/// isolation. Single-consumer: Monte Carlo runs clone the stream with
/// distinct seeds.
#[derive(Debug, Clone)]
pub struct ObservationStream {
    obs: Vec<u32>,
    mode: ReplayMode,
    seed: u64,
    rng: ChaCha8Rng,
    order: Vec<u32>,
    cursor: usize,
}

impl ObservationStream {
    pub fn new(obs: Vec<NodeId>, mode: ReplayMode, seed: u64) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::EmptyInput("observation stream".into()));
        }
        Ok(ObservationStream {
            obs: obs.into_iter().map(|n| n.0).collect(),
            mode,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: Vec::new(),
            cursor: 0,
        })
    }

    /// Parse observations: whitespace-separated node labels, `#` lines
    /// ignored. Every label must name a node of `g`.
    pub fn load<R: BufRead>(reader: R, g: &MetricGraph, mode: ReplayMode, seed: u64) -> Result<Self> {
        let mut obs = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            for token in trimmed.split_whitespace() {
                let node = g.node(token).ok_or_else(|| Error::UnknownNode {
                    label: token.to_owned(),
                    line: Some(lineno + 1),
                })?;
                obs.push(node);
            }
        }
        Self::new(obs, mode, seed)
    }

    pub fn load_path(path: &std::path::Path, g: &MetricGraph, mode: ReplayMode, seed: u64) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file), g, mode, seed)
    }

    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }

    pub fn mode(&self) -> ReplayMode {
        self.mode
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stored observations (ingestion order), independent of replay state.
    pub fn observations(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.obs.iter().map(|&i| NodeId(i))
    }

    /// Fresh stream over the same observations with a new seed and reset
    /// replay state.
    pub fn clone_with_seed(&self, seed: u64) -> Self {
        ObservationStream {
            obs: self.obs.clone(),
            mode: self.mode,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: Vec::new(),
            cursor: 0,
        }
    }

    /// Same observations, different replay mode.
    pub fn with_mode(&self, mode: ReplayMode) -> Self {
        let mut s = self.clone_with_seed(self.seed);
        s.mode = mode;
        s
    }

    /// Next observation under the stream's replay mode. `Err(Exhausted)`
    /// only in resumable mode.
    pub fn next_observation(&mut self) -> Result<NodeId> {
        match self.mode {
            ReplayMode::Subsample => {
                let idx = self.rng.random_range(0..self.obs.len());
                Ok(NodeId(self.obs[idx]))
            }
            ReplayMode::ShuffleReplay => {
                if self.cursor >= self.order.len() {
                    self.order = self.obs.clone();
                    self.order.shuffle(&mut self.rng);
                    self.cursor = 0;
                }
                let out = self.order[self.cursor];
                self.cursor += 1;
                Ok(NodeId(out))
            }
            ReplayMode::Resumable => {
                if self.cursor >= self.obs.len() {
                    return Err(Error::Exhausted);
                }
                let out = self.obs[self.cursor];
                self.cursor += 1;
                Ok(NodeId(out))
            }
        }
    }

    /// Empirical measure of the stored observations: weight = count,
    /// total = stream length.
    pub fn empirical_measure(&self, g: &MetricGraph) -> EmpiricalMeasure {
        let mut counts = vec![0u64; g.node_count()];
        for &o in &self.obs {
            counts[o as usize] += 1;
        }
        EmpiricalMeasure::from_counts(&counts).expect("stream is nonempty")
    }

    /// Project every stored observation into the node space of `target`
    /// via per-observation label mapping. Replay state resets.
    pub fn project_to(
        &self,
        g: &MetricGraph,
        target: &MetricGraph,
        seed: u64,
        mut map: impl FnMut(NodeId) -> Result<NodeId>,
    ) -> Result<ObservationStream> {
        let mut projected = Vec::with_capacity(self.obs.len());
        for &o in &self.obs {
            let in_g = map(NodeId(o))?;
            let label = g.label(in_g);
            let in_target = target.node(label).ok_or_else(|| Error::UnknownNode {
                label: label.to_owned(),
                line: None,
            })?;
            projected.push(in_target);
        }
        ObservationStream::new(projected, self.mode, seed)
    }
}

/// Upscale projection: an observation in cluster `C_i` is seen as that
/// cluster's representative node.
pub fn project_upscale(y: NodeId, p: &Partition, representatives: &[NodeId]) -> Result<NodeId> {
    let c = p
        .cluster_of(y)
        .ok_or_else(|| Error::MissingAssignment {
            label: format!("#{}", y.0),
        })?;
    Ok(representatives[c.index()])
}

/// Multiscale projection: observations in the central cluster pass
/// through, all others collapse to their cluster representative.
pub fn project_multiscale(
    y: NodeId,
    p: &Partition,
    central: ClusterId,
    representatives: &[NodeId],
) -> Result<NodeId> {
    let c = p
        .cluster_of(y)
        .ok_or_else(|| Error::MissingAssignment {
            label: format!("#{}", y.0),
        })?;
    if c == central {
        Ok(y)
    } else {
        Ok(representatives[c.index()])
    }
}
