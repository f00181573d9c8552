//! Homogenized simulated annealing on the continuous graph.
//!
//! The estimation process lives on edge interiors, not just nodes. Each
//! Poisson arrival triggers one iteration: a Brownian move of amplitude
//! tied to the inter-arrival gap, then a deterministic drift along the
//! geodesic toward the freshly consumed observation. The drift fraction
//! `beta(t) / alpha(t)` grows with the inverse-temperature schedule, so
//! the walk is noise-dominated early and contraction-dominated late.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::graph::{GraphPosition, MetricGraph, NodeId};
use crate::stream::ObservationStream;
use crate::{Error, Result};

/// Inverse-temperature growth shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaKind {
    /// `beta(t) = c * ln(1 + t)` (the form with convergence guarantees).
    Logarithmic,
    /// `beta(t) = c * t`.
    Linear,
}

impl BetaKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BetaKind::Logarithmic => "log",
            BetaKind::Linear => "linear",
        }
    }

    pub fn parse(s: &str) -> Option<BetaKind> {
        match s {
            "log" | "logarithmic" => Some(BetaKind::Logarithmic),
            "linear" => Some(BetaKind::Linear),
            _ => None,
        }
    }

    fn growth(&self, t: f64) -> f64 {
        match self {
            BetaKind::Logarithmic => (1.0 + t).ln(),
            BetaKind::Linear => t,
        }
    }

    /// Integral of `growth` over `[0, t]`.
    fn growth_integral(&self, t: f64) -> f64 {
        match self {
            BetaKind::Logarithmic => (1.0 + t) * (1.0 + t).ln() - t,
            BetaKind::Linear => 0.5 * t * t,
        }
    }
}

/// Target observation budget per estimation stage.
///
/// Stored observations are reused (shuffle-replay), so a budget well above
/// the stored stream length costs no extra data, only compute; high
/// reuse is what pins the final position inside the barycenter's cell.
pub const DEFAULT_S_STAR: u64 = 100_000;

/// Total drift exponent accumulated over one run under `beta_mult = 1`:
/// the integral of `beta(t)` over `[0, t_max]`.
///
/// The influence of the starting point (and of the hot phase generally)
/// decays like `exp(-integral of beta)`, so values of a few units flush
/// the transient; the terminal drift fraction `beta(t_max) / alpha(t_max)`
/// then shrinks automatically as the observation budget grows, which is
/// what turns many replayed observations into a tight average.
pub const DEFAULT_CONTRACTION_BUDGET: f64 = 15.0;

/// User-level schedule knobs, independent of any particular graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub beta_kind: BetaKind,
    pub beta_mult: f64,
    pub tmax_mult: f64,
    pub s_star: u64,
    pub obs_mult: f64,
    /// Exponent of the Poisson intensity `alpha(t) = alpha0 (1+t)^gamma`;
    /// 0 keeps the intensity constant.
    pub alpha_gamma: f64,
    pub seed: u64,
    #[serde(skip, default)]
    pub record_trajectory: bool,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            beta_kind: BetaKind::Logarithmic,
            beta_mult: 1.0,
            tmax_mult: 1.0,
            s_star: DEFAULT_S_STAR,
            obs_mult: 1.0,
            alpha_gamma: 0.0,
            seed: 0,
            record_trajectory: false,
        }
    }
}

impl ScheduleParams {
    pub fn with_seed(seed: u64) -> Self {
        ScheduleParams {
            seed,
            ..Default::default()
        }
    }

    /// Resolve the knobs against a concrete node count:
    /// `t_max = (0.1 n + 100) * tmax_mult`, `alpha0` set so the expected
    /// number of arrivals over `[0, t_max]` equals the observation budget,
    /// and `beta_const` calibrated so the accumulated drift exponent
    /// equals `DEFAULT_CONTRACTION_BUDGET * beta_mult`.
    pub fn resolve(&self, node_count: usize) -> Result<Schedule> {
        if self.beta_mult <= 0.0 || self.tmax_mult <= 0.0 || self.obs_mult <= 0.0 {
            return Err(Error::InvalidConfig(
                "schedule multipliers must be positive".into(),
            ));
        }
        if self.alpha_gamma < 0.0 {
            return Err(Error::InvalidConfig("alpha_gamma must be >= 0".into()));
        }
        let s_star = ((self.s_star as f64 * self.obs_mult).round() as u64).max(1);
        let t_max = (0.1 * node_count as f64 + 100.0) * self.tmax_mult;
        // Expected observation count over [0, t_max] equals s_star for any
        // intensity exponent: integral of alpha0 (1+t)^gamma.
        let p = self.alpha_gamma + 1.0;
        let alpha_const = s_star as f64 * p / ((1.0 + t_max).powf(p) - 1.0);
        let beta_const = DEFAULT_CONTRACTION_BUDGET * self.beta_mult
            / self.beta_kind.growth_integral(t_max);
        Ok(Schedule {
            beta_kind: self.beta_kind,
            beta_const,
            alpha_const,
            alpha_gamma: self.alpha_gamma,
            t_max,
            s_star,
            seed: self.seed,
            record_trajectory: self.record_trajectory,
        })
    }
}

/// Fully resolved schedule for one estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct Schedule {
    pub beta_kind: BetaKind,
    pub beta_const: f64,
    pub alpha_const: f64,
    pub alpha_gamma: f64,
    pub t_max: f64,
    pub s_star: u64,
    pub seed: u64,
    #[serde(skip)]
    pub record_trajectory: bool,
}

impl Schedule {
    pub fn beta_at(&self, t: f64) -> f64 {
        self.beta_const * self.beta_kind.growth(t)
    }

    pub fn alpha_at(&self, t: f64) -> f64 {
        if self.alpha_gamma == 0.0 {
            self.alpha_const
        } else {
            self.alpha_const * (1.0 + t).powf(self.alpha_gamma)
        }
    }
}

/// Mutable state of one annealing run.
#[derive(Debug, Clone)]
pub struct AnnealingState {
    pub position: GraphPosition,
    pub clock: f64,
    pub last_arrival: f64,
    pub steps: u64,
}

/// Result of one estimation run.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub schema_version: u32,
    pub barycenter: String,
    pub final_position: String,
    pub observations_used: u64,
    pub graph_nodes: usize,
    pub graph_edges: usize,
    pub schedule: Schedule,
    /// Barycenter of the upscale graph (multiscale runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upscale_barycenter: Option<String>,
    /// Cluster chosen as central (multiscale runs only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub central_cluster: Option<String>,
    #[serde(skip)]
    pub barycenter_id: NodeId,
    #[serde(skip)]
    pub final_position_raw: GraphPosition,
    #[serde(skip)]
    pub wall: Duration,
    /// `(arrival time, position after drift)` per step, when recording.
    #[serde(skip)]
    pub trajectory: Vec<(f64, GraphPosition)>,
}

impl EstimationReport {
    /// Canonical machine-readable form. Wall-clock time is deliberately
    /// not part of it, so identical inputs give identical bytes.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Next Poisson arrival after time `last` under the schedule's intensity.
pub fn next_arrival(last: f64, schedule: &Schedule, rng: &mut impl Rng) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if schedule.alpha_gamma == 0.0 {
        last + e / schedule.alpha_const
    } else {
        // Invert the cumulative intensity of alpha0 (1+t)^gamma.
        let p = schedule.alpha_gamma + 1.0;
        let base = (1.0 + last).powf(p) + e * p / schedule.alpha_const;
        base.powf(1.0 / p) - 1.0
    }
}

/// Walk a fixed distance along the continuous graph, drawing a uniformly
/// random direction at the start and at every node crossed on the way.
pub fn walk_from(
    g: &MetricGraph,
    pos: &GraphPosition,
    distance: f64,
    rng: &mut impl Rng,
) -> GraphPosition {
    if distance <= 0.0 {
        return *pos;
    }
    // Current motion: on edge (from -> to), `done` of `len` covered.
    let (mut from, mut to, mut done, mut len, mut remaining) = match *pos {
        GraphPosition::Node(u) => {
            let deg = g.degree(u);
            if deg == 0 {
                return *pos;
            }
            let pick = rng.random_range(0..deg);
            let (v, l) = g.neighbors(u).nth(pick).expect("degree checked");
            (u, v, 0.0, l, distance)
        }
        GraphPosition::Edge { u, v, offset } => {
            let l = g.edge_len(u, v).expect("valid position");
            if rng.random_range(0..2u32) == 0 {
                // Toward v.
                (u, v, offset, l, distance)
            } else {
                // Toward u.
                (v, u, l - offset, l, distance)
            }
        }
    };
    loop {
        let to_node = len - done;
        if remaining < to_node {
            let offset = done + remaining;
            return GraphPosition::on_edge(g, from, to, offset);
        }
        remaining -= to_node;
        if remaining <= 0.0 {
            return GraphPosition::Node(to);
        }
        let deg = g.degree(to);
        if deg == 0 {
            return GraphPosition::Node(to);
        }
        let pick = rng.random_range(0..deg);
        let (next, l) = g.neighbors(to).nth(pick).expect("degree checked");
        from = to;
        to = next;
        done = 0.0;
        len = l;
    }
}

/// One Brownian move: draw `eps ~ Normal(0, sigma^2)` and walk `|eps|`.
pub fn brownian_step(
    g: &MetricGraph,
    pos: &GraphPosition,
    sigma: f64,
    rng: &mut impl Rng,
) -> GraphPosition {
    if sigma <= 0.0 {
        return *pos;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    let eps: f64 = normal.sample(rng);
    walk_from(g, pos, eps.abs(), rng)
}

/// One drift move: advance `min(fraction, 1)` of the geodesic distance
/// toward `target`, never overshooting it.
pub fn drift_step(
    g: &MetricGraph,
    pos: &GraphPosition,
    target: NodeId,
    fraction: f64,
) -> Result<GraphPosition> {
    if fraction <= 0.0 {
        return Ok(*pos);
    }
    let dist = g.dist_from_position(pos, target)?;
    if dist <= 0.0 || fraction >= 1.0 {
        return Ok(GraphPosition::Node(target));
    }
    let path = g.geodesic_toward(pos, target)?;
    Ok(path.position_at(g, fraction * dist))
}

/// Brownian amplitude for one step. The raw amplitude is the square root
/// of the inter-arrival gap (Brownian increment variance = elapsed time);
/// it is ramped down linearly to zero at the stopping time so the cold
/// phase is governed by the drift alone.
fn brownian_sigma(dt: f64, t: f64, t_max: f64) -> f64 {
    let ramp = (1.0 - t / t_max).max(0.0);
    dt.sqrt() * ramp
}

/// Memory allowance for per-target shortest-path fields inside one run.
/// Observations repeat, so caching `(dist, pred)` per distinct target
/// turns most drift steps into pure path walks.
const SP_CACHE_BYTES: usize = 256 << 20;

/// Run the full annealing loop until the Poisson clock passes `t_max`.
///
/// `x0` defaults to a uniformly random node. The returned barycenter is
/// the node nearest to the final position.
pub fn estimate_barycenter(
    g: &MetricGraph,
    stream: &mut ObservationStream,
    schedule: &Schedule,
    x0: Option<GraphPosition>,
) -> Result<EstimationReport> {
    if g.node_count() > 1 && !g.is_connected() {
        return Err(Error::Disconnected("estimate_barycenter".into()));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let position = x0.unwrap_or_else(|| {
        GraphPosition::Node(NodeId(rng.random_range(0..g.node_count() as u32)))
    });
    let mut state = AnnealingState {
        position,
        clock: 0.0,
        last_arrival: 0.0,
        steps: 0,
    };
    let max_cached = (SP_CACHE_BYTES / (16 * g.node_count().max(1))).max(1);
    let mut sp_cache: HashMap<u32, (Vec<f64>, Vec<u32>)> = HashMap::new();
    let mut trajectory = Vec::new();
    loop {
        let t_next = next_arrival(state.clock, schedule, &mut rng);
        if t_next > schedule.t_max {
            break;
        }
        let dt = t_next - state.clock;
        state.last_arrival = state.clock;
        state.clock = t_next;

        let sigma = brownian_sigma(dt, state.clock, schedule.t_max);
        state.position = brownian_step(g, &state.position, sigma, &mut rng);

        let y = stream.next_observation()?;
        let fraction = schedule.beta_at(state.clock) / schedule.alpha_at(state.clock);
        state.position = if fraction <= 0.0 {
            state.position
        } else {
            let fresh;
            let sp = match sp_cache.get(&y.0) {
                Some(sp) => sp,
                None => {
                    let computed = g.dijkstra_pred(y.0);
                    if sp_cache.len() < max_cached {
                        sp_cache.entry(y.0).or_insert(computed)
                    } else {
                        fresh = computed;
                        &fresh
                    }
                }
            };
            let dist = g.dist_from_sp(&state.position, &sp.0, y)?;
            if dist <= 0.0 || fraction >= 1.0 {
                GraphPosition::Node(y)
            } else {
                let path = g.geodesic_from_sp(&state.position, y, &sp.0, &sp.1)?;
                path.position_at(g, fraction * dist)
            }
        };
        state.steps += 1;
        debug_assert!(state.position.is_valid(g));
        if schedule.record_trajectory {
            trajectory.push((state.clock, state.position));
        }
    }
    let barycenter = g.position_nearest_node(&state.position);
    Ok(EstimationReport {
        schema_version: crate::report::SCHEMA_VERSION,
        barycenter: g.label(barycenter).to_owned(),
        final_position: format!("{}", state.position.display(g)),
        observations_used: state.steps,
        graph_nodes: g.node_count(),
        graph_edges: g.edge_count(),
        schedule: schedule.clone(),
        upscale_barycenter: None,
        central_cluster: None,
        barycenter_id: barycenter,
        final_position_raw: state.position,
        wall: start.elapsed(),
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::ReplayMode;

    fn p3() -> MetricGraph {
        MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap()
    }

    fn star4() -> MetricGraph {
        MetricGraph::from_edges(&[("s", "l1", 1.0), ("s", "l2", 1.0), ("s", "l3", 1.0)]).unwrap()
    }

    #[test]
    fn arrival_gap_matches_intensity() {
        let schedule = Schedule {
            beta_kind: BetaKind::Logarithmic,
            beta_const: 1.0,
            alpha_const: 2.0,
            alpha_gamma: 0.0,
            t_max: 1.0,
            s_star: 1,
            seed: 0,
            record_trajectory: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        // alpha = 2: gaps are Exp(1)/2.
        let mut t = 0.0;
        let mut gaps = Vec::new();
        for _ in 0..100_000 {
            let t2 = next_arrival(t, &schedule, &mut rng);
            assert!(t2 > t);
            gaps.push(t2 - t);
            t = t2;
        }
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean gap {mean}");
    }

    #[test]
    fn arrival_mean_gap_near_one_at_unit_intensity() {
        let schedule = Schedule {
            beta_kind: BetaKind::Linear,
            beta_const: 1.0,
            alpha_const: 1.0,
            alpha_gamma: 0.0,
            t_max: 1.0,
            s_star: 1,
            seed: 0,
            record_trajectory: false,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut t = 0.0;
        let n = 100_000;
        for _ in 0..n {
            t = next_arrival(t, &schedule, &mut rng);
        }
        let mean = t / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "mean gap {mean}");
    }

    #[test]
    fn default_budget_yields_s_star_expected_arrivals() {
        let params = ScheduleParams::with_seed(0);
        let schedule = params.resolve(296).unwrap();
        // alpha0 * t_max = s_star by construction.
        assert!((schedule.alpha_const * schedule.t_max - schedule.s_star as f64).abs() < 1e-9);
    }

    #[test]
    fn brownian_step_zero_sigma_is_identity() {
        let g = p3();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pos = GraphPosition::on_edge(&g, g.node("a").unwrap(), g.node("b").unwrap(), 0.25);
        assert_eq!(brownian_step(&g, &pos, 0.0, &mut rng), pos);
    }

    #[test]
    fn walk_from_node_picks_each_branch_evenly() {
        let g = p3();
        let b = g.node("b").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut toward_a = 0usize;
        let n = 10_000;
        for _ in 0..n {
            match walk_from(&g, &GraphPosition::Node(b), 0.5, &mut rng) {
                GraphPosition::Edge { u, v, offset } => {
                    // Offset 0.5 from b on either incident unit edge.
                    if g.label(u) == "a" {
                        assert_eq!(g.label(v), "b");
                        assert!((offset - 0.5).abs() < 1e-12);
                        toward_a += 1;
                    } else {
                        assert_eq!(g.label(v), "c");
                        assert!((offset - 0.5).abs() < 1e-12);
                    }
                }
                p => panic!("walk should end mid-edge, got {p:?}"),
            }
        }
        let freq = toward_a as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.02, "branch frequency {freq}");
    }

    #[test]
    fn long_walk_on_cycle_stays_valid() {
        let g = MetricGraph::from_edges(&[("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)])
            .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pos = GraphPosition::Node(g.node("a").unwrap());
        for _ in 0..50 {
            pos = walk_from(&g, &pos, 10.0, &mut rng);
            assert!(pos.is_valid(&g));
        }
    }

    #[test]
    fn drift_step_examples() {
        let g = p3();
        let (a, b, c) = (
            g.node("a").unwrap(),
            g.node("b").unwrap(),
            g.node("c").unwrap(),
        );
        // Move half of d(a, c) = 2: lands exactly on b.
        let half = drift_step(&g, &GraphPosition::Node(a), c, 0.5).unwrap();
        assert_eq!(half, GraphPosition::Node(b));
        // fraction >= 1 clamps to the target.
        let full = drift_step(&g, &GraphPosition::Node(a), c, 1.5).unwrap();
        assert_eq!(full, GraphPosition::Node(c));
        // fraction = 0 is the identity.
        let none = drift_step(&g, &GraphPosition::Node(a), c, 0.0).unwrap();
        assert_eq!(none, GraphPosition::Node(a));
    }

    #[test]
    fn drift_contracts_distance_exactly() {
        let g = MetricGraph::from_edges(&[
            ("a", "b", 1.5),
            ("b", "c", 2.5),
            ("c", "d", 0.7),
            ("b", "d", 4.0),
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let targets: Vec<NodeId> = g.nodes().collect();
        let mut pos = GraphPosition::Node(g.node("a").unwrap());
        for i in 0..200 {
            pos = walk_from(&g, &pos, 1.3, &mut rng);
            let target = targets[i % targets.len()];
            let f: f64 = rng.random_range(0.0..1.2);
            let before = g.dist_from_position(&pos, target).unwrap();
            let after_pos = drift_step(&g, &pos, target, f).unwrap();
            let after = g.dist_from_position(&after_pos, target).unwrap();
            let expect = (1.0 - f.min(1.0)) * before;
            assert!(
                (after - expect).abs() < 1e-9,
                "f={f} before={before} after={after} expect={expect}"
            );
            pos = after_pos;
        }
    }

    #[test]
    fn estimate_on_single_node_graph_returns_it() {
        let g = MetricGraph::from_parts(&["only"], &[]).unwrap();
        let mut stream = ObservationStream::new(
            vec![g.node("only").unwrap()],
            ReplayMode::ShuffleReplay,
            1,
        )
        .unwrap();
        let schedule = ScheduleParams::with_seed(7).resolve(g.node_count()).unwrap();
        let report = estimate_barycenter(&g, &mut stream, &schedule, None).unwrap();
        assert_eq!(report.barycenter, "only");
    }

    #[test]
    fn estimate_is_deterministic() {
        let g = star4();
        let obs: Vec<NodeId> = ["l1", "l2", "l3"]
            .iter()
            .cycle()
            .take(60)
            .map(|l| g.node(l).unwrap())
            .collect();
        let schedule = ScheduleParams::with_seed(99).resolve(g.node_count()).unwrap();
        let mut runs = Vec::new();
        for _ in 0..2 {
            let mut stream =
                ObservationStream::new(obs.clone(), ReplayMode::ShuffleReplay, 4).unwrap();
            let report = estimate_barycenter(&g, &mut stream, &schedule, None).unwrap();
            runs.push(report.to_json());
        }
        assert_eq!(runs[0], runs[1]);
    }

    #[test]
    fn estimate_finds_star_hub_in_most_seeded_runs() {
        let g = star4();
        let obs: Vec<NodeId> = ["l1", "l2", "l3"]
            .iter()
            .cycle()
            .take(300)
            .map(|l| g.node(l).unwrap())
            .collect();
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut stream =
                ObservationStream::new(obs.clone(), ReplayMode::ShuffleReplay, seed ^ 0xABCD)
                    .unwrap();
            let schedule = ScheduleParams::with_seed(seed).resolve(g.node_count()).unwrap();
            let report = estimate_barycenter(&g, &mut stream, &schedule, None).unwrap();
            if report.barycenter == "s" {
                hits += 1;
            }
        }
        assert!(hits >= 95, "star hub found in {hits}/100 runs");
    }

    #[test]
    fn clock_is_monotone_and_counts_match() {
        let g = p3();
        let obs: Vec<NodeId> = vec![g.node("a").unwrap(), g.node("c").unwrap()];
        let mut stream = ObservationStream::new(obs, ReplayMode::ShuffleReplay, 2).unwrap();
        let mut params = ScheduleParams::with_seed(3);
        params.record_trajectory = true;
        let schedule = params.resolve(g.node_count()).unwrap();
        let report = estimate_barycenter(&g, &mut stream, &schedule, None).unwrap();
        assert_eq!(report.trajectory.len() as u64, report.observations_used);
        let times: Vec<f64> = report.trajectory.iter().map(|(t, _)| *t).collect();
        for w in times.windows(2) {
            assert!(w[1] > w[0]);
        }
        for (_, pos) in &report.trajectory {
            assert!(pos.is_valid(&g));
        }
    }
}
