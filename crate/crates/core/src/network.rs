//! Influence graphs, the repeated independent influence process, and
//! leadership components.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::agents::AbstractBeing;
use crate::error::{Error, Result};
use crate::geometry::{self, check_dim, ensure_finite, Matrix, TolerancePolicy, Vector};
use crate::interpretation::InterpretationMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub p: f64,
    pub map: InterpretationMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    dims: BTreeMap<String, usize>,
}

impl InfluenceGraph {
    pub fn new(nodes: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidParameter(format!("duplicate node `{n}`")));
            }
        }
        let mut dims: BTreeMap<String, usize> = BTreeMap::new();
        let mut record = |node: &str, d: usize| -> Result<()> {
            match dims.get(node) {
                Some(&e) => check_dim(e, d),
                None => {
                    dims.insert(node.to_string(), d);
                    Ok(())
                }
            }
        };
        for (i, e) in edges.iter().enumerate() {
            for end in [&e.from, &e.to] {
                if !seen.contains(end.as_str()) {
                    return Err(Error::UnknownAgent(end.clone()));
                }
            }
            if !(e.p > 0.0 && e.p <= 1.0) {
                return Err(Error::BadProbability(e.p));
            }
            if e.map.source != e.from || e.map.target != e.to {
                return Err(Error::InvalidParameter(format!(
                    "edge {i} ({} -> {}) carries map {} -> {}",
                    e.from, e.to, e.map.source, e.map.target
                )));
            }
            geometry::ensure_finite_matrix(&e.map.matrix)?;
            record(&e.from, e.map.source_dim())?;
            record(&e.to, e.map.target_dim())?;
        }
        Ok(Self { nodes, edges, dims })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, node: &str) -> bool {
        self.nodes.iter().any(|n| n == node)
    }

    /// Dimension of a node's value space as fixed by its incident maps.
    pub fn dim_of(&self, node: &str) -> Option<usize> {
        self.dims.get(node).copied()
    }

    /// Returns a copy with one more edge; used for monotonicity checks.
    pub fn with_edge(&self, edge: Edge) -> Result<Self> {
        let mut edges = self.edges.clone();
        edges.push(edge);
        Self::new(self.nodes.clone(), edges)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub seed: u64,
    pub max_steps: u64,
    pub replicates: u32,
    pub adoption_threshold: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_steps: 100,
            replicates: 1,
            adoption_threshold: TolerancePolicy::default().zero_threshold(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidParameter("replicates must be at least 1".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be at least 1".into()));
        }
        if !(self.adoption_threshold >= 0.0 && self.adoption_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "adoption_threshold must be nonnegative, got {}",
                self.adoption_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub step: u64,
    pub edge: usize,
    pub from: String,
    pub to: String,
    pub success: bool,
    /// Image of the sender's representation; recorded for failed attempts too.
    #[serde(serialize_with = "crate::geometry::plain::vector")]
    pub transmitted: Vector,
    pub adopted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationTrace {
    pub replicate: u32,
    pub steps_run: u64,
    pub events: Vec<Event>,
    #[serde(serialize_with = "crate::geometry::plain::vector_map")]
    pub final_representations: BTreeMap<String, Vector>,
    pub adoption_step: BTreeMap<String, u64>,
}

/// Uniform draw in `[0, 1)` for one transmission attempt.
///
/// ChaCha8 keyed by the master seed, one stream per replicate, and a word
/// position fixed by `(step, edge)`, so each coin is independent of the order
/// in which attempts are evaluated.
pub fn attempt_uniform(seed: u64, replicate: u32, step: u64, edge: usize, edge_count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(replicate));
    let slot = u128::from(step) * edge_count as u128 + edge as u128;
    rng.set_word_pos(slot * 2);
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn run_replicate(
    graph: &InfluenceGraph,
    origin: &str,
    start: &Vector,
    cfg: &SimulationConfig,
    replicate: u32,
) -> SimulationTrace {
    let mut reps: BTreeMap<String, Vector> = BTreeMap::new();
    reps.insert(origin.to_string(), start.clone());
    let mut adoption_step = BTreeMap::new();
    adoption_step.insert(origin.to_string(), 0);
    let mut events = Vec::new();
    let n_edges = graph.edges.len();
    let mut steps_run = 0;
    for step in 1..=cfg.max_steps {
        let quiet = graph.edges.iter().all(|e| match reps.get(&e.from) {
            None => true,
            Some(v) => reps.contains_key(&e.to) || (&e.map.matrix * v).norm() <= cfg.adoption_threshold,
        });
        if quiet {
            break;
        }
        steps_run = step;
        let holders = reps.clone();
        for (idx, e) in graph.edges.iter().enumerate() {
            let Some(src) = holders.get(&e.from) else { continue };
            let transmitted = &e.map.matrix * src;
            let success = attempt_uniform(cfg.seed, replicate, step, idx, n_edges) < e.p;
            let adopted =
                success && !reps.contains_key(&e.to) && transmitted.norm() > cfg.adoption_threshold;
            if adopted {
                reps.insert(e.to.clone(), transmitted.clone());
                adoption_step.insert(e.to.clone(), step);
            }
            events.push(Event {
                step,
                edge: idx,
                from: e.from.clone(),
                to: e.to.clone(),
                success,
                transmitted,
                adopted,
            });
        }
    }
    SimulationTrace {
        replicate,
        steps_run,
        events,
        final_representations: reps,
        adoption_step,
    }
}

/// Runs `cfg.replicates` independent replicates seeded from `cfg.seed`.
pub fn run_influence_process(
    graph: &InfluenceGraph,
    being: &AbstractBeing,
    origin: &str,
    cfg: &SimulationConfig,
) -> Result<Vec<SimulationTrace>> {
    cfg.validate()?;
    if !graph.contains(origin) {
        return Err(Error::UnknownOrigin(origin.to_string()));
    }
    let start = match being.representations.get(origin) {
        Some(v) if v.norm() > TolerancePolicy::default().zero_threshold() => v.clone(),
        _ => return Err(Error::OriginHoldsNothing(origin.to_string())),
    };
    ensure_finite(&start)?;
    if let Some(d) = graph.dim_of(origin) {
        check_dim(d, start.len())?;
    }
    Ok((0..cfg.replicates)
        .map(|r| run_replicate(graph, origin, &start, cfg, r))
        .collect())
}

/// Mean of the geometric activation time, `1/p`.
pub fn expected_activation_time(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(1.0 / p)
}

/// Probability that an edge has not yet fired after `t` attempts.
pub fn activation_tail(p: f64, t: u64) -> Result<f64> {
    check_probability(p)?;
    Ok((1.0 - p).powf(t as f64))
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::BadProbability(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadershipComponent {
    pub members: BTreeSet<String>,
    /// Dimension of the subspace reached at each node.
    pub reached_dims: BTreeMap<String, usize>,
    /// Sweeps in which some subspace grew.
    pub growing_sweeps: usize,
    /// `Σ dim(𝒱_i)`.
    pub sweep_bound: usize,
}

/// Agents whose reachable subspace from `span{x_leader}` is nontrivial.
pub fn leadership_component(
    graph: &InfluenceGraph,
    leader: &str,
    x_leader: &Vector,
    tol: &TolerancePolicy,
) -> Result<LeadershipComponent> {
    if !graph.contains(leader) {
        return Err(Error::UnknownLeader(leader.to_string()));
    }
    if let Some(d) = graph.dim_of(leader) {
        check_dim(d, x_leader.len())?;
    }
    ensure_finite(x_leader)?;
    let xn = x_leader.norm();
    if xn <= tol.zero_threshold() {
        return Err(Error::ZeroVector);
    }
    let mut basis: BTreeMap<&str, Matrix> = BTreeMap::new();
    basis.insert(leader, Matrix::from_column_slice(x_leader.len(), 1, (x_leader / xn).as_slice()));
    let sweep_bound: usize = graph
        .nodes
        .iter()
        .map(|n| graph.dim_of(n).unwrap_or(if n == leader { x_leader.len() } else { 0 }))
        .sum();
    let mut growing_sweeps = 0;
    loop {
        let mut grew = false;
        for e in &graph.edges {
            let Some(src) = basis.get(e.from.as_str()) else { continue };
            let image = &e.map.matrix * src;
            let scale = geometry::singular_values(&e.map.matrix).first().copied().unwrap_or(0.0);
            if scale == 0.0 {
                continue;
            }
            let residual = match basis.get(e.to.as_str()) {
                Some(dst) => &image - dst * (dst.transpose() * &image),
                None => image,
            };
            let merged = match basis.get(e.to.as_str()) {
                Some(dst) => {
                    let mut m = Matrix::zeros(dst.nrows(), dst.ncols() + residual.ncols());
                    m.columns_mut(0, dst.ncols()).copy_from(dst);
                    m.columns_mut(dst.ncols(), residual.ncols()).copy_from(&residual);
                    // Re-orthonormalize so rounding cannot push the rank past the dimension.
                    let merged = geometry::range_basis(&m, tol, scale.max(1.0));
                    if merged.ncols() <= dst.ncols() {
                        continue;
                    }
                    merged
                }
                None => {
                    let fresh = geometry::range_basis(&residual, tol, scale);
                    if fresh.ncols() == 0 {
                        continue;
                    }
                    fresh
                }
            };
            basis.insert(e.to.as_str(), merged);
            grew = true;
        }
        if !grew {
            break;
        }
        growing_sweeps += 1;
        debug_assert!(growing_sweeps <= sweep_bound);
    }
    Ok(LeadershipComponent {
        members: basis.keys().map(|k| k.to_string()).collect(),
        reached_dims: basis.iter().map(|(k, b)| (k.to_string(), b.ncols())).collect(),
        growing_sweeps,
        sweep_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LeadStatus {
    InComponentAdopts,
    /// Member of the component that never crossed the adoption threshold.
    InComponentNotAdopted,
    OutOfComponentNever,
    /// Non-member that adopted; contradicts the no-null-space condition.
    OutOfComponentAdopted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoNullSpaceReport {
    pub component: BTreeSet<String>,
    pub max_steps: u64,
    pub replicates: u32,
    pub adoptions: BTreeMap<String, u32>,
    pub statuses: BTreeMap<String, LeadStatus>,
}

impl NoNullSpaceReport {
    pub fn violations(&self) -> usize {
        self.statuses
            .values()
            .filter(|s| matches!(s, LeadStatus::OutOfComponentAdopted))
            .count()
    }

    pub fn fully_leads(&self) -> bool {
        self.statuses.values().all(|s| matches!(s, LeadStatus::InComponentAdopts))
    }
}

/// Horizon after which the chance that any simple path has not fully fired
/// is below `mass`: each of the `ℓ = n − 1` edges gets `m` steps with
/// `ℓ·(1 − p_min)^m ≤ mass`.
pub fn activation_horizon(graph: &InfluenceGraph, mass: f64) -> u64 {
    let hops = graph.nodes.len().saturating_sub(1) as f64;
    let p_min = graph.edges.iter().map(|e| e.p).fold(1.0, f64::min);
    if graph.edges.is_empty() || hops == 0.0 {
        return 1;
    }
    let per_edge = if p_min >= 1.0 {
        1.0
    } else {
        ((mass / hops).ln() / (1.0 - p_min).ln()).ceil().max(1.0)
    };
    (hops * per_edge) as u64
}

/// Cross-checks the component against Monte Carlo adoption.
pub fn verify_no_null_space_condition(
    graph: &InfluenceGraph,
    leader: &str,
    x_leader: &Vector,
    cfg: &SimulationConfig,
    tol: &TolerancePolicy,
) -> Result<NoNullSpaceReport> {
    let comp = leadership_component(graph, leader, x_leader, tol)?;
    let run_cfg = SimulationConfig {
        max_steps: cfg.max_steps.max(activation_horizon(graph, 1e-6)),
        ..*cfg
    };
    let being = AbstractBeing::new("x").with_representation(leader, x_leader.clone());
    let traces = run_influence_process(graph, &being, leader, &run_cfg)?;
    let mut adoptions: BTreeMap<String, u32> = graph.nodes.iter().map(|n| (n.clone(), 0)).collect();
    for t in &traces {
        for agent in t.final_representations.keys() {
            *adoptions.get_mut(agent).expect("trace nodes are graph nodes") += 1;
        }
    }
    let statuses = graph
        .nodes
        .iter()
        .map(|n| {
            let adopted = adoptions[n] > 0;
            let status = match (comp.members.contains(n), adopted) {
                (true, true) => LeadStatus::InComponentAdopts,
                (true, false) => LeadStatus::InComponentNotAdopted,
                (false, false) => LeadStatus::OutOfComponentNever,
                (false, true) => LeadStatus::OutOfComponentAdopted,
            };
            (n.clone(), status)
        })
        .collect();
    Ok(NoNullSpaceReport {
        component: comp.members,
        max_steps: run_cfg.max_steps,
        replicates: run_cfg.replicates,
        adoptions,
        statuses,
    })
}
