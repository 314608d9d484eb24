//! Goal updates, motivational convergence, coordination, valuation dynamics
//! and the abstract-being lifecycle.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::agents::{motivational_gradient, AbstractBeing, Agent};
use crate::error::{Error, Result};
use crate::geometry::{self, check_dim, HullMembership, TolerancePolicy, Vector};
use crate::network::{attempt_uniform, InfluenceGraph, SimulationConfig};

/// Step-dependent gain of the additive goal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    /// `β(k) = scale·k`
    Linear { scale: f64 },
    Constant(f64),
    /// `β(k) = scale·k^exponent`
    Power { scale: f64, exponent: f64 },
}

impl BetaSchedule {
    pub fn value(&self, step: u64) -> f64 {
        let k = step as f64;
        match *self {
            BetaSchedule::Linear { scale } => scale * k,
            BetaSchedule::Constant(c) => c,
            BetaSchedule::Power { scale, exponent } => scale * k.powf(exponent),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            BetaSchedule::Linear { scale } => scale > 0.0 && scale.is_finite(),
            BetaSchedule::Constant(c) => c > 0.0 && c.is_finite(),
            BetaSchedule::Power { scale, exponent } => {
                scale > 0.0 && scale.is_finite() && exponent >= 0.0 && exponent.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "beta schedule must be positive and nondecreasing: {self:?}"
            )))
        }
    }

    /// True when `β(k) → ∞`.
    pub fn diverges(&self) -> bool {
        match *self {
            BetaSchedule::Linear { .. } => true,
            BetaSchedule::Constant(_) => false,
            BetaSchedule::Power { exponent, .. } => exponent > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GoalUpdateRule {
    ConvexBlend { alpha: f64 },
    Additive(BetaSchedule),
}

impl GoalUpdateRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            GoalUpdateRule::ConvexBlend { alpha } if (0.0..=1.0).contains(alpha) => Ok(()),
            GoalUpdateRule::ConvexBlend { alpha } => {
                Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")))
            }
            GoalUpdateRule::Additive(s) => s.validate(),
        }
    }
}

pub fn update_goal(agent: &Agent, adopted: &Vector, rule: &GoalUpdateRule, step: u64) -> Result<Agent> {
    rule.validate()?;
    check_dim(agent.dim(), adopted.len())?;
    let g = &agent.goal_state;
    let goal_state = match *rule {
        GoalUpdateRule::ConvexBlend { alpha } => adopted * alpha + g * (1.0 - alpha),
        GoalUpdateRule::Additive(s) => g + adopted * s.value(step),
    };
    Ok(Agent {
        goal_state,
        ..agent.clone()
    })
}

/// Cosine between the motivational gradient and `limit` after each step.
///
/// The convex rule blends cumulatively. The additive rule follows
/// `g⁽ᵏ⁾ = g + β(k)·X⁽ᵏ⁾` from the initial goal, so `M⁽ᵏ⁾ = M⁽⁰⁾ + β(k)·X⁽ᵏ⁾`.
pub fn track_motivational_convergence(
    agent: &Agent,
    adopted_sequence: &[Vector],
    limit: &Vector,
    rule: &GoalUpdateRule,
) -> Result<Vec<f64>> {
    rule.validate()?;
    check_dim(agent.dim(), limit.len())?;
    if limit.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut current = agent.clone();
    let mut out = Vec::with_capacity(adopted_sequence.len());
    for (i, x) in adopted_sequence.iter().enumerate() {
        let step = i as u64 + 1;
        let next = match rule {
            GoalUpdateRule::ConvexBlend { .. } => update_goal(&current, x, rule, step)?,
            GoalUpdateRule::Additive(_) => update_goal(agent, x, rule, step)?,
        };
        let m = motivational_gradient(&next);
        // A zero gradient has no direction; when the goal was never displaced
        // it is read as already aligned.
        let cos = if m.norm() == 0.0 {
            if motivational_gradient(agent).norm() == 0.0 {
                1.0
            } else {
                return Err(Error::ZeroVector);
            }
        } else {
            geometry::cosine_similarity(&m, limit)?
        };
        out.push(cos);
        current = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FollowerCoordination {
    pub id: String,
    pub distance: f64,
    pub valuation_gap: f64,
    pub structural: bool,
    pub valuation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinationReport {
    pub followers: Vec<FollowerCoordination>,
    pub coordinated: bool,
}

/// Strict `‖x_i − x_L‖ < ε` and `|‖x_i‖ − ‖x_L‖| < δ` for every follower.
pub fn check_coordination(
    followers: &[(String, Vector)],
    x_leader: &Vector,
    eps: f64,
    delta: f64,
) -> Result<CoordinationReport> {
    let ln = x_leader.norm();
    let followers = followers
        .iter()
        .map(|(id, x)| {
            check_dim(x_leader.len(), x.len())?;
            let distance = (x - x_leader).norm();
            let valuation_gap = (x.norm() - ln).abs();
            Ok(FollowerCoordination {
                id: id.clone(),
                distance,
                valuation_gap,
                structural: distance < eps,
                valuation: valuation_gap < delta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let coordinated = followers.iter().all(|f| f.structural && f.valuation);
    Ok(CoordinationReport { followers, coordinated })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationUpdateRule {
    pub alpha: f64,
}

impl ValuationUpdateRule {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::InvalidParameter(format!("alpha must lie in (0, 1], got {alpha}")))
        }
    }
}

/// `v` lies strictly outside `[min, max]` of `vals`.
pub fn outside_scalar_hull(vals: impl IntoIterator<Item = f64>, v: f64) -> bool {
    let (lo, hi) = vals
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    lo > hi || v < lo || v > hi
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationEvent {
    pub step: u64,
    pub from: String,
    pub to: String,
    pub before: f64,
    pub after: f64,
    pub distance_before: f64,
    pub distance_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationRun {
    pub replicate: u32,
    /// Follower valuations at steps `0..=max_steps`.
    pub table: Vec<BTreeMap<String, f64>>,
    pub events: Vec<ValuationEvent>,
    /// Events that moved a follower away from the leader's valuation.
    pub increases: usize,
    /// Leader-lineage events that failed to strictly decrease the distance.
    pub non_strict: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValuationConvergenceReport {
    pub hypothesis_holds: bool,
    pub runs: Vec<ValuationRun>,
}

impl ValuationConvergenceReport {
    /// Total distance increases over all replicates; only meaningful when the
    /// outside-hull hypothesis holds.
    pub fn violations(&self) -> usize {
        self.runs.iter().map(|r| r.increases).sum()
    }
}

const DISTANCE_SLACK: f64 = 1e-12;

/// Convex valuation updates along activated edges.
///
/// Only agents already reached by the leader's lineage transmit; a follower
/// joins the lineage on its first activated incoming edge from a member.
/// Sources read the valuations at the start of the step.
pub fn run_valuation_convergence(
    initial_vals: &BTreeMap<String, f64>,
    leader: &str,
    val_leader: f64,
    graph: &InfluenceGraph,
    rule: &ValuationUpdateRule,
    cfg: &SimulationConfig,
) -> Result<ValuationConvergenceReport> {
    cfg.validate()?;
    ValuationUpdateRule::new(rule.alpha)?;
    if !graph.contains(leader) {
        return Err(Error::UnknownLeader(leader.to_string()));
    }
    if !val_leader.is_finite() {
        return Err(Error::NonFinite("leader valuation"));
    }
    for (id, v) in initial_vals {
        if !graph.contains(id) {
            return Err(Error::UnknownAgent(id.clone()));
        }
        if !v.is_finite() {
            return Err(Error::NonFinite("follower valuation"));
        }
    }
    for n in graph.nodes() {
        if n != leader && !initial_vals.contains_key(n) {
            return Err(Error::InvalidParameter(format!("no initial valuation for `{n}`")));
        }
    }
    let followers: BTreeMap<String, f64> =
        initial_vals.iter().filter(|(k, _)| *k != leader).map(|(k, v)| (k.clone(), *v)).collect();
    let hypothesis_holds = outside_scalar_hull(followers.values().copied(), val_leader);
    let n_edges = graph.edges().len();
    let runs = (0..cfg.replicates)
        .map(|replicate| {
            let mut vals = followers.clone();
            let mut lineage: BTreeMap<&str, bool> = graph.nodes().iter().map(|n| (n.as_str(), n == leader)).collect();
            let mut table = vec![vals.clone()];
            let mut events = Vec::new();
            let (mut increases, mut non_strict) = (0, 0);
            for step in 1..=cfg.max_steps {
                let snapshot = vals.clone();
                let members = lineage.clone();
                for (idx, e) in graph.edges().iter().enumerate() {
                    if !members[e.from.as_str()] || e.to == leader {
                        continue;
                    }
                    if attempt_uniform(cfg.seed, replicate, step, idx, n_edges) >= e.p {
                        continue;
                    }
                    let source = if e.from == leader { val_leader } else { snapshot[&e.from] };
                    let before = vals[&e.to];
                    let after = (1.0 - rule.alpha) * before + rule.alpha * source;
                    vals.insert(e.to.clone(), after);
                    lineage.insert(e.to.as_str(), true);
                    let distance_before = (before - val_leader).abs();
                    let distance_after = (after - val_leader).abs();
                    if distance_after > distance_before + DISTANCE_SLACK {
                        increases += 1;
                    }
                    if distance_after >= distance_before && distance_before > 0.0 {
                        non_strict += 1;
                    }
                    events.push(ValuationEvent {
                        step,
                        from: e.from.clone(),
                        to: e.to.clone(),
                        before,
                        after,
                        distance_before,
                        distance_after,
                    });
                }
                table.push(vals.clone());
            }
            ValuationRun {
                replicate,
                table,
                events,
                increases,
                non_strict,
            }
        })
        .collect();
    Ok(ValuationConvergenceReport { hypothesis_holds, runs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullRole {
    Interpolator,
    Innovator,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HullLeadership {
    pub role: HullRole,
    pub membership: HullMembership,
}

pub fn convex_hull_leadership_check(
    group_vectors: &[Vector],
    x_leader: &Vector,
    tol: &TolerancePolicy,
) -> Result<HullLeadership> {
    let membership = geometry::convex_hull_membership(x_leader, group_vectors, tol)?;
    let role = if membership.is_inside() {
        HullRole::Interpolator
    } else {
        HullRole::Innovator
    };
    Ok(HullLeadership { role, membership })
}

/// Per-agent evolution rule for a being's representation.
#[derive(Debug, Clone, PartialEq)]
pub enum LifecycleUpdate {
    Identity,
    Scale(f64),
    /// Replace with a newly received image.
    Replace(Vector),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LifecycleRecord {
    pub being: String,
    pub threshold: f64,
    pub birth_step: Option<u64>,
    pub death_step: Option<u64>,
    /// `(step, agent → representation norm)`.
    pub norms: Vec<(u64, BTreeMap<String, f64>)>,
}

impl LifecycleRecord {
    pub fn new(being: &AbstractBeing, threshold: f64) -> Self {
        Self {
            being: being.id.clone(),
            threshold,
            birth_step: being.birth_step,
            death_step: None,
            norms: Vec::new(),
        }
    }

    /// Records the state at `step` and updates birth and death markers.
    pub fn observe<S: AsRef<str>>(&mut self, being: &AbstractBeing, population: &[S], step: u64) {
        let norms: BTreeMap<String, f64> = population
            .iter()
            .map(|a| {
                let a = a.as_ref();
                (a.to_string(), being.representations.get(a).map_or(0.0, |v| v.norm()))
            })
            .collect();
        let alive = norms.values().any(|&n| n > self.threshold);
        match (self.birth_step, self.death_step, alive) {
            (None, _, true) => self.birth_step = Some(step),
            (Some(_), None, false) => self.death_step = Some(step),
            (Some(_), Some(_), true) => self.death_step = None,
            _ => {}
        }
        self.norms.push((step, norms));
    }
}

/// Applies each agent's rule (identity when absent) and records the
/// resulting state at `step`.
pub fn step_lifecycle<S: AsRef<str>>(
    being: &AbstractBeing,
    population: &[S],
    updates: &BTreeMap<String, LifecycleUpdate>,
    step: u64,
    record: &mut LifecycleRecord,
) -> Result<AbstractBeing> {
    let mut next = being.clone();
    for (agent, rule) in updates {
        match rule {
            LifecycleUpdate::Identity => {}
            LifecycleUpdate::Scale(s) => {
                if !s.is_finite() {
                    return Err(Error::NonFinite("lifecycle scale"));
                }
                if let Some(v) = next.representations.get_mut(agent) {
                    *v *= *s;
                }
            }
            LifecycleUpdate::Replace(v) => {
                geometry::ensure_finite(v)?;
                next.representations.insert(agent.clone(), v.clone());
            }
        }
    }
    record.observe(&next, population, step);
    if next.birth_step.is_none() {
        next.birth_step = record.birth_step;
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{Valuation, ValueSpace};
    use crate::geometry::{matrix_from_rows, vector, Matrix};
    use crate::interpretation::InterpretationMap;
    use crate::network::Edge;

    fn agent(x: &[f64], g: &[f64]) -> Agent {
        Agent::new(
            "a",
            ValueSpace::anonymous(x.len()).unwrap(),
            Valuation::euclidean(),
            vector(x),
            vector(g),
        )
        .unwrap()
    }

    #[test]
    fn convex_goal_update_example() {
        let a = agent(&[0.4, 0.2, 0.5], &[0.5, 0.3, 0.6]);
        let x = vector(&[0.9, 0.7, 0.4]);
        let rule = GoalUpdateRule::ConvexBlend { alpha: 0.6 };
        let g = update_goal(&a, &x, &rule, 1).unwrap().goal_state;
        assert!((g - vector(&[0.74, 0.54, 0.48])).amax() < 1e-12);
        let same = update_goal(&a, &x, &GoalUpdateRule::ConvexBlend { alpha: 0.0 }, 1).unwrap();
        assert_eq!(same.goal_state, a.goal_state);
        let full = update_goal(&a, &x, &GoalUpdateRule::ConvexBlend { alpha: 1.0 }, 1).unwrap();
        assert_eq!(full.goal_state, x);
        assert!(matches!(update_goal(&a, &vector(&[1.0]), &rule, 1), Err(Error::DimensionMismatch { .. })));
        assert!(update_goal(&a, &x, &GoalUpdateRule::ConvexBlend { alpha: 1.5 }, 1).is_err());
    }

    #[test]
    fn one_step_cosine() {
        // x_A = g_new − m_new = (0.4, 0.2, 0.5)
        let a = agent(&[0.4, 0.2, 0.5], &[0.5, 0.3, 0.6]);
        let x = vector(&[0.9, 0.7, 0.4]);
        let cos = track_motivational_convergence(&a, std::slice::from_ref(&x), &x, &GoalUpdateRule::ConvexBlend { alpha: 0.6 })
            .unwrap();
        let m = vector(&[0.34, 0.34, -0.02]);
        let oracle = m.dot(&x) / (m.norm() * x.norm());
        assert!((cos[0] - oracle).abs() < 1e-12);
        assert!((cos[0] - 0.921_763).abs() < 1e-6);
    }

    #[test]
    fn additive_convergence_closed_form() {
        let a = agent(&[0.0, 0.0], &[0.3, -0.8]);
        let t = vector(&[0.6, 0.8]);
        let seq = vec![t.clone(); 1000];
        let rule = GoalUpdateRule::Additive(BetaSchedule::Linear { scale: 1.0 });
        let cos = track_motivational_convergence(&a, &seq, &t, &rule).unwrap();
        let m0 = vector(&[0.3, -0.8]);
        for (k, c) in cos.iter().enumerate() {
            let beta = (k + 1) as f64;
            let v = &t + &m0 / beta;
            let oracle = v.dot(&t) / (v.norm() * t.norm());
            assert!((c - oracle).abs() < 1e-12);
        }
        assert!(cos.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        assert!(cos[999] >= 0.999);

        let zero = agent(&[0.1, 0.1], &[0.1, 0.1]);
        let cos = track_motivational_convergence(&zero, &seq[..5], &t, &rule).unwrap();
        assert!(cos.iter().all(|c| (c - 1.0).abs() < 1e-15));
        assert_eq!(track_motivational_convergence(&zero, &seq[..1], &Vector::zeros(2), &rule), Err(Error::ZeroVector));
    }

    #[test]
    fn coordination_example() {
        let xl = vector(&[0.9, 0.6, 0.3]);
        let maps = [
            Matrix::identity(3, 3),
            Matrix::from_diagonal(&vector(&[0.95, 1.05, 1.0])),
            matrix_from_rows(&[vec![1.0, 0.05, 0.0], vec![-0.02, 0.98, 0.0], vec![0.0, 0.0, 1.01]]).unwrap(),
        ];
        let followers: Vec<(String, Vector)> =
            maps.iter().enumerate().map(|(i, m)| (format!("A{}", i + 1), m * &xl)).collect();
        let r = check_coordination(&followers, &xl, 0.1, 0.05).unwrap();
        assert!(r.coordinated);

        let same = check_coordination(&[("A".into(), xl.clone())], &xl, 1e-9, 1e-9).unwrap();
        assert!(same.coordinated);
        let zero = check_coordination(&[("A".into(), Vector::zeros(3))], &xl, 0.1, 0.05).unwrap();
        assert!(!zero.coordinated);
    }

    fn chain(nodes: &[&str], p: f64) -> InfluenceGraph {
        let edges = nodes
            .windows(2)
            .map(|w| Edge {
                from: w[0].into(),
                to: w[1].into(),
                p,
                map: InterpretationMap::identity(w[0], w[1], 1),
            })
            .collect();
        InfluenceGraph::new(nodes.iter().map(|s| s.to_string()).collect(), edges).unwrap()
    }

    fn scalar_oracle(a: f64, b: f64, leader: f64, alpha: f64, steps: usize) -> Vec<(f64, f64)> {
        // Chain L → A → B with certain edges: A moves at step 1, B from step 2.
        let mut out = vec![(a, b)];
        let (mut a, mut b) = (a, b);
        for k in 1..=steps {
            let a_prev = a;
            a = (1.0 - alpha) * a + alpha * leader;
            if k >= 2 {
                b = (1.0 - alpha) * b + alpha * a_prev;
            }
            out.push((a, b));
        }
        out
    }

    #[test]
    fn valuation_convergence_chain_example() {
        let g = chain(&["L", "A", "B"], 1.0);
        let init = BTreeMap::from([("A".to_string(), 0.2), ("B".to_string(), 0.5)]);
        let cfg = SimulationConfig { max_steps: 60, ..Default::default() };
        let r = run_valuation_convergence(&init, "L", 1.2, &g, &ValuationUpdateRule::new(0.5).unwrap(), &cfg).unwrap();
        assert!(r.hypothesis_holds);
        assert_eq!(r.violations(), 0);
        let oracle = scalar_oracle(0.2, 0.5, 1.2, 0.5, 60);
        for (row, (a, b)) in r.runs[0].table.iter().zip(oracle) {
            assert!((row["A"] - a).abs() < 1e-12 && (row["B"] - b).abs() < 1e-12);
        }
        let last = r.runs[0].table.last().unwrap();
        assert!((last["B"] - 1.2).abs() < 1e-9);
    }

    #[test]
    fn valuation_alpha_one_copies_source() {
        let g = chain(&["L", "A"], 1.0);
        let init = BTreeMap::from([("A".to_string(), 0.2)]);
        let cfg = SimulationConfig { max_steps: 1, ..Default::default() };
        let r = run_valuation_convergence(&init, "L", 1.2, &g, &ValuationUpdateRule::new(1.0).unwrap(), &cfg).unwrap();
        assert_eq!(r.runs[0].table[1]["A"], 1.2);
    }

    #[test]
    fn valuation_hypothesis_gate() {
        let g = chain(&["L", "A", "B"], 1.0);
        let init = BTreeMap::from([("A".to_string(), 0.2), ("B".to_string(), 1.5)]);
        let cfg = SimulationConfig { max_steps: 3, ..Default::default() };
        let r = run_valuation_convergence(&init, "L", 1.2, &g, &ValuationUpdateRule::new(0.5).unwrap(), &cfg).unwrap();
        assert!(!r.hypothesis_holds);
    }

    #[test]
    fn valuation_downstream_overshoot() {
        // B starts between A and the leader; A's lineage value pulls B back.
        let g = chain(&["L", "A", "B"], 1.0);
        let init = BTreeMap::from([("A".to_string(), 0.2), ("B".to_string(), 1.0)]);
        let cfg = SimulationConfig { max_steps: 4, ..Default::default() };
        let r = run_valuation_convergence(&init, "L", 1.2, &g, &ValuationUpdateRule::new(0.5).unwrap(), &cfg).unwrap();
        assert!(r.hypothesis_holds);
        assert!((r.runs[0].table[2]["B"] - 0.85).abs() < 1e-12);
        assert!(r.violations() > 0);
    }

    #[test]
    fn hull_leadership_example() {
        let tol = TolerancePolicy::default();
        let vs = vec![vector(&[1.0, 0.0, 0.0]), vector(&[0.0, 1.0, 0.0]), vector(&[0.0, 0.5, 1.0])];
        let r = convex_hull_leadership_check(&vs, &vector(&[0.6, 0.6, 1.0]), &tol).unwrap();
        assert_eq!(r.role, HullRole::Innovator);
        for v in &vs {
            assert_eq!(convex_hull_leadership_check(&vs, v, &tol).unwrap().role, HullRole::Interpolator);
        }
        let centroid = vs.iter().fold(Vector::zeros(3), |acc, v| acc + v) / 3.0;
        assert_eq!(convex_hull_leadership_check(&vs, &centroid, &tol).unwrap().role, HullRole::Interpolator);
    }

    #[test]
    fn lifecycle_examples() {
        let pop = ["a1", "a2"];
        let being = AbstractBeing::new("x").with_representation("a1", vector(&[1.0, 0.0]));
        let mut rec = LifecycleRecord::new(&being, 1e-6);
        rec.observe(&being, &pop, 0);
        assert_eq!(rec.birth_step, Some(0));

        let mut b = being.clone();
        let ident = BTreeMap::new();
        for s in 1..50 {
            b = step_lifecycle(&b, &pop, &ident, s, &mut rec).unwrap();
        }
        assert_eq!(rec.death_step, None);

        let decay = BTreeMap::from([("a1".to_string(), LifecycleUpdate::Scale(0.5))]);
        let mut rec = LifecycleRecord::new(&being, 1e-6);
        rec.observe(&being, &pop, 0);
        let mut b = being.clone();
        for s in 1..40 {
            b = step_lifecycle(&b, &pop, &decay, s, &mut rec).unwrap();
        }
        let oracle = (0..).find(|&k| 0.5f64.powi(k) <= 1e-6).unwrap() as u64;
        assert_eq!(rec.death_step, Some(oracle));
        let before = &rec.norms[(oracle - 1) as usize].1;
        assert!(before.values().any(|&n| n > 1e-6));

        let empty = AbstractBeing::new("y");
        let mut rec = LifecycleRecord::new(&empty, 1e-6);
        rec.observe(&empty, &pop, 0);
        let mut b = empty.clone();
        for s in 1..6 {
            let upd = if s == 3 {
                BTreeMap::from([("a2".to_string(), LifecycleUpdate::Replace(vector(&[0.0, 1.0])))])
            } else {
                BTreeMap::new()
            };
            b = step_lifecycle(&b, &pop, &upd, s, &mut rec).unwrap();
        }
        assert_eq!(rec.birth_step, Some(3));
        assert_eq!(b.birth_step, Some(3));
    }
}
