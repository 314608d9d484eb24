//! Analysis requests carried by a scenario and their execution.
//!
//! Every analysis reads the validated scenario and yields a JSON result
//! block, optional warnings, and optional per-step tables for CSV export.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agents::{belief_alignment, motivational_gradient, AbstractBeing};
use crate::applications::{
    classify_emotion, deviance_report, elect_leader, marketing_intervention, outgroup_contrast, EmotionInput,
    EmotionParams, GroupContext, PunishFn, RewardFn, DEFAULT_OUTGROUP_RATIO,
};
use crate::counterfactuals::{cost, displacement, find_preference_reversal, perspective_displacement, QuadraticCost};
use crate::dynamics::{
    check_coordination, convex_hull_leadership_check, run_valuation_convergence, step_lifecycle,
    track_motivational_convergence, update_goal, BetaSchedule, GoalUpdateRule, LifecycleRecord, LifecycleUpdate,
    ValuationUpdateRule,
};
use crate::error::{Error, Result};
use crate::geometry::{
    self, convex_hull_membership, cosine_similarity, matrix_from_rows, matrix_rows, null_space_basis, Matrix,
    Vector,
};
use crate::interpretation::{
    apply, check_consistency, compose_path, fit_interpretation_map, is_blind_to, persuasion_matrix,
    round_trip_bound, ForwardReference, InterpretationMap, PersuasionMode, RoundTripOutcome,
};
use crate::network::{
    activation_horizon, leadership_component, run_influence_process, verify_no_null_space_condition,
    SimulationConfig,
};
use crate::scenario::{Ctx, Scenario};

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_tol() -> f64 {
    1e-9
}
fn default_ratio() -> f64 {
    DEFAULT_OUTGROUP_RATIO
}
fn default_depth() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    Perspective(Perspective),
    Gradient(Gradient),
    Alignment(Alignment),
    Consistency(Consistency),
    MutualUnderstanding(MutualUnderstanding),
    NullSpace(NullSpace),
    Propagation(Propagation),
    Leadership(Leadership),
    Coherence(Coherence),
    GoalUpdate(GoalUpdate),
    MotivationalConvergence(MotivationalConvergence),
    Coordination(Coordination),
    Persuasion(Persuasion),
    MapFit(MapFit),
    ConvexHull(ConvexHull),
    Lifecycle(Lifecycle),
    Counterfactual(Counterfactual),
    ValuationConvergence(ValuationConvergence),
    SocialIdentity(SocialIdentity),
    Marketing(Marketing),
    Emotion(Emotion),
}

/// A being's representation at `source`, seen through `source → target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perspective {
    pub being: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gradient {
    pub agent: String,
}

/// `b · M` for the being held by `holder` (default: the agent itself).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alignment {
    pub agent: String,
    pub being: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
}

/// Consistency of one transmission `source → target`. With `via`, both
/// sides interpret the being held by `via` and the `source → target` map is
/// fitted from the two images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Consistency {
    pub being: String,
    pub source: String,
    pub target: String,
    pub eps: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutualUnderstanding {
    pub being: String,
    pub concept: String,
    pub agents: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullSpace {
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub being: Option<String>,
}

/// Runs the influence process; being and origin default to `[simulation]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Propagation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub being: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Leadership {
    pub leader: String,
    pub being: String,
    /// Agents after the leader along one path; reports the composite image.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    /// Cross-check the component with Monte Carlo adoption.
    #[serde(default)]
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coherence {
    pub being: String,
    pub source: String,
    pub target: String,
    pub eps: f64,
    #[serde(default = "one")]
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaDoc {
    Linear { scale: f64 },
    Constant { value: f64 },
    Power { scale: f64, exponent: f64 },
}

impl BetaDoc {
    pub fn schedule(&self) -> BetaSchedule {
        match *self {
            BetaDoc::Linear { scale } => BetaSchedule::Linear { scale },
            BetaDoc::Constant { value } => BetaSchedule::Constant(value),
            BetaDoc::Power { scale, exponent } => BetaSchedule::Power { scale, exponent },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalRuleDoc {
    Convex { alpha: f64 },
    Additive { beta: BetaDoc },
}

impl GoalRuleDoc {
    pub fn rule(&self) -> GoalUpdateRule {
        match self {
            GoalRuleDoc::Convex { alpha } => GoalUpdateRule::ConvexBlend { alpha: *alpha },
            GoalRuleDoc::Additive { beta } => GoalUpdateRule::Additive(beta.schedule()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalUpdate {
    pub agent: String,
    pub being: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
    pub rule: GoalRuleDoc,
    #[serde(default = "one")]
    pub step: usize,
}

/// Repeated adoption of the same belief under the additive goal rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotivationalConvergence {
    pub agent: String,
    pub being: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder: Option<String>,
    pub steps: usize,
    pub beta: BetaDoc,
}

/// Followers' vectors are the leader's belief pushed through each
/// `leader → follower` map, or the followers' own representations when
/// `use_maps = false`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordination {
    pub leader: String,
    pub being: String,
    pub followers: Vec<String>,
    pub eps: f64,
    pub delta: f64,
    #[serde(default = "yes")]
    pub use_maps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Persuasion {
    pub leader: String,
    pub follower: String,
    pub being: String,
    /// Defaults to the leader's own valuation of the belief.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    /// A hand-picked matrix to evaluate alongside the solved one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFit {
    pub source: String,
    pub target: String,
    pub beings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexHull {
    pub being: String,
    pub group: Vec<String>,
    pub leader: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LifecycleRuleDoc {
    Identity,
    Scale { factor: f64 },
    /// Replace the representation at one step.
    Replace { step: u64, vector: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lifecycle {
    pub being: String,
    pub steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Defaults to every agent in the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<Vec<String>>,
    #[serde(default)]
    pub updates: BTreeMap<String, LifecycleRuleDoc>,
}

/// `c` is agent i's current state; the hypothetical defaults to its goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counterfactual {
    pub agent_i: String,
    pub agent_j: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothetical: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValuationConvergence {
    pub leader: String,
    pub leader_value: f64,
    pub initial: BTreeMap<String, f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrototypeDoc {
    Vector(Vec<f64>),
    /// `"leader"` or a candidate id: that stance projected into group space.
    Named(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    #[default]
    Exp,
    Reciprocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PunishKind {
    #[default]
    Linear,
    Quadratic,
}

/// Stances are read from `stance` (a being) at each candidate and member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialIdentity {
    pub stance: String,
    pub followers: Vec<String>,
    pub candidates: Vec<String>,
    pub group: String,
    #[serde(default)]
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prototype: Option<PrototypeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_leader: Option<String>,
    #[serde(default = "default_ratio")]
    pub ratio_threshold: f64,
    #[serde(default)]
    pub reward: RewardKind,
    #[serde(default)]
    pub punish: PunishKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Marketing {
    pub agent: String,
    pub label: String,
    pub weight: f64,
    pub eta: f64,
    pub product: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emotion {
    pub agent: String,
    pub actions: Vec<Vec<Vec<f64>>>,
    pub acceptance_axis: Vec<f64>,
    #[serde(default = "default_depth")]
    pub search_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activation_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

/// A per-step table exported as CSV next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOutput {
    pub result: Value,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
}

impl AnalysisOutput {
    fn plain(result: Value) -> Self {
        Self {
            result,
            warnings: Vec::new(),
            tables: Vec::new(),
        }
    }
}

fn v(x: &Vector) -> Vec<f64> {
    x.as_slice().to_vec()
}

fn vecs(xs: &[Vector]) -> Vec<Vec<f64>> {
    xs.iter().map(v).collect()
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("analysis results serialize")
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::Perspective(_) => "perspective",
            Analysis::Gradient(_) => "gradient",
            Analysis::Alignment(_) => "alignment",
            Analysis::Consistency(_) => "consistency",
            Analysis::MutualUnderstanding(_) => "mutual_understanding",
            Analysis::NullSpace(_) => "null_space",
            Analysis::Propagation(_) => "propagation",
            Analysis::Leadership(_) => "leadership",
            Analysis::Coherence(_) => "coherence",
            Analysis::GoalUpdate(_) => "goal_update",
            Analysis::MotivationalConvergence(_) => "motivational_convergence",
            Analysis::Coordination(_) => "coordination",
            Analysis::Persuasion(_) => "persuasion",
            Analysis::MapFit(_) => "map_fit",
            Analysis::ConvexHull(_) => "convex_hull",
            Analysis::Lifecycle(_) => "lifecycle",
            Analysis::Counterfactual(_) => "counterfactual",
            Analysis::ValuationConvergence(_) => "valuation_convergence",
            Analysis::SocialIdentity(_) => "social_identity",
            Analysis::Marketing(_) => "marketing",
            Analysis::Emotion(_) => "emotion",
        }
    }

    /// Static checks: references resolve and dimensions agree.
    pub(crate) fn check(&self, ctx: &mut Ctx) {
        match self {
            Analysis::Perspective(p) => {
                ctx.agent("target", &p.target);
                ctx.held("being", &p.being, &p.source);
                ctx.map("target", &p.source, &p.target);
            }
            Analysis::Gradient(p) => {
                ctx.agent("agent", &p.agent);
            }
            Analysis::Alignment(p) => {
                ctx.agent("agent", &p.agent);
                ctx.held("being", &p.being, p.holder.as_deref().unwrap_or(&p.agent));
            }
            Analysis::Consistency(p) => {
                ctx.agent("source", &p.source);
                ctx.agent("target", &p.target);
                ctx.nonnegative("eps", p.eps);
                ctx.nonnegative("delta", p.delta);
                match &p.via {
                    Some(c) => {
                        ctx.held("being", &p.being, c);
                        ctx.map("via", c, &p.source);
                        ctx.map("via", c, &p.target);
                    }
                    None => {
                        ctx.held("being", &p.being, &p.source);
                        ctx.map("target", &p.source, &p.target);
                    }
                }
            }
            Analysis::MutualUnderstanding(p) => {
                ctx.held("being", &p.being, &p.concept);
                for a in &p.agents {
                    ctx.map("agents", &p.concept, a);
                }
                let d0 = ctx.agent("agents", &p.agents[0]);
                let d1 = ctx.agent("agents", &p.agents[1]);
                if let (Some(a), Some(b)) = (d0, d1) {
                    if a != b {
                        ctx.err("agents", format!("cosine needs equal dimensions, got {a} and {b}"));
                    }
                }
            }
            Analysis::NullSpace(p) => {
                let d = ctx.agent("source", &p.source);
                ctx.agent("target", &p.target);
                ctx.map("target", &p.source, &p.target);
                for probe in &p.probes {
                    ctx.dim("probes", probe, d);
                }
                if let Some(b) = &p.being {
                    ctx.held("being", b, &p.source);
                }
            }
            Analysis::Propagation(p) => {
                ctx.graph("");
                ctx.simulation("");
                match &p.being {
                    Some(b) => {
                        ctx.being("being", b);
                    }
                    None if !ctx.simulation_has_being() => ctx.err("being", "no being given here or in [simulation]"),
                    None => {}
                }
                match &p.origin {
                    Some(o) => ctx.node("origin", o),
                    None if !ctx.simulation_has_origin() => {
                        ctx.err("origin", "no origin given here or in [simulation]")
                    }
                    None => {}
                }
            }
            Analysis::Leadership(p) => {
                ctx.graph("");
                ctx.node("leader", &p.leader);
                ctx.held("being", &p.being, &p.leader);
                if let Some(path) = &p.path {
                    let mut prev = p.leader.as_str();
                    for next in path {
                        ctx.map("path", prev, next);
                        prev = next;
                    }
                }
            }
            Analysis::Coherence(p) => {
                let s = ctx.agent("source", &p.source);
                let t = ctx.agent("target", &p.target);
                if let (Some(s), Some(t)) = (s, t) {
                    if s != t {
                        ctx.err("target", format!("round trips need equal dimensions, got {s} and {t}"));
                    }
                }
                ctx.held("being", &p.being, &p.source);
                ctx.map("target", &p.source, &p.target);
                ctx.map("source", &p.target, &p.source);
                ctx.nonnegative("eps", p.eps);
                if p.k == 0 {
                    ctx.err("k", "k must be positive");
                }
            }
            Analysis::GoalUpdate(p) => {
                ctx.agent("agent", &p.agent);
                ctx.held("being", &p.being, p.holder.as_deref().unwrap_or(&p.agent));
                if let Err(e) = p.rule.rule().validate() {
                    ctx.err("rule", e.to_string());
                }
            }
            Analysis::MotivationalConvergence(p) => {
                ctx.agent("agent", &p.agent);
                ctx.held("being", &p.being, p.holder.as_deref().unwrap_or(&p.agent));
                if let Err(e) = p.beta.schedule().validate() {
                    ctx.err("beta", e.to_string());
                }
                if p.steps == 0 {
                    ctx.err("steps", "steps must be positive");
                }
            }
            Analysis::Coordination(p) => {
                let d = ctx.agent("leader", &p.leader);
                ctx.held("being", &p.being, &p.leader);
                for f in &p.followers {
                    let fd = ctx.agent("followers", f);
                    if p.use_maps {
                        ctx.map("followers", &p.leader, f);
                    } else {
                        ctx.held("followers", &p.being, f);
                    }
                    if let (Some(a), Some(b)) = (d, fd) {
                        if a != b {
                            ctx.err("followers", format!("`{f}` has dim {b}, leader has {a}"));
                        }
                    }
                }
                if p.followers.is_empty() {
                    ctx.err("followers", "no followers");
                }
                ctx.positive("eps", p.eps);
                ctx.positive("delta", p.delta);
            }
            Analysis::Persuasion(p) => {
                ctx.agent("leader", &p.leader);
                let d = ctx.agent("follower", &p.follower);
                ctx.held("being", &p.being, &p.leader);
                ctx.map("follower", &p.leader, &p.follower);
                if let Some(t) = p.target_value {
                    ctx.nonnegative("target_value", t);
                }
                if let Some(w) = &p.profile {
                    ctx.dim("profile", w, d);
                }
                if let Some(c) = &p.candidate {
                    match matrix_from_rows(c) {
                        Ok(m) if d.is_some_and(|d| m.nrows() != d || m.ncols() != d) => {
                            ctx.err("candidate", format!("candidate must be {0}x{0}", d.unwrap_or(0)))
                        }
                        Ok(_) => {}
                        Err(e) => ctx.err("candidate", e.to_string()),
                    }
                }
            }
            Analysis::MapFit(p) => {
                ctx.agent("source", &p.source);
                ctx.agent("target", &p.target);
                if p.beings.is_empty() {
                    ctx.err("beings", "no training pairs");
                }
                for b in &p.beings {
                    ctx.held("beings", b, &p.source);
                    ctx.held("beings", b, &p.target);
                }
            }
            Analysis::ConvexHull(p) => {
                ctx.held("being", &p.being, &p.leader);
                if p.group.is_empty() {
                    ctx.err("group", "empty group");
                }
                for g in &p.group {
                    ctx.held("group", &p.being, g);
                }
            }
            Analysis::Lifecycle(p) => {
                ctx.being("being", &p.being);
                if let Some(pop) = &p.population {
                    ctx.agents("population", pop);
                }
                for (agent, rule) in &p.updates {
                    let d = ctx.agent("updates", agent);
                    if let LifecycleRuleDoc::Replace { vector, .. } = rule {
                        ctx.dim("updates", vector, d);
                    }
                }
                if let Some(t) = p.threshold {
                    ctx.nonnegative("threshold", t);
                }
            }
            Analysis::Counterfactual(p) => {
                let d = ctx.agent("agent_i", &p.agent_i);
                ctx.agent("agent_j", &p.agent_j);
                ctx.map("agent_j", &p.agent_i, &p.agent_j);
                if let Some(h) = &p.hypothetical {
                    ctx.dim("hypothetical", h, d);
                }
                ctx.nonnegative("tol", p.tol);
            }
            Analysis::ValuationConvergence(p) => {
                ctx.graph("");
                ctx.node("leader", &p.leader);
                for id in p.initial.keys() {
                    ctx.node("initial", id);
                }
                if !(p.alpha > 0.0 && p.alpha <= 1.0) {
                    ctx.err("alpha", format!("alpha must lie in (0, 1], got {}", p.alpha));
                }
            }
            Analysis::SocialIdentity(p) => {
                ctx.being("stance", &p.stance);
                ctx.agent("group", &p.group);
                ctx.agents("followers", &p.followers);
                if p.candidates.is_empty() {
                    ctx.err("candidates", "no candidates");
                }
                if p.followers.is_empty() {
                    ctx.err("followers", "no followers");
                }
                for c in &p.candidates {
                    ctx.held("candidates", &p.stance, c);
                    for f in &p.followers {
                        ctx.map("candidates", c, f);
                    }
                    ctx.map("candidates", c, &p.group);
                }
                for m in &p.members {
                    ctx.held("members", &p.stance, m);
                    ctx.map("members", m, &p.group);
                    for f in &p.followers {
                        ctx.map("members", m, f);
                    }
                }
                match &p.prototype {
                    None => ctx.err("prototype", "missing prototype specification"),
                    Some(PrototypeDoc::Named(n)) if n != "leader" && !p.candidates.contains(n) => {
                        ctx.err("prototype", format!("`{n}` is neither `leader` nor a candidate"))
                    }
                    Some(PrototypeDoc::Vector(x)) => {
                        let d = ctx.agent("group", &p.group);
                        ctx.dim("prototype", x, d);
                    }
                    Some(PrototypeDoc::Named(_)) => {}
                }
                if let Some(o) = &p.out_leader {
                    ctx.held("out_leader", &p.stance, o);
                    for f in &p.followers {
                        ctx.map("out_leader", o, f);
                    }
                }
                ctx.positive("ratio_threshold", p.ratio_threshold);
            }
            Analysis::Marketing(p) => {
                let d = ctx.agent("agent", &p.agent);
                ctx.dim("product", &p.product, d.map(|d| d + 1));
                ctx.nonnegative("weight", p.weight);
                ctx.nonnegative("eta", p.eta);
            }
            Analysis::Emotion(p) => {
                let d = ctx.agent("agent", &p.agent);
                ctx.dim("acceptance_axis", &p.acceptance_axis, d);
                for a in &p.actions {
                    match matrix_from_rows(a) {
                        Ok(m) if d.is_some_and(|d| m.nrows() != d || m.ncols() != d) => {
                            ctx.err("actions", format!("actions must be {0}x{0}", d.unwrap_or(0)))
                        }
                        Ok(_) => {}
                        Err(e) => ctx.err("actions", e.to_string()),
                    }
                }
            }
        }
    }

    /// Executes the analysis. `seed` overrides the scenario's seed.
    pub fn run(&self, sc: &Scenario, seed: Option<u64>) -> Result<AnalysisOutput> {
        match self {
            Analysis::Perspective(p) => perspective(sc, p),
            Analysis::Gradient(p) => {
                let a = sc.agent(&p.agent)?;
                let m = motivational_gradient(a);
                Ok(AnalysisOutput::plain(json!({ "gradient": v(&m), "norm": m.norm() })))
            }
            Analysis::Alignment(p) => {
                let a = sc.agent(&p.agent)?;
                let b = sc.representation(&p.being, p.holder.as_deref().unwrap_or(&p.agent))?;
                let m = motivational_gradient(a);
                Ok(AnalysisOutput::plain(json!({
                    "belief": v(&b),
                    "gradient": v(&m),
                    "alignment": belief_alignment(&b, &m)?,
                })))
            }
            Analysis::Consistency(p) => consistency(sc, p),
            Analysis::MutualUnderstanding(p) => {
                let x = sc.representation(&p.being, &p.concept)?;
                let a = apply(&sc.map(&p.concept, &p.agents[0])?, &x)?;
                let b = apply(&sc.map(&p.concept, &p.agents[1])?, &x)?;
                Ok(AnalysisOutput::plain(json!({
                    "images": { &p.agents[0]: v(&a), &p.agents[1]: v(&b) },
                    "cosine": cosine_similarity(&a, &b)?,
                })))
            }
            Analysis::NullSpace(p) => null_space(sc, p),
            Analysis::Propagation(p) => propagation(sc, p, seed),
            Analysis::Leadership(p) => leadership(sc, p, seed),
            Analysis::Coherence(p) => coherence(sc, p),
            Analysis::GoalUpdate(p) => goal_update(sc, p),
            Analysis::MotivationalConvergence(p) => motivational(sc, p),
            Analysis::Coordination(p) => {
                let x = sc.representation(&p.being, &p.leader)?;
                let followers = p
                    .followers
                    .iter()
                    .map(|f| {
                        let y = if p.use_maps {
                            apply(&sc.map(&p.leader, f)?, &x)?
                        } else {
                            sc.representation(&p.being, f)?
                        };
                        Ok((f.clone(), y))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let report = check_coordination(&followers, &x, p.eps, p.delta)?;
                let mut out = AnalysisOutput::plain(json!({
                    "leader_norm": x.norm(),
                    "vectors": followers.iter().map(|(id, y)| (id.clone(), v(y))).collect::<BTreeMap<_, _>>(),
                    "report": to_value(&report),
                    "verdict": if report.coordinated { "COORDINATED" } else { "NOT_COORDINATED" },
                }));
                if !report.coordinated {
                    out.warnings.push("followers are not coordinated".into());
                }
                Ok(out)
            }
            Analysis::Persuasion(p) => persuasion(sc, p),
            Analysis::MapFit(p) => {
                let pairs = p
                    .beings
                    .iter()
                    .map(|b| Ok((sc.representation(b, &p.source)?, sc.representation(b, &p.target)?)))
                    .collect::<Result<Vec<_>>>()?;
                let fitted = fit_interpretation_map(&pairs, p.source.clone(), p.target.clone())?;
                let residuals = pairs
                    .iter()
                    .map(|(x, y)| Ok((apply(&fitted, x)? - y).norm()))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(AnalysisOutput::plain(json!({
                    "matrix": matrix_rows(&fitted.matrix),
                    "residuals": residuals,
                    "max_residual": residuals.iter().copied().fold(0.0, f64::max),
                })))
            }
            Analysis::ConvexHull(p) => {
                let group = p
                    .group
                    .iter()
                    .map(|g| sc.representation(&p.being, g))
                    .collect::<Result<Vec<_>>>()?;
                let x = sc.representation(&p.being, &p.leader)?;
                let lead = convex_hull_leadership_check(&group, &x, &sc.tolerance)?;
                let members = p
                    .group
                    .iter()
                    .zip(&group)
                    .map(|(id, g)| Ok((id.clone(), to_value(&convex_hull_membership(g, &group, &sc.tolerance)?))))
                    .collect::<Result<BTreeMap<_, _>>>()?;
                Ok(AnalysisOutput::plain(json!({
                    "leader": to_value(&lead),
                    "members": members,
                })))
            }
            Analysis::Lifecycle(p) => lifecycle(sc, p),
            Analysis::Counterfactual(p) => counterfactual(sc, p),
            Analysis::ValuationConvergence(p) => valuation_convergence(sc, p, seed),
            Analysis::SocialIdentity(p) => social_identity(sc, p),
            Analysis::Marketing(p) => {
                let a = sc.agent(&p.agent)?;
                let o = marketing_intervention(a, &p.label, p.weight, p.eta, &Vector::from_column_slice(&p.product))?;
                Ok(AnalysisOutput::plain(json!({
                    "labels": o.agent.space.labels(),
                    "goal": v(&o.agent.goal_state),
                    "valuation_before": o.valuation_before,
                    "valuation_after": o.valuation_after,
                    "gradient_before": v(&o.gradient_before),
                    "gradient_after": v(&o.gradient_after),
                    "cosine_before": o.cosine_before,
                    "cosine_after": o.cosine_after,
                })))
            }
            Analysis::Emotion(p) => {
                let a = sc.agent(&p.agent)?;
                let actions = p.actions.iter().map(|m| matrix_from_rows(m)).collect::<Result<Vec<_>>>()?;
                let defaults = EmotionParams::default();
                let params = EmotionParams {
                    activation_fraction: p.activation_fraction.unwrap_or(defaults.activation_fraction),
                    gamma: p.gamma.unwrap_or(defaults.gamma),
                    beta: p.beta.unwrap_or(defaults.beta),
                };
                let input = EmotionInput {
                    x: a.current_state.clone(),
                    g: a.goal_state.clone(),
                    actions,
                    acceptance_axis: Vector::from_column_slice(&p.acceptance_axis),
                    search_depth: p.search_depth,
                };
                Ok(AnalysisOutput::plain(to_value(&classify_emotion(&input, &params, p.tol)?)))
            }
        }
    }
}

fn perspective(sc: &Scenario, p: &Perspective) -> Result<AnalysisOutput> {
    let x = sc.representation(&p.being, &p.source)?;
    let image = apply(&sc.map(&p.source, &p.target)?, &x)?;
    Ok(AnalysisOutput::plain(json!({
        "source_vector": v(&x),
        "image": v(&image),
        "image_norm": image.norm(),
        "source_valuation": sc.agent(&p.source)?.valuation.evaluate(&x)?,
        "target_valuation": sc.agent(&p.target)?.valuation.evaluate(&image)?,
    })))
}

fn consistency(sc: &Scenario, p: &Consistency) -> Result<AnalysisOutput> {
    let a = sc.agent(&p.source)?;
    let b = sc.agent(&p.target)?;
    let (x, map_ab, observed, fitted) = match &p.via {
        Some(c) => {
            let xc = sc.representation(&p.being, c)?;
            let xa = apply(&sc.map(c, &p.source)?, &xc)?;
            let xb = apply(&sc.map(c, &p.target)?, &xc)?;
            let m = fit_interpretation_map(&[(xa.clone(), xb.clone())], p.source.clone(), p.target.clone())?;
            (xa, m, Some(xb), true)
        }
        None => {
            let x = sc.representation(&p.being, &p.source)?;
            let observed = sc
                .being(&p.being)?
                .held_by(&p.target, &sc.tolerance)
                .cloned();
            (x, sc.map(&p.source, &p.target)?, observed, false)
        }
    };
    let map_ba = match sc.declared_map(&p.target, &p.source) {
        Some(m) => m.clone(),
        None => InterpretationMap::new(
            p.target.clone(),
            p.source.clone(),
            geometry::pseudo_inverse(&map_ab.matrix, &sc.tolerance),
        ),
    };
    let reference = match &observed {
        Some(o) => ForwardReference::Observed(o),
        None if a.dim() == b.dim() => ForwardReference::SameSpace,
        None => {
            return Err(Error::InvalidParameter(
                "forward check needs equal dimensions or an observed target representation".into(),
            ))
        }
    };
    let report = check_consistency(&map_ab, &map_ba, &x, p.eps, p.delta, &a.valuation, &b.valuation, reference)?;
    let received = observed.clone().map_or_else(|| apply(&map_ab, &x), Ok)?;
    let mut out = AnalysisOutput::plain(json!({
        "source_vector": v(&x),
        "received": v(&received),
        "source_valuation": a.valuation.evaluate(&x)?,
        "target_valuation": b.valuation.evaluate(&received)?,
        "map": matrix_rows(&map_ab.matrix),
        "map_fitted": fitted,
        "report": to_value(&report),
    }));
    if !(report.forward_ok && report.backward_ok && report.valuation_ok) {
        out.warnings.push(format!("transmission {} -> {} is not consistent", p.source, p.target));
    }
    Ok(out)
}

fn null_space(sc: &Scenario, p: &NullSpace) -> Result<AnalysisOutput> {
    let map = sc.map(&p.source, &p.target)?;
    let mut probes: Vec<(String, Vector)> = p
        .probes
        .iter()
        .enumerate()
        .map(|(i, x)| (format!("probe_{i}"), Vector::from_column_slice(x)))
        .collect();
    if let Some(b) = &p.being {
        probes.push((b.clone(), sc.representation(b, &p.source)?));
    }
    let mut results = BTreeMap::new();
    for (label, x) in &probes {
        let image = apply(&map, x)?;
        results.insert(
            label.clone(),
            json!({
                "vector": v(x),
                "image": v(&image),
                "image_norm": image.norm(),
                "blind": is_blind_to(&map, x, &sc.tolerance)?,
            }),
        );
    }
    Ok(AnalysisOutput::plain(json!({
        "rank": geometry::rank(&map.matrix, &sc.tolerance),
        "null_basis": vecs(&null_space_basis(&map.matrix, &sc.tolerance)),
        "probes": results,
    })))
}

fn propagation_inputs<'a>(
    sc: &'a Scenario,
    being: Option<&'a str>,
    origin: Option<&'a str>,
) -> Result<(&'a AbstractBeing, &'a str)> {
    let sim = sc.simulation.as_ref();
    let being = being
        .or_else(|| sim.and_then(|s| s.being.as_deref()))
        .ok_or_else(|| Error::InvalidParameter("no being to propagate".into()))?;
    let origin = origin
        .or_else(|| sim.and_then(|s| s.origin.as_deref()))
        .ok_or(Error::UnknownOrigin(String::new()))?;
    Ok((sc.being(being)?, origin))
}

fn propagation(sc: &Scenario, p: &Propagation, seed: Option<u64>) -> Result<AnalysisOutput> {
    let graph = sc.graph()?;
    let (being, origin) = propagation_inputs(sc, p.being.as_deref(), p.origin.as_deref())?;
    let cfg = sc.sim_config(seed);
    let traces = run_influence_process(graph, being, origin, &cfg)?;
    Ok(AnalysisOutput::plain(propagation_summary(&traces, graph.nodes(), &cfg)))
}

/// Adoption frequencies and the first replicate's final state.
pub fn propagation_summary(
    traces: &[crate::network::SimulationTrace],
    nodes: &[String],
    cfg: &SimulationConfig,
) -> Value {
    let mut freq = BTreeMap::new();
    for n in nodes {
        let hits = traces.iter().filter(|t| t.final_representations.contains_key(n)).count();
        freq.insert(n.clone(), hits as f64 / traces.len().max(1) as f64);
    }
    let first = traces.first();
    json!({
        "seed": cfg.seed,
        "replicates": cfg.replicates,
        "max_steps": cfg.max_steps,
        "adoption_threshold": cfg.adoption_threshold,
        "adoption_frequency": freq,
        "final_representations": first.map(|t| {
            t.final_representations.iter().map(|(k, x)| (k.clone(), v(x))).collect::<BTreeMap<_, _>>()
        }),
        "adoption_step": first.map(|t| t.adoption_step.clone()),
        "steps_run": first.map(|t| t.steps_run),
    })
}

fn leadership(sc: &Scenario, p: &Leadership, seed: Option<u64>) -> Result<AnalysisOutput> {
    let graph = sc.graph()?;
    let x = sc.representation(&p.being, &p.leader)?;
    let comp = leadership_component(graph, &p.leader, &x, &sc.tolerance)?;
    let membership: BTreeMap<String, &str> = graph
        .nodes()
        .iter()
        .filter(|n| **n != p.leader)
        .map(|n| {
            let verdict = if comp.members.contains(n) { "IN_COMPONENT" } else { "NOT_IN_COMPONENT" };
            (n.clone(), verdict)
        })
        .collect();
    let mut out = AnalysisOutput::plain(json!({
        "leader_vector": v(&x),
        "component": to_value(&comp),
        "membership": membership,
    }));
    if let Some(path) = &p.path {
        let mut maps = Vec::new();
        let mut prev = p.leader.as_str();
        for next in path {
            maps.push(sc.map(prev, next)?);
            prev = next;
        }
        let composite = compose_path(&maps)?;
        let image = apply(&composite, &x)?;
        out.result["path"] = json!({
            "agents": path,
            "composite": matrix_rows(&composite.matrix),
            "image": v(&image),
            "image_norm": image.norm(),
            "blind": is_blind_to(&composite, &x, &sc.tolerance)?,
        });
    }
    if p.verify {
        let cfg = sc.sim_config(seed);
        let report = verify_no_null_space_condition(graph, &p.leader, &x, &cfg, &sc.tolerance)?;
        if report.violations() > 0 {
            out.warnings
                .push(format!("{} non-member agent(s) adopted the leader's belief", report.violations()));
        }
        // First successful reception per agent in replicate 0.
        let run_cfg = SimulationConfig {
            max_steps: cfg.max_steps.max(activation_horizon(graph, 1e-6)),
            replicates: 1,
            ..cfg
        };
        let being = AbstractBeing::new(p.being.clone()).with_representation(p.leader.clone(), x.clone());
        let trace = run_influence_process(graph, &being, &p.leader, &run_cfg)?.remove(0);
        let mut received = BTreeMap::new();
        for e in trace.events.iter().filter(|e| e.success) {
            if received.contains_key(&e.to) {
                continue;
            }
            let val = sc.agent(&e.to)?.valuation.evaluate(&e.transmitted)?;
            received.insert(
                e.to.clone(),
                json!({
                    "from": e.from,
                    "step": e.step,
                    "vector": v(&e.transmitted),
                    "norm": e.transmitted.norm(),
                    "valuation": val,
                    "adopted": e.adopted,
                }),
            );
        }
        out.result["verification"] = to_value(&report);
        out.result["received"] = json!(received);
    }
    Ok(out)
}

fn coherence(sc: &Scenario, p: &Coherence) -> Result<AnalysisOutput> {
    let x = sc.representation(&p.being, &p.source)?;
    let ab = sc.map(&p.source, &p.target)?;
    let ba = sc.map(&p.target, &p.source)?;
    let outcome = round_trip_bound(&ab, &ba, &x, p.eps, p.k)?;
    let mut out = AnalysisOutput::plain(to_value(&outcome));
    match &outcome {
        RoundTripOutcome::NotApplicable { step, reason } => {
            out.warnings.push(format!("NOT_APPLICABLE at step {step}: {reason}"));
        }
        RoundTripOutcome::Applicable(rt) if !rt.holds => {
            out.warnings.push("round-trip bound violated".into());
        }
        RoundTripOutcome::Applicable(_) => {}
    }
    Ok(out)
}

fn goal_update(sc: &Scenario, p: &GoalUpdate) -> Result<AnalysisOutput> {
    let a = sc.agent(&p.agent)?;
    let x = sc.representation(&p.being, p.holder.as_deref().unwrap_or(&p.agent))?;
    let updated = update_goal(a, &x, &p.rule.rule(), p.step as u64)?;
    let before = motivational_gradient(a);
    let after = motivational_gradient(&updated);
    Ok(AnalysisOutput::plain(json!({
        "adopted": v(&x),
        "goal_before": v(&a.goal_state),
        "goal_after": v(&updated.goal_state),
        "gradient_before": v(&before),
        "gradient_after": v(&after),
        "cosine_before": cosine_similarity(&before, &x).ok(),
        "cosine_after": cosine_similarity(&after, &x).ok(),
    })))
}

fn motivational(sc: &Scenario, p: &MotivationalConvergence) -> Result<AnalysisOutput> {
    let a = sc.agent(&p.agent)?;
    let x = sc.representation(&p.being, p.holder.as_deref().unwrap_or(&p.agent))?;
    let seq = vec![x.clone(); p.steps];
    let cosines = track_motivational_convergence(a, &seq, &x, &GoalUpdateRule::Additive(p.beta.schedule()))?;
    let table = Table {
        name: "cosine".into(),
        header: vec!["step".into(), "cosine".into()],
        rows: cosines.iter().enumerate().map(|(i, c)| vec![(i + 1) as f64, *c]).collect(),
    };
    Ok(AnalysisOutput {
        result: json!({
            "steps": p.steps,
            "initial_cosine": cosine_similarity(&motivational_gradient(a), &x).ok(),
            "final_cosine": cosines.last(),
            "diverging_beta": p.beta.schedule().diverges(),
        }),
        warnings: Vec::new(),
        tables: vec![table],
    })
}

fn persuasion(sc: &Scenario, p: &Persuasion) -> Result<AnalysisOutput> {
    let x = sc.representation(&p.being, &p.leader)?;
    let map = sc.map(&p.leader, &p.follower)?;
    let follower = sc.agent(&p.follower)?;
    let val = &follower.valuation;
    let target = match p.target_value {
        Some(t) => t,
        None => sc.agent(&p.leader)?.valuation.evaluate(&x)?,
    };
    let mode = match &p.profile {
        Some(w) => PersuasionMode::Diagonal(Vector::from_column_slice(w)),
        None => PersuasionMode::Scalar,
    };
    let image = apply(&map, &x)?;
    let m = persuasion_matrix(&map, &x, target, val, &mode)?;
    let achieved = val.evaluate(&(&m * &image))?;
    let mut result = json!({
        "target_value": target,
        "image": v(&image),
        "image_value": val.evaluate(&image)?,
        "matrix": matrix_rows(&m),
        "achieved_value": achieved,
        "residual": (achieved - target).abs(),
    });
    if let Some(rows) = &p.candidate {
        let c: Matrix = matrix_from_rows(rows)?;
        let y = &c * &image;
        let cv = val.evaluate(&y)?;
        result["candidate"] = json!({
            "image": v(&y),
            "value": cv,
            "gap": (cv - target).abs(),
        });
    }
    Ok(AnalysisOutput::plain(result))
}

fn lifecycle(sc: &Scenario, p: &Lifecycle) -> Result<AnalysisOutput> {
    let mut being = sc.being(&p.being)?.clone();
    let population: Vec<String> = match &p.population {
        Some(pop) => pop.clone(),
        None => sc.agents.iter().map(|a| a.id.clone()).collect(),
    };
    let threshold = p.threshold.unwrap_or_else(|| sc.tolerance.zero_threshold());
    let mut record = LifecycleRecord::new(&being, threshold);
    record.observe(&being, &population, 0);
    if being.birth_step.is_none() {
        being.birth_step = record.birth_step;
    }
    for step in 1..=p.steps {
        let updates: BTreeMap<String, LifecycleUpdate> = p
            .updates
            .iter()
            .map(|(agent, rule)| {
                let u = match rule {
                    LifecycleRuleDoc::Identity => LifecycleUpdate::Identity,
                    LifecycleRuleDoc::Scale { factor } => LifecycleUpdate::Scale(*factor),
                    LifecycleRuleDoc::Replace { step: at, vector } if *at == step => {
                        LifecycleUpdate::Replace(Vector::from_column_slice(vector))
                    }
                    LifecycleRuleDoc::Replace { .. } => LifecycleUpdate::Identity,
                };
                (agent.clone(), u)
            })
            .collect();
        being = step_lifecycle(&being, &population, &updates, step, &mut record)?;
    }
    let mut header = vec!["step".to_string()];
    header.extend(population.iter().cloned());
    let rows = record
        .norms
        .iter()
        .map(|(step, norms)| {
            let mut row = vec![*step as f64];
            row.extend(population.iter().map(|a| norms[a]));
            row
        })
        .collect();
    Ok(AnalysisOutput {
        result: json!({
            "being": record.being,
            "threshold": record.threshold,
            "birth_step": record.birth_step,
            "death_step": record.death_step,
            "alive_at_end": record.death_step.is_none() && record.birth_step.is_some(),
        }),
        warnings: Vec::new(),
        tables: vec![Table {
            name: "norms".into(),
            header,
            rows,
        }],
    })
}

/// Metric of a norm valuation, identity otherwise.
fn metric_of(sc: &Scenario, id: &str) -> Result<Matrix> {
    let a = sc.agent(id)?;
    Ok(a.valuation.metric(a.dim()).unwrap_or_else(|| Matrix::identity(a.dim(), a.dim())))
}

pub fn counterfactual(sc: &Scenario, p: &Counterfactual) -> Result<AnalysisOutput> {
    let ai = sc.agent(&p.agent_i)?;
    let c = ai.current_state.clone();
    let x = match &p.hypothetical {
        Some(h) => Vector::from_column_slice(h),
        None => ai.goal_state.clone(),
    };
    let map = sc.map(&p.agent_i, &p.agent_j)?;
    let wi = metric_of(sc, &p.agent_i)?;
    let wj = metric_of(sc, &p.agent_j)?;
    let d = displacement(&x, &c)?;
    let td = perspective_displacement(&map, &x, &c)?;
    let ci = cost(&QuadraticCost::new(wi.clone(), c.clone())?, &x)?;
    let cj = td.dot(&(&wj * &td));
    let mut out = AnalysisOutput::plain(json!({
        "center": v(&c),
        "hypothetical": v(&x),
        "displacement": v(&d),
        "perspective_displacement": v(&td),
        "cost_i": ci,
        "cost_j": cj,
    }));
    match find_preference_reversal(&wi, &map.matrix, &wj, &c, p.tol) {
        Ok(r) => out.result["reversal"] = to_value(&r),
        Err(e @ Error::NotInjective { .. }) => {
            out.warnings.push(format!("reversal search skipped: {e}"));
            out.result["reversal"] = Value::Null;
        }
        Err(e) => return Err(e),
    }
    Ok(out)
}

fn valuation_convergence(sc: &Scenario, p: &ValuationConvergence, seed: Option<u64>) -> Result<AnalysisOutput> {
    let graph = sc.graph()?;
    let cfg = sc.sim_config(seed);
    let rule = ValuationUpdateRule::new(p.alpha)?;
    let report = run_valuation_convergence(&p.initial, &p.leader, p.leader_value, graph, &rule, &cfg)?;
    let mut warnings = Vec::new();
    if !report.hypothesis_holds {
        warnings.push("HypothesisViolated: leader valuation lies inside the followers' range".into());
    } else if report.violations() > 0 {
        warnings.push(format!(
            "{} update(s) moved a follower away from the leader's valuation",
            report.violations()
        ));
    }
    let agents: Vec<String> = p.initial.keys().cloned().collect();
    let mut header = vec!["replicate".to_string(), "step".to_string()];
    header.extend(agents.iter().cloned());
    let mut rows = Vec::new();
    for run in &report.runs {
        for (step, vals) in run.table.iter().enumerate() {
            let mut row = vec![run.replicate as f64, step as f64];
            row.extend(agents.iter().map(|a| vals.get(a).copied().unwrap_or(f64::NAN)));
            rows.push(row);
        }
    }
    let final_vals = report.runs.first().and_then(|r| r.table.last().cloned());
    Ok(AnalysisOutput {
        result: json!({
            "hypothesis_holds": report.hypothesis_holds,
            "violations": report.violations(),
            "non_strict": report.runs.iter().map(|r| r.non_strict).sum::<usize>(),
            "final_valuations": final_vals,
            "events": report.runs.first().map(|r| to_value(&r.events)),
        }),
        warnings,
        tables: vec![Table {
            name: "valuations".into(),
            header,
            rows,
        }],
    })
}

fn social_identity(sc: &Scenario, p: &SocialIdentity) -> Result<AnalysisOutput> {
    let valuations = sc.valuations();
    let cross = sc.cross_maps();
    let stance = |id: &str| sc.representation(&p.stance, id);
    let candidates = p
        .candidates
        .iter()
        .map(|c| Ok((c.clone(), stance(c)?)))
        .collect::<Result<Vec<_>>>()?;
    let election = elect_leader(&candidates, &p.followers, &cross, &valuations)?;
    let project = |id: &str| -> Result<Vector> { apply(&sc.map(id, &p.group)?, &stance(id)?) };
    let prototype = match &p.prototype {
        Some(PrototypeDoc::Vector(x)) => Vector::from_column_slice(x),
        Some(PrototypeDoc::Named(n)) if n == "leader" => project(&election.leader)?,
        Some(PrototypeDoc::Named(n)) => project(n)?,
        None => return Err(Error::InvalidParameter("missing prototype specification".into())),
    };
    let mut group_maps = BTreeMap::new();
    for m in &p.members {
        group_maps.insert(m.clone(), sc.map(m, &p.group)?);
    }
    let ctx = GroupContext {
        followers: p.followers.clone(),
        cross_maps: cross.clone(),
        group_maps,
        prototype: prototype.clone(),
    };
    let reward = match p.reward {
        RewardKind::Exp => RewardFn::Exp,
        RewardKind::Reciprocal => RewardFn::Reciprocal,
    };
    let punish = match p.punish {
        PunishKind::Linear => PunishFn::Linear,
        PunishKind::Quadratic => PunishFn::Quadratic,
    };
    let mut deviance = BTreeMap::new();
    let mut member_vals: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for m in &p.members {
        let x = stance(m)?;
        deviance.insert(m.clone(), to_value(&deviance_report(m, &x, &ctx, reward, punish)?));
        for f in &p.followers {
            let val = valuations[f].evaluate(&apply(&sc.map(m, f)?, &x)?)?;
            member_vals.entry(f.clone()).or_default().insert(m.clone(), val);
        }
    }
    let mut out = AnalysisOutput::plain(json!({
        "election": to_value(&election),
        "prototype": v(&prototype),
        "deviance": deviance,
        "member_valuations": member_vals,
    }));
    if let Some(o) = &p.out_leader {
        let x_in = stance(&election.leader)?;
        let y = stance(o)?;
        let mut contrast = BTreeMap::new();
        for f in &p.followers {
            let c = outgroup_contrast(
                f,
                (&election.leader, &x_in),
                (o, &y),
                &cross,
                &valuations[f],
                p.ratio_threshold,
            )?;
            let mut entry = to_value(&c);
            entry["verdict"] = json!(if c.out_group { "OUT_GROUP" } else { "IN_GROUP" });
            contrast.insert(f.clone(), entry);
        }
        out.result["outgroup"] = json!(contrast);
    }
    Ok(out)
}
