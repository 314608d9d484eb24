//! Case studies: social-identity leadership, marketing as basis
//! construction, and the rage/sadness classifier.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::agents::{motivational_gradient, Agent, Valuation};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, cosine_similarity, ensure_finite, Matrix, Vector};
use crate::interpretation::{apply, InterpretationMap};

pub type CrossMaps = BTreeMap<(String, String), InterpretationMap>;

fn lookup<'a>(maps: &'a CrossMaps, from: &str, to: &str) -> Result<&'a InterpretationMap> {
    maps.get(&(from.to_string(), to.to_string())).ok_or_else(|| Error::MissingMap {
        from: from.to_string(),
        to: to.to_string(),
    })
}

fn valuation_of<'a>(valuations: &'a BTreeMap<String, Valuation>, id: &str) -> Result<&'a Valuation> {
    valuations.get(id).ok_or_else(|| Error::UnknownAgent(id.to_string()))
}

/// Mean over followers of `Val_j(T_{i→j}(stance))`.
pub fn group_score(
    candidate: &str,
    stance: &Vector,
    followers: &[String],
    cross_maps: &CrossMaps,
    valuations: &BTreeMap<String, Valuation>,
) -> Result<f64> {
    if followers.is_empty() {
        return Err(Error::InvalidParameter("group has no followers".into()));
    }
    let mut total = 0.0;
    for j in followers {
        let map = lookup(cross_maps, candidate, j)?;
        total += valuation_of(valuations, j)?.evaluate(&apply(map, stance)?)?;
    }
    Ok(total / followers.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Election {
    pub leader: String,
    pub scores: BTreeMap<String, f64>,
}

/// Highest group score; ties go to the lexicographically smallest id.
pub fn elect_leader(
    candidates: &[(String, Vector)],
    followers: &[String],
    cross_maps: &CrossMaps,
    valuations: &BTreeMap<String, Valuation>,
) -> Result<Election> {
    let mut scores = BTreeMap::new();
    for (id, stance) in candidates {
        scores.insert(id.clone(), group_score(id, stance, followers, cross_maps, valuations)?);
    }
    // BTreeMap iterates in id order, so keeping the first maximum breaks ties.
    let leader = scores
        .iter()
        .fold(None::<(&String, f64)>, |best, (id, &s)| match best {
            Some((_, b)) if b >= s => best,
            _ => Some((id, s)),
        })
        .map(|(id, _)| id.clone())
        .ok_or(Error::NoCandidates)?;
    Ok(Election { leader, scores })
}

/// Group members, their projections into group space, and the prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupContext {
    pub followers: Vec<String>,
    pub cross_maps: CrossMaps,
    pub group_maps: BTreeMap<String, InterpretationMap>,
    pub prototype: Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RewardFn {
    /// `exp(−d)`
    #[default]
    Exp,
    /// `1 / (1 + d)`
    Reciprocal,
}

impl RewardFn {
    pub fn eval(&self, d: f64) -> f64 {
        match self {
            RewardFn::Exp => (-d).exp(),
            RewardFn::Reciprocal => 1.0 / (1.0 + d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PunishFn {
    /// `d`
    #[default]
    Linear,
    /// `d²`
    Quadratic,
}

impl PunishFn {
    pub fn eval(&self, d: f64) -> f64 {
        match self {
            PunishFn::Linear => d,
            PunishFn::Quadratic => d * d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviance {
    pub distance: f64,
    pub reward: f64,
    pub punishment: f64,
}

/// Distance of a member's group-space projection from the prototype.
pub fn deviance_report(
    member: &str,
    stance: &Vector,
    ctx: &GroupContext,
    reward: RewardFn,
    punish: PunishFn,
) -> Result<Deviance> {
    let map = ctx.group_maps.get(member).ok_or_else(|| Error::MissingMap {
        from: member.to_string(),
        to: "group".to_string(),
    })?;
    let projected = apply(map, stance)?;
    check_dim(ctx.prototype.len(), projected.len())?;
    let distance = (projected - &ctx.prototype).norm();
    Ok(Deviance {
        distance,
        reward: reward.eval(distance),
        punishment: punish.eval(distance),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutgroupContrast {
    pub in_val: f64,
    pub out_val: f64,
    /// `out_val / in_val`; absent when `in_val = 0`.
    pub ratio: Option<f64>,
    pub out_group: bool,
}

pub const DEFAULT_OUTGROUP_RATIO: f64 = 0.5;

/// Compares how a follower values the in-group and out-group leaders'
/// stances. The out-group flag needs a positive in-group valuation.
pub fn outgroup_contrast(
    follower: &str,
    in_leader: (&str, &Vector),
    out_leader: (&str, &Vector),
    maps: &CrossMaps,
    valuation: &Valuation,
    ratio_threshold: f64,
) -> Result<OutgroupContrast> {
    let in_val = valuation.evaluate(&apply(lookup(maps, in_leader.0, follower)?, in_leader.1)?)?;
    let out_val = valuation.evaluate(&apply(lookup(maps, out_leader.0, follower)?, out_leader.1)?)?;
    let ratio = (in_val != 0.0).then(|| out_val / in_val);
    let out_group = in_val > 0.0 && ratio.is_some_and(|r| r < ratio_threshold);
    Ok(OutgroupContrast {
        in_val,
        out_val,
        ratio,
        out_group,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketingOutcome {
    pub agent: Agent,
    pub valuation_before: f64,
    pub valuation_after: f64,
    /// Old gradient embedded with a zero on the new axis.
    pub gradient_before: Vector,
    pub gradient_after: Vector,
    /// Cosine of each gradient with the product; absent for a zero gradient.
    pub cosine_before: Option<f64>,
    pub cosine_after: Option<f64>,
}

fn embed(v: &Vector) -> Vector {
    v.clone().push(0.0)
}

/// Adds a valued axis to an agent's space and nudges the goal along it.
pub fn marketing_intervention(
    agent: &Agent,
    new_axis_label: &str,
    weight: f64,
    eta: f64,
    product: &Vector,
) -> Result<MarketingOutcome> {
    if !(weight >= 0.0 && weight.is_finite() && eta >= 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "weight and eta must be nonnegative, got {weight} and {eta}"
        )));
    }
    let dim = agent.dim();
    check_dim(dim + 1, product.len())?;
    ensure_finite(product)?;
    let space = agent.space.extended(new_axis_label)?;
    let valuation = match &agent.valuation {
        Valuation::WeightedSum(w) => Valuation::WeightedSum(w.clone().push(weight)),
        Valuation::Linear(w) => Valuation::Linear(w.clone().push(weight)),
        other => return Err(Error::UnsupportedValuation(other.kind())),
    };
    let old_product = product.rows(0, dim).into_owned();
    let valuation_before = agent.valuation.evaluate(&old_product)?;
    let valuation_after = valuation.evaluate(product)?;
    let current_state = embed(&agent.current_state);
    let mut goal_state = embed(&agent.goal_state);
    goal_state[dim] += eta;
    let updated = Agent::new(agent.id.clone(), space, valuation, current_state, goal_state)?;
    let gradient_before = embed(&motivational_gradient(agent));
    let gradient_after = motivational_gradient(&updated);
    let cos = |m: &Vector| cosine_similarity(m, product).ok();
    Ok(MarketingOutcome {
        cosine_before: cos(&gradient_before),
        cosine_after: cos(&gradient_after),
        agent: updated,
        valuation_before,
        valuation_after,
        gradient_before,
        gradient_after,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmotionInput {
    pub x: Vector,
    pub g: Vector,
    pub actions: Vec<Matrix>,
    pub acceptance_axis: Vector,
    pub search_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionParams {
    /// Activation needs `D > activation_fraction·‖g‖`.
    pub activation_fraction: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl Default for EmotionParams {
    fn default() -> Self {
        Self {
            activation_fraction: 0.1,
            gamma: 0.01,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NotActivated {
    /// Some composition of `depth` actions reaches the goal.
    Reachable { depth: usize },
    SmallD,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Emotion {
    Rage,
    Sadness,
    Ambivalent,
    NotActivated(NotActivated),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmotionReport {
    pub emotion: Emotion,
    pub distance: f64,
    pub acceptance: f64,
    #[serde(serialize_with = "crate::geometry::plain::vector")]
    pub gradient: Vector,
    pub search_depth: usize,
}

/// Shortest composition length (1..=depth) that maps `x` to within `tol` of `g`.
pub fn reachable_within(x: &Vector, g: &Vector, actions: &[Matrix], depth: usize, tol: f64) -> Option<usize> {
    let mut frontier = vec![x.clone()];
    for d in 1..=depth {
        let next: Vec<Vector> = frontier
            .iter()
            .flat_map(|s| actions.iter().map(move |t| t * s))
            .collect();
        if next.iter().any(|s| (s - g).norm() <= tol) {
            return Some(d);
        }
        frontier = next;
    }
    None
}

pub fn classify_emotion(input: &EmotionInput, params: &EmotionParams, tol: f64) -> Result<EmotionReport> {
    let n = input.x.len();
    check_dim(n, input.g.len())?;
    check_dim(n, input.acceptance_axis.len())?;
    for t in &input.actions {
        check_dim(n, t.nrows())?;
        check_dim(n, t.ncols())?;
    }
    if input.acceptance_axis.norm() == 0.0 {
        return Err(Error::ZeroVector);
    }
    if input.search_depth == 0 {
        return Err(Error::InvalidParameter("search_depth must be positive".into()));
    }
    let diff = &input.g - &input.x;
    let distance = diff.norm();
    let acceptance = input.x.dot(&input.acceptance_axis);
    let report = |emotion, gradient| EmotionReport {
        emotion,
        distance,
        acceptance,
        gradient,
        search_depth: input.search_depth,
    };
    if let Some(depth) = reachable_within(&input.x, &input.g, &input.actions, input.search_depth, tol) {
        return Ok(report(Emotion::NotActivated(NotActivated::Reachable { depth }), diff));
    }
    if distance <= params.activation_fraction * input.g.norm() {
        return Ok(report(Emotion::NotActivated(NotActivated::SmallD), diff));
    }
    Ok(if acceptance < -tol {
        report(Emotion::Rage, &diff * params.beta)
    } else if acceptance > tol {
        report(Emotion::Sadness, &diff * params.gamma)
    } else {
        report(Emotion::Ambivalent, diff)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ValueSpace;
    use crate::geometry::vector;

    fn setup() -> (Vec<String>, CrossMaps, BTreeMap<String, Valuation>) {
        let followers = vec!["F1".to_string(), "F2".to_string()];
        let mut maps = CrossMaps::new();
        for c in ["A", "B", "C", "H"] {
            for f in &followers {
                maps.insert((c.into(), f.clone()), InterpretationMap::identity(c, f.as_str(), 2));
            }
        }
        let vals = BTreeMap::from([
            ("F1".to_string(), Valuation::Linear(vector(&[2.0, 0.5]))),
            ("F2".to_string(), Valuation::Linear(vector(&[2.0, 1.0]))),
        ]);
        (followers, maps, vals)
    }

    #[test]
    fn group_scores_and_election() {
        let (f, maps, vals) = setup();
        let cands = vec![
            ("A".to_string(), vector(&[1.0, 0.2])),
            ("B".to_string(), vector(&[0.4, 0.8])),
            ("C".to_string(), vector(&[0.7, 0.4])),
        ];
        let e = elect_leader(&cands, &f, &maps, &vals).unwrap();
        assert!((e.scores["A"] - 2.15).abs() < 1e-12);
        assert!((e.scores["B"] - 1.40).abs() < 1e-12);
        assert!((e.scores["C"] - 1.70).abs() < 1e-12);
        assert_eq!(e.leader, "A");
        assert_eq!(group_score("A", &Vector::zeros(2), &f, &maps, &vals).unwrap(), 0.0);
        assert_eq!(elect_leader(&cands[1..2], &f, &maps, &vals).unwrap().leader, "B");
        let tie = vec![("C".to_string(), vector(&[1.0, 1.0])), ("B".to_string(), vector(&[1.0, 1.0]))];
        assert_eq!(elect_leader(&tie, &f, &maps, &vals).unwrap().leader, "B");
        assert_eq!(elect_leader(&[], &f, &maps, &vals), Err(Error::NoCandidates));
        assert!(matches!(
            group_score("Z", &Vector::zeros(2), &f, &maps, &vals),
            Err(Error::MissingMap { .. })
        ));
    }

    fn ctx() -> GroupContext {
        let (followers, cross_maps, _) = setup();
        GroupContext {
            followers,
            cross_maps,
            group_maps: ["K", "I", "A"]
                .iter()
                .map(|m| (m.to_string(), InterpretationMap::identity(*m, "G", 2)))
                .collect(),
            prototype: vector(&[1.0, 0.2]),
        }
    }

    #[test]
    fn deviance_examples() {
        let c = ctx();
        let k = deviance_report("K", &vector(&[0.9, 0.1]), &c, RewardFn::Exp, PunishFn::Linear).unwrap();
        assert!((k.distance - 0.02f64.sqrt()).abs() < 1e-12);
        let i = deviance_report("I", &vector(&[-0.5, 1.0]), &c, RewardFn::Exp, PunishFn::Linear).unwrap();
        assert!((i.distance - 1.7).abs() < 1e-12);
        assert!(i.reward < k.reward && i.punishment > k.punishment);
        let a = deviance_report("A", &vector(&[1.0, 0.2]), &c, RewardFn::Exp, PunishFn::Linear).unwrap();
        assert_eq!((a.distance, a.reward), (0.0, 1.0));
        assert!(matches!(
            deviance_report("Q", &vector(&[1.0, 0.2]), &c, RewardFn::Exp, PunishFn::Linear),
            Err(Error::MissingMap { .. })
        ));
    }

    #[test]
    fn outgroup_examples() {
        let (_, maps, vals) = setup();
        let xa = vector(&[1.0, 0.2]);
        let r = outgroup_contrast("F1", ("A", &xa), ("H", &vector(&[0.0, 1.5])), &maps, &vals["F1"], 0.5).unwrap();
        assert!((r.in_val - 2.1).abs() < 1e-12 && (r.out_val - 0.75).abs() < 1e-12);
        assert!((r.ratio.unwrap() - 0.75 / 2.1).abs() < 1e-12);
        assert!(r.out_group);
        let same = outgroup_contrast("F1", ("A", &xa), ("H", &xa), &maps, &vals["F1"], 0.5).unwrap();
        assert_eq!((same.ratio, same.out_group), (Some(1.0), false));

        let mut blind = maps.clone();
        blind.insert(
            ("H".into(), "F1".into()),
            InterpretationMap::new("H", "F1", Matrix::from_diagonal(&vector(&[1.0, 0.0]))),
        );
        let r = outgroup_contrast("F1", ("A", &xa), ("H", &vector(&[0.0, 1.5])), &blind, &vals["F1"], 0.5).unwrap();
        assert!(r.out_val.abs() < 1e-15 && r.out_group);
    }

    fn consumer() -> Agent {
        Agent::new(
            "c",
            ValueSpace::new(vec!["taste".into(), "price".into()]).unwrap(),
            Valuation::WeightedSum(vector(&[1.0, 0.5])),
            vector(&[0.2, 0.3]),
            vector(&[0.6, 0.4]),
        )
        .unwrap()
    }

    #[test]
    fn marketing_examples() {
        let a = consumer();
        let product = vector(&[0.5, 0.2, 0.8]);
        let r = marketing_intervention(&a, "healthy", 0.5, 0.3, &product).unwrap();
        assert!((r.valuation_after - r.valuation_before - 0.4).abs() < 1e-12);
        assert_eq!(r.agent.dim(), 3);
        assert_eq!(r.agent.current_state.rows(0, 2), a.current_state.rows(0, 2));
        assert_eq!(r.agent.goal_state.rows(0, 2), a.goal_state.rows(0, 2));
        assert_eq!(r.agent.goal_state[2], 0.3);
        assert!(r.cosine_after.unwrap() > r.cosine_before.unwrap());

        let d = marketing_intervention(&a, "healthy", 0.0, 0.0, &product).unwrap();
        assert_eq!(d.valuation_after, d.valuation_before);
        assert_eq!(d.gradient_after, d.gradient_before);

        assert_eq!(
            marketing_intervention(&a, "taste", 0.5, 0.3, &product).map(|_| ()),
            Err(Error::DuplicateAxisLabel("taste".into()))
        );
        let mut n = a.clone();
        n.valuation = Valuation::euclidean();
        assert!(matches!(
            marketing_intervention(&n, "healthy", 0.5, 0.3, &product),
            Err(Error::UnsupportedValuation(_))
        ));
    }

    fn emotion_input(x: &[f64]) -> EmotionInput {
        EmotionInput {
            x: vector(x),
            g: vector(&[3.0, 3.0]),
            actions: vec![Matrix::from_diagonal(&vector(&[1.0, 0.5]))],
            acceptance_axis: vector(&[0.0, 1.0]),
            search_depth: 4,
        }
    }

    #[test]
    fn emotion_examples() {
        let p = EmotionParams::default();
        let reach = EmotionInput {
            x: vector(&[1.0, 1.0]),
            g: vector(&[1.0, 1.0]),
            actions: vec![Matrix::identity(2, 2)],
            acceptance_axis: vector(&[0.0, 1.0]),
            search_depth: 4,
        };
        let r = classify_emotion(&reach, &p, 1e-9).unwrap();
        assert_eq!(r.emotion, Emotion::NotActivated(NotActivated::Reachable { depth: 1 }));

        let sad = classify_emotion(&emotion_input(&[0.5, 0.4]), &p, 1e-9).unwrap();
        assert_eq!(sad.emotion, Emotion::Sadness);
        assert!((sad.gradient.norm() - 0.01 * sad.distance).abs() < 1e-12);

        let rage = classify_emotion(&emotion_input(&[0.5, -0.4]), &p, 1e-9).unwrap();
        assert_eq!(rage.emotion, Emotion::Rage);
        assert!((rage.gradient.norm() - rage.distance).abs() < 1e-12);

        let amb = classify_emotion(&emotion_input(&[0.5, 0.0]), &p, 1e-9).unwrap();
        assert_eq!(amb.emotion, Emotion::Ambivalent);

        let small = classify_emotion(&emotion_input(&[2.9, 2.95]), &p, 1e-9).unwrap();
        assert_eq!(small.emotion, Emotion::NotActivated(NotActivated::SmallD));
    }

    #[test]
    fn reachability_depth() {
        let double = Matrix::identity(1, 1) * 2.0;
        let x = vector(&[1.0]);
        assert_eq!(reachable_within(&x, &vector(&[8.0]), std::slice::from_ref(&double), 4, 1e-12), Some(3));
        assert_eq!(reachable_within(&x, &vector(&[32.0]), &[double], 4, 1e-12), None);
    }
}
