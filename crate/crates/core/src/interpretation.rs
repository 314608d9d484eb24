//! Interpretation maps between value spaces.
//!
//! A map `T_{A→B}` is a `dim(B) × dim(A)` matrix tagged with the two agent
//! ids. Composition along a path multiplies in application order, null
//! spaces model what the receiver cannot perceive, and the consistency and
//! round-trip checks quantify how much a belief drifts in transit.

use serde::Serialize;

use crate::agents::Valuation;
use crate::error::{Error, Result};
use crate::geometry::{self, check_dim, Matrix, TolerancePolicy, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct InterpretationMap {
    pub source: String,
    pub target: String,
    pub matrix: Matrix,
}

impl InterpretationMap {
    pub fn new(source: impl Into<String>, target: impl Into<String>, matrix: Matrix) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            matrix,
        }
    }

    pub fn identity(source: impl Into<String>, target: impl Into<String>, dim: usize) -> Self {
        Self::new(source, target, Matrix::identity(dim, dim))
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn apply(map: &InterpretationMap, v: &Vector) -> Result<Vector> {
    check_dim(map.source_dim(), v.len())?;
    Ok(&map.matrix * v)
}

/// Composite map of a path: the first map is applied first.
pub fn compose_path(maps: &[InterpretationMap]) -> Result<InterpretationMap> {
    let Some(first) = maps.first() else {
        return Err(Error::BrokenChain {
            index: 0,
            reason: "empty path".into(),
        });
    };
    let mut acc = first.clone();
    for (index, next) in maps.iter().enumerate().skip(1) {
        if next.source != acc.target {
            return Err(Error::BrokenChain {
                index,
                reason: format!("expected source `{}`, found `{}`", acc.target, next.source),
            });
        }
        if next.source_dim() != acc.target_dim() {
            return Err(Error::BrokenChain {
                index,
                reason: format!(
                    "dimension {} does not chain into {}",
                    acc.target_dim(),
                    next.source_dim()
                ),
            });
        }
        acc = InterpretationMap {
            source: acc.source,
            target: next.target.clone(),
            matrix: &next.matrix * &acc.matrix,
        };
    }
    Ok(acc)
}

/// True when `v` is nonzero but its image is numerically zero.
pub fn is_blind_to(map: &InterpretationMap, v: &Vector, tol: &TolerancePolicy) -> Result<bool> {
    let image = apply(map, v)?;
    let vn = v.norm();
    Ok(vn > tol.zero_threshold() && image.norm() <= tol.threshold_for(&map.matrix) * vn)
}

/// What the forward image is compared against.
#[derive(Debug, Clone, Copy)]
pub enum ForwardReference<'a> {
    /// Source and target share one ambient space: compare `T(x)` with `x`.
    SameSpace,
    /// Caller-supplied embedding of the source space into the target space:
    /// compare `T(x)` with `E x`.
    Embedding(&'a Matrix),
    /// The representation the receiver actually ended up with, `X_B^new`.
    Observed(&'a Vector),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub forward_ok: bool,
    pub backward_ok: bool,
    pub valuation_ok: bool,
    /// Observed relative forward deviation.
    pub forward_eps: f64,
    /// Observed relative round-trip deviation.
    pub backward_eps: f64,
    pub valuation_gap: f64,
}

fn relative(dev: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        dev / scale
    } else if dev == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Forward, backward and valuation consistency of one transmission of `x`.
#[allow(clippy::too_many_arguments)]
pub fn check_consistency(
    map_ab: &InterpretationMap,
    map_ba: &InterpretationMap,
    x: &Vector,
    eps: f64,
    delta: f64,
    val_a: &Valuation,
    val_b: &Valuation,
    reference: ForwardReference<'_>,
) -> Result<ConsistencyReport> {
    check_dim(map_ba.target_dim(), map_ab.source_dim())?;
    check_dim(map_ba.source_dim(), map_ab.target_dim())?;
    let image = apply(map_ab, x)?;
    let xn = x.norm();
    let (forward_dev, forward_scale, received) = match reference {
        ForwardReference::SameSpace => {
            check_dim(image.len(), x.len())?;
            ((&image - x).norm(), xn, image.clone())
        }
        ForwardReference::Embedding(e) => {
            check_dim(e.ncols(), x.len())?;
            check_dim(e.nrows(), image.len())?;
            let ex = e * x;
            ((&image - &ex).norm(), ex.norm(), image.clone())
        }
        ForwardReference::Observed(new_b) => {
            check_dim(image.len(), new_b.len())?;
            ((&image - new_b).norm(), new_b.norm(), new_b.clone())
        }
    };
    let back = apply(map_ba, &received)?;
    let backward_dev = (&back - x).norm();
    let valuation_gap = (val_b.evaluate(&received)? - val_a.evaluate(x)?).abs();
    Ok(ConsistencyReport {
        forward_ok: forward_dev <= eps * forward_scale,
        backward_ok: backward_dev <= eps * xn,
        valuation_ok: valuation_gap <= delta,
        forward_eps: relative(forward_dev, forward_scale),
        backward_eps: relative(backward_dev, xn),
        valuation_gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTrip {
    /// `‖Rᵏx − x‖` at the requested `k`.
    pub observed_deviation: f64,
    /// `(2ε + ε²)‖x‖`.
    pub one_step_bound: f64,
    /// `((1 + 2ε + ε²)ᵏ − 1)‖x‖`.
    pub k_step_bound: f64,
    pub holds: bool,
    /// `(observed, bound)` for every `s = 1..=k`.
    pub per_step: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RoundTripOutcome {
    Applicable(RoundTrip),
    NotApplicable { step: usize, reason: String },
}

// Relative slack on premise checks so that exact-boundary instances such as
// T = (1 + ε)·I are not rejected by one ulp of round-off.
const PREMISE_SLACK: f64 = 1e-12;

/// Round-trip distortion under repeated forward-then-backward interpretation.
///
/// The forward and backward premises are checked at every point of the orbit
/// `x, Rx, …, Rᵏ⁻¹x` (and at their forward images) before any bound is
/// asserted; a failed premise yields `NotApplicable`.
pub fn round_trip_bound(
    map_ab: &InterpretationMap,
    map_ba: &InterpretationMap,
    x: &Vector,
    eps: f64,
    k: usize,
) -> Result<RoundTripOutcome> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    let d = x.len();
    if map_ab.source_dim() != d
        || map_ab.target_dim() != d
        || map_ba.source_dim() != d
        || map_ba.target_dim() != d
    {
        return Ok(RoundTripOutcome::NotApplicable {
            step: 0,
            reason: "forward and backward maps must act on one shared space".into(),
        });
    }
    let xn = x.norm();
    let c = 2.0 * eps + eps * eps;
    let mut current = x.clone();
    let mut per_step = Vec::with_capacity(k);
    for s in 1..=k {
        let cn = current.norm();
        let forward = &map_ab.matrix * &current;
        if (&forward - &current).norm() > eps * cn * (1.0 + PREMISE_SLACK) {
            return Ok(RoundTripOutcome::NotApplicable {
                step: s,
                reason: "forward premise fails".into(),
            });
        }
        let fnorm = forward.norm();
        let back = &map_ba.matrix * &forward;
        if (&back - &forward).norm() > eps * fnorm * (1.0 + PREMISE_SLACK) {
            return Ok(RoundTripOutcome::NotApplicable {
                step: s,
                reason: "backward premise fails".into(),
            });
        }
        current = back;
        let observed = (&current - x).norm();
        let bound = ((1.0 + c).powi(s as i32) - 1.0) * xn;
        per_step.push((observed, bound));
    }
    let (observed_deviation, k_step_bound) = *per_step.last().expect("k >= 1");
    let holds = per_step.iter().all(|(o, b)| *o <= b + 1e-12);
    Ok(RoundTripOutcome::Applicable(RoundTrip {
        observed_deviation,
        one_step_bound: c * xn,
        k_step_bound,
        holds,
        per_step,
    }))
}

/// Shape of the persuasion matrix. Any `M` with the right image norm works;
/// `Scalar` is the canonical uniform solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PersuasionMode {
    #[default]
    Scalar,
    /// `s·diag(profile)` with `s` chosen so that the image norm hits the target.
    Diagonal(Vector),
}

/// A matrix `M` such that `Val(M·T_A(x))` equals `target_val`, for a
/// norm-kind valuation.
pub fn persuasion_matrix(
    map_a: &InterpretationMap,
    x: &Vector,
    target_val: f64,
    val: &Valuation,
    mode: &PersuasionMode,
) -> Result<Matrix> {
    if !matches!(val, Valuation::Norm(_)) {
        return Err(Error::UnsupportedValuation(val.kind()));
    }
    if !(target_val >= 0.0 && target_val.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target valuation must be nonnegative, got {target_val}"
        )));
    }
    let image = apply(map_a, x)?;
    let dim = image.len();
    let shape = match mode {
        PersuasionMode::Scalar => Matrix::identity(dim, dim),
        PersuasionMode::Diagonal(profile) => {
            check_dim(dim, profile.len())?;
            Matrix::from_diagonal(profile)
        }
    };
    let current = val.evaluate(&(&shape * &image))?;
    if current <= 0.0 {
        return Err(Error::ZeroImage);
    }
    Ok(shape * (target_val / current))
}

/// Least-squares interpretation map fitted to `(source, target)` pairs.
pub fn fit_interpretation_map(
    pairs: &[(Vector, Vector)],
    source: impl Into<String>,
    target: impl Into<String>,
) -> Result<InterpretationMap> {
    let m = geometry::fit_map_least_squares(pairs)?;
    Ok(InterpretationMap::new(source, target, m))
}
