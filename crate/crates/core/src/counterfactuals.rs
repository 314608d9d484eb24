//! Displacement-based counterfactuals and preference reversal between two
//! quadratic costs.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, check_dim, ensure_finite, Matrix, TolerancePolicy, Vector};
use crate::interpretation::{apply, InterpretationMap};

/// `Δ = x − c`.
pub fn displacement(x: &Vector, c: &Vector) -> Result<Vector> {
    check_dim(c.len(), x.len())?;
    Ok(x - c)
}

/// `T(x) − T(c)`.
pub fn perspective_displacement(map: &InterpretationMap, x: &Vector, c: &Vector) -> Result<Vector> {
    check_dim(c.len(), x.len())?;
    Ok(apply(map, x)? - apply(map, c)?)
}

/// `offset + span(basis)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineSubspace {
    #[serde(serialize_with = "crate::geometry::plain::vector")]
    pub offset: Vector,
    #[serde(serialize_with = "crate::geometry::plain::vectors")]
    pub basis: Vec<Vector>,
}

impl AffineSubspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// The point `offset + Σ tᵢ·basisᵢ`.
    pub fn point(&self, coords: &[f64]) -> Result<Vector> {
        check_dim(self.basis.len(), coords.len())?;
        Ok(self
            .basis
            .iter()
            .zip(coords)
            .fold(self.offset.clone(), |acc, (b, t)| acc + b * *t))
    }
}

/// Fixes the listed coordinates; the rest stay free.
pub fn constrain_subspace(space_dim: usize, fixed: &[(usize, f64)]) -> Result<AffineSubspace> {
    let mut offset = Vector::zeros(space_dim);
    let mut seen = BTreeSet::new();
    for &(index, value) in fixed {
        if index >= space_dim {
            return Err(Error::BadIndex { index, dim: space_dim });
        }
        if !seen.insert(index) {
            return Err(Error::InvalidParameter(format!("coordinate {index} fixed twice")));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite("fixed coordinate"));
        }
        offset[index] = value;
    }
    let basis = (0..space_dim)
        .filter(|i| !seen.contains(i))
        .map(|i| {
            let mut e = Vector::zeros(space_dim);
            e[i] = 1.0;
            e
        })
        .collect();
    Ok(AffineSubspace { offset, basis })
}

/// `C(x) = (x − c)ᵀ W (x − c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticCost {
    metric: Matrix,
    center: Vector,
}

impl QuadraticCost {
    pub fn new(metric: Matrix, center: Vector) -> Result<Self> {
        check_dim(metric.nrows(), center.len())?;
        check_dim(metric.nrows(), metric.ncols())?;
        ensure_finite(&center)?;
        geometry::ensure_finite_matrix(&metric)?;
        if !geometry::is_positive_definite(&metric) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { metric, center })
    }

    pub fn metric(&self) -> &Matrix {
        &self.metric
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
}

pub fn cost(qc: &QuadraticCost, x: &Vector) -> Result<f64> {
    let d = displacement(x, &qc.center)?;
    Ok(d.dot(&(&qc.metric * &d)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalCosts {
    pub ci_x: f64,
    pub ci_y: f64,
    pub cj_x: f64,
    pub cj_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalWitness {
    #[serde(serialize_with = "crate::geometry::plain::vector")]
    pub x: Vector,
    #[serde(serialize_with = "crate::geometry::plain::vector")]
    pub y: Vector,
    pub costs: ReversalCosts,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReversalOutcome {
    Witness {
        witness: ReversalWitness,
        eigenvalues: Vec<f64>,
    },
    Proportional {
        eigenvalues: Vec<f64>,
    },
}

/// Strict-inequality margin every witness must clear.
pub const WITNESS_MARGIN: f64 = 1e-9;

/// `Tᵀ W T`, the target metric pulled back through `T`.
pub fn pulled_back_metric(map_ij: &Matrix, metric_j: &Matrix) -> Result<Matrix> {
    check_dim(metric_j.nrows(), map_ij.nrows())?;
    let rank = geometry::rank(map_ij, &TolerancePolicy::default());
    if rank < map_ij.ncols() {
        return Err(Error::NotInjective {
            rank,
            cols: map_ij.ncols(),
        });
    }
    let b = map_ij.transpose() * metric_j * map_ij;
    Ok((&b + b.transpose()) * 0.5)
}

/// Two hypotheticals ordered oppositely by `C_i` and by the pulled-back
/// `C_j`, or `Proportional` when the two forms are similar within `tol`.
pub fn find_preference_reversal(
    metric_i: &Matrix,
    map_ij: &Matrix,
    metric_j: &Matrix,
    c: &Vector,
    tol: f64,
) -> Result<ReversalOutcome> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tol must be nonnegative, got {tol}")));
    }
    let qi = QuadraticCost::new(metric_i.clone(), c.clone())?;
    if !geometry::is_positive_definite(metric_j) {
        return Err(Error::NotPositiveDefinite);
    }
    check_dim(metric_i.nrows(), map_ij.ncols())?;
    let b = pulled_back_metric(map_ij, metric_j)?;
    let qj = QuadraticCost::new(b.clone(), c.clone())?;
    let pairs = geometry::generalized_eigenpairs(metric_i, &b)?;
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let lo = pairs.first().expect("nonempty space");
    let hi = pairs.last().expect("nonempty space");
    if hi.value - lo.value <= tol * hi.value {
        return Ok(ReversalOutcome::Proportional { eigenvalues });
    }
    let ratio = hi.value / lo.value;
    let delta = (0.5 * (ratio.sqrt() - 1.0)).min(0.25);
    let grow = (1.0 + delta) * (1.0 + delta);
    // Q_i gap is grow − 1, Q_j gap is λmax − grow·λmin; both scale with s².
    let gap = (grow - 1.0).min(hi.value - grow * lo.value);
    let need = 2.0 * WITNESS_MARGIN.max(tol);
    let s = if gap >= need { 1.0 } else { (need / gap).sqrt() };
    let x = c + &hi.vector * s;
    let y = c + &lo.vector * (s * (1.0 + delta));
    let costs = ReversalCosts {
        ci_x: cost(&qi, &x)?,
        ci_y: cost(&qi, &y)?,
        cj_x: cost(&qj, &x)?,
        cj_y: cost(&qj, &y)?,
    };
    let margin = WITNESS_MARGIN.max(tol);
    if !(costs.ci_y - costs.ci_x > margin && costs.cj_x - costs.cj_y > margin) {
        return Err(Error::InvalidParameter(format!(
            "eigen-constructed pair failed direct verification: {costs:?}"
        )));
    }
    Ok(ReversalOutcome::Witness {
        witness: ReversalWitness { x, y, costs },
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    fn diag(d: &[f64]) -> Matrix {
        Matrix::from_diagonal(&vector(d))
    }

    #[test]
    fn displacement_examples() {
        let x = vector(&[7.0, 3.0]);
        let c = vector(&[2.0, 6.0]);
        assert_eq!(displacement(&x, &c).unwrap(), vector(&[5.0, -3.0]));
        assert_eq!(displacement(&x, &x).unwrap(), Vector::zeros(2));
        assert_eq!(displacement(&x, &Vector::zeros(2)).unwrap(), x);
        assert!(displacement(&x, &vector(&[1.0])).is_err());
    }

    #[test]
    fn perspective_examples() {
        let t = InterpretationMap::new("i", "j", diag(&[0.6, 1.4]));
        let x = vector(&[7.0, 3.0]);
        let c = vector(&[2.0, 6.0]);
        let d = perspective_displacement(&t, &x, &c).unwrap();
        assert!((d - vector(&[3.0, -4.2])).amax() < 1e-12);
        let id = InterpretationMap::identity("i", "j", 2);
        assert_eq!(perspective_displacement(&id, &x, &c).unwrap(), displacement(&x, &c).unwrap());
        assert_eq!(perspective_displacement(&t, &c, &c).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn subspace_examples() {
        let s = constrain_subspace(3, &[(0, 1.0)]).unwrap();
        assert_eq!(s.offset, vector(&[1.0, 0.0, 0.0]));
        assert_eq!(s.basis, vec![vector(&[0.0, 1.0, 0.0]), vector(&[0.0, 0.0, 1.0])]);
        assert_eq!(s.point(&[2.0, 3.0]).unwrap(), vector(&[1.0, 2.0, 3.0]));
        let p = constrain_subspace(2, &[(0, 1.0), (1, 2.0)]).unwrap();
        assert_eq!(p.dim(), 0);
        let f = constrain_subspace(2, &[]).unwrap();
        assert_eq!((f.dim(), f.offset.norm()), (2, 0.0));
        assert_eq!(constrain_subspace(2, &[(2, 0.0)]), Err(Error::BadIndex { index: 2, dim: 2 }));
        assert!(constrain_subspace(2, &[(1, 0.0), (1, 1.0)]).is_err());
    }

    #[test]
    fn cost_examples() {
        let c = vector(&[2.0, 6.0]);
        let x = vector(&[7.0, 3.0]);
        let q = QuadraticCost::new(Matrix::identity(2, 2), c.clone()).unwrap();
        assert_eq!(cost(&q, &x).unwrap(), 34.0);
        assert_eq!(cost(&q, &c).unwrap(), 0.0);
        let q2 = QuadraticCost::new(Matrix::identity(2, 2) * 2.0, c).unwrap();
        assert_eq!(cost(&q2, &x).unwrap(), 68.0);
        assert_eq!(
            QuadraticCost::new(diag(&[1.0, -1.0]), Vector::zeros(2)),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn reversal_examples() {
        let id = Matrix::identity(2, 2);
        let c = Vector::zeros(2);
        assert!(matches!(
            find_preference_reversal(&id, &id, &id, &c, 1e-9).unwrap(),
            ReversalOutcome::Proportional { .. }
        ));
        assert!(matches!(
            find_preference_reversal(&id, &id, &(&id * 3.0), &c, 1e-9).unwrap(),
            ReversalOutcome::Proportional { .. }
        ));
        match find_preference_reversal(&id, &diag(&[0.6, 1.4]), &id, &c, 1e-9).unwrap() {
            ReversalOutcome::Witness { witness, eigenvalues } => {
                assert!((eigenvalues[0] - 0.36).abs() < 1e-12 && (eigenvalues[1] - 1.96).abs() < 1e-12);
                let k = &witness.costs;
                assert!((k.ci_x - 1.0).abs() < 1e-12 && (k.ci_y - 1.5625).abs() < 1e-12);
                assert!((k.cj_x - 1.96).abs() < 1e-12 && (k.cj_y - 0.5625).abs() < 1e-12);
                assert!((witness.x.iter().map(|v| v.abs()).collect::<Vec<_>>()[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reversal_errors() {
        let id = Matrix::identity(2, 2);
        let flat = diag(&[1.0, 0.0]);
        assert!(matches!(
            find_preference_reversal(&id, &flat, &id, &Vector::zeros(2), 1e-9),
            Err(Error::NotInjective { rank: 1, cols: 2 })
        ));
        assert_eq!(
            find_preference_reversal(&diag(&[1.0, -2.0]), &id, &id, &Vector::zeros(2), 1e-9),
            Err(Error::NotPositiveDefinite)
        );
    }

    #[test]
    fn rectangular_injective_map() {
        let t = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        let out = find_preference_reversal(&Matrix::identity(2, 2), &t, &Matrix::identity(3, 3), &Vector::zeros(2), 1e-9)
            .unwrap();
        assert!(matches!(out, ReversalOutcome::Witness { .. }));
    }

    #[test]
    fn tiny_spread_still_clears_margin() {
        let id = Matrix::identity(2, 2);
        let out = find_preference_reversal(&id, &diag(&[1.0, 1.0 + 1e-7]), &id, &Vector::zeros(2), 1e-12).unwrap();
        match out {
            ReversalOutcome::Witness { witness, .. } => {
                let k = witness.costs;
                assert!(k.ci_y - k.ci_x > WITNESS_MARGIN && k.cj_x - k.cj_y > WITNESS_MARGIN);
            }
            other => panic!("{other:?}"),
        }
    }
}
