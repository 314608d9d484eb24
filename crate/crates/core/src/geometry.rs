//! Small dense real linear algebra.
//!
//! Everything here works on tiny matrices (the model's value spaces rarely
//! exceed ten dimensions), so the routines favour exactness of the verdicts
//! over speed: SVD-based ranks and null spaces, a Bland's-rule simplex for
//! convex-hull feasibility, and Cholesky reduction for the symmetric-definite
//! generalized eigenproblem.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Multiplies machine epsilon, the largest singular value and the
    /// larger matrix dimension to form the rank threshold.
    pub rank_tol_factor: f64,
    pub hull_tol: f64,
    /// Comparison tolerance for worked examples printed at two decimals.
    pub example_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_tol_factor: 1e2,
            hull_tol: 1e-9,
            example_tol: 5e-3,
        }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol_factor", self.rank_tol_factor),
            ("hull_tol", self.hull_tol),
            ("example_tol", self.example_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "tolerance {name} must be strictly positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Singular values at or below this count as zero.
    pub fn rank_threshold(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rank_tol_factor * f64::EPSILON * rows.max(cols) as f64 * sigma_max
    }

    /// Threshold of a unit-scale problem; vectors with a smaller norm are
    /// treated as absent.
    pub fn zero_threshold(&self) -> f64 {
        self.rank_tol_factor * f64::EPSILON
    }

    /// Rank threshold of `m` itself.
    pub fn threshold_for(&self, m: &Matrix) -> f64 {
        let sv = singular_values(m);
        let smax = sv.first().copied().unwrap_or(0.0);
        self.rank_threshold(smax, m.nrows(), m.ncols())
    }
}

pub fn vector(entries: &[f64]) -> Vector {
    Vector::from_column_slice(entries)
}

/// Builds a matrix from row slices. All rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidParameter("matrix must be nonempty".into()));
    }
    for r in rows {
        if r.len() != ncols {
            return Err(Error::DimensionMismatch {
                expected: ncols,
                found: r.len(),
            });
        }
    }
    let m = Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    ensure_finite_matrix(&m)?;
    Ok(m)
}

pub fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn ensure_finite(v: &Vector) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("vector"))
    }
}

pub fn ensure_finite_matrix(m: &Matrix) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("matrix"))
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Full SVD: pads with zero rows so that `V` is always `cols × cols`.
/// Singular values are descending and padded with zeros to `cols` entries.
fn full_svd(m: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let rows = m.nrows().max(m.ncols());
    let mut padded = Matrix::zeros(rows, m.ncols());
    padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    let svd = SVD::new(padded, true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let sv = svd.singular_values.iter().copied().collect();
    (u, sv, v_t.transpose())
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    sv.iter().copied().collect()
}

pub fn rank(m: &Matrix, tol: &TolerancePolicy) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    let thr = tol.rank_threshold(smax, m.nrows(), m.ncols());
    sv.iter().filter(|&&s| s > thr).count()
}

/// Orthonormal basis of the numerical null space.
pub fn null_space_basis(m: &Matrix, tol: &TolerancePolicy) -> Vec<Vector> {
    let (_, sv, v) = full_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = tol.rank_threshold(smax, m.nrows(), m.ncols());
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s <= thr)
        .map(|(k, _)| v.column(k).into_owned())
        .collect()
}

/// Orthonormal basis of the column space (left singular vectors above the
/// threshold). `floor` sets a minimum scale for the threshold so that pure
/// round-off in a tiny matrix is not mistaken for rank.
pub fn range_basis(m: &Matrix, tol: &TolerancePolicy, floor: f64) -> Matrix {
    if m.ncols() == 0 {
        return Matrix::zeros(m.nrows(), 0);
    }
    let svd = SVD::new(m.clone(), true, false);
    let u = svd.u.expect("u requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let thr = tol.rank_threshold(smax.max(floor), m.nrows(), m.ncols());
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > thr)
        .map(|(k, _)| k)
        .collect();
    Matrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

pub fn pseudo_inverse(m: &Matrix, tol: &TolerancePolicy) -> Matrix {
    let (u, sv, v) = full_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let thr = tol.rank_threshold(smax, m.nrows(), m.ncols());
    let mut out = Matrix::zeros(m.ncols(), m.nrows());
    for (k, &s) in sv.iter().enumerate() {
        if s > thr {
            // u has max(rows, cols) rows; only the first `rows` belong to m.
            let uk = u.column(k).rows(0, m.nrows()).into_owned();
            out += (v.column(k) / s) * uk.transpose();
        }
    }
    out
}

pub fn cosine_similarity(u: &Vector, v: &Vector) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((u.dot(v) / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HullMembership {
    Inside { coefficients: Vec<f64> },
    /// `infeasibility` is the optimal phase-one objective: the smallest
    /// achievable L1 residual of the (sign-normalised) constraint rows.
    Outside { infeasibility: f64 },
}

impl HullMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullMembership::Inside { .. })
    }
}

/// Decides whether `x` is a convex combination of `vertices`.
///
/// Solved as a phase-one linear program: `V α = x`, `1ᵀα = 1`, `α ≥ 0`, with
/// one artificial variable per row, using Bland's rule so that degenerate
/// vertex sets cannot cycle.
pub fn convex_hull_membership(
    x: &Vector,
    vertices: &[Vector],
    tol: &TolerancePolicy,
) -> Result<HullMembership> {
    if vertices.is_empty() {
        return Err(Error::InvalidParameter("vertex set is empty".into()));
    }
    let d = x.len();
    for v in vertices {
        check_dim(d, v.len())?;
    }
    let n = vertices.len();
    let m = d + 1;
    let width = n + m + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; m];
    for r in 0..m {
        let (row_b, sign) = {
            let b = if r < d { x[r] } else { 1.0 };
            (b.abs(), if b < 0.0 { -1.0 } else { 1.0 })
        };
        for (j, v) in vertices.iter().enumerate() {
            t[r][j] = sign * if r < d { v[r] } else { 1.0 };
        }
        t[r][n + r] = 1.0;
        t[r][rhs] = row_b;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // Reduced-cost row of the phase-one objective (sum of artificials).
    let mut obj = vec![0.0; width];
    for j in 0..width {
        let col_sum: f64 = t.iter().map(|row| row[j]).sum();
        obj[j] = if (n..n + m).contains(&j) { col_sum - 1.0 } else { col_sum };
    }

    const PIVOT_TOL: f64 = 1e-12;
    for _ in 0..10_000 {
        let Some(enter) = (0..n + m).find(|&j| obj[j] > PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for r in 0..m {
            if t[r][enter] > PIVOT_TOL {
                let ratio = t[r][rhs] / t[r][enter];
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-15
                            || ((ratio - lratio).abs() <= 1e-15 && basis[r] < basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            // Unbounded direction cannot occur for a phase-one problem.
            break;
        };
        let piv = t[pr][enter];
        for v in t[pr].iter_mut() {
            *v /= piv;
        }
        let pivot_row = t[pr].clone();
        for (r, row) in t.iter_mut().enumerate() {
            if r != pr {
                let f = row[enter];
                if f != 0.0 {
                    for (a, b) in row.iter_mut().zip(&pivot_row) {
                        *a -= f * b;
                    }
                }
            }
        }
        let f = obj[enter];
        for (a, b) in obj.iter_mut().zip(&pivot_row) {
            *a -= f * b;
        }
        basis[pr] = enter;
    }

    let infeasibility = obj[rhs].max(0.0);
    let mut alpha = vec![0.0; n];
    for (r, &b) in basis.iter().enumerate() {
        if b < n {
            alpha[b] = t[r][rhs].max(0.0);
        }
    }
    let sum: f64 = alpha.iter().sum();
    if sum > 0.0 {
        for a in alpha.iter_mut() {
            *a /= sum;
        }
        let mut combo = Vector::zeros(d);
        for (a, v) in alpha.iter().zip(vertices) {
            combo += v * *a;
        }
        if (combo - x).norm() <= tol.hull_tol {
            return Ok(HullMembership::Inside {
                coefficients: alpha,
            });
        }
    }
    Ok(HullMembership::Outside { infeasibility })
}

/// Least-squares linear map `T` minimising `Σ‖T sᵢ − tᵢ‖²`; the minimum
/// Frobenius-norm solution when the sources do not span their space.
pub fn fit_map_least_squares(pairs: &[(Vector, Vector)]) -> Result<Matrix> {
    let Some((s0, t0)) = pairs.first() else {
        return Err(Error::InvalidParameter("at least one pair is required".into()));
    };
    let (ds, dt) = (s0.len(), t0.len());
    for (s, t) in pairs {
        check_dim(ds, s.len())?;
        check_dim(dt, t.len())?;
    }
    let sources = Matrix::from_fn(ds, pairs.len(), |i, k| pairs[k].0[i]);
    let targets = Matrix::from_fn(dt, pairs.len(), |i, k| pairs[k].1[i]);
    Ok(targets * pseudo_inverse(&sources, &TolerancePolicy::default()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Normalised so that `eᵀ A e = 1`.
    pub vector: Vector,
}

fn check_symmetric(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

pub fn is_positive_definite(m: &Matrix) -> bool {
    check_symmetric(m).is_ok() && Cholesky::new(m.clone()).is_some()
}

/// Solves `B e = λ A e` for symmetric positive-definite `A` and `B`.
/// Eigenvalues ascend; eigenvectors are `A`-orthonormal.
pub fn generalized_eigenpairs(a: &Matrix, b: &Matrix) -> Result<Vec<EigenPair>> {
    check_symmetric(a)?;
    check_symmetric(b)?;
    check_dim(a.nrows(), b.nrows())?;
    let chol = Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
    if Cholesky::new(b.clone()).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let l = chol.l();
    let n = a.nrows();
    // C = L⁻¹ B L⁻ᵀ
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite)?;
    let c = &l_inv * b * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt_inv = l_inv.transpose();
    Ok(order
        .into_iter()
        .map(|k| EigenPair {
            value: eig.eigenvalues[k],
            vector: &lt_inv * eig.eigenvectors.column(k),
        })
        .collect())
}


/// Serde helpers that write vectors and matrices as plain nested arrays.
pub mod plain {
    use super::{Matrix, Vector};
    use serde::ser::{SerializeMap, SerializeSeq};
    use serde::Serializer;
    use std::collections::BTreeMap;

    pub fn vector<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn vectors<S: Serializer>(vs: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(vs.len()))?;
        for v in vs {
            seq.serialize_element(v.as_slice())?;
        }
        seq.end()
    }

    pub fn vector_map<S: Serializer>(m: &BTreeMap<String, Vector>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k, v.as_slice())?;
        }
        map.end()
    }

    pub fn matrix<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        s.collect_seq(rows)
    }
}
