//! Dense small-matrix kernels: sym/skew projections, ordered SVD,
//! symmetric eigendecomposition with an oriented frame, and the exponential
//! of skew-symmetric matrices.
//!
//! Singular values and eigenvalues are always returned in descending order,
//! ties keeping their input order. Eigen-frames are made positively oriented
//! by negating the last column when needed.

use std::ops::Deref;

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Tolerance for structural checks (orthogonality, determinant, skewness).
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Relative tolerance for decompositions and symmetry of inputs.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

pub fn sym(x: &Matrix) -> Matrix {
    (x + x.transpose()) * 0.5
}

pub fn skew(x: &Matrix) -> Matrix {
    (x - x.transpose()) * 0.5
}

/// `tr(X^T X)`, the squared Frobenius norm.
pub fn frobenius_sq(x: &Matrix) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn frobenius(x: &Matrix) -> f64 {
    frobenius_sq(x).sqrt()
}

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

pub fn is_finite(x: &Matrix) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// Builds a square matrix from rows, rejecting ragged or non-finite input.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::NotSquare { rows: n, cols: r.len() });
        }
    }
    let m = Matrix::from_fn(n, n, |i, j| rows[i][j]);
    if !is_finite(&m) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

pub fn to_rows(x: &Matrix) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| x[(i, j)]).collect())
        .collect()
}

fn ensure_square(x: &Matrix) -> Result<usize> {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return Err(Error::NotSquare { rows: x.nrows(), cols: x.ncols() });
    }
    Ok(x.nrows())
}

/// An element of SO(n).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation(Matrix);

impl Rotation {
    pub fn identity(n: usize) -> Self {
        Rotation(identity(n))
    }

    /// Validates `R^T R = 1` and `det R = 1` within [`STRUCTURE_TOL`].
    pub fn try_new(m: Matrix) -> Result<Self> {
        let n = ensure_square(&m)?;
        if !is_finite(&m) {
            return Err(Error::NonFinite);
        }
        let defect = frobenius(&(m.transpose() * &m - identity(n)));
        if defect > STRUCTURE_TOL * n as f64 {
            return Err(Error::NotRotation(format!("|R^T R - 1| = {defect:e}")));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > STRUCTURE_TOL * n as f64 {
            return Err(Error::NotRotation(format!("det R = {det}")));
        }
        Ok(Rotation(m))
    }

    /// Wraps a matrix known to be a rotation up to rounding.
    pub(crate) fn from_matrix_unchecked(m: Matrix) -> Self {
        debug_assert!(m.is_square());
        Rotation(m)
    }

    /// Planar rotation `[[cos a, -sin a], [sin a, cos a]]`.
    pub fn planar(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Rotation(Matrix::from_row_slice(2, 2, &[c, -s, s, c]))
    }

    /// Rotation by `angle` in the coordinate plane `(i, j)` of R^n, taking
    /// `e_i` towards `e_j`.
    pub fn coordinate_plane(n: usize, i: usize, j: usize, angle: f64) -> Self {
        assert!(i < n && j < n && i != j);
        let (s, c) = angle.sin_cos();
        let mut m = identity(n);
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        Rotation(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation(&self.0 * &other.0)
    }

    /// Conjugation `Q R Q^T`.
    pub fn conjugate_by(&self, q: &Rotation) -> Self {
        Rotation(&q.0 * &self.0 * q.0.transpose())
    }

    /// Frobenius distance to another rotation.
    pub fn distance(&self, other: &Rotation) -> f64 {
        frobenius(&(&self.0 - &other.0))
    }
}

impl Deref for Rotation {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

/// Eigen-decomposition `S = frame * diag(values) * frame^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Non-increasing.
    pub values: Vec<f64>,
    /// Columns are eigenvectors, `det = +1`.
    pub frame: Rotation,
}

impl SpectralData {
    pub fn reconstruct(&self) -> Matrix {
        self.frame.matrix() * diag(&self.values) * self.frame.matrix().transpose()
    }

    pub(crate) fn from_sorted(values: Vec<f64>, mut frame: Matrix) -> Self {
        let n = frame.ncols();
        if frame.determinant() < 0.0 {
            let mut last = frame.column_mut(n - 1);
            last.neg_mut();
        }
        SpectralData { values, frame: Rotation::from_matrix_unchecked(frame) }
    }
}

/// Stable permutation putting `values` in non-increasing order.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn permute_columns(m: &Matrix, order: &[usize]) -> Matrix {
    Matrix::from_fn(m.nrows(), order.len(), |i, j| m[(i, order[j])])
}

pub fn sym_eig(s: &Matrix) -> Result<SpectralData> {
    ensure_square(s)?;
    if !is_finite(s) {
        return Err(Error::NonFinite);
    }
    let asym = frobenius(&skew(s));
    if asym > RECONSTRUCTION_TOL * (1.0 + frobenius(s)) {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = SymmetricEigen::new(sym(s));
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = descending_order(&raw);
    let values = order.iter().map(|&i| raw[i]).collect();
    Ok(SpectralData::from_sorted(values, permute_columns(&eig.eigenvectors, &order)))
}

/// `F = left * diag(values) * right^T` with non-increasing `values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub left: Matrix,
    pub values: Vec<f64>,
    pub right: Matrix,
}

impl Svd {
    pub fn reconstruct(&self) -> Matrix {
        &self.left * diag(&self.values) * self.right.transpose()
    }
}

/// Singular value decomposition with descending singular values.
///
/// The input must be square and finite.
pub fn svd_ordered(f: &Matrix) -> Svd {
    assert!(f.is_square(), "svd_ordered expects a square matrix");
    debug_assert!(is_finite(f));
    let svd = SVD::new(f.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd.v_t.expect("right singular vectors requested").transpose();
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending_order(&raw);
    Svd {
        left: permute_columns(&u, &order),
        values: order.iter().map(|&i| raw[i]).collect(),
        right: permute_columns(&v, &order),
    }
}

/// Nearest rotation in the Frobenius sense, for a matrix with positive
/// determinant.
pub fn nearest_rotation(m: &Matrix) -> Rotation {
    let svd = svd_ordered(m);
    Rotation::from_matrix_unchecked(&svd.left * svd.right.transpose())
}

/// Matrix exponential of a skew-symmetric matrix.
pub fn skew_exp(a: &Matrix) -> Result<Rotation> {
    let n = ensure_square(a)?;
    if !is_finite(a) {
        return Err(Error::NonFinite);
    }
    let asym = frobenius(&sym(a));
    if asym > STRUCTURE_TOL * (1.0 + frobenius(a)) {
        return Err(Error::NotSkew(asym));
    }
    let a = skew(a);
    Ok(match n {
        1 => Rotation::identity(1),
        2 => Rotation::planar(a[(1, 0)]),
        3 => rodrigues(&a),
        _ => Rotation::from_matrix_unchecked(a.exp()),
    })
}

fn rodrigues(a: &Matrix) -> Rotation {
    let theta_sq = a[(2, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 0)].powi(2);
    let theta = theta_sq.sqrt();
    // sin(t)/t and (1 - cos t)/t^2, with series near zero
    let (k1, k2) = if theta < 1e-4 {
        (1.0 - theta_sq / 6.0, 0.5 - theta_sq / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    let a2 = a * a;
    Rotation::from_matrix_unchecked(identity(3) + a * k1 + a2 * k2)
}

/// Skew matrix with `A[(j, i)] = w`, `A[(i, j)] = -w`, i.e. the generator of
/// [`Rotation::coordinate_plane`].
pub fn plane_generator(n: usize, i: usize, j: usize) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    a[(j, i)] = 1.0;
    a[(i, j)] = -1.0;
    a
}

/// Orthonormal basis of so(n) under the Frobenius inner product, ordered
/// by `(i, j)` with `i < j`.
pub fn skew_basis(n: usize) -> Vec<Matrix> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    for i in 0..n {
        for j in i + 1..n {
            basis.push(plane_generator(n, i, j) * scale);
        }
    }
    basis
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = angle.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    if a <= -PI {
        a = PI;
    }
    a
}
