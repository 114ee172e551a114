//! The weighted Cosserat shear-stretch energy, its weights, and the
//! reduction of arbitrary weights to the two limit cases `(1, 1)` and
//! `(1, 0)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{self, frobenius_sq, identity, Matrix, Rotation, Svd};
use crate::polar::PolarData;
use crate::{ndim, planar, spatial};

/// Weights `(mu, mu_c)` of the shear-stretch energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CosseratWeights {
    mu: f64,
    muc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `mu_c >= mu`: the polar factor is the unique minimizer.
    Classical,
    /// `mu > mu_c`: minimizers may bifurcate away from the polar factor.
    NonClassical,
}

impl CosseratWeights {
    pub const CLASSICAL: CosseratWeights = CosseratWeights { mu: 1.0, muc: 1.0 };
    pub const NON_CLASSICAL: CosseratWeights = CosseratWeights { mu: 1.0, muc: 0.0 };

    pub fn new(mu: f64, muc: f64) -> Result<Self> {
        if !(mu.is_finite() && muc.is_finite() && mu > 0.0 && muc >= 0.0) {
            return Err(Error::InvalidWeights { mu, muc });
        }
        Ok(CosseratWeights { mu, muc })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn muc(&self) -> f64 {
        self.muc
    }

    /// The boundary `mu = mu_c` is classical.
    pub fn regime(&self) -> Regime {
        if self.muc >= self.mu {
            Regime::Classical
        } else {
            Regime::NonClassical
        }
    }

    /// `rho = 2 mu / (mu - mu_c)`, the bifurcation threshold for
    /// `nu_1 + nu_2`. Undefined in the classical regime.
    pub fn singular_radius(&self) -> Option<f64> {
        self.non_classical().map(|d| 2.0 * self.mu / d)
    }

    /// `lambda = mu / (mu - mu_c) = rho / 2`.
    pub fn scaling(&self) -> Option<f64> {
        self.non_classical().map(|d| self.mu / d)
    }

    /// `zeta = 2 mu_c / (mu - mu_c) = rho - 2`.
    pub fn zeta(&self) -> Option<f64> {
        self.non_classical().map(|d| 2.0 * self.muc / d)
    }

    fn non_classical(&self) -> Option<f64> {
        (self.regime() == Regime::NonClassical).then(|| self.mu - self.muc)
    }

    fn require_non_classical(&self) -> Result<f64> {
        self.non_classical().ok_or(Error::Regime { mu: self.mu, muc: self.muc })
    }
}

/// An element of GL+(n) with its ordered SVD and polar data cached.
#[derive(Debug, Clone)]
pub struct DeformationGradient {
    matrix: Matrix,
    svd: Svd,
    polar: PolarData,
}

impl DeformationGradient {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if !matcore::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let det = matrix.determinant();
        if det.is_nan() || det <= 0.0 {
            return Err(Error::NonPositiveDeterminant(det));
        }
        let svd = matcore::svd_ordered(&matrix);
        if svd.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::NonPositiveDeterminant(det));
        }
        let polar = PolarData::from_svd(&svd);
        Ok(DeformationGradient { matrix, svd, polar })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matcore::from_rows(rows)?)
    }

    /// `diag(values)`, in the given order.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(matcore::diag(values))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Singular values, non-increasing.
    pub fn singular_values(&self) -> &[f64] {
        &self.svd.values
    }

    pub fn svd(&self) -> &Svd {
        &self.svd
    }

    pub fn polar(&self) -> &PolarData {
        &self.polar
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(&self.matrix * factor)
    }

    pub fn inverse(&self) -> Self {
        let inv = self.matrix.clone().try_inverse().expect("GL+(n) is invertible");
        Self::new(inv).expect("inverse of GL+(n) lies in GL+(n)")
    }

    /// `Q F`.
    pub fn rotated_left(&self, q: &Rotation) -> Self {
        Self::new(q.matrix() * &self.matrix).expect("SO(n) action preserves GL+(n)")
    }

    /// `F Q`.
    pub fn rotated_right(&self, q: &Rotation) -> Self {
        Self::new(&self.matrix * q.matrix()).expect("SO(n) action preserves GL+(n)")
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `mu |sym(R^T F - 1)|^2 + mu_c |skew(R^T F - 1)|^2`.
pub fn energy(w: &CosseratWeights, r: &Rotation, f: &DeformationGradient) -> Result<f64> {
    check_dims(f.dim(), r.dim())?;
    Ok(energy_raw(w, r.matrix(), f.matrix()))
}

/// [`energy`] without dimension checks, on raw matrices.
pub fn energy_raw(w: &CosseratWeights, r: &Matrix, f: &Matrix) -> f64 {
    let x = r.transpose() * f - identity(f.nrows());
    let n = x.nrows();
    let mut sym_sq = 0.0;
    let mut skew_sq = 0.0;
    for i in 0..n {
        sym_sq += x[(i, i)] * x[(i, i)];
        for j in i + 1..n {
            let s = 0.5 * (x[(i, j)] + x[(j, i)]);
            let k = 0.5 * (x[(i, j)] - x[(j, i)]);
            sym_sq += 2.0 * s * s;
            skew_sq += 2.0 * k * k;
        }
    }
    w.mu * sym_sq + w.muc * skew_sq
}

/// `F / lambda = ((mu - mu_c) / mu) F`.
pub fn rescale(w: &CosseratWeights, f: &DeformationGradient) -> Result<DeformationGradient> {
    let d = w.require_non_classical()?;
    if w.muc == 0.0 {
        return Ok(f.clone());
    }
    f.scaled(d / w.mu)
}

/// A problem equivalent to the original one: same minimizer set, weights
/// reduced to `(1, 1)` or `(1, 0)`.
#[derive(Debug, Clone)]
pub struct ParameterReduction {
    pub regime: Regime,
    pub weights: CosseratWeights,
    pub gradient: DeformationGradient,
}

pub fn reduce_parameters(w: &CosseratWeights, f: &DeformationGradient) -> ParameterReduction {
    match w.regime() {
        Regime::Classical => ParameterReduction {
            regime: Regime::Classical,
            weights: CosseratWeights::CLASSICAL,
            gradient: f.clone(),
        },
        Regime::NonClassical => ParameterReduction {
            regime: Regime::NonClassical,
            weights: CosseratWeights::NON_CLASSICAL,
            gradient: rescale(w, f).expect("regime checked"),
        },
    }
}

/// `R_hat = Q^T R^T polar(F) Q`, with `Q` the cached spectral frame of `U`.
///
/// In these coordinates the energy only sees the diagonal `D` of `U`:
/// `R^T F = Q R_hat D Q^T`.
pub fn relative_rotation(r: &Rotation, f: &DeformationGradient) -> Result<Rotation> {
    check_dims(f.dim(), r.dim())?;
    let q = f.polar().spectral.frame.matrix();
    let m = q.transpose() * r.matrix().transpose() * f.polar().rotation.matrix() * q;
    Ok(Rotation::from_matrix_unchecked(m))
}

/// Inverse of [`relative_rotation`]: `R = polar(F) Q R_hat^T Q^T`.
pub fn absolute_rotation(rel: &Rotation, f: &DeformationGradient) -> Result<Rotation> {
    check_dims(f.dim(), rel.dim())?;
    let q = f.polar().spectral.frame.matrix();
    let m = f.polar().rotation.matrix() * q * rel.matrix().transpose() * q.transpose();
    Ok(Rotation::from_matrix_unchecked(m))
}

/// `min_R W(R; F)` from the closed form of the matching dimension.
pub fn reduced_energy(w: &CosseratWeights, f: &DeformationGradient) -> f64 {
    match f.dim() {
        2 => planar::wred_2d(w, f).expect("dimension checked"),
        3 => spatial::wred_3d(w, f).expect("dimension checked"),
        _ => ndim::reduced_energy_weighted(w, f.singular_values()),
    }
}

/// `|F|^2`.
pub(crate) fn norm_sq(f: &DeformationGradient) -> f64 {
    frobenius_sq(f.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{diag, frobenius, skew_exp, sym};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gradient(n: usize, rng: &mut impl Rng) -> DeformationGradient {
        loop {
            let m = Matrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            if m.determinant() > 0.1 {
                return DeformationGradient::new(m).unwrap();
            }
        }
    }

    fn random_rotation(n: usize, rng: &mut impl Rng) -> Rotation {
        let a = Matrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        skew_exp(&crate::matcore::skew(&a)).unwrap()
    }

    #[test]
    fn weights_validation_and_derived_constants() {
        assert!(CosseratWeights::new(0.0, 0.0).is_err());
        assert!(CosseratWeights::new(1.0, -0.1).is_err());
        assert!(CosseratWeights::new(f64::NAN, 0.0).is_err());
        let w = CosseratWeights::new(1.0, 0.5).unwrap();
        assert_eq!(w.singular_radius(), Some(4.0));
        assert_eq!(w.scaling(), Some(2.0));
        assert_eq!(w.zeta(), Some(2.0));
        let w = CosseratWeights::new(1.0, 0.25).unwrap();
        assert!((w.singular_radius().unwrap() - 8.0 / 3.0).abs() < 1e-15);
        let w = CosseratWeights::new(2.0, 2.0).unwrap();
        assert_eq!(w.regime(), Regime::Classical);
        assert_eq!(w.singular_radius(), None);
        assert_eq!(w.scaling(), None);
        assert_eq!(w.zeta(), None);
    }

    #[test]
    fn gradient_rejects_bad_input() {
        assert!(matches!(
            DeformationGradient::new(diag(&[1.0, -1.0])),
            Err(Error::NonPositiveDeterminant(_))
        ));
        assert!(matches!(
            DeformationGradient::new(Matrix::zeros(2, 3)),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            DeformationGradient::new(diag(&[1.0, f64::INFINITY])),
            Err(Error::NonFinite)
        ));
        assert!(DeformationGradient::new(Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn energy_at_polar_of_spd_is_stretch_distance() {
        let u = Matrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 0.7]);
        let f = DeformationGradient::new(u.clone()).unwrap();
        let w = CosseratWeights::new(1.7, 0.4).unwrap();
        let e = energy(&w, &f.polar().rotation, &f).unwrap();
        let expected = 1.7 * frobenius_sq(&(u - identity(3)));
        assert!((e - expected).abs() < 1e-12);
        let id = DeformationGradient::new(identity(3)).unwrap();
        assert_eq!(energy(&w, &Rotation::identity(3), &id).unwrap(), 0.0);
    }

    #[test]
    fn classical_limit_energy_is_full_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = random_gradient(3, &mut rng);
            let r = random_rotation(3, &mut rng);
            let direct = frobenius_sq(&(r.transpose().matrix() * f.matrix() - identity(3)));
            let e = energy(&CosseratWeights::CLASSICAL, &r, &f).unwrap();
            assert!((e - direct).abs() < 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn energy_dimension_mismatch() {
        let f = DeformationGradient::new(identity(3)).unwrap();
        assert!(matches!(
            energy(&CosseratWeights::CLASSICAL, &Rotation::identity(2), &f),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn rescale_examples() {
        let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
        let same = rescale(&CosseratWeights::NON_CLASSICAL, &f).unwrap();
        assert_eq!(same.matrix(), f.matrix());
        let half = rescale(&CosseratWeights::new(1.0, 0.5).unwrap(), &f).unwrap();
        assert_eq!(half.matrix(), &diag(&[2.0, 1.0, 0.25]));
        assert!(matches!(
            rescale(&CosseratWeights::CLASSICAL, &f),
            Err(Error::Regime { .. })
        ));
    }

    #[test]
    fn rescale_divides_singular_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = CosseratWeights::new(3.0, 1.0).unwrap();
        let lambda = w.scaling().unwrap();
        for _ in 0..10 {
            let f = random_gradient(3, &mut rng);
            let g = rescale(&w, &f).unwrap();
            for (a, b) in g.singular_values().iter().zip(f.singular_values()) {
                assert!((a - b / lambda).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduce_parameters_regimes() {
        let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
        let r = reduce_parameters(&CosseratWeights::new(2.0, 5.0).unwrap(), &f);
        assert_eq!(r.regime, Regime::Classical);
        assert_eq!(r.weights, CosseratWeights::CLASSICAL);
        assert_eq!(r.gradient.matrix(), f.matrix());
        let r = reduce_parameters(&CosseratWeights::NON_CLASSICAL, &f);
        assert_eq!(r.regime, Regime::NonClassical);
        assert_eq!(r.gradient.matrix(), f.matrix());
    }

    #[test]
    fn relative_rotation_round_trip_and_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let f = random_gradient(3, &mut rng);
            let r = random_rotation(3, &mut rng);
            let rel = relative_rotation(&r, &f).unwrap();
            let back = absolute_rotation(&rel, &f).unwrap();
            assert!(back.distance(&r) < 1e-10);

            let d = diag(f.singular_values());
            let lhs = frobenius_sq(&sym(&(r.transpose().matrix() * f.matrix() - identity(3))));
            let rhs = frobenius_sq(&sym(&(rel.matrix() * &d - identity(3))));
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs));
        }
        let f = random_gradient(3, &mut rng);
        let rel = relative_rotation(&f.polar().rotation, &f).unwrap();
        assert!(frobenius(&(rel.matrix() - identity(3))) < 1e-12);
    }

    #[test]
    fn reduced_energy_examples() {
        let id = DeformationGradient::new(identity(3)).unwrap();
        assert_eq!(reduced_energy(&CosseratWeights::new(2.0, 0.3).unwrap(), &id), 0.0);
        let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
        assert!((reduced_energy(&CosseratWeights::NON_CLASSICAL, &f) - 2.25).abs() < 1e-12);
    }
}
