//! Polar decomposition `F = polar(F) U` and the distances it realizes.

use crate::energy::{self, CosseratWeights, DeformationGradient};
use crate::error::{Error, Result};
use crate::matcore::{self, Matrix, Rotation, SpectralData, Svd};

/// Right polar decomposition `F = rotation * stretch`, with the spectral
/// decomposition `stretch = Q D Q^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarData {
    pub rotation: Rotation,
    pub stretch: Matrix,
    pub spectral: SpectralData,
}

impl PolarData {
    /// From `F = L diag(nu) V^T`: `polar(F) = L V^T`, `U = V diag(nu) V^T`.
    /// The spectral frame reuses `V`, so its eigenvalues are exactly the
    /// singular values.
    pub(crate) fn from_svd(svd: &Svd) -> Self {
        let rotation = Rotation::from_matrix_unchecked(&svd.left * svd.right.transpose());
        let stretch = matcore::sym(&(&svd.right * matcore::diag(&svd.values) * svd.right.transpose()));
        let spectral = SpectralData::from_sorted(svd.values.clone(), svd.right.clone());
        PolarData { rotation, stretch, spectral }
    }

    /// `Q`.
    pub fn frame(&self) -> &Rotation {
        &self.spectral.frame
    }
}

pub fn polar_decompose(f: &DeformationGradient) -> PolarData {
    f.polar().clone()
}

/// `dist^2(F, SO(n)) = |U - 1|^2 = sum (nu_i - 1)^2`, the minimum of
/// `W_{1,1}` (Grioli).
pub fn dist_sq_so_n(f: &DeformationGradient) -> f64 {
    f.singular_values().iter().map(|v| (v - 1.0).powi(2)).sum()
}

/// `(1 / tr U) [[tr F, tr JF], [-tr JF, tr F]]` with `J = [[0, -1], [1, 0]]`.
pub fn polar_2d_explicit(f: &DeformationGradient) -> Result<Rotation> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: f.dim() });
    }
    let inv = Invariants2d::of(f);
    let (c, s) = (inv.tr_f / inv.tr_u, inv.tr_jf / inv.tr_u);
    Ok(Rotation::from_matrix_unchecked(Matrix::from_row_slice(2, 2, &[c, s, -s, c])))
}

/// The planar invariants `tr F`, `tr JF` and `tr U = sqrt(|F|^2 + 2 det F)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Invariants2d {
    pub tr_f: f64,
    pub tr_jf: f64,
    pub tr_u: f64,
}

impl Invariants2d {
    pub fn of(f: &DeformationGradient) -> Self {
        let m = f.matrix();
        let tr_f = m[(0, 0)] + m[(1, 1)];
        let tr_jf = m[(0, 1)] - m[(1, 0)];
        let tr_u = (energy::norm_sq(f) + 2.0 * f.determinant()).sqrt();
        Invariants2d { tr_f, tr_jf, tr_u }
    }
}

/// `W^red_{1,0}(F)`, which equals the squared distance from `F` to
/// `SO(n)(1 + so(n))`, i.e. `inf |R^T F - 1 - A|^2` over rotations `R` and
/// skew `A`. The infimum over `A` is attained at `A = skew(R^T F - 1)`, which
/// leaves exactly the symmetric part.
pub fn tangent_bundle_dist_sq(f: &DeformationGradient) -> f64 {
    energy::reduced_energy(&CosseratWeights::NON_CLASSICAL, f)
}
