//! Closed-form solution in three dimensions.
//!
//! In the non-classical regime the optimal rotations differ from `polar(F)`
//! by a rotation about `q3`, the eigenvector of `U` for the smallest
//! singular value, by the angle `arccos(rho / (nu1 + nu2))`. This happens
//! only once the maximal mean planar stretch exceeds `rho / 2`.

use serde::Serialize;

use crate::energy::{rescale, CosseratWeights, DeformationGradient, Regime};
use crate::error::{Error, Result};
use crate::matcore::{Matrix, Rotation};

/// Relative tolerance deciding `nu1 + nu2 = rho`.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Domain {
    Classical,
    Boundary,
    NonClassical,
}

/// Compares a stretch sum (`nu1 + nu2`, or `tr U` in 2D) against `rho`.
pub fn classify_sum(sum: f64, rho: f64) -> Domain {
    if (sum - rho).abs() <= BOUNDARY_TOL * rho {
        Domain::Boundary
    } else if sum < rho {
        Domain::Classical
    } else {
        Domain::NonClassical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BranchLabel {
    /// The polar factor, which is the unique minimizer.
    Polar,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpatialSolution {
    pub regime: Regime,
    /// `rpolar^+ = polar Q R_hat^- Q^T` and `rpolar^- = polar Q R_hat^+ Q^T`,
    /// or the polar factor alone.
    #[serde(skip)]
    pub minimizers: Vec<Rotation>,
    pub labels: Vec<BranchLabel>,
    /// `beta_hat` of `R_hat^+`, `R_hat^-` (or `0`).
    pub relative_angles: Vec<f64>,
    /// `q3`.
    pub axis: [f64; 3],
    pub reduced_energy: f64,
    pub domain: Domain,
    /// `(nu1 + nu2) / 2` of the rescaled gradient (of `F` itself for
    /// classical weights).
    pub u_mmp: f64,
    pub s_mmp: f64,
    /// Repeated singular values: the minimizers are representatives of a
    /// non-isolated family.
    pub degenerate: bool,
}

fn require_spatial(f: &DeformationGradient) -> Result<()> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: f.dim() });
    }
    Ok(())
}

fn require_non_classical(w: &CosseratWeights) -> Result<f64> {
    w.singular_radius().ok_or(Error::Regime { mu: w.mu(), muc: w.muc() })
}

/// Rotation about `e3` by `beta`.
pub fn about_e3(beta: f64) -> Rotation {
    Rotation::coordinate_plane(3, 0, 1, beta)
}

/// `R_hat^+` and `R_hat^-`, rotations about `e3` by `+-arccos(rho/(nu1+nu2))`,
/// or the identity on the classical side and at the branch point.
pub fn relative_rotation_3d(w: &CosseratWeights, f: &DeformationGradient) -> Result<Vec<Rotation>> {
    require_spatial(f)?;
    let rho = require_non_classical(w)?;
    let nu = f.singular_values();
    Ok(match classify_sum(nu[0] + nu[1], rho) {
        Domain::NonClassical => {
            let b = (rho / (nu[0] + nu[1])).acos();
            vec![about_e3(b), about_e3(-b)]
        }
        _ => vec![Rotation::identity(3)],
    })
}

pub fn classify_domain(w: &CosseratWeights, f: &DeformationGradient) -> Result<Domain> {
    require_spatial(f)?;
    let rho = require_non_classical(w)?;
    let nu = f.singular_values();
    Ok(classify_sum(nu[0] + nu[1], rho))
}

fn is_degenerate(nu: &[f64]) -> bool {
    let scale = nu[0].max(1.0);
    nu.windows(2).any(|p| (p[0] - p[1]).abs() <= 1e-10 * scale)
}

pub fn rpolar_3d(w: &CosseratWeights, f: &DeformationGradient) -> Result<SpatialSolution> {
    require_spatial(f)?;
    let polar = &f.polar().rotation;
    let q = f.polar().frame();
    let axis = [q[(0, 2)], q[(1, 2)], q[(2, 2)]];
    let nu = f.singular_values();
    let reduced_energy = wred_3d(w, f)?;
    let degenerate = is_degenerate(nu);

    let Some(rho) = w.singular_radius() else {
        let u_mmp = 0.5 * (nu[0] + nu[1]);
        return Ok(SpatialSolution {
            regime: Regime::Classical,
            minimizers: vec![polar.clone()],
            labels: vec![BranchLabel::Polar],
            relative_angles: vec![0.0],
            axis,
            reduced_energy,
            domain: Domain::Classical,
            u_mmp,
            s_mmp: u_mmp - 1.0,
            degenerate,
        });
    };

    let rescaled = rescale(w, f)?;
    let u_mmp = 0.5 * rescaled.singular_values()[..2].iter().sum::<f64>();
    let domain = classify_sum(nu[0] + nu[1], rho);
    let (minimizers, labels, relative_angles) = match domain {
        Domain::NonClassical => {
            let b = (rho / (nu[0] + nu[1])).acos();
            let branch = |beta: f64| {
                let rel = about_e3(-beta).conjugate_by(q);
                polar.compose(&rel)
            };
            (
                vec![branch(b), branch(-b)],
                vec![BranchLabel::Plus, BranchLabel::Minus],
                vec![b, -b],
            )
        }
        _ => (vec![polar.clone()], vec![BranchLabel::Polar], vec![0.0]),
    };
    Ok(SpatialSolution {
        regime: Regime::NonClassical,
        minimizers,
        labels,
        relative_angles,
        axis,
        reduced_energy,
        domain,
        u_mmp,
        s_mmp: u_mmp - 1.0,
        degenerate,
    })
}

/// Reduced energy in terms of singular values.
///
/// `mu |U - 1|^2` on the classical side (and for classical weights), and
/// `mu |U - 1|^2 - (mu - mu_c)/2 (nu1 + nu2 - rho)^2` beyond the branch point,
/// which for `(1, 0)` is `(nu1 - nu2)^2 / 2 + (nu3 - 1)^2`. The expression is
/// continuous across `nu1 + nu2 = rho`.
pub fn wred_3d(w: &CosseratWeights, f: &DeformationGradient) -> Result<f64> {
    require_spatial(f)?;
    Ok(wred_3d_from_singular_values(w, f.singular_values()))
}

pub(crate) fn wred_3d_from_singular_values(w: &CosseratWeights, nu: &[f64]) -> f64 {
    let classical = w.mu() * nu.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
    match w.singular_radius() {
        Some(rho) if classify_sum(nu[0] + nu[1], rho) == Domain::NonClassical => {
            classical - 0.5 * (w.mu() - w.muc()) * (nu[0] + nu[1] - rho).powi(2)
        }
        _ => classical,
    }
}

/// Split of the non-classical reduced energy into the contributions of the
/// symmetric and the skew part of `R_hat D - 1` at the minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyTerms {
    /// `mu |sym(R_hat D - 1)|^2 = mu/2 (nu1 - nu2)^2 + mu (nu3 - 1)^2 + mu_c rho (rho - 2) / 2`.
    pub symmetric: f64,
    /// `mu_c |skew(R_hat D - 1)|^2 = mu_c/2 ((nu1 + nu2)^2 - rho^2)`; vanishes
    /// exactly at the branch point.
    pub skew: f64,
}

/// Only meaningful for `nu1 + nu2 >= rho`.
pub fn nonclassical_energy_terms(w: &CosseratWeights, nu: &[f64; 3]) -> Result<EnergyTerms> {
    let rho = require_non_classical(w)?;
    let a = nu[0] + nu[1];
    let skew = 0.5 * w.muc() * (a * a - rho * rho);
    let total = wred_3d_from_singular_values(w, nu);
    Ok(EnergyTerms { symmetric: total - skew, skew })
}

/// Unit eigenvectors `(q1, q2, q3)` of `U`; `q1, q2` span the plane of
/// maximal stretch and `q3` is the axis of `polar(F)^T rpolar(F)`.
pub fn plane_of_max_stretch(f: &DeformationGradient) -> Result<[[f64; 3]; 3]> {
    require_spatial(f)?;
    let nu = f.singular_values();
    if nu[1] - nu[2] <= 1e-10 * nu[0] {
        return Err(Error::DegenerateSpectrum(format!(
            "nu2 = {} and nu3 = {} coincide, the plane of maximal stretch is not unique",
            nu[1], nu[2]
        )));
    }
    let q: &Matrix = f.polar().frame().matrix();
    Ok([0, 1, 2].map(|j| [q[(0, j)], q[(1, j)], q[(2, j)]]))
}

/// Sufficient condition `|U - 1|^2 < zeta^2 / 2` for `F` to lie in the
/// classical domain, available for `mu > mu_c > 0`.
pub fn classical_neighborhood_check(w: &CosseratWeights, f: &DeformationGradient) -> Result<bool> {
    require_spatial(f)?;
    let zeta = w.zeta().filter(|&z| z > 0.0).ok_or(Error::Regime { mu: w.mu(), muc: w.muc() })?;
    Ok(crate::polar::dist_sq_so_n(f) < 0.5 * zeta * zeta)
}

/// `det F = 1` (within `1e-10`). Such gradients always satisfy
/// `nu1 + nu2 >= 2`, so they lie in the non-classical domain of `(1, 0)`.
pub fn sl3_criterion(f: &DeformationGradient) -> Result<bool> {
    require_spatial(f)?;
    Ok((f.determinant() - 1.0).abs() <= 1e-10)
}
