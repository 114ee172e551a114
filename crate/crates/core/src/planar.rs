//! Closed-form solution of the planar problem.
//!
//! Every rotation in SO(2) is `R(alpha)`, and the whole problem is governed
//! by the invariants `tr F`, `tr JF` and `tr U`. In the non-classical regime
//! the optimal angle splits off the polar angle `alpha_p` once `tr U`
//! exceeds the singular radius `rho` (a pitchfork bifurcation).

use serde::Serialize;

use crate::energy::{CosseratWeights, DeformationGradient, Regime};
use crate::error::{Error, Result};
use crate::matcore::{wrap_angle, Matrix, Rotation};
use crate::polar::Invariants2d;
use crate::spatial::{classify_sum, Domain};

#[derive(Debug, Clone, Serialize)]
pub struct PlanarSolution {
    /// `alpha_p` in `(-pi, pi]`.
    pub polar_angle: f64,
    /// Absolute optimal angles, `alpha = alpha_p - beta` for each relative
    /// angle `beta`, wrapped to `(-pi, pi]`.
    pub branch_angles: Vec<f64>,
    /// `{0}` or `{+beta, -beta}`.
    pub relative_angles: Vec<f64>,
    #[serde(skip)]
    pub minimizers: Vec<Rotation>,
    pub reduced_energy: f64,
    pub bifurcated: bool,
    pub tr_u: f64,
    pub domain: Domain,
}

fn require_planar(f: &DeformationGradient) -> Result<()> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: f.dim() });
    }
    Ok(())
}

/// `alpha_p` with `sin alpha_p = -tr JF / tr U` and `cos alpha_p = tr F / tr U`,
/// so that `R(alpha_p) = polar(F)`.
pub fn polar_angle(f: &DeformationGradient) -> Result<f64> {
    require_planar(f)?;
    let inv = Invariants2d::of(f);
    Ok(wrap_angle((-inv.tr_jf).atan2(inv.tr_f)))
}

/// Solutions of `tr(R(beta) D) = 2` for `D = diag(d1, d2) > 0`; `{0}` when
/// `tr D <= 2`.
pub fn relative_angles_10(d1: f64, d2: f64) -> Vec<f64> {
    let tr = d1 + d2;
    if tr > 2.0 {
        let b = (2.0 / tr).acos();
        vec![b, -b]
    } else {
        vec![0.0]
    }
}

/// Positive branch `arccos(rho / tr_u)` of the pitchfork, or 0 on the
/// classical side and at the branch point.
pub fn branch_angle(tr_u: f64, rho: f64) -> f64 {
    match classify_sum(tr_u, rho) {
        Domain::NonClassical => (rho / tr_u).acos(),
        _ => 0.0,
    }
}

pub fn optimal_angles(w: &CosseratWeights, f: &DeformationGradient) -> Result<PlanarSolution> {
    require_planar(f)?;
    let alpha_p = polar_angle(f)?;
    let inv = Invariants2d::of(f);
    let reduced_energy = wred_2d(w, f)?;
    let (domain, relative_angles) = match w.singular_radius() {
        None => (Domain::Classical, vec![0.0]),
        Some(rho) => match classify_sum(inv.tr_u, rho) {
            Domain::NonClassical => {
                let b = (rho / inv.tr_u).acos();
                (Domain::NonClassical, vec![b, -b])
            }
            d => (d, vec![0.0]),
        },
    };
    let branch_angles: Vec<f64> = relative_angles.iter().map(|b| wrap_angle(alpha_p - b)).collect();
    let minimizers = branch_angles.iter().map(|&a| Rotation::planar(a)).collect();
    Ok(PlanarSolution {
        polar_angle: alpha_p,
        bifurcated: relative_angles.len() == 2,
        branch_angles,
        relative_angles,
        minimizers,
        reduced_energy,
        tr_u: inv.tr_u,
        domain,
    })
}

/// Reduced energy from the invariants `|F|^2` and `det F` alone.
///
/// With `t = tr U = sqrt(|F|^2 + 2 det F)` and `|U - 1|^2 = |F|^2 - 2t + 2`:
/// `mu |U - 1|^2` on the classical side, and
/// `mu |U - 1|^2 - (mu - mu_c)/2 (t - rho)^2` beyond the branch point. For
/// `(1, 0)` the latter is `|F|^2 / 2 - det F`.
pub fn wred_2d(w: &CosseratWeights, f: &DeformationGradient) -> Result<f64> {
    require_planar(f)?;
    let norm_sq = crate::energy::norm_sq(f);
    let t = Invariants2d::of(f).tr_u;
    let dist = (norm_sq - 2.0 * t + 2.0).max(0.0);
    let classical = w.mu() * dist;
    Ok(match (w.regime(), w.singular_radius()) {
        (Regime::NonClassical, Some(rho)) if t > rho => {
            (classical - 0.5 * (w.mu() - w.muc()) * (t - rho).powi(2)).max(0.0)
        }
        _ => classical,
    })
}

/// `F = [[1, gamma], [0, 1]]`.
pub fn simple_shear(gamma: f64) -> DeformationGradient {
    DeformationGradient::new(Matrix::from_row_slice(2, 2, &[1.0, gamma, 0.0, 1.0]))
        .expect("simple shear has det 1")
}
