//! Numeric ground truth: Haar sampling on SO(n), Riemannian descent,
//! multi-start global minimization and a critical-point scan.
//!
//! Nothing here uses the closed forms except the optional warm starts of
//! [`global_minimize`], which [`OracleConfig::warm_starts`] switches off.
//!
//! Restart `i` draws from a ChaCha8 stream keyed by `(seed, i)`, and the
//! reduction over restarts is ordered by `(energy, i)`, so results do not
//! depend on the rayon thread count.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::energy::{energy_raw, relative_rotation, CosseratWeights, DeformationGradient};
use crate::matcore::{frobenius, frobenius_sq, identity, nearest_rotation, skew, skew_basis, skew_exp, sym, Matrix, Rotation};
use crate::ndim;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    /// Random restarts.
    pub samples: usize,
    /// Descent steps per restart.
    pub max_iters: usize,
    pub step_init: f64,
    /// Stationarity threshold on the gradient norm.
    pub tol_grad: f64,
    pub seed: u64,
    /// Also start from `polar(F)` and the closed-form minimizers.
    pub warm_starts: bool,
}

impl OracleConfig {
    pub fn with_seed(seed: u64) -> Self {
        OracleConfig { samples: 2000, max_iters: 500, step_init: 0.1, tol_grad: 1e-10, seed, warm_starts: true }
    }

    pub fn cold(mut self) -> Self {
        self.warm_starts = false;
        self
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    #[serde(skip)]
    pub best_rotation: Rotation,
    pub best_energy: f64,
    pub grad_norm_at_best: f64,
    pub restarts_converged: usize,
    /// Index of the winning start; warm starts come first.
    pub best_start: usize,
    pub warm_started: bool,
}

impl OracleResult {
    pub fn converged(&self, cfg: &OracleConfig) -> bool {
        self.grad_norm_at_best <= cfg.tol_grad
    }
}

/// RNG of restart `index`.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform rotation: QR of a Gaussian matrix with the signs of `R`'s
/// diagonal moved into `Q`, then one column negated if `det Q = -1`.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Rotation {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Rotation::from_matrix_unchecked(q)
}

/// Body-frame Riemannian gradient `G = -2 skew(M Y^T)` with `Y = R^T F`,
/// `M = mu sym(Y - 1) + mu_c skew(Y - 1)`, so that
/// `d/ds W(R exp(s A)) = <G, A>` at `s = 0`.
pub fn gradient(w: &CosseratWeights, r: &Matrix, f: &Matrix) -> Matrix {
    let y = r.transpose() * f;
    let x = &y - identity(f.nrows());
    let m = sym(&x) * w.mu() + skew(&x) * w.muc();
    skew(&(m * y.transpose())) * -2.0
}

fn retract(r: &Matrix, a: &Matrix) -> Matrix {
    r * skew_exp(a).expect("finite skew step").matrix()
}

/// Tangent coordinates in the orthonormal basis of so(n).
struct Chart {
    basis: Vec<Matrix>,
}

impl Chart {
    fn new(n: usize) -> Self {
        Chart { basis: skew_basis(n) }
    }

    fn coords(&self, a: &Matrix) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| a.dot(b)))
    }

    fn matrix(&self, v: &DVector<f64>) -> Matrix {
        let n = self.basis.first().map_or(1, |b| b.nrows());
        self.basis.iter().zip(v.iter()).fold(Matrix::zeros(n, n), |acc, (b, c)| acc + b * *c)
    }

    /// Central-difference Jacobian of the gradient coordinates along
    /// `R exp(h B_k)`, symmetrized.
    fn hessian(&self, w: &CosseratWeights, r: &Matrix, f: &Matrix) -> nalgebra::DMatrix<f64> {
        let d = self.basis.len();
        let h = 1e-6;
        let mut jac = nalgebra::DMatrix::zeros(d, d);
        for (k, b) in self.basis.iter().enumerate() {
            let plus = self.coords(&gradient(w, &retract(r, &(b * h)), f));
            let minus = self.coords(&gradient(w, &retract(r, &(b * -h)), f));
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        (&jac + jac.transpose()) * 0.5
    }
}

#[derive(Debug, Clone)]
pub struct Descent {
    pub rotation: Rotation,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// Energy after each accepted step, starting with the initial energy.
    pub trace: Vec<f64>,
}

/// Energies that agree to within rounding of an `O(energy)` sum.
fn roundoff(e: f64) -> f64 {
    1e-14 * (1.0 + e.abs())
}

/// Gradient descent `R <- R exp(-t G)` with Barzilai-Borwein steps and
/// Armijo backtracking, then Newton polishing once the energy stalls at
/// rounding level. Newton steps are only taken at positive definite
/// Hessians and only kept when they reduce the gradient without raising the
/// energy beyond rounding.
pub fn riemannian_descent(
    w: &CosseratWeights,
    f: &DeformationGradient,
    r0: &Rotation,
    cfg: &OracleConfig,
) -> Descent {
    let fm = f.matrix();
    let n = fm.nrows();
    let chart = Chart::new(n);
    let mut r = r0.matrix().clone();
    let mut e = energy_raw(w, &r, fm);
    let mut g = gradient(w, &r, fm);
    let mut gn = frobenius(&g);
    let mut trace = vec![e];
    let mut t = cfg.step_init;
    let mut prev: Option<(Matrix, f64)> = None;
    let mut iterations = 0;

    while iterations < cfg.max_iters && gn > cfg.tol_grad {
        if let Some((g_prev, t_prev)) = &prev {
            let y = &g - g_prev;
            let sy = -t_prev * g_prev.dot(&y);
            let ss = t_prev * t_prev * frobenius_sq(g_prev);
            if sy > 0.0 {
                t = (ss / sy).clamp(1e-6 * cfg.step_init, 1e6 * cfg.step_init);
            }
        }
        let mut accepted = None;
        while t > 1e-18 {
            let cand = retract(&r, &(&g * -t));
            let ec = energy_raw(w, &cand, fm);
            if ec <= e - 1e-4 * t * gn * gn {
                accepted = Some((cand, ec));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, ec)) = accepted else { break };
        iterations += 1;
        r = if iterations % 25 == 0 { nearest_rotation(&cand).into_matrix() } else { cand };
        e = ec;
        prev = Some((g, t));
        g = gradient(w, &r, fm);
        gn = frobenius(&g);
        trace.push(e);
    }

    let mut newton = 0;
    while gn > cfg.tol_grad && newton < 20 && iterations < cfg.max_iters + 20 {
        newton += 1;
        let h = chart.hessian(w, &r, fm);
        let Some(chol) = h.cholesky() else { break };
        let step = chol.solve(&-chart.coords(&g));
        if !step.iter().all(|v| v.is_finite()) || step.norm() > 0.5 {
            break;
        }
        let cand = nearest_rotation(&retract(&r, &chart.matrix(&step))).into_matrix();
        let ec = energy_raw(w, &cand, fm);
        let gc = gradient(w, &cand, fm);
        let gcn = frobenius(&gc);
        if gcn >= gn || ec > e + roundoff(e) {
            break;
        }
        iterations += 1;
        r = cand;
        e = ec;
        g = gc;
        gn = gcn;
        trace.push(e);
    }
    let energy = energy_raw(w, &r, fm);
    Descent { rotation: Rotation::from_matrix_unchecked(r), energy, grad_norm: gn, iterations, trace }
}

/// Starting rotations: the warm starts (if enabled) followed by
/// `cfg.samples` Haar samples.
fn starts(w: &CosseratWeights, f: &DeformationGradient, cfg: &OracleConfig) -> Vec<Rotation> {
    let mut out = Vec::new();
    if cfg.warm_starts {
        out.push(f.polar().rotation.clone());
        out.extend(ndim::rpolar_nd(w, f));
    }
    let offset = out.len() as u64;
    out.extend(
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| haar_sample(f.dim(), &mut restart_rng(cfg.seed, offset + i)))
            .collect::<Vec<_>>(),
    );
    out
}

/// Best of the descents from all starts.
pub fn global_minimize(w: &CosseratWeights, f: &DeformationGradient, cfg: &OracleConfig) -> OracleResult {
    let starts = starts(w, f, cfg);
    let runs: Vec<Descent> = starts.par_iter().map(|r0| riemannian_descent(w, f, r0, cfg)).collect();
    let restarts_converged = runs.iter().filter(|d| d.grad_norm <= cfg.tol_grad).count();
    let (best_start, best) = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.energy.total_cmp(&b.energy).then(i.cmp(j)))
        .expect("at least one start");
    OracleResult {
        best_rotation: best.rotation.clone(),
        best_energy: best.energy,
        grad_norm_at_best: best.grad_norm,
        restarts_converged,
        best_start,
        warm_started: cfg.warm_starts,
    }
}

/// `atan2(R_hat[1,0], R_hat[0,0])` of the relative rotation `R_hat`, the
/// rotation angle in the plane of the two largest singular values.
pub fn relative_angle(r: &Rotation, f: &DeformationGradient) -> f64 {
    let rel = relative_rotation(r, f).expect("dimensions match");
    rel[(1, 0)].atan2(rel[(0, 0)])
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalEstimate {
    #[serde(skip)]
    pub rotation: Rotation,
    pub energy: f64,
    pub grad_norm: f64,
    /// `|skew((R_hat D~ - 1)^2)|` for the rescaled diagonal `D~`; `None`
    /// for classical weights.
    pub certificate: Option<f64>,
    /// Number of starts that landed here.
    pub hits: usize,
}

/// Symmetric-square certificate of a critical point in the non-classical
/// regime.
pub fn symmetric_square_residual(w: &CosseratWeights, r: &Rotation, f: &DeformationGradient) -> Option<f64> {
    let rho = w.singular_radius()?;
    let n = f.dim();
    let rel = relative_rotation(r, f).expect("dimensions match");
    let scaled: Vec<f64> = f.singular_values().iter().map(|v| v * 2.0 / rho).collect();
    let x = rel.matrix() * crate::matcore::diag(&scaled) - identity(n);
    Some(frobenius(&skew(&(&x * &x))))
}

/// Damped Newton (Levenberg-Marquardt) on `G(R) = 0`.
fn newton_to_critical(w: &CosseratWeights, fm: &Matrix, r0: &Matrix, chart: &Chart, tol: f64) -> (Matrix, f64) {
    let mut r = r0.clone();
    let mut g = chart.coords(&gradient(w, &r, fm));
    let mut gn = g.norm();
    let mut lambda = 1e-3;
    for _ in 0..200 {
        if gn <= tol {
            break;
        }
        let h = chart.hessian(w, &r, fm);
        let d = h.nrows();
        let lhs = h.transpose() * &h + nalgebra::DMatrix::identity(d, d) * lambda;
        let Some(chol) = lhs.cholesky() else { break };
        let mut step = chol.solve(&-(h.transpose() * &g));
        let norm = step.norm();
        if norm > 0.5 {
            step *= 0.5 / norm;
        }
        let cand = nearest_rotation(&retract(&r, &chart.matrix(&step))).into_matrix();
        let gc = chart.coords(&gradient(w, &cand, fm));
        let gcn = gc.norm();
        if gcn < gn {
            r = cand;
            g = gc;
            gn = gcn;
            lambda = (lambda / 3.0).max(1e-15);
        } else {
            lambda *= 4.0;
            if lambda > 1e8 {
                break;
            }
        }
    }
    (r, gn)
}

/// Distinct critical points found by damped Newton from `cfg.samples` Haar
/// starts and from every sign pattern `polar(F) Q S Q^T` (`S` diagonal with
/// entries `+-1`, `det S = 1`).
///
/// Endpoints with gradient norm above `1e-8 (mu + mu_c)(1 + |F|^2)` or a
/// symmetric-square residual above `1e-8` are dropped. Two endpoints are
/// the same point when their energies differ by at most `1e-6` and their
/// distance is below `0.05`; at degenerate critical points damped Newton
/// stalls at a distance of order `tol^(1/3)`, so a tighter radius splits
/// one point into several. Output is sorted by energy.
pub fn critical_scan(w: &CosseratWeights, f: &DeformationGradient, cfg: &OracleConfig) -> Vec<CriticalEstimate> {
    let n = f.dim();
    let fm = f.matrix();
    let chart = Chart::new(n);
    let scale = (w.mu() + w.muc()) * (1.0 + frobenius_sq(fm));
    let tol = 1e-12 * scale;

    let mut initial: Vec<Matrix> = Vec::new();
    let q = f.polar().frame().matrix();
    let polar = f.polar().rotation.matrix();
    for bits in 0u32..1 << n {
        if bits.count_ones() % 2 == 0 {
            let s: Vec<f64> = (0..n).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            initial.push(polar * q * crate::matcore::diag(&s) * q.transpose());
        }
    }
    initial.extend(
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|i| haar_sample(n, &mut restart_rng(cfg.seed, i)).into_matrix())
            .collect::<Vec<_>>(),
    );

    let endpoints: Vec<(Matrix, f64)> = initial.par_iter().map(|r0| newton_to_critical(w, fm, r0, &chart, tol)).collect();

    let mut found: Vec<(usize, CriticalEstimate)> = Vec::new();
    for (idx, (r, gn)) in endpoints.into_iter().enumerate() {
        if gn > 1e-8 * scale {
            continue;
        }
        let rot = Rotation::from_matrix_unchecked(r);
        let certificate = symmetric_square_residual(w, &rot, f);
        if certificate.is_some_and(|c| c > 1e-8) {
            continue;
        }
        let e = energy_raw(w, rot.matrix(), fm);
        if let Some((_, c)) = found
            .iter_mut()
            .find(|(_, c)| (c.energy - e).abs() <= 1e-6 && c.rotation.distance(&rot) < 0.05)
        {
            c.hits += 1;
            continue;
        }
        found.push((idx, CriticalEstimate { rotation: rot, energy: e, grad_norm: gn, certificate, hits: 1 }));
    }
    found.sort_by(|(i, a), (j, b)| a.energy.total_cmp(&b.energy).then(i.cmp(j)));
    found.into_iter().map(|(_, c)| c).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy, reduced_energy};
    use crate::matcore::diag;

    fn random_gradient(n: usize, rng: &mut impl Rng) -> DeformationGradient {
        loop {
            let m = Matrix::from_fn(n, n, |i, j| if i == j { 1.5 } else { 0.0 } + rng.random_range(-1.5..1.5));
            if let Ok(f) = DeformationGradient::new(m) {
                if f.singular_values().iter().all(|v| *v > 0.1) {
                    return f;
                }
            }
        }
    }

    fn quick(seed: u64) -> OracleConfig {
        OracleConfig::with_seed(seed).samples(24).cold()
    }

    #[test]
    fn haar_samples_are_rotations() {
        let mut rng = restart_rng(1, 0);
        assert_eq!(haar_sample(1, &mut rng).matrix(), &identity(1));
        for n in 2..=5 {
            let r = haar_sample(n, &mut rng);
            Rotation::try_new(r.matrix().clone()).unwrap();
            for j in 0..n {
                assert!((r.column(j).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_mean_trace_vanishes() {
        let mut rng = restart_rng(2, 0);
        let traces: Vec<f64> = (0..100_000).map(|_| haar_sample(3, &mut rng).trace()).collect();
        let mean = traces.iter().sum::<f64>() / traces.len() as f64;
        let var = traces.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (traces.len() - 1) as f64;
        let sigma = (var / traces.len() as f64).sqrt();
        assert!(mean.abs() < 3.0 * sigma, "mean {mean}, sigma {sigma}");
        // E[tr R] = 0 and E[tr^2 R] = 1 for Haar measure on SO(3).
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = restart_rng(3, 0);
        for w in [CosseratWeights::NON_CLASSICAL, CosseratWeights::new(1.0, 0.3).unwrap(), CosseratWeights::new(2.0, 3.0).unwrap()] {
            for n in 2..=4 {
                let f = random_gradient(n, &mut rng);
                let r = haar_sample(n, &mut rng);
                let g = gradient(&w, r.matrix(), f.matrix());
                for _ in 0..20 {
                    let a = skew(&Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)));
                    let h = 1e-6;
                    let ep = energy_raw(&w, &retract(r.matrix(), &(&a * h)), f.matrix());
                    let em = energy_raw(&w, &retract(r.matrix(), &(&a * -h)), f.matrix());
                    let fd = (ep - em) / (2.0 * h);
                    let an = g.dot(&a);
                    assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn descent_from_minimizer_is_immediate() {
        let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
        let w = CosseratWeights::NON_CLASSICAL;
        for r in ndim::rpolar_nd(&w, &f) {
            let d = riemannian_descent(&w, &f, &r, &OracleConfig::with_seed(0));
            assert!(d.iterations <= 1);
            assert!((d.energy - 2.25).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_descent_reaches_polar() {
        let mut rng = restart_rng(4, 0);
        for _ in 0..10 {
            let f = random_gradient(3, &mut rng);
            let r0 = haar_sample(3, &mut rng);
            let d = riemannian_descent(&CosseratWeights::CLASSICAL, &f, &r0, &OracleConfig::with_seed(0));
            if d.grad_norm <= 1e-10 && d.energy <= reduced_energy(&CosseratWeights::CLASSICAL, &f) + 1e-9 {
                assert!(d.rotation.distance(&f.polar().rotation) < 1e-6);
            }
            for pair in d.trace.windows(2) {
                assert!(pair[1] <= pair[0] + roundoff(pair[0]));
            }
        }
    }

    #[test]
    fn global_minimize_examples() {
        let id = DeformationGradient::new(identity(3)).unwrap();
        let res = global_minimize(&CosseratWeights::NON_CLASSICAL, &id, &quick(5));
        assert!(res.best_energy.abs() < 1e-14);

        let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
        let res = global_minimize(&CosseratWeights::NON_CLASSICAL, &f, &quick(6));
        assert!((res.best_energy - 2.25).abs() < 1e-6);
        let e = energy(&CosseratWeights::NON_CLASSICAL, &res.best_rotation, &f).unwrap();
        assert!((e - res.best_energy).abs() <= 1e-14);
        assert!(res.converged(&quick(6)));
    }

    #[test]
    fn global_minimize_is_deterministic_and_sound() {
        let mut rng = restart_rng(7, 0);
        let w = CosseratWeights::new(1.0, 0.25).unwrap();
        for n in [2, 3, 4] {
            let f = random_gradient(n, &mut rng);
            let cfg = quick(8);
            let a = global_minimize(&w, &f, &cfg);
            let b = rayon::ThreadPoolBuilder::new()
                .num_threads(3)
                .build()
                .unwrap()
                .install(|| global_minimize(&w, &f, &cfg));
            assert_eq!(a.best_energy.to_bits(), b.best_energy.to_bits());
            assert_eq!(a.best_rotation, b.best_rotation);
            let wred = reduced_energy(&w, &f);
            assert!(a.best_energy >= wred - 1e-9);
            assert!(a.best_energy <= wred + 1e-6);
        }
    }

    #[test]
    fn n4_matches_general_formula() {
        let nu = [3.0, 2.5, 1.5, 0.6];
        let f = DeformationGradient::diagonal(&nu).unwrap();
        let res = global_minimize(&CosseratWeights::NON_CLASSICAL, &f, &quick(9).samples(64));
        assert!((res.best_energy - 0.53).abs() < 1e-5);
    }

    #[test]
    fn planar_scan_finds_partition_values() {
        let f = DeformationGradient::new(diag(&[3.0, 1.0])).unwrap();
        let found = critical_scan(&CosseratWeights::NON_CLASSICAL, &f, &quick(10).samples(40));
        let energies: Vec<f64> = found.iter().map(|c| c.energy).collect();
        let expected = [2.0, 2.0, 4.0, 20.0];
        assert_eq!(energies.len(), expected.len(), "{energies:?}");
        for (a, b) in energies.iter().zip(expected) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(found.iter().all(|c| c.certificate.unwrap() <= 1e-8));
    }
}
