//! Closed forms against the numeric oracle, module by module.

mod common;

use common::*;
use relaxed_polar::energy::{energy, reduced_energy, rescale};
use relaxed_polar::matcore::{frobenius, identity, nearest_rotation, skew};
use relaxed_polar::ndim::{critical_value, enumerate_critical_partitions, realize_all};
use relaxed_polar::oracle::{critical_scan, global_minimize, haar_sample, OracleConfig};
use relaxed_polar::planar::{optimal_angles, wred_2d};
use relaxed_polar::polar::{dist_sq_so_n, tangent_bundle_dist_sq};
use relaxed_polar::spatial::wred_3d;
use relaxed_polar::{CosseratWeights, DeformationGradient};

fn cold(seed: u64, samples: usize) -> OracleConfig {
    OracleConfig::with_seed(seed).samples(samples).cold()
}

#[test]
fn reduced_weights_share_minimizers() {
    let mut rng = rng(201);
    let w = CosseratWeights::new(3.0, 1.0).unwrap();
    for i in 0..10 {
        let f = random_gradient(3, 0.2, 5.0, &mut rng);
        let ft = f.scaled(2.0 / 3.0).unwrap();
        assert_eq!(rescale(&w, &f).unwrap().matrix(), ft.matrix());
        let a = global_minimize(&w, &f, &cold(i, 24));
        let b = global_minimize(&CosseratWeights::NON_CLASSICAL, &ft, &cold(100 + i, 24));
        // Each argmin also minimizes the other problem.
        let cross_b = energy(&CosseratWeights::NON_CLASSICAL, &a.best_rotation, &ft).unwrap();
        let cross_a = energy(&w, &b.best_rotation, &f).unwrap();
        assert!((cross_b - b.best_energy).abs() < 1e-8);
        assert!((cross_a - a.best_energy).abs() < 1e-8);
    }
}

#[test]
fn reduced_energy_matches_oracle_for_mixed_weights() {
    let mut rng = rng(202);
    let pool = [(1.0, 0.0), (1.0, 0.25), (2.0, 0.5), (1.0, 1.0), (1.0, 3.0), (5.0, 4.0)];
    for i in 0..50 {
        let (mu, muc) = pool[i % pool.len()];
        let w = CosseratWeights::new(mu, muc).unwrap();
        let f = random_gradient(3, 0.2, 5.0, &mut rng);
        let res = global_minimize(&w, &f, &cold(i as u64, 24));
        assert!((res.best_energy - reduced_energy(&w, &f)).abs() < 1e-6);
    }
}

#[test]
fn grioli_on_random_gradients() {
    let mut rng = rng(203);
    for i in 0..50 {
        let f = random_gradient(3, 0.2, 5.0, &mut rng);
        let res = global_minimize(&CosseratWeights::CLASSICAL, &f, &cold(i, 16));
        assert!((res.best_energy - dist_sq_so_n(&f)).abs() < 1e-6);
        assert!(res.best_energy >= dist_sq_so_n(&f) - 1e-9);
    }
}

/// Alternating minimization of `|R^T F - 1 - A|^2` over rotations `R` and
/// skew `A`: the `R` step is a Procrustes problem, the `A` step a
/// projection.
fn joint_infimum(f: &DeformationGradient, starts: usize, seed: u64) -> f64 {
    let n = f.dim();
    let mut best = f64::INFINITY;
    for s in 0..starts {
        let r0 = haar_sample(n, &mut relaxed_polar::oracle::restart_rng(seed, s as u64));
        let mut a = skew(&(r0.matrix().transpose() * f.matrix() - identity(n)));
        let mut value = f64::INFINITY;
        for _ in 0..5000 {
            let b = identity(n) + &a;
            let r = nearest_rotation(&(f.matrix() * b.transpose()));
            let x = r.matrix().transpose() * f.matrix() - identity(n);
            a = skew(&x);
            let next = frobenius(&(x - &a)).powi(2);
            if (value - next).abs() < 1e-15 {
                value = next;
                break;
            }
            value = next;
        }
        best = best.min(value);
    }
    best
}

#[test]
fn tangent_bundle_distance_matches_joint_minimization() {
    let mut rng = rng(204);
    for i in 0..10 {
        let f = random_gradient(3, 0.3, 3.0, &mut rng);
        let joint = joint_infimum(&f, 10, i);
        assert!((joint - tangent_bundle_dist_sq(&f)).abs() < 1e-5, "{joint} vs {}", tangent_bundle_dist_sq(&f));
    }
}

#[test]
fn planar_grid_oracle() {
    let mut rng = rng(205);
    for i in 0..50 {
        let w = [CosseratWeights::NON_CLASSICAL, CosseratWeights::new(1.0, 0.5).unwrap()][i % 2];
        let f = random_gradient(2, 0.2, 5.0, &mut rng);
        let m = f.matrix();
        let fa = [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]];
        let minima = grid_minima(|a| planar_energy(w.mu(), w.muc(), &fa, a), 1000);
        let wred = wred_2d(&w, &f).unwrap();
        assert!((minima[0].1 - wred).abs() < 1e-6);
        for a in optimal_angles(&w, &f).unwrap().branch_angles {
            assert!((planar_energy(w.mu(), w.muc(), &fa, a) - wred).abs() < 1e-12);
        }
    }
}

#[test]
fn spatial_oracle_never_beats_closed_form() {
    let mut rng = rng(206);
    for (k, (mu, muc)) in [(1.0, 0.0), (1.0, 0.25), (1.0, 0.5)].into_iter().enumerate() {
        let w = CosseratWeights::new(mu, muc).unwrap();
        for i in 0..50 {
            let f = random_gradient(3, 0.2, 5.0, &mut rng);
            let res = global_minimize(&w, &f, &cold((k * 100 + i) as u64, 16));
            assert!(res.best_energy >= wred_3d(&w, &f).unwrap() - 1e-6);
        }
    }
}

/// Energies of all critical points from the partition census, each
/// partition counted once per realization.
fn census_energies(nu: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for p in enumerate_critical_partitions(nu).unwrap() {
        let v = critical_value(&p, nu).unwrap();
        let count = realize_all(&p, nu).unwrap().len();
        out.extend(std::iter::repeat_n(v, count));
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn critical_scan_matches_partition_census() {
    for nu in [vec![4.0, 2.0, 0.5], vec![3.0, 1.0], vec![2.5, 1.2, 0.3]] {
        let f = DeformationGradient::diagonal(&nu).unwrap();
        let found = critical_scan(&CosseratWeights::NON_CLASSICAL, &f, &cold(7, 400));
        let scanned: Vec<f64> = found.iter().map(|c| c.energy).collect();
        let census = census_energies(&nu);
        assert_eq!(scanned.len(), census.len(), "scan {scanned:?}\ncensus {census:?}");
        for (a, b) in scanned.iter().zip(&census) {
            assert!((a - b).abs() < 1e-8, "scan {scanned:?}\ncensus {census:?}");
        }
        assert!(found.iter().all(|c| c.certificate.unwrap() <= 1e-8));
    }
}

#[test]
fn critical_scan_for_general_weights_uses_rescaled_census() {
    let w = CosseratWeights::new(1.0, 0.5).unwrap();
    let nu = [6.4, 3.0, 1.0];
    let f = DeformationGradient::diagonal(&nu).unwrap();
    let found = critical_scan(&w, &f, &cold(8, 400));
    let scaled: Vec<f64> = nu.iter().map(|v| v / 2.0).collect();
    let census = census_energies(&scaled);
    assert_eq!(found.len(), census.len());
    let best = found.iter().map(|c| c.energy).fold(f64::INFINITY, f64::min);
    assert!((best - reduced_energy(&w, &f)).abs() < 1e-8);
}

#[test]
fn warm_and_cold_runs_agree() {
    let mut rng = rng(209);
    let f = random_gradient(4, 0.3, 3.0, &mut rng);
    let w = CosseratWeights::new(1.0, 0.2).unwrap();
    let warm = global_minimize(&w, &f, &OracleConfig::with_seed(1).samples(16));
    let cold_run = global_minimize(&w, &f, &cold(1, 64));
    assert!(warm.warm_started && !cold_run.warm_started);
    assert!((warm.best_energy - cold_run.best_energy).abs() < 1e-8);
}
