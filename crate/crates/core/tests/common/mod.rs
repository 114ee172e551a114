#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use relaxed_polar::matcore::diag;
use relaxed_polar::oracle::{haar_sample, restart_rng};
use relaxed_polar::{DeformationGradient, Rotation};

pub fn rng(seed: u64) -> ChaCha8Rng {
    restart_rng(seed, 0)
}

/// Descending singular values drawn uniformly from `[lo, hi]`.
pub fn singular_values(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut nu: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    nu
}

/// `Q1 diag(nu) Q2` with Haar rotations.
pub fn with_singular_values(nu: &[f64], rng: &mut impl Rng) -> DeformationGradient {
    let q1 = haar_sample(nu.len(), rng);
    let q2 = haar_sample(nu.len(), rng);
    DeformationGradient::new(q1.matrix() * diag(nu) * q2.matrix()).unwrap()
}

pub fn random_gradient(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> DeformationGradient {
    let nu = singular_values(n, lo, hi, rng);
    with_singular_values(&nu, rng)
}

/// Equal cardinality and a matching with pairwise distance at most `tol`.
pub fn same_set(a: &[Rotation], b: &[Rotation], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        match b.iter().enumerate().find(|(j, y)| !used[*j] && x.distance(y) <= tol) {
            Some((j, _)) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

/// `W(R(alpha); F)` for a 2x2 `F`, written out entrywise.
pub fn planar_energy(mu: f64, muc: f64, f: &[[f64; 2]; 2], alpha: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    // R^T F with R = [[c, -s], [s, c]]
    let y00 = c * f[0][0] + s * f[1][0] - 1.0;
    let y01 = c * f[0][1] + s * f[1][1];
    let y10 = -s * f[0][0] + c * f[1][0];
    let y11 = -s * f[0][1] + c * f[1][1] - 1.0;
    let off_sym = 0.5 * (y01 + y10);
    let off_skew = 0.5 * (y01 - y10);
    mu * (y00 * y00 + y11 * y11 + 2.0 * off_sym * off_sym) + muc * 2.0 * off_skew * off_skew
}

fn golden_section(e: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (e(x1), e(x2));
    while b - a > 1e-13 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = e(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = e(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, e(x))
}

pub fn cyclic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Global minima of a `2 pi`-periodic function: a uniform grid of
/// `samples` angles, golden-section refinement of every discrete local
/// minimum, and the refined points within `1e-9` of the best.
pub fn grid_minima(e: impl Fn(f64) -> f64, samples: usize) -> Vec<(f64, f64)> {
    use std::f64::consts::{PI, TAU};
    let h = TAU / samples as f64;
    let values: Vec<f64> = (0..samples).map(|i| e(-PI + h * i as f64)).collect();
    let mut refined = Vec::new();
    for i in 0..samples {
        let prev = values[(i + samples - 1) % samples];
        let next = values[(i + 1) % samples];
        if values[i] <= prev && values[i] <= next {
            let a = -PI + h * i as f64;
            refined.push(golden_section(&e, a - h, a + h));
        }
    }
    let best = refined.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, v) in refined {
        if v <= best + 1e-9 && out.iter().all(|(y, _)| cyclic_distance(x, *y) > 1e-5) {
            out.push((x, v));
        }
    }
    out
}
