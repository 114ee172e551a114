//! Relaxed polar factors of planar simple shear as the shear grows.

use relaxed_polar::planar::{optimal_angles, simple_shear};
use relaxed_polar::CosseratWeights;

fn main() {
    let w = CosseratWeights::NON_CLASSICAL;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "gamma", "tr_U", "alpha_p", "beta", "wred");
    for i in 0..=12 {
        let gamma = 0.5 * i as f64;
        let s = optimal_angles(&w, &simple_shear(gamma)).unwrap();
        let beta = s.relative_angles[0];
        println!("{gamma:>6.2} {:>10.5} {:>10.5} {beta:>10.5} {:>10.5}", s.tr_u, s.polar_angle, s.reduced_energy);
    }
    // tr U = sqrt(4 + gamma^2) crosses 2 right away, so every gamma > 0 bifurcates.
}
