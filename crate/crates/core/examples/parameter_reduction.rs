//! General weights reduce to `(1, 0)` on a rescaled gradient.

use relaxed_polar::energy::{energy, reduce_parameters};
use relaxed_polar::matcore::frobenius_sq;
use relaxed_polar::oracle::{haar_sample, restart_rng};
use relaxed_polar::{CosseratWeights, DeformationGradient};

fn main() {
    let w = CosseratWeights::new(3.0, 1.0).unwrap();
    let f = DeformationGradient::from_rows(&[vec![2.0, 0.3, 0.0], vec![-0.4, 1.5, 0.2], vec![0.1, 0.0, 0.8]]).unwrap();
    let red = reduce_parameters(&w, &f);
    println!("rho = {:?}, lambda = {:?}", w.singular_radius(), w.scaling());
    println!("reduced weights {:?}", red.weights);

    // W = mu lambda W~ + shift, with a shift that does not depend on R.
    let lambda = w.scaling().unwrap();
    let shift = w.mu() * (1.0 - 1.0 / lambda) * frobenius_sq(f.matrix()) + 3.0 * w.mu() * (1.0 - lambda);
    let mut rng = restart_rng(1, 0);
    for _ in 0..5 {
        let r = haar_sample(3, &mut rng);
        let full = energy(&w, &r, &f).unwrap();
        let reduced = energy(&red.weights, &r, &red.gradient).unwrap();
        println!("W = {full:>10.6}   mu lambda W~ + shift = {:>10.6}", w.mu() * lambda * reduced + shift);
    }
}
