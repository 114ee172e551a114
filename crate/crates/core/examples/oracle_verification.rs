//! Closed-form minima against a cold multi-start Riemannian descent.

use relaxed_polar::energy::reduced_energy;
use relaxed_polar::oracle::{global_minimize, haar_sample, restart_rng, OracleConfig};
use relaxed_polar::{CosseratWeights, DeformationGradient};

fn main() {
    let cfg = OracleConfig::with_seed(42).samples(64).cold();
    let mut rng = restart_rng(7, 0);
    for (n, mu, muc) in [(2, 1.0, 0.0), (3, 1.0, 0.3), (3, 2.0, 5.0), (4, 1.0, 0.0), (5, 1.0, 0.5)] {
        let w = CosseratWeights::new(mu, muc).unwrap();
        let q1 = haar_sample(n, &mut rng);
        let q2 = haar_sample(n, &mut rng);
        let nu: Vec<f64> = (0..n).map(|i| 3.0 - 0.6 * i as f64).collect();
        let f = DeformationGradient::new(q1.matrix() * relaxed_polar::matcore::diag(&nu) * q2.matrix()).unwrap();
        let res = global_minimize(&w, &f, &cfg);
        let wred = reduced_energy(&w, &f);
        println!(
            "n = {n}, ({mu}, {muc}): closed form {wred:.10}, oracle {:.10}, gap {:.2e}, |grad| {:.1e}",
            res.best_energy,
            res.best_energy - wred,
            res.grad_norm_at_best
        );
    }
}
