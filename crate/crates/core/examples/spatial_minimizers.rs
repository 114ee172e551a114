//! Both branches of the relaxed polar factor for a 3x3 stretch, and how
//! they move as the Cosserat couple modulus grows.

use relaxed_polar::energy::energy;
use relaxed_polar::spatial::rpolar_3d;
use relaxed_polar::{CosseratWeights, DeformationGradient};

fn main() {
    let f = DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap();
    for muc in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let w = CosseratWeights::new(1.0, muc).unwrap();
        let s = rpolar_3d(&w, &f).unwrap();
        println!("mu_c = {muc:.2}: {:?}, relative angles {:?}, wred {:.6}", s.domain, s.relative_angles, s.reduced_energy);
        for (label, r) in s.labels.iter().zip(&s.minimizers) {
            println!("  {label:?} W = {:.6}", energy(&w, r, &f).unwrap());
        }
    }
}
