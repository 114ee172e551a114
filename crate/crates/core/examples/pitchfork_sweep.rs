//! The planar pitchfork written as CSV to stdout, for several couple moduli.

use relaxed_polar::cli::sweep_planar_csv;
use relaxed_polar::CosseratWeights;

fn main() {
    let grid: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    for muc in [0.0, 0.5] {
        let w = CosseratWeights::new(1.0, muc).unwrap();
        println!("# mu = 1, mu_c = {muc}, branch point at tr U = {}", w.singular_radius().unwrap());
        print!("{}", sweep_planar_csv(&w, &grid, 2.0).unwrap());
    }
}
