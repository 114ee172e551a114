//! Distance to SO(n) against distance to the tangent bundle
//! `SO(n)(1 + so(n))`, the latter being the `(1, 0)` reduced energy.

use relaxed_polar::planar::simple_shear;
use relaxed_polar::polar::{dist_sq_so_n, tangent_bundle_dist_sq};
use relaxed_polar::DeformationGradient;

fn main() {
    let cases = [
        ("identity", DeformationGradient::diagonal(&[1.0, 1.0, 1.0]).unwrap()),
        ("uniaxial 2", DeformationGradient::diagonal(&[2.0, 1.0, 1.0]).unwrap()),
        ("stretch 4,2,1/2", DeformationGradient::diagonal(&[4.0, 2.0, 0.5]).unwrap()),
        ("shear 1", simple_shear(1.0)),
        ("shear 3", simple_shear(3.0)),
    ];
    for (name, f) in cases {
        println!("{name:<16} dist^2 to SO(n) {:>9.5}   to tangent bundle {:>9.5}", dist_sq_so_n(&f), tangent_bundle_dist_sq(&f));
    }
}
