//! Bound curves over the angle axis: the entropy-style envelope below
//! pi/2, the size bound above it, and the empirical rate envelope of an
//! enumeration prefix, all as plot-ready CSV on stdout.
//!
//! ```bash
//! cargo run --example bound_curves > curves.csv
//! ```

use spherecode::experiment::record_enumeration;
use spherecode::params::{
    bucket_midpoint, empirical_alpha, kl_envelope, rankin_bound, ParamGrid,
};

fn main() {
    let mut grid = ParamGrid::new();
    record_enumeration(2000, &mut grid);
    let circle = grid.restrict_to_dim(2);
    let env = empirical_alpha(&circle).expect("prefix is nonempty");
    let (lo, hi) = env.bucket_range();

    println!("phi,kl_envelope,rankin_bound,alpha_hat_dim2");
    for bucket in lo..=hi {
        let phi = bucket_midpoint(bucket);
        let h = kl_envelope(phi).map(|v| format!("{v:.11e}")).unwrap_or_default();
        let r = rankin_bound(phi).map(|v| format!("{v:.11e}")).unwrap_or_default();
        let a = env.alpha_hat_at(bucket).expect("bucket in range");
        println!("{phi:.11e},{h},{r},{a:.11e}");
    }

    // A few spot values on stderr so the CSV stays clean.
    eprintln!("H(pi/6)     = {:.12}", kl_envelope(std::f64::consts::FRAC_PI_6).unwrap());
    eprintln!("H(1.0)      = {:.12}", kl_envelope(1.0).unwrap());
    eprintln!("H(pi/2)     = {:.12}", kl_envelope(std::f64::consts::FRAC_PI_2).unwrap());
    eprintln!("rankin(2.0) = {:.12}", rankin_bound(2.0).unwrap());
    eprintln!("rankin(2pi/3) = {:.12}", rankin_bound(2.0 * std::f64::consts::FRAC_PI_3).unwrap());
}
