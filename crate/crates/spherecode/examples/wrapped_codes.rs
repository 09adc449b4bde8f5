//! Wrapping line and plane packings onto spheres: density convergence
//! along a shrinking radius schedule, the separation certificate, and the
//! seam-buffer negative control.
//!
//! ```bash
//! cargo run --example wrapped_codes
//! ```

use spherecode::packings::{Lattice, Packing};
use spherecode::wrap::{
    convergence_csv, density_convergence, make_schedule, wrap_packing, wrap_packing_unbuffered,
};

fn main() {
    // Z wrapped onto the circle: the code density approaches the line
    // density 1 as the radius shrinks.
    let z = Packing::Lattice(Lattice::zn(1));
    let rows = density_convergence(&z, &[0.2, 0.1, 0.05, 0.02]).unwrap();
    println!("Z -> S^1");
    print!("{}", convergence_csv(&rows));

    // The hexagonal lattice onto the 2-sphere, approaching pi/sqrt(12).
    let hex = Packing::Lattice(Lattice::hexagonal());
    let rows = density_convergence(&hex, &[0.2, 0.1, 0.05]).unwrap();
    println!("\nhex -> S^2");
    print!("{}", convergence_csv(&rows));

    // Every wrap carries a certificate: min_angle >= 2 asin(d/2) minus
    // the squared band width.
    let sched = make_schedule(0.05).unwrap();
    let wrapped = wrap_packing(&hex, &sched).unwrap();
    println!("\nhex at d = 0.05:");
    println!("  bands        = {}", sched.n_bands());
    println!("  merit        = {:.12}", sched.merit());
    println!("  points       = {}", wrapped.code.len());
    println!("  discarded    = {}", wrapped.discarded);
    println!("  guarantee    = {:.12}", wrapped.guarantee);
    println!("  min angle    = {:.12}", wrapped.min_angle().unwrap());
    let empty_bands = wrapped.band_counts.iter().filter(|&&c| c == 0).count();
    println!("  empty bands  = {empty_bands} (polar caps narrower than d)");

    // Negative control: without the seam buffers, wrapped neighbors can
    // land closer than the certificate.
    let sched = make_schedule(0.1).unwrap();
    let buffered = wrap_packing(&z, &sched).unwrap();
    let raw = wrap_packing_unbuffered(&z, &sched).unwrap();
    println!("\nZ at d = 0.1, buffers on vs off:");
    println!(
        "  buffered   : {} points, min angle {:.12}",
        buffered.code.len(),
        buffered.min_angle().unwrap()
    );
    println!(
        "  unbuffered : {} points, min angle {:.12} (< guarantee {:.12})",
        raw.len(),
        raw.min_angle().unwrap(),
        buffered.guarantee
    );
}
