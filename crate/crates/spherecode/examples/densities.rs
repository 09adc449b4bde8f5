//! Center densities and normalised densities of the built-in packings,
//! checked against the catalog of known maxima.
//!
//! ```bash
//! cargo run --example densities
//! ```

use spherecode::catalog::{default_catalog, discrepancy};
use spherecode::packings::{center_density, Lattice, Packing, PeriodicSet};

fn main() {
    let catalog = default_catalog();
    let packings: Vec<(&str, Packing)> = vec![
        ("Z", Packing::Lattice(Lattice::zn(1))),
        ("Z^2", Packing::Lattice(Lattice::zn(2))),
        ("hexagonal", Packing::Lattice(Lattice::hexagonal())),
        ("fcc", Packing::Lattice(Lattice::fcc())),
        ("E8", Packing::Lattice(Lattice::e8())),
        (
            "{0, 2/5} + 2Z",
            Packing::Periodic(PeriodicSet::two_point_line(spherecode::exact::rat(2, 5))),
        ),
    ];

    println!("{:<14} {:>3} {:>22} {:>22} {:>10}", "packing", "dim", "center density", "density", "of max");
    for (name, p) in &packings {
        let rep = center_density(p).expect("built-in packings are valid");
        let gamma = discrepancy(rep.density, p.dim() as u32, &catalog)
            .map(|(g, _)| format!("{g:.4}"))
            .unwrap_or_else(|_| "-".into());
        let exact = rep
            .center_density_exact
            .as_ref()
            .map(|s| format!(" = {s}"))
            .unwrap_or_default();
        println!(
            "{:<14} {:>3} {:>22} {:>22} {:>10}{exact}",
            name,
            p.dim(),
            format!("{:.12}", rep.center_density),
            format!("{:.12}", rep.density),
            gamma
        );
    }

    // The two line packings differ only in the translate offset, which
    // costs them exactly the density ratio used by the experiments.
    let z = center_density(&packings[0].1).unwrap().density;
    let two5 = center_density(&packings[5].1).unwrap().density;
    println!("\nline discrepancy of {{0, 2/5}} + 2Z: gamma = {:.3}", two5 / z);
}
