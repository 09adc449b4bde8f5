//! Envelope membership, discrepancy offsets, and the optimality
//! experiment over the catalog, all against one enumeration grid.
//!
//! ```bash
//! cargo run --example opt_membership
//! ```
//!
//! The schedule here stops at d = 0.05 to keep the run short; the finer
//! d = 0.02 truncation needs the level-320 grid and lives in the test
//! suite.

use spherecode::catalog::default_catalog;
use spherecode::enumeration::budget_for_level;
use spherecode::exact::rat;
use spherecode::experiment::{
    discrepancy_offset_check, envelope_for_code_dim, frak_p_membership, opt_experiment,
    record_enumeration, OptKind,
};
use spherecode::packings::{Lattice, Packing, PeriodicSet};
use spherecode::params::ParamGrid;

fn main() {
    let budget = budget_for_level(130);
    let mut grid = ParamGrid::new();
    record_enumeration(budget, &mut grid);
    println!("grid: {} codes in {} cells", budget, grid.len());
    let env = envelope_for_code_dim(&grid, 2).unwrap();

    let schedule = [0.2, 0.1, 0.05];
    let z = Packing::Lattice(Lattice::zn(1));

    // Z wraps inside the envelope at eps = 0.2 but not at eps = 0.01:
    // the envelope sits slightly above the wrapped rate at every d.
    for eps in [0.2, 0.01] {
        let report = frak_p_membership(&z, eps, &schedule, 0, schedule.len() - 1, &env).unwrap();
        println!("\nZ in the eps = {eps} envelope neighborhood: member = {}", report.member);
        println!("  ({})", report.note);
        for row in &report.rows {
            println!(
                "  k={} d={:<4} rate={:.4} alpha_hat={:.4} margin={:+.4} member={}",
                row.k, row.d, row.rate, row.alpha_hat, row.margin, row.member
            );
        }
    }

    // Offsets below the envelope track the density discrepancy: a line
    // packing at fraction gamma of full density wraps to code points
    // about -log2(gamma)/2 below the envelope.
    let catalog = default_catalog();
    println!("\ndiscrepancy offsets (predicted vs measured at d = 0.05):");
    let two_point = |num: i64, den: i64| {
        Packing::Periodic(PeriodicSet::two_point_line(rat(num, den)))
    };
    for (name, p) in [
        ("Z", z.clone()),
        ("{0, 1/2} + 2Z", two_point(1, 2)),
        ("{0, 2/5} + 2Z", two_point(2, 5)),
    ] {
        let rep = discrepancy_offset_check(&p, 0.15, &schedule, &catalog, &env).unwrap();
        let tail = rep.rows.last().unwrap();
        println!(
            "  {name:<14} gamma={:.2} predicted={:.4} measured={:.4} within eps={}: {}",
            rep.gamma, rep.predicted_offset, tail.measured_offset, rep.eps, rep.tail_ok
        );
    }

    // Optimality verdicts: wrap where a construction exists (dims 1, 2),
    // catalog assertion where only the record does (3, 8, 24), and
    // honest inconclusives elsewhere.
    let report = opt_experiment(
        OptKind::Lattice,
        &[1, 2, 3, 4, 8, 24],
        0.2,
        &[0.1, 0.05],
        &catalog,
        &grid,
        None,
    )
    .unwrap();
    println!("\nlattice optimality verdicts ({}):", report.catalog_version);
    for (dim, verdict) in &report.verdicts {
        let detail = &report.details[dim];
        println!(
            "  dim {dim}: {verdict} [method={}, candidate={}]",
            detail.method,
            detail.candidate.as_deref().unwrap_or("-")
        );
    }

    // Periodic quantifier with a translate budget: dimension 10's record
    // uses 40 translates, so per<=40 admits it and per<=39 has nothing.
    for bound in [40, 39] {
        let rep = opt_experiment(
            OptKind::PerAtMost(bound),
            &[10],
            0.2,
            &[0.1, 0.05],
            &catalog,
            &grid,
            None,
        )
        .unwrap();
        println!("per<={bound} dim 10: {}", rep.verdicts[&10]);
    }

    // The dim-1 detail as the CLI would emit it.
    let single = opt_experiment(OptKind::Lattice, &[1], 0.2, &[0.1, 0.05], &catalog, &grid, None)
        .unwrap();
    println!("\ndim-1 report as JSON:");
    println!("{}", serde_json::to_string_pretty(&single).unwrap());
}
