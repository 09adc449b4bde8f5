//! The multiplicity classifier, twice over: first on a synthetic
//! universe where ground truth is obvious, then on the code enumeration
//! where the cross-polytope cell emerges as the infinite candidate.
//!
//! ```bash
//! cargo run --example classifier_run
//! ```

use spherecode::experiment::{
    classify_dimension_multiplicity, CellLabel, OracleChoice, DEFAULT_ALLOWANCE,
    DEFAULT_STABILITY,
};
use spherecode::oracle::{
    brute_force_classify, run_classifier, ComplexityOracle, EnumeratedSpace, SpaceElement,
};

fn main() {
    // Synthetic warm-up: f(x) = min(x, 10) over 0..200, so value 10
    // recurs forever and 0..=9 appear once each. The identity section
    // makes n_Z equal n.
    let elements: Vec<SpaceElement> = (0..200u64)
        .map(|x| SpaceElement {
            f_value: x.min(10),
            g_value: Some(x),
            serialization: format!("element {x}").into_bytes(),
        })
        .collect();
    let space = EnumeratedSpace { name: "min-x-10".into(), exhaustive: true, elements };
    let oracle = ComplexityOracle::structural(&space);
    let horizons = [12, 25, 50, 100, 200];
    let state = run_classifier(&space, &|y| y + 1, &oracle, &horizons, 4.0, true).unwrap();
    println!("synthetic universe min(x, 10), horizons {horizons:?}:");
    println!("  surviving candidates = {:?}", state.a_set);
    println!("  demoted to finite    = {:?}", state.b_set);
    let truth = brute_force_classify(&space, 5, true).unwrap();
    println!("  brute force (threshold 5) exceeds = {:?}", truth.exceeds);
    println!("  audit trail: {} records, last three:", state.audit.len());
    for line in state.audit_jsonl().lines().rev().take(3).collect::<Vec<_>>().iter().rev() {
        println!("    {line}");
    }

    // The real thing: classify enumeration cells by how many dimensions
    // keep landing in them. Only the right-angle cell (half-turn gap,
    // rate 1/2) accumulates fresh dimensions step after step.
    let budget = 120;
    let grid = classify_dimension_multiplicity(
        budget,
        3,
        DEFAULT_ALLOWANCE,
        DEFAULT_STABILITY,
        OracleChoice::Structural,
    )
    .unwrap();
    println!("\ncode enumeration, budget {budget}, 3 steps:");
    print!("{}", grid.csv());
    for lc in &grid.cells {
        if lc.label == CellLabel::InfiniteCandidate {
            println!(
                "infinite candidate: bucket {} rate {} with dimensions {:?} ({} records)",
                lc.cell.bucket,
                lc.cell.rate.rate_f64(),
                lc.witness_dims,
                lc.n_records
            );
        }
    }

    // The compression oracle ranks big serializations late, so the
    // cross-polytope witnesses sit beyond the default allowance and the
    // cell is demoted. A larger allowance restores the witnesses.
    for c in [DEFAULT_ALLOWANCE, 16.0] {
        let by_compression = classify_dimension_multiplicity(
            budget,
            3,
            c,
            DEFAULT_STABILITY,
            OracleChoice::Compression(None),
        )
        .unwrap();
        let diffs: Vec<String> = grid
            .cells
            .iter()
            .zip(&by_compression.cells)
            .filter(|(a, b)| a.label != b.label)
            .map(|(a, b)| {
                format!("bucket {} ({} vs {})", a.cell.bucket, a.label, b.label)
            })
            .collect();
        if diffs.is_empty() {
            println!("compression oracle at c = {c}: all labels agree with structural");
        } else {
            println!("compression oracle at c = {c}: disagrees at {}", diffs.join(", "));
        }
    }
}
