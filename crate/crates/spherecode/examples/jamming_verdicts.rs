//! Jamming verdicts across the truth table: rigid ring codes, a loose
//! ring with an improving motion, a rattler, the octahedron, and the
//! seeded perturbation probe on a dented tetrahedron.
//!
//! ```bash
//! cargo run --example jamming_verdicts
//! ```

use spherecode::exact::rat;
use spherecode::geom::{SpherePoint, SphericalCode};
use spherecode::jamming::{
    contact_graph, jam_test, perturbation_probe, witness_chordal_degradation,
    DEFAULT_CONTACT_TOL,
};

fn ring(n: usize) -> SphericalCode {
    let turns = (0..n).map(|k| vec![rat(k as i64, n as i64)]).collect();
    SphericalCode::from_turns_exact(2, turns).unwrap()
}

fn circle_angles(angles: &[f64]) -> SphericalCode {
    let pts = angles
        .iter()
        .map(|a| SpherePoint::new(vec![a.cos(), a.sin()]).unwrap())
        .collect();
    SphericalCode::from_points(pts).unwrap()
}

fn octahedron() -> SphericalCode {
    let mut rows = Vec::new();
    for axis in 0..3 {
        for sign in [1, -1] {
            let mut r = vec![rat(0, 1); 3];
            r[axis] = rat(sign, 1);
            rows.push(r);
        }
    }
    SphericalCode::from_rational_cartesian(rows).unwrap()
}

fn report(name: &str, code: &SphericalCode) {
    let verdict = jam_test(code, DEFAULT_CONTACT_TOL).unwrap();
    println!(
        "{name}: {}",
        serde_json::to_string(&verdict.status).unwrap().trim_matches('"')
    );
    println!("  rotation dim = {}", verdict.rotation_dim);
    if let Some(w) = &verdict.witness {
        let eps = 1e-4;
        let drop = witness_chordal_degradation(code, w, eps).unwrap();
        println!("  witness chordal degradation at eps={eps}: {drop:.3e} (bound {:.1e})", 10.0 * eps * eps);
    }
}

fn main() {
    // Equally spaced ring codes are rigid for every size.
    for n in [2usize, 3, 5, 12] {
        report(&format!("ring({n})"), &ring(n));
    }

    // Four contacts and one wide gap: the code spreads out.
    report("uneven ring", &circle_angles(&[0.0, 1.1, 2.2, 3.3, 4.4]));

    // A point with no contacts moves freely.
    let loose = circle_angles(&[0.0, 1.0, 2.0, 4.5]);
    let g = contact_graph(&loose, DEFAULT_CONTACT_TOL).unwrap();
    println!("rattler config: rattlers at {:?}", g.rattlers);
    report("rattler config", &loose);

    report("octahedron", &octahedron());

    // Probe a tetrahedron with one vertex nudged toward a neighbor: a
    // random tangent shake finds an improvement, deterministically per
    // seed.
    let t = 1.0 / 3f64.sqrt();
    let mut pts = vec![
        vec![t, t, t],
        vec![t, -t, -t],
        vec![-t, t, -t],
        vec![-t, -t, t],
    ];
    for (i, c) in pts[1].clone().iter().enumerate() {
        pts[0][i] += 0.05 * (c - pts[0][i]);
    }
    let dented = SphericalCode::from_points(
        pts.into_iter().map(|p| SpherePoint::normalized(p).unwrap()).collect(),
    )
    .unwrap();
    let improved = perturbation_probe(&dented, 50, 1e-2, 42).unwrap();
    println!("dented tetrahedron probe (50 trials, seed 42): improves = {improved}");
    let rigid = perturbation_probe(&ring(3), 500, 1e-2, 42).unwrap();
    println!("ring(3) probe (500 trials, seed 42): improves = {rigid}");
}
