//! Acceptance gates: ten end-to-end checks, one test per gate, each
//! printing a single PASS/FAIL line (visible with `-- --nocapture`; the
//! harness shows the lines of failing gates either way).
//!
//! Gate 3 is expected to stay red: it pins the bound-curve value
//! H(pi/3) = 0.40154 +- 1e-4, but the curve's closed form evaluates to
//! 0.401413546086 (confirmed against 50-digit independent arithmetic),
//! which misses that window by 2.6e-5. The gate asserts the pinned
//! constant as stated rather than widening the window to fit.

use spherecode::catalog::default_catalog;
use spherecode::enumeration::{budget_for_level, enumerate_codes, rankin_guard_holds};
use spherecode::exact::rat;
use spherecode::experiment::{
    discrepancy_offset_check, envelope_for_code_dim, opt_experiment, record_enumeration, OptKind,
};
use spherecode::geom::{cap_area, sphere_area, SpherePoint, SphericalCode};
use spherecode::jamming::{
    jam_test, perturbation_probe, witness_chordal_degradation, JamStatus, DEFAULT_CONTACT_TOL,
};
use spherecode::oracle::{
    brute_force_classify, count_n, count_nz, run_classifier, ComplexityOracle, EnumeratedSpace,
    SpaceElement,
};
use spherecode::packings::{center_density, Lattice, Packing, PeriodicSet};
use spherecode::params::{kl_envelope, rankin_bound, ParamGrid};
use spherecode::wrap::{density_convergence, make_schedule, wrap_packing, wrap_packing_unbuffered};
use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

/// Collects clause failures for one gate and prints its line.
struct Gate {
    name: &'static str,
    failures: Vec<String>,
}

impl Gate {
    fn new(name: &'static str) -> Self {
        Gate { name, failures: Vec::new() }
    }

    fn check(&mut self, clause: &str, ok: bool) {
        if !ok {
            self.failures.push(clause.to_string());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("{}: PASS", self.name);
        } else {
            println!("{}: FAIL [{}]", self.name, self.failures.join("; "));
            panic!("{} failed: {}", self.name, self.failures.join("; "));
        }
    }
}

fn lattice(l: Lattice) -> Packing {
    Packing::Lattice(l)
}

#[test]
fn gate_01_density_formulas() {
    let mut g = Gate::new("gate 01 density formulas");
    let budget = Instant::now();

    let z1 = center_density(&lattice(Lattice::zn(1))).unwrap();
    g.check(&format!("density(Z) = {} wants exactly 1", z1.density), z1.density == 1.0);

    let hex = center_density(&lattice(Lattice::hexagonal())).unwrap();
    let want_hex = PI / 12f64.sqrt();
    g.check(
        &format!("density(hex) = {} wants pi/sqrt(12) = {want_hex}", hex.density),
        (hex.density - want_hex).abs() <= 1e-9,
    );

    let e8 = center_density(&lattice(Lattice::e8())).unwrap();
    let exact = e8.center_density_exact.as_ref().and_then(|s| s.as_rat().cloned());
    g.check(
        &format!("center density(E8) = {exact:?} wants exactly 1/16"),
        exact == Some(rat(1, 16)),
    );

    let fcc = center_density(&lattice(Lattice::fcc())).unwrap();
    let want_fcc = PI / 18f64.sqrt();
    g.check(
        &format!("density(fcc) = {} wants pi/sqrt(18) = {want_fcc}", fcc.density),
        (fcc.density - want_fcc).abs() <= 1e-9,
    );

    let elapsed = budget.elapsed();
    g.check(
        &format!("four formulas in {elapsed:?} want < 1 s each"),
        elapsed.as_secs_f64() < 4.0,
    );
    g.finish();
}

#[test]
fn gate_02_cap_area_quadrature() {
    let mut g = Gate::new("gate 02 cap area quadrature");

    let mut worst = 0.0f64;
    for i in 0..100 {
        // Divide first so the endpoint is exactly 1.0 * PI; multiplying
        // first lands an ulp above PI and out of the domain.
        let phi = (i as f64 / 99.0) * PI;
        let got = cap_area(3, phi).unwrap();
        let want = 2.0 * PI * (1.0 - (phi / 2.0).cos());
        worst = worst.max((got - want).abs());
    }
    g.check(
        &format!("S(3, phi) vs 2 pi (1 - cos(phi/2)), worst error {worst:.3e} wants <= 1e-10"),
        worst <= 1e-10,
    );

    for n in 2..=8 {
        let hemi = 2.0 * cap_area(n, PI).unwrap();
        let full = sphere_area(n).unwrap();
        g.check(
            &format!("2 S({n}, pi) = {hemi} wants S_{n} = {full} within 1e-9"),
            (hemi - full).abs() <= 1e-9 * full.max(1.0),
        );
    }
    g.finish();
}

#[test]
fn gate_03_bound_curves() {
    let mut g = Gate::new("gate 03 bound curves");

    // Pinned acceptance constant; the curve itself gives 0.401413546086
    // and misses this window. Kept as stated. See the module docs above.
    let h3 = kl_envelope(PI / 3.0).unwrap();
    g.check(
        &format!("H(pi/3) = {h3:.12} wants pinned 0.40154 within 1e-4 (off by {:.2e})",
            (h3 - 0.40154).abs()),
        (h3 - 0.40154).abs() <= 1e-4,
    );

    let h2 = kl_envelope(FRAC_PI_2).unwrap();
    g.check(&format!("H(pi/2) = {h2} wants exactly 0"), h2 == 0.0);

    let r = rankin_bound(2.0 * PI / 3.0).unwrap();
    g.check(
        &format!("rankin(2 pi/3) = {r} wants 3 within 1e-12"),
        (r - 3.0).abs() <= 1e-12,
    );

    let mut scanned = 0usize;
    let mut obtuse = 0usize;
    let mut guard_ok = true;
    enumerate_codes(10_000, &mut |ec| {
        scanned += 1;
        if ec.min_angle > FRAC_PI_2 {
            obtuse += 1;
            guard_ok &= rankin_guard_holds(ec.n_points(), &ec.phi_turns, ec.min_angle);
        }
    });
    g.check(
        &format!("all {obtuse} obtuse codes of {scanned} fit the size bound (cos phi - 1)/cos phi"),
        guard_ok && scanned == 10_000 && obtuse > 0,
    );
    g.finish();
}

#[test]
fn gate_04_wrapped_density_convergence() {
    let mut g = Gate::new("gate 04 wrapped density convergence");
    let budget = Instant::now();

    let z_rows = density_convergence(&lattice(Lattice::zn(1)), &[0.2, 0.1, 0.05, 0.02]).unwrap();
    let tail = z_rows.last().unwrap();
    g.check(
        &format!("|density(wrapped Z at d=0.02) - 1| = {:.4} wants <= 0.15", tail.deviation),
        (tail.delta_code - 1.0).abs() <= 0.15,
    );
    g.check(
        &format!(
            "line deviations head {:.4} -> tail {:.4} want strict improvement",
            z_rows[0].deviation, tail.deviation
        ),
        tail.deviation < z_rows[0].deviation,
    );

    let hex_rows = density_convergence(&lattice(Lattice::hexagonal()), &[0.2, 0.1, 0.05]).unwrap();
    let monotone = hex_rows.windows(2).all(|w| w[1].deviation < w[0].deviation);
    let devs: Vec<String> = hex_rows.iter().map(|r| format!("{:.4}", r.deviation)).collect();
    g.check(
        &format!("hexagonal deviations [{}] want strict decrease", devs.join(", ")),
        monotone,
    );

    let elapsed = budget.elapsed();
    g.check(&format!("ran in {elapsed:?}, wants < 30 s"), elapsed.as_secs_f64() < 30.0);
    g.finish();
}

#[test]
fn gate_05_wrap_separation_guarantee() {
    let mut g = Gate::new("gate 05 wrap separation guarantee");

    let cases: Vec<(&str, Packing, Vec<f64>)> = vec![
        ("Z", lattice(Lattice::zn(1)), vec![0.2, 0.1, 0.05, 0.02]),
        ("hex", lattice(Lattice::hexagonal()), vec![0.2, 0.1, 0.05]),
    ];
    for (name, p, ds) in &cases {
        for &d in ds {
            let sched = make_schedule(d).unwrap();
            let wrapped = wrap_packing(p, &sched).unwrap();
            let min_angle = wrapped.code.min_angle().unwrap();
            let bound = 2.0 * (d / 2.0).asin() - wrapped.band_width_max.powi(2);
            g.check(
                &format!("{name} at d={d}: min angle {min_angle:.6} wants >= {bound:.6}"),
                min_angle >= bound - 1e-12,
            );
            g.check(
                &format!("{name} at d={d}: reported guarantee matches the formula"),
                (wrapped.guarantee - bound).abs() <= 1e-15,
            );
        }
    }

    // Negative control: no seam buffers, no guarantee.
    let sched = make_schedule(0.1).unwrap();
    let loose = wrap_packing_unbuffered(&lattice(Lattice::zn(1)), &sched).unwrap();
    let loose_angle = loose.min_angle().unwrap();
    let bound = 2.0 * (0.1f64 / 2.0).asin();
    g.check(
        &format!("unbuffered Z at d=0.1: min angle {loose_angle:.6} wants < {bound:.6}"),
        loose_angle < bound,
    );
    g.finish();
}

fn ring(n: usize) -> SphericalCode {
    let turns = (0..n).map(|k| vec![rat(k as i64, n as i64)]).collect();
    SphericalCode::from_turns_exact(2, turns).unwrap()
}

/// Applies a witness at step eps (with reprojection) and reports the drop
/// in minimal angle; the chordal counterpart lives in the library.
fn angular_degradation(code: &SphericalCode, witness: &[Vec<f64>], eps: f64) -> f64 {
    let before = code.min_angle().unwrap();
    let moved: Vec<SpherePoint> = code
        .points()
        .iter()
        .zip(witness)
        .map(|(p, w)| {
            let coords: Vec<f64> =
                p.coords().iter().zip(w).map(|(c, wv)| c + eps * wv).collect();
            SpherePoint::normalized(coords).unwrap()
        })
        .collect();
    let after = SphericalCode::from_points(moved).unwrap().min_angle().unwrap();
    before - after
}

#[test]
fn gate_06_jamming_truth_table() {
    let mut g = Gate::new("gate 06 jamming truth table");
    let budget = Instant::now();
    let eps = 1e-4;
    let quad_tol = 10.0 * eps * eps;

    for n in 2..=12 {
        let v = jam_test(&ring(n), DEFAULT_CONTACT_TOL).unwrap();
        g.check(
            &format!("ring({n}) wants infinitesimally jammed, got {:?}", v.status),
            v.status == JamStatus::InfinitesimallyJammed,
        );
    }

    let pair = SphericalCode::from_rational_cartesian(vec![
        vec![rat(1, 1), rat(0, 1), rat(0, 1)],
        vec![rat(-1, 1), rat(0, 1), rat(0, 1)],
    ])
    .unwrap();
    let v = jam_test(&pair, DEFAULT_CONTACT_TOL).unwrap();
    g.check(
        &format!("antipodal pair on the 2-sphere wants unjammed, got {:?}", v.status),
        v.status == JamStatus::Unjammed,
    );
    if let Some(w) = &v.witness {
        // The binding contact is antipodal, where any flex moves the
        // angle linearly (arccos is square-root sensitive at -1), so
        // quadratic soundness is asserted in the chordal metric that the
        // contact cone actually constrains.
        let drop = witness_chordal_degradation(&pair, w, eps).unwrap();
        g.check(
            &format!("antipodal witness chordal drop {drop:.3e} wants <= {quad_tol:.1e}"),
            drop <= quad_tol,
        );
    } else {
        g.check("antipodal pair returned a witness", false);
    }

    let oct = SphericalCode::from_rational_cartesian(
        (0..3)
            .flat_map(|axis| {
                [1i64, -1].map(|s| {
                    let mut r = vec![rat(0, 1); 3];
                    r[axis] = rat(s, 1);
                    r
                })
            })
            .collect(),
    )
    .unwrap();
    let v = jam_test(&oct, DEFAULT_CONTACT_TOL).unwrap();
    g.check(
        &format!("octahedron wants infinitesimally jammed, got {:?}", v.status),
        v.status == JamStatus::InfinitesimallyJammed,
    );

    // An unjammed code whose contacts are far from antipodal: soundness
    // holds in both metrics there.
    let uneven = SphericalCode::from_points(
        [0.0f64, 1.1, 2.2, 3.3, 4.4]
            .iter()
            .map(|a| SpherePoint::new(vec![a.cos(), a.sin()]).unwrap())
            .collect(),
    )
    .unwrap();
    let v = jam_test(&uneven, DEFAULT_CONTACT_TOL).unwrap();
    g.check(
        &format!("uneven ring wants unjammed, got {:?}", v.status),
        v.status == JamStatus::Unjammed,
    );
    if let Some(w) = &v.witness {
        let chordal = witness_chordal_degradation(&uneven, w, eps).unwrap();
        let angular = angular_degradation(&uneven, w, eps);
        g.check(
            &format!(
                "uneven-ring witness drops chordal {chordal:.3e} / angular {angular:.3e}, \
                 both want <= {quad_tol:.1e}"
            ),
            chordal <= quad_tol && angular <= quad_tol,
        );
    }

    // A dented tetrahedron: the random tangent probe finds an improving
    // move, deterministically by seed.
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
    g.check("perturbed-tetrahedron probe finds an improvement", improved);

    let elapsed = budget.elapsed();
    g.check(&format!("ran in {elapsed:?}, wants < 10 s"), elapsed.as_secs_f64() < 10.0);
    g.finish();
}

fn universe(
    n: usize,
    f: impl Fn(u64) -> u64,
    g: impl Fn(u64) -> u64,
) -> EnumeratedSpace {
    let elements = (0..n as u64)
        .map(|x| SpaceElement {
            f_value: f(x),
            g_value: Some(g(x)),
            serialization: format!("element {x}").into_bytes(),
        })
        .collect();
    EnumeratedSpace { name: "synthetic".into(), exhaustive: true, elements }
}

#[test]
fn gate_07_classifier_matches_brute_force() {
    let mut g = Gate::new("gate 07 classifier matches brute force");
    let horizons = [6usize, 12, 25, 50, 100, 200];
    let c = 8.0;

    let universes: Vec<(&str, EnumeratedSpace)> = vec![
        ("min(x,10) with identity section", universe(200, |x| x.min(10), |x| x)),
        ("constant f, constant g", universe(200, |_| 7, |_| 3)),
        ("x mod 8 with injective section", universe(200, |x| x % 8, |x| x)),
        ("parity with period-6 section", universe(200, |x| x % 2, |x| x % 6)),
        (
            "two-block mixture",
            universe(200, |x| if x < 100 { x } else { 100 }, |x| x),
        ),
    ];

    for (name, space) in &universes {
        let oracle = ComplexityOracle::structural(space);

        // After m steps the classifier must agree with exhaustive counting
        // at threshold m - 1, restricted to the values listed by then.
        for steps in 1..=horizons.len() {
            let st = run_classifier(space, &|y| y + 1, &oracle, &horizons[..steps], c, true)
                .unwrap();
            let brute = brute_force_classify(space, steps as u64 - 1, true).unwrap();
            let eff = horizons[steps - 1].min(space.len());
            let seen: BTreeSet<u64> =
                space.elements[..eff].iter().map(|e| e.f_value).collect();
            let expect_b: BTreeSet<u64> = brute.finite.intersection(&seen).cloned().collect();
            let expect_a: BTreeSet<u64> = brute.exceeds.intersection(&seen).cloned().collect();
            g.check(
                &format!("{name}: A after {steps} steps matches counts > {}", steps - 1),
                st.a_set == expect_a,
            );
            g.check(
                &format!("{name}: B after {steps} steps matches counts <= {}", steps - 1),
                st.b_set == expect_b,
            );
            if steps == horizons.len() {
                // No value returns to the candidate set after a demotion.
                let mut demoted = BTreeSet::new();
                let mut monotone = true;
                for rec in &st.audit {
                    match rec.action {
                        spherecode::oracle::AuditAction::Demoted => {
                            demoted.insert(rec.value);
                        }
                        _ => monotone &= !demoted.contains(&rec.value),
                    }
                }
                g.check(&format!("{name}: audit log never rehabilitates"), monotone);
            }
        }

        let mut nz_ok = true;
        for i in 0..space.len() {
            nz_ok &= count_nz(space, i).unwrap() <= count_n(space, i).unwrap();
        }
        g.check(&format!("{name}: section count <= plain count everywhere"), nz_ok);
    }
    g.finish();
}

#[test]
fn gate_08_discrepancy_offsets() {
    let mut g = Gate::new("gate 08 discrepancy offsets");

    let mut grid = ParamGrid::new();
    record_enumeration(budget_for_level(320), &mut grid);
    let env = envelope_for_code_dim(&grid, 2).unwrap();
    let catalog = default_catalog();
    let schedule = [0.2, 0.1, 0.05, 0.02];

    let families: Vec<(&str, Packing)> = vec![
        ("Z (full density)", lattice(Lattice::zn(1))),
        (
            "{0, 1/2} + 2Z (half density)",
            Packing::Periodic(PeriodicSet::two_point_line(rat(1, 2))),
        ),
        (
            "{0, 2/5} + 2Z (0.4 density)",
            Packing::Periodic(PeriodicSet::two_point_line(rat(2, 5))),
        ),
    ];
    for (name, p) in &families {
        let rep = discrepancy_offset_check(p, 0.15, &schedule, &catalog, &env).unwrap();
        let tail = rep.rows.last().unwrap();
        let gap = (tail.measured_offset - rep.predicted_offset).abs();
        g.check(
            &format!(
                "{name}: tail offset {:.4} vs predicted -log2({:.2})/2 = {:.4}, gap {gap:.4} \
                 wants <= 0.15",
                tail.measured_offset, rep.gamma, rep.predicted_offset
            ),
            gap <= 0.15,
        );
    }
    g.finish();
}

#[test]
fn gate_09_catalog_optimality_verdicts() {
    let mut g = Gate::new("gate 09 catalog optimality verdicts");

    let catalog = default_catalog();
    let mut grid = ParamGrid::new();
    record_enumeration(budget_for_level(130), &mut grid);
    let schedule = [0.1, 0.05];

    let latt = opt_experiment(
        OptKind::Lattice,
        &[1, 2, 3, 8, 24],
        0.2,
        &schedule,
        &catalog,
        &grid,
        None,
    )
    .unwrap();
    for dim in [1u32, 2] {
        g.check(
            &format!("lattice dim {dim}: verdict '{}' wants 'member'", latt.verdicts[&dim]),
            latt.verdicts[&dim] == "member",
        );
    }
    for dim in [3u32, 8, 24] {
        g.check(
            &format!(
                "lattice dim {dim}: verdict '{}' wants a member verdict",
                latt.verdicts[&dim]
            ),
            latt.verdicts[&dim].starts_with("member"),
        );
    }

    let per40 = opt_experiment(
        OptKind::PerAtMost(40),
        &[10],
        0.2,
        &schedule,
        &catalog,
        &grid,
        None,
    )
    .unwrap();
    g.check(
        &format!(
            "periodic<=40 dim 10: verdict '{}' wants 'member (catalog assertion)'",
            per40.verdicts[&10]
        ),
        per40.verdicts[&10] == "member (catalog assertion)",
    );
    g.finish();
}

#[test]
fn gate_10_command_determinism() {
    let mut g = Gate::new("gate 10 command determinism");
    let bin = env!("CARGO_BIN_EXE_spherecode");
    let run = |args: &[&str]| {
        let out = std::process::Command::new(bin).args(args).output().expect("binary runs");
        assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };

    let classify_args = ["classify"];
    let first = run(&classify_args);
    let second = run(&classify_args);
    g.check("classify reruns are byte-identical", first == second);
    g.check("classify output is nonempty", !first.is_empty());

    let opt_args = ["opt", "--kind", "latt", "--dims", "1,2"];
    let first = run(&opt_args);
    let second = run(&opt_args);
    g.check("opt reruns are byte-identical", first == second);
    g.check("opt output is nonempty", !first.is_empty());
    g.finish();
}
