//! Deterministic enumeration of rational-angle spherical codes.
//!
//! Codes stream in a fixed level-diagonal order over five families, all
//! with minimal angles that are exact rational fractions of a turn:
//!
//! * equally spaced points on the circle (level L emits L+1 points),
//! * equatorial rings on S^2,
//! * equatorial rings plus both poles on S^2 (level 1 is the octahedron),
//! * partial cross-polytopes {+-e_1 .. +-e_(2^(n/2-1))} in dimensions
//!   4, 6 and 8 (all at angle pi/2 and rate exactly 1/2, so the three
//!   dimensions share one parameter cell),
//! * prefixes of M equally spaced circle points (rational min gap 2 pi/M
//!   at rates below the full ring's).
//!
//! Every emitted code is verified: the minimal angle recomputed from
//! coordinates must match the claimed turn fraction within 1e-12, and
//! codes with angle above pi/2 are checked against the Rankin size bound
//! (exactly, when the claimed cosine is rational).

use crate::exact::{exact_cos_turn, rat, Rat};
use crate::geom::{SpherePoint, SphericalCode};
use crate::params;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::f64::consts::PI;

/// Codes with at most this many points carry exact turn coordinates;
/// larger ones fall back to floating coordinates to bound memory and
/// exact-arithmetic cost.
pub const EXACT_TURNS_MAX_POINTS: usize = 64;

/// One enumerated code with its provenance and verified parameters.
#[derive(Debug, Clone)]
pub struct EnumeratedCode {
    /// Position in the enumeration stream (0-based).
    pub index: usize,
    pub family: &'static str,
    pub level: u32,
    pub code: SphericalCode,
    /// Claimed minimal angle as an exact fraction of a full turn.
    pub phi_turns: Rat,
    /// Verified minimal angle in radians.
    pub min_angle: f64,
}

impl EnumeratedCode {
    pub fn dim(&self) -> usize {
        self.code.dim()
    }

    pub fn n_points(&self) -> usize {
        self.code.len()
    }
}

enum FamilySpec {
    EqS1(usize),
    RingS2(usize),
    RingPolesS2(usize),
    /// Partial cross-polytope in the given (even) dimension.
    Axis(usize),
    /// First `n` of `m` equally spaced circle points.
    PrefixS1 { n: usize, m: usize },
}

fn level_specs(level: u32) -> Vec<FamilySpec> {
    let l = level as usize;
    let mut specs = vec![
        FamilySpec::EqS1(l + 1),
        FamilySpec::RingS2(l + 1),
        FamilySpec::RingPolesS2(l + 3),
    ];
    if (1..=3).contains(&l) {
        specs.push(FamilySpec::Axis(2 * l + 2));
    }
    for n in 2..=(l + 1) {
        specs.push(FamilySpec::PrefixS1 { n, m: l + 2 });
    }
    specs
}

/// Number of codes emitted through the given level (inclusive).
pub fn budget_for_level(level: u32) -> usize {
    let l = level as usize;
    3 * l + l.min(3) + l * (l + 1) / 2
}

fn circle_points(turns: &[Rat]) -> SphericalCode {
    if turns.len() <= EXACT_TURNS_MAX_POINTS {
        SphericalCode::from_turns_exact(2, turns.iter().map(|t| vec![t.clone()]).collect())
            .expect("circle turns are distinct and valid")
    } else {
        let pts = turns
            .iter()
            .map(|t| {
                let th = 2.0 * PI * t.to_f64().unwrap();
                SpherePoint::new(vec![th.cos(), th.sin()]).unwrap()
            })
            .collect();
        SphericalCode::from_points(pts).expect("circle points are distinct")
    }
}

fn ring_s2(k: usize, with_poles: bool) -> SphericalCode {
    let total = k + if with_poles { 2 } else { 0 };
    if total <= EXACT_TURNS_MAX_POINTS {
        let mut turns: Vec<Vec<Rat>> =
            (0..k).map(|i| vec![rat(i as i64, k as i64), Rat::zero()]).collect();
        if with_poles {
            turns.push(vec![rat(1, 4), rat(1, 4)]);
            turns.push(vec![rat(1, 4), rat(3, 4)]);
        }
        SphericalCode::from_turns_exact(3, turns).expect("ring turns are distinct and valid")
    } else {
        let mut pts: Vec<SpherePoint> = (0..k)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / k as f64;
                SpherePoint::new(vec![th.cos(), th.sin(), 0.0]).unwrap()
            })
            .collect();
        if with_poles {
            pts.push(SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap());
            pts.push(SpherePoint::new(vec![0.0, 0.0, -1.0]).unwrap());
        }
        SphericalCode::from_points(pts).expect("ring points are distinct")
    }
}

fn axis_code(dim: usize) -> SphericalCode {
    let axes = 1usize << (dim / 2 - 1);
    let mut rows = Vec::with_capacity(2 * axes);
    for a in 0..axes {
        for sign in [1i64, -1] {
            let mut row = vec![Rat::zero(); dim];
            row[a] = rat(sign, 1);
            rows.push(row);
        }
    }
    SphericalCode::from_rational_cartesian(rows).expect("axis vectors are unit and distinct")
}

fn build(spec: &FamilySpec) -> (&'static str, SphericalCode, Rat) {
    match *spec {
        FamilySpec::EqS1(n) => {
            let turns: Vec<Rat> = (0..n).map(|k| rat(k as i64, n as i64)).collect();
            ("eq-s1", circle_points(&turns), rat(1, n as i64))
        }
        FamilySpec::RingS2(k) => ("ring-s2", ring_s2(k, false), rat(1, k as i64)),
        FamilySpec::RingPolesS2(k) => {
            // Ring spacing 2 pi/k meets the pole distance pi/2 at k = 4.
            let phi = rat(1, k as i64).min(rat(1, 4));
            ("ring-poles-s2", ring_s2(k, true), phi)
        }
        FamilySpec::Axis(dim) => ("axis", axis_code(dim), rat(1, 4)),
        FamilySpec::PrefixS1 { n, m } => {
            let turns: Vec<Rat> = (0..n).map(|k| rat(k as i64, m as i64)).collect();
            ("prefix-s1", circle_points(&turns), rat(1, m as i64))
        }
    }
}

/// Size bound check for codes with minimal angle above pi/2: the number
/// of points must not exceed (cos phi - 1)/cos phi. Exact when the
/// cosine of the claimed angle is rational; floating with a 1e-9 pad
/// otherwise. Codes at or below pi/2 pass vacuously.
pub fn rankin_guard_holds(n_points: usize, phi_turns: &Rat, min_angle: f64) -> bool {
    let quarter = rat(1, 4);
    if *phi_turns <= quarter {
        return true;
    }
    if let Some(c) = exact_cos_turn(phi_turns) {
        // c < 0 on (pi/2, pi]; bound = (c - 1)/c exactly.
        debug_assert!(c.is_negative());
        let bound = (c.clone() - Rat::one()) / c;
        return Rat::from_integer((n_points as i64).into()) <= bound;
    }
    match params::rankin_bound(min_angle) {
        Ok(b) => (n_points as f64) <= b + 1e-9,
        Err(_) => false,
    }
}

/// Streams the first `budget` codes of the fixed enumeration order into
/// the visitor. Every code is verified before being handed over.
pub fn enumerate_codes(budget: usize, visit: &mut dyn FnMut(EnumeratedCode)) {
    let mut index = 0usize;
    for level in 1u32.. {
        for spec in level_specs(level) {
            if index == budget {
                return;
            }
            let (family, code, phi_turns) = build(&spec);
            let min_angle = code.min_angle().expect("enumerated codes have >= 2 points");
            let claimed = 2.0 * PI * phi_turns.to_f64().unwrap();
            assert!(
                (min_angle - claimed).abs() <= 1e-12,
                "{family} level {level}: min angle {min_angle} drifts from claimed {claimed}"
            );
            assert!(
                rankin_guard_holds(code.len(), &phi_turns, min_angle),
                "{family} level {level}: violates the size bound above pi/2"
            );
            visit(EnumeratedCode { index, family, level, code, phi_turns, min_angle });
            index += 1;
        }
        if index == budget {
            return;
        }
    }
}

/// Materializes a stream prefix. Suitable for modest budgets; large
/// recording runs should stream through [`enumerate_codes`].
pub fn collect_codes(budget: usize) -> Vec<EnumeratedCode> {
    let mut out = Vec::with_capacity(budget);
    enumerate_codes(budget, &mut |ec| out.push(ec));
    out
}
