//! The basic toolkit on one code: angular distances, cap areas, code
//! density, the (rate, min angle) summary point, and the canonical text
//! form surviving a round trip.
//!
//! ```bash
//! cargo run --example code_metric
//! ```

use spherecode::exact::rat;
use spherecode::geom::{
    angular_distance, ball_volume, cap_area, code_density, sphere_area, SphericalCode,
};
use spherecode::params::{bucket_of, in_undergraph, kl_envelope, CodePoint};
use spherecode::serial::{canonical_serialization, parse_code};
use std::f64::consts::{FRAC_PI_2, PI};

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

fn main() {
    let oct = octahedron();
    let pts = oct.points();

    // Distances on the sphere are angles: orthogonal axes sit a quarter
    // turn apart, antipodes half a turn.
    println!("octahedron pairwise angles:");
    println!("  e1 to e2: {:.6} (pi/2 = {FRAC_PI_2:.6})", angular_distance(&pts[0], &pts[2]).unwrap());
    println!("  e1 to -e1: {:.6} (pi = {PI:.6})", angular_distance(&pts[0], &pts[1]).unwrap());

    // Sphere and ball constants used by every density figure.
    println!("\nreference measures:");
    println!("  area of S^1 = {:.12} (2 pi)", sphere_area(2).unwrap());
    println!("  area of S^2 = {:.12} (4 pi)", sphere_area(3).unwrap());
    println!("  volume of B^3 = {:.12} (4 pi / 3)", ball_volume(3).unwrap());

    // A cap of angular radius phi/2; at phi = pi the cap is a hemisphere.
    println!("\ncap areas on S^2:");
    for phi in [FRAC_PI_2, 2.0 * PI / 3.0, PI] {
        let a = cap_area(3, phi).unwrap();
        println!("  S(3, {phi:.4}) = {a:.6}  ({:.4} of the sphere)", a / sphere_area(3).unwrap());
    }

    // Six caps of radius pi/4 around the octahedron vertices cover
    // 6 * (1 - cos(pi/4)) / 2 of the sphere.
    let dens = code_density(&oct).unwrap();
    println!("\noctahedron code density = {dens:.12}");
    println!("  closed form 3(1 - 1/sqrt 2) = {:.12}", 3.0 * (1.0 - 0.5f64.sqrt()));

    // Summary points against the asymptotic rate envelope. The envelope
    // vanishes at phi = pi/2, so any finite code with that angle sits
    // above it; a dense ring at small angle sits below.
    let ring: SphericalCode = SphericalCode::from_turns_exact(
        2,
        (0..64).map(|k| vec![rat(k, 64)]).collect(),
    )
    .unwrap();
    for (name, code) in [("octahedron", &oct), ("ring(64)", &ring)] {
        let cp = CodePoint::of_code(code).unwrap();
        println!(
            "\n{name}: rate = {:.6}, phi = {:.6}, bucket = {}",
            cp.rate,
            cp.phi,
            bucket_of(cp.phi)
        );
        println!("  envelope H(phi) = {:.6}", kl_envelope(cp.phi).unwrap());
        println!("  under the bound curves: {}", in_undergraph(&cp));
    }

    // Canonical text form: sorted rows, exact turn rows when the code
    // carries them, decimal otherwise, and a parser that accepts its own
    // output.
    for (name, code) in [("ring(4)", &s1_ring(4)), ("octahedron", &oct)] {
        let text = canonical_serialization(code);
        println!("\ncanonical serialization of {name}:\n{text}");
        let back = parse_code(&text).unwrap();
        let again = canonical_serialization(&back);
        println!("round trip is byte-identical: {}", text == again);
        println!("round trip min angle: {:.12}", back.min_angle().unwrap());
    }
}

fn s1_ring(n: i64) -> SphericalCode {
    SphericalCode::from_turns_exact(2, (0..n).map(|k| vec![rat(k, n)]).collect()).unwrap()
}
