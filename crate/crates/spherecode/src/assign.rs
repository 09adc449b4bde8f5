//! Configuration distance between spherical codes: minimum average angular
//! displacement over point matchings, optionally after an orthogonal
//! alignment heuristic.
//!
//! The assignment step is an exact Hungarian algorithm (shortest augmenting
//! paths with potentials, O(N^3)). Symmetry d(X, Y) = d(Y, X) holds exactly
//! because arguments are canonically ordered before any arithmetic and the
//! matched costs are summed in sorted order.

use crate::geom::{angular_distance, GeomError, SphericalCode};
use crate::serial::canonical_serialization;
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct ConfigDistanceReport {
    /// Average matched angular distance, normalised by pi into [0, 1].
    /// Codes of different dimension or cardinality are incomparable and get
    /// the maximal value 1.
    pub value: f64,
    /// `matching[i]` is the index in Y matched to point i of X; empty when
    /// the codes are incomparable.
    pub matching: Vec<usize>,
    /// Whether the orthogonal alignment heuristic was applied.
    pub aligned: bool,
}

/// Hungarian algorithm on a square cost matrix; returns `assign` with
/// `assign[row] = col`. Deterministic for fixed input.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // Potentials and column assignments are 1-indexed; index 0 is the
    // virtual start column of each augmenting search.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

fn cost_matrix(a: &SphericalCode, b: &SphericalCode) -> Result<Vec<Vec<f64>>, GeomError> {
    let n = a.len();
    let mut cost = vec![vec![0.0; n]; n];
    for (i, pa) in a.points().iter().enumerate() {
        for (j, pb) in b.points().iter().enumerate() {
            cost[i][j] = angular_distance(pa, pb)? / std::f64::consts::PI;
        }
    }
    Ok(cost)
}

/// Sums the matched costs in sorted order, making the result independent of
/// matching orientation.
fn matched_value(cost: &[Vec<f64>], assign: &[usize]) -> f64 {
    let mut terms: Vec<f64> = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).collect();
    terms.sort_by(f64::total_cmp);
    terms.iter().sum::<f64>() / assign.len() as f64
}

/// Least-squares orthogonal map sending the points of `a` toward their
/// matched partners in `b` (one Procrustes round on the given matching).
fn procrustes(a: &SphericalCode, b: &SphericalCode, assign: &[usize]) -> DMatrix<f64> {
    let n = a.dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &j) in assign.iter().enumerate() {
        let x = a.points()[i].coords();
        let y = b.points()[j].coords();
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] += y[r] * x[c];
            }
        }
    }
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd with u");
    let vt = svd.v_t.expect("svd with vt");
    u * vt
}

fn apply_map(code: &SphericalCode, map: &DMatrix<f64>) -> Result<SphericalCode, GeomError> {
    let n = code.dim();
    let pts = code
        .points()
        .iter()
        .map(|p| {
            let mut out = vec![0.0; n];
            for (r, o) in out.iter_mut().enumerate() {
                for c in 0..n {
                    *o += map[(r, c)] * p.coords()[c];
                }
            }
            crate::geom::SpherePoint::normalized(out)
        })
        .collect::<Result<Vec<_>, _>>()?;
    SphericalCode::from_points(pts)
}

/// Configuration distance between codes. With `align` set, an orthogonal
/// alignment heuristic is tried and the better of the two matchings wins.
pub fn config_distance(
    x: &SphericalCode,
    y: &SphericalCode,
    align: bool,
) -> Result<ConfigDistanceReport, GeomError> {
    if x.dim() != y.dim() || x.len() != y.len() {
        return Ok(ConfigDistanceReport { value: 1.0, matching: Vec::new(), aligned: false });
    }
    // Canonical argument order makes symmetry exact: all arithmetic sees
    // the pair in serialization order, and the matching is inverted on the
    // way out if the caller's order was the other one.
    let swap = canonical_serialization(x) > canonical_serialization(y);
    let (a, b) = if swap { (y, x) } else { (x, y) };

    let cost = cost_matrix(a, b)?;
    let base_assign = hungarian(&cost);
    let base_value = matched_value(&cost, &base_assign);

    let (value, assign, aligned) = if align {
        let map = procrustes(a, b, &base_assign);
        let a_mapped = apply_map(a, &map)?;
        let cost2 = cost_matrix(&a_mapped, b)?;
        let assign2 = hungarian(&cost2);
        let value2 = matched_value(&cost2, &assign2);
        if value2 < base_value {
            (value2, assign2, true)
        } else {
            (base_value, base_assign, true)
        }
    } else {
        (base_value, base_assign, false)
    };

    let matching = if swap {
        // assign maps a=y -> b=x; invert to x -> y.
        let mut inv = vec![0usize; assign.len()];
        for (i, &j) in assign.iter().enumerate() {
            inv[j] = i;
        }
        inv
    } else {
        assign
    };
    Ok(ConfigDistanceReport { value, matching, aligned })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::SpherePoint;

    fn s1_code(angles: &[f64]) -> SphericalCode {
        let pts = angles
            .iter()
            .map(|a| SpherePoint::new(vec![a.cos(), a.sin()]).unwrap())
            .collect();
        SphericalCode::from_points(pts).unwrap()
    }

    #[test]
    fn zero_on_permuted_copies() {
        let x = s1_code(&[0.0, 1.0, 2.0, 4.0]);
        let y = s1_code(&[2.0, 4.0, 0.0, 1.0]);
        let rep = config_distance(&x, &y, false).unwrap();
        assert_eq!(rep.value, 0.0);
        // Matching must send each point to its equal partner.
        for (i, &j) in rep.matching.iter().enumerate() {
            let d = angular_distance(&x.points()[i], &y.points()[j]).unwrap();
            assert!(d < 1e-15);
        }
    }

    #[test]
    fn rotation_by_theta_costs_theta_over_pi() {
        let theta = 0.3;
        let x = s1_code(&[0.0, std::f64::consts::PI]);
        let y = s1_code(&[theta, std::f64::consts::PI + theta]);
        let rep = config_distance(&x, &y, false).unwrap();
        assert!((rep.value - theta / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn symmetry_is_bit_exact() {
        let x = s1_code(&[0.0, 0.9, 2.1, 3.3, 5.0]);
        let y = s1_code(&[0.4, 1.5, 2.8, 4.1, 5.9]);
        let d_xy = config_distance(&x, &y, false).unwrap().value;
        let d_yx = config_distance(&y, &x, false).unwrap().value;
        assert_eq!(d_xy.to_bits(), d_yx.to_bits());
        let a_xy = config_distance(&x, &y, true).unwrap().value;
        let a_yx = config_distance(&y, &x, true).unwrap().value;
        assert_eq!(a_xy.to_bits(), a_yx.to_bits());
    }

    #[test]
    fn incomparable_codes_get_value_one() {
        let x = s1_code(&[0.0, 1.0]);
        let y = s1_code(&[0.0, 1.0, 2.0]);
        let rep = config_distance(&x, &y, false).unwrap();
        assert_eq!(rep.value, 1.0);
        assert!(rep.matching.is_empty());
        let oct = crate::geom::tests::octahedron();
        let rep2 = config_distance(&x, &oct, true).unwrap();
        assert_eq!(rep2.value, 1.0);
        assert!(!rep2.aligned);
    }

    #[test]
    fn alignment_recovers_small_rotations() {
        let oct = crate::geom::tests::octahedron();
        // Rotate by 0.1 rad in the (x, y) plane.
        let t: f64 = 0.1;
        let rot = |p: &SpherePoint| {
            let c = p.coords();
            SpherePoint::new(vec![
                t.cos() * c[0] - t.sin() * c[1],
                t.sin() * c[0] + t.cos() * c[1],
                c[2],
            ])
            .unwrap()
        };
        let rotated =
            SphericalCode::from_points(oct.points().iter().map(rot).collect()).unwrap();
        let plain = config_distance(&oct, &rotated, false).unwrap();
        assert!(plain.value > 0.01, "unaligned distance should see the rotation");
        let aligned = config_distance(&oct, &rotated, true).unwrap();
        assert!(aligned.aligned);
        assert!(aligned.value < 1e-8, "alignment should null the rotation, got {}", aligned.value);
    }

    #[test]
    fn triangle_inequality_spot_check() {
        let x = s1_code(&[0.0, 2.0, 4.0]);
        let y = s1_code(&[0.2, 2.3, 4.4]);
        let z = s1_code(&[0.5, 2.5, 4.8]);
        let xy = config_distance(&x, &y, false).unwrap().value;
        let yz = config_distance(&y, &z, false).unwrap().value;
        let xz = config_distance(&x, &z, false).unwrap().value;
        assert!(xz <= xy + yz + 1e-12);
    }
}
