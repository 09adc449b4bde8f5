//! Jamming certificates for spherical codes.
//!
//! A code is infinitesimally jammed when no first-order motion of its
//! points preserves all minimal-distance contacts while escaping the rigid
//! rotations. The test builds the contact graph, quotients out the global
//! rotation space, and then asks a linear program for a motion that keeps
//! every contact slack nonnegative and makes the total slack positive; if
//! none exists, an exact nullspace computation decides whether nontrivial
//! zero-slack flexes remain. Codes with exact rational coordinates are
//! decided entirely in exact arithmetic.
//!
//! On the circle the same question reduces to gap combinatorics, which is
//! solved directly (and cross-checked against the LP in the tests).

use crate::exact::Rat;
use crate::geom::{min_angle_of_points, GeomError, SpherePoint, SphericalCode};
use crate::simplex::{nullspace_basis, rank, solve_lp, LpNum, LpOutcome, LpProblem, Relation};
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use thiserror::Error;

pub const DEFAULT_CONTACT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum JamError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("contact tolerance must be nonnegative and finite, got {0}")]
    BadTolerance(f64),
}

/// Contact structure at the minimal angle.
#[derive(Debug, Clone)]
pub struct ContactGraph {
    pub min_angle: f64,
    pub tol: f64,
    /// Edges (i, j) with i < j at angular distance within tol of minimal.
    pub edges: Vec<(usize, usize)>,
    /// Vertices touching no edge.
    pub rattlers: Vec<usize>,
}

pub fn contact_graph(code: &SphericalCode, tol: f64) -> Result<ContactGraph, JamError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(JamError::BadTolerance(tol));
    }
    let phi = code.min_angle()?;
    let mut edges = Vec::new();
    let pts = code.points();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = crate::geom::angular_distance(&pts[i], &pts[j])?;
            if d <= phi + tol {
                edges.push((i, j));
            }
        }
    }
    let mut touched = vec![false; pts.len()];
    for &(i, j) in &edges {
        touched[i] = true;
        touched[j] = true;
    }
    let rattlers = (0..pts.len()).filter(|&i| !touched[i]).collect();
    Ok(ContactGraph { min_angle: phi, tol, edges, rattlers })
}

/// Basis (as flattened N*n vectors) of the motions induced by the global
/// rotation group: images of the points under the elementary rotation
/// generators, reduced to an independent set.
pub fn rotation_space(code: &SphericalCode) -> Vec<Vec<f64>> {
    let gens = rotation_generator_images_f64(code);
    let mut rows = gens.clone();
    let r = rank(&mut rows);
    rows.truncate(r);
    rows
}

pub fn rotation_space_dim(code: &SphericalCode) -> usize {
    rotation_space(code).len()
}

fn rotation_generator_images_f64(code: &SphericalCode) -> Vec<Vec<f64>> {
    let n = code.dim();
    let n_pts = code.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut v = vec![0.0; n_pts * n];
            for (i, p) in code.points().iter().enumerate() {
                // Generator E_ab: (x_a, x_b) -> (-x_b, x_a).
                v[i * n + a] = -p.coords()[b];
                v[i * n + b] = p.coords()[a];
            }
            out.push(v);
        }
    }
    out
}

fn rotation_generator_images_exact(rows: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = rows[0].len();
    let n_pts = rows.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let mut v = vec![Rat::zero(); n_pts * n];
            for (i, p) in rows.iter().enumerate() {
                v[i * n + a] = -p[b].clone();
                v[i * n + b] = p[a].clone();
            }
            out.push(v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JamStatus {
    #[serde(rename = "infinitesimally-jammed")]
    InfinitesimallyJammed,
    #[serde(rename = "unjammed")]
    Unjammed,
}

/// Verdict of the jamming test. An `Unjammed` verdict carries a witness
/// motion: per-point tangent vectors, sup-normalised to 1, that preserve
/// every minimal contact to first order (and strictly improve at least one
/// unless the motion is a pure zero-slack flex or a rattler motion).
#[derive(Debug, Clone, Serialize)]
pub struct JamVerdict {
    pub status: JamStatus,
    pub rotation_dim: usize,
    pub witness: Option<Vec<Vec<f64>>>,
}

impl JamVerdict {
    fn jammed(rotation_dim: usize) -> Self {
        JamVerdict { status: JamStatus::InfinitesimallyJammed, rotation_dim, witness: None }
    }

    fn unjammed(rotation_dim: usize, witness: Vec<Vec<f64>>) -> Self {
        JamVerdict {
            status: JamStatus::Unjammed,
            rotation_dim,
            witness: Some(sup_normalise(witness)),
        }
    }
}

fn sup_normalise(mut w: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut max = 0.0f64;
    for v in &w {
        for c in v {
            max = max.max(c.abs());
        }
    }
    if max > 0.0 {
        for v in &mut w {
            for c in v.iter_mut() {
                *c /= max;
            }
        }
    }
    w
}

/// Decides infinitesimal jamming. `tol` controls which pairs count as
/// contacts (see [`contact_graph`]).
pub fn jam_test(code: &SphericalCode, tol: f64) -> Result<JamVerdict, JamError> {
    let graph = contact_graph(code, tol)?;
    let rot_dim = rotation_space_dim(code);

    // A rattler moves freely: the code is unjammed with the rattler motion
    // as witness.
    if let Some(&r) = graph.rattlers.first() {
        let n = code.dim();
        let x = code.points()[r].coords();
        // Tangent direction: project the coordinate axis least aligned
        // with x.
        let k = (0..n)
            .min_by(|&a, &b| x[a].abs().partial_cmp(&x[b].abs()).unwrap())
            .unwrap();
        let mut t: Vec<f64> = (0..n).map(|d| if d == k { 1.0 } else { 0.0 }).collect();
        let dot: f64 = t.iter().zip(x).map(|(a, b)| a * b).sum();
        for (d, tv) in t.iter_mut().enumerate() {
            *tv -= dot * x[d];
        }
        let norm: f64 = t.iter().map(|c| c * c).sum::<f64>().sqrt();
        for tv in t.iter_mut() {
            *tv /= norm;
        }
        let mut witness = vec![vec![0.0; n]; code.len()];
        witness[r] = t;
        return Ok(JamVerdict::unjammed(rot_dim, witness));
    }

    if code.dim() == 2 {
        return Ok(jam_test_circle(code, &graph, rot_dim));
    }

    match code.exact_cartesian() {
        Some(rows) => Ok(jam_test_lp_exact(rows, &graph, rot_dim)),
        None => Ok(jam_test_lp_f64(code, &graph, rot_dim)),
    }
}

/// Circle case by gap combinatorics: the code is jammed exactly when every
/// gap is minimal; otherwise rotating the arcs between contacts widens all
/// minimal gaps at once.
fn jam_test_circle(code: &SphericalCode, graph: &ContactGraph, rot_dim: usize) -> JamVerdict {
    let mut order: Vec<(f64, usize)> = code
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| (p.coords()[1].atan2(p.coords()[0]), i))
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = order.len();
    let tau = 2.0 * std::f64::consts::PI;
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            let a = order[k].0;
            let b = order[(k + 1) % n].0;
            let mut g = b - a;
            if k + 1 == n {
                g += tau;
            }
            g
        })
        .collect();
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let is_min: Vec<bool> = gaps.iter().map(|&g| g <= min_gap + graph.tol).collect();
    let n_free = is_min.iter().filter(|&&m| !m).count();
    if n_free == 0 {
        return JamVerdict::jammed(rot_dim);
    }
    // Gap velocity +1 on minimal gaps, balanced shrink on free gaps; the
    // point velocities are the prefix sums.
    let n_min = n - n_free;
    let shrink = n_min as f64 / n_free as f64;
    let mut u = vec![0.0; n];
    for k in 0..n - 1 {
        let dg = if is_min[k] { 1.0 } else { -shrink };
        u[k + 1] = u[k] + dg;
    }
    let mean = u.iter().sum::<f64>() / n as f64;
    let mut witness = vec![vec![0.0; 2]; n];
    for (k, &(theta, idx)) in order.iter().enumerate() {
        let speed = u[k] - mean;
        witness[idx] = vec![-theta.sin() * speed, theta.cos() * speed];
    }
    JamVerdict::unjammed(rot_dim, witness)
}

/// Shared LP construction over any LpNum field. Variables are the split
/// motion v = p - q plus one slack per contact; rows are tangency,
/// contact-slack definitions, rotation orthogonality, and the box keeping
/// the LP bounded. Returns (optimal total slack, motion) on success.
struct JamLp<T> {
    problem: LpProblem<T>,
    n_pts: usize,
    dim: usize,
}

fn build_jam_lp<T: LpNum>(
    coords: &[Vec<T>],
    edges: &[(usize, usize)],
    rotation_rows: &[Vec<T>],
) -> JamLp<T> {
    let n_pts = coords.len();
    let dim = coords[0].len();
    let nv = n_pts * dim;
    let n_vars = 2 * nv + edges.len();
    let zero = T::lp_zero();
    let one = T::lp_one();
    let mut rows: Vec<(Vec<T>, Relation, T)> = Vec::new();
    // Writes coefficient c for motion coordinate (i, d) into a row,
    // splitting over p and q.
    let put = |row: &mut Vec<T>, i: usize, d: usize, c: &T| {
        let idx = i * dim + d;
        row[idx] = row[idx].add(c);
        row[nv + idx] = row[nv + idx].sub(c);
    };
    // Tangency: x_i . v_i = 0.
    for (i, x) in coords.iter().enumerate() {
        let mut row = vec![zero.clone(); n_vars];
        for (d, c) in x.iter().enumerate() {
            put(&mut row, i, d, c);
        }
        rows.push((row, Relation::Eq, zero.clone()));
    }
    // Contacts: (x_i - x_j) . (v_i - v_j) - s_e = 0.
    for (e, &(i, j)) in edges.iter().enumerate() {
        let mut row = vec![zero.clone(); n_vars];
        for d in 0..dim {
            let c = coords[i][d].sub(&coords[j][d]);
            put(&mut row, i, d, &c);
            put(&mut row, j, d, &c.neg());
        }
        row[2 * nv + e] = one.neg();
        rows.push((row, Relation::Eq, zero.clone()));
    }
    // Rotation orthogonality.
    for r in rotation_rows {
        let mut row = vec![zero.clone(); n_vars];
        for (k, c) in r.iter().enumerate() {
            row[k] = row[k].add(c);
            row[nv + k] = row[nv + k].sub(c);
        }
        rows.push((row, Relation::Eq, zero.clone()));
    }
    // Box: p + q <= 1 per coordinate.
    for k in 0..nv {
        let mut row = vec![zero.clone(); n_vars];
        row[k] = one.clone();
        row[nv + k] = one.clone();
        rows.push((row, Relation::Le, one.clone()));
    }
    let mut objective = vec![zero; n_vars];
    for e in 0..edges.len() {
        objective[2 * nv + e] = one.clone();
    }
    JamLp { problem: LpProblem { n_vars, objective, rows }, n_pts, dim }
}

fn motion_from_solution<T: LpNum>(lp: &JamLp<T>, sol: &[T], to_f64: impl Fn(&T) -> f64) -> Vec<Vec<f64>> {
    let nv = lp.n_pts * lp.dim;
    (0..lp.n_pts)
        .map(|i| {
            (0..lp.dim)
                .map(|d| {
                    let idx = i * lp.dim + d;
                    to_f64(&sol[idx].sub(&sol[nv + idx]))
                })
                .collect()
        })
        .collect()
}

/// Equality system whose kernel (within the rotation-orthogonal tangent
/// space) is the space of zero-slack flexes.
fn flex_matrix<T: LpNum>(
    coords: &[Vec<T>],
    edges: &[(usize, usize)],
    rotation_rows: &[Vec<T>],
) -> Vec<Vec<T>> {
    let n_pts = coords.len();
    let dim = coords[0].len();
    let nv = n_pts * dim;
    let zero = T::lp_zero();
    let mut rows = Vec::new();
    for (i, x) in coords.iter().enumerate() {
        let mut row = vec![zero.clone(); nv];
        for (d, c) in x.iter().enumerate() {
            row[i * dim + d] = c.clone();
        }
        rows.push(row);
    }
    for &(i, j) in edges {
        let mut row = vec![zero.clone(); nv];
        for d in 0..dim {
            let c = coords[i][d].sub(&coords[j][d]);
            row[i * dim + d] = row[i * dim + d].add(&c);
            row[j * dim + d] = row[j * dim + d].sub(&c);
        }
        rows.push(row);
    }
    for r in rotation_rows {
        rows.push(r.clone());
    }
    rows
}

fn jam_test_lp_exact(rows: &[Vec<Rat>], graph: &ContactGraph, rot_dim: usize) -> JamVerdict {
    let gens = rotation_generator_images_exact(rows);
    let mut rot = gens;
    let r = rank(&mut rot);
    rot.truncate(r);
    debug_assert_eq!(r, rot_dim, "exact and f64 rotation ranks agree");

    let lp = build_jam_lp(rows, &graph.edges, &rot);
    match solve_lp(&lp.problem) {
        LpOutcome::Optimal { value, solution } => {
            if value.is_positive() {
                let motion =
                    motion_from_solution(&lp, &solution, |r| r.to_f64().unwrap_or(f64::NAN));
                return JamVerdict::unjammed(rot_dim, motion);
            }
        }
        other => unreachable!("jam LP is feasible and bounded, got {other:?}"),
    }
    let flex = flex_matrix(rows, &graph.edges, &rot);
    let kernel = nullspace_basis(&flex);
    match kernel.first() {
        Some(v) => {
            let dim = rows[0].len();
            let motion: Vec<Vec<f64>> = (0..rows.len())
                .map(|i| {
                    (0..dim).map(|d| v[i * dim + d].to_f64().unwrap_or(f64::NAN)).collect()
                })
                .collect();
            JamVerdict::unjammed(rot_dim, motion)
        }
        None => JamVerdict::jammed(rot_dim),
    }
}

fn jam_test_lp_f64(code: &SphericalCode, graph: &ContactGraph, rot_dim: usize) -> JamVerdict {
    let coords: Vec<Vec<f64>> = code.points().iter().map(|p| p.coords().to_vec()).collect();
    let rot = rotation_space(code);
    let lp = build_jam_lp(&coords, &graph.edges, &rot);
    match solve_lp(&lp.problem) {
        LpOutcome::Optimal { value, solution } => {
            // The f64 tableau's zero threshold is 1e-9; require clear
            // positivity before declaring an escape motion.
            if value > 1e-7 {
                let motion = motion_from_solution(&lp, &solution, |&v| v);
                return JamVerdict::unjammed(rot_dim, motion);
            }
        }
        other => unreachable!("jam LP is feasible and bounded, got {other:?}"),
    }
    let flex = flex_matrix(&coords, &graph.edges, &rot);
    let kernel = nullspace_basis(&flex);
    match kernel.first() {
        Some(v) => {
            let n = code.dim();
            let motion: Vec<Vec<f64>> =
                (0..code.len()).map(|i| v[i * n..(i + 1) * n].to_vec()).collect();
            JamVerdict::unjammed(rot_dim, motion)
        }
        None => JamVerdict::jammed(rot_dim),
    }
}

/// Applies a witness motion at step eps and reports how far the minimal
/// chordal distance dropped (positive = degradation). Sound witnesses stay
/// within O(eps^2).
pub fn witness_chordal_degradation(
    code: &SphericalCode,
    witness: &[Vec<f64>],
    eps: f64,
) -> Result<f64, JamError> {
    let before = min_chord(code.points());
    let moved: Vec<SpherePoint> = code
        .points()
        .iter()
        .zip(witness)
        .map(|(p, w)| {
            let coords: Vec<f64> =
                p.coords().iter().zip(w).map(|(c, wv)| c + eps * wv).collect();
            SpherePoint::normalized(coords)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let after = min_chord(&moved);
    Ok(before - after)
}

fn min_chord(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let d2: f64 = points[i]
                .coords()
                .iter()
                .zip(points[j].coords())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            best = best.min(d2.sqrt());
        }
    }
    best
}

/// Random tangent perturbations of magnitude `step` per point; returns
/// true when some trial improves the minimal angle by more than step^2.
/// Fully determined by the seed.
pub fn perturbation_probe(
    code: &SphericalCode,
    trials: u64,
    step: f64,
    seed: u64,
) -> Result<bool, JamError> {
    let phi = code.min_angle()?;
    if step == 0.0 {
        return Ok(false);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = code.dim();
    for _ in 0..trials {
        let moved: Vec<SpherePoint> = code
            .points()
            .iter()
            .map(|p| {
                // Gaussian direction via Box-Muller, projected to the
                // tangent space and scaled to `step`.
                let mut v: Vec<f64> = (0..n)
                    .map(|_| {
                        let u1: f64 = 1.0 - rng.gen::<f64>();
                        let u2: f64 = rng.gen();
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                let dot: f64 = v.iter().zip(p.coords()).map(|(a, b)| a * b).sum();
                for (d, vv) in v.iter_mut().enumerate() {
                    *vv -= dot * p.coords()[d];
                }
                let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                let scale = if norm > 1e-300 { step / norm } else { 0.0 };
                let coords: Vec<f64> = p
                    .coords()
                    .iter()
                    .zip(&v)
                    .map(|(c, vv)| c + scale * vv)
                    .collect();
                SpherePoint::normalized(coords)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let new_phi = min_angle_of_points(&moved)?;
        if new_phi > phi + step * step {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn s1_equi(n: usize) -> SphericalCode {
        let turns = (0..n).map(|k| vec![rat(k as i64, n as i64)]).collect();
        SphericalCode::from_turns_exact(2, turns).unwrap()
    }

    fn s1_angles(angles: &[f64]) -> SphericalCode {
        let pts = angles
            .iter()
            .map(|a| SpherePoint::new(vec![a.cos(), a.sin()]).unwrap())
            .collect();
        SphericalCode::from_points(pts).unwrap()
    }

    fn octahedron_exact() -> SphericalCode {
        let one = rat(1, 1);
        let zero = rat(0, 1);
        let rows = vec![
            vec![one.clone(), zero.clone(), zero.clone()],
            vec![-one.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), zero.clone()],
            vec![zero.clone(), -one.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), one.clone()],
            vec![zero.clone(), zero.clone(), -one],
        ];
        SphericalCode::from_rational_cartesian(rows).unwrap()
    }

    #[test]
    fn contact_graph_examples() {
        // 4 equally spaced points on the circle form a 4-cycle.
        let sq = s1_equi(4);
        let g = contact_graph(&sq, 1e-9).unwrap();
        assert_eq!(g.edges.len(), 4);
        assert!(g.rattlers.is_empty());
        // Octahedron: 12 edges (antipodes are not contacts).
        let oct = octahedron_exact();
        let g = contact_graph(&oct, 1e-9).unwrap();
        assert_eq!(g.edges.len(), 12);
        assert!(g.rattlers.is_empty());
        assert!((g.min_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rotation_space_dims() {
        assert_eq!(rotation_space_dim(&s1_equi(5)), 1);
        assert_eq!(rotation_space_dim(&octahedron_exact()), 3);
        // A single point on S^2 has a 2-dimensional orbit of motions (the
        // stabiliser is 1-dimensional).
        let single = SphericalCode::from_points(vec![
            SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap(),
            SpherePoint::new(vec![-1.0, 0.0, 0.0]).unwrap(),
        ])
        .unwrap();
        // Antipodal pair: still rank 2 (E_23 fixes both).
        assert_eq!(rotation_space_dim(&single), 2);
    }

    #[test]
    fn equally_spaced_circle_codes_are_jammed() {
        for n in 2..=12 {
            let v = jam_test(&s1_equi(n), 1e-9).unwrap();
            assert_eq!(v.status, JamStatus::InfinitesimallyJammed, "n = {n}");
            assert_eq!(v.rotation_dim, 1);
        }
    }

    #[test]
    fn uneven_circle_code_unjams_with_improving_witness() {
        // Four minimal gaps of 1.1 rad and one free gap.
        let code = s1_angles(&[0.0, 1.1, 2.2, 3.3, 4.4]);
        let v = jam_test(&code, 1e-9).unwrap();
        assert_eq!(v.status, JamStatus::Unjammed);
        let w = v.witness.unwrap();
        // The witness must strictly improve the minimal angle.
        let eps = 1e-4;
        let before = code.min_angle().unwrap();
        let moved: Vec<SpherePoint> = code
            .points()
            .iter()
            .zip(&w)
            .map(|(p, wv)| {
                SpherePoint::normalized(vec![
                    p.coords()[0] + eps * wv[0],
                    p.coords()[1] + eps * wv[1],
                ])
                .unwrap()
            })
            .collect();
        let after = min_angle_of_points(&moved).unwrap();
        assert!(after > before + eps * 1e-3, "improvement {} -> {}", before, after);
        // And it is sound in the chordal metric.
        let drop = witness_chordal_degradation(&code, &w, eps).unwrap();
        assert!(drop <= 10.0 * eps * eps, "chordal degradation {drop}");
    }

    #[test]
    fn rattler_detected_and_witnessed() {
        let code = s1_angles(&[0.0, 1.0, 2.0, 4.5]);
        let g = contact_graph(&code, 1e-9).unwrap();
        assert_eq!(g.rattlers, vec![3]);
        let v = jam_test(&code, 1e-9).unwrap();
        assert_eq!(v.status, JamStatus::Unjammed);
        let w = v.witness.unwrap();
        // Only the rattler moves.
        for (i, wv) in w.iter().enumerate() {
            let norm: f64 = wv.iter().map(|c| c * c).sum::<f64>().sqrt();
            if i == 3 {
                // Sup-normalised: largest component 1, Euclidean norm >= 1.
                assert!(norm >= 1.0 - 1e-12 && norm <= 2f64.sqrt() + 1e-12);
            } else {
                assert_eq!(norm, 0.0);
            }
        }
        let drop = witness_chordal_degradation(&code, &w, 1e-4).unwrap();
        assert!(drop <= 10.0 * 1e-8);
    }

    #[test]
    fn octahedron_is_jammed_exactly() {
        let v = jam_test(&octahedron_exact(), 1e-9).unwrap();
        assert_eq!(v.status, JamStatus::InfinitesimallyJammed);
        assert_eq!(v.rotation_dim, 3);
        assert!(v.witness.is_none());
    }

    #[test]
    fn antipodal_pair_on_s2_is_unjammed_by_flex() {
        let pair = SphericalCode::from_rational_cartesian(vec![
            vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(-1, 1), rat(0, 1), rat(0, 1)],
        ])
        .unwrap();
        let v = jam_test(&pair, 1e-9).unwrap();
        assert_eq!(v.status, JamStatus::Unjammed);
        let w = v.witness.unwrap();
        // The flex moves both points with the same tangent vector; its
        // chordal degradation is second order.
        let drop = witness_chordal_degradation(&pair, &w, 1e-4).unwrap();
        assert!(drop <= 10.0 * 1e-8, "drop {drop}");
    }

    #[test]
    fn circle_path_agrees_with_generic_lp() {
        for angles in [
            vec![0.0, 1.1, 2.2, 3.3, 4.4],
            vec![0.0, 2.0943951023931953, 4.1887902047863905], // equilateral
            vec![0.0, 1.2, 2.4, 3.6, 4.8],                     // uneven pentagon
        ] {
            let code = s1_angles(&angles);
            let graph = contact_graph(&code, 1e-9).unwrap();
            if !graph.rattlers.is_empty() {
                continue;
            }
            let circle = jam_test_circle(&code, &graph, 1);
            let lp = jam_test_lp_f64(&code, &graph, 1);
            assert_eq!(circle.status, lp.status, "angles {angles:?}");
        }
    }

    #[test]
    fn verdict_serialises_to_stable_json() {
        let v = jam_test(&s1_equi(3), 1e-9).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(
            json,
            "{\"status\":\"infinitesimally-jammed\",\"rotation_dim\":1,\"witness\":null}"
        );
    }

    #[test]
    fn probe_cannot_improve_equilateral_triangle() {
        // The gap sum is fixed, so the minimal gap can never exceed 2 pi/3.
        let tri = s1_equi(3);
        assert!(!perturbation_probe(&tri, 500, 1e-3, 7).unwrap());
        assert!(!perturbation_probe(&tri, 10, 0.0, 7).unwrap());
    }

    #[test]
    fn probe_improves_perturbed_tetrahedron() {
        let s = 1.0 / 3f64.sqrt();
        let mut pts = vec![
            vec![s, s, s],
            vec![s, -s, -s],
            vec![-s, s, -s],
            vec![-s, -s, s],
        ];
        // Nudge vertex 0 toward vertex 1, worsening the minimal angle.
        for d in 0..3 {
            pts[0][d] += 0.05 * (pts[1][d] - pts[0][d]);
        }
        let code = SphericalCode::from_points(
            pts.into_iter().map(|c| SpherePoint::normalized(c).unwrap()).collect(),
        )
        .unwrap();
        assert!(perturbation_probe(&code, 50, 1e-3, 11).unwrap());
    }

    #[test]
    fn probe_is_deterministic() {
        let code = s1_angles(&[0.0, 1.1, 2.2, 3.3, 4.4]);
        let a = perturbation_probe(&code, 40, 1e-3, 123).unwrap();
        let b = perturbation_probe(&code, 40, 1e-3, 123).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn f64_and_exact_paths_agree_on_octahedron() {
        let oct = octahedron_exact();
        // Strip exactness by rebuilding from f64 points.
        let approx =
            SphericalCode::from_points(oct.points().to_vec()).unwrap();
        let exact_v = jam_test(&oct, 1e-9).unwrap();
        let f64_v = jam_test(&approx, 1e-9).unwrap();
        assert_eq!(exact_v.status, f64_v.status);
        assert_eq!(exact_v.rotation_dim, f64_v.rotation_dim);
    }
}
