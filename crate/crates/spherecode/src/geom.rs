//! Spherical geometry: points and codes on S^(n-1), the angular metric,
//! surface and cap areas, and cap-packing densities.
//!
//! Area formulas are evaluated from scratch: the total surface area uses the
//! exact half-integer gamma recursion, and cap areas integrate sin^(n-2) with
//! an adaptive Simpson rule at absolute tolerance 1e-12. Code density and cap
//! area share one code path so that relative comparisons are consistent.

use crate::exact::{exact_cos_turn, exact_sin_turn, Rat};
use num_traits::ToPrimitive;
use thiserror::Error;

pub const SIMPSON_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("point {index} is not on the unit sphere (norm {norm})")]
    NotOnSphere { index: usize, norm: f64 },
    #[error("code must contain at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("code contains duplicate points at indices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("angle {0} outside [0, pi]")]
    AngleOutOfRange(f64),
    #[error("exact angle data unavailable for this code")]
    NoExactForm,
}

const NORM_TOL: f64 = 1e-9;

/// Point on a unit sphere, stored as Cartesian coordinates in R^n.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Accepts coordinates already on the sphere (norm within 1e-9 of 1),
    /// then renormalises to kill accumulated rounding.
    pub fn new(coords: Vec<f64>) -> Result<Self, GeomError> {
        if coords.len() < 2 {
            return Err(GeomError::BadDimension(coords.len()));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(GeomError::NotOnSphere { index: 0, norm });
        }
        let coords = coords.into_iter().map(|c| c / norm).collect();
        Ok(SpherePoint { coords })
    }

    /// Accepts stored canonical coordinates verbatim: validates the norm
    /// but keeps the exact bits, so parsing serialized output is
    /// byte-stable. Renormalising here would shift reloaded points by an
    /// ulp and break the canonical form's idempotence.
    pub(crate) fn from_stored(coords: Vec<f64>) -> Result<Self, GeomError> {
        if coords.len() < 2 {
            return Err(GeomError::BadDimension(coords.len()));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(GeomError::NotOnSphere { index: 0, norm });
        }
        Ok(SpherePoint { coords })
    }

    /// Scales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self, GeomError> {
        if coords.len() < 2 {
            return Err(GeomError::BadDimension(coords.len()));
        }
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(GeomError::NotOnSphere { index: 0, norm: 0.0 });
        }
        Ok(SpherePoint { coords: coords.into_iter().map(|c| c / norm).collect() })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }
}

/// Angular (geodesic) distance arccos(<x, y>), clamped against rounding.
pub fn angular_distance(x: &SpherePoint, y: &SpherePoint) -> Result<f64, GeomError> {
    if x.dim() != y.dim() {
        return Err(GeomError::DimensionMismatch(x.dim(), y.dim()));
    }
    Ok(x.dot(y).clamp(-1.0, 1.0).acos())
}

/// Finite set of sphere points, optionally carrying exact angular data.
///
/// `exact_turns` stores each point as turn fractions of the polar-angle
/// chain (see [`SphericalCode::from_turns_exact`]); `exact_cartesian`
/// stores rational Cartesian coordinates where available. Either form, when
/// present, reproduces the f64 coordinates to within 1e-12 per entry.
#[derive(Clone, Debug)]
pub struct SphericalCode {
    dim: usize,
    points: Vec<SpherePoint>,
    exact_turns: Option<Vec<Vec<Rat>>>,
    exact_cartesian: Option<Vec<Vec<Rat>>>,
}

impl SphericalCode {
    pub fn from_points(points: Vec<SpherePoint>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::TooFewPoints { needed: 1, got: 0 });
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(GeomError::DimensionMismatch(dim, p.dim()));
            }
        }
        check_distinct(&points)?;
        Ok(SphericalCode { dim, points, exact_turns: None, exact_cartesian: None })
    }

    /// Builds a code from exact turn fractions along the polar-angle chain:
    /// a point in S^(n-1) is (t_1, ..., t_{n-1}) with
    ///   x_1 = cos(2 pi t_1),
    ///   x_j = sin(2 pi t_1) ... sin(2 pi t_{j-1}) cos(2 pi t_j),
    ///   x_n = sin(2 pi t_1) ... sin(2 pi t_{n-1}),
    /// where t_j in [0, 1/2] for j < n-1 and t_{n-1} in [0, 1).
    pub fn from_turns_exact(dim: usize, turns: Vec<Vec<Rat>>) -> Result<Self, GeomError> {
        if dim < 2 {
            return Err(GeomError::BadDimension(dim));
        }
        let mut points = Vec::with_capacity(turns.len());
        let mut cartesian: Option<Vec<Vec<Rat>>> = Some(Vec::with_capacity(turns.len()));
        for t in &turns {
            if t.len() != dim - 1 {
                return Err(GeomError::DimensionMismatch(dim - 1, t.len()));
            }
            let coords = turns_to_cartesian_f64(t);
            points.push(SpherePoint::new(coords)?);
            if let Some(cart) = cartesian.as_mut() {
                match turns_to_cartesian_exact(t) {
                    Some(c) => cart.push(c),
                    None => cartesian = None,
                }
            }
        }
        check_distinct(&points)?;
        Ok(SphericalCode { dim, points, exact_turns: Some(turns), exact_cartesian: cartesian })
    }

    /// Builds a code from exact rational Cartesian coordinates; each row
    /// must have exact unit norm.
    pub fn from_rational_cartesian(rows: Vec<Vec<Rat>>) -> Result<Self, GeomError> {
        if rows.is_empty() {
            return Err(GeomError::TooFewPoints { needed: 1, got: 0 });
        }
        let dim = rows[0].len();
        if dim < 2 {
            return Err(GeomError::BadDimension(dim));
        }
        let mut points = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(GeomError::DimensionMismatch(dim, row.len()));
            }
            let norm2: Rat = row.iter().map(|c| c * c).sum();
            if norm2 != Rat::from_integer(1.into()) {
                return Err(GeomError::NotOnSphere {
                    index: i,
                    norm: norm2.to_f64().unwrap_or(f64::NAN).sqrt(),
                });
            }
            let coords: Vec<f64> = row.iter().map(|c| c.to_f64().unwrap()).collect();
            points.push(SpherePoint::new(coords)?);
        }
        check_distinct(&points)?;
        Ok(SphericalCode { dim, points, exact_turns: None, exact_cartesian: Some(rows) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn exact_turns(&self) -> Option<&[Vec<Rat>]> {
        self.exact_turns.as_deref()
    }

    pub fn exact_cartesian(&self) -> Option<&[Vec<Rat>]> {
        self.exact_cartesian.as_deref()
    }

    /// Minimal pairwise angular distance; requires at least two points.
    /// Computed as arccos of the maximal inner product, one arccos total.
    pub fn min_angle(&self) -> Result<f64, GeomError> {
        min_angle_of_points(&self.points)
    }

    /// Binary rate log2(#X) / n.
    pub fn rate(&self) -> f64 {
        (self.points.len() as f64).log2() / self.dim as f64
    }
}

fn check_distinct(points: &[SpherePoint]) -> Result<(), GeomError> {
    // Exact coordinate duplicates are construction bugs; catch them in
    // O(N log N) by sorting bit patterns. Near-duplicates surface later as
    // a tiny min_angle, which callers check against their own tolerances.
    let mut keys: Vec<(Vec<u64>, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.coords().iter().map(|c| c.to_bits()).collect(), i))
        .collect();
    keys.sort();
    for w in keys.windows(2) {
        if w[0].0 == w[1].0 {
            let (i, j) = (w[0].1.min(w[1].1), w[0].1.max(w[1].1));
            return Err(GeomError::DuplicatePoint(i, j));
        }
    }
    Ok(())
}

/// Min angle over a raw point slice; `workers` > 1 splits the row loop.
pub fn min_angle_of_points(points: &[SpherePoint]) -> Result<f64, GeomError> {
    min_angle_of_points_parallel(points, 1)
}

pub fn min_angle_of_points_parallel(
    points: &[SpherePoint],
    workers: usize,
) -> Result<f64, GeomError> {
    if points.len() < 2 {
        return Err(GeomError::TooFewPoints { needed: 2, got: points.len() });
    }
    let max_dot = if workers <= 1 || points.len() < 256 {
        max_dot_rows(points, 0, points.len())
    } else {
        let workers = workers.min(points.len());
        let chunk = points.len().div_ceil(workers);
        let mut best = f64::NEG_INFINITY;
        let results: Vec<f64> = std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for w in 0..workers {
                let lo = w * chunk;
                let hi = ((w + 1) * chunk).min(points.len());
                if lo >= hi {
                    continue;
                }
                handles.push(scope.spawn(move || max_dot_rows(points, lo, hi)));
            }
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for r in results {
            best = best.max(r);
        }
        best
    };
    Ok(max_dot.clamp(-1.0, 1.0).acos())
}

fn max_dot_rows(points: &[SpherePoint], lo: usize, hi: usize) -> f64 {
    let mut max_dot = f64::NEG_INFINITY;
    for i in lo..hi {
        for j in (i + 1)..points.len() {
            let d = points[i].dot(&points[j]);
            if d > max_dot {
                max_dot = d;
            }
        }
    }
    max_dot
}

fn turns_to_cartesian_f64(turns: &[Rat]) -> Vec<f64> {
    let tau = 2.0 * std::f64::consts::PI;
    let n = turns.len() + 1;
    let mut coords = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (j, t) in turns.iter().enumerate() {
        let a = tau * t.to_f64().unwrap();
        coords[j] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    coords[n - 1] = sin_prod;
    coords
}

fn turns_to_cartesian_exact(turns: &[Rat]) -> Option<Vec<Rat>> {
    let n = turns.len() + 1;
    let mut coords = vec![Rat::from_integer(0.into()); n];
    let mut sin_prod = Rat::from_integer(1.into());
    for (j, t) in turns.iter().enumerate() {
        let c = exact_cos_turn(t)?;
        let s = exact_sin_turn(t)?;
        coords[j] = &sin_prod * c;
        sin_prod *= s;
    }
    coords[n - 1] = sin_prod;
    Some(coords)
}

/// Gamma(1 + n/2) via the half-integer recursion from Gamma(1) = 1 and
/// Gamma(1/2) = sqrt(pi).
fn gamma_one_plus_half(n: usize) -> f64 {
    // n even: (n/2)!. n odd: Gamma(1 + n/2) = (n/2)(n/2 - 1)...(1/2) sqrt(pi).
    if n % 2 == 0 {
        let mut acc = 1.0;
        for i in 1..=(n / 2) {
            acc *= i as f64;
        }
        acc
    } else {
        let mut acc = std::f64::consts::PI.sqrt();
        let mut x = n as f64 / 2.0;
        while x > 0.0 {
            acc *= x;
            x -= 1.0;
        }
        acc
    }
}

/// Surface area of the unit sphere S^(n-1) in R^n, any n >= 1.
fn sphere_area_any(n: usize) -> f64 {
    // S_1 (two endpoints of an interval, counting measure) = 2; the formula
    // n pi^{n/2} / Gamma(1 + n/2) gives exactly that for n = 1.
    (n as f64) * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_one_plus_half(n)
}

/// Surface area S_n of S^(n-1); n >= 2.
pub fn sphere_area(n: usize) -> Result<f64, GeomError> {
    if n < 2 {
        return Err(GeomError::BadDimension(n));
    }
    Ok(sphere_area_any(n))
}

/// Volume of the unit ball in R^n: S_n / n. Defined for n >= 1; the
/// ball in R^1 is the interval of volume 2.
pub fn ball_volume(n: usize) -> Result<f64, GeomError> {
    if n < 1 {
        return Err(GeomError::BadDimension(n));
    }
    Ok(sphere_area_any(n) / n as f64)
}

/// Adaptive Simpson quadrature with Richardson acceptance test.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (left, flm) = simpson(f, a, fa, m, fm);
        let (right, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, flm, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, right, frm, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, fm, tol, 48)
}

/// Area of a spherical cap of angular radius phi/2 on S^(n-1):
/// S(n, phi) = S_{n-1} * integral_0^{phi/2} sin^{n-2}(t) dt.
pub fn cap_area(n: usize, phi: f64) -> Result<f64, GeomError> {
    if n < 2 {
        return Err(GeomError::BadDimension(n));
    }
    if !(0.0..=std::f64::consts::PI).contains(&phi) {
        return Err(GeomError::AngleOutOfRange(phi));
    }
    let prefactor = sphere_area_any(n - 1);
    let power = (n as i32 - 2) as f64;
    let integral = if n == 2 {
        // sin^0 = 1 exactly; avoid quadrature noise on the flat integrand.
        phi / 2.0
    } else {
        adaptive_simpson(&|t: f64| t.sin().powf(power), 0.0, phi / 2.0, SIMPSON_TOL)
    };
    Ok(prefactor * integral)
}

/// Fraction of S^(n-1) covered by disjoint caps of radius phi_X/2 around
/// the code points: #X * S(n, phi_X) / S_n.
pub fn code_density(code: &SphericalCode) -> Result<f64, GeomError> {
    let phi = code.min_angle()?;
    Ok(code.len() as f64 * cap_area(code.dim(), phi)? / sphere_area(code.dim())?)
}
