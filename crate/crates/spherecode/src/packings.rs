//! Lattices and periodic point sets with exact coordinates, exact shortest
//! vector enumeration, and center densities.
//!
//! Basis entries live in Q or a single real quadratic field Q(sqrt k) per
//! object (see [`crate::exact::Scalar`]). The shortest-vector search is a
//! depth-first coefficient enumeration over the Gram-Schmidt
//! orthogonalisation: per-level integer ranges are estimated in f64 and
//! widened by one on each side, while every pruning decision and every
//! final comparison is exact, so the result is exact despite the float
//! guidance. A separate brute-force box scan cross-checks completeness in
//! the tests.
//!
//! Scaling is kept out of the exact layer: an object stores exact
//! unit-scale entries plus one f64 multiplier, and densities are computed
//! scale-free, so rescaling never perturbs them.

use crate::exact::{parse_scalar, Rat, Scalar};
use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

/// Exact enumeration is priced for small dimensions only.
pub const MAX_ENUM_DIM: usize = 8;

#[derive(Debug, Error)]
pub enum PackingError {
    #[error("basis is singular")]
    SingularBasis,
    #[error("dimension must be at least 1, got {0}")]
    BadDimension(usize),
    #[error("entry length {got} does not match dimension {want}")]
    EntryLength { want: usize, got: usize },
    #[error("shortest-vector enumeration supports dimension <= {MAX_ENUM_DIM}, got {0}")]
    EnumerationBudget(usize),
    #[error("scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("translation list must be nonempty")]
    NoTranslations,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mixed quadratic fields: all entries of one object must share a single sqrt(k)")]
    MixedFields,
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, PackingError> {
    Err(PackingError::Parse { line, msg: msg.into() })
}

// ---------------------------------------------------------------------------
// Small exact linear algebra over Scalar.

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    let mut acc = Scalar::zero();
    for (x, y) in a.iter().zip(b) {
        acc = &acc + &(x * y);
    }
    acc
}

/// Determinant by fraction-free-ish Gaussian elimination with exact pivots.
fn determinant(cols: &[Vec<Scalar>]) -> Scalar {
    let n = cols.len();
    // Work on a row-major copy: m[r][c] = cols[c][r].
    let mut m: Vec<Vec<Scalar>> = (0..n)
        .map(|r| (0..n).map(|c| cols[c][r].clone()).collect())
        .collect();
    let mut det = Scalar::one();
    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| !m[r][col].is_zero()) {
            Some(r) => r,
            None => return Scalar::zero(),
        };
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = &det * &pivot;
        for r in (col + 1)..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot;
            for c in col..n {
                let sub = &factor * &m[col][c];
                m[r][c] = &m[r][c] - &sub;
            }
        }
    }
    det
}

/// Solves M x = b exactly (M given as columns), for coordinates of points
/// in a basis. Returns None when singular.
fn solve(cols: &[Vec<Scalar>], b: &[Scalar]) -> Option<Vec<Scalar>> {
    let n = cols.len();
    let mut m: Vec<Vec<Scalar>> = (0..n)
        .map(|r| {
            let mut row: Vec<Scalar> = (0..n).map(|c| cols[c][r].clone()).collect();
            row.push(b[r].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot_row, col);
        let pivot = m[col][col].clone();
        for c in col..=n {
            m[col][c] = &m[col][c] / &pivot;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - &sub;
                }
            }
        }
    }
    Some((0..n).map(|r| m[r][n].clone()).collect())
}

/// Gram-Schmidt data: mu[i][j] for j < i, and the squared norms of the
/// orthogonalised vectors. All exact.
struct Gso {
    mu: Vec<Vec<Scalar>>,
    bstar_norm2: Vec<Scalar>,
}

fn gso(cols: &[Vec<Scalar>]) -> Result<Gso, PackingError> {
    let n = cols.len();
    let mut bstar: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Scalar::zero(); n]; n];
    let mut norms = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let coef = &dot(&cols[i], &bstar[j]) / &norms[j];
            mu[i][j] = coef.clone();
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                let sub = &coef * bk;
                *vk = &*vk - &sub;
            }
        }
        let n2 = dot(&v, &v);
        if n2.is_zero() {
            return Err(PackingError::SingularBasis);
        }
        norms.push(n2);
        bstar.push(v);
    }
    Ok(Gso { mu, bstar_norm2: norms })
}

// ---------------------------------------------------------------------------
// Lattices.

/// Full-rank lattice in R^n: exact basis columns plus an f64 scale factor.
#[derive(Debug, Clone)]
pub struct Lattice {
    dim: usize,
    cols: Vec<Vec<Scalar>>,
    scale: f64,
}

impl Lattice {
    pub fn from_cols(cols: Vec<Vec<Scalar>>) -> Result<Self, PackingError> {
        let dim = cols.len();
        if dim == 0 {
            return Err(PackingError::BadDimension(0));
        }
        for c in &cols {
            if c.len() != dim {
                return Err(PackingError::EntryLength { want: dim, got: c.len() });
            }
        }
        if determinant(&cols).is_zero() {
            return Err(PackingError::SingularBasis);
        }
        Ok(Lattice { dim, cols, scale: 1.0 })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cols(&self) -> &[Vec<Scalar>] {
        &self.cols
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self, PackingError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(PackingError::BadScale(scale));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Covolume |det| of the unit-scale basis, exact.
    pub fn covolume_exact(&self) -> Scalar {
        determinant(&self.cols).abs()
    }

    /// Covolume including the scale factor.
    pub fn covolume(&self) -> f64 {
        self.covolume_exact().to_f64() * self.scale.powi(self.dim as i32)
    }

    /// The integer lattice Z^n.
    pub fn zn(n: usize) -> Self {
        let cols = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Scalar::one() } else { Scalar::zero() })
                    .collect()
            })
            .collect();
        Lattice::from_cols(cols).expect("identity basis")
    }

    /// Hexagonal lattice in the plane, minimum distance 1.
    pub fn hexagonal() -> Self {
        let half = Scalar::from_rat(Rat::new(BigInt::from(1), BigInt::from(2)));
        let root3_half = Scalar::quad(Rat::zero(), Rat::new(BigInt::from(1), BigInt::from(2)), 3);
        let cols = vec![
            vec![Scalar::one(), Scalar::zero()],
            vec![half, root3_half],
        ];
        Lattice::from_cols(cols).expect("hexagonal basis")
    }

    /// Face-centered cubic: D3, minimum distance sqrt 2.
    pub fn fcc() -> Self {
        let cols = vec![
            vec![Scalar::from_int(1), Scalar::from_int(1), Scalar::from_int(0)],
            vec![Scalar::from_int(1), Scalar::from_int(0), Scalar::from_int(1)],
            vec![Scalar::from_int(0), Scalar::from_int(1), Scalar::from_int(1)],
        ];
        Lattice::from_cols(cols).expect("fcc basis")
    }

    /// E8: even coordinate sums on Z^8 union its half-integer coset.
    pub fn e8() -> Self {
        let mut cols = Vec::new();
        let mut first = vec![Scalar::zero(); 8];
        first[0] = Scalar::from_int(2);
        cols.push(first);
        for i in 0..6 {
            let mut c = vec![Scalar::zero(); 8];
            c[i] = Scalar::from_int(-1);
            c[i + 1] = Scalar::from_int(1);
            cols.push(c);
        }
        let half = Scalar::from_rat(Rat::new(BigInt::from(1), BigInt::from(2)));
        cols.push(vec![half; 8]);
        Lattice::from_cols(cols).expect("e8 basis")
    }
}

// ---------------------------------------------------------------------------
// Periodic sets.

/// Finite union of lattice translates L + v_i. Translations are reduced
/// into the fundamental cell and canonicalised so the first is zero.
#[derive(Debug, Clone)]
pub struct PeriodicSet {
    lattice: Lattice,
    translations: Vec<Vec<Scalar>>,
}

impl PeriodicSet {
    pub fn new(lattice: Lattice, translations: Vec<Vec<Scalar>>) -> Result<Self, PackingError> {
        if translations.is_empty() {
            return Err(PackingError::NoTranslations);
        }
        let n = lattice.dim();
        for t in &translations {
            if t.len() != n {
                return Err(PackingError::EntryLength { want: n, got: t.len() });
            }
        }
        // Shift so the first translation is the origin (a global translate
        // changes nothing about the packing), then reduce each into the
        // fundamental cell by exact floor of its basis coordinates.
        let base = translations[0].clone();
        let mut reduced: Vec<Vec<Scalar>> = Vec::new();
        for t in &translations {
            let shifted: Vec<Scalar> =
                t.iter().zip(&base).map(|(a, b)| a - b).collect();
            let coords = solve(lattice.cols(), &shifted).ok_or(PackingError::SingularBasis)?;
            let mut cell = shifted;
            for (j, c) in coords.iter().enumerate() {
                let f = c.floor_int();
                if f.is_zero() {
                    continue;
                }
                let f_scalar = Scalar::from_rat(Rat::from(f));
                for (k, entry) in cell.iter_mut().enumerate() {
                    let sub = &f_scalar * &lattice.cols()[j][k];
                    *entry = &*entry - &sub;
                }
            }
            if !reduced.contains(&cell) {
                reduced.push(cell);
            }
        }
        // Deterministic order with the origin first.
        reduced.sort_by(|a, b| {
            let fa: Vec<f64> = a.iter().map(Scalar::to_f64).collect();
            let fb: Vec<f64> = b.iter().map(Scalar::to_f64).collect();
            fa.partial_cmp(&fb).unwrap_or(std::cmp::Ordering::Equal)
        });
        debug_assert!(reduced[0].iter().all(Scalar::is_zero), "origin translation first");
        Ok(PeriodicSet { lattice, translations: reduced })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn translations(&self) -> &[Vec<Scalar>] {
        &self.translations
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn n_translations(&self) -> usize {
        self.translations.len()
    }

    pub fn scale(&self) -> f64 {
        self.lattice.scale
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self, PackingError> {
        self.lattice = self.lattice.with_scale(scale)?;
        Ok(self)
    }

    /// The two-point family {0, g} + 2Z on the line; its packing fraction
    /// is g for 0 < g <= 1.
    pub fn two_point_line(g: Rat) -> Self {
        let lattice = Lattice::from_cols(vec![vec![Scalar::from_int(2)]]).unwrap();
        let translations = vec![vec![Scalar::zero()], vec![Scalar::from_rat(g)]];
        PeriodicSet::new(lattice, translations).expect("two-point line")
    }
}

/// Either flavour of packing, sharing the density and wrapping APIs.
#[derive(Debug, Clone)]
pub enum Packing {
    Lattice(Lattice),
    Periodic(PeriodicSet),
}

impl Packing {
    pub fn dim(&self) -> usize {
        match self {
            Packing::Lattice(l) => l.dim(),
            Packing::Periodic(p) => p.dim(),
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Packing::Lattice(l) => l.scale(),
            Packing::Periodic(p) => p.scale(),
        }
    }

    pub fn n_translations(&self) -> usize {
        match self {
            Packing::Lattice(_) => 1,
            Packing::Periodic(p) => p.n_translations(),
        }
    }

    pub fn lattice(&self) -> &Lattice {
        match self {
            Packing::Lattice(l) => l,
            Packing::Periodic(p) => p.lattice(),
        }
    }

    pub fn translations_or_origin(&self) -> Vec<Vec<Scalar>> {
        match self {
            Packing::Lattice(l) => vec![vec![Scalar::zero(); l.dim()]],
            Packing::Periodic(p) => p.translations().to_vec(),
        }
    }
}

// ---------------------------------------------------------------------------
// Exact shortest-vector / closest-vector enumeration.

/// Result of an exact minimum search.
#[derive(Debug, Clone)]
pub struct ShortestVectorInfo {
    /// Squared minimum norm at unit scale, exact.
    pub norm2_exact: Scalar,
    /// Minimum distance including the scale factor.
    pub length: f64,
    /// Number of minimal vectors (for SVP both signs count).
    pub n_minimal: u64,
    /// Integer coefficient vectors of up to 64 minimal vectors, in
    /// lexicographic enumeration order.
    pub minimal_coeffs: Vec<Vec<i64>>,
}

struct EnumCtx<'a> {
    gso: &'a Gso,
    /// GSO coordinates of the target point (zero vector for SVP).
    target: Vec<Scalar>,
    exclude_zero: bool,
    bound: Scalar,
    best: Option<Scalar>,
    count: u64,
    coeffs: Vec<Vec<i64>>,
    current: Vec<i64>,
}

impl EnumCtx<'_> {
    /// Enumerates coefficients at `level` (counting down), with `partial`
    /// the exact squared norm contributed by levels above.
    fn descend(&mut self, level: usize, partial: &Scalar) {
        let n = self.gso.bstar_norm2.len();
        // y = c_level + sum_{j > level} mu[j][level] c_j - target[level].
        let mut shift = -self.target[level].clone();
        for j in (level + 1)..n {
            let term = &self.gso.mu[j][level]
                * &Scalar::from_rat(Rat::from(BigInt::from(self.current[j])));
            shift = &shift + &term;
        }
        // f64 window, widened by 1 each side; exactness comes from the
        // exact pruning below, the window only has to be a superset.
        let remaining = (&self.bound - partial).to_f64().max(0.0);
        let halfwidth = (remaining / self.gso.bstar_norm2[level].to_f64()).sqrt();
        let center = -shift.to_f64();
        let lo = (center - halfwidth).floor() as i64 - 1;
        let hi = (center + halfwidth).ceil() as i64 + 1;
        for c in lo..=hi {
            self.current[level] = c;
            let y = &Scalar::from_rat(Rat::from(BigInt::from(c))) + &shift;
            let contrib = &(&y * &y) * &self.gso.bstar_norm2[level];
            let new_partial = partial + &contrib;
            if new_partial.cmp_exact(&self.bound) == Some(std::cmp::Ordering::Greater) {
                continue;
            }
            if level == 0 {
                if self.exclude_zero && self.current.iter().all(|&x| x == 0) {
                    continue;
                }
                match &self.best {
                    Some(b) => match new_partial.cmp_exact(b).unwrap() {
                        std::cmp::Ordering::Less => {
                            self.best = Some(new_partial.clone());
                            self.count = 1;
                            self.coeffs.clear();
                            self.coeffs.push(self.current.clone());
                        }
                        std::cmp::Ordering::Equal => {
                            self.count += 1;
                            if self.coeffs.len() < 64 {
                                self.coeffs.push(self.current.clone());
                            }
                        }
                        std::cmp::Ordering::Greater => {}
                    },
                    None => {
                        self.best = Some(new_partial.clone());
                        self.count = 1;
                        self.coeffs.push(self.current.clone());
                    }
                }
                // Tighten the global bound to the best found so far.
                if let Some(b) = &self.best {
                    if b.cmp_exact(&self.bound) == Some(std::cmp::Ordering::Less) {
                        self.bound = b.clone();
                    }
                }
            } else {
                self.descend(level - 1, &new_partial);
            }
        }
        self.current[level] = 0;
    }
}

fn enumerate_min(
    cols: &[Vec<Scalar>],
    target_point: Option<&[Scalar]>,
    initial_bound: Scalar,
) -> Result<(Scalar, u64, Vec<Vec<i64>>), PackingError> {
    let n = cols.len();
    if n > MAX_ENUM_DIM {
        return Err(PackingError::EnumerationBudget(n));
    }
    let g = gso(cols)?;
    // GSO coordinates of the target: t = sum target_j b*_j with
    // target_j = <t, b*_j> / |b*_j|^2. Recover through basis coords to
    // stay exact: solve for basis coordinates s, then the recursion shift
    // needs, at each level, s_level + sum_{j>level} mu[j][level] s_j ... the
    // direct GSO projection is simpler; compute b* explicitly again here.
    let mut bstar: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = cols[i].clone();
        for (j, prev) in bstar.iter().enumerate().take(i) {
            let coef = &g.mu[i][j];
            for (vk, bk) in v.iter_mut().zip(prev) {
                let sub = coef * bk;
                *vk = &*vk - &sub;
            }
        }
        bstar.push(v);
    }
    let target: Vec<Scalar> = match target_point {
        None => vec![Scalar::zero(); n],
        Some(t) => (0..n)
            .map(|j| &dot(t, &bstar[j]) / &g.bstar_norm2[j])
            .collect(),
    };
    let mut ctx = EnumCtx {
        gso: &g,
        target,
        exclude_zero: target_point.is_none(),
        bound: initial_bound,
        best: None,
        count: 0,
        coeffs: Vec::new(),
        current: vec![0; n],
    };
    ctx.descend(n - 1, &Scalar::zero());
    let best = ctx.best.expect("initial bound always admits a candidate");
    Ok((best, ctx.count, ctx.coeffs))
}

/// Exact shortest nonzero vector of a lattice.
pub fn shortest_vector(lat: &Lattice) -> Result<ShortestVectorInfo, PackingError> {
    // The shortest basis column is an admissible starting bound.
    let init = lat
        .cols()
        .iter()
        .map(|c| dot(c, c))
        .min_by(|a, b| a.cmp_exact(b).unwrap())
        .unwrap();
    let (norm2, count, coeffs) = enumerate_min(lat.cols(), None, init)?;
    let length = lat.scale * norm2.to_f64().sqrt();
    Ok(ShortestVectorInfo { norm2_exact: norm2, length, n_minimal: count, minimal_coeffs: coeffs })
}

/// Exact squared distance from a point to the nearest lattice vector.
fn closest_vector_norm2(lat: &Lattice, point: &[Scalar]) -> Result<Scalar, PackingError> {
    // Babai rounding gives an admissible initial bound.
    let coords = solve(lat.cols(), &point.to_vec()).ok_or(PackingError::SingularBasis)?;
    let mut residual = point.to_vec();
    for (j, c) in coords.iter().enumerate() {
        let r = c.floor_int();
        // Round to nearest: compare frac with 1/2 exactly.
        let frac = c - &Scalar::from_rat(Rat::from(r.clone()));
        let rounded = if frac.cmp_exact(&Scalar::from_rat(Rat::new(BigInt::from(1), BigInt::from(2))))
            == Some(std::cmp::Ordering::Greater)
        {
            r + 1
        } else {
            r
        };
        let f = Scalar::from_rat(Rat::from(rounded));
        for (k, entry) in residual.iter_mut().enumerate() {
            let sub = &f * &lat.cols()[j][k];
            *entry = &*entry - &sub;
        }
    }
    let init = dot(&residual, &residual);
    if init.is_zero() {
        // The point is a lattice vector.
        return Ok(Scalar::zero());
    }
    let (norm2, _, _) = enumerate_min(lat.cols(), Some(point), init)?;
    Ok(norm2)
}

/// Exact minimum distance of a packing (squared, unit scale) and scaled f64.
pub fn min_distance(p: &Packing) -> Result<ShortestVectorInfo, PackingError> {
    match p {
        Packing::Lattice(l) => shortest_vector(l),
        Packing::Periodic(ps) => {
            let base = shortest_vector(ps.lattice())?;
            let mut best = base.norm2_exact.clone();
            for i in 0..ps.n_translations() {
                for j in (i + 1)..ps.n_translations() {
                    let diff: Vec<Scalar> = ps.translations()[j]
                        .iter()
                        .zip(&ps.translations()[i])
                        .map(|(a, b)| a - b)
                        .collect();
                    let d2 = closest_vector_norm2(ps.lattice(), &diff)?;
                    if d2.is_zero() {
                        // Two translations congruent mod L would have been
                        // merged by the constructor.
                        continue;
                    }
                    if d2.cmp_exact(&best) == Some(std::cmp::Ordering::Less) {
                        best = d2;
                    }
                }
            }
            let length = ps.scale() * best.norm2_exact_f64_sqrt();
            Ok(ShortestVectorInfo {
                norm2_exact: best,
                length,
                n_minimal: 0,
                minimal_coeffs: Vec::new(),
            })
        }
    }
}

trait SqrtF64 {
    fn norm2_exact_f64_sqrt(&self) -> f64;
}

impl SqrtF64 for Scalar {
    fn norm2_exact_f64_sqrt(&self) -> f64 {
        self.to_f64().sqrt()
    }
}

/// Brute-force box scan used by tests to certify enumeration completeness:
/// scans all coefficient vectors with |c_i| <= c_bound.
pub fn shortest_vector_box(lat: &Lattice, c_bound: i64) -> Scalar {
    let n = lat.dim();
    let mut best: Option<Scalar> = None;
    let mut c = vec![-c_bound; n];
    loop {
        if c.iter().any(|&x| x != 0) {
            let mut v = vec![Scalar::zero(); n];
            for (j, &cj) in c.iter().enumerate() {
                if cj == 0 {
                    continue;
                }
                let f = Scalar::from_rat(Rat::from(BigInt::from(cj)));
                for (k, entry) in v.iter_mut().enumerate() {
                    let add = &f * &lat.cols()[j][k];
                    *entry = &*entry + &add;
                }
            }
            let n2 = dot(&v, &v);
            if best.as_ref().map_or(true, |b| n2.cmp_exact(b) == Some(std::cmp::Ordering::Less)) {
                best = Some(n2);
            }
        }
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == n {
                return best.expect("box contains nonzero vectors");
            }
            c[i] += 1;
            if c[i] <= c_bound {
                break;
            }
            c[i] = -c_bound;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Densities.

/// Center density and normalised density of a packing.
#[derive(Debug, Clone)]
pub struct DensityReport {
    /// Minimum distance, scaled.
    pub min_distance: f64,
    /// Covolume, scaled.
    pub covolume: f64,
    /// Center density delta (scale-free).
    pub center_density: f64,
    /// Exact center density when representable in one quadratic field.
    pub center_density_exact: Option<Scalar>,
    /// Normalised density Delta = delta * vol(B^n).
    pub density: f64,
}

/// delta = N * (l/2)^n / covol, computed scale-free; the exact value comes
/// from (l^2)^{n/2} when n is even, or (l^2)^{(n-1)/2} * sqrt(l^2) when odd
/// and the square root stays in one field.
pub fn center_density(p: &Packing) -> Result<DensityReport, PackingError> {
    let n = p.dim();
    let info = min_distance(p)?;
    let covol_exact = p.lattice().covolume_exact();
    let n_tr = p.n_translations() as i64;

    let exact = (|| -> Option<Scalar> {
        let l2 = &info.norm2_exact;
        let half_pow = if n % 2 == 0 {
            l2.pow_usize(n / 2)
        } else {
            let root = l2.as_rat().cloned().map(Scalar::from_rat)?.sqrt()?;
            l2.pow_usize(n / 2).try_mul(&root)?
        };
        let two_n = Scalar::from_rat(Rat::from(BigInt::from(2).pow(n as u32)));
        let num = Scalar::from_rat(Rat::from(BigInt::from(n_tr))).try_mul(&half_pow)?;
        num.try_div(&two_n.try_mul(&covol_exact)?)
    })();

    let l_unit = info.norm2_exact.to_f64().sqrt();
    let center = n_tr as f64 * (l_unit / 2.0).powi(n as i32) / covol_exact.to_f64();
    let density = center * crate::geom::ball_volume(n).map_err(|_| PackingError::BadDimension(n))?;
    Ok(DensityReport {
        min_distance: info.length,
        covolume: p.lattice().covolume(),
        center_density: center,
        center_density_exact: exact,
        density,
    })
}

/// Rescales a packing so its minimum distance becomes 2d (sphere radius d).
pub fn rescale_to_radius(p: &Packing, d: f64) -> Result<Packing, PackingError> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(PackingError::BadScale(d));
    }
    let info = min_distance(p)?;
    let l_unit = info.norm2_exact.to_f64().sqrt();
    let scale = 2.0 * d / l_unit;
    Ok(match p.clone() {
        Packing::Lattice(l) => Packing::Lattice(l.with_scale(scale)?),
        Packing::Periodic(ps) => Packing::Periodic(ps.with_scale(scale)?),
    })
}

// ---------------------------------------------------------------------------
// Text format.

/// Parses the packing text format:
///
/// ```text
/// packing v1
/// dim 2
/// basis 1 0
/// basis 1/2 1/2*sqrt(3)
/// translation 0 0
/// ```
///
/// `basis` rows are basis vectors (columns of the matrix); `translation`
/// rows are optional. `scale` may give an f64 multiplier.
pub fn parse_packing(text: &str) -> Result<Packing, PackingError> {
    let mut dim: Option<usize> = None;
    let mut basis: Vec<Vec<Scalar>> = Vec::new();
    let mut translations: Vec<Vec<Scalar>> = Vec::new();
    let mut scale: f64 = 1.0;
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "packing v1" {
                return perr(line_no, format!("expected 'packing v1', got '{line}'"));
            }
            saw_header = true;
            continue;
        }
        if let Some(v) = line.strip_prefix("dim ") {
            dim = Some(
                v.parse()
                    .map_err(|_| PackingError::Parse { line: line_no, msg: format!("bad dim '{v}'") })?,
            );
        } else if let Some(v) = line.strip_prefix("basis ") {
            basis.push(parse_entry_row(v, dim, line_no)?);
        } else if let Some(v) = line.strip_prefix("translation ") {
            translations.push(parse_entry_row(v, dim, line_no)?);
        } else if let Some(v) = line.strip_prefix("scale ") {
            scale = v
                .parse()
                .map_err(|_| PackingError::Parse { line: line_no, msg: format!("bad scale '{v}'") })?;
        } else {
            return perr(line_no, format!("unrecognised line '{line}'"));
        }
    }
    if !saw_header {
        return perr(1, "empty input, expected 'packing v1'");
    }
    let n = dim.ok_or(PackingError::Parse { line: 1, msg: "missing dim line".into() })?;
    if basis.len() != n {
        return perr(1, format!("dim {n} needs {n} basis rows, found {}", basis.len()));
    }
    check_single_field(basis.iter().chain(&translations))?;
    let lat = Lattice::from_cols(basis)?.with_scale(scale)?;
    if translations.is_empty() {
        Ok(Packing::Lattice(lat))
    } else {
        Ok(Packing::Periodic(PeriodicSet::new(lat, translations)?))
    }
}

fn parse_entry_row(
    v: &str,
    dim: Option<usize>,
    line_no: usize,
) -> Result<Vec<Scalar>, PackingError> {
    let n = dim.ok_or(PackingError::Parse {
        line: line_no,
        msg: "dim must come before basis/translation rows".into(),
    })?;
    let fields: Vec<&str> = v.split_whitespace().collect();
    if fields.len() != n {
        return perr(line_no, format!("expected {n} entries, got {}", fields.len()));
    }
    fields
        .iter()
        .map(|f| parse_scalar(f).map_err(|msg| PackingError::Parse { line: line_no, msg }))
        .collect()
}

fn check_single_field<'a>(
    rows: impl Iterator<Item = &'a Vec<Scalar>>,
) -> Result<(), PackingError> {
    let mut k_seen: u64 = 0;
    for row in rows {
        for s in row {
            let (_, k) = s.radical_part();
            if k == 0 {
                continue;
            }
            if k_seen == 0 {
                k_seen = k;
            } else if k_seen != k {
                return Err(PackingError::MixedFields);
            }
        }
    }
    Ok(())
}

/// Serialises a packing in the text format (unit-scale entries plus scale).
pub fn serialize_packing(p: &Packing) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("packing v1\n");
    writeln!(out, "dim {}", p.dim()).unwrap();
    for col in p.lattice().cols() {
        let parts: Vec<String> = col.iter().map(|s| s.to_string()).collect();
        writeln!(out, "basis {}", parts.join(" ")).unwrap();
    }
    if let Packing::Periodic(ps) = p {
        for t in ps.translations() {
            let parts: Vec<String> = t.iter().map(|s| s.to_string()).collect();
            writeln!(out, "translation {}", parts.join(" ")).unwrap();
        }
    }
    if p.scale() != 1.0 {
        writeln!(out, "scale {:.17e}", p.scale()).unwrap();
    }
    out
}
