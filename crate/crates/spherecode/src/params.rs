//! Rate/angle parameter space: bound curves, the quantised parameter grid,
//! and empirical rate envelopes.
//!
//! Angles are quantised to buckets of width 1/512 rad. Rates are keyed
//! exactly: R = log2(N)/n is stored as (B, p/q) with N = B^k, B minimal,
//! and p/q = k/n reduced, so codes with equal rate share a key with no
//! floating point involved.

use crate::geom::{GeomError, SphericalCode};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Grid resolution: angles bucketed to floor(phi * 512).
pub const PHI_RESOLUTION_DEN: u32 = 512;

#[derive(Debug, Error)]
pub enum ParamError {
    #[error("angle {0} outside the Rankin domain (pi/2, pi]")]
    RankinDomain(f64),
    #[error("angle {0} outside the entropy-bound domain (0, pi/2]")]
    EnvelopeDomain(f64),
    #[error("empty grid has no envelope")]
    EmptyGrid,
    #[error("bucket {bucket} outside envelope range [{min}, {max}]")]
    EnvelopeRange { bucket: u32, min: u32, max: u32 },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Rankin-type bound (cos phi - 1)/cos phi for phi in (pi/2, pi].
pub fn rankin_bound(phi: f64) -> Result<f64, ParamError> {
    if !(phi > std::f64::consts::FRAC_PI_2 && phi <= std::f64::consts::PI) {
        return Err(ParamError::RankinDomain(phi));
    }
    let c = phi.cos();
    Ok((c - 1.0) / c)
}

/// x log2 x with the continuity convention 0 log 0 = 0.
fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Entropy-type rate bound H(phi) for phi in (0, pi/2]:
/// with s = sin phi, H = (1+s)/(2s) * log2((1+s)/(2s)) - (1-s)/(2s) * log2((1-s)/(2s)).
///
/// H(pi/2) = 0 exactly. H grows without bound as phi -> 0; evaluation is
/// allowed for any positive phi, but values below about 1e-6 rad are far
/// outside the regime the envelope machinery is used in.
pub fn kl_envelope(phi: f64) -> Result<f64, ParamError> {
    if !(phi > 0.0 && phi <= std::f64::consts::FRAC_PI_2) {
        return Err(ParamError::EnvelopeDomain(phi));
    }
    let s = phi.sin();
    let hi = (1.0 + s) / (2.0 * s);
    let lo = (1.0 - s) / (2.0 * s);
    Ok(xlog2x(hi) - xlog2x(lo))
}

/// A code's summary parameters: binary rate and minimal angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodePoint {
    pub rate: f64,
    pub phi: f64,
}

impl CodePoint {
    pub fn of_code(code: &SphericalCode) -> Result<Self, ParamError> {
        Ok(CodePoint { rate: code.rate(), phi: code.min_angle()? })
    }
}

/// Whether a parameter point lies on or under the bound curves: angles
/// above pi/2 are unconstrained here, otherwise the rate must not exceed
/// H(phi).
pub fn in_undergraph(p: &CodePoint) -> bool {
    if p.phi > std::f64::consts::FRAC_PI_2 {
        return true;
    }
    match kl_envelope(p.phi) {
        Ok(h) => p.rate <= h,
        Err(_) => false,
    }
}

/// Exact rate key: rate = (num/den) * log2(base), with base minimal (no
/// perfect-power ambiguity) and num/den reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RateKey {
    pub base: u64,
    pub num: u32,
    pub den: u32,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl RateKey {
    /// Key for a code with N points in dimension n.
    pub fn from_counts(n_points: u64, dim: u32) -> RateKey {
        assert!(n_points >= 1 && dim >= 1);
        if n_points == 1 {
            return RateKey { base: 1, num: 0, den: 1 };
        }
        // Find the largest k with n_points = base^k; base is then minimal.
        let mut best_k = 1u32;
        for k in 2..=63 {
            if let Some(b) = integer_kth_root(n_points, k) {
                if pow_check(b, k) == Some(n_points) {
                    best_k = k;
                }
            }
        }
        let base = integer_kth_root(n_points, best_k).unwrap();
        let g = gcd(best_k as u64, dim as u64) as u32;
        RateKey { base, num: best_k / g, den: dim / g }
    }

    pub fn rate_f64(&self) -> f64 {
        if self.base <= 1 {
            return 0.0;
        }
        (self.base as f64).log2() * self.num as f64 / self.den as f64
    }
}

impl fmt::Display for RateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}*log2({})", self.num, self.den, self.base)
    }
}

fn integer_kth_root(n: u64, k: u32) -> Option<u64> {
    if k == 1 {
        return Some(n);
    }
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    for b in guess.saturating_sub(2)..=guess + 2 {
        if pow_check(b, k) == Some(n) {
            return Some(b);
        }
    }
    None
}

fn pow_check(b: u64, k: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..k {
        acc = acc.checked_mul(b)?;
    }
    Some(acc)
}

/// Grid cell: quantised angle bucket plus exact rate key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub bucket: u32,
    pub rate: RateKey,
}

pub fn bucket_of(phi: f64) -> u32 {
    (phi * PHI_RESOLUTION_DEN as f64).floor() as u32
}

pub fn bucket_midpoint(bucket: u32) -> f64 {
    (bucket as f64 + 0.5) / PHI_RESOLUTION_DEN as f64
}

/// What a cell has seen: dimensions as a multiset, total record count, and
/// the distinct (N, n) pairs behind the shared rate.
#[derive(Debug, Clone, Default)]
pub struct Occupancy {
    pub dims: Vec<u32>,
    pub count: u64,
    pub witnesses: Vec<(u64, u32)>,
}

/// Quantised map from parameter cells to occupancy data.
#[derive(Debug, Clone, Default)]
pub struct ParamGrid {
    cells: BTreeMap<CellKey, Occupancy>,
}

impl ParamGrid {
    pub fn new() -> Self {
        ParamGrid::default()
    }

    pub fn record_code(&mut self, code: &SphericalCode) -> Result<CellKey, ParamError> {
        let phi = code.min_angle()?;
        Ok(self.record_params(code.len() as u64, code.dim() as u32, phi))
    }

    /// Records a code known only by its summary parameters.
    pub fn record_params(&mut self, n_points: u64, dim: u32, phi: f64) -> CellKey {
        let key = CellKey { bucket: bucket_of(phi), rate: RateKey::from_counts(n_points, dim) };
        let occ = self.cells.entry(key).or_default();
        occ.dims.push(dim);
        occ.dims.sort_unstable();
        occ.count += 1;
        if !occ.witnesses.contains(&(n_points, dim)) {
            occ.witnesses.push((n_points, dim));
            occ.witnesses.sort_unstable();
        }
        key
    }

    pub fn cells(&self) -> &BTreeMap<CellKey, Occupancy> {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Sub-grid of the records living in one ambient dimension.
    pub fn restrict_to_dim(&self, dim: u32) -> ParamGrid {
        let mut out = ParamGrid::new();
        for (key, occ) in &self.cells {
            let kept: Vec<u32> = occ.dims.iter().copied().filter(|&d| d == dim).collect();
            if kept.is_empty() {
                continue;
            }
            let witnesses: Vec<(u64, u32)> =
                occ.witnesses.iter().copied().filter(|&(_, d)| d == dim).collect();
            out.cells.insert(
                *key,
                Occupancy { count: kept.len() as u64, dims: kept, witnesses },
            );
        }
        out
    }
}

/// Best recorded rate per angle bucket, with the bucket range that was
/// observed. Buckets inside the range that hold no record report rate 0;
/// queries outside the range are errors.
#[derive(Debug, Clone)]
pub struct AlphaEnvelope {
    buckets: BTreeMap<u32, BucketBest>,
    bucket_min: u32,
    bucket_max: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct BucketBest {
    pub alpha_hat: f64,
    /// (N, n) of a record achieving alpha_hat.
    pub witness: (u64, u32),
}

impl AlphaEnvelope {
    pub fn bucket_range(&self) -> (u32, u32) {
        (self.bucket_min, self.bucket_max)
    }

    pub fn alpha_hat_at(&self, bucket: u32) -> Result<f64, ParamError> {
        if bucket < self.bucket_min || bucket > self.bucket_max {
            return Err(ParamError::EnvelopeRange {
                bucket,
                min: self.bucket_min,
                max: self.bucket_max,
            });
        }
        Ok(self.buckets.get(&bucket).map_or(0.0, |b| b.alpha_hat))
    }

    /// Upper bound H at the bucket midpoint, when the midpoint is in the
    /// entropy-bound domain.
    pub fn upper_h_at(&self, bucket: u32) -> Option<f64> {
        kl_envelope(bucket_midpoint(bucket)).ok()
    }

    /// Resolution slack at a bucket: how much the envelope would move if
    /// its best record gained one more point. This is the honest grain of
    /// alpha_hat; margins smaller than it are not decidable at this
    /// resolution.
    pub fn granularity_at(&self, bucket: u32) -> f64 {
        match self.buckets.get(&bucket) {
            Some(b) => {
                let (n_points, dim) = b.witness;
                ((n_points as f64 + 1.0) / n_points as f64).log2() / dim as f64
            }
            None => 0.0,
        }
    }

    pub fn occupied_buckets(&self) -> impl Iterator<Item = (&u32, &BucketBest)> {
        self.buckets.iter()
    }
}

/// Builds the empirical rate envelope alpha_hat(bucket) = max recorded rate.
pub fn empirical_alpha(grid: &ParamGrid) -> Result<AlphaEnvelope, ParamError> {
    if grid.is_empty() {
        return Err(ParamError::EmptyGrid);
    }
    let mut buckets: BTreeMap<u32, BucketBest> = BTreeMap::new();
    for (key, occ) in grid.cells() {
        let rate = key.rate.rate_f64();
        // Any witness of the cell realises the same exact rate; keep the
        // lexically smallest for determinism.
        let witness = occ.witnesses[0];
        let entry = buckets.entry(key.bucket).or_insert(BucketBest { alpha_hat: rate, witness });
        if rate > entry.alpha_hat {
            *entry = BucketBest { alpha_hat: rate, witness };
        }
    }
    let bucket_min = *buckets.keys().next().unwrap();
    let bucket_max = *buckets.keys().next_back().unwrap();
    Ok(AlphaEnvelope { buckets, bucket_min, bucket_max })
}

/// Membership test against the envelope: the point's rate must reach
/// alpha_hat(bucket) - eps.
pub fn gamma_eps_member(p: &CodePoint, env: &AlphaEnvelope, eps: f64) -> Result<bool, ParamError> {
    if !(eps > 0.0) {
        return Err(ParamError::BadEpsilon(eps));
    }
    let alpha = env.alpha_hat_at(bucket_of(p.phi))?;
    Ok(p.rate >= alpha - eps)
}

/// CSV of the envelope and bound curves over the observed bucket range:
/// columns phi, alpha_hat, H (empty above pi/2), rankin (empty below).
pub fn envelope_csv(env: &AlphaEnvelope) -> String {
    let mut out = String::from("phi,alpha_hat,kl_envelope,rankin_bound\n");
    for bucket in env.bucket_min..=env.bucket_max {
        let phi = bucket_midpoint(bucket);
        let alpha = env.alpha_hat_at(bucket).expect("bucket in range");
        let h = kl_envelope(phi).map(|v| format!("{v:.11e}")).unwrap_or_default();
        let r = rankin_bound(phi).map(|v| format!("{v:.11e}")).unwrap_or_default();
        out.push_str(&format!("{phi:.11e},{alpha:.11e},{h},{r}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn rankin_reference_values() {
        assert!((rankin_bound(std::f64::consts::PI).unwrap() - 2.0).abs() < 1e-15);
        let two_thirds = 2.0 * std::f64::consts::PI / 3.0;
        assert!((rankin_bound(two_thirds).unwrap() - 3.0).abs() < 1e-12);
        assert!((rankin_bound(2.0).unwrap() - 3.4029979617223809898).abs() < 1e-12);
        assert!(rankin_bound(std::f64::consts::FRAC_PI_2).is_err());
        assert!(rankin_bound(3.2).is_err());
    }

    #[test]
    fn entropy_bound_reference_values() {
        // pi/2 is exactly zero: sin = 1 makes both terms vanish.
        assert_eq!(kl_envelope(std::f64::consts::FRAC_PI_2).unwrap(), 0.0);
        let h_pi3 = kl_envelope(std::f64::consts::FRAC_PI_3).unwrap();
        assert!((h_pi3 - 0.40141354608572873).abs() < 1e-12, "H(pi/3) = {h_pi3}");
        let h_pi6 = kl_envelope(std::f64::consts::FRAC_PI_6).unwrap();
        // Closed form at pi/6: 1.5 log2 1.5 + 0.5.
        assert!((h_pi6 - 1.3774437510817342722).abs() < 1e-12);
        assert!((h_pi6 - (1.5f64 * 1.5f64.log2() + 0.5)).abs() < 1e-14);
        let h_one = kl_envelope(1.0).unwrap();
        assert!((h_one - 0.46314792954955132852).abs() < 1e-12);
        assert!(kl_envelope(0.0).is_err());
        assert!(kl_envelope(1.6).is_err());
    }

    #[test]
    fn undergraph_examples() {
        assert!(in_undergraph(&CodePoint { rate: 0.4, phi: std::f64::consts::FRAC_PI_3 }));
        assert!(!in_undergraph(&CodePoint { rate: 1.0, phi: std::f64::consts::FRAC_PI_3 }));
        // Any rate is allowed past pi/2.
        assert!(in_undergraph(&CodePoint { rate: 9.0, phi: 2.0 }));
    }

    #[test]
    fn rate_keys_canonicalize_perfect_powers() {
        // 4 points in dim 4 and 8 points in dim 6 share rate 1/2 = (1/2) log2 2.
        let a = RateKey::from_counts(4, 4);
        let b = RateKey::from_counts(8, 6);
        let c = RateKey::from_counts(16, 8);
        assert_eq!(a, RateKey { base: 2, num: 1, den: 2 });
        assert_eq!(a, b);
        assert_eq!(b, c);
        // 6 points in dim 3 is not a perfect power: base 6.
        assert_eq!(RateKey::from_counts(6, 3), RateKey { base: 6, num: 1, den: 3 });
        // 64 = 2^6 in dim 4 reduces to (2, 3, 2).
        assert_eq!(RateKey::from_counts(64, 4), RateKey { base: 2, num: 3, den: 2 });
        assert_eq!(RateKey::from_counts(1, 5), RateKey { base: 1, num: 0, den: 1 });
        assert!((RateKey::from_counts(6, 3).rate_f64() - 6f64.log2() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_cells_merge_equal_parameters() {
        let mut grid = ParamGrid::new();
        let oct = crate::geom::tests::octahedron();
        let k1 = grid.record_code(&oct).unwrap();
        let k2 = grid.record_code(&oct).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(grid.len(), 1);
        let occ = &grid.cells()[&k1];
        assert_eq!(occ.count, 2);
        assert_eq!(occ.dims, vec![3, 3]);
        assert_eq!(k1.bucket, bucket_of(std::f64::consts::FRAC_PI_2));
        assert_eq!(k1.bucket, 804);
    }

    #[test]
    fn same_cell_from_different_dimensions() {
        // 8 equally spaced points on an equator of S^2 and 16 points on two
        // orthogonal octagon rings in S^3 share phi = pi/4 and rate 1.
        let mut grid = ParamGrid::new();
        let mut turns3 = Vec::new();
        for k in 0..8u32 {
            turns3.push(vec![rat(1, 4), rat(k as i64, 8)]);
        }
        let ring = crate::geom::SphericalCode::from_turns_exact(3, turns3).unwrap();
        assert!((ring.min_angle().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let k_ring = grid.record_code(&ring).unwrap();

        // Two orthogonal great-circle octagons in R^4, as rational-free
        // Cartesian points.
        let mut pts = Vec::new();
        for k in 0..8u32 {
            let a = std::f64::consts::FRAC_PI_4 * k as f64;
            pts.push(crate::geom::SpherePoint::new(vec![a.cos(), a.sin(), 0.0, 0.0]).unwrap());
            pts.push(crate::geom::SpherePoint::new(vec![0.0, 0.0, a.cos(), a.sin()]).unwrap());
        }
        let double = crate::geom::SphericalCode::from_points(pts).unwrap();
        assert!((double.min_angle().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        let k_double = grid.record_code(&double).unwrap();

        assert_eq!(k_ring, k_double, "same bucket and exact rate key");
        let occ = &grid.cells()[&k_ring];
        assert_eq!(occ.dims, vec![3, 4]);
        assert_eq!(occ.witnesses, vec![(8, 3), (16, 4)]);
    }

    #[test]
    fn envelope_takes_bucket_maximum() {
        let mut grid = ParamGrid::new();
        grid.record_params(2, 2, std::f64::consts::PI); // rate 1/2
        grid.record_params(4, 2, 1.0); // rate 1
        grid.record_params(2, 4, 1.0); // rate 1/4, same bucket as above
        let env = empirical_alpha(&grid).unwrap();
        let b_pi = bucket_of(std::f64::consts::PI);
        let b_one = bucket_of(1.0);
        assert!((env.alpha_hat_at(b_pi).unwrap() - 0.5).abs() < 1e-15);
        assert!((env.alpha_hat_at(b_one).unwrap() - 1.0).abs() < 1e-15);
        // Empty bucket inside the range reports 0.
        assert_eq!(env.alpha_hat_at(b_one + 1).unwrap(), 0.0);
        assert_eq!(env.granularity_at(b_one + 1), 0.0);
        // Outside the range errors.
        assert!(env.alpha_hat_at(b_pi + 1).is_err());
        assert!(env.alpha_hat_at(b_one - 1).is_err());
        // Granularity pinned to the witness.
        let g = env.granularity_at(b_one);
        assert!((g - (5f64 / 4f64).log2() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn empty_grid_has_no_envelope() {
        assert!(matches!(empirical_alpha(&ParamGrid::new()), Err(ParamError::EmptyGrid)));
    }

    #[test]
    fn membership_is_monotone_in_eps() {
        let mut grid = ParamGrid::new();
        grid.record_params(4, 2, 1.0);
        let env = empirical_alpha(&grid).unwrap();
        let p = CodePoint { rate: 0.9, phi: 1.0 };
        assert!(!gamma_eps_member(&p, &env, 0.05).unwrap());
        assert!(gamma_eps_member(&p, &env, 0.10001).unwrap());
        assert!(gamma_eps_member(&p, &env, 0.5).unwrap());
        assert!(gamma_eps_member(&p, &env, 1e-9).is_ok());
        assert!(gamma_eps_member(&p, &env, 0.0).is_err());
    }

    #[test]
    fn restrict_to_dim_partitions_records() {
        let mut grid = ParamGrid::new();
        grid.record_params(8, 3, std::f64::consts::FRAC_PI_4);
        grid.record_params(16, 4, std::f64::consts::FRAC_PI_4);
        let only3 = grid.restrict_to_dim(3);
        assert_eq!(only3.len(), 1);
        let occ = only3.cells().values().next().unwrap();
        assert_eq!(occ.dims, vec![3]);
        assert_eq!(occ.witnesses, vec![(8, 3)]);
        let only5 = grid.restrict_to_dim(5);
        assert!(only5.is_empty());
    }

    #[test]
    fn envelope_csv_shape() {
        let mut grid = ParamGrid::new();
        grid.record_params(4, 2, 1.0);
        grid.record_params(3, 2, 2.0);
        let env = empirical_alpha(&grid).unwrap();
        let csv = envelope_csv(&env);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "phi,alpha_hat,kl_envelope,rankin_bound");
        let (lo, hi) = env.bucket_range();
        assert_eq!(lines.len() as u32, 1 + hi - lo + 1);
        // Rows below pi/2 fill the H column, rows above fill rankin.
        assert!(lines[1].split(',').nth(2).unwrap().len() > 1);
        assert!(lines[1].ends_with(','));
        let last = lines.last().unwrap();
        assert!(last.split(',').nth(2).unwrap().is_empty());
        assert!(!last.split(',').nth(3).unwrap().is_empty());
    }
}
