//! Wrapped spherical codes: latitude schedules, per-band equirectangular
//! pullbacks of planar packings, and the density-convergence experiment.
//!
//! The sphere is cut into latitude bands of near-equal width. Each band is
//! flattened to a planar rectangle at the band's narrowest circumference
//! (so the flattening never shrinks distances), the packing's points
//! inside the rectangle are pulled back, and a buffer of width `d` along
//! the rectangle borders is discarded so that points in different bands,
//! or across the longitude seam, stay separated. The construction
//! guarantees a minimum angle of `2 asin(d/2)` minus a distortion
//! allowance that is quadratic in the band width; as `d` shrinks, the code
//! density converges to the packing density.
//!
//! The circle is the single-band case: the interval wraps with no
//! distortion at all, calibrated so planar distance `d` becomes chordal
//! distance `d`.

use crate::geom::{code_density, GeomError, SpherePoint, SphericalCode};
use crate::packings::{center_density, rescale_to_radius, Packing, PackingError};
use crate::params::{CodePoint, ParamError};
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance for the planar region membership tests; absorbs rounding in
/// the coefficient-space enumeration without admitting spurious points.
const REGION_EPS: f64 = 1e-12;

/// Slack for the constructor's minimum-angle assertion, covering rounding
/// in the equality case (single-band circle wraps meet the guarantee
/// exactly).
const GUARANTEE_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum WrapError {
    #[error("packing radius must lie in (0, 0.5), got {0}")]
    BadRadius(f64),
    #[error("wrapping is implemented for packings of dimension 1 and 2, got {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Latitude partition of [-pi/2, pi/2] together with the packing radius
/// driving the wrap.
#[derive(Debug, Clone)]
pub struct WrapSchedule {
    d: f64,
    /// Strictly increasing, first -pi/2, last pi/2; length = bands + 1.
    latitudes: Vec<f64>,
}

impl WrapSchedule {
    /// Uniform schedule with the given band count.
    pub fn uniform(d: f64, bands: usize) -> Result<Self, WrapError> {
        if !(d > 0.0 && d < 0.5) {
            return Err(WrapError::BadRadius(d));
        }
        assert!(bands >= 1);
        let w = PI / bands as f64;
        let mut latitudes: Vec<f64> =
            (0..=bands).map(|i| -PI / 2.0 + i as f64 * w).collect();
        latitudes[bands] = PI / 2.0;
        Ok(WrapSchedule { d, latitudes })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn latitudes(&self) -> &[f64] {
        &self.latitudes
    }

    pub fn n_bands(&self) -> usize {
        self.latitudes.len() - 1
    }

    pub fn band_widths(&self) -> Vec<f64> {
        self.latitudes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.band_widths().into_iter().fold(0.0, f64::max)
    }

    /// Figure of merit: max width + d / min width. Tends to 0 along the
    /// default schedule as d -> 0.
    pub fn merit(&self) -> f64 {
        let widths = self.band_widths();
        let max = widths.iter().cloned().fold(0.0, f64::max);
        let min = widths.iter().cloned().fold(f64::INFINITY, f64::min);
        max + self.d / min
    }
}

/// Default schedule: M = ceil(pi / sqrt(d)) equal bands, so the width is
/// within rounding of sqrt(d) and the merit within rounding of 2 sqrt(d).
pub fn make_schedule(d: f64) -> Result<WrapSchedule, WrapError> {
    if !(d > 0.0 && d < 0.5) {
        return Err(WrapError::BadRadius(d));
    }
    let bands = (PI / d.sqrt()).ceil() as usize;
    WrapSchedule::uniform(d, bands)
}

/// A wrapped code together with its construction accounting.
#[derive(Debug, Clone)]
pub struct WrappedCode {
    pub code: SphericalCode,
    /// Packing radius the wrap was built at.
    pub d: f64,
    /// Points contributed by each latitude band (single entry for S^1).
    pub band_counts: Vec<usize>,
    /// Points removed by the border buffers.
    pub discarded: usize,
    /// Widest band actually used (0 for S^1: the interval map is exact).
    pub band_width_max: f64,
    /// Certified lower bound on the minimum angle:
    /// 2 asin(d/2) - band_width_max^2.
    pub guarantee: f64,
}

impl WrappedCode {
    pub fn min_angle(&self) -> Result<f64, WrapError> {
        Ok(self.code.min_angle()?)
    }
}

/// Scaled f64 basis columns and translations of a packing.
fn scaled_data(p: &Packing) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = p.scale();
    let cols = p
        .lattice()
        .cols()
        .iter()
        .map(|c| c.iter().map(|e| e.to_f64() * s).collect())
        .collect();
    let trans = p
        .translations_or_origin()
        .iter()
        .map(|t| t.iter().map(|e| e.to_f64() * s).collect())
        .collect();
    (cols, trans)
}

/// Packing points in the half-open interval [0, len), sorted.
fn points_in_interval(p: &Packing, len: f64) -> Vec<f64> {
    let (cols, trans) = scaled_data(p);
    let b = cols[0][0].abs();
    let mut out = Vec::new();
    for t in &trans {
        // Canonical translations lie in [0, b); only k >= 0 can land in
        // the interval.
        let mut k = 0f64;
        loop {
            let x = t[0] + k * b;
            if x >= len - REGION_EPS {
                break;
            }
            if x >= -REGION_EPS {
                out.push(x);
            }
            k += 1.0;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Packing points in the half-open rectangle [0, wx) x [0, wy).
fn points_in_rect(p: &Packing, wx: f64, wy: f64) -> Vec<(f64, f64)> {
    let (cols, trans) = scaled_data(p);
    let (a, b, c, d) = (cols[0][0], cols[1][0], cols[0][1], cols[1][1]);
    let det = a * d - b * c;
    let mut out = Vec::new();
    for t in &trans {
        // Coefficient bounds from the inverse basis at the rectangle
        // corners, padded against rounding.
        let margin = 1.0;
        let corners = [
            (-margin, -margin),
            (wx + margin, -margin),
            (-margin, wy + margin),
            (wx + margin, wy + margin),
        ];
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &(x, y) in &corners {
            let sx = x - t[0];
            let sy = y - t[1];
            let u = (d * sx - b * sy) / det;
            let v = (-c * sx + a * sy) / det;
            lo[0] = lo[0].min(u);
            hi[0] = hi[0].max(u);
            lo[1] = lo[1].min(v);
            hi[1] = hi[1].max(v);
        }
        for i in (lo[0].floor() as i64 - 1)..=(hi[0].ceil() as i64 + 1) {
            for j in (lo[1].floor() as i64 - 1)..=(hi[1].ceil() as i64 + 1) {
                let x = i as f64 * a + j as f64 * b + t[0];
                let y = i as f64 * c + j as f64 * d + t[1];
                if x >= -REGION_EPS
                    && x < wx - REGION_EPS
                    && y >= -REGION_EPS
                    && y < wy - REGION_EPS
                {
                    out.push((x, y));
                }
            }
        }
    }
    out.sort_by(|p, q| p.partial_cmp(q).unwrap());
    out
}

struct WrapRaw {
    points: Vec<SpherePoint>,
    band_counts: Vec<usize>,
    discarded: usize,
    band_width_max: f64,
}

fn wrap_core(p: &Packing, sched: &WrapSchedule, buffered: bool) -> Result<WrapRaw, WrapError> {
    let d = sched.d;
    // Work at minimum planar distance exactly d (radius d/2).
    let scaled = rescale_to_radius(p, d / 2.0)?;
    match p.dim() {
        1 => {
            // Single band: the interval [0, L) wraps onto the circle with
            // planar distance d calibrated to chordal distance d, so the
            // angular unit is beta/d per planar unit.
            let beta = 2.0 * (d / 2.0).asin();
            let len = 2.0 * PI * d / beta;
            let all = points_in_interval(&scaled, len);
            let kept: Vec<f64> = if buffered {
                all.iter().cloned().filter(|&x| x <= len - d + REGION_EPS).collect()
            } else {
                all.clone()
            };
            let points = kept
                .iter()
                .map(|&x| {
                    let theta = x * beta / d;
                    SpherePoint::new(vec![theta.cos(), theta.sin()])
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(WrapRaw {
                band_counts: vec![kept.len()],
                discarded: all.len() - kept.len(),
                band_width_max: 0.0,
                points,
            })
        }
        2 => {
            let mut points = Vec::new();
            let mut band_counts = Vec::new();
            let mut discarded = 0usize;
            let mut band_width_max = 0f64;
            for win in sched.latitudes.windows(2) {
                let (th0, th1) = (win[0], win[1]);
                let w = th1 - th0;
                // Flatten at the band's smallest circumference so the map
                // never contracts; polar bands too thin to host a point
                // and its buffer contribute nothing.
                let c = th0.cos().min(th1.cos()).max(0.0);
                let big_w = 2.0 * PI * c;
                if big_w <= d {
                    band_counts.push(0);
                    continue;
                }
                band_width_max = band_width_max.max(w);
                let all = points_in_rect(&scaled, big_w, w);
                let kept: Vec<(f64, f64)> = if buffered {
                    all.iter()
                        .cloned()
                        .filter(|&(x, y)| {
                            x <= big_w - d + REGION_EPS && y <= w - d + REGION_EPS
                        })
                        .collect()
                } else {
                    all.clone()
                };
                discarded += all.len() - kept.len();
                band_counts.push(kept.len());
                for &(x, y) in &kept {
                    let psi = x / c;
                    let th = th0 + y;
                    points.push(SpherePoint::new(vec![
                        th.cos() * psi.cos(),
                        th.cos() * psi.sin(),
                        th.sin(),
                    ])?);
                }
            }
            Ok(WrapRaw { points, band_counts, discarded, band_width_max })
        }
        n => Err(WrapError::UnsupportedDimension(n)),
    }
}

/// Wraps a planar packing onto the sphere one dimension up. The returned
/// code is certified: its minimum angle is checked against the
/// construction guarantee 2 asin(d/2) - band_width_max^2.
pub fn wrap_packing(p: &Packing, sched: &WrapSchedule) -> Result<WrappedCode, WrapError> {
    let raw = wrap_core(p, sched, true)?;
    let code = SphericalCode::from_points(raw.points)?;
    let guarantee = 2.0 * (sched.d / 2.0).asin() - raw.band_width_max * raw.band_width_max;
    let min_angle = code.min_angle()?;
    assert!(
        min_angle >= guarantee - GUARANTEE_SLACK,
        "wrap construction violated its separation guarantee: {min_angle} < {guarantee}"
    );
    Ok(WrappedCode {
        code,
        d: sched.d,
        band_counts: raw.band_counts,
        discarded: raw.discarded,
        band_width_max: raw.band_width_max,
        guarantee,
    })
}

/// Diagnostic variant that skips the border buffers. The result is a
/// plain code (no certificate); seam pairs may violate the separation
/// guarantee, which is the point of the negative control.
pub fn wrap_packing_unbuffered(
    p: &Packing,
    sched: &WrapSchedule,
) -> Result<SphericalCode, WrapError> {
    let raw = wrap_core(p, sched, false)?;
    Ok(SphericalCode::from_points(raw.points)?)
}

/// Parameter-plane image (rate, min angle) of the wrapped code.
pub fn wrapped_code_point(p: &Packing, sched: &WrapSchedule) -> Result<CodePoint, WrapError> {
    let wrapped = wrap_packing(p, sched)?;
    Ok(CodePoint::of_code(&wrapped.code)?)
}

/// One row of the density-convergence experiment.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub d: f64,
    pub points: usize,
    pub delta_code: f64,
    pub delta_packing: f64,
    pub deviation: f64,
}

/// Wraps the packing along a sequence of radii and tabulates the code
/// density against the packing density.
pub fn density_convergence(p: &Packing, ds: &[f64]) -> Result<Vec<ConvergenceRow>, WrapError> {
    let delta_packing = center_density(p)?.density;
    let mut rows = Vec::new();
    for &d in ds {
        let sched = make_schedule(d)?;
        let wrapped = wrap_packing(p, &sched)?;
        let delta_code = code_density(&wrapped.code)?;
        rows.push(ConvergenceRow {
            d,
            points: wrapped.code.len(),
            delta_code,
            delta_packing,
            deviation: (delta_code - delta_packing).abs(),
        });
    }
    Ok(rows)
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("d,points,delta_code,delta_packing,deviation\n");
    for r in rows {
        out.push_str(&format!(
            "{:.11e},{},{:.11e},{:.11e},{:.11e}\n",
            r.d, r.points, r.delta_code, r.delta_packing, r.deviation
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::packings::{Lattice, PeriodicSet};

    fn z1() -> Packing {
        Packing::Lattice(Lattice::zn(1))
    }

    fn hex() -> Packing {
        Packing::Lattice(Lattice::hexagonal())
    }

    #[test]
    fn schedule_shape_and_merit() {
        let s = make_schedule(0.04).unwrap();
        assert_eq!(s.n_bands(), 16);
        assert!((s.merit() - 0.400067868).abs() < 1e-6);
        let s = make_schedule(0.01).unwrap();
        assert_eq!(s.n_bands(), 32);
        assert!((s.merit() - 0.200033934).abs() < 1e-6);
        for (d, m) in [(0.2, 8), (0.1, 10), (0.05, 15)] {
            assert_eq!(make_schedule(d).unwrap().n_bands(), m);
        }
        assert!((make_schedule(0.05).unwrap().max_width() - 0.2094395102).abs() < 1e-9);
        assert!(make_schedule(0.0).is_err());
        assert!(make_schedule(0.5).is_err());
        // Merit roughly halves when d is quartered.
        let m1 = make_schedule(0.04).unwrap().merit();
        let m2 = make_schedule(0.01).unwrap().merit();
        assert!((m2 / m1 - 0.5).abs() < 0.01);
    }

    #[test]
    fn circle_wrap_counts_and_angles() {
        // Frozen reference: counts and minimum angles for Z wrapped at
        // four radii.
        let expect = [
            (0.2, 31usize, 0.200334842323),
            (0.1, 62, 0.100041713612),
            (0.05, 125, 0.0500052097987),
            (0.02, 314, 0.0200003333483),
        ];
        for (d, n, phi) in expect {
            let sched = make_schedule(d).unwrap();
            let w = wrap_packing(&z1(), &sched).unwrap();
            assert_eq!(w.code.len(), n, "d = {d}");
            assert!((w.min_angle().unwrap() - phi).abs() < 1e-9, "d = {d}");
            assert_eq!(w.band_width_max, 0.0);
            assert!(w.min_angle().unwrap() >= w.guarantee - 1e-9);
        }
    }

    #[test]
    fn circle_wrap_discards_one_seam_point() {
        let sched = make_schedule(0.1).unwrap();
        let w = wrap_packing(&z1(), &sched).unwrap();
        assert_eq!(w.band_counts, vec![62]);
        assert_eq!(w.discarded, 1);
    }

    #[test]
    fn unbuffered_circle_violates_guarantee() {
        let sched = make_schedule(0.1).unwrap();
        let code = wrap_packing_unbuffered(&z1(), &sched).unwrap();
        assert_eq!(code.len(), 63);
        let phi = code.min_angle().unwrap();
        let guarantee = 2.0 * (0.05f64).asin();
        assert!(phi < guarantee, "seam pair must violate: {phi} < {guarantee}");
        assert!((phi - 0.0806).abs() < 1e-3);
    }

    #[test]
    fn hex_wrap_frozen_references() {
        let expect = [
            (0.2, 246usize, 0.198055160948, 0.602604701000),
            (0.1, 982, 0.099605402078, 0.608790019169),
            (0.05, 4244, 0.049884772109, 0.660037882264),
        ];
        for (d, n, phi, dens) in expect {
            let sched = make_schedule(d).unwrap();
            let w = wrap_packing(&hex(), &sched).unwrap();
            assert_eq!(w.code.len(), n, "d = {d}");
            assert!((w.min_angle().unwrap() - phi).abs() < 1e-6, "d = {d}");
            let delta = code_density(&w.code).unwrap();
            assert!((delta - dens).abs() < 1e-6, "d = {d}: {delta}");
            assert!(w.min_angle().unwrap() >= w.guarantee);
        }
    }

    #[test]
    fn polar_bands_are_empty_not_errors() {
        let sched = make_schedule(0.2).unwrap();
        let w = wrap_packing(&hex(), &sched).unwrap();
        assert_eq!(*w.band_counts.first().unwrap(), 0);
        assert_eq!(*w.band_counts.last().unwrap(), 0);
        assert_eq!(w.band_counts.len(), 8);
    }

    #[test]
    fn periodic_line_wrap_counts() {
        // {0, g} + 2Z at d = 0.02; frozen counts for the discrepancy
        // experiment's suboptimal families.
        let half = Packing::Periodic(PeriodicSet::two_point_line(rat(1, 2)));
        let sched = make_schedule(0.02).unwrap();
        let w = wrap_packing(&half, &sched).unwrap();
        assert_eq!(w.code.len(), 158);
        let two_fifths = Packing::Periodic(PeriodicSet::two_point_line(rat(2, 5)));
        let w = wrap_packing(&two_fifths, &sched).unwrap();
        assert_eq!(w.code.len(), 126);
    }

    #[test]
    fn code_point_of_circle_wrap() {
        let sched = make_schedule(0.1).unwrap();
        let cp = wrapped_code_point(&z1(), &sched).unwrap();
        assert!((cp.rate - 2.9770981551934376).abs() < 1e-12);
        assert!((cp.phi - 0.100041713612).abs() < 1e-9);
    }

    #[test]
    fn convergence_rows_tighten() {
        let rows = density_convergence(&z1(), &[0.2, 0.1, 0.05, 0.02]).unwrap();
        assert!((rows[0].delta_packing - 1.0).abs() < 1e-12);
        assert!((rows[1].delta_code - 0.987172260673).abs() < 1e-6);
        assert!((rows[3].delta_code - 0.999509701584).abs() < 1e-6);
        assert!(rows[3].deviation < rows[0].deviation);
        assert!(rows[3].deviation <= 0.15);
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with("d,points,delta_code,delta_packing,deviation\n"));
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn two_schedules_give_nearby_code_points() {
        // Lipschitz-style stability: changing the band partition moves
        // the minimum angle by at most twice the coarser width.
        let d = 0.1;
        let a = WrapSchedule::uniform(d, 10).unwrap();
        let b = WrapSchedule::uniform(d, 13).unwrap();
        let pa = wrapped_code_point(&hex(), &a).unwrap();
        let pb = wrapped_code_point(&hex(), &b).unwrap();
        let bound = 2.0 * a.max_width().max(b.max_width());
        assert!((pa.phi - pb.phi).abs() <= bound);
    }
}
