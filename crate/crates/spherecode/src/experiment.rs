//! Desk-scale experiments over the code enumeration and wrap pipeline:
//! parameter-grid classification of enumerated codes by how many
//! dimensions realize each cell, membership of a packing's wrapped code
//! points in the envelope neighborhood, the discrepancy offset check, and
//! the catalog-driven optimality experiment.
//!
//! Every verdict here is relative to the empirical envelope built from an
//! enumeration prefix, to a truncated wrap schedule, and to the loaded
//! catalog. Reports say so; none of them claims more.

use crate::catalog::{self, Catalog, CatalogError, PackingKind, PackingRecord};
use crate::enumeration;
use crate::geom::{GeomError, SphericalCode};
use crate::oracle::{
    self, ClassifierError, ClassifierState, ComplexityOracle, EnumeratedSpace, SpaceElement,
};
use crate::packings::{center_density, Lattice, Packing, PackingError};
use crate::params::{
    bucket_of, empirical_alpha, gamma_eps_member, AlphaEnvelope, CellKey, ParamError, ParamGrid,
    RateKey,
};
use crate::serial::canonical_serialization;
use crate::wrap::{make_schedule, wrapped_code_point, WrapError};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Default complexity-allowance constant for the code classification.
pub const DEFAULT_ALLOWANCE: f64 = 4.0;

/// Steps a candidate cell must survive before it is reported as an
/// infinite-multiplicity candidate.
pub const DEFAULT_STABILITY: usize = 3;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Wrap(#[from] WrapError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("truncation [{k0}, {k_max}] does not fit a schedule of length {len}")]
    BadTruncation { k0: usize, k_max: usize, len: usize },
    #[error("cannot split a budget of {budget} codes into {steps} strictly growing steps")]
    BadSteps { steps: usize, budget: usize },
    #[error("kind per-F requires a function table")]
    MissingFTable,
}

// ---------------------------------------------------------------------------
// Enumeration into the parameter grid.

/// Streams the first `budget` enumerated codes into the grid without
/// keeping the codes themselves.
pub fn record_enumeration(budget: usize, grid: &mut ParamGrid) {
    enumeration::enumerate_codes(budget, &mut |ec| {
        grid.record_params(ec.n_points() as u64, ec.dim() as u32, ec.min_angle);
    });
}

/// Envelope over the records of one ambient code dimension. Experiments
/// compare a wrapped packing only against codes living on its own sphere;
/// a mixed-dimension envelope would let high-rate planar codes veto
/// every line packing.
pub fn envelope_for_code_dim(
    grid: &ParamGrid,
    code_dim: u32,
) -> Result<AlphaEnvelope, ParamError> {
    empirical_alpha(&grid.restrict_to_dim(code_dim))
}

/// A code's grid cell and its dimension tag.
pub fn p_and_d(code: &SphericalCode) -> Result<(CellKey, u32), ExperimentError> {
    let phi = code.min_angle()?;
    let key = CellKey {
        bucket: bucket_of(phi),
        rate: RateKey::from_counts(code.len() as u64, code.dim() as u32),
    };
    Ok((key, code.dim() as u32))
}

// ---------------------------------------------------------------------------
// Classification of grid cells by dimension multiplicity.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellLabel {
    /// Demoted: the cell stopped producing new dimensions within budget.
    #[serde(rename = "finite")]
    Finite,
    /// Survived every step and is stable for the required streak.
    #[serde(rename = "infinite-candidate")]
    InfiniteCandidate,
    /// Still a candidate but not yet stable for the required streak.
    #[serde(rename = "undecided")]
    Undecided,
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::Finite => write!(f, "finite"),
            CellLabel::InfiniteCandidate => write!(f, "infinite-candidate"),
            CellLabel::Undecided => write!(f, "undecided"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LabelledCell {
    pub cell: CellKey,
    pub label: CellLabel,
    /// Distinct dimensions observed in the cell, ascending.
    pub witness_dims: Vec<u32>,
    /// Total records that landed in the cell.
    pub n_records: u64,
}

/// Classified parameter grid plus the full classifier state for audit.
#[derive(Debug, Clone)]
pub struct ClassifiedGrid {
    pub cells: Vec<LabelledCell>,
    pub state: ClassifierState,
    /// First-appearance id of each cell; the classifier's target values.
    pub cell_ids: BTreeMap<CellKey, u64>,
}

impl ClassifiedGrid {
    /// CSV rows sorted by cell: phi_bucket, rate, label, witness_dims
    /// (dimensions joined by '|').
    pub fn csv(&self) -> String {
        let mut out = String::from("phi_bucket,rate,label,witness_dims\n");
        for lc in &self.cells {
            let dims: Vec<String> = lc.witness_dims.iter().map(|d| d.to_string()).collect();
            out.push_str(&format!(
                "{},{:.11e},{},{}\n",
                lc.cell.bucket,
                lc.cell.rate.rate_f64(),
                lc.label,
                dims.join("|")
            ));
        }
        out
    }
}

/// Which complexity oracle orders the witness search.
#[derive(Debug, Clone, Copy)]
pub enum OracleChoice<'a> {
    Structural,
    Compression(Option<&'a Path>),
}

/// Geometric step horizons ending exactly at the budget: each step sees
/// about twice the previous one.
fn geometric_horizons(budget: usize, steps: usize) -> Result<Vec<usize>, ExperimentError> {
    if steps == 0 || budget < (1 << (steps - 1)).max(steps) {
        return Err(ExperimentError::BadSteps { steps, budget });
    }
    let mut horizons: Vec<usize> = (1..=steps).map(|m| budget >> (steps - m)).collect();
    for i in 1..horizons.len() {
        if horizons[i] <= horizons[i - 1] {
            horizons[i] = horizons[i - 1] + 1;
        }
    }
    Ok(horizons)
}

/// Runs the multiplicity classifier over the enumeration prefix with the
/// grid cell as target value and the dimension as section value. Cells
/// that keep producing new dimensions for `stability` consecutive steps
/// are labelled infinite candidates; the labels are relative to the
/// prefix, which the classifier treats as the whole space.
pub fn classify_dimension_multiplicity(
    budget: usize,
    steps: usize,
    c: f64,
    stability: usize,
    choice: OracleChoice,
) -> Result<ClassifiedGrid, ExperimentError> {
    if budget == 0 {
        return Ok(ClassifiedGrid {
            cells: Vec::new(),
            state: ClassifierState {
                step: 0,
                horizon: 0,
                a_set: Default::default(),
                b_set: Default::default(),
                witnesses: Default::default(),
                max_bound_used: Default::default(),
                audit: Vec::new(),
            },
            cell_ids: BTreeMap::new(),
        });
    }
    let mut cell_ids: BTreeMap<CellKey, u64> = BTreeMap::new();
    let mut grid = ParamGrid::new();
    let mut elements = Vec::with_capacity(budget);
    enumeration::enumerate_codes(budget, &mut |ec| {
        let key = grid.record_params(ec.n_points() as u64, ec.dim() as u32, ec.min_angle);
        let next = cell_ids.len() as u64 + 1;
        let id = *cell_ids.entry(key).or_insert(next);
        elements.push(SpaceElement {
            f_value: id,
            g_value: Some(ec.dim() as u64),
            serialization: canonical_serialization(&ec.code).into_bytes(),
        });
    });
    // The prefix is the experiment's whole universe: labels are
    // budget-relative, and demotions inside it are definitive for it.
    let space = EnumeratedSpace {
        name: format!("enumerated-codes-{budget}"),
        exhaustive: true,
        elements,
    };
    let oracle = match choice {
        OracleChoice::Structural => ComplexityOracle::structural(&space),
        OracleChoice::Compression(dir) => oracle::compression_oracle(&space, dir)?,
    };
    let horizons = geometric_horizons(budget, steps)?;
    // Cell ids are assigned in first-appearance order, so the id is the
    // target's position in the target ordering.
    let state = oracle::run_classifier(&space, &|y| y, &oracle, &horizons, c, true)?;

    let mut cells = Vec::with_capacity(grid.len());
    for (key, occ) in grid.cells() {
        let id = cell_ids[key];
        let label = if state.b_set.contains(&id) {
            CellLabel::Finite
        } else if state.witnesses.get(&id).map_or(0, Vec::len) >= stability {
            CellLabel::InfiniteCandidate
        } else {
            CellLabel::Undecided
        };
        let mut dims = occ.dims.clone();
        dims.dedup();
        cells.push(LabelledCell {
            cell: *key,
            label,
            witness_dims: dims,
            n_records: occ.count,
        });
    }
    Ok(ClassifiedGrid { cells, state, cell_ids })
}

// ---------------------------------------------------------------------------
// Envelope membership of wrapped code points.

#[derive(Debug, Clone, Serialize)]
pub struct MembershipRow {
    pub k: usize,
    pub d: f64,
    pub rate: f64,
    pub phi: f64,
    pub bucket: u32,
    pub alpha_hat: f64,
    /// rate - (alpha_hat - eps); nonnegative means member at this k.
    pub margin: f64,
    pub member: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub eps: f64,
    pub k0: usize,
    pub k_max: usize,
    /// Scope reminder carried into every serialization.
    pub note: &'static str,
    pub rows: Vec<MembershipRow>,
}

pub const MEMBERSHIP_NOTE: &str = "relative to envelope, truncated intersection";

/// Tests whether the packing's wrapped code points stay inside the
/// envelope's eps-neighborhood for every schedule index in [k0, k_max].
pub fn frak_p_membership(
    p: &Packing,
    eps: f64,
    schedule: &[f64],
    k0: usize,
    k_max: usize,
    env: &AlphaEnvelope,
) -> Result<MembershipReport, ExperimentError> {
    if k0 > k_max || k_max >= schedule.len() {
        return Err(ExperimentError::BadTruncation { k0, k_max, len: schedule.len() });
    }
    let mut rows = Vec::with_capacity(k_max - k0 + 1);
    let mut member = true;
    for (k, &d) in schedule.iter().enumerate().take(k_max + 1).skip(k0) {
        let sched = make_schedule(d)?;
        let cp = wrapped_code_point(p, &sched)?;
        let bucket = bucket_of(cp.phi);
        let alpha_hat = env.alpha_hat_at(bucket)?;
        let ok = gamma_eps_member(&cp, env, eps)?;
        member &= ok;
        rows.push(MembershipRow {
            k,
            d,
            rate: cp.rate,
            phi: cp.phi,
            bucket,
            alpha_hat,
            margin: cp.rate - (alpha_hat - eps),
            member: ok,
        });
    }
    Ok(MembershipReport { member, eps, k0, k_max, note: MEMBERSHIP_NOTE, rows })
}

// ---------------------------------------------------------------------------
// Discrepancy offset check.

#[derive(Debug, Clone, Serialize)]
pub struct OffsetRow {
    pub d: f64,
    pub rate: f64,
    pub phi: f64,
    pub alpha_hat: f64,
    /// alpha_hat(phi_d) - R_d.
    pub measured_offset: f64,
    /// measured <= predicted + eps.
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OffsetReport {
    pub packing_dim: u32,
    pub code_dim: u32,
    /// Density ratio against the catalog's known maximum.
    pub gamma: f64,
    /// -log2(gamma) / code_dim.
    pub predicted_offset: f64,
    pub eps: f64,
    /// Whether the last (smallest-d) row is within eps of the prediction.
    pub tail_ok: bool,
    pub rows: Vec<OffsetRow>,
}

/// Measures how far each wrapped code point falls below the envelope and
/// compares the offsets against the prediction from the packing's density
/// discrepancy: a packing at fraction gamma of the known maximum should
/// sit about -log2(gamma)/n below, n the code dimension.
pub fn discrepancy_offset_check(
    p: &Packing,
    eps: f64,
    schedule: &[f64],
    catalog: &Catalog,
    env: &AlphaEnvelope,
) -> Result<OffsetReport, ExperimentError> {
    let packing_dim = p.dim() as u32;
    let code_dim = packing_dim + 1;
    let report = center_density(p)?;
    let (gamma, _) = catalog::discrepancy(report.density, packing_dim, catalog)?;
    let predicted_offset = -gamma.log2() / code_dim as f64;
    let mut rows = Vec::with_capacity(schedule.len());
    for &d in schedule {
        let sched = make_schedule(d)?;
        let cp = wrapped_code_point(p, &sched)?;
        let alpha_hat = env.alpha_hat_at(bucket_of(cp.phi))?;
        let measured_offset = alpha_hat - cp.rate;
        rows.push(OffsetRow {
            d,
            rate: cp.rate,
            phi: cp.phi,
            alpha_hat,
            measured_offset,
            within: measured_offset <= predicted_offset + eps,
        });
    }
    let tail_ok = rows.last().is_some_and(|r| r.within);
    Ok(OffsetReport {
        packing_dim,
        code_dim,
        gamma,
        predicted_offset,
        eps,
        tail_ok,
        rows,
    })
}

// ---------------------------------------------------------------------------
// Optimality experiment.

/// Packing class quantifier for the optimality experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptKind {
    /// Lattice packings only.
    Lattice,
    /// Periodic packings with at most the given number of translates.
    PerAtMost(u32),
    /// Periodic packings with the translate budget given per dimension.
    PerF,
    /// Periodic packings of any size.
    Per,
}

impl fmt::Display for OptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptKind::Lattice => write!(f, "latt"),
            OptKind::PerAtMost(n) => write!(f, "per<={n}"),
            OptKind::PerF => write!(f, "per-f"),
            OptKind::Per => write!(f, "per"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptDimDetail {
    pub candidate: Option<String>,
    pub candidate_kind: Option<String>,
    /// Density ratio against the known maximum, when one exists.
    pub gamma: Option<f64>,
    /// "wrap", "catalog", or "none".
    pub method: &'static str,
    /// Envelope resolution slack at the deciding bucket of a wrap run.
    pub slack: Option<f64>,
    pub membership: Option<MembershipReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptReport {
    pub kind: String,
    pub eps: f64,
    pub schedule: Vec<f64>,
    pub catalog_version: String,
    /// Scope reminder: all verdicts are catalog- and envelope-relative.
    pub note: &'static str,
    pub verdicts: BTreeMap<u32, String>,
    pub details: BTreeMap<u32, OptDimDetail>,
}

pub const OPT_NOTE: &str =
    "verdicts are relative to the loaded catalog, the empirical envelope, and the truncated schedule";

/// A record is admissible for a kind when its class is inside the
/// quantifier. Lattices count as one-translate periodic sets; known-max
/// records are references, never candidates.
fn record_admissible(
    kind: OptKind,
    rec: &PackingRecord,
    f_table: Option<&BTreeMap<u32, u32>>,
) -> bool {
    let translates = match rec.kind {
        PackingKind::Lattice => 1,
        PackingKind::Periodic(m) => m,
        PackingKind::KnownMax => return false,
    };
    match kind {
        OptKind::Lattice => rec.kind == PackingKind::Lattice,
        OptKind::PerAtMost(n) => translates <= n,
        OptKind::PerF => f_table
            .and_then(|t| t.get(&rec.dim))
            .is_some_and(|&budget| translates <= budget),
        OptKind::Per => true,
    }
}

/// Geometric realization of a catalog record, for the dimensions where
/// the wrap pipeline has a built-in construction.
fn realize(rec: &PackingRecord) -> Option<Packing> {
    match (rec.dim, rec.kind) {
        (1, PackingKind::Lattice) => Some(Packing::Lattice(Lattice::zn(1))),
        (2, PackingKind::Lattice) => Some(Packing::Lattice(Lattice::hexagonal())),
        _ => None,
    }
}

/// Relative equality tolerance for catalog-assertion verdicts.
const CATALOG_EQ_TOL: f64 = 1e-12;

/// For each requested packing dimension: pick the densest admissible
/// catalog record, wrap it through the schedule when a construction
/// exists, and pass verdict. Wrap verdicts compare the worst margin
/// against the envelope's resolution slack; margins inside the slack are
/// inconclusive. Records without a construction can only be certified by
/// equality with the catalog's known maximum.
pub fn opt_experiment(
    kind: OptKind,
    dims: &[u32],
    eps: f64,
    schedule: &[f64],
    catalog: &Catalog,
    grid: &ParamGrid,
    f_table: Option<&BTreeMap<u32, u32>>,
) -> Result<OptReport, ExperimentError> {
    if kind == OptKind::PerF && f_table.is_none() {
        return Err(ExperimentError::MissingFTable);
    }
    let mut verdicts = BTreeMap::new();
    let mut details = BTreeMap::new();
    for &dim in dims {
        let best = catalog
            .records_of(dim)
            .filter(|r| record_admissible(kind, r, f_table))
            .max_by(|a, b| {
                a.density
                    .partial_cmp(&b.density)
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let (verdict, detail) = match best {
            None => (
                "inconclusive: no candidate".to_string(),
                OptDimDetail {
                    candidate: None,
                    candidate_kind: None,
                    gamma: None,
                    method: "none",
                    slack: None,
                    membership: None,
                },
            ),
            Some(rec) => {
                let gamma = catalog
                    .known_max(dim)
                    .map(|mx| rec.density / mx.density);
                match realize(rec) {
                    Some(p) => {
                        let env = envelope_for_code_dim(grid, dim + 1)?;
                        let report =
                            frak_p_membership(&p, eps, schedule, 0, schedule.len() - 1, &env)?;
                        let deciding = report
                            .rows
                            .iter()
                            .min_by(|a, b| {
                                a.margin
                                    .partial_cmp(&b.margin)
                                    .unwrap_or(std::cmp::Ordering::Equal)
                            })
                            .expect("schedule is nonempty");
                        let slack = env.granularity_at(deciding.bucket);
                        let verdict = if deciding.margin > slack {
                            "member".to_string()
                        } else if deciding.margin < -slack {
                            "non-member".to_string()
                        } else {
                            "inconclusive: margin within grid resolution".to_string()
                        };
                        (
                            verdict,
                            OptDimDetail {
                                candidate: Some(rec.description.clone()),
                                candidate_kind: Some(rec.kind.to_string()),
                                gamma,
                                method: "wrap",
                                slack: Some(slack),
                                membership: Some(report),
                            },
                        )
                    }
                    None => {
                        let verdict = match catalog.known_max(dim) {
                            None => "inconclusive: no known maximum".to_string(),
                            Some(mx) => {
                                let tol = CATALOG_EQ_TOL * mx.density.max(1.0);
                                if (rec.density - mx.density).abs() <= tol {
                                    "member (catalog assertion)".to_string()
                                } else if rec.density < mx.density {
                                    "inconclusive: record below known maximum".to_string()
                                } else {
                                    "inconclusive: record exceeds known maximum".to_string()
                                }
                            }
                        };
                        (
                            verdict,
                            OptDimDetail {
                                candidate: Some(rec.description.clone()),
                                candidate_kind: Some(rec.kind.to_string()),
                                gamma,
                                method: "catalog",
                                slack: None,
                                membership: None,
                            },
                        )
                    }
                }
            }
        };
        verdicts.insert(dim, verdict);
        details.insert(dim, detail);
    }
    Ok(OptReport {
        kind: kind.to_string(),
        eps,
        schedule: schedule.to_vec(),
        catalog_version: catalog.version.clone(),
        note: OPT_NOTE,
        verdicts,
        details,
    })
}
