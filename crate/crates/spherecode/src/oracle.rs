//! Finite/infinite multiplicity classification with pluggable complexity
//! oracles.
//!
//! Elements of an enumerated space are listed in a fixed structural order.
//! For a map f into target values (and an optional section map g), the
//! counting function n(x) ranks each element among the predecessors
//! sharing its f-value; n_Z(x) counts the same predecessors but at most
//! once per g-value. The classifier advances in steps: step m lists
//! elements up to the m-th horizon, adds newly seen target values to the
//! candidate set A, and keeps a value only if some element with counting
//! value exactly m is found among the elements of low complexity rank,
//! where the rank allowance grows as ceil(c * i * m * log2(i * m)).
//! Values with no such witness are demoted to the finite set B and never
//! return.
//!
//! A "demotion" is only definitive when the search space was actually
//! covered: if the allowance exceeds the materialized prefix and the
//! space is not exhaustive, the run stops with a budget error instead of
//! silently guessing.
//!
//! Complexity oracles: the structural oracle ranks by listing order; the
//! compression oracle ranks by the bit length of a fixed dictionary
//! compressor applied to each element's serialization (a computable
//! surrogate for descriptive complexity, deterministic and versioned).
//! All rank ties break by structural index.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("horizons must be strictly increasing")]
    BadHorizons,
    #[error("horizon {horizon} exceeds the {len}-element prefix of a non-exhaustive space")]
    HorizonBeyondPrefix { horizon: usize, len: usize },
    #[error("element index {0} is outside the enumeration budget")]
    IndexOutOfBudget(usize),
    #[error("section counting requires a g-value on every element")]
    MissingSection,
    #[error(
        "oracle budget exhausted at (value {value}, step {step}): \
         bound {bound} exceeds the {prefix}-element prefix"
    )]
    BudgetExhausted { value: u64, step: usize, bound: u64, prefix: usize },
    #[error("cache file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// One element of an enumerated space, in structural order.
#[derive(Debug, Clone)]
pub struct SpaceElement {
    /// Target value f(x).
    pub f_value: u64,
    /// Section value g(x), when a section map is in play.
    pub g_value: Option<u64>,
    /// Canonical serialization, input to the compression oracle.
    pub serialization: Vec<u8>,
}

/// A materialized prefix of an enumerated space. `exhaustive` declares
/// that the prefix is the entire space, which licenses definitive
/// demotions beyond the complexity allowance.
#[derive(Debug, Clone)]
pub struct EnumeratedSpace {
    pub name: String,
    pub exhaustive: bool,
    pub elements: Vec<SpaceElement>,
}

impl EnumeratedSpace {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// n(x): predecessors (inclusive) of x in structural order sharing its
/// f-value.
pub fn count_n(space: &EnumeratedSpace, index: usize) -> Result<u64, ClassifierError> {
    let el = space.elements.get(index).ok_or(ClassifierError::IndexOutOfBudget(index))?;
    Ok(space.elements[..=index].iter().filter(|e| e.f_value == el.f_value).count() as u64)
}

/// n_Z(x): like n(x), but predecessors are scanned in structural order
/// and kept at most once per g-value (the section rule).
pub fn count_nz(space: &EnumeratedSpace, index: usize) -> Result<u64, ClassifierError> {
    let el = space.elements.get(index).ok_or(ClassifierError::IndexOutOfBudget(index))?;
    let mut seen = BTreeSet::new();
    for e in space.elements[..=index].iter().filter(|e| e.f_value == el.f_value) {
        let g = e.g_value.ok_or(ClassifierError::MissingSection)?;
        seen.insert(g);
    }
    Ok(seen.len() as u64)
}

/// Complexity allowance ceil(c * i * m * log2(i * m)), with log2 clamped
/// to 1 at argument <= 1 so the bound stays positive.
pub fn search_bound(y_index: u64, m: u64, c: f64) -> u64 {
    assert!(y_index >= 1 && m >= 1 && c > 0.0);
    let arg = (y_index * m) as f64;
    let lg = if arg <= 1.0 { 1.0 } else { arg.log2() };
    (c * arg * lg).ceil() as u64
}

// ---------------------------------------------------------------------------
// Complexity oracles.

/// Total deterministic ordering of a space prefix by a complexity score;
/// ties break by structural index.
#[derive(Debug, Clone)]
pub struct ComplexityOracle {
    pub version: String,
    scores: Vec<u64>,
    /// order[r] = structural index of the element at 1-indexed rank r+1.
    order: Vec<usize>,
}

impl ComplexityOracle {
    fn from_scores(version: &str, scores: Vec<u64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by_key(|&i| (scores[i], i));
        ComplexityOracle { version: version.to_string(), scores, order }
    }

    /// Ranks by structural index itself (the exact ordering oracle).
    pub fn structural(space: &EnumeratedSpace) -> Self {
        Self::from_scores("structural-v1", (0..space.len() as u64).collect())
    }

    pub fn score(&self, index: usize) -> u64 {
        self.scores[index]
    }

    /// 1-indexed rank of a structural index.
    pub fn rank(&self, index: usize) -> usize {
        self.order.iter().position(|&i| i == index).unwrap() + 1
    }

    /// Structural index of the element at 1-indexed rank r.
    pub fn element_at_rank(&self, r: usize) -> usize {
        self.order[r - 1]
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Bit length of a byte-oriented LZW pass with growing code width
/// (9..16 bits, dictionary frozen at 2^16 entries).
fn lzw_bits(data: &[u8]) -> u64 {
    if data.is_empty() {
        return 0;
    }
    let mut map: std::collections::HashMap<(u32, u8), u32> = std::collections::HashMap::new();
    let mut next_code: u32 = 256;
    let mut width: u64 = 9;
    let mut bits: u64 = 0;
    let mut current = data[0] as u32;
    for &b in &data[1..] {
        if let Some(&c) = map.get(&(current, b)) {
            current = c;
        } else {
            bits += width;
            if next_code < 1 << 16 {
                map.insert((current, b), next_code);
                next_code += 1;
                if u64::from(next_code) > (1 << width) && width < 16 {
                    width += 1;
                }
            }
            current = b as u32;
        }
    }
    bits + width
}

/// Compressed size in bits: the LZW stream or a stored fallback,
/// whichever is shorter, plus an 8-bit mode header.
pub fn compression_score(data: &[u8]) -> u64 {
    let stored = 8 * data.len() as u64;
    lzw_bits(data).min(stored) + 8
}

/// Builds the compression oracle over a space prefix. When `cache_dir`
/// is given, scores are persisted per element keyed by the serialization
/// hash, so repeated runs skip recompression.
pub fn compression_oracle(
    space: &EnumeratedSpace,
    cache_dir: Option<&Path>,
) -> Result<ComplexityOracle, ClassifierError> {
    const VERSION: &str = "lzw-v1";
    let mut scores = Vec::with_capacity(space.len());
    for el in &space.elements {
        let score = match cache_dir {
            None => compression_score(&el.serialization),
            Some(dir) => {
                let hash = Sha256::digest(&el.serialization);
                let mut name = String::with_capacity(VERSION.len() + 65);
                name.push_str(VERSION);
                name.push('-');
                for byte in hash {
                    name.push_str(&format!("{byte:02x}"));
                }
                let path = dir.join(name);
                match std::fs::read_to_string(&path) {
                    Ok(text) => match text.trim().parse::<u64>() {
                        Ok(v) => v,
                        Err(_) => {
                            // Unreadable cache entry: recompute and rewrite.
                            let v = compression_score(&el.serialization);
                            std::fs::write(&path, v.to_string())
                                .map_err(|source| ClassifierError::Io { path, source })?;
                            v
                        }
                    },
                    Err(_) => {
                        let v = compression_score(&el.serialization);
                        std::fs::create_dir_all(dir)
                            .and_then(|_| std::fs::write(&path, v.to_string()))
                            .map_err(|source| ClassifierError::Io { path, source })?;
                        v
                    }
                }
            }
        };
        scores.push(score);
    }
    Ok(ComplexityOracle::from_scores(VERSION, scores))
}

// ---------------------------------------------------------------------------
// The classifier.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AuditAction {
    #[serde(rename = "added")]
    Added,
    #[serde(rename = "witnessed")]
    Witnessed,
    #[serde(rename = "demoted")]
    Demoted,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    pub step: usize,
    pub value: u64,
    pub action: AuditAction,
    pub bound: u64,
    /// Oracle rank of the witness, for `witnessed` records.
    pub oracle_rank: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct ClassifierState {
    /// Steps executed.
    pub step: usize,
    /// Effective horizon of the last step.
    pub horizon: usize,
    /// Values still believed infinite-multiplicity.
    pub a_set: BTreeSet<u64>,
    /// Values demoted to finite.
    pub b_set: BTreeSet<u64>,
    /// Witness structural indices recorded per value, one per survived step.
    pub witnesses: BTreeMap<u64, Vec<usize>>,
    /// Largest complexity allowance exercised per value.
    pub max_bound_used: BTreeMap<u64, u64>,
    pub audit: Vec<AuditRecord>,
}

impl ClassifierState {
    pub fn audit_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.audit {
            out.push_str(&serde_json::to_string(rec).expect("audit records serialize"));
            out.push('\n');
        }
        out
    }
}

/// Runs the A/B iteration. `nu_y` maps a target value to its 1-indexed
/// position in the target ordering; `use_section` switches the counting
/// function from n to n_Z (requires g-values).
pub fn run_classifier(
    space: &EnumeratedSpace,
    nu_y: &dyn Fn(u64) -> u64,
    oracle: &ComplexityOracle,
    horizons: &[usize],
    c: f64,
    use_section: bool,
) -> Result<ClassifierState, ClassifierError> {
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ClassifierError::BadHorizons);
    }
    let len = space.len();
    if let Some(&last) = horizons.last() {
        if last > len && !space.exhaustive {
            return Err(ClassifierError::HorizonBeyondPrefix { horizon: last, len });
        }
    }
    let count = |i: usize| -> Result<u64, ClassifierError> {
        if use_section {
            count_nz(space, i)
        } else {
            count_n(space, i)
        }
    };

    let mut state = ClassifierState {
        step: 0,
        horizon: 0,
        a_set: BTreeSet::new(),
        b_set: BTreeSet::new(),
        witnesses: BTreeMap::new(),
        max_bound_used: BTreeMap::new(),
        audit: Vec::new(),
    };
    let mut listed = 0usize;

    for (step_idx, &raw_horizon) in horizons.iter().enumerate() {
        let m = step_idx + 1;
        let eff = raw_horizon.min(len);
        // Newly listed values enter the candidate set.
        for el in &space.elements[listed..eff] {
            let y = el.f_value;
            if !state.a_set.contains(&y) && !state.b_set.contains(&y) {
                state.a_set.insert(y);
                state.witnesses.insert(y, Vec::new());
                state.audit.push(AuditRecord {
                    step: m,
                    value: y,
                    action: AuditAction::Added,
                    bound: 0,
                    oracle_rank: None,
                });
            }
        }
        listed = eff;
        // Every candidate must produce a counting-value-m witness within
        // its complexity allowance.
        let candidates: Vec<u64> = state.a_set.iter().cloned().collect();
        for y in candidates {
            let y_index = nu_y(y);
            let bound = search_bound(y_index, m as u64, c);
            let entry = state.max_bound_used.entry(y).or_insert(0);
            *entry = (*entry).max(bound);
            let limit = (bound as usize).min(len);
            let mut found: Option<(usize, usize)> = None;
            for r in 1..=limit {
                let i = oracle.element_at_rank(r);
                if space.elements[i].f_value == y && count(i)? == m as u64 {
                    found = Some((i, r));
                    break;
                }
            }
            match found {
                Some((i, r)) => {
                    state.witnesses.get_mut(&y).expect("candidate tracked").push(i);
                    state.audit.push(AuditRecord {
                        step: m,
                        value: y,
                        action: AuditAction::Witnessed,
                        bound,
                        oracle_rank: Some(r),
                    });
                }
                None => {
                    if bound as usize > len && !space.exhaustive {
                        return Err(ClassifierError::BudgetExhausted {
                            value: y,
                            step: m,
                            bound,
                            prefix: len,
                        });
                    }
                    state.a_set.remove(&y);
                    state.b_set.insert(y);
                    state.audit.push(AuditRecord {
                        step: m,
                        value: y,
                        action: AuditAction::Demoted,
                        bound,
                        oracle_rank: None,
                    });
                }
            }
        }
        state.step = m;
        state.horizon = eff;
    }
    Ok(state)
}

/// Ground truth by exhaustive scan: values whose occurrence count (or
/// distinct-g count under the section rule) stays within the threshold
/// are `finite`, the rest `exceeds`.
#[derive(Debug, Clone)]
pub struct BruteClassification {
    pub finite: BTreeSet<u64>,
    pub exceeds: BTreeSet<u64>,
    pub counts: BTreeMap<u64, u64>,
}

pub fn brute_force_classify(
    space: &EnumeratedSpace,
    threshold: u64,
    use_section: bool,
) -> Result<BruteClassification, ClassifierError> {
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    if use_section {
        let mut sections: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
        for el in &space.elements {
            let g = el.g_value.ok_or(ClassifierError::MissingSection)?;
            sections.entry(el.f_value).or_default().insert(g);
        }
        for (y, gs) in sections {
            counts.insert(y, gs.len() as u64);
        }
    } else {
        for el in &space.elements {
            *counts.entry(el.f_value).or_insert(0) += 1;
        }
    }
    let mut finite = BTreeSet::new();
    let mut exceeds = BTreeSet::new();
    for (&y, &c) in &counts {
        if c > threshold {
            exceeds.insert(y);
        } else {
            finite.insert(y);
        }
    }
    Ok(BruteClassification { finite, exceeds, counts })
}
