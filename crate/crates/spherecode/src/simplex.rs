//! Two-phase simplex and exact nullspace computation, generic over the
//! scalar field.
//!
//! The same tableau code runs over exact rationals (no tolerances, Bland's
//! rule guarantees termination) and over f64 (thresholded pivoting for the
//! cross-checks where exact data is unavailable). Problems are given in
//! the standard form: maximise c.x subject to row relations and x >= 0;
//! free variables are the caller's business (split them before building
//! the problem).

use crate::exact::Rat;
use num_traits::{One, Signed, Zero};

/// Scalar requirements for the tableau: field ops plus a sign test with
/// the field's own notion of "numerically zero".
pub trait LpNum: Clone + std::fmt::Debug {
    fn lp_zero() -> Self;
    fn lp_one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// -1, 0, +1 with the field's zero threshold applied.
    fn sgn(&self) -> i32;
    fn lt(&self, other: &Self) -> bool {
        self.sub(other).sgn() < 0
    }
}

impl LpNum for Rat {
    fn lp_zero() -> Self {
        Rat::zero()
    }
    fn lp_one() -> Self {
        Rat::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn sgn(&self) -> i32 {
        if self.is_zero() {
            0
        } else if self.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Zero threshold for f64 tableaus; entries within it are treated as zero.
pub const F64_LP_EPS: f64 = 1e-9;

impl LpNum for f64 {
    fn lp_zero() -> Self {
        0.0
    }
    fn lp_one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sgn(&self) -> i32 {
        if self.abs() <= F64_LP_EPS {
            0
        } else if *self > 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// maximise objective . x subject to rows (coeffs, relation, rhs), x >= 0.
#[derive(Debug, Clone)]
pub struct LpProblem<T> {
    pub n_vars: usize,
    pub objective: Vec<T>,
    pub rows: Vec<(Vec<T>, Relation, T)>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<T> {
    Optimal { value: T, solution: Vec<T> },
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    /// rows x cols matrix; last column is the rhs.
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl<T: LpNum> Tableau<T> {
    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v = v.div(&pivot);
        }
        for r in 0..self.a.len() {
            if r == row {
                continue;
            }
            let factor = self.a[r][col].clone();
            if factor.sgn() == 0 {
                continue;
            }
            for c in 0..=self.n_cols {
                let delta = factor.mul(&self.a[row][c]);
                self.a[r][c] = self.a[r][c].sub(&delta);
            }
        }
        self.basis[row] = col;
    }

    /// One simplex phase with Bland's rule on the given objective row
    /// (stored as reduced costs in `z`, to be maximised). Only columns
    /// below `allowed_cols` may enter the basis, which is how phase 2
    /// keeps artificials out. Returns false on unboundedness.
    fn run_phase(
        &mut self,
        z: &mut Vec<T>,
        z_val: &mut T,
        allowed_cols: usize,
        iter_cap: &mut u64,
    ) -> bool {
        loop {
            *iter_cap -= 1;
            assert!(*iter_cap > 0, "simplex iteration cap exceeded; cycling despite Bland's rule");
            // Entering: lowest-index column with positive reduced cost.
            let entering = (0..allowed_cols).find(|&c| z[c].sgn() > 0);
            let col = match entering {
                Some(c) => c,
                None => return true,
            };
            // Ratio test, ties to the lowest row index (Bland).
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.a.len() {
                if self.a[r][col].sgn() > 0 {
                    let ratio = self.a[r][self.n_cols].div(&self.a[r][col]);
                    let replace = match &best {
                        None => true,
                        Some((_, b)) => ratio.lt(b),
                    };
                    if replace {
                        best = Some((r, ratio));
                    }
                }
            }
            let row = match best {
                Some((r, _)) => r,
                None => return false,
            };
            self.pivot(row, col);
            // Update the objective row.
            let factor = z[col].clone();
            for c in 0..self.n_cols {
                let delta = factor.mul(&self.a[row][c]);
                z[c] = z[c].sub(&delta);
            }
            let delta = factor.mul(&self.a[row][self.n_cols]);
            *z_val = z_val.sub(&delta);
        }
    }
}

/// Solves the LP by the two-phase simplex method with Bland's rule.
pub fn solve_lp<T: LpNum>(p: &LpProblem<T>) -> LpOutcome<T> {
    let m = p.rows.len();
    let n = p.n_vars;
    // Normalise rows to nonnegative rhs, then add slacks/surplus and
    // artificials as needed.
    let mut rows: Vec<(Vec<T>, Relation, T)> = p
        .rows
        .iter()
        .map(|(coef, rel, rhs)| {
            assert_eq!(coef.len(), n, "row width must match n_vars");
            if rhs.sgn() < 0 {
                let coef = coef.iter().map(LpNum::neg).collect();
                let rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Eq => Relation::Eq,
                    Relation::Ge => Relation::Le,
                };
                (coef, rel, rhs.neg())
            } else {
                (coef.clone(), *rel, rhs.clone())
            }
        })
        .collect();
    let n_slack = rows
        .iter()
        .filter(|(_, rel, _)| *rel != Relation::Eq)
        .count();
    // Every row gets an artificial; driving them out in phase 1 is simpler
    // than special-casing slack-started rows and costs little here.
    let n_cols = n + n_slack + m;
    let mut a: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut slack_idx = 0usize;
    for (r, (coef, rel, rhs)) in rows.drain(..).enumerate() {
        let mut row = vec![T::lp_zero(); n_cols + 1];
        row[..n].clone_from_slice(&coef);
        match rel {
            Relation::Le => {
                row[n + slack_idx] = T::lp_one();
                slack_idx += 1;
            }
            Relation::Ge => {
                row[n + slack_idx] = T::lp_one().neg();
                slack_idx += 1;
            }
            Relation::Eq => {}
        }
        let art = n + n_slack + r;
        row[art] = T::lp_one();
        row[n_cols] = rhs;
        basis[r] = art;
        a.push(row);
    }
    let mut t = Tableau { a, basis, n_cols };

    // Phase 1: maximise -sum(artificials). Reduced costs start as the
    // column sums over the artificial basis rows.
    let mut z1 = vec![T::lp_zero(); n_cols];
    let mut z1_val = T::lp_zero();
    for r in 0..m {
        for (c, z) in z1.iter_mut().enumerate() {
            *z = z.add(&t.a[r][c]);
        }
        z1_val = z1_val.add(&t.a[r][n_cols]);
    }
    // Artificial columns have reduced cost zero by construction.
    for (c, z) in z1.iter_mut().enumerate().skip(n + n_slack) {
        debug_assert!(c >= n + n_slack);
        *z = T::lp_zero();
    }
    let mut cap: u64 = 200_000;
    let ok = t.run_phase(&mut z1, &mut z1_val, n_cols, &mut cap);
    debug_assert!(ok, "phase 1 objective is bounded by zero");
    if z1_val.sgn() != 0 {
        return LpOutcome::Infeasible;
    }
    // Drive any artificial still in the basis out, or zero its row.
    for r in 0..m {
        if t.basis[r] >= n + n_slack {
            if let Some(c) = (0..n + n_slack).find(|&c| t.a[r][c].sgn() != 0) {
                t.pivot(r, c);
            }
            // Otherwise the row is all zeros: redundant constraint.
        }
    }

    // Phase 2 on the real objective: reduced costs c_j - c_B B^-1 A_j.
    let mut z2 = vec![T::lp_zero(); n_cols];
    for (c, z) in z2.iter_mut().enumerate().take(n) {
        *z = p.objective[c].clone();
    }
    let mut z2_val = T::lp_zero();
    for r in 0..m {
        let b = t.basis[r];
        if b < n {
            let coef = p.objective[b].clone();
            for c in 0..n_cols {
                let delta = coef.mul(&t.a[r][c]);
                z2[c] = z2[c].sub(&delta);
            }
            let delta = coef.mul(&t.a[r][n_cols]);
            z2_val = z2_val.sub(&delta);
        }
    }
    // Artificials are barred from entering by the column bound.
    if !t.run_phase(&mut z2, &mut z2_val, n + n_slack, &mut cap) {
        return LpOutcome::Unbounded;
    }
    let mut solution = vec![T::lp_zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            solution[t.basis[r]] = t.a[r][n_cols].clone();
        }
    }
    LpOutcome::Optimal { value: z2_val.neg(), solution }
}

/// Row-reduces the matrix in place and returns its rank.
pub fn rank<T: LpNum>(rows: &mut Vec<Vec<T>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let n_cols = rows[0].len();
    let mut pivot_row = 0usize;
    for col in 0..n_cols {
        let found = (pivot_row..rows.len()).max_by_key(|&r| match rows[r][col].sgn() {
            // For f64 pick the largest magnitude pivot; for exact fields
            // any nonzero works and magnitude ordering is harmless.
            0 => (0u8, 0u64),
            _ => (1u8, pivot_magnitude(&rows[r][col])),
        });
        let r = match found {
            Some(r) if rows[r][col].sgn() != 0 => r,
            _ => continue,
        };
        rows.swap(pivot_row, r);
        let pivot = rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v = v.div(&pivot);
        }
        for rr in 0..rows.len() {
            if rr != pivot_row && rows[rr][col].sgn() != 0 {
                let f = rows[rr][col].clone();
                for c in 0..n_cols {
                    let delta = f.mul(&rows[pivot_row][c]);
                    rows[rr][c] = rows[rr][c].sub(&delta);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    pivot_row
}

fn pivot_magnitude<T: LpNum>(x: &T) -> u64 {
    // Only used to bias f64 pivoting toward stability; exact fields can
    // return anything fixed.
    let approx = format!("{x:?}");
    approx.len() as u64
}

/// Basis of the nullspace {x : M x = 0}.
pub fn nullspace_basis<T: LpNum>(matrix: &[Vec<T>]) -> Vec<Vec<T>> {
    if matrix.is_empty() {
        return Vec::new();
    }
    let n_cols = matrix[0].len();
    let mut rows: Vec<Vec<T>> = matrix.to_vec();
    let r = rank(&mut rows);
    rows.truncate(r);
    // Identify pivot columns of the reduced rows.
    let mut pivot_col = Vec::with_capacity(r);
    for row in &rows {
        let c = (0..n_cols).find(|&c| row[c].sgn() != 0).expect("nonzero row");
        pivot_col.push(c);
    }
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; n_cols];
        for &c in &pivot_col {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in 0..n_cols {
        if is_pivot[free] {
            continue;
        }
        let mut vec_out = vec![T::lp_zero(); n_cols];
        vec_out[free] = T::lp_one();
        for (row, &pc) in rows.iter().zip(&pivot_col) {
            // Row reads x_pc + sum coef * x_free = 0.
            vec_out[pc] = row[free].neg();
        }
        basis.push(vec_out);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn r(n: i64, d: i64) -> Rat {
        rat(n, d)
    }

    #[test]
    fn textbook_maximum_exact() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
        let p = LpProblem {
            n_vars: 2,
            objective: vec![r(3, 1), r(5, 1)],
            rows: vec![
                (vec![r(1, 1), r(0, 1)], Relation::Le, r(4, 1)),
                (vec![r(0, 1), r(2, 1)], Relation::Le, r(12, 1)),
                (vec![r(3, 1), r(2, 1)], Relation::Le, r(18, 1)),
            ],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(36, 1));
                assert_eq!(solution, vec![r(2, 1), r(6, 1)]);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y st x + y = 10, x >= 3, y <= 4: optimum 10 (e.g. x=6, y=4).
        let p = LpProblem {
            n_vars: 2,
            objective: vec![r(1, 1), r(1, 1)],
            rows: vec![
                (vec![r(1, 1), r(1, 1)], Relation::Eq, r(10, 1)),
                (vec![r(1, 1), r(0, 1)], Relation::Ge, r(3, 1)),
                (vec![r(0, 1), r(1, 1)], Relation::Le, r(4, 1)),
            ],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(10, 1));
                assert_eq!(solution[0].clone() + solution[1].clone(), r(10, 1));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        let p = LpProblem {
            n_vars: 1,
            objective: vec![r(1, 1)],
            rows: vec![
                (vec![r(1, 1)], Relation::Ge, r(5, 1)),
                (vec![r(1, 1)], Relation::Le, r(2, 1)),
            ],
        };
        assert!(matches!(solve_lp(&p), LpOutcome::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        let p = LpProblem {
            n_vars: 2,
            objective: vec![r(1, 1), r(0, 1)],
            rows: vec![(vec![r(-1, 1), r(1, 1)], Relation::Le, r(1, 1))],
        };
        assert!(matches!(solve_lp(&p), LpOutcome::Unbounded));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Klee-Minty-ish degenerate rows; Bland's rule must terminate.
        let p = LpProblem {
            n_vars: 3,
            objective: vec![r(10, 1), r(-57, 1), r(-9, 1)],
            rows: vec![
                (vec![r(1, 2), r(-11, 2), r(-5, 2)], Relation::Le, r(0, 1)),
                (vec![r(1, 2), r(-3, 2), r(-1, 2)], Relation::Le, r(0, 1)),
                (vec![r(1, 1), r(0, 1), r(0, 1)], Relation::Le, r(1, 1)),
            ],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(1, 1)),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn f64_agrees_with_exact() {
        let p = LpProblem {
            n_vars: 2,
            objective: vec![3.0, 5.0],
            rows: vec![
                (vec![1.0, 0.0], Relation::Le, 4.0),
                (vec![0.0, 2.0], Relation::Le, 12.0),
                (vec![3.0, 2.0], Relation::Le, 18.0),
            ],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, .. } => assert!((value - 36.0).abs() < 1e-9),
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn negative_rhs_normalisation() {
        // x - y <= -2 with x, y >= 0: max x + 0y under y >= x + 2 means x free
        // up to nothing else: add x <= 5 to bound it.
        let p = LpProblem {
            n_vars: 2,
            objective: vec![r(1, 1), r(0, 1)],
            rows: vec![
                (vec![r(1, 1), r(-1, 1)], Relation::Le, r(-2, 1)),
                (vec![r(1, 1), r(0, 1)], Relation::Le, r(5, 1)),
            ],
        };
        match solve_lp(&p) {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(5, 1));
                assert!(solution[1] >= r(7, 1));
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn nullspace_of_simple_systems() {
        // x + y + z = 0 has a 2-dimensional nullspace.
        let m = vec![vec![r(1, 1), r(1, 1), r(1, 1)]];
        let basis = nullspace_basis(&m);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let s = v.iter().cloned().fold(r(0, 1), |a, b| a + b);
            assert_eq!(s, r(0, 1));
        }
        // Full-rank square system has trivial nullspace.
        let m = vec![
            vec![r(1, 1), r(0, 1)],
            vec![r(1, 1), r(1, 1)],
        ];
        assert!(nullspace_basis(&m).is_empty());
        // f64 variant.
        let m = vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]];
        let basis = nullspace_basis(&m);
        assert_eq!(basis.len(), 1);
        let v = &basis[0];
        assert!((v[0] + v[1] + v[2]).abs() < 1e-9);
        assert!((v[1] - v[2]).abs() < 1e-9);
    }

    #[test]
    fn rank_examples() {
        let mut m = vec![
            vec![r(1, 1), r(2, 1), r(3, 1)],
            vec![r(2, 1), r(4, 1), r(6, 1)],
            vec![r(0, 1), r(1, 1), r(1, 1)],
        ];
        assert_eq!(rank(&mut m), 2);
        let mut empty: Vec<Vec<Rat>> = vec![];
        assert_eq!(rank(&mut empty), 0);
    }
}
