//! Dense numeric LU with a per-step pivot-strategy choice, growth-factor
//! tracking, and triangular solves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qlearn::{featurize_pivoting, Domain, Policy};
use crate::scalar::Real;
use crate::sparse::{DenseWorkingMatrix, Permutation, SparseMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum PivotError {
    #[error("active column {0} is entirely zero")]
    ZeroPivotColumn(usize),
    #[error("active submatrix is entirely zero at step {0}")]
    ZeroActiveSubmatrix(usize),
    #[error("diagonal pivot below breakdown tolerance at step {0}")]
    ZeroDiagonal(usize),
    #[error("pivot magnitude below breakdown tolerance at step {0}")]
    NumericBreakdown(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("upper factor has a zero diagonal at {0}")]
    SingularUpper(usize),
    #[error("matrix has no nonzero entries")]
    ZeroMatrix,
    #[error("policy domain {0:?} is not the pivoting domain")]
    PolicyDomainMismatch(Domain),
}

/// Pivot-search strategy applied at one elimination step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PivotAction {
    /// Partial pivoting: max magnitude in the active column.
    Pp,
    /// Rook pivoting: maximal in both its row and its column.
    Rp,
    /// Complete pivoting: max magnitude in the active submatrix.
    Cp,
    /// No pivoting: take the diagonal.
    Skip,
}

impl PivotAction {
    pub const ALL: [PivotAction; 4] =
        [PivotAction::Pp, PivotAction::Rp, PivotAction::Cp, PivotAction::Skip];

    pub fn id(self) -> usize {
        Self::ALL.iter().position(|&a| a == self).unwrap()
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PivotAction::Pp => "PP",
            PivotAction::Rp => "RP",
            PivotAction::Cp => "CP",
            PivotAction::Skip => "SKIP",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.name().eq_ignore_ascii_case(name))
    }
}

/// Element-growth record of one factorization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace<T> {
    pub max_initial: T,
    pub max_seen: T,
}

impl<T: Real> GrowthTrace<T> {
    pub fn new(max_initial: T) -> Self {
        Self { max_initial, max_seen: max_initial }
    }

    pub fn observe(&mut self, max_abs: T) {
        self.max_seen = self.max_seen.max(max_abs);
    }

    /// Growth factor `rho = max_seen / max_initial`; at least 1 for any
    /// nonzero input.
    pub fn rho(&self) -> Result<T, PivotError> {
        if self.max_initial <= T::zero() {
            return Err(PivotError::ZeroMatrix);
        }
        Ok(self.max_seen / self.max_initial)
    }
}

/// Step-by-step record of the intermediate matrices `A_1..A_n`.
///
/// Full snapshots are kept for n <= 16; larger matrices keep a per-step
/// max-magnitude summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ElimTrace<T> {
    Full(Vec<Vec<Vec<T>>>),
    Summary(Vec<T>),
}

/// Snapshot fidelity threshold.
pub const ELIM_TRACE_FULL_MAX: usize = 16;

impl<T: Real> ElimTrace<T> {
    fn start(m: &DenseWorkingMatrix<T>) -> Self {
        if m.n() <= ELIM_TRACE_FULL_MAX {
            ElimTrace::Full(vec![m.rows()])
        } else {
            ElimTrace::Summary(vec![m.max_abs()])
        }
    }

    fn record(&mut self, m: &DenseWorkingMatrix<T>) {
        match self {
            ElimTrace::Full(snaps) => snaps.push(m.rows()),
            ElimTrace::Summary(maxes) => maxes.push(m.max_abs()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ElimTrace::Full(s) => s.len(),
            ElimTrace::Summary(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotStep<T> {
    pub step: usize,
    pub action: PivotAction,
    /// Pivot position in the working matrix before interchange, 0-based.
    pub row: usize,
    pub col: usize,
    pub value: T,
    /// Per-step reward; the episode total telescopes to `-rho`.
    pub reward: f64,
    /// True when a SKIP breakdown was retried with PP.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorResult<T> {
    /// Unit lower factor (implicit diagonal) and upper factor, packed.
    pub lu: Vec<Vec<T>>,
    /// `row_perm.forward(i)` = original row stored at working row `i`.
    pub row_perm: Permutation,
    /// `col_perm.forward(j)` = original column stored at working col `j`.
    pub col_perm: Permutation,
    pub growth: GrowthTrace<T>,
    pub step_log: Vec<PivotStep<T>>,
    pub trace: ElimTrace<T>,
}

impl<T: Real> FactorResult<T> {
    pub fn n(&self) -> usize {
        self.lu.len()
    }

    pub fn rho(&self) -> Result<T, PivotError> {
        self.growth.rho()
    }

    /// Episode return under the growth reward: sums the logged per-step
    /// rewards, which telescope to `-rho`.
    pub fn reward(&self) -> f64 {
        self.step_log.iter().map(|s| s.reward).sum()
    }

    /// Solves `A x = b` for the original matrix via the factors.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, PivotError> {
        let n = self.n();
        assert_eq!(b.len(), n, "right-hand side length");
        // L z = b[row_perm]
        let mut z: Vec<T> = (0..n).map(|i| b[self.row_perm.forward(i)]).collect();
        for i in 0..n {
            for j in 0..i {
                let lij = self.lu[i][j];
                z[i] = z[i] - lij * z[j];
            }
        }
        // U w = z
        let mut w = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for j in i + 1..n {
                s = s - self.lu[i][j] * w[j];
            }
            let d = self.lu[i][i];
            if d == T::zero() {
                return Err(PivotError::SingularUpper(i));
            }
            w[i] = s / d;
        }
        // x[col_perm] = w
        let mut x = vec![T::zero(); n];
        for j in 0..n {
            x[self.col_perm.forward(j)] = w[j];
        }
        Ok(x)
    }

    /// Recomputes `L*U` in working coordinates; equals the input with rows
    /// permuted by `row_perm` and columns by `col_perm`.
    pub fn reconstruct(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut out = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                let kmax = i.min(j);
                for k in 0..=kmax {
                    let l = if k == i { T::one() } else { self.lu[i][k] };
                    let u = self.lu[k][j];
                    if k < i {
                        s = s + l * u;
                    } else if k == i {
                        s = s + u;
                    }
                }
                out[i][j] = s;
            }
        }
        out
    }
}

/// Breakdown tolerance: `n * eps * max_initial`.
fn breakdown_tol<T: Real>(n: usize, max_initial: T) -> T {
    T::from_f64_lossy(n as f64) * T::epsilon() * max_initial
}

/// Finds the pivot position for step `k` (0-based) under `action`.
/// Ties break to the smallest row index, then smallest column index.
pub fn select_pivot<T: Real>(
    m: &DenseWorkingMatrix<T>,
    k: usize,
    action: PivotAction,
    tol: T,
) -> Result<(usize, usize), PivotError> {
    let n = m.n();
    debug_assert!(k < n);
    let col_max = |c: usize| -> (usize, T) {
        let mut best = (k, T::zero());
        for i in k..n {
            let v = m.get(i, c).abs();
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    };
    let row_max = |r: usize| -> (usize, T) {
        let mut best = (k, T::zero());
        for j in k..n {
            let v = m.get(r, j).abs();
            if v > best.1 {
                best = (j, v);
            }
        }
        best
    };
    match action {
        PivotAction::Pp => {
            let (r, v) = col_max(k);
            if v == T::zero() {
                return Err(PivotError::ZeroPivotColumn(k));
            }
            Ok((r, k))
        }
        PivotAction::Cp => {
            let mut best = (k, k, T::zero());
            for i in k..n {
                for j in k..n {
                    let v = m.get(i, j).abs();
                    if v > best.2 {
                        best = (i, j, v);
                    }
                }
            }
            if best.2 == T::zero() {
                return Err(PivotError::ZeroActiveSubmatrix(k));
            }
            Ok((best.0, best.1))
        }
        PivotAction::Rp => {
            // alternate row/column sweeps from PP's choice until the entry
            // is maximal in both
            let (mut r, v) = col_max(k);
            if v == T::zero() {
                return Err(PivotError::ZeroPivotColumn(k));
            }
            let mut c = k;
            loop {
                let (cj, _) = row_max(r);
                if m.get(r, cj).abs() <= m.get(r, c).abs() {
                    break;
                }
                c = cj;
                let (ri, _) = col_max(c);
                if m.get(ri, c).abs() <= m.get(r, c).abs() {
                    break;
                }
                r = ri;
            }
            Ok((r, c))
        }
        PivotAction::Skip => {
            if m.get(k, k).abs() < tol {
                return Err(PivotError::ZeroDiagonal(k));
            }
            Ok((k, k))
        }
    }
}

/// Applies the interchanges and rank-1 update for step `k` in place,
/// tracking growth. `k` is 0-based; the stored step counter advances.
pub fn ge_step<T: Real>(
    m: &mut DenseWorkingMatrix<T>,
    pivot: (usize, usize),
    row_perm: &mut Vec<usize>,
    col_perm: &mut Vec<usize>,
    growth: &mut GrowthTrace<T>,
    tol: T,
) -> Result<(), PivotError> {
    let n = m.n();
    let k = m.step() - 1;
    let (r, c) = pivot;
    m.swap_rows(r, k);
    row_perm.swap(r, k);
    m.swap_cols(c, k);
    col_perm.swap(c, k);
    let piv = m.get(k, k);
    if piv.abs() < tol {
        return Err(PivotError::NumericBreakdown(k));
    }
    for i in k + 1..n {
        let mult = m.get(i, k) / piv;
        *m.get_mut(i, k) = mult;
        for j in k + 1..n {
            let v = m.get(i, j) - mult * m.get(k, j);
            *m.get_mut(i, j) = v;
            growth.observe(v.abs());
        }
    }
    m.advance_step();
    Ok(())
}

/// Strategy for choosing the pivot action at each step.
pub enum PivotStrategy<'a> {
    Fixed(PivotAction),
    /// Fixed action, but a SKIP breakdown retries the step with PP.
    FixedWithFallback(PivotAction),
    Learned(&'a Policy),
}

impl<'a> PivotStrategy<'a> {
    fn validate(&self) -> Result<(), PivotError> {
        if let PivotStrategy::Learned(p) = self {
            if p.domain() != Domain::Pivoting {
                return Err(PivotError::PolicyDomainMismatch(p.domain()));
            }
        }
        Ok(())
    }
}

/// Reward for an episode step that failed hard enough to need a fallback.
pub const BREAKDOWN_PENALTY: f64 = -1.0e3;

/// Factorizes a sparse matrix densely with the given pivot strategy.
pub fn factorize<T: Real>(
    m: &SparseMatrix<T>,
    strategy: PivotStrategy<'_>,
) -> Result<FactorResult<T>, PivotError> {
    strategy.validate()?;
    let dense = m.to_dense().map_err(|_| PivotError::Singular)?;
    factorize_dense(dense, strategy)
}

pub fn factorize_dense<T: Real>(
    mut work: DenseWorkingMatrix<T>,
    strategy: PivotStrategy<'_>,
) -> Result<FactorResult<T>, PivotError> {
    strategy.validate()?;
    let n = work.n();
    let max_initial = work.max_abs();
    if max_initial == T::zero() {
        return Err(PivotError::Singular);
    }
    let tol = breakdown_tol(n, max_initial);
    let mut growth = GrowthTrace::new(max_initial);
    let mut trace = ElimTrace::start(&work);
    let mut row_perm: Vec<usize> = (0..n).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut step_log = Vec::with_capacity(n.saturating_sub(1));
    // ratio_0 = 0 so the per-step rewards telescope to exactly -rho
    let mut prev_ratio = 0.0f64;

    for k in 0..n.saturating_sub(1) {
        let mut action = match &strategy {
            PivotStrategy::Fixed(a) | PivotStrategy::FixedWithFallback(a) => *a,
            PivotStrategy::Learned(pol) => {
                let key = featurize_pivoting(&work, &growth);
                PivotAction::from_id(pol.select(&key)).unwrap_or(PivotAction::Pp)
            }
        };
        let allow_fallback = !matches!(strategy, PivotStrategy::Fixed(_));
        let mut fallback = false;
        let mut extra_penalty = 0.0;
        let pivot = match select_pivot(&work, k, action, tol) {
            Ok(p) => p,
            Err(e) => {
                if action == PivotAction::Skip && allow_fallback {
                    fallback = true;
                    extra_penalty = BREAKDOWN_PENALTY;
                    action = PivotAction::Pp;
                    select_pivot(&work, k, action, tol).map_err(|_| PivotError::Singular)?
                } else {
                    return Err(match e {
                        PivotError::ZeroPivotColumn(_) | PivotError::ZeroActiveSubmatrix(_) => {
                            PivotError::Singular
                        }
                        other => other,
                    });
                }
            }
        };
        let value = work.get(pivot.0, pivot.1);
        ge_step(&mut work, pivot, &mut row_perm, &mut col_perm, &mut growth, tol)?;
        trace.record(&work);
        let ratio = (growth.max_seen / growth.max_initial).to_f64().unwrap_or(f64::INFINITY);
        let reward = -(ratio - prev_ratio) + extra_penalty;
        prev_ratio = ratio;
        step_log.push(PivotStep { step: k + 1, action, row: pivot.0, col: pivot.1, value, reward, fallback });
    }
    if n > 0 && work.get(n - 1, n - 1).abs() < tol {
        return Err(PivotError::Singular);
    }

    Ok(FactorResult {
        lu: work.rows(),
        row_perm: Permutation::from_forward(row_perm).expect("swaps keep a bijection"),
        col_perm: Permutation::from_forward(col_perm).expect("swaps keep a bijection"),
        growth,
        step_log,
        trace,
    })
}

/// Wilkinson growth pattern: unit diagonal, -1 strictly below, last
/// column all ones. PP growth is `2^(n-1)`.
pub fn wilkinson<T: Real>(n: usize) -> SparseMatrix<T> {
    let mut triplets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = if j == n - 1 {
                T::one()
            } else if i == j {
                T::one()
            } else if i > j {
                -T::one()
            } else {
                T::zero()
            };
            if v != T::zero() {
                triplets.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, triplets).expect("well-formed pattern")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> DenseWorkingMatrix<f64> {
        DenseWorkingMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    fn sparse_from_dense(rows: &[&[f64]]) -> SparseMatrix<f64> {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(n, t).unwrap()
    }

    #[test]
    fn pp_selects_max_magnitude_in_column() {
        let m = dense(&[&[3.0, 0.0, 0.0], &[-5.0, 1.0, 0.0], &[2.0, 0.0, 1.0]]);
        assert_eq!(select_pivot(&m, 0, PivotAction::Pp, 1e-14).unwrap(), (1, 0));
    }

    #[test]
    fn cp_selects_global_max() {
        let m = dense(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(select_pivot(&m, 0, PivotAction::Cp, 1e-14).unwrap(), (1, 1));
    }

    #[test]
    fn rook_condition_holds() {
        let m = dense(&[&[1.0, 5.0], &[7.0, 2.0]]);
        let (r, c) = select_pivot(&m, 0, PivotAction::Rp, 1e-14).unwrap();
        // maximal in both its row and its column
        let v = m.get(r, c).abs();
        for j in 0..2 {
            assert!(v >= m.get(r, j).abs());
        }
        for i in 0..2 {
            assert!(v >= m.get(i, c).abs());
        }
        assert_eq!((r, c), (1, 0));
    }

    #[test]
    fn skip_takes_diagonal() {
        let m = dense(&[&[2.0, 1.0], &[1.0, 2.0]]);
        assert_eq!(select_pivot(&m, 0, PivotAction::Skip, 1e-14).unwrap(), (0, 0));
    }

    #[test]
    fn skip_zero_diagonal_errors() {
        let m = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(
            select_pivot(&m, 0, PivotAction::Skip, 1e-14),
            Err(PivotError::ZeroDiagonal(0))
        );
    }

    #[test]
    fn ge_step_identity_is_noop() {
        let mut m = dense(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let mut growth = GrowthTrace::new(1.0);
        let (mut rp, mut cp) = ((0..2).collect(), (0..2).collect());
        ge_step(&mut m, (0, 0), &mut rp, &mut cp, &mut growth, 1e-14).unwrap();
        assert_eq!(m.get(1, 0), 0.0); // multiplier
        assert_eq!(m.get(1, 1), 1.0);
    }

    #[test]
    fn ge_step_hand_elimination() {
        let mut m = dense(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let mut growth = GrowthTrace::new(1.0);
        let (mut rp, mut cp) = ((0..2).collect(), (0..2).collect());
        ge_step(&mut m, (0, 0), &mut rp, &mut cp, &mut growth, 1e-14).unwrap();
        assert_eq!(m.get(1, 0), 1.0);
        assert_eq!(m.get(1, 1), -2.0);
        assert_eq!(growth.max_seen, 2.0);
    }

    #[test]
    fn ge_step_row_swap() {
        let mut m = dense(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let mut growth = GrowthTrace::new(1.0);
        let (mut rp, mut cp) = ((0..2).collect::<Vec<_>>(), (0..2).collect());
        ge_step(&mut m, (1, 0), &mut rp, &mut cp, &mut growth, 1e-14).unwrap();
        assert_eq!(rp, vec![1, 0]);
        assert_eq!(growth.rho().unwrap(), 1.0);
    }

    #[test]
    fn factorize_identity() {
        let m: SparseMatrix<f64> = SparseMatrix::identity(3);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        assert_eq!(f.rho().unwrap(), 1.0);
        assert_eq!(f.row_perm, Permutation::identity(3));
        for i in 0..3 {
            assert_eq!(f.lu[i][i], 1.0);
        }
    }

    #[test]
    fn wilkinson_growth_pp() {
        for (n, expected) in [(4usize, 8.0f64), (8, 128.0)] {
            let m = wilkinson::<f64>(n);
            let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
            assert_eq!(f.rho().unwrap(), expected, "n = {n}");
        }
    }

    #[test]
    fn skip_growth_two() {
        let m = sparse_from_dense(&[&[1.0, 1.0], &[1.0, -1.0]]);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Skip)).unwrap();
        assert_eq!(f.rho().unwrap(), 2.0);
    }

    #[test]
    fn solve_identity() {
        let m: SparseMatrix<f64> = SparseMatrix::identity(2);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        assert_eq!(f.solve(&[4.0, 5.0]).unwrap(), vec![4.0, 5.0]);
    }

    #[test]
    fn solve_diagonal() {
        let m = sparse_from_dense(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        assert_eq!(f.solve(&[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn solve_residual_small() {
        // fixed well-conditioned 5x5
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|i| {
                (0..5)
                    .map(|j| if i == j { 10.0 } else { ((i * 5 + j) as f64).sin() })
                    .collect()
            })
            .collect();
        let m = sparse_from_dense(&rows.iter().map(|r| r.as_slice()).collect::<Vec<_>>());
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let x = f.solve(&b).unwrap();
        let ax = m.mul_vec(&x);
        let num = ax
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let den = m.norm_inf() * x.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
        assert!(num / den <= 1e-10, "relative residual {}", num / den);
    }

    #[test]
    fn pp_multipliers_bounded() {
        let m = wilkinson::<f64>(6);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        for i in 0..6 {
            for j in 0..i {
                assert!(f.lu[i][j].abs() <= 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = sparse_from_dense(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(
            factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap_err(),
            PivotError::Singular
        );
    }

    #[test]
    fn zero_matrix_rejected() {
        let m: SparseMatrix<f64> =
            SparseMatrix::new(crate::sparse::SparsePattern::empty(2), vec![]).unwrap();
        assert_eq!(
            factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap_err(),
            PivotError::Singular
        );
    }

    #[test]
    fn step_rewards_telescope_to_minus_rho() {
        let m = wilkinson::<f64>(5);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        let total = f.reward();
        assert!((total + f.rho().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn elim_trace_full_for_small() {
        let m = wilkinson::<f64>(4);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Pp)).unwrap();
        assert_eq!(f.trace.len(), 4); // A_1 .. A_n
        if let ElimTrace::Full(snaps) = &f.trace {
            // A_1 equals the input
            let input = m.to_dense().unwrap().rows();
            assert_eq!(snaps[0], input);
        } else {
            panic!("expected full snapshots for n <= 16");
        }
    }

    #[test]
    fn reconstruction_matches_permuted_input() {
        let m = sparse_from_dense(&[&[0.0, 2.0, 1.0], &[1.0, 0.5, 0.0], &[3.0, 1.0, 2.0]]);
        let f = factorize(&m, PivotStrategy::Fixed(PivotAction::Cp)).unwrap();
        let rec = f.reconstruct();
        for i in 0..3 {
            for j in 0..3 {
                let orig = m.get(f.row_perm.forward(i), f.col_perm.forward(j));
                assert!((rec[i][j] - orig).abs() < 1e-12);
            }
        }
    }
}
