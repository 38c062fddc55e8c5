use crate::scalar::Real;

/// Default size cap for dense working storage.
pub const DEFAULT_DENSE_CAP: usize = 2048;

/// Dense working form used by the numeric factorization.
///
/// `step` is 1-based: at step `k`, rows and columns below `k` are already
/// eliminated and hold multipliers / factor rows.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseWorkingMatrix<T> {
    n: usize,
    a: Vec<T>,
    step: usize,
}

impl<T: Real> DenseWorkingMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![T::zero(); n * n], step: 1 }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "rows must form a square matrix");
            a.extend_from_slice(row);
        }
        Self { n, a, step: 1 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Current elimination step, 1-based.
    pub fn step(&self) -> usize {
        self.step
    }

    pub(crate) fn advance_step(&mut self) {
        self.step += 1;
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.a[row * self.n + col]
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.a[row * self.n + col]
    }

    pub fn swap_rows(&mut self, r1: usize, r2: usize) {
        if r1 == r2 {
            return;
        }
        for j in 0..self.n {
            self.a.swap(r1 * self.n + j, r2 * self.n + j);
        }
    }

    pub fn swap_cols(&mut self, c1: usize, c2: usize) {
        if c1 == c2 {
            return;
        }
        for i in 0..self.n {
            self.a.swap(i * self.n + c1, i * self.n + c2);
        }
    }

    pub fn max_abs(&self) -> T {
        self.a.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| self.a[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }
}
