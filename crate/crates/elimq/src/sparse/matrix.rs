use serde::{Deserialize, Serialize};

use super::{DenseWorkingMatrix, Permutation, SparseError, SparsePattern, DEFAULT_DENSE_CAP};
use crate::scalar::Real;

/// Square sparse matrix: a pattern plus one value per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix<T> {
    pattern: SparsePattern,
    values: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    pub fn new(pattern: SparsePattern, values: Vec<T>) -> Result<Self, SparseError> {
        if values.len() != pattern.nnz() {
            return Err(SparseError::InvalidEntry(format!(
                "value count {} does not match nnz {}",
                values.len(),
                pattern.nnz()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(SparseError::InvalidEntry(format!("non-finite value {v}")));
        }
        Ok(Self { pattern, values })
    }

    /// Builds from coordinate triplets; duplicates are rejected.
    pub fn from_triplets(
        n: usize,
        triplets: Vec<(usize, usize, T)>,
    ) -> Result<Self, SparseError> {
        let mut triplets = triplets;
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let entries: Vec<(usize, usize)> = triplets.iter().map(|&(r, c, _)| (r, c)).collect();
        let values: Vec<T> = triplets.into_iter().map(|(_, _, v)| v).collect();
        let pattern = SparsePattern::new(n, entries)?;
        Self::new(pattern, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            pattern: SparsePattern::identity(n),
            values: vec![T::one(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n()
    }

    pub fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    pub fn pattern(&self) -> &SparsePattern {
        &self.pattern
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.pattern
            .entries()
            .iter()
            .zip(&self.values)
            .map(|(&(r, c), &v)| (r, c, v))
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        match self.pattern.entries().binary_search(&(row, col)) {
            Ok(idx) => self.values[idx],
            Err(_) => T::zero(),
        }
    }

    /// Symmetric relabeling `(i, j) -> (perm[i], perm[j])`, values carried along.
    pub fn permute(&self, perm: &Permutation) -> Result<SparseMatrix<T>, SparseError> {
        if perm.len() != self.n() {
            return Err(SparseError::SizeMismatch { perm: perm.len(), n: self.n() });
        }
        let triplets = self
            .triplets()
            .map(|(r, c, v)| (perm.forward(r), perm.forward(c), v))
            .collect();
        Self::from_triplets(self.n(), triplets)
    }

    /// Max row-sum norm of the matrix.
    pub fn norm_inf(&self) -> T {
        let mut row_sums = vec![T::zero(); self.n()];
        for (r, _, v) in self.triplets() {
            row_sums[r] = row_sums[r] + v.abs();
        }
        row_sums.into_iter().fold(T::zero(), T::max)
    }

    /// Matrix-vector product `A x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n()];
        for (r, c, v) in self.triplets() {
            y[r] = y[r] + v * x[c];
        }
        y
    }

    pub fn to_dense(&self) -> Result<DenseWorkingMatrix<T>, SparseError> {
        self.to_dense_with_cap(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseWorkingMatrix<T>, SparseError> {
        if self.n() > cap {
            return Err(SparseError::TooLargeForDense { n: self.n(), cap });
        }
        let mut m = DenseWorkingMatrix::zeros(self.n());
        for (r, c, v) in self.triplets() {
            *m.get_mut(r, c) = v;
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_to_dense() {
        let m: SparseMatrix<f64> = SparseMatrix::identity(2);
        let d = m.to_dense().unwrap();
        assert_eq!(d.get(0, 0), 1.0);
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(d.get(1, 1), 1.0);
        assert_eq!(d.step(), 1);
    }

    #[test]
    fn empty_pattern_to_dense_is_zero() {
        let m: SparseMatrix<f64> =
            SparseMatrix::new(SparsePattern::empty(3), vec![]).unwrap();
        let d = m.to_dense().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let m: SparseMatrix<f64> = SparseMatrix::identity(4096);
        assert!(matches!(
            m.to_dense(),
            Err(SparseError::TooLargeForDense { n: 4096, cap: 2048 })
        ));
    }

    #[test]
    fn non_finite_value_rejected() {
        let p = SparsePattern::identity(1);
        assert!(SparseMatrix::new(p, vec![f64::NAN]).is_err());
    }
}
