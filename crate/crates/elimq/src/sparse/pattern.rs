use serde::{Deserialize, Serialize};

use super::SparseError;

/// Nonzero structure of a square matrix: sorted, duplicate-free
/// `(row, col)` pairs, zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsePattern {
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl SparsePattern {
    /// Builds a pattern from arbitrary coordinates. Sorts and validates;
    /// duplicates are rejected.
    pub fn new(n: usize, mut entries: Vec<(usize, usize)>) -> Result<Self, SparseError> {
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0] == w[1] {
                return Err(SparseError::DuplicateEntry { row: w[0].0, col: w[0].1 });
            }
        }
        if let Some(&(r, c)) = entries.iter().find(|&&(r, c)| r >= n || c >= n) {
            return Err(SparseError::IndexOutOfRange { line: 0, row: r, col: c, n });
        }
        Ok(Self { n, entries })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, entries: (0..n).map(|i| (i, i)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.entries.binary_search(&(row, col)).is_ok()
    }

    /// Pattern of `self ∪ selfᵀ` with the diagonal removed: the undirected
    /// adjacency the elimination graph is built from.
    pub fn symmetrize(&self) -> SparsePattern {
        let mut edges: Vec<(usize, usize)> = self
            .entries
            .iter()
            .filter(|&&(r, c)| r != c)
            .flat_map(|&(r, c)| [(r, c), (c, r)])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        SparsePattern { n: self.n, entries: edges }
    }

    /// Relabels every entry `(i, j)` to `(perm[i], perm[j])`.
    pub fn permute(&self, perm: &Permutation) -> Result<SparsePattern, SparseError> {
        if perm.len() != self.n {
            return Err(SparseError::SizeMismatch { perm: perm.len(), n: self.n });
        }
        let mut entries: Vec<(usize, usize)> = self
            .entries
            .iter()
            .map(|&(r, c)| (perm.forward(r), perm.forward(c)))
            .collect();
        entries.sort_unstable();
        Ok(SparsePattern { n: self.n, entries })
    }
}

/// Bijection on `[0, n)` kept together with its inverse.
///
/// `forward[old] = new`: when used as an elimination order, the node
/// eliminated at step `k` is `inverse[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let id: Vec<usize> = (0..n).collect();
        Self { forward: id.clone(), inverse: id }
    }

    /// Builds from a forward map; must be a bijection on `[0, n)`.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self, SparseError> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (old, &new) in forward.iter().enumerate() {
            if new >= n || inverse[new] != usize::MAX {
                return Err(SparseError::InvalidEntry(format!(
                    "forward map is not a bijection at index {old}"
                )));
            }
            inverse[new] = old;
        }
        Ok(Self { forward, inverse })
    }

    /// Builds from an elimination order: `order[k]` is the node eliminated
    /// at step `k`.
    pub fn from_order(order: Vec<usize>) -> Result<Self, SparseError> {
        let p = Self::from_forward(order)?;
        Ok(Self { forward: p.inverse, inverse: p.forward })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn forward_slice(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverted(&self) -> Permutation {
        Permutation { forward: self.inverse.clone(), inverse: self.forward.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrize_mirrors_single_entry() {
        let p = SparsePattern::new(2, vec![(0, 1)]).unwrap();
        assert_eq!(p.symmetrize().entries(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn symmetrize_drops_diagonal() {
        let p = SparsePattern::identity(3);
        assert_eq!(p.symmetrize().nnz(), 0);
    }

    #[test]
    fn symmetrize_idempotent() {
        let p = SparsePattern::new(4, vec![(0, 2), (2, 0), (1, 3), (3, 1)]).unwrap();
        let s = p.symmetrize();
        assert_eq!(s, s.symmetrize());
        assert_eq!(s, p.symmetrize());
    }

    #[test]
    fn permute_identity_is_noop() {
        let p = SparsePattern::new(3, vec![(0, 1), (2, 2)]).unwrap();
        assert_eq!(p.permute(&Permutation::identity(3)).unwrap(), p);
    }

    #[test]
    fn permute_diagonal_fixed_under_reversal() {
        let p = SparsePattern::identity(4);
        let rev = Permutation::from_forward(vec![3, 2, 1, 0]).unwrap();
        assert_eq!(p.permute(&rev).unwrap(), p);
    }

    #[test]
    fn permute_swap_relabels() {
        let p = SparsePattern::new(2, vec![(0, 1)]).unwrap();
        let swap = Permutation::from_forward(vec![1, 0]).unwrap();
        assert_eq!(p.permute(&swap).unwrap().entries(), &[(1, 0)]);
    }

    #[test]
    fn permute_size_mismatch() {
        let p = SparsePattern::identity(3);
        let perm = Permutation::identity(2);
        assert!(matches!(p.permute(&perm), Err(SparseError::SizeMismatch { .. })));
    }

    #[test]
    fn duplicate_rejected() {
        let err = SparsePattern::new(3, vec![(1, 2), (1, 2)]).unwrap_err();
        assert_eq!(err, SparseError::DuplicateEntry { row: 1, col: 2 });
    }

    #[test]
    fn permutation_roundtrip() {
        let p = Permutation::from_forward(vec![2, 0, 3, 1]).unwrap();
        for i in 0..4 {
            assert_eq!(p.inverse(p.forward(i)), i);
        }
    }

    #[test]
    fn from_order_matches_elimination_semantics() {
        // node 2 eliminated first -> it gets new index 0
        let p = Permutation::from_order(vec![2, 0, 1]).unwrap();
        assert_eq!(p.forward(2), 0);
        assert_eq!(p.inverse(0), 2);
    }
}
