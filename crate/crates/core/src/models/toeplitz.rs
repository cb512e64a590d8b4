//! Finite-rank operators on `ℓ²(ℕ)` for the Toeplitz triple.

use num_complex::Complex64;
use smallvec::smallvec;

use super::Label;
use crate::oracle::{normalize, LeafOperator, SparseVec};

/// `e_k ↦ Σ_{j<m} M[j][k] e_j` for `k < m`, zero on `k ≥ m`.
#[derive(Debug)]
pub(crate) struct FiniteRank {
    pub(crate) matrix: Vec<Vec<Complex64>>,
}

impl FiniteRank {
    fn size(&self) -> i64 {
        self.matrix.len() as i64
    }
}

impl LeafOperator for FiniteRank {
    fn column(&self, k: &Label) -> SparseVec {
        let k = k[0];
        if k < 0 || k >= self.size() {
            return Vec::new();
        }
        normalize(
            (0..self.size())
                .map(|j| (smallvec![j], self.matrix[j as usize][k as usize]))
                .collect(),
        )
    }

    fn row(&self, j: &Label) -> SparseVec {
        let j = j[0];
        if j < 0 || j >= self.size() {
            return Vec::new();
        }
        normalize(
            (0..self.size())
                .map(|k| (smallvec![k], self.matrix[j as usize][k as usize]))
                .collect(),
        )
    }
}

pub(crate) fn is_hermitian(m: &[Vec<Complex64>]) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, z)| *z == m[j][i].conj()))
}

/// Errors unless `m` is a non-empty square matrix.
pub(crate) fn check_square(m: &[Vec<Complex64>], what: &str) -> crate::error::Result<usize> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(crate::error::Error::invalid(format!(
            "{what}: expected a non-empty square matrix"
        )));
    }
    Ok(n)
}
