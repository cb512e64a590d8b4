//! Almost-commutative product of the flat 2-torus with a finite triple
//! `(C^m, D_F)`: `D = D_T ⊗ 1 + γ ⊗ D_F`.
//!
//! Per momentum `k` the Dirac operator acts on `C^2 ⊗ C^m` as the block
//! `B_k = (k_1 σ_x + k_2 σ_y) ⊗ 1 + σ_z ⊗ D_F`. Modes are `(k_1, k_2, i)` where
//! `i` indexes the eigenvalues of `B_k` in ascending order. Since `σ_z`
//! anticommutes with `σ_x, σ_y`, `B_k^2 = |k|^2 + D_F^2` and the block spectrum
//! is `±(|k|^2 + d_i^2)^{1/2}` over the eigenvalues `d_i` of `D_F`.

use std::collections::HashMap;
use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use parking_lot::RwLock;
use smallvec::smallvec;

use super::lattice::{ball_count, ball_points, integer_radius_sq, isqrt};
use super::{Label, MatrixEntry, ModelDescriptor};
use crate::error::{Error, Result};
use crate::numeric::eig_eq;
use crate::oracle::{normalize, LeafOperator, SparseVec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Eigendecomposition of one block `B_k`.
#[derive(Debug)]
pub(crate) struct Block {
    /// Ascending eigenvalues (the closed form is used for lookups).
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) values: Vec<f64>,
    /// Column-major `2m × 2m` unitary; column `i` is the eigenvector of `values[i]`.
    vectors: Vec<Complex64>,
    n: usize,
}

impl Block {
    fn vector(&self, i: usize) -> &[Complex64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug)]
pub struct AlmostCommutative {
    d_f: Vec<Vec<Complex64>>,
    /// Eigenvalues of `D_F^2`, ascending.
    d_sq: Vec<f64>,
    blocks: RwLock<HashMap<[i64; 2], Arc<Block>>>,
}

impl AlmostCommutative {
    pub(crate) fn new(d_f: Vec<Vec<Complex64>>) -> Result<Self> {
        let m = super::toeplitz::check_square(&d_f, "D_F")?;
        for i in 0..m {
            for j in 0..m {
                let (a, b) = (d_f[i][j], d_f[j][i].conj());
                if !(a.re.is_finite() && a.im.is_finite())
                    || (a - b).norm() > 1e-12 * a.norm().max(1.0)
                {
                    return Err(Error::invalid("D_F must be hermitian"));
                }
            }
        }
        let mat = Mat::<Complex64>::from_fn(m, m, |i, j| d_f[i][j]);
        let eig = mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("D_F eigenvalues: {e:?}")))?;
        let mut d_sq: Vec<f64> = eig.iter().map(|d| d * d).collect();
        d_sq.sort_by(f64::total_cmp);
        Ok(Self {
            d_f,
            d_sq,
            blocks: RwLock::new(HashMap::new()),
        })
    }

    /// Size `m` of the finite algebra.
    pub fn internal_dim(&self) -> usize {
        self.d_f.len()
    }

    /// Eigenvalues of `D_F^2`.
    pub fn finite_spectrum_sq(&self) -> &[f64] {
        &self.d_sq
    }

    pub(crate) fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::AlmostCommutative {
            d_f: self
                .d_f
                .iter()
                .map(|r| r.iter().map(|&z| MatrixEntry::from(z)).collect())
                .collect(),
        }
    }

    /// Closed-form ascending spectrum of `B_k`.
    fn closed_form(&self, k_sq: f64) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .d_sq
            .iter()
            .flat_map(|&d2| {
                let r = (k_sq + d2).sqrt();
                [-r, r]
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest integer `|k|^2` admitted at cutoff `λ` for internal level `d2`.
    fn radius(&self, lambda: f64, d2: f64) -> Option<u64> {
        integer_radius_sq(lambda * lambda - d2)
    }

    pub(crate) fn eigenvalue(&self, label: &Label) -> Result<f64> {
        let i = label[2];
        let m = self.internal_dim() as i64;
        if !(0..2 * m).contains(&i) {
            return Err(Error::invalid(format!("block index {i} out of range")));
        }
        let k_sq = (label[0] * label[0] + label[1] * label[1]) as f64;
        Ok(self.closed_form(k_sq)[i as usize].abs())
    }

    pub(crate) fn counting(&self, lambda: f64) -> usize {
        self.d_sq
            .iter()
            .map(|&d2| match self.radius(lambda, d2) {
                Some(r2) => 2 * ball_count(2, r2) as usize,
                None => 0,
            })
            .sum()
    }

    pub(crate) fn raw_modes(&self, lambda: f64) -> Result<Vec<(Label, f64)>> {
        let Some(r2_max) = self.radius(lambda, self.d_sq[0]) else {
            return Ok(Vec::new());
        };
        let radii: Vec<Option<u64>> = self.d_sq.iter().map(|&d2| self.radius(lambda, d2)).collect();
        let mut out = Vec::with_capacity(self.counting(lambda));
        for p in ball_points(2, r2_max) {
            let k_sq = (p[0] * p[0] + p[1] * p[1]) as u64;
            let vals = self.closed_form(k_sq as f64);
            for (i, v) in vals.iter().enumerate() {
                // Eigenvalue ±(k^2 + d^2)^{1/2}; recover which level it belongs to.
                let level = level_of(i, self.d_sq.len());
                if radii[level].is_some_and(|r2| k_sq <= r2) {
                    out.push((smallvec![p[0], p[1], i as i64], v.abs()));
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn distinct_eigenvalues(&self, lambda: f64) -> Vec<f64> {
        let mut all = Vec::new();
        for &d2 in &self.d_sq {
            let Some(r2) = self.radius(lambda, d2) else {
                continue;
            };
            let mut hit = vec![false; r2 as usize + 1];
            for a in 0..=isqrt(r2) {
                for b in a..=isqrt(r2 - a * a) {
                    hit[(a * a + b * b) as usize] = true;
                }
            }
            all.extend((0..=r2).filter(|&n| hit[n as usize]).map(|n| (n as f64 + d2).sqrt()));
        }
        all.sort_by(f64::total_cmp);
        all.dedup_by(|a, b| eig_eq(*a, *b));
        all
    }

    /// Numerical eigendecomposition of `B_k`, computed once per momentum.
    pub(crate) fn block(&self, k: [i64; 2]) -> Arc<Block> {
        if let Some(b) = self.blocks.read().get(&k) {
            return b.clone();
        }
        let computed = Arc::new(self.diagonalize(k));
        self.blocks.write().entry(k).or_insert(computed).clone()
    }

    /// The matrix `B_k` on `C^2 ⊗ C^m`, index `σ m + f`.
    pub(crate) fn block_matrix(&self, k: [i64; 2]) -> Mat<Complex64> {
        let m = self.internal_dim();
        let (k1, k2) = (k[0] as f64, k[1] as f64);
        // k_1 σ_x + k_2 σ_y = [[0, k_1 - i k_2], [k_1 + i k_2, 0]].
        let off = [
            [ZERO, Complex64::new(k1, -k2)],
            [Complex64::new(k1, k2), ZERO],
        ];
        Mat::from_fn(2 * m, 2 * m, |r, c| {
            let (s, f) = (r / m, r % m);
            let (t, g) = (c / m, c % m);
            let mut z = if f == g { off[s][t] } else { ZERO };
            if s == t {
                let sign = if s == 0 { 1.0 } else { -1.0 };
                z += self.d_f[f][g] * sign;
            }
            z
        })
    }

    fn diagonalize(&self, k: [i64; 2]) -> Block {
        let n = 2 * self.internal_dim();
        let eig = self
            .block_matrix(k)
            .self_adjoint_eigen(Side::Lower)
            .expect("hermitian block eigendecomposition");
        let values: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
        debug_assert!({
            let exact = self.closed_form((k[0] * k[0] + k[1] * k[1]) as f64);
            values
                .iter()
                .zip(&exact)
                .all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + y.abs()))
        });
        let u = eig.U();
        let mut vectors = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                vectors.push(u[(i, j)]);
            }
        }
        Block { values, vectors, n }
    }
}

/// Level `l` such that ascending index `i` carries `±(k^2 + d_l^2)^{1/2}`.
///
/// The ascending list is `-r_{m-1}, …, -r_0, r_0, …, r_{m-1}` for `r_l` increasing.
fn level_of(i: usize, m: usize) -> usize {
    if i < m {
        m - 1 - i
    } else {
        i - m
    }
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(1 ⊗ a) v` on `C^2 ⊗ C^m`.
fn apply_internal(a: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let m = a.len();
    let mut out = vec![ZERO; v.len()];
    for s in 0..2 {
        for f in 0..m {
            out[s * m + f] = (0..m).map(|g| a[f][g] * v[s * m + g]).sum();
        }
    }
    out
}

fn label_k(l: &Label) -> [i64; 2] {
    [l[0], l[1]]
}

/// `1 ⊗ a_F` in the block eigenbasis.
#[derive(Debug)]
pub(crate) struct Internal {
    pub(crate) model: Arc<AlmostCommutative>,
    pub(crate) a: Vec<Vec<Complex64>>,
    pub(crate) a_adj: Vec<Vec<Complex64>>,
}

impl Internal {
    fn column_of(&self, a: &[Vec<Complex64>], k: &Label) -> Vec<(Label, Complex64)> {
        let kk = label_k(k);
        let block = self.model.block(kk);
        let w = apply_internal(a, block.vector(k[2] as usize));
        (0..block.n)
            .map(|j| (smallvec![kk[0], kk[1], j as i64], dot_conj(block.vector(j), &w)))
            .collect()
    }
}

impl LeafOperator for Internal {
    fn column(&self, k: &Label) -> SparseVec {
        normalize(self.column_of(&self.a, k))
    }

    fn row(&self, j: &Label) -> SparseVec {
        normalize(
            self.column_of(&self.a_adj, j)
                .into_iter()
                .map(|(l, z)| (l, z.conj()))
                .collect(),
        )
    }
}

/// `u_m ⊗ 1` in the block eigenbasis.
#[derive(Debug)]
pub(crate) struct AcShift {
    pub(crate) model: Arc<AlmostCommutative>,
    pub(crate) m: [i64; 2],
}

impl LeafOperator for AcShift {
    fn column(&self, k: &Label) -> SparseVec {
        let src = self.model.block(label_k(k));
        let t = [k[0] + self.m[0], k[1] + self.m[1]];
        let dst = self.model.block(t);
        let v = src.vector(k[2] as usize);
        normalize(
            (0..dst.n)
                .map(|j| (smallvec![t[0], t[1], j as i64], dot_conj(dst.vector(j), v)))
                .collect(),
        )
    }

    fn row(&self, j: &Label) -> SparseVec {
        let dst = self.model.block(label_k(j));
        let s = [j[0] - self.m[0], j[1] - self.m[1]];
        let src = self.model.block(s);
        let w = dst.vector(j[2] as usize);
        normalize(
            (0..src.n)
                .map(|i| (smallvec![s[0], s[1], i as i64], dot_conj(w, src.vector(i))))
                .collect(),
        )
    }
}

/// Projection onto the non-negative half `i ≥ m` of every block spectrum.
#[derive(Debug)]
pub(crate) struct AcPositive {
    pub(crate) m: usize,
}

impl AcPositive {
    fn value(&self, k: &Label) -> Complex64 {
        if k[2] as usize >= self.m {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    }
}

impl LeafOperator for AcPositive {
    fn column(&self, k: &Label) -> SparseVec {
        normalize(vec![(k.clone(), self.value(k))])
    }
    fn row(&self, j: &Label) -> SparseVec {
        self.column(j)
    }
    fn diagonal(&self, k: &Label) -> Complex64 {
        self.value(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample() -> AlmostCommutative {
        AlmostCommutative::new(vec![vec![c(1.0, 0.0), c(0.0, 0.5)], vec![c(0.0, -0.5), c(-2.0, 0.0)]])
            .unwrap()
    }

    #[test]
    fn block_spectrum_matches_closed_form() {
        let ac = sample();
        for k in [[0, 0], [1, 0], [3, -2], [-5, 7]] {
            let b = ac.block(k);
            let k_sq = (k[0] * k[0] + k[1] * k[1]) as f64;
            let expected = ac.closed_form(k_sq);
            for (x, y) in b.values.iter().zip(&expected) {
                assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0), "{k:?}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        assert!(AlmostCommutative::new(vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]]).is_err());
        assert!(AlmostCommutative::new(vec![]).is_err());
    }

    #[test]
    fn counting_matches_enumeration() {
        let ac = sample();
        for lam in [0.5, 2.0, 3.7, 8.0] {
            assert_eq!(ac.counting(lam), ac.raw_modes(lam).unwrap().len(), "λ={lam}");
        }
    }

    #[test]
    fn zero_internal_dirac_reduces_to_torus() {
        let ac = AlmostCommutative::new(vec![vec![ZERO; 3]; 3]).unwrap();
        let t = super::super::Torus::new(2, vec![vec![0.0; 2]; 2], 0.0).unwrap();
        for lam in [1.0, 5.0, 10.0] {
            assert_eq!(ac.counting(lam), 3 * t.counting(lam));
        }
    }

    #[test]
    fn blocks_are_memoized() {
        let ac = sample();
        let a = ac.block([2, 3]);
        let b = ac.block([2, 3]);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
