//! Generators of the circle triple `(C^∞(T), L²(T), -i d/dθ)` in the Fourier basis.

use num_complex::Complex64;
use smallvec::smallvec;

use super::Label;
use crate::oracle::{normalize, LeafOperator, SparseVec};

/// Fourier coefficients `f̂(n)` of a trigonometric polynomial, stored densely
/// for `n ∈ [-m, m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSymbol {
    /// `coeffs[n + m] = f̂(n)`.
    coeffs: Vec<Complex64>,
    m: i64,
}

impl FourierSymbol {
    /// Builds a symbol from the argument list `c_0, c_{-1}, c_1, c_{-2}, c_2, …`.
    ///
    /// A trailing unpaired `c_{-m}` is allowed; missing coefficients are zero.
    pub fn from_list(list: &[Complex64]) -> Self {
        let m = (list.len() / 2) as i64;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (2 * m + 1) as usize];
        for (i, &c) in list.iter().enumerate() {
            let n = if i == 0 {
                0
            } else if i % 2 == 1 {
                -(i as i64).div_euclid(2) - 1
            } else {
                (i / 2) as i64
            };
            coeffs[(n + m) as usize] = c;
        }
        Self { coeffs, m }
    }

    /// `f̂(n)`.
    pub fn coeff(&self, n: i64) -> Complex64 {
        if n.abs() > self.m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(n + self.m) as usize]
        }
    }

    /// Largest `|n|` with `f̂(n) ≠ 0`.
    pub fn degree(&self) -> i64 {
        (-self.m..=self.m)
            .filter(|&n| self.coeff(n) != Complex64::new(0.0, 0.0))
            .map(i64::abs)
            .max()
            .unwrap_or(0)
    }

    /// Whether `f` is real-valued, i.e. `f̂(-n) = conj f̂(n)`.
    pub fn is_real(&self) -> bool {
        (0..=self.m).all(|n| self.coeff(-n) == self.coeff(n).conj())
    }

    fn support(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        (-self.m..=self.m)
            .map(|n| (n, self.coeff(n)))
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
    }
}

/// Multiplication by `f` on `L²(T)`, or the Toeplitz operator `T_f` on
/// `ℓ²(ℕ)` when `half_line` is set. Entries are `f̂(j - k)`.
#[derive(Debug)]
pub(crate) struct Convolution {
    pub(crate) symbol: FourierSymbol,
    pub(crate) half_line: bool,
}

impl LeafOperator for Convolution {
    fn column(&self, k: &Label) -> SparseVec {
        let k = k[0];
        normalize(
            self.symbol
                .support()
                .map(|(n, c)| (k + n, c))
                .filter(|(j, _)| !self.half_line || *j >= 0)
                .map(|(j, c)| (smallvec![j], c))
                .collect(),
        )
    }

    fn row(&self, j: &Label) -> SparseVec {
        let j = j[0];
        normalize(
            self.symbol
                .support()
                .map(|(n, c)| (j - n, c))
                .filter(|(k, _)| !self.half_line || *k >= 0)
                .map(|(k, c)| (smallvec![k], c))
                .collect(),
        )
    }

    fn diagonal(&self, _k: &Label) -> Complex64 {
        self.symbol.coeff(0)
    }
}

/// Diagonal `e_n ↦ g(sign n) e_n`.
#[derive(Debug)]
pub(crate) struct SignSymbol {
    /// Values at sign `-1, 0, +1`.
    pub(crate) values: [Complex64; 3],
}

impl SignSymbol {
    fn value(&self, n: i64) -> Complex64 {
        self.values[(n.signum() + 1) as usize]
    }
}

impl LeafOperator for SignSymbol {
    fn column(&self, k: &Label) -> SparseVec {
        normalize(vec![(k.clone(), self.value(k[0]))])
    }
    fn row(&self, j: &Label) -> SparseVec {
        self.column(j)
    }
    fn diagonal(&self, k: &Label) -> Complex64 {
        self.value(k[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn coefficient_list_convention() {
        // (0, 1, 1): f̂(±1) = 1, i.e. 2cos θ.
        let s = FourierSymbol::from_list(&[c(0.0), c(1.0), c(1.0)]);
        assert_eq!(s.coeff(0), c(0.0));
        assert_eq!(s.coeff(-1), c(1.0));
        assert_eq!(s.coeff(1), c(1.0));
        assert_eq!(s.degree(), 1);
        assert!(s.is_real());
        // (0, 0, 1): e^{iθ}.
        let e = FourierSymbol::from_list(&[c(0.0), c(0.0), c(1.0)]);
        assert_eq!(e.coeff(1), c(1.0));
        assert_eq!(e.coeff(-1), c(0.0));
        assert!(!e.is_real());
        // Unpaired trailing c_{-2}.
        let t = FourierSymbol::from_list(&[c(1.0), c(0.0), c(0.0), c(5.0)]);
        assert_eq!(t.coeff(-2), c(5.0));
        assert_eq!(t.coeff(2), c(0.0));
    }

    #[test]
    fn toeplitz_truncates_at_zero() {
        let op = Convolution {
            symbol: FourierSymbol::from_list(&[c(0.0), c(1.0), c(1.0)]),
            half_line: true,
        };
        let col = op.column(&smallvec![0]);
        assert_eq!(col.len(), 1);
        assert_eq!(col[0].0[0], 1);
        let row = op.row(&smallvec![0]);
        assert_eq!(row.len(), 1);
    }
}
