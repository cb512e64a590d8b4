//! The noncommutative `d`-torus `C^∞(T^d_θ)` acting on `L²(T^d_θ) ⊗ C^{N_d}`.
//!
//! Modes are `(k_1, …, k_d, s)` with spinor index `s < N_d = 2^{⌊d/2⌋}` and
//! `λ = |k|`.

use num_complex::Complex64;

use super::lattice::{ball_count, ball_points, integer_radius_sq, isqrt};
use super::{Label, ModelDescriptor};
use crate::error::{Error, Result};
use crate::expr::Polynomial;
use crate::oracle::{normalize, LeafOperator, SparseVec};

#[derive(Debug, Clone)]
pub struct Torus {
    d: usize,
    theta: Vec<Vec<f64>>,
    angular_origin: f64,
    spinor: usize,
    flat: bool,
}

impl Torus {
    pub(crate) fn new(d: usize, theta: Vec<Vec<f64>>, angular_origin: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("torus dimension must be >= 2, got {d}")));
        }
        if theta.len() != d || theta.iter().any(|r| r.len() != d) {
            return Err(Error::invalid(format!("theta must be a {d}x{d} matrix")));
        }
        for i in 0..d {
            for j in 0..d {
                let (a, b) = (theta[i][j], theta[j][i]);
                if !a.is_finite() || (a + b).abs() > 1e-12 * a.abs().max(1.0) {
                    return Err(Error::invalid("theta must be real antisymmetric"));
                }
            }
        }
        if !angular_origin.is_finite() {
            return Err(Error::invalid("angular_origin must be finite"));
        }
        let flat = theta.iter().flatten().all(|&x| x == 0.0);
        Ok(Self {
            d,
            theta,
            angular_origin,
            spinor: 1 << (d / 2),
            flat,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Spinor multiplicity `N_d`.
    pub fn spinor_dim(&self) -> usize {
        self.spinor
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub(crate) fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::NcTorus {
            d: self.d,
            theta: if self.flat { None } else { Some(self.theta.clone()) },
            angular_origin: self.angular_origin,
        }
    }

    pub(crate) fn eigenvalue(&self, label: &Label) -> f64 {
        norm_sq(&label[..self.d]).sqrt()
    }

    pub(crate) fn counting(&self, lambda: f64) -> usize {
        match integer_radius_sq(lambda * lambda) {
            Some(r2) => self.spinor * ball_count(self.d, r2) as usize,
            None => 0,
        }
    }

    pub(crate) fn raw_modes(&self, lambda: f64) -> Vec<(Label, f64)> {
        let Some(r2) = integer_radius_sq(lambda * lambda) else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(self.counting(lambda));
        for p in ball_points(self.d, r2) {
            let lam = norm_sq(&p).sqrt();
            for s in 0..self.spinor as i64 {
                let mut label: Label = p.iter().copied().collect();
                label.push(s);
                out.push((label, lam));
            }
        }
        out
    }

    pub(crate) fn distinct_eigenvalues(&self, lambda: f64) -> Vec<f64> {
        let Some(r2) = integer_radius_sq(lambda * lambda) else {
            return Vec::new();
        };
        let representable: Vec<u64> = match self.d {
            2 => {
                let mut hit = vec![false; r2 as usize + 1];
                let r = isqrt(r2);
                for a in 0..=r {
                    for b in a..=isqrt(r2 - a * a) {
                        hit[(a * a + b * b) as usize] = true;
                    }
                }
                (0..=r2).filter(|&n| hit[n as usize]).collect()
            }
            // Legendre: n is a sum of three squares unless n = 4^a (8b + 7).
            3 => (0..=r2)
                .filter(|&n| {
                    let mut m = n;
                    while m != 0 && m % 4 == 0 {
                        m /= 4;
                    }
                    m % 8 != 7
                })
                .collect(),
            _ => (0..=r2).collect(),
        };
        representable.into_iter().map(|n| (n as f64).sqrt()).collect()
    }

    /// `<m, θ k>`.
    fn form(&self, m: &[i64], k: &[i64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                acc += m[i] as f64 * self.theta[i][j] * k[j] as f64;
            }
        }
        acc
    }

    /// Phase of `u_m e_k = e^{(i/2)<m, θ k>} e_{k+m}`.
    pub(crate) fn phase(&self, m: &[i64], k: &[i64]) -> Complex64 {
        if self.flat {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, 0.5 * self.form(m, k))
        }
    }

    pub(crate) fn angular_origin(&self) -> f64 {
        self.angular_origin
    }
}

fn norm_sq(k: &[i64]) -> f64 {
    k.iter().map(|&x| (x * x) as f64).sum()
}

/// The unitary `u_m ⊗ 1`.
#[derive(Debug)]
pub(crate) struct TorusShift {
    pub(crate) torus: Torus,
    pub(crate) m: Vec<i64>,
}

impl LeafOperator for TorusShift {
    fn column(&self, k: &Label) -> SparseVec {
        let d = self.torus.d;
        let mut j = k.clone();
        for i in 0..d {
            j[i] += self.m[i];
        }
        normalize(vec![(j, self.torus.phase(&self.m, &k[..d]))])
    }

    fn row(&self, j: &Label) -> SparseVec {
        let d = self.torus.d;
        let mut k = j.clone();
        for i in 0..d {
            k[i] -= self.m[i];
        }
        let phase = self.torus.phase(&self.m, &k[..d]);
        normalize(vec![(k, phase)])
    }

    fn diagonal(&self, _k: &Label) -> Complex64 {
        if self.m.iter().all(|&x| x == 0) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}

/// Diagonal `e_{k,s} ↦ g(k/|k|) e_{k,s}`, with `g_0` at `k = 0`.
#[derive(Debug)]
pub(crate) struct Angular {
    pub(crate) d: usize,
    pub(crate) poly: Polynomial,
    pub(crate) origin: f64,
}

impl Angular {
    fn value(&self, k: &Label) -> Complex64 {
        let k = &k[..self.d];
        let r = norm_sq(k).sqrt();
        if r == 0.0 {
            return Complex64::new(self.origin, 0.0);
        }
        let x: Vec<f64> = k.iter().map(|&c| c as f64 / r).collect();
        Complex64::new(self.poly.eval(&x), 0.0)
    }
}

impl LeafOperator for Angular {
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

    #[test]
    fn rejects_non_antisymmetric_theta() {
        assert!(Torus::new(2, vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0.0).is_err());
        assert!(Torus::new(2, vec![vec![0.0, 1.0]], 0.0).is_err());
        assert!(Torus::new(1, vec![vec![0.0]], 0.0).is_err());
        assert!(Torus::new(2, vec![vec![0.0, 0.3], vec![-0.3, 0.0]], 0.0).is_ok());
    }

    #[test]
    fn spinor_multiplicity() {
        for (d, n) in [(2, 2), (3, 2), (4, 4), (5, 4)] {
            let t = Torus::new(d, vec![vec![0.0; d]; d], 0.0).unwrap();
            assert_eq!(t.spinor_dim(), n);
        }
    }

    #[test]
    fn distinct_eigenvalues_match_enumeration() {
        for d in 2..=4 {
            let t = Torus::new(d, vec![vec![0.0; d]; d], 0.0).unwrap();
            let mut from_modes: Vec<u64> = t
                .raw_modes(6.0)
                .iter()
                .map(|(l, _)| l[..d].iter().map(|&x| (x * x) as u64).sum())
                .collect();
            from_modes.sort_unstable();
            from_modes.dedup();
            let listed: Vec<u64> = t
                .distinct_eigenvalues(6.0)
                .iter()
                .map(|r| (r * r).round() as u64)
                .collect();
            assert_eq!(listed, from_modes, "d={d}");
        }
    }
}
