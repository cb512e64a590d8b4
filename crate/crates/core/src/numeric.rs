//! Compensated summation and a few scalar helpers shared by every module.
//!
//! All reductions in the crate go through [`CompensatedSum`] in index order, so
//! results do not depend on thread count or platform.

use num_complex::Complex64;

/// Neumaier-compensated running sum of real numbers.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum for complex values (real and imaginary parts independently).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of an iterator of reals, in iteration order.
pub fn sum_real<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

/// Compensated sum of an iterator of complex values, in iteration order.
pub fn sum_complex<I: IntoIterator<Item = Complex64>>(it: I) -> Complex64 {
    let mut s = ComplexSum::new();
    for z in it {
        s.add(z);
    }
    s.value()
}

/// `<x> = (1 + x^2)^{1/2}`.
#[inline]
pub fn japanese_bracket(x: f64) -> f64 {
    x.hypot(1.0)
}

/// Gamma function. `statrs` implements the Lanczos approximation (g = 10.9,
/// 15 terms), which is good to roughly 15 significant digits on the positive axis.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// Relative tolerance used when comparing eigenvalues for equality (degenerate
/// eigenspaces, cutoff snapping).
pub const EIGEN_TOL: f64 = 1e-11;

#[inline]
pub(crate) fn eig_le(a: f64, b: f64) -> bool {
    a <= b + EIGEN_TOL * b.abs().max(1.0)
}

#[inline]
pub(crate) fn eig_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EIGEN_TOL * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum_real(xs), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn harmonic_sum_is_accurate() {
        let n = 100_000;
        let h = sum_real((1..=n).map(|k| 1.0 / k as f64));
        // H_n = ln n + gamma + 1/(2n) - 1/(12 n^2) + ...
        let nf = n as f64;
        let asym = nf.ln() + 0.577_215_664_901_532_9 + 1.0 / (2.0 * nf) - 1.0 / (12.0 * nf * nf);
        assert!((h - asym).abs() < 1e-13);
    }

    #[test]
    fn gamma_matches_closed_forms() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((gamma(1.5) - sqrt_pi / 2.0).abs() < 1e-13);
        assert!((gamma(2.0) - 1.0).abs() < 1e-13);
        assert!((gamma(2.5) - 0.75 * sqrt_pi).abs() < 1e-13);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
    }

    #[test]
    fn bracket_dominates_argument() {
        for x in [0.0, 0.5, 3.0, 1e8] {
            let b = japanese_bracket(x);
            assert!(b >= 1.0 && b >= x);
        }
    }
}
