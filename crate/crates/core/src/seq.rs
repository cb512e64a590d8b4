//! Summability transforms on finite prefixes of bounded sequences.
//!
//! Indices are 0-based throughout: the Cesàro mean is
//! `C(x)_n = (1/(n+1)) Σ_{k≤n} x_k` and the logarithmic mean is
//! `M(x)_n = (1/log(n+2)) Σ_{k≤n} x_k/(k+1)`. Both are regular (they preserve
//! limits), and `M(x) - M(C(x)) → 0` for every bounded `x`.
//!
//! Extended limits are not constructible, so limits are approximated by a
//! [`LimitSurrogate`]: the value at the top of a ladder of horizons together with
//! the spread of the values over the upper half of the ladder.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, ComplexSum};

/// Default drift below which a surrogate is reported as measurable.
pub const DEFAULT_MEASURABLE_TOL: f64 = 1e-2;

/// A non-empty, finite prefix `x_0, …, x_n` of a complex sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummabilitySeries {
    values: Vec<Complex64>,
}

impl SummabilitySeries {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sequence prefix is empty"));
        }
        if let Some(k) = values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!("entry {k} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn from_real<I: IntoIterator<Item = f64>>(values: I) -> Result<Self> {
        Self::new(values.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }

    /// Builds `x_0..=x_horizon` from a closure.
    pub fn from_fn(horizon: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::from_real((0..=horizon).map(f))
    }

    /// Index of the last computed term.
    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, n: usize) -> Option<Complex64> {
        self.values.get(n).copied()
    }

    /// Real parts, for sequences known to be real.
    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n > self.horizon() {
            return Err(Error::invalid(format!(
                "index {n} beyond horizon {}",
                self.horizon()
            )));
        }
        Ok(())
    }
}

/// Cesàro mean `C(x)_n = (1/(n+1)) Σ_{k≤n} x_k`.
pub fn cesaro(x: &SummabilitySeries) -> SummabilitySeries {
    let mut acc = ComplexSum::new();
    let values = x
        .values
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            acc.add(z);
            acc.value() / (n as f64 + 1.0)
        })
        .collect();
    SummabilitySeries { values }
}

/// Logarithmic mean `M(x)_n = (1/log(n+2)) Σ_{k≤n} x_k/(k+1)`.
pub fn log_mean(x: &SummabilitySeries) -> SummabilitySeries {
    let mut acc = ComplexSum::new();
    let values = x
        .values
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            acc.add(z / (n as f64 + 1.0));
            acc.value() / (n as f64 + 2.0).ln()
        })
        .collect();
    SummabilitySeries { values }
}

/// Logarithmic mean with self-normalized weights,
/// `(Σ_{k≤n} x_k/(k+1)) / H_{n+1}`.
///
/// Since `H_{n+1}/log(n+2) → 1` this has the same limit points as [`log_mean`],
/// but it fixes constants exactly at every finite `n` instead of carrying the
/// `(γ + o(1))/log n` bias of the raw normalization.
pub fn normalized_log_mean(x: &SummabilitySeries) -> SummabilitySeries {
    let mut acc = ComplexSum::new();
    let mut harmonic = CompensatedSum::new();
    let values = x
        .values
        .iter()
        .enumerate()
        .map(|(n, &z)| {
            let w = 1.0 / (n as f64 + 1.0);
            acc.add(z * w);
            harmonic.add(w);
            acc.value() / harmonic.value()
        })
        .collect();
    SummabilitySeries { values }
}

/// `|M(x)_n - M(C(x))_n|`. Tends to zero for every bounded `x`; no rate is claimed.
pub fn log_cesaro_gap(x: &SummabilitySeries, n: usize) -> Result<f64> {
    x.check_index(n)?;
    let prefix = SummabilitySeries {
        values: x.values[..=n].to_vec(),
    };
    let direct = log_mean(&prefix).values[n];
    let averaged = log_mean(&cesaro(&prefix)).values[n];
    Ok((direct - averaged).norm())
}

/// Weighted partial sums compared along a checkpoint subsequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResampleReport {
    /// `(1/φ(n)) Σ_{k≤n} a_k` for `n = 0..=last`.
    pub direct: Vec<Complex64>,
    /// `(1/φ(k_{i_n})) Σ_{k≤k_{i_n}} a_k` with `k_{i_n} = min{k_i ≥ n}`.
    pub resampled: Vec<Complex64>,
    /// Sup of `|direct - resampled|` over the upper half of the prefix.
    pub sup_difference: f64,
    /// Max of `|φ(k_{i+1})/φ(k_i) - 1|` over checkpoints in the upper half.
    pub ratio_defect: f64,
    /// Max of `(1/φ(k_i)) Σ_{k_{i-1}<k≤k_i} |a_k|` over checkpoints in the upper half.
    pub block_defect: f64,
    /// Both defects are below the tolerance handed to [`resample_on_checkpoints`].
    pub hypotheses_hold: bool,
}

/// Compares weighted partial sums with their values resampled on a checkpoint
/// subsequence `k_0 < k_1 < …`.
///
/// When `φ(k_{i+1})/φ(k_i) → 1` and the block sums `(1/φ(k_i)) Σ_{block} |a_k|`
/// vanish, the two sequences agree up to `o(1)`. Both hypotheses are measured on
/// the available prefix and reported alongside the difference.
pub fn resample_on_checkpoints(
    a: &SummabilitySeries,
    phi: impl Fn(usize) -> f64,
    checkpoints: &[usize],
    hypothesis_tol: f64,
) -> Result<ResampleReport> {
    if checkpoints.is_empty() {
        return Err(Error::invalid("checkpoint list is empty"));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    // Only checkpoints inside the prefix are usable.
    let usable: Vec<usize> = checkpoints
        .iter()
        .copied()
        .filter(|&k| k <= a.horizon())
        .collect();
    let Some(&last) = usable.last() else {
        return Err(Error::invalid("no checkpoint lies inside the sequence prefix"));
    };

    let mut partial = Vec::with_capacity(last + 1);
    let mut abs_partial = Vec::with_capacity(last + 1);
    let mut acc = ComplexSum::new();
    let mut abs_acc = CompensatedSum::new();
    for &z in &a.values[..=last] {
        acc.add(z);
        abs_acc.add(z.norm());
        partial.push(acc.value());
        abs_partial.push(abs_acc.value());
    }
    let weight = |n: usize| {
        let w = phi(n);
        if w > 0.0 && w.is_finite() {
            Ok(w)
        } else {
            Err(Error::invalid(format!("weight phi({n}) = {w} is not positive")))
        }
    };

    let mut direct = Vec::with_capacity(last + 1);
    let mut resampled = Vec::with_capacity(last + 1);
    let mut next = 0usize;
    for n in 0..=last {
        while usable[next] < n {
            next += 1;
        }
        let k = usable[next];
        direct.push(partial[n] / weight(n)?);
        resampled.push(partial[k] / weight(k)?);
    }

    let top = last / 2;
    let sup_difference = (top..=last)
        .map(|n| (direct[n] - resampled[n]).norm())
        .fold(0.0, f64::max);

    let mut ratio_defect = 0.0f64;
    let mut block_defect = 0.0f64;
    for i in 1..usable.len() {
        if usable[i] < top {
            continue;
        }
        let (prev, cur) = (usable[i - 1], usable[i]);
        ratio_defect = ratio_defect.max((weight(cur)? / weight(prev)? - 1.0).abs());
        block_defect = block_defect.max((abs_partial[cur] - abs_partial[prev]) / weight(cur)?);
    }

    Ok(ResampleReport {
        direct,
        resampled,
        sup_difference,
        ratio_defect,
        block_defect,
        hypotheses_hold: ratio_defect < hypothesis_tol && block_defect < hypothesis_tol,
    })
}

/// Finite stand-in for an extended limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSurrogate {
    /// Strictly increasing evaluation horizons.
    pub ladder: Vec<usize>,
    /// Sequence values at each horizon.
    pub values: Vec<Complex64>,
    /// Value at the largest horizon.
    pub value: Complex64,
    /// Max pairwise spread over the upper half of the ladder.
    pub drift: f64,
    /// `drift < tolerance`.
    pub measurable: bool,
}

/// Max pairwise distance among the values in the upper half of a ladder.
///
/// The upper half is the last `max(2, ⌈m/2⌉)` entries (all of them when `m ≤ 2`).
pub fn ladder_drift(values: &[Complex64]) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let keep = (m.div_ceil(2)).max(2);
    let top = &values[m - keep..];
    let mut drift = 0.0f64;
    for (i, a) in top.iter().enumerate() {
        for b in &top[i + 1..] {
            drift = drift.max((a - b).norm());
        }
    }
    drift
}

/// Evaluates `x` on a ladder of horizons and summarizes it as a [`LimitSurrogate`].
pub fn omega_surrogate(
    x: &SummabilitySeries,
    ladder: &[usize],
    tolerance: f64,
) -> Result<LimitSurrogate> {
    if ladder.is_empty() {
        return Err(Error::invalid("horizon ladder is empty"));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("horizon ladder must be strictly increasing"));
    }
    let values = ladder
        .iter()
        .map(|&n| {
            x.get(n).ok_or_else(|| {
                Error::invalid(format!("horizon {n} beyond sequence horizon {}", x.horizon()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let drift = ladder_drift(&values);
    Ok(LimitSurrogate {
        ladder: ladder.to_vec(),
        value: *values.last().unwrap(),
        values,
        drift,
        measurable: drift < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alternating(horizon: usize) -> SummabilitySeries {
        SummabilitySeries::from_fn(horizon, |k| if k % 2 == 0 { 1.0 } else { 0.0 }).unwrap()
    }

    fn harmonic(n: usize) -> f64 {
        crate::numeric::sum_real((1..=n).map(|k| 1.0 / k as f64))
    }

    #[test]
    fn empty_or_nonfinite_prefix_is_rejected() {
        assert!(matches!(
            SummabilitySeries::new(vec![]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(SummabilitySeries::from_real([1.0, f64::NAN]).is_err());
        assert!(SummabilitySeries::from_real([f64::INFINITY]).is_err());
    }

    #[test]
    fn cesaro_examples() {
        let ones = SummabilitySeries::from_fn(50, |_| 1.0).unwrap();
        assert!(cesaro(&ones).values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));

        let c = cesaro(&alternating(999));
        assert_eq!(c.get(999).unwrap().re, 0.5);

        let single = SummabilitySeries::from_real([7.0]).unwrap();
        assert_eq!(cesaro(&single).re(), vec![7.0]);
    }

    #[test]
    fn log_mean_of_ones_is_harmonic_over_log() {
        let n = 10_000;
        let ones = SummabilitySeries::from_fn(n, |_| 1.0).unwrap();
        let m = log_mean(&ones);
        let expected = harmonic(n + 1) / ((n + 2) as f64).ln();
        assert!((m.get(n).unwrap().re - expected).abs() < 1e-13);
        // 1.0626636..., i.e. within 0.08 of the limit 1.
        assert!((m.get(n).unwrap().re - 1.0).abs() < 0.08);
    }

    #[test]
    fn log_mean_of_zero_and_single_term() {
        let zero = SummabilitySeries::from_fn(20, |_| 0.0).unwrap();
        assert!(log_mean(&zero).values().iter().all(|z| z.norm() == 0.0));
        let single = SummabilitySeries::from_real([3.0]).unwrap();
        assert!((log_mean(&single).re()[0] - 3.0 / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log_mean_of_alternating_sequence() {
        // Oracle: direct summation over even k. The limit is 1/2, but the
        // alternation leaves a ~ (ln 2 + γ/2)/log n bias at finite n.
        let n = 10_000;
        let oracle = crate::numeric::sum_real((0..=n).step_by(2).map(|k| 1.0 / (k as f64 + 1.0)))
            / ((n + 2) as f64).ln();
        let got = log_mean(&alternating(n)).get(n).unwrap().re;
        assert!((got - oracle).abs() < 1e-13);
        assert!((got - 0.568_962_449_464_462_2).abs() < 1e-12);
        assert!((got - 0.5).abs() < 0.075);
    }

    #[test]
    fn normalized_log_mean_fixes_constants() {
        let c = SummabilitySeries::from_fn(5000, |_| -2.5).unwrap();
        for (n, z) in normalized_log_mean(&c).values().iter().enumerate() {
            assert!((z.re + 2.5).abs() <= 1e-12 * (n as f64 + 1.0));
        }
    }

    #[test]
    fn log_cesaro_gap_examples() {
        let alt = alternating(10_000);
        let g3 = log_cesaro_gap(&alt, 1000).unwrap();
        let g4 = log_cesaro_gap(&alt, 10_000).unwrap();
        assert!(g3 > g4, "{g3} vs {g4}");

        let c = SummabilitySeries::from_fn(2000, |_| 4.0).unwrap();
        for n in [0, 1, 17, 2000] {
            assert!(log_cesaro_gap(&c, n).unwrap() < 1e-13);
        }

        let x = SummabilitySeries::from_fn(10_000, |k| {
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            s * k as f64 / (k as f64 + 1.0)
        })
        .unwrap();
        assert!(log_cesaro_gap(&x, 10_000).unwrap() < 0.05);

        assert!(matches!(
            log_cesaro_gap(&c, 2001),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn resampling_constant_sequence_on_even_checkpoints() {
        let n = 2000;
        let a = SummabilitySeries::from_fn(n, |_| 1.0).unwrap();
        let checkpoints: Vec<usize> = (0..=n / 2).map(|i| 2 * i).collect();
        let r = resample_on_checkpoints(&a, |m| m as f64 + 1.0, &checkpoints, 0.01).unwrap();
        for m in 1..=n {
            assert!((r.direct[m] - r.resampled[m]).norm() <= 2.0 / m as f64);
        }
        assert!(r.sup_difference <= 2.0 / n as f64);
        assert!(r.hypotheses_hold);
    }

    #[test]
    fn resampling_zero_sequence_is_exact() {
        let a = SummabilitySeries::from_fn(100, |_| 0.0).unwrap();
        let r = resample_on_checkpoints(&a, |m| m as f64 + 1.0, &[3, 10, 50, 100], 0.5).unwrap();
        assert_eq!(r.sup_difference, 0.0);
    }

    #[test]
    fn resampling_rejects_unsorted_checkpoints() {
        let a = SummabilitySeries::from_fn(10, |_| 1.0).unwrap();
        for bad in [&[1usize, 1][..], &[5, 2], &[]] {
            assert!(matches!(
                resample_on_checkpoints(&a, |m| m as f64 + 1.0, bad, 0.1),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn omega_surrogate_examples() {
        let conv = SummabilitySeries::from_fn(100_000, |n| 1.0 / (n as f64 + 1.0) + 3.0).unwrap();
        let s = omega_surrogate(&conv, &[1000, 10_000, 100_000], DEFAULT_MEASURABLE_TOL).unwrap();
        assert!((s.value.re - 3.0).abs() < 1e-4);
        assert!(s.measurable);

        let alt = alternating(2000);
        let s = omega_surrogate(&alt, &[999, 1000, 1001, 1002], DEFAULT_MEASURABLE_TOL).unwrap();
        assert!((s.drift - 1.0).abs() < 1e-12);
        assert!(!s.measurable);

        assert!(matches!(
            omega_surrogate(&alt, &[], 0.1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(omega_surrogate(&alt, &[10, 5000], 0.1).is_err());
        assert!(omega_surrogate(&alt, &[10, 10], 0.1).is_err());
    }

    #[test]
    fn ladder_drift_uses_upper_half() {
        let v: Vec<Complex64> = [10.0, 0.0, 1.0, 1.5]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        assert_eq!(ladder_drift(&v), 0.5);
        assert_eq!(ladder_drift(&v[..1]), 0.0);
        assert_eq!(ladder_drift(&v[..2]), 10.0);
    }
}
