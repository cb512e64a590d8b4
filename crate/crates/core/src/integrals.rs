//! Estimators of the noncommutative integral `Tr_ω(A<D>^{-d}) / Tr_ω(<D>^{-d})`
//! and of the Dixmier trace itself, plus Weyl-law fitting.
//!
//! Every estimator evaluates a sequence on a ladder (cutoffs, horizons or heat
//! parameters) and reports the top-of-ladder value together with its drift.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Mode, SpectralModel};
use crate::numeric::{gamma, japanese_bracket, ComplexSum};
use crate::oracle::MatrixOracle;
use crate::seq::{ladder_drift, normalized_log_mean, SummabilitySeries, DEFAULT_MEASURABLE_TOL};
use crate::trunc;

/// Result of an estimator run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: String,
    pub model: String,
    pub operator: String,
    /// Estimate at the top of the ladder.
    pub value: Complex64,
    /// Cutoffs, horizons or heat parameters, in evaluation order.
    pub ladder: Vec<f64>,
    /// Sequence value at each ladder point.
    pub values: Vec<Complex64>,
    pub drift: f64,
    pub tolerance: f64,
    /// `drift < tolerance`.
    pub measurable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub secondary: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub(crate) fn new(
        estimator: &str,
        model: &SpectralModel,
        operator: &str,
        ladder: Vec<f64>,
        values: Vec<Complex64>,
    ) -> Self {
        let drift = ladder_drift(&values);
        Self {
            estimator: estimator.to_string(),
            model: model.name().to_string(),
            operator: operator.to_string(),
            value: *values.last().expect("non-empty ladder"),
            ladder,
            values,
            drift,
            tolerance: DEFAULT_MEASURABLE_TOL,
            measurable: drift < DEFAULT_MEASURABLE_TOL,
            verdict: None,
            secondary: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Re-evaluates the measurable flag against another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.measurable = self.drift < tolerance;
        self
    }
}

/// Default cutoffs `2^5, …, 2^11`, keeping those within the enumeration cap.
pub fn default_lambda_ladder(model: &SpectralModel) -> Vec<f64> {
    let cap = model.limits().enumerated_modes;
    (5..=11)
        .map(|p| f64::from(1u32 << p))
        .filter(|&l| model.counting(l) <= cap)
        .collect()
}

/// Default heat parameters `10^{-1}, …, 10^{-4}` whose tail cutoff fits the cap.
pub fn default_heat_ladder(model: &SpectralModel) -> Vec<f64> {
    let cap = model.limits().enumerated_modes;
    [1e-1, 1e-2, 1e-3, 1e-4]
        .into_iter()
        .filter(|&t| model.counting((36.85f64 / t).sqrt()) <= cap)
        .collect()
}

/// Default log-mean horizons `10^3, 10^4, 10^5`.
pub fn default_horizons(model: &SpectralModel) -> Vec<usize> {
    let cap = model.limits().enumerated_modes;
    [1_000, 10_000, 100_000].into_iter().filter(|&n| n < cap).collect()
}

fn check_increasing(ladder: &[f64], what: &str) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::invalid(format!("{what} ladder is empty")));
    }
    if ladder.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::invalid(format!("{what} ladder must be finite and non-negative")));
    }
    if ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("{what} ladder must be strictly increasing")));
    }
    Ok(())
}

fn check_horizons(horizons: &[usize]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::invalid("horizon ladder is empty"));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("horizon ladder must be strictly increasing"));
    }
    Ok(())
}

/// The first `horizon + 1` modes and the diagonal `<e_k, A e_k>` on them.
pub fn diagonal_prefix(
    model: &SpectralModel,
    a: &MatrixOracle,
    horizon: usize,
) -> Result<(Vec<Mode>, Vec<Complex64>)> {
    let modes = model.first_modes(horizon + 1)?;
    let diag = modes.par_iter().map(|m| a.diagonal(&m.label)).collect();
    Ok((modes, diag))
}

/// Diagonal on all modes with `λ_k ≤ λ`, in flattened order.
fn diagonal_up_to(
    model: &SpectralModel,
    a: &MatrixOracle,
    lambda: f64,
) -> Result<(Vec<Mode>, Vec<Complex64>)> {
    let modes = model.modes_up_to(lambda)?;
    let diag = modes.par_iter().map(|m| a.diagonal(&m.label)).collect();
    Ok((modes, diag))
}

/// `(prefix sums S_0 = 0, S_1, …)` of a diagonal.
fn prefix_sums(diag: &[Complex64]) -> Vec<Complex64> {
    let mut acc = ComplexSum::new();
    let mut out = Vec::with_capacity(diag.len() + 1);
    out.push(Complex64::new(0.0, 0.0));
    for &z in diag {
        acc.add(z);
        out.push(acc.value());
    }
    out
}

/// Least-squares Weyl-law fit `N(λ) ≈ Ĉ λ^{d̂}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeylFit {
    pub model: String,
    /// Fitted exponent `d̂`.
    pub dimension: f64,
    /// `Ĉ = N(λ_max)/λ_max^d` with the model dimension `d`; this estimates `Tr_ω(<D>^{-d})`.
    pub constant: f64,
    /// Prefactor of the least-squares line, `exp(intercept)`.
    pub fitted_prefactor: f64,
    /// Max relative deviation of `N` from the fitted power law over the window.
    pub residual: f64,
    pub cutoffs: Vec<f64>,
    pub counts: Vec<usize>,
}

impl WeylFit {
    /// Implied `Tr_ω(<D>^{-d})`.
    pub fn implied_trace(&self) -> f64 {
        self.constant
    }
}

pub fn weyl_fit(model: &SpectralModel, ladder: &[f64]) -> Result<WeylFit> {
    check_increasing(ladder, "cutoff")?;
    if ladder.len() < 3 || ladder[0] <= 0.0 || ladder[ladder.len() - 1] < 4.0 * ladder[0] {
        return Err(Error::invalid(
            "Weyl fit needs at least 3 positive cutoffs spanning a factor of 4",
        ));
    }
    let counts: Vec<usize> = ladder.iter().map(|&l| model.counting(l)).collect();
    let xs: Vec<f64> = ladder.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&n| (n as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope > 0.0) {
        return Err(Error::invalid("counting function does not grow over the ladder"));
    }
    let prefactor = intercept.exp();
    let residual = ladder
        .iter()
        .zip(&counts)
        .map(|(l, &c)| (c as f64 / (prefactor * l.powf(slope)) - 1.0).abs())
        .fold(0.0, f64::max);
    let top = *ladder.last().unwrap();
    Ok(WeylFit {
        model: model.name().to_string(),
        dimension: slope,
        constant: *counts.last().unwrap() as f64 / top.powf(model.dimension()),
        fitted_prefactor: prefactor,
        residual,
        cutoffs: ladder.to_vec(),
        counts,
    })
}

/// `Tr(P_λ A P_λ)/Tr(P_λ)` over a cutoff ladder, from exact diagonal sums.
pub fn truncated_integral(
    model: &SpectralModel,
    a: &MatrixOracle,
    ladder: &[f64],
) -> Result<EstimateReport> {
    check_increasing(ladder, "cutoff")?;
    let top = model.snap_cutoff(*ladder.last().unwrap())?;
    let (_, diag) = diagonal_up_to(model, a, top)?;
    let sums = prefix_sums(&diag);
    let mut cutoffs = Vec::with_capacity(ladder.len());
    let mut values = Vec::with_capacity(ladder.len());
    for &l in ladder {
        let c = model.snap_cutoff(l)?;
        let n = model.counting(c);
        cutoffs.push(c);
        values.push(sums[n] / n as f64);
    }
    let mut r = EstimateReport::new("truncated_integral", model, a.description(), cutoffs, values);
    r.secondary.insert("modes".into(), diag.len() as f64);
    Ok(r)
}

/// `ω(M(<e_k, A e_k>))` with the self-normalized logarithmic mean.
pub fn log_mean_diagonal(
    model: &SpectralModel,
    a: &MatrixOracle,
    horizons: &[usize],
) -> Result<EstimateReport> {
    check_horizons(horizons)?;
    let top = *horizons.last().unwrap();
    let (_, diag) = diagonal_prefix(model, a, top)?;
    let m = normalized_log_mean(&SummabilitySeries::new(diag)?);
    let values = horizons.iter().map(|&n| m.values()[n]).collect();
    let mut r = EstimateReport::new(
        "log_mean_diagonal",
        model,
        a.description(),
        horizons.iter().map(|&n| n as f64).collect(),
        values,
    );
    r.notes.push("logarithmic mean normalized by H_{n+1}".into());
    Ok(r)
}

/// `(1/log(n+2)) Σ_{k≤n} <λ_k>^{-d} <e_k, A e_k>`, an unnormalized Dixmier-trace estimate.
pub fn dixmier_diagonal(
    model: &SpectralModel,
    a: &MatrixOracle,
    d_override: Option<f64>,
    horizons: &[usize],
) -> Result<EstimateReport> {
    check_horizons(horizons)?;
    let d = d_override.unwrap_or_else(|| model.dimension());
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::invalid(format!("dimension must be positive, got {d}")));
    }
    let top = *horizons.last().unwrap();
    let (modes, diag) = diagonal_prefix(model, a, top)?;
    let mut acc = ComplexSum::new();
    let mut partial = Vec::with_capacity(diag.len());
    for (m, z) in modes.iter().zip(&diag) {
        acc.add(z * japanese_bracket(m.lambda).powf(-d));
        partial.push(acc.value());
    }
    let values = horizons
        .iter()
        .map(|&n| partial[n] / (n as f64 + 2.0).ln())
        .collect();
    let mut r = EstimateReport::new(
        "dixmier_diagonal",
        model,
        a.description(),
        horizons.iter().map(|&n| n as f64).collect(),
        values,
    );
    r.secondary.insert("d".into(), d);
    Ok(r)
}

/// Weighted Dixmier formula for `Tr_ω(Q<D>^{-d})`-type quantities.
///
/// For `s = -d` the value is `Tr(P_λ Q P_λ)/log Tr(P_λ)`; for `s > -d` it is
/// `(s/d + 1) Tr(P_λ Q P_λ)/Tr(P_λ)^{s/d+1}`. The reported value is the top of the
/// cutoff ladder; the logarithmic mean of the same sequence along the flattened
/// index is given as `omega_log_mean`.
pub fn weighted_dixmier(
    model: &SpectralModel,
    q: &MatrixOracle,
    s: f64,
    ladder: &[f64],
) -> Result<EstimateReport> {
    check_increasing(ladder, "cutoff")?;
    let d = model.dimension();
    if !(s >= -d) {
        return Err(Error::invalid(format!("weight s = {s} is below -d = {}", -d)));
    }
    let top = model.snap_cutoff(*ladder.last().unwrap())?;
    let (modes, diag) = diagonal_up_to(model, q, top)?;
    let sums = prefix_sums(&diag);
    let critical = (s + d).abs() < 1e-12;
    let p = s / d + 1.0;
    let at = |n: usize| -> Complex64 {
        // Sequence value after n modes (n ≥ 1).
        if critical {
            sums[n] / (n as f64).ln()
        } else {
            sums[n] * p / (n as f64).powf(p)
        }
    };
    let mut cutoffs = Vec::new();
    let mut values = Vec::new();
    for &l in ladder {
        let c = model.snap_cutoff(l)?;
        let n = model.counting(c);
        if critical && n < 2 {
            return Err(Error::invalid("cutoff too small: log Tr(P_λ) vanishes"));
        }
        cutoffs.push(c);
        values.push(at(n));
    }
    let mut r = EstimateReport::new("weighted_dixmier", model, q.description(), cutoffs, values);
    r.secondary.insert("s".into(), s);
    // Boundedness heuristic for Q<D>^{-s}: sup of the weighted diagonal.
    let sup = modes
        .iter()
        .zip(&diag)
        .map(|(m, z)| z.norm() * japanese_bracket(m.lambda).powf(-s))
        .fold(0.0, f64::max);
    r.secondary.insert("weighted_diagonal_sup".into(), sup);
    r.notes
        .push("boundedness of Q<D>^{-s} checked heuristically on the computed diagonal".into());
    // log Tr(P) vanishes at n = 1 in the critical case.
    let start = if critical { 2 } else { 1 };
    if diag.len() >= start {
        let seq: Vec<Complex64> = (start..=diag.len()).map(at).collect();
        let m = normalized_log_mean(&SummabilitySeries::new(seq)?);
        r.secondary
            .insert("omega_log_mean".into(), m.values().last().unwrap().re);
    }
    Ok(r)
}

fn check_heat_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::invalid("heat ladder is empty"));
    }
    if ladder.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::invalid("heat parameters must be positive"));
    }
    if ladder.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::invalid("heat ladder must be strictly decreasing"));
    }
    Ok(())
}

/// Heat-trace estimate: `C(a)/C(1)` where `Tr(a e^{-tD²}) ~ C(a) t^{-d/2}`.
///
/// Secondary values: `c_one` (`C(1)` at the smallest `t`) and `trace_omega`
/// (`C(1)/Γ(d/2 + 1)`, the implied `Tr_ω(<D>^{-d})`).
pub fn heat_integral(model: &SpectralModel, a: &MatrixOracle, ladder: &[f64]) -> Result<EstimateReport> {
    check_heat_ladder(ladder)?;
    let d = model.dimension();
    let mut values = Vec::new();
    let mut c_one = 0.0;
    for &t in ladder {
        let ha = trunc::heat_trace(model, a, t, true)?;
        let h1 = trunc::heat_trace_identity(model, t, true)?;
        values.push(ha / h1);
        c_one = h1 * t.powf(d / 2.0);
    }
    let mut r = EstimateReport::new("heat_integral", model, a.description(), ladder.to_vec(), values);
    r.secondary.insert("c_one".into(), c_one);
    r.secondary
        .insert("trace_omega".into(), c_one / gamma(d / 2.0 + 1.0));
    Ok(r)
}

/// Fröhlich functional `Tr(A e^{-t|D|})/Tr(e^{-t|D|})` as `t ↓ β`.
///
/// Also reports `truncated_integral`, the top-of-ladder truncated mean, for
/// comparison with the limit of the functional.
pub fn frohlich(
    model: &SpectralModel,
    a: &MatrixOracle,
    beta: f64,
    ladder: &[f64],
) -> Result<EstimateReport> {
    check_heat_ladder(ladder)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("β must be non-negative, got {beta}")));
    }
    if ladder.iter().any(|&t| t <= beta) {
        return Err(Error::invalid("every ladder point must exceed β"));
    }
    let mut values = Vec::new();
    let mut partition = Vec::new();
    for &t in ladder {
        let z = trunc::heat_trace_identity(model, t, false)?;
        if !z.is_finite() {
            return Err(Error::invalid(format!("Tr(e^(-t|D|)) is not finite at t = {t}")));
        }
        values.push(trunc::heat_trace(model, a, t, false)? / z);
        partition.push(z);
    }
    let mut r = EstimateReport::new("frohlich", model, a.description(), ladder.to_vec(), values);
    r.secondary.insert("beta".into(), beta);
    r.secondary
        .insert("partition_function".into(), *partition.last().unwrap());
    if partition.windows(2).any(|w| w[1] <= w[0]) {
        r.notes
            .push("partition function does not grow along the ladder; β may be wrong".into());
    }
    let lambdas = default_lambda_ladder(model);
    if !lambdas.is_empty() {
        let ti = truncated_integral(model, a, &lambdas)?;
        r.secondary.insert("truncated_integral".into(), ti.value.re);
        r.secondary
            .insert("truncated_integral_im".into(), ti.value.im);
    }
    Ok(r)
}
