//! Szegő limits, Widom escape ratios and quantum-ergodicity diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use faer::Mat;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrals::{self, default_horizons, diagonal_prefix, EstimateReport};
use crate::models::SpectralModel;
use crate::numeric::{sum_real, CompensatedSum};
use crate::oracle::MatrixOracle;
use crate::seq::{ladder_drift, normalized_log_mean, SummabilitySeries};
use crate::trunc;

// ---------------------------------------------------------------- Widom

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidomPoint {
    pub lambda: f64,
    pub count: usize,
    /// `Tr(P A (1-P) B P)`.
    pub cross_term: Complex64,
    /// `|cross_term| / Tr(P)`.
    pub ratio: f64,
    /// `‖P A (1-P)‖_HS ‖(1-P) B P‖_HS / Tr(P)`, the Cauchy–Schwarz bound on `ratio`.
    pub hs_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidomReport {
    pub model: String,
    pub operators: [String; 2],
    pub points: Vec<WidomPoint>,
    /// Ratio change per doubling of `λ` between consecutive ladder points.
    pub doubling_factors: Vec<f64>,
    /// Every doubling factor lies in `[0.375, 0.625]`.
    pub halves_per_doubling: bool,
    /// `‖P[|D|, X]P‖` stays bounded for both operators on small cutoffs.
    pub bounded_commutators: bool,
}

/// Largest cutoff with at most this many modes used for the commutator check.
const COMMUTATOR_CHECK_MODES: usize = 256;

fn commutators_bounded(model: &SpectralModel, ops: [&MatrixOracle; 2]) -> Result<bool> {
    let top = model
        .distinct_eigenvalues(COMMUTATOR_CHECK_MODES as f64)?
        .into_iter()
        .rfind(|&r| model.counting(r) <= COMMUTATOR_CHECK_MODES)
        .unwrap_or(0.0);
    if top < 4.0 {
        return Ok(true);
    }
    for op in ops {
        if trunc::commutator_norm_ladder(model, op, &[top / 4.0, top / 2.0, top])?.growing {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `Tr(P_λ A (1-P_λ) B P_λ)/Tr(P_λ)` over a cutoff ladder; both operators must be banded.
pub fn widom_ratio(
    model: &SpectralModel,
    a: &MatrixOracle,
    b: &MatrixOracle,
    ladder: &[f64],
) -> Result<WidomReport> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] <= 0.0 {
        return Err(Error::invalid("cutoff ladder must be positive and strictly increasing"));
    }
    let mut points = Vec::with_capacity(ladder.len());
    for &l in ladder {
        let lambda = model.snap_cutoff(l)?;
        let count = model.counting(lambda);
        let cross = trunc::widom_cross_term(model, a, b, lambda)?;
        let ha = trunc::hs_norm_offdiag(model, a, lambda, 0.0)?.sqrt();
        let hb = trunc::hs_norm_offdiag(model, &b.adjoint(), lambda, 0.0)?.sqrt();
        points.push(WidomPoint {
            lambda,
            count,
            cross_term: cross,
            ratio: cross.norm() / count as f64,
            hs_bound: ha * hb / count as f64,
        });
    }
    let doubling_factors: Vec<f64> = points
        .windows(2)
        .map(|w| {
            let steps = (w[1].lambda / w[0].lambda).log2();
            (w[1].ratio / w[0].ratio).powf(1.0 / steps)
        })
        .collect();
    let halves_per_doubling =
        !doubling_factors.is_empty() && doubling_factors.iter().all(|f| (0.375..=0.625).contains(f));
    Ok(WidomReport {
        model: model.name().to_string(),
        operators: [a.description().to_string(), b.description().to_string()],
        points,
        doubling_factors,
        halves_per_doubling,
        bounded_commutators: commutators_bounded(model, [a, b])?,
    })
}

// ---------------------------------------------------------------- Szegő

/// Which estimator supplies a mean value `τ(·)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauSource {
    LogMean,
    Heat,
    Truncated,
    Fixed(Complex64),
}


/// Scalar function applied through the functional calculus.
#[derive(Clone)]
pub enum ScalarFunction {
    /// `Σ c_p x^p` with coefficients `c_0, c_1, …`.
    Polynomial(Vec<f64>),
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl ScalarFunction {
    pub fn monomial(p: u32) -> Self {
        let mut c = vec![0.0; p as usize + 1];
        c[p as usize] = 1.0;
        Self::Polynomial(c)
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Polynomial(c) => c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci),
            Self::Custom { f, .. } => f(x),
        }
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Polynomial(c) => {
                let terms: Vec<String> = c
                    .iter()
                    .enumerate()
                    .filter(|(_, &ci)| ci != 0.0)
                    .map(|(p, ci)| match p {
                        0 => format!("{ci}"),
                        1 => format!("{ci}*x"),
                        _ => format!("{ci}*x^{p}"),
                    })
                    .collect();
                if terms.is_empty() {
                    write!(f, "0")
                } else {
                    write!(f, "{}", terms.join(" + "))
                }
            }
            Self::Custom { name, .. } => write!(f, "{name}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SzegoReport {
    pub function: String,
    /// `Tr f(P_λ A P_λ)/Tr(P_λ)` over the cutoff ladder.
    pub lhs: EstimateReport,
    /// `τ(f(A))` estimated by the logarithmic mean of the diagonal.
    pub rhs: Complex64,
    /// Set when `f(A)` is not a polynomial in `A`, so the right-hand side is taken
    /// from `f(P A P)` at the largest cutoff.
    pub approximate_rhs: bool,
    /// `|lhs - rhs|` at the top of the ladder.
    pub gap: f64,
}

/// Compares `Tr f(P_λ A P_λ)/Tr(P_λ)` with `τ(f(A))` for hermitian `A` and `f(0) = 0`.
///
/// `τ(f(A))` is the log mean of the diagonal of `f(A)`; see [`szego_functional_with`].
pub fn szego_functional(
    model: &SpectralModel,
    a: &MatrixOracle,
    f: &ScalarFunction,
    ladder: &[f64],
) -> Result<SzegoReport> {
    szego_functional_with(model, a, f, ladder, TauSource::LogMean)
}

/// [`szego_functional`] with the estimator of `τ(f(A))` chosen by `rhs_source`.
///
/// The log mean converges like `1/log n` when the diagonal of `f(A)` has finitely
/// many defects (half-line Toeplitz operators); the truncated mean at the top of
/// `ladder` converges like `1/N`.
pub fn szego_functional_with(
    model: &SpectralModel,
    a: &MatrixOracle,
    f: &ScalarFunction,
    ladder: &[f64],
    rhs_source: TauSource,
) -> Result<SzegoReport> {
    if f.eval(0.0) != 0.0 {
        return Err(Error::invalid(format!("f(0) must vanish, got f(0) = {}", f.eval(0.0))));
    }
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("cutoff ladder must be strictly increasing"));
    }
    let mut cutoffs = Vec::new();
    let mut values = Vec::new();
    let mut top = None;
    for &l in ladder {
        let t = trunc::truncate(model, a, l)?;
        let v = trunc::trace_function(&t, &|x| f.eval(x))? / t.size() as f64;
        cutoffs.push(t.cutoff);
        values.push(Complex64::new(v, 0.0));
        top = Some(t);
    }
    let lhs = EstimateReport::new("szego", model, a.description(), cutoffs, values);
    let (rhs, approximate_rhs) = match f {
        ScalarFunction::Polynomial(c) => {
            let mut fa = MatrixOracle::zero();
            for (p, &cp) in c.iter().enumerate().skip(1) {
                if cp != 0.0 {
                    fa = fa.add(&a.pow(p as u32).scale(Complex64::new(cp, 0.0)));
                }
            }
            let top_cutoff = *lhs.ladder.last().unwrap();
            (estimate_tau(model, &fa, rhs_source, Some(top_cutoff))?, false)
        }
        ScalarFunction::Custom { f: g, .. } => {
            let t = top.expect("non-empty ladder");
            let fm = trunc::matrix_function(&t, &|x| g(x))?;
            let diag: Vec<Complex64> = (0..t.size()).map(|i| fm.matrix.get(i, i)).collect();
            let m = normalized_log_mean(&SummabilitySeries::new(diag)?);
            (*m.values().last().unwrap(), true)
        }
    };
    Ok(SzegoReport {
        function: f.to_string(),
        gap: (lhs.value - rhs).norm(),
        lhs,
        rhs,
        approximate_rhs,
    })
}

/// `τ(A)` from the chosen estimator; `cutoff` overrides the truncated-mean ladder.
pub fn estimate_tau(
    model: &SpectralModel,
    a: &MatrixOracle,
    source: TauSource,
    cutoff: Option<f64>,
) -> Result<Complex64> {
    Ok(match source {
        TauSource::Fixed(t) => t,
        TauSource::LogMean => integrals::log_mean_diagonal(model, a, &default_horizons(model))?.value,
        TauSource::Heat => {
            integrals::heat_integral(model, a, &integrals::default_heat_ladder(model))?.value
        }
        TauSource::Truncated => {
            let ladder = match cutoff {
                Some(c) => vec![c],
                None => integrals::default_lambda_ladder(model),
            };
            integrals::truncated_integral(model, a, &ladder)?.value
        }
    })
}

// ---------------------------------------------------------------- QE

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QeVerdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl fmt::Display for QeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Consistent => "QE-consistent",
            Self::Violated => "QE-violated",
            Self::Inconclusive => "inconclusive",
        })
    }
}

/// Variances at or below this are treated as zero.
pub const QE_ZERO_VARIANCE: f64 = 1e-20;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QeStatistics {
    pub model: String,
    pub operator: String,
    pub tau: Complex64,
    pub ladder: Vec<f64>,
    pub counts: Vec<usize>,
    /// `(1/N(λ)) Σ_{λ_k≤λ} |<e_k, A e_k> - τ|²`.
    pub variance: Vec<f64>,
    /// `V(λ_max) / V(λ_ref)` with `λ_ref` the first cutoff at least `λ_max/16`.
    pub decay_factor: f64,
    pub verdict: QeVerdict,
}

/// Diagonal variance around `τ` over a cutoff ladder.
///
/// QE-consistent when `V` falls at least fourfold over (at most) a 16× range of
/// `λ` or vanishes; QE-violated when the upper half of the ladder stays within
/// 20% of its mean at a nonzero level; inconclusive otherwise.
pub fn qe_statistics(
    model: &SpectralModel,
    a: &MatrixOracle,
    ladder: &[f64],
    tau_source: TauSource,
) -> Result<QeStatistics> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) || ladder[0] <= 0.0 {
        return Err(Error::invalid("cutoff ladder must be positive and strictly increasing"));
    }
    let tau = estimate_tau(model, a, tau_source, None)?;
    let top = model.snap_cutoff(*ladder.last().unwrap())?;
    let modes = model.modes_up_to(top)?;
    let dev: Vec<f64> = modes
        .par_iter()
        .map(|m| (a.diagonal(&m.label) - tau).norm_sqr())
        .collect();
    let mut acc = CompensatedSum::new();
    let mut prefix = Vec::with_capacity(dev.len() + 1);
    prefix.push(0.0);
    for &x in &dev {
        acc.add(x);
        prefix.push(acc.value());
    }
    let mut cutoffs = Vec::new();
    let mut counts = Vec::new();
    let mut variance = Vec::new();
    for &l in ladder {
        let c = model.snap_cutoff(l)?;
        let n = model.counting(c);
        if n == 0 {
            return Err(Error::invalid(format!("no modes below cutoff {l}")));
        }
        cutoffs.push(c);
        counts.push(n);
        variance.push(prefix[n] / n as f64);
    }
    let lmax = *cutoffs.last().unwrap();
    let r = cutoffs.iter().position(|&c| c >= lmax / 16.0).unwrap();
    let (v_ref, v_top) = (variance[r], *variance.last().unwrap());
    let decay_factor = if v_ref > 0.0 { v_top / v_ref } else { 0.0 };
    let upper = &variance[variance.len() - variance.len().div_ceil(2).max(1)..];
    let mean = upper.iter().sum::<f64>() / upper.len() as f64;
    let flat = upper.len() >= 2 && upper.iter().all(|v| (v - mean).abs() <= 0.2 * mean);
    let verdict = if v_top <= QE_ZERO_VARIANCE || (r + 1 < variance.len() && decay_factor <= 0.25) {
        QeVerdict::Consistent
    } else if flat {
        QeVerdict::Violated
    } else {
        QeVerdict::Inconclusive
    };
    Ok(QeStatistics {
        model: model.name().to_string(),
        operator: a.description().to_string(),
        tau,
        ladder: cutoffs,
        counts,
        variance,
        decay_factor,
        verdict,
    })
}

// ---------------------------------------------------------------- density one

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityExtraction {
    /// Indices of the extracted subsequence `J`, increasing.
    pub members: Vec<usize>,
    /// `N_1, N_2, …`: from `N_m` on, the indices within `ε_m` have running density
    /// at least `1 - 2^{-m}`.
    pub breakpoints: Vec<usize>,
    /// Number of established levels.
    pub levels: usize,
    /// `sup_{j ∈ J, j ≥ N_m} |x_j - c|` for each level.
    pub tail_sup: Vec<f64>,
    /// `#(J ∩ [0, n]) / (n + 1)` at the horizon.
    pub density: f64,
    /// Set when at least two levels were established.
    pub density_one: bool,
    pub verdict: String,
}

/// Greedy extraction of a density-one subsequence along which `x → c`.
///
/// `schedule` holds the tolerances `ε_1 ≥ ε_2 ≥ … > 0`. Level `m` starts at the
/// first horizon after which the indices within `ε_m` of `c` keep running density
/// `1 - 2^{-m}`; on `[N_m, N_{m+1})` the set `J` keeps the indices within `ε_m`.
/// Level 1 applies from index 0.
pub fn extract_density_one(x: &[Complex64], c: Complex64, schedule: &[f64]) -> Result<DensityExtraction> {
    if x.is_empty() {
        return Err(Error::invalid("sequence prefix is empty"));
    }
    if schedule.is_empty() || schedule.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("tolerance schedule must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::invalid("tolerance schedule must be non-increasing"));
    }
    let dist: Vec<f64> = x.iter().map(|z| (z - c).norm()).collect();
    let n = dist.len();
    let mut breakpoints = Vec::new();
    let mut start = 0usize;
    for (m, &eps) in schedule.iter().enumerate() {
        let target = 1.0 - 0.5f64.powi(m as i32 + 1);
        // Running density of {|x_k - c| < ε}, and its suffix minimum.
        let mut hits = 0usize;
        let dens: Vec<f64> = dist
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                hits += usize::from(d < eps);
                hits as f64 / (k + 1) as f64
            })
            .collect();
        let mut suffix_ok = vec![false; n + 1];
        suffix_ok[n] = true;
        for k in (0..n).rev() {
            suffix_ok[k] = suffix_ok[k + 1] && dens[k] >= target;
        }
        match (start..n).find(|&h| suffix_ok[h]) {
            Some(h) => {
                breakpoints.push(h);
                start = h;
            }
            None => break,
        }
    }
    let levels = breakpoints.len();
    // Level m covers [N_m, N_{m+1}); level 1 starts at 0.
    let mut bounds: Vec<usize> = breakpoints.clone();
    if bounds.is_empty() {
        bounds.push(0);
    }
    bounds[0] = 0;
    bounds.push(n);
    let mut members = Vec::new();
    for lvl in 0..bounds.len() - 1 {
        let eps = schedule[lvl];
        members.extend((bounds[lvl]..bounds[lvl + 1]).filter(|&k| dist[k] < eps));
    }
    let tail_sup = breakpoints
        .iter()
        .map(|&h| {
            members
                .iter()
                .filter(|&&j| j >= h)
                .map(|&j| dist[j])
                .fold(0.0, f64::max)
        })
        .collect();
    let density = members.len() as f64 / n as f64;
    let density_one = levels >= 2;
    let verdict = if density_one {
        format!("density-one convergence ({levels} levels, density {density:.4})")
    } else {
        format!("no density-one convergence (best density {density:.4})")
    };
    Ok(DensityExtraction {
        members,
        breakpoints,
        levels,
        tail_sup,
        density,
        density_one,
        verdict,
    })
}

// ---------------------------------------------------------------- time averages

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeAverageReport {
    pub model: String,
    pub operator: String,
    pub t_ladder: Vec<f64>,
    /// `L(T)`: log mean of the diagonal of `A_T* A_T`.
    pub levels: Vec<f64>,
    /// `Ĉ L(T)`, estimating `Tr_ω(A_T* A_T <D>^{-d})`.
    pub lhs: Vec<f64>,
    /// `Ĉ |τ(A)|²`.
    pub rhs: f64,
    pub tau: Complex64,
    /// Weyl constant `Ĉ`.
    pub c_hat: f64,
    pub horizon: usize,
    /// Spread of `L` over the upper half of the `T` ladder.
    pub drift: f64,
    pub tolerance: f64,
    /// `|L(T_max) - |τ|²| < tolerance`.
    pub consistent: bool,
    pub verdict: String,
}

/// Default tolerance of [`time_average_criterion`].
pub const TIME_AVERAGE_TOL: f64 = 1e-2;

/// Tests `Tr_ω(A_T* A_T <D>^{-d}) → |τ(A)|² Tr_ω(<D>^{-d})` as `T → ∞`.
///
/// `A_T` is the time average of `e^{it|D|} A e^{-it|D|}`; the diagonal of
/// `A_T* A_T` is summed exactly over every mode coupled to `e_k`. `Ĉ` comes from a
/// Weyl fit on `[λ/4, λ/2, λ]` and `τ` from the log mean at `horizon`.
pub fn time_average_criterion(
    model: &SpectralModel,
    a: &MatrixOracle,
    t_ladder: &[f64],
    lambda: f64,
    horizon: usize,
) -> Result<TimeAverageReport> {
    if t_ladder.is_empty()
        || t_ladder.iter().any(|t| !(*t > 0.0 && t.is_finite()))
        || t_ladder.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::invalid("averaging times must be positive and strictly increasing"));
    }
    let fit = integrals::weyl_fit(model, &[lambda / 4.0, lambda / 2.0, lambda])?;
    let (modes, diag) = diagonal_prefix(model, a, horizon)?;
    let tau = *normalized_log_mean(&SummabilitySeries::new(diag)?)
        .values()
        .last()
        .unwrap();
    let columns: Vec<Vec<(f64, f64)>> = modes
        .par_iter()
        .map(|m| {
            a.column(&m.label)
                .iter()
                .map(|(j, z)| Ok((model.eigenvalue(j)? - m.lambda, z.norm_sqr())))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut levels = Vec::with_capacity(t_ladder.len());
    for &t in t_ladder {
        let d: Vec<f64> = columns
            .par_iter()
            .map(|col| sum_real(col.iter().map(|&(delta, w)| w * trunc::time_kernel(t, delta).norm_sqr())))
            .collect();
        let m = normalized_log_mean(&SummabilitySeries::from_real(d)?);
        levels.push(m.values().last().unwrap().re);
    }
    let c_hat = fit.constant;
    let drift = ladder_drift(&levels.iter().map(|&l| Complex64::new(l, 0.0)).collect::<Vec<_>>());
    let last = *levels.last().unwrap();
    let consistent = (last - tau.norm_sqr()).abs() < TIME_AVERAGE_TOL;
    let verdict = if consistent {
        "time-average criterion satisfied".to_string()
    } else {
        format!(
            "time-average criterion violated: level {last:.4} vs |τ|² = {:.4}",
            tau.norm_sqr()
        )
    };
    Ok(TimeAverageReport {
        model: model.name().to_string(),
        operator: a.description().to_string(),
        t_ladder: t_ladder.to_vec(),
        lhs: levels.iter().map(|l| c_hat * l).collect(),
        levels,
        rhs: c_hat * tau.norm_sqr(),
        tau,
        c_hat,
        horizon,
        drift,
        tolerance: TIME_AVERAGE_TOL,
        consistent,
        verdict,
    })
}

// ---------------------------------------------------------------- basis rotation

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotationExperiment {
    pub model: String,
    pub operator: String,
    pub lambda: f64,
    pub tau: Complex64,
    /// Diagonal variance in the standard eigenbasis.
    pub standard_variance: f64,
    /// Diagonal variance after a random unitary inside each eigenspace, per seed.
    pub rotated_variance: Vec<f64>,
    /// Eigenspace sizes, keyed by multiplicity.
    pub multiplicities: BTreeMap<usize, usize>,
}

/// Haar-distributed unitary of size `n` (Gram–Schmidt on a complex Gaussian matrix).
fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> Mat<Complex64> {
    let mut g = Mat::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    });
    for j in 0..n {
        for p in 0..j {
            let dot: Complex64 = (0..n).map(|i| g[(i, p)].conj() * g[(i, j)]).sum();
            for i in 0..n {
                let v = g[(i, p)];
                g[(i, j)] -= dot * v;
            }
        }
        let norm = (0..n).map(|i| g[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            g[(i, j)] /= norm;
        }
    }
    g
}

/// Does the QE variance depend on the choice of eigenbasis?
///
/// Rotates each eigenspace of the truncation at `λ` by an independent random
/// unitary and recomputes the diagonal variance around the truncated mean.
pub fn basis_rotation_experiment(
    model: &SpectralModel,
    a: &MatrixOracle,
    lambda: f64,
    seeds: &[u64],
) -> Result<RotationExperiment> {
    let t = trunc::truncate(model, a, lambda)?;
    let tau = trunc::trace_mean(&t)?;
    let n = t.size();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut s = 0;
    for i in 1..=n {
        if i == n || t.modes[i].lambda != t.modes[s].lambda {
            groups.push((s, i));
            s = i;
        }
    }
    let mut multiplicities = BTreeMap::new();
    for &(lo, hi) in &groups {
        *multiplicities.entry(hi - lo).or_insert(0) += 1;
    }
    let variance = |diag: &[Complex64]| sum_real(diag.iter().map(|z| (z - tau).norm_sqr())) / n as f64;
    let standard: Vec<Complex64> = (0..n).map(|i| t.get(i, i)).collect();
    let rotated_variance = seeds
        .iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut diag = Vec::with_capacity(n);
            for &(lo, hi) in &groups {
                let g = hi - lo;
                let u = random_unitary(g, &mut rng);
                let block = Mat::from_fn(g, g, |i, j| t.get(lo + i, lo + j));
                let r = u.adjoint() * &block * &u;
                diag.extend((0..g).map(|i| r[(i, i)]));
            }
            variance(&diag)
        })
        .collect();
    Ok(RotationExperiment {
        model: model.name().to_string(),
        operator: a.description().to_string(),
        lambda: t.cutoff,
        tau,
        standard_variance: variance(&standard),
        rotated_variance,
        multiplicities,
    })
}
