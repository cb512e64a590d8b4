//! Dense truncations `P_λ A P_λ`, Hermitian functional calculus, heat-weighted
//! diagonal sums, Hilbert–Schmidt escape norms and closed-form time averages.

use std::io::{Read, Write};

use faer::{Mat, Side};
use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{index_of, Mode, SpectralModel};
use crate::numeric::{sum_complex, sum_real, CompensatedSum, ComplexSum};
use crate::oracle::MatrixOracle;

/// Relative hermiticity tolerance (against the max-row-sum norm) before symmetrization.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// `-ln(1e-16)`: heat weights beyond the tail cutoff are below `1e-16`.
const HEAT_TAIL: f64 = 36.841_361_487_904_734;

/// A dense compression `P_λ A P_λ` in flattened mode order.
#[derive(Debug, Clone)]
pub struct TruncatedMatrix {
    /// Snapped cutoff: the largest eigenvalue of `|D|` not exceeding the request.
    pub cutoff: f64,
    pub modes: Vec<Mode>,
    pub matrix: Mat<Complex64>,
    /// Expression the matrix was built from.
    pub source: String,
    /// Whether the source oracle is declared hermitian.
    pub hermitian_source: bool,
}

impl TruncatedMatrix {
    pub fn size(&self) -> usize {
        self.modes.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        sum_complex((0..self.size()).map(|i| self.matrix[(i, i)]))
    }

    /// Max row sum of moduli.
    pub fn norm_inf(&self) -> f64 {
        (0..self.size())
            .map(|i| sum_real((0..self.size()).map(|j| self.matrix[(i, j)].norm())))
            .fold(0.0, f64::max)
    }

    /// Hilbert–Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for j in 0..self.size() {
            for i in 0..self.size() {
                s.add(self.matrix[(i, j)].norm_sqr());
            }
        }
        s.value().sqrt()
    }

    /// `max |T - T*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Product of two truncations at the same cutoff.
    pub fn matmul(&self, other: &TruncatedMatrix) -> Result<TruncatedMatrix> {
        if self.size() != other.size() {
            return Err(Error::invalid("truncations of different sizes"));
        }
        Ok(TruncatedMatrix {
            cutoff: self.cutoff,
            modes: self.modes.clone(),
            matrix: &self.matrix * &other.matrix,
            source: format!("({}) * ({})", self.source, other.source),
            hermitian_source: false,
        })
    }

    /// Eigenvalues (ascending) of the hermitian part after the tolerance check.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = self.hermitian_matrix()?;
        h.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Numerical(format!("eigenvalues: {e:?}")))
    }

    /// `(T + T*)/2`, erroring if `T` is not hermitian within tolerance.
    fn hermitian_matrix(&self) -> Result<Mat<Complex64>> {
        let defect = self.hermitian_defect();
        let scale = self.norm_inf();
        if defect > HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE) && defect > 0.0 {
            return Err(Error::invalid(format!(
                "matrix is not hermitian: defect {defect:.3e} vs norm {scale:.3e}"
            )));
        }
        if defect > 0.0 {
            debug!("symmetrizing truncation of `{}` (defect {defect:.3e})", self.source);
        }
        let n = self.size();
        Ok(Mat::from_fn(n, n, |i, j| {
            0.5 * (self.matrix[(i, j)] + self.matrix[(j, i)].conj())
        }))
    }

    /// Writes the debugging dump: magic, header length, JSON header, then
    /// column-major little-endian `(re, im)` pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let header = DumpHeader {
            size: self.size(),
            cutoff: self.cutoff,
            source: self.source.clone(),
        };
        let json = serde_json::to_vec(&header)?;
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&(json.len() as u64).to_le_bytes())?;
        w.write_all(&json)?;
        for j in 0..self.size() {
            for i in 0..self.size() {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

const DUMP_MAGIC: &[u8; 8] = b"NCTRUNC1";

/// Header of a matrix dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub size: usize,
    pub cutoff: f64,
    pub source: String,
}

/// Reads a dump written by [`TruncatedMatrix::write_dump`].
pub fn read_dump<R: Read>(mut r: R) -> Result<(DumpHeader, Mat<Complex64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::invalid("not a matrix dump"));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u64::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: DumpHeader = serde_json::from_slice(&json)?;
    let n = header.size;
    let mut data = vec![0u8; n * n * 16];
    r.read_exact(&mut data)?;
    let at = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
    let m = Mat::from_fn(n, n, |i, j| {
        let k = 2 * (j * n + i);
        Complex64::new(at(k), at(k + 1))
    });
    Ok((header, m))
}

fn check_dense(model: &SpectralModel, n: usize) -> Result<()> {
    let cap = model.limits().dense_modes;
    if n > cap {
        Err(Error::ResourceLimit {
            what: "dense truncation",
            requested: n,
            cap,
        })
    } else {
        Ok(())
    }
}

/// Modes of `P_λ` after snapping `λ` to the spectrum.
pub fn truncation_modes(model: &SpectralModel, lambda: f64) -> Result<(f64, Vec<Mode>)> {
    let cutoff = model.snap_cutoff(lambda)?;
    Ok((cutoff, model.modes_up_to(cutoff)?))
}

/// `P_λ A P_λ` as a dense matrix. Columns are built in parallel.
pub fn truncate(model: &SpectralModel, a: &MatrixOracle, lambda: f64) -> Result<TruncatedMatrix> {
    let cutoff = model.snap_cutoff(lambda)?;
    check_dense(model, model.counting(cutoff))?;
    let modes = model.modes_up_to(cutoff)?;
    let index = index_of(&modes);
    let n = modes.len();
    let columns: Vec<Vec<(usize, Complex64)>> = modes
        .par_iter()
        .map(|m| {
            a.column(&m.label)
                .into_iter()
                .filter_map(|(l, z)| index.get(&l).map(|&i| (i, z)))
                .collect()
        })
        .collect();
    let mut matrix = Mat::<Complex64>::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, z) in col {
            matrix[(i, j)] = z;
        }
    }
    Ok(TruncatedMatrix {
        cutoff,
        modes,
        matrix,
        source: a.description().to_string(),
        hermitian_source: a.is_hermitian(),
    })
}

/// `Tr(T) / N`.
pub fn trace_mean(t: &TruncatedMatrix) -> Result<Complex64> {
    if t.size() == 0 {
        return Err(Error::invalid("empty truncation"));
    }
    Ok(t.trace() / t.size() as f64)
}

/// `f(T)` for hermitian `T`.
#[derive(Debug, Clone)]
pub struct MatrixFunction {
    pub matrix: TruncatedMatrix,
    /// Eigenvalues of `T`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Whether `f(0) = 0`, the normalization required by Szegő-type limits.
    pub vanishes_at_zero: bool,
}

/// `U f(Λ) U*` from the eigendecomposition of the hermitian matrix `T`.
pub fn matrix_function(t: &TruncatedMatrix, f: &dyn Fn(f64) -> f64) -> Result<MatrixFunction> {
    let h = t.hermitian_matrix()?;
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition: {e:?}")))?;
    let n = t.size();
    let eigenvalues: Vec<f64> = (0..n).map(|i| eig.S()[i].re).collect();
    let u = eig.U();
    let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * f(eigenvalues[j]));
    let matrix = &scaled * u.adjoint();
    Ok(MatrixFunction {
        matrix: TruncatedMatrix {
            cutoff: t.cutoff,
            modes: t.modes.clone(),
            matrix,
            source: format!("f({})", t.source),
            hermitian_source: true,
        },
        eigenvalues,
        vanishes_at_zero: f(0.0) == 0.0,
    })
}

/// `Tr f(T) = Σ f(eig T)`, from eigenvalues only.
pub fn trace_function(t: &TruncatedMatrix, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    Ok(sum_real(t.eigenvalues()?.into_iter().map(f)))
}

/// Heat weight and its tail cutoff.
fn heat_weight(t: f64, squared: bool) -> (f64, impl Fn(f64) -> f64) {
    let cut = if squared {
        (HEAT_TAIL / t).sqrt()
    } else {
        HEAT_TAIL / t
    };
    (cut, move |lam: f64| {
        if squared {
            (-t * lam * lam).exp()
        } else {
            (-t * lam).exp()
        }
    })
}

/// `Σ_k <e_k, A e_k> w(λ_k)` with `w = e^{-tλ²}` (`squared`) or `e^{-tλ}`.
pub fn heat_trace(model: &SpectralModel, a: &MatrixOracle, t: f64, squared: bool) -> Result<Complex64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("heat parameter must be positive, got {t}")));
    }
    let (cut, w) = heat_weight(t, squared);
    let modes = model.raw_modes(cut)?;
    let terms: Vec<Complex64> = modes
        .par_iter()
        .map(|(label, lam)| a.diagonal(label) * w(*lam))
        .collect();
    Ok(sum_complex(terms))
}

/// `Tr(e^{-tD²})` or `Tr(e^{-t|D|})`, without an operator.
pub fn heat_trace_identity(model: &SpectralModel, t: f64, squared: bool) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("heat parameter must be positive, got {t}")));
    }
    let (cut, w) = heat_weight(t, squared);
    Ok(sum_real(model.raw_modes(cut)?.iter().map(|(_, lam)| w(*lam))))
}

/// `(e^{iTΔ} - 1)/(iTΔ)`, the average of `e^{itΔ}` over `[0, T]`.
pub fn time_kernel(t: f64, delta: f64) -> Complex64 {
    let x = t * delta;
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let half = (0.5 * x).sin();
    Complex64::new(x.sin() / x, 2.0 * half * half / x)
}

/// Truncation of `A_T = (1/T)∫_0^T e^{it|D|} A e^{-it|D|} dt`.
pub fn time_average(
    model: &SpectralModel,
    a: &MatrixOracle,
    t: f64,
    lambda: f64,
) -> Result<TruncatedMatrix> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("averaging time must be positive, got {t}")));
    }
    let mut tm = truncate(model, a, lambda)?;
    apply_time_kernel(&mut tm, t);
    tm.source = format!("avg_{t}({})", tm.source);
    Ok(tm)
}

pub(crate) fn apply_time_kernel(tm: &mut TruncatedMatrix, t: f64) {
    let n = tm.size();
    for j in 0..n {
        for i in 0..n {
            let delta = tm.modes[i].lambda - tm.modes[j].lambda;
            if delta != 0.0 {
                tm.matrix[(i, j)] *= time_kernel(t, delta);
            }
        }
    }
}

fn require_band(b: &MatrixOracle) -> Result<f64> {
    b.band().ok_or_else(|| {
        Error::UnsupportedOperator(format!(
            "`{}` has no band hint, so P B (1-P) cannot be enumerated",
            b.description()
        ))
    })
}

/// Slack added to spectral bands when enumerating escaping modes.
const BAND_SLACK: f64 = 1e-9;

/// `‖P_λ B (1 - P_λ)‖_HS^2`, summing over `λ_j ≤ λ < λ_k ≤ λ + band + margin`.
pub fn hs_norm_offdiag(model: &SpectralModel, b: &MatrixOracle, lambda: f64, margin: f64) -> Result<f64> {
    let band = require_band(b)?;
    let cutoff = model.snap_cutoff(lambda)?;
    let outer = model.raw_modes(cutoff + band + margin.max(0.0) + BAND_SLACK)?;
    let inside = |l: &crate::models::Label| -> bool {
        model
            .eigenvalue(l)
            .map(|lam| crate::numeric::eig_le(lam, cutoff))
            .unwrap_or(false)
    };
    let terms: Vec<f64> = outer
        .par_iter()
        .filter(|(_, lam)| !crate::numeric::eig_le(*lam, cutoff))
        .map(|(k, _)| {
            sum_real(
                b.column(k)
                    .iter()
                    .filter(|(j, _)| inside(j))
                    .map(|(_, z)| z.norm_sqr()),
            )
        })
        .collect();
    Ok(sum_real(terms))
}

/// `Tr(P_λ A (1 - P_λ) B P_λ)` from oracle columns and rows.
pub fn widom_cross_term(
    model: &SpectralModel,
    a: &MatrixOracle,
    b: &MatrixOracle,
    lambda: f64,
) -> Result<Complex64> {
    require_band(a)?;
    require_band(b)?;
    let cutoff = model.snap_cutoff(lambda)?;
    let modes = model.raw_modes(cutoff)?;
    let outside = |l: &crate::models::Label| -> bool {
        model
            .eigenvalue(l)
            .map(|lam| !crate::numeric::eig_le(lam, cutoff))
            .unwrap_or(true)
    };
    let terms: Vec<Complex64> = modes
        .par_iter()
        .map(|(j, _)| {
            // Σ_{m ∉ P} A_{jm} B_{mj}.
            let col = b.column(j);
            let row = a.row(j);
            let mut acc = ComplexSum::new();
            let (mut p, mut q) = (0, 0);
            while p < row.len() && q < col.len() {
                match row[p].0.cmp(&col[q].0) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        if outside(&row[p].0) {
                            acc.add(row[p].1 * col[q].1);
                        }
                        p += 1;
                        q += 1;
                    }
                }
            }
            acc.value()
        })
        .collect();
    Ok(sum_complex(terms))
}

/// Operator norm of `P_λ [|D|, A] P_λ`.
pub fn commutator_norm_check(model: &SpectralModel, a: &MatrixOracle, lambda: f64) -> Result<f64> {
    let t = truncate(model, a, lambda)?;
    let n = t.size();
    let c = Mat::from_fn(n, n, |i, j| {
        t.matrix[(i, j)] * (t.modes[i].lambda - t.modes[j].lambda)
    });
    let s = c
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular values: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Commutator norms over a ladder, flagged if they keep growing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommutatorLadder {
    pub cutoffs: Vec<f64>,
    pub norms: Vec<f64>,
    /// Set when the norm grows by more than 10% between the last two cutoffs.
    pub growing: bool,
}

pub fn commutator_norm_ladder(
    model: &SpectralModel,
    a: &MatrixOracle,
    ladder: &[f64],
) -> Result<CommutatorLadder> {
    let norms = ladder
        .iter()
        .map(|&l| commutator_norm_check(model, a, l))
        .collect::<Result<Vec<_>>>()?;
    let growing = norms.len() >= 2 && {
        let (a, b) = (norms[norms.len() - 2], norms[norms.len() - 1]);
        b > 1.1 * a + 1e-12
    };
    Ok(CommutatorLadder {
        cutoffs: ladder.to_vec(),
        norms,
        growing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::compile_str;

    fn circle() -> SpectralModel {
        SpectralModel::circle()
    }

    #[test]
    fn circle_cosine_truncation() {
        let m = circle();
        let a = compile_str("mult(0, 1, 1)", &m).unwrap();
        let t = truncate(&m, &a, 2.0).unwrap();
        assert_eq!(t.size(), 5);
        for i in 0..5 {
            for j in 0..5 {
                let adjacent = (t.modes[i].label[0] - t.modes[j].label[0]).abs() == 1;
                let expected = if adjacent { 1.0 } else { 0.0 };
                assert_eq!(t.get(i, j), Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn identity_and_trace_mean() {
        let m = SpectralModel::flat_torus(2).unwrap();
        let t = truncate(&m, &MatrixOracle::identity(), 3.0).unwrap();
        assert_eq!(t.size(), m.counting(3.0));
        assert_eq!(trace_mean(&t).unwrap(), Complex64::new(1.0, 0.0));
        let u = compile_str("u(1, 0)", &m).unwrap();
        assert_eq!(trace_mean(&truncate(&m, &u, 3.0).unwrap()).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn toeplitz_tridiagonal_and_square_trace() {
        let m = SpectralModel::toeplitz();
        let a = compile_str("toeplitz(0, 1, 1)", &m).unwrap();
        let n = 30;
        let t = truncate(&m, &a, n as f64).unwrap();
        assert_eq!(t.size(), n + 1);
        for i in 0..=n {
            for j in 0..=n {
                let e = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
                assert_eq!(t.get(i, j).re, e);
            }
        }
        let tr = trace_function(&t, &|x| x * x).unwrap();
        assert!((tr - 2.0 * n as f64).abs() < 1e-10);
        let f = matrix_function(&t, &|x| x * x).unwrap();
        assert!((f.matrix.trace().re - 2.0 * n as f64).abs() < 1e-10);
        assert!(f.vanishes_at_zero);
    }

    #[test]
    fn identity_function_reconstructs() {
        let m = SpectralModel::flat_torus(2).unwrap();
        let a = compile_str("u(1, 2) + adj(u(1, 2)) + angular(x1^2)", &m).unwrap();
        assert!(a.is_hermitian());
        let t = truncate(&m, &a, 4.0).unwrap();
        let f = matrix_function(&t, &|x| x).unwrap();
        let mut err: f64 = 0.0;
        for i in 0..t.size() {
            for j in 0..t.size() {
                err = err.max((f.matrix.get(i, j) - t.get(i, j)).norm());
            }
        }
        assert!(err <= 1e-10 * t.norm_inf());
    }

    #[test]
    fn constant_function_on_zero_matrix() {
        let m = circle();
        let t = truncate(&m, &MatrixOracle::zero(), 2.0).unwrap();
        let f = matrix_function(&t, &|_| 1.0).unwrap();
        assert!((f.matrix.trace().re - 5.0).abs() < 1e-12);
        assert!(!f.vanishes_at_zero);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = circle();
        let a = compile_str("mult(0, 0, 1)", &m).unwrap();
        let t = truncate(&m, &a, 3.0).unwrap();
        assert!(matches!(matrix_function(&t, &|x| x), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dense_cap_is_enforced() {
        let m = SpectralModel::circle().with_limits(crate::models::Limits {
            dense_modes: 100,
            enumerated_modes: 1000,
        });
        assert!(matches!(
            truncate(&m, &MatrixOracle::identity(), 60.0),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn heat_trace_theta_asymptotics() {
        let m = circle();
        let t = 1e-4;
        let v = heat_trace(&m, &MatrixOracle::identity(), t, true).unwrap();
        let expected = (std::f64::consts::PI / t).sqrt();
        assert!((v.re / expected - 1.0).abs() < 5e-3);
        assert_eq!(heat_trace(&m, &MatrixOracle::zero(), t, true).unwrap(), Complex64::new(0.0, 0.0));
        let p = compile_str("proj_pos", &m).unwrap();
        let r = heat_trace(&m, &p, 0.01, false).unwrap().re / heat_trace_identity(&m, 0.01, false).unwrap();
        assert!((r - 0.5).abs() < 1e-2);
    }

    #[test]
    fn time_average_kernel() {
        let m = circle();
        let a = compile_str("mult(0, 0, 1)", &m).unwrap();
        for t in [0.5, 1.0, 10.0] {
            let avg = time_average(&m, &a, t, 5.0).unwrap();
            let expected = (2.0 * (t / 2.0).sin() / t).abs();
            for i in 0..avg.size() {
                for j in 0..avg.size() {
                    let z = avg.get(i, j);
                    if z != Complex64::new(0.0, 0.0) {
                        assert!((z.norm() - expected).abs() < 1e-14);
                    }
                }
            }
            assert!(avg.hs_norm() <= truncate(&m, &a, 5.0).unwrap().hs_norm() + 1e-12);
        }
        let small = time_average(&m, &a, 1e-6, 5.0).unwrap();
        let base = truncate(&m, &a, 5.0).unwrap();
        for i in 0..base.size() {
            for j in 0..base.size() {
                assert!((small.get(i, j) - base.get(i, j)).norm() <= 1e-6);
            }
        }
        let diag = compile_str("proj_pos", &m).unwrap();
        let d = time_average(&m, &diag, 3.0, 5.0).unwrap();
        assert_eq!(d.matrix, truncate(&m, &diag, 5.0).unwrap().matrix);
    }

    #[test]
    fn escape_norms() {
        let m = circle();
        let b = compile_str("mult(0, 0, 1)", &m).unwrap();
        assert!((hs_norm_offdiag(&m, &b, 50.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let p = compile_str("proj_pos", &m).unwrap();
        assert_eq!(hs_norm_offdiag(&m, &p, 50.0, 0.0).unwrap(), 0.0);
        let t = SpectralModel::toeplitz();
        let c = compile_str("toeplitz(0, 1, 1)", &t).unwrap();
        assert!((hs_norm_offdiag(&t, &c, 40.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            hs_norm_offdiag(&m, &b.without_band_hint(), 5.0, 0.0),
            Err(Error::UnsupportedOperator(_))
        ));
    }

    #[test]
    fn widom_identity_at_fixed_cutoff() {
        let m = SpectralModel::flat_torus(2).unwrap();
        let a = compile_str("u(1, 0) + 2 * u(0, 1)", &m).unwrap();
        let b = compile_str("adj(u(1, 1)) + u(1, 0)", &m).unwrap();
        let lam = 5.0;
        let cross = widom_cross_term(&m, &a, &b, lam).unwrap();
        let ab = truncate(&m, &a.compose(&b), lam).unwrap().trace();
        let pa_pb = truncate(&m, &a, lam)
            .unwrap()
            .matmul(&truncate(&m, &b, lam).unwrap())
            .unwrap()
            .trace();
        assert!((cross - (ab - pa_pb)).norm() < 1e-10);
    }

    #[test]
    fn projection_compatibility() {
        let m = SpectralModel::flat_torus(2).unwrap();
        let a = compile_str("u(1, 2) * angular(x1*x2) + 0.5i * u(0, 1)", &m).unwrap();
        let small = truncate(&m, &a, 3.0).unwrap();
        let big = truncate(&m, &a, 5.0).unwrap();
        for i in 0..small.size() {
            assert_eq!(small.modes[i], big.modes[i]);
            for j in 0..small.size() {
                assert_eq!(small.get(i, j), big.get(i, j));
            }
        }
    }

    #[test]
    fn commutator_norms() {
        let m = circle();
        let a = compile_str("mult(0, 0, 1)", &m).unwrap();
        for lam in [1.0, 5.0, 20.0] {
            assert!((commutator_norm_check(&m, &a, lam).unwrap() - 1.0).abs() < 1e-12);
        }
        assert_eq!(commutator_norm_check(&m, &MatrixOracle::identity(), 5.0).unwrap(), 0.0);
        let t = SpectralModel::flat_torus(2).unwrap();
        let u = compile_str("u(2, 1)", &t).unwrap();
        let ladder = commutator_norm_ladder(&t, &u, &[2.0, 4.0, 6.0]).unwrap();
        assert!(ladder.norms.iter().all(|&n| n <= 5f64.sqrt() + 1e-12));
    }

    #[test]
    fn dump_round_trip() {
        let m = circle();
        let a = compile_str("mult(0.5, 1, 2i)", &m).unwrap();
        let t = truncate(&m, &a, 3.0).unwrap();
        let mut buf = Vec::new();
        t.write_dump(&mut buf).unwrap();
        let (header, mat) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(header.size, 7);
        assert_eq!(header.source, t.source);
        assert_eq!(mat, t.matrix);
    }
}
