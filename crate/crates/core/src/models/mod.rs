//! Catalog of spectral triples presented in the eigenbasis of `|D|`.
//!
//! A model enumerates its modes (basis vectors labelled by integer tuples),
//! assigns each the eigenvalue `λ ≥ 0` of `|D|`, and compiles generator
//! operators into [`MatrixOracle`]s. Modes are flattened into a single index by
//! sorting on `(λ, label)`; labels inside a degenerate eigenspace are ordered
//! lexicographically, so the basis within each eigenspace is fixed once and for all.

mod almost_commutative;
mod circle;
mod generators;
pub mod lattice;
mod toeplitz;
mod torus;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::numeric::{eig_eq, japanese_bracket};
use crate::oracle::{LeafOperator, MatrixOracle, SparseVec};

pub use almost_commutative::AlmostCommutative;
pub use circle::FourierSymbol;
pub use torus::Torus;

pub use crate::trunc::commutator_norm_check;

/// Model-specific integer tuple identifying a basis vector.
pub type Label = SmallVec<[i64; 4]>;

/// A basis vector of the model after global ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub label: Label,
    /// Eigenvalue of `|D|`.
    pub lambda: f64,
    /// Position in the flattened `(λ, label)` order.
    pub index: usize,
}

/// Enumeration and dense-truncation caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest `N(λ)` for which a dense matrix is materialized.
    pub dense_modes: usize,
    /// Largest number of modes visited by diagonal sums and heat traces.
    pub enumerated_modes: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dense_modes: 4096,
            enumerated_modes: 4_000_000,
        }
    }
}

/// JSON-serializable description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelDescriptor {
    Circle,
    Toeplitz,
    NcTorus {
        d: usize,
        /// Antisymmetric `d×d` deformation matrix; omitted means the flat torus.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<Vec<f64>>>,
        /// Value of `angular(g)` on the `k = 0` mode.
        #[serde(default, skip_serializing_if = "is_zero")]
        angular_origin: f64,
    },
    AlmostCommutative {
        /// Hermitian finite Dirac operator; entries are numbers or `[re, im]` pairs.
        d_f: Vec<Vec<MatrixEntry>>,
    },
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

/// A matrix entry in JSON: either a real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<MatrixEntry> for Complex64 {
    fn from(e: MatrixEntry) -> Self {
        match e {
            MatrixEntry::Real(x) => Complex64::new(x, 0.0),
            MatrixEntry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for MatrixEntry {
    fn from(z: Complex64) -> Self {
        if z.im == 0.0 {
            MatrixEntry::Real(z.re)
        } else {
            MatrixEntry::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug)]
pub(crate) enum ModelKind {
    Circle,
    Toeplitz,
    Torus(Torus),
    AlmostCommutative(Arc<AlmostCommutative>),
}

/// An immutable spectral model. Cheap to clone.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    kind: Arc<ModelKind>,
    limits: Limits,
}

impl SpectralModel {
    /// The circle: modes `n ∈ ℤ`, `λ = |n|`, `d = 1`.
    pub fn circle() -> Self {
        Self::from_kind(ModelKind::Circle)
    }

    /// The Toeplitz triple on `ℓ²(ℕ)`: modes `j ∈ ℕ`, `λ = j`, `d = 1`.
    pub fn toeplitz() -> Self {
        Self::from_kind(ModelKind::Toeplitz)
    }

    /// The noncommutative `d`-torus with deformation `theta` (`θ = 0` is the flat torus).
    pub fn nc_torus(d: usize, theta: Vec<Vec<f64>>) -> Result<Self> {
        Ok(Self::from_kind(ModelKind::Torus(Torus::new(d, theta, 0.0)?)))
    }

    /// The flat (commutative) torus of dimension `d`.
    pub fn flat_torus(d: usize) -> Result<Self> {
        Self::nc_torus(d, vec![vec![0.0; d]; d])
    }

    /// Flat 2-torus times a finite spectral triple with Dirac operator `d_f`.
    pub fn almost_commutative(d_f: Vec<Vec<Complex64>>) -> Result<Self> {
        Ok(Self::from_kind(ModelKind::AlmostCommutative(Arc::new(
            AlmostCommutative::new(d_f)?,
        ))))
    }

    pub fn from_descriptor(desc: &ModelDescriptor) -> Result<Self> {
        match desc {
            ModelDescriptor::Circle => Ok(Self::circle()),
            ModelDescriptor::Toeplitz => Ok(Self::toeplitz()),
            ModelDescriptor::NcTorus {
                d,
                theta,
                angular_origin,
            } => {
                let theta = theta.clone().unwrap_or_else(|| vec![vec![0.0; *d]; *d]);
                Ok(Self::from_kind(ModelKind::Torus(Torus::new(
                    *d,
                    theta,
                    *angular_origin,
                )?)))
            }
            ModelDescriptor::AlmostCommutative { d_f } => Self::almost_commutative(
                d_f.iter()
                    .map(|row| row.iter().map(|&e| e.into()).collect())
                    .collect(),
            ),
        }
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match &*self.kind {
            ModelKind::Circle => ModelDescriptor::Circle,
            ModelKind::Toeplitz => ModelDescriptor::Toeplitz,
            ModelKind::Torus(t) => t.descriptor(),
            ModelKind::AlmostCommutative(ac) => ac.descriptor(),
        }
    }

    fn from_kind(kind: ModelKind) -> Self {
        Self {
            kind: Arc::new(kind),
            limits: Limits::default(),
        }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub(crate) fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match &*self.kind {
            ModelKind::Circle => "circle",
            ModelKind::Toeplitz => "toeplitz",
            ModelKind::Torus(t) if t.is_flat() => "flat_torus",
            ModelKind::Torus(_) => "nc_torus",
            ModelKind::AlmostCommutative(_) => "almost_commutative",
        }
    }

    /// Metric dimension `d`.
    pub fn dimension(&self) -> f64 {
        match &*self.kind {
            ModelKind::Circle | ModelKind::Toeplitz => 1.0,
            ModelKind::Torus(t) => t.dim() as f64,
            ModelKind::AlmostCommutative(_) => 2.0,
        }
    }

    /// Eigenvalue of `|D|` on the mode with this label.
    pub fn eigenvalue(&self, label: &Label) -> Result<f64> {
        match &*self.kind {
            ModelKind::Circle => Ok(label[0].unsigned_abs() as f64),
            ModelKind::Toeplitz => {
                if label[0] < 0 {
                    Err(Error::invalid("toeplitz labels are non-negative"))
                } else {
                    Ok(label[0] as f64)
                }
            }
            ModelKind::Torus(t) => Ok(t.eigenvalue(label)),
            ModelKind::AlmostCommutative(ac) => ac.eigenvalue(label),
        }
    }

    /// `<λ> = (1 + λ^2)^{1/2}`.
    pub fn angle_bracket(&self, lambda: f64) -> f64 {
        japanese_bracket(lambda)
    }

    /// `N(λ) = #{k : λ_k ≤ λ}`, counted with multiplicity.
    pub fn counting(&self, lambda: f64) -> usize {
        if !(lambda >= 0.0) {
            return 0;
        }
        match &*self.kind {
            ModelKind::Circle => 2 * floor_eig(lambda) + 1,
            ModelKind::Toeplitz => floor_eig(lambda) + 1,
            ModelKind::Torus(t) => t.counting(lambda),
            ModelKind::AlmostCommutative(ac) => ac.counting(lambda),
        }
    }

    /// Modes with `λ_k ≤ λ` in enumeration order (not sorted), with their eigenvalues.
    pub(crate) fn raw_modes(&self, lambda: f64) -> Result<Vec<(Label, f64)>> {
        let n = self.counting(lambda);
        if n > self.limits.enumerated_modes {
            return Err(Error::ResourceLimit {
                what: "mode enumeration",
                requested: n,
                cap: self.limits.enumerated_modes,
            });
        }
        if !(lambda >= 0.0) {
            return Ok(Vec::new());
        }
        let modes = match &*self.kind {
            ModelKind::Circle => {
                let m = floor_eig(lambda) as i64;
                (-m..=m)
                    .map(|n| (SmallVec::from_slice(&[n]), n.unsigned_abs() as f64))
                    .collect()
            }
            ModelKind::Toeplitz => (0..=floor_eig(lambda) as i64)
                .map(|j| (SmallVec::from_slice(&[j]), j as f64))
                .collect(),
            ModelKind::Torus(t) => t.raw_modes(lambda),
            ModelKind::AlmostCommutative(ac) => ac.raw_modes(lambda)?,
        };
        Ok(modes)
    }

    /// Modes with `λ_k ≤ λ`, sorted by `(λ, label)` and indexed.
    ///
    /// Eigenvalues equal up to rounding are snapped to a common value so that
    /// degenerate eigenspaces are contiguous and ordered by label.
    pub fn modes_up_to(&self, lambda: f64) -> Result<Vec<Mode>> {
        let mut raw = self.raw_modes(lambda)?;
        raw.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        let mut start = 0;
        while start < raw.len() {
            let base = raw[start].1;
            let mut end = start + 1;
            while end < raw.len() && eig_eq(raw[end].1, base) {
                end += 1;
            }
            for m in &mut raw[start..end] {
                m.1 = base;
            }
            raw[start..end].sort_by(|a, b| a.0.cmp(&b.0));
            start = end;
        }
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(index, (label, lambda))| Mode {
                label,
                lambda,
                index,
            })
            .collect())
    }

    /// The first `n` modes in flattened order (enumerating just far enough).
    pub fn first_modes(&self, n: usize) -> Result<Vec<Mode>> {
        let lambda = self.eigenvalue_at_index(n.saturating_sub(1))?;
        let mut modes = self.modes_up_to(lambda)?;
        modes.truncate(n);
        Ok(modes)
    }

    /// `λ_n`, the `n`-th eigenvalue of `|D|` counted with multiplicity (0-based).
    pub fn eigenvalue_at_index(&self, n: usize) -> Result<f64> {
        if n >= self.limits.enumerated_modes {
            return Err(Error::ResourceLimit {
                what: "mode enumeration",
                requested: n + 1,
                cap: self.limits.enumerated_modes,
            });
        }
        // Exponential then bisection search on the counting function.
        let mut hi = 1.0;
        while self.counting(hi) <= n {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        if self.counting(lo) > n {
            return Ok(self.distinct_eigenvalues(0.0)?.first().copied().unwrap_or(0.0));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.counting(mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-13 * hi.max(1.0) {
                break;
            }
        }
        // Snap to the first actual eigenvalue whose count exceeds n.
        let candidates = self.distinct_eigenvalues(hi * (1.0 + 1e-6) + 1e-6)?;
        candidates
            .into_iter()
            .filter(|&r| r >= lo * (1.0 - 1e-6))
            .find(|&r| self.counting(r) > n)
            .ok_or_else(|| Error::Numerical("eigenvalue search failed".into()))
    }

    /// Distinct eigenvalues `r_0 < r_1 < …` of `|D|` up to `λ`.
    pub fn distinct_eigenvalues(&self, lambda: f64) -> Result<Vec<f64>> {
        let n = self.counting(lambda);
        if n > self.limits.enumerated_modes {
            return Err(Error::ResourceLimit {
                what: "eigenvalue enumeration",
                requested: n,
                cap: self.limits.enumerated_modes,
            });
        }
        match &*self.kind {
            ModelKind::Circle | ModelKind::Toeplitz => {
                Ok((0..=floor_eig(lambda.max(0.0))).map(|n| n as f64).collect())
            }
            ModelKind::Torus(t) => Ok(t.distinct_eigenvalues(lambda)),
            ModelKind::AlmostCommutative(ac) => Ok(ac.distinct_eigenvalues(lambda)),
        }
    }

    /// Largest distinct eigenvalue `r_k ≤ λ`, so that `P_λ = P_{r_k}`.
    pub fn snap_cutoff(&self, lambda: f64) -> Result<f64> {
        self.distinct_eigenvalues(lambda)?
            .last()
            .copied()
            .ok_or_else(|| Error::invalid(format!("no eigenvalue below cutoff {lambda}")))
    }

    /// Compiles a generator by name with already-parsed arguments.
    pub fn generator(&self, call: &crate::expr::GeneratorCall) -> Result<MatrixOracle> {
        generators::compile(self, call)
    }

    /// Generator names accepted by this model with a hint of their arguments.
    pub fn generator_signatures(&self) -> Vec<(&'static str, &'static str)> {
        generators::signatures(self)
    }

    /// Diagonal operator `<D>^s`.
    pub fn bracket_power(&self, s: f64) -> MatrixOracle {
        MatrixOracle::leaf(
            DiagonalOp {
                model: self.clone(),
                f: DiagonalFn::BracketPower(s),
            },
            Some(0.0),
            true,
            format!("bracket({s})"),
        )
    }
}

fn floor_eig(lambda: f64) -> usize {
    (lambda + crate::numeric::EIGEN_TOL * lambda.max(1.0)).floor() as usize
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum DiagonalFn {
    BracketPower(f64),
}

/// Diagonal operator `f(|D|)`.
#[derive(Debug)]
pub(crate) struct DiagonalOp {
    pub(crate) model: SpectralModel,
    pub(crate) f: DiagonalFn,
}

impl DiagonalOp {
    fn value(&self, k: &Label) -> Complex64 {
        let lambda = self.model.eigenvalue(k).unwrap_or(f64::NAN);
        match self.f {
            DiagonalFn::BracketPower(s) => Complex64::new(japanese_bracket(lambda).powf(s), 0.0),
        }
    }
}

impl LeafOperator for DiagonalOp {
    fn column(&self, k: &Label) -> SparseVec {
        crate::oracle::normalize(vec![(k.clone(), self.value(k))])
    }
    fn row(&self, j: &Label) -> SparseVec {
        self.column(j)
    }
    fn diagonal(&self, k: &Label) -> Complex64 {
        self.value(k)
    }
}

/// Position lookup for a list of modes.
pub(crate) fn index_of(modes: &[Mode]) -> HashMap<Label, usize> {
    modes
        .iter()
        .map(|m| (m.label.clone(), m.index))
        .collect()
}
