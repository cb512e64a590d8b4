//! Matrix-entry oracles `a(j, k) = <e_j, A e_k>` in the eigenbasis of `|D|`.
//!
//! Every operator in the catalog maps a basis vector to a finite combination of
//! basis vectors, so an oracle is represented by its sparse columns (and rows,
//! needed for adjoints and diagonal entries of products). Composite expressions
//! are evaluated lazily by combining the columns of their parts.
//!
//! The band hint is *spectral*: entries `a(j, k)` vanish whenever
//! `| λ_j - λ_k | > band`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::models::Label;

/// Sparse vector over mode labels: sorted by label, no duplicates, no exact zeros.
pub type SparseVec = Vec<(Label, Complex64)>;

/// An elementary operator that knows its own columns and rows.
pub trait LeafOperator: Send + Sync + fmt::Debug {
    /// `A e_k` as `(j, a(j,k))` pairs.
    fn column(&self, k: &Label) -> SparseVec;

    /// Row `j` as `(k, a(j,k))` pairs.
    fn row(&self, j: &Label) -> SparseVec;

    fn diagonal(&self, k: &Label) -> Complex64 {
        lookup(&self.column(k), k)
    }
}

#[derive(Debug, Clone)]
enum Node {
    /// `c · 1`.
    Scalar(Complex64),
    Leaf(Arc<dyn LeafOperator>),
    Scale(Complex64, Arc<Node>),
    Sum(Arc<Node>, Arc<Node>),
    Product(Arc<Node>, Arc<Node>),
    Adjoint(Arc<Node>),
    Power(Arc<Node>, u32),
}

/// A compiled operator: entry oracle plus structural metadata.
#[derive(Debug, Clone)]
pub struct MatrixOracle {
    node: Arc<Node>,
    band: Option<f64>,
    hermitian: bool,
    description: String,
}

pub(crate) fn normalize(mut v: Vec<(Label, Complex64)>) -> SparseVec {
    if v.len() <= 1 {
        v.retain(|(_, z)| *z != Complex64::new(0.0, 0.0));
        return v;
    }
    v.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: SparseVec = Vec::with_capacity(v.len());
    for (label, z) in v {
        match out.last_mut() {
            Some((l, acc)) if *l == label => *acc += z,
            _ => out.push((label, z)),
        }
    }
    out.retain(|(_, z)| *z != Complex64::new(0.0, 0.0));
    out
}

pub(crate) fn lookup(v: &SparseVec, label: &Label) -> Complex64 {
    match v.binary_search_by(|(l, _)| l.cmp(label)) {
        Ok(i) => v[i].1,
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

fn scaled(v: SparseVec, c: Complex64) -> SparseVec {
    if c == Complex64::new(0.0, 0.0) {
        return Vec::new();
    }
    v.into_iter().map(|(l, z)| (l, z * c)).collect()
}

fn add_sparse(a: SparseVec, b: SparseVec) -> SparseVec {
    let mut v = a;
    v.extend(b);
    normalize(v)
}

fn conj_sparse(v: SparseVec) -> SparseVec {
    v.into_iter().map(|(l, z)| (l, z.conj())).collect()
}

impl Node {
    fn column(&self, k: &Label) -> SparseVec {
        match self {
            Node::Scalar(c) => normalize(vec![(k.clone(), *c)]),
            Node::Leaf(op) => op.column(k),
            Node::Scale(c, a) => scaled(a.column(k), *c),
            Node::Sum(a, b) => add_sparse(a.column(k), b.column(k)),
            Node::Product(a, b) => {
                let mut acc = Vec::new();
                for (m, bz) in b.column(k) {
                    acc.extend(a.column(&m).into_iter().map(|(j, az)| (j, az * bz)));
                }
                normalize(acc)
            }
            Node::Adjoint(a) => conj_sparse(a.row(k)),
            Node::Power(a, p) => {
                let mut v = normalize(vec![(k.clone(), Complex64::new(1.0, 0.0))]);
                for _ in 0..*p {
                    let mut acc = Vec::new();
                    for (m, z) in v {
                        acc.extend(a.column(&m).into_iter().map(|(j, az)| (j, az * z)));
                    }
                    v = normalize(acc);
                }
                v
            }
        }
    }

    fn row(&self, j: &Label) -> SparseVec {
        match self {
            Node::Scalar(c) => normalize(vec![(j.clone(), *c)]),
            Node::Leaf(op) => op.row(j),
            Node::Scale(c, a) => scaled(a.row(j), *c),
            Node::Sum(a, b) => add_sparse(a.row(j), b.row(j)),
            Node::Product(a, b) => {
                let mut acc = Vec::new();
                for (m, az) in a.row(j) {
                    acc.extend(b.row(&m).into_iter().map(|(k, bz)| (k, az * bz)));
                }
                normalize(acc)
            }
            Node::Adjoint(a) => conj_sparse(a.column(j)),
            Node::Power(a, p) => {
                let mut v = normalize(vec![(j.clone(), Complex64::new(1.0, 0.0))]);
                for _ in 0..*p {
                    let mut acc = Vec::new();
                    for (m, z) in v {
                        acc.extend(a.row(&m).into_iter().map(|(k, az)| (k, z * az)));
                    }
                    v = normalize(acc);
                }
                v
            }
        }
    }

    fn diagonal(&self, k: &Label) -> Complex64 {
        match self {
            Node::Scalar(c) => *c,
            Node::Leaf(op) => op.diagonal(k),
            Node::Scale(c, a) => c * a.diagonal(k),
            Node::Sum(a, b) => a.diagonal(k) + b.diagonal(k),
            Node::Adjoint(a) => a.diagonal(k).conj(),
            Node::Product(a, b) => {
                // <e_k, AB e_k> = Σ_m a(k,m) b(m,k)
                let row = a.row(k);
                let col = b.column(k);
                dot_sorted(&row, &col)
            }
            Node::Power(_, 0) => Complex64::new(1.0, 0.0),
            Node::Power(a, p) => {
                let half = p / 2;
                let left = Node::Power(a.clone(), p - half).row(k);
                let right = Node::Power(a.clone(), half).column(k);
                dot_sorted(&left, &right)
            }
        }
    }
}

fn dot_sorted(a: &SparseVec, b: &SparseVec) -> Complex64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = crate::numeric::ComplexSum::new();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc.add(a[i].1 * b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    acc.value()
}

impl MatrixOracle {
    /// Wraps a leaf operator with its spectral band and hermiticity.
    pub fn leaf(
        op: impl LeafOperator + 'static,
        band: Option<f64>,
        hermitian: bool,
        description: impl Into<String>,
    ) -> Self {
        Self {
            node: Arc::new(Node::Leaf(Arc::new(op))),
            band,
            hermitian,
            description: description.into(),
        }
    }

    /// `c · 1`.
    pub fn scalar(c: Complex64) -> Self {
        Self {
            node: Arc::new(Node::Scalar(c)),
            band: Some(0.0),
            hermitian: c.im == 0.0,
            description: format_scalar(c),
        }
    }

    pub fn identity() -> Self {
        let mut id = Self::scalar(Complex64::new(1.0, 0.0));
        id.description = "id".into();
        id
    }

    pub fn zero() -> Self {
        Self::scalar(Complex64::new(0.0, 0.0))
    }

    pub fn band(&self) -> Option<f64> {
        self.band
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub(crate) fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into();
        self
    }

    pub(crate) fn with_hermitian(mut self, h: bool) -> Self {
        self.hermitian = h;
        self
    }

    /// Drops the band hint, as for an operator whose off-diagonal reach is unknown.
    pub fn without_band_hint(mut self) -> Self {
        self.band = None;
        self
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            node: Arc::new(Node::Scale(c, self.node.clone())),
            band: self.band,
            hermitian: self.hermitian && c.im == 0.0,
            description: format!("{} * ({})", format_scalar(c), self.description),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            node: Arc::new(Node::Sum(self.node.clone(), other.node.clone())),
            band: max_band(self.band, other.band),
            hermitian: self.hermitian && other.hermitian,
            description: format!("({}) + ({})", self.description, other.description),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let neg = Arc::new(Node::Scale(Complex64::new(-1.0, 0.0), other.node.clone()));
        Self {
            node: Arc::new(Node::Sum(self.node.clone(), neg)),
            band: max_band(self.band, other.band),
            hermitian: self.hermitian && other.hermitian,
            description: format!("({}) - ({})", self.description, other.description),
        }
    }

    /// Composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            node: Arc::new(Node::Product(self.node.clone(), other.node.clone())),
            band: sum_band(self.band, other.band),
            hermitian: false,
            description: format!("({}) * ({})", self.description, other.description),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            node: Arc::new(Node::Adjoint(self.node.clone())),
            band: self.band,
            hermitian: self.hermitian,
            description: format!("adj({})", self.description),
        }
    }

    pub fn pow(&self, p: u32) -> Self {
        Self {
            node: Arc::new(Node::Power(self.node.clone(), p)),
            band: self.band.map(|b| b * p as f64),
            hermitian: self.hermitian,
            description: format!("pow({}, {p})", self.description),
        }
    }

    /// `A e_k`.
    pub fn column(&self, k: &Label) -> SparseVec {
        self.node.column(k)
    }

    /// Row `j` of `A`.
    pub fn row(&self, j: &Label) -> SparseVec {
        self.node.row(j)
    }

    /// `<e_j, A e_k>`.
    pub fn entry(&self, j: &Label, k: &Label) -> Complex64 {
        lookup(&self.node.column(k), j)
    }

    /// `<e_k, A e_k>`.
    pub fn diagonal(&self, k: &Label) -> Complex64 {
        self.node.diagonal(k)
    }
}

fn max_band(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a?.max(b?))
}

fn sum_band(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? + b?)
}

pub(crate) fn format_scalar(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}
