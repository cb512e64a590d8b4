use std::fmt;

use num_complex::Complex64;

/// Operator expression over model generators.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Scalar(Complex64),
    Gen(GeneratorCall),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    /// Composition.
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Adj(Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// A generator name with its parsed arguments.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorCall {
    pub name: String,
    pub args: Vec<GenArg>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GenArg {
    Scalar(Complex64),
    Matrix(Vec<Vec<Complex64>>),
    Poly(Polynomial),
}

/// `c · x_1^{e_1} ⋯ x_n^{e_n}`; trailing zero exponents are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub exps: Vec<u32>,
}

/// Real polynomial in `x1, x2, …`, kept as the list of monomials written.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        crate::numeric::sum_real(self.terms.iter().map(|t| {
            t.exps
                .iter()
                .zip(x)
                .fold(t.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
        }))
    }

    /// Number of variables referenced.
    pub fn arity(&self) -> usize {
        self.terms.iter().map(|t| t.exps.len()).max().unwrap_or(0)
    }
}

impl Expr {
    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }
    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }
    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }
    pub fn adj(a: Expr) -> Expr {
        Expr::Adj(Box::new(a))
    }
    pub fn pow(a: Expr, p: u32) -> Expr {
        Expr::Pow(Box::new(a), p)
    }
    pub fn gen(name: &str, args: Vec<GenArg>) -> Expr {
        Expr::Gen(GeneratorCall {
            name: name.to_string(),
            args,
        })
    }

    /// Visits every generator call.
    pub fn generators(&self) -> Vec<&GeneratorCall> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a GeneratorCall>) {
        match self {
            Expr::Scalar(_) => {}
            Expr::Gen(g) => out.push(g),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Expr::Neg(a) | Expr::Adj(a) | Expr::Pow(a, _) => a.collect(out),
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let op = if matches!(self, Expr::Add(..)) { "+" } else { "-" };
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.write(f, 0)?;
                write!(f, " {op} ")?;
                b.write(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Mul(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.write(f, 1)?;
                f.write_str(" * ")?;
                b.write(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.write(f, 2)
            }
            Expr::Scalar(c) => write_literal(f, *c),
            Expr::Adj(a) => {
                f.write_str("adj(")?;
                a.write(f, 0)?;
                f.write_str(")")
            }
            Expr::Pow(a, p) => {
                f.write_str("pow(")?;
                a.write(f, 0)?;
                write!(f, ", {p})")
            }
            Expr::Gen(g) => write!(f, "{g}"),
        }
    }
}

/// Scalar literal as the parser reads it: real `2.5` or imaginary `2.5i`.
fn write_literal(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else {
        write!(f, "({} + {}i)", c.re, c.im)
    }
}

/// Signed constant inside an argument list: `-1`, `2i`, `1-0.5i`.
fn write_constant(f: &mut fmt::Formatter<'_>, c: Complex64) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{}i", c.im)
    } else if c.im < 0.0 {
        write!(f, "{}-{}i", c.re, -c.im)
    } else {
        write!(f, "{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

impl fmt::Display for GeneratorCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.args.is_empty() {
            return Ok(());
        }
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Display for GenArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenArg::Scalar(c) => write_constant(f, *c),
            GenArg::Poly(p) => write!(f, "{p}"),
            GenArg::Matrix(rows) => {
                f.write_str("[")?;
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str("[")?;
                    for (j, z) in row.iter().enumerate() {
                        if j > 0 {
                            f.write_str(", ")?;
                        }
                        write_constant(f, *z)?;
                    }
                    f.write_str("]")?;
                }
                f.write_str("]")
            }
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let neg = t.coeff.is_sign_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            write!(f, "{}", t.coeff.abs())?;
            for (v, &e) in t.exps.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{e}", v + 1)?,
                }
            }
        }
        Ok(())
    }
}
