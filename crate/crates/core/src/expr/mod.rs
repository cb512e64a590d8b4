//! Operator expressions: syntax tree, parser, printer and compilation to oracles.

mod ast;
mod parser;

pub use ast::{Expr, GenArg, GeneratorCall, Monomial, Polynomial};
pub use parser::parse;

use num_complex::Complex64;

use crate::error::Result;
use crate::models::SpectralModel;
use crate::oracle::MatrixOracle;

/// Parses `src` and checks every generator (name and arity) against `model`.
pub fn parse_operator(src: &str, model: &SpectralModel) -> Result<Expr> {
    let expr = parse(src)?;
    for call in expr.generators() {
        model.generator(call)?;
    }
    Ok(expr)
}

/// Parses and compiles in one step.
pub fn compile_str(src: &str, model: &SpectralModel) -> Result<MatrixOracle> {
    compile(&parse_operator(src, model)?, model)
}

/// Compiles an expression to an entry oracle for `model`.
///
/// Hermiticity is propagated structurally; `x + adj(x)`, `adj(x) * x` and
/// `x * adj(x)` are recognized as hermitian.
pub fn compile(expr: &Expr, model: &SpectralModel) -> Result<MatrixOracle> {
    Ok(compile_node(expr, model)?.with_description(expr.to_string()))
}

fn is_adjoint_of(a: &Expr, b: &Expr) -> bool {
    matches!(a, Expr::Adj(inner) if **inner == *b)
}

fn real_scalar(e: &Expr) -> bool {
    matches!(e, Expr::Scalar(c) if c.im == 0.0)
}

fn compile_node(expr: &Expr, model: &SpectralModel) -> Result<MatrixOracle> {
    Ok(match expr {
        Expr::Scalar(c) => MatrixOracle::scalar(*c),
        Expr::Gen(call) => model.generator(call)?,
        Expr::Add(a, b) => {
            let o = compile_node(a, model)?.add(&compile_node(b, model)?);
            if is_adjoint_of(a, b) || is_adjoint_of(b, a) {
                o.with_hermitian(true)
            } else {
                o
            }
        }
        Expr::Sub(a, b) => compile_node(a, model)?.sub(&compile_node(b, model)?),
        Expr::Mul(a, b) => {
            let (oa, ob) = (compile_node(a, model)?, compile_node(b, model)?);
            let hermitian = is_adjoint_of(a, b)
                || is_adjoint_of(b, a)
                || (real_scalar(a) && ob.is_hermitian())
                || (real_scalar(b) && oa.is_hermitian());
            oa.compose(&ob).with_hermitian(hermitian)
        }
        Expr::Neg(a) => compile_node(a, model)?.scale(Complex64::new(-1.0, 0.0)),
        Expr::Adj(a) => compile_node(a, model)?.adjoint(),
        Expr::Pow(a, p) => compile_node(a, model)?.pow(*p),
    })
}
