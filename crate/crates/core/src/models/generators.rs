//! Generator registry: name and argument checking, then leaf construction.

use num_complex::Complex64;

use super::almost_commutative::{AcPositive, AcShift, Internal};
use super::circle::{Convolution, FourierSymbol, SignSymbol};
use super::toeplitz::{check_square, is_hermitian, FiniteRank};
use super::torus::{Angular, TorusShift};
use super::{ModelKind, SpectralModel};
use crate::error::{Error, Result};
use crate::expr::{GenArg, GeneratorCall};
use crate::oracle::MatrixOracle;

/// Generator names available on a model, with their argument shapes.
pub fn signatures(model: &SpectralModel) -> Vec<(&'static str, &'static str)> {
    let mut out = vec![("id", ""), ("bracket", "s")];
    match model.kind() {
        ModelKind::Circle => out.extend([
            ("mult", "c0, c-1, c1, …"),
            ("sign_symbol", "g(-1), g(0), g(1)"),
            ("proj_pos", ""),
        ]),
        ModelKind::Toeplitz => out.extend([("toeplitz", "c0, c-1, c1, …"), ("finite_rank", "[[…], …]")]),
        ModelKind::Torus(_) => out.extend([("u", "n1, …, nd"), ("angular", "polynomial in x1, …, xd")]),
        ModelKind::AlmostCommutative(_) => out.extend([
            ("u", "n1, n2"),
            ("internal", "[[…], …]"),
            ("proj_pos", ""),
        ]),
    }
    out
}

fn arity(call: &GeneratorCall, expected: &str, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Arity {
            name: call.name.clone(),
            expected: expected.to_string(),
            got: call.args.len(),
        })
    }
}

fn scalars(call: &GeneratorCall) -> Result<Vec<Complex64>> {
    call.args
        .iter()
        .map(|a| match a {
            GenArg::Scalar(c) => Ok(*c),
            _ => Err(Error::invalid(format!("{}: expected scalar arguments", call.name))),
        })
        .collect()
}

fn integers(call: &GeneratorCall) -> Result<Vec<i64>> {
    scalars(call)?
        .into_iter()
        .map(|c| {
            if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 1e15 {
                Ok(c.re as i64)
            } else {
                Err(Error::invalid(format!("{}: expected integer arguments", call.name)))
            }
        })
        .collect()
}

fn matrix(call: &GeneratorCall) -> Result<Vec<Vec<Complex64>>> {
    match call.args.as_slice() {
        [GenArg::Matrix(m)] => Ok(m.clone()),
        _ => Err(Error::invalid(format!("{}: expected a matrix argument", call.name))),
    }
}

fn unknown(model: &SpectralModel, call: &GeneratorCall) -> Error {
    Error::UnknownGenerator {
        name: call.name.clone(),
        model: model.name().to_string(),
    }
}

pub(crate) fn compile(model: &SpectralModel, call: &GeneratorCall) -> Result<MatrixOracle> {
    let n = call.args.len();
    let desc = call.to_string();
    match call.name.as_str() {
        "id" => {
            arity(call, "0", n == 0)?;
            return Ok(MatrixOracle::identity());
        }
        "bracket" => {
            arity(call, "1", n == 1)?;
            let s = scalars(call)?[0];
            if s.im != 0.0 {
                return Err(Error::invalid("bracket: exponent must be real"));
            }
            return Ok(model.bracket_power(s.re));
        }
        _ => {}
    }
    match (model.kind(), call.name.as_str()) {
        (ModelKind::Circle, "mult") | (ModelKind::Toeplitz, "toeplitz") => {
            arity(call, "at least 1", n >= 1)?;
            let symbol = FourierSymbol::from_list(&scalars(call)?);
            let band = symbol.degree() as f64;
            let hermitian = symbol.is_real();
            Ok(MatrixOracle::leaf(
                Convolution {
                    symbol,
                    half_line: matches!(model.kind(), ModelKind::Toeplitz),
                },
                Some(band),
                hermitian,
                desc,
            ))
        }
        (ModelKind::Circle, "sign_symbol") => {
            arity(call, "3", n == 3)?;
            let v = scalars(call)?;
            let values = [v[0], v[1], v[2]];
            let hermitian = values.iter().all(|z| z.im == 0.0);
            Ok(MatrixOracle::leaf(SignSymbol { values }, Some(0.0), hermitian, desc))
        }
        (ModelKind::Circle, "proj_pos") => {
            arity(call, "0", n == 0)?;
            let (zero, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
            Ok(MatrixOracle::leaf(
                SignSymbol {
                    values: [zero, one, one],
                },
                Some(0.0),
                true,
                desc,
            ))
        }
        (ModelKind::Toeplitz, "finite_rank") => {
            arity(call, "1", n == 1)?;
            let m = matrix(call)?;
            let size = check_square(&m, "finite_rank")?;
            let hermitian = is_hermitian(&m);
            Ok(MatrixOracle::leaf(
                FiniteRank { matrix: m },
                Some(size as f64 - 1.0),
                hermitian,
                desc,
            ))
        }
        (ModelKind::Torus(t), "u") => {
            arity(call, &t.dim().to_string(), n == t.dim())?;
            let m = integers(call)?;
            let norm = m.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
            let hermitian = norm == 0.0;
            Ok(MatrixOracle::leaf(
                TorusShift { torus: t.clone(), m },
                Some(norm),
                hermitian,
                desc,
            ))
        }
        (ModelKind::Torus(t), "angular") => {
            arity(call, "1", n == 1)?;
            let GenArg::Poly(poly) = &call.args[0] else {
                return Err(Error::invalid("angular: expected a polynomial"));
            };
            if poly.arity() > t.dim() {
                return Err(Error::invalid(format!(
                    "angular: polynomial uses x{} but the torus has dimension {}",
                    poly.arity(),
                    t.dim()
                )));
            }
            Ok(MatrixOracle::leaf(
                Angular {
                    d: t.dim(),
                    poly: poly.clone(),
                    origin: t.angular_origin(),
                },
                Some(0.0),
                true,
                desc,
            ))
        }
        (ModelKind::AlmostCommutative(ac), "u") => {
            arity(call, "2", n == 2)?;
            let m = integers(call)?;
            let spread = ac.finite_spectrum_sq().last().unwrap().sqrt()
                - ac.finite_spectrum_sq()[0].sqrt();
            let norm = ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
            Ok(MatrixOracle::leaf(
                AcShift {
                    model: ac.clone(),
                    m: [m[0], m[1]],
                },
                Some(norm + spread),
                norm == 0.0,
                desc,
            ))
        }
        (ModelKind::AlmostCommutative(ac), "internal") => {
            arity(call, "1", n == 1)?;
            let a = matrix(call)?;
            let size = check_square(&a, "internal")?;
            if size != ac.internal_dim() {
                return Err(Error::invalid(format!(
                    "internal: expected a {0}x{0} matrix",
                    ac.internal_dim()
                )));
            }
            let a_adj: Vec<Vec<Complex64>> = (0..size)
                .map(|i| (0..size).map(|j| a[j][i].conj()).collect())
                .collect();
            let hermitian = is_hermitian(&a);
            let spread = ac.finite_spectrum_sq().last().unwrap().sqrt()
                - ac.finite_spectrum_sq()[0].sqrt();
            Ok(MatrixOracle::leaf(
                Internal {
                    model: ac.clone(),
                    a,
                    a_adj,
                },
                Some(spread),
                hermitian,
                desc,
            ))
        }
        (ModelKind::AlmostCommutative(ac), "proj_pos") => {
            arity(call, "0", n == 0)?;
            Ok(MatrixOracle::leaf(
                AcPositive {
                    m: ac.internal_dim(),
                },
                Some(0.0),
                true,
                desc,
            ))
        }
        _ => Err(unknown(model, call)),
    }
}
