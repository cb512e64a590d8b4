//! Recursive-descent parser for operator expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary ('*' unary)*
//! unary   := '-' unary | factor
//! factor  := number ['i'] | 'adj' '(' expr ')' | 'pow' '(' expr ',' int ')'
//!          | ident ['(' args ')'] | '(' expr ')'
//! args    := arg (',' arg)*        (angular takes a single polynomial)
//! arg     := const | '[' row (',' row)* ']'
//! row     := '[' const (',' const)* ']'
//! const   := ['+' | '-'] number ['i'] [('+' | '-') number ['i']]
//! poly    := ['-'] mono (('+' | '-') mono)*
//! mono    := pfactor ('*' pfactor)*
//! pfactor := number | 'x' int ['^' int]
//! ```

use num_complex::Complex64;

use super::ast::{Expr, GenArg, GeneratorCall, Monomial, Polynomial};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number { value: f64, text: String, imaginary: bool },
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line: tl, column: tc });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| syntax(tl, tc, format!("malformed number `{text}`")))?;
            let mut imaginary = false;
            if i < chars.len()
                && chars[i] == 'i'
                && !chars
                    .get(i + 1)
                    .is_some_and(|n| n.is_ascii_alphanumeric() || *n == '_')
            {
                imaginary = true;
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Number { value, text, imaginary },
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                column: tc,
            });
            continue;
        }
        return Err(syntax(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> Error {
        let t = self.peek();
        syntax(t.line, t.column, message)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}, found {}", describe(&self.peek().tok))))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            lhs = Expr::mul(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Tok::Minus) {
            Ok(Expr::neg(self.unary()?))
        } else {
            self.factor()
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Number { value, imaginary, .. } => Ok(Expr::Scalar(if imaginary {
                Complex64::new(0.0, value)
            } else {
                Complex64::new(value, 0.0)
            })),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "i" => Ok(Expr::Scalar(Complex64::new(0.0, 1.0))),
            Tok::Ident(name) if name == "adj" => {
                self.expect(Tok::LParen, "`(` after adj")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::adj(e))
            }
            Tok::Ident(name) if name == "pow" => {
                self.expect(Tok::LParen, "`(` after pow")?;
                let e = self.expr()?;
                self.expect(Tok::Comma, "`,` in pow")?;
                let p = self.integer("exponent")?;
                let p = u32::try_from(p)
                    .map_err(|_| syntax(t.line, t.column, "pow exponent must be a non-negative integer"))?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::pow(e, p))
            }
            Tok::Ident(name) => {
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) {
                    if name == "angular" {
                        args.push(GenArg::Poly(self.polynomial()?));
                    } else if !matches!(self.peek().tok, Tok::RParen) {
                        args.push(self.arg()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.arg()?);
                        }
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                }
                Ok(Expr::Gen(GeneratorCall { name, args }))
            }
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected an operand, found {}", describe(&other)),
            )),
        }
    }

    /// Unsigned integer literal.
    fn integer(&mut self, what: &str) -> Result<i64> {
        let t = self.next();
        match &t.tok {
            Tok::Number { text, imaginary: false, .. } if text.chars().all(|c| c.is_ascii_digit()) => text
                .parse()
                .map_err(|_| syntax(t.line, t.column, format!("{what} out of range"))),
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected integer {what}, found {}", describe(other)),
            )),
        }
    }

    fn arg(&mut self) -> Result<GenArg> {
        if self.eat(&Tok::LBracket) {
            let mut rows = vec![self.row()?];
            while self.eat(&Tok::Comma) {
                rows.push(self.row()?);
            }
            self.expect(Tok::RBracket, "`]`")?;
            Ok(GenArg::Matrix(rows))
        } else {
            Ok(GenArg::Scalar(self.constant()?))
        }
    }

    fn row(&mut self) -> Result<Vec<Complex64>> {
        self.expect(Tok::LBracket, "`[` starting a matrix row")?;
        let mut row = vec![self.constant()?];
        while self.eat(&Tok::Comma) {
            row.push(self.constant()?);
        }
        self.expect(Tok::RBracket, "`]`")?;
        Ok(row)
    }

    fn signed_number(&mut self) -> Result<Complex64> {
        let sign = if self.eat(&Tok::Minus) {
            -1.0
        } else {
            self.eat(&Tok::Plus);
            1.0
        };
        let t = self.next();
        match t.tok {
            Tok::Number { value, imaginary, .. } => Ok(if imaginary {
                Complex64::new(0.0, sign * value)
            } else {
                Complex64::new(sign * value, 0.0)
            }),
            Tok::Ident(name) if name == "i" => Ok(Complex64::new(0.0, sign)),
            other => Err(syntax(
                t.line,
                t.column,
                format!("expected a number, found {}", describe(&other)),
            )),
        }
    }

    fn constant(&mut self) -> Result<Complex64> {
        let first = self.signed_number()?;
        if matches!(self.peek().tok, Tok::Plus | Tok::Minus) {
            let second = self.signed_number()?;
            Ok(first + second)
        } else {
            Ok(first)
        }
    }

    fn polynomial(&mut self) -> Result<Polynomial> {
        let mut terms = Vec::new();
        let mut sign = if self.eat(&Tok::Minus) { -1.0 } else { 1.0 };
        loop {
            let mut m = self.monomial()?;
            m.coeff *= sign;
            terms.push(m);
            if self.eat(&Tok::Plus) {
                sign = 1.0;
            } else if self.eat(&Tok::Minus) {
                sign = -1.0;
            } else {
                return Ok(Polynomial { terms });
            }
        }
    }

    fn monomial(&mut self) -> Result<Monomial> {
        let mut coeff = 1.0;
        let mut exps: Vec<u32> = Vec::new();
        loop {
            let t = self.next();
            match &t.tok {
                Tok::Number { value, imaginary: false, .. } => coeff *= value,
                Tok::Ident(v) if v.starts_with('x') && v.len() > 1 && v[1..].chars().all(|c| c.is_ascii_digit()) => {
                    let idx: usize = v[1..]
                        .parse()
                        .ok()
                        .filter(|&i| i >= 1)
                        .ok_or_else(|| syntax(t.line, t.column, "variables are x1, x2, …"))?;
                    let e = if self.eat(&Tok::Caret) {
                        u32::try_from(self.integer("power")?)
                            .map_err(|_| syntax(t.line, t.column, "power out of range"))?
                    } else {
                        1
                    };
                    if exps.len() < idx {
                        exps.resize(idx, 0);
                    }
                    exps[idx - 1] += e;
                }
                other => {
                    return Err(syntax(
                        t.line,
                        t.column,
                        format!("expected a polynomial factor, found {}", describe(other)),
                    ))
                }
            }
            if !self.eat(&Tok::Star) {
                break;
            }
        }
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Ok(Monomial { coeff, exps })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Number { text, imaginary, .. } => {
            format!("number `{text}{}`", if *imaginary { "i" } else { "" })
        }
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Caret => "`^`".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses an expression without consulting any model.
pub fn parse(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(syntax(1, 1, "empty expression"));
    }
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", describe(&p.peek().tok))));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("a - b - c * d").unwrap();
        let g = |n: &str| Expr::gen(n, vec![]);
        assert_eq!(
            e,
            Expr::sub(Expr::sub(g("a"), g("b")), Expr::mul(g("c"), g("d")))
        );
        assert_eq!(parse("-a * b").unwrap(), Expr::mul(Expr::neg(g("a")), g("b")));
    }

    #[test]
    fn scalars() {
        assert_eq!(parse("2.5").unwrap(), Expr::Scalar(c(2.5, 0.0)));
        assert_eq!(parse("3i").unwrap(), Expr::Scalar(c(0.0, 3.0)));
        assert_eq!(parse("1e-3").unwrap(), Expr::Scalar(c(1e-3, 0.0)));
        assert_eq!(parse("i").unwrap(), Expr::Scalar(c(0.0, 1.0)));
        assert_eq!(
            parse("1 + 2i").unwrap(),
            Expr::add(Expr::Scalar(c(1.0, 0.0)), Expr::Scalar(c(0.0, 2.0)))
        );
    }

    #[test]
    fn generator_arguments() {
        let e = parse("mult(0, -1, 1-0.5i)").unwrap();
        assert_eq!(
            e,
            Expr::gen(
                "mult",
                vec![
                    GenArg::Scalar(c(0.0, 0.0)),
                    GenArg::Scalar(c(-1.0, 0.0)),
                    GenArg::Scalar(c(1.0, -0.5))
                ]
            )
        );
        let m = parse("internal([[1, 2i], [-2i, 0]])").unwrap();
        assert_eq!(
            m,
            Expr::gen(
                "internal",
                vec![GenArg::Matrix(vec![vec![c(1.0, 0.0), c(0.0, 2.0)], vec![c(0.0, -2.0), c(0.0, 0.0)]])]
            )
        );
        assert_eq!(parse("id()").unwrap(), parse("id").unwrap());
    }

    #[test]
    fn polynomial_arguments() {
        let e = parse("angular(x1^2 - x2^2)").unwrap();
        let Expr::Gen(g) = e else { panic!() };
        let GenArg::Poly(p) = &g.args[0] else { panic!() };
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.terms[1], Monomial { coeff: -1.0, exps: vec![0, 2] });
        assert!((p.eval(&[0.6, 0.8]) - (0.36 - 0.64)).abs() < 1e-15);
        let q = parse("angular(2*x1*x2*x1)").unwrap();
        let Expr::Gen(g) = q else { panic!() };
        assert_eq!(g.args[0], GenArg::Poly(Polynomial { terms: vec![Monomial { coeff: 2.0, exps: vec![2, 1] }] }));
    }

    #[test]
    fn error_positions() {
        match parse("u(1,0) +\n  * u(0,1)") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        match parse("pow(id, 1.5)") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 9)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("   "), Err(Error::Syntax { .. })));
        assert!(matches!(parse("u(1,0))"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("id $"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn printing_round_trips() {
        for src in [
            "u(1, 0) + adj(u(1, 0))",
            "pow(mult(0, 1, 1), 2)",
            "-2 * (toeplitz(0, 1, 1) - 3i)",
            "a - (b - c)",
            "a * (b * c)",
            "--a - -b",
            "angular(-1*x1^2 + 0.5*x2 - 3)",
            "internal([[1, 0+2i], [0-2i, -1]])",
            "adj(-u(1, 2)) * pow(id, 0)",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} -> {printed}");
        }
    }
}
