//! Recursive-descent parser for target expressions.
//!
//! ```text
//! target      := constructor | expression
//! constructor := ("ghz" | "bell" | "cnot") "(" int ("," int)* ")"
//! expression  := ["+" | "-"] term (("+" | "-") term)*
//! term        := [coefficient "*"] ket
//! coefficient := real | real "i" | "i" | "(" complex ")"
//! ket         := "|" digit+ ">"
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::KetTerm;
use crate::objective::{Target, TargetGate, TargetState};

pub fn parse_target(s: &str) -> Result<Target> {
    let mut p = Parser::new(s);
    p.skip_ws();
    let target = if p.peek().is_some_and(|c| c.is_ascii_alphabetic()) && !p.at_bare_imaginary() {
        p.constructor()?
    } else {
        Target::State(p.expression()?)
    };
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.error(format!("unexpected `{c}`")));
    }
    Ok(target)
}

/// Parses an expression that must describe a state, not a gate.
pub fn parse_state(s: &str) -> Result<TargetState> {
    match parse_target(s)? {
        Target::State(t) => Ok(t),
        Target::Gate(_) => Err(Error::InvalidTarget(format!(
            "`{s}` is a gate, not a state"
        ))),
    }
}

/// Writes a state in a form that [`parse_target`] reads back to the same coefficients.
pub fn format_state(t: &TargetState) -> String {
    let mut out = String::new();
    for (i, (ket, c)) in t.terms().iter().enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        if c.im == 0.0 {
            out.push_str(&format!("{:?}*", c.re));
        } else {
            let sign = if c.im.is_sign_negative() { '-' } else { '+' };
            out.push_str(&format!("({:?}{sign}{:?}i)*", c.re, c.im.abs()));
        }
        out.push('|');
        for m in &ket.modes {
            out.push_str(&m.to_string());
        }
        out.push('>');
    }
    out
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser {
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    /// A lone `i` used as a coefficient, as in `i*|01>`.
    fn at_bare_imaginary(&self) -> bool {
        self.peek() == Some('i')
            && !self
                .chars
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric())
    }

    fn constructor(&mut self) -> Result<Target> {
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self
            .peek()
            .filter(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            name.push(c);
            self.pos += 1;
        }
        self.expect('(')?;
        let mut args = vec![self.integer()?];
        loop {
            self.skip_ws();
            if self.peek() == Some(',') {
                self.pos += 1;
                args.push(self.integer()?);
            } else {
                break;
            }
        }
        self.expect(')')?;
        let arity = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Syntax {
                    position: start,
                    message: format!("{name} takes {n} argument(s), got {}", args.len()),
                })
            }
        };
        match name.as_str() {
            "ghz" => {
                arity(2)?;
                Ok(Target::State(TargetState::ghz(args[0], args[1])?))
            }
            "bell" => {
                arity(1)?;
                Ok(Target::State(TargetState::bell(args[0])?))
            }
            "cnot" => {
                arity(2)?;
                Ok(Target::Gate(TargetGate::cnot(args[0], args[1])?))
            }
            _ => Err(Error::Syntax {
                position: start,
                message: format!("unknown constructor `{name}`"),
            }),
        }
    }

    fn integer(&mut self) -> Result<usize> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("integer `{text}` out of range"),
        })
    }

    fn expression(&mut self) -> Result<TargetState> {
        let mut terms: Vec<(KetTerm, Complex64, usize)> = Vec::new();
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = match self.peek() {
                Some('+') => {
                    self.pos += 1;
                    1.0
                }
                Some('-') => {
                    self.pos += 1;
                    -1.0
                }
                _ if first => 1.0,
                _ => break,
            };
            first = false;
            let at = self.pos;
            let (ket, c) = self.term()?;
            terms.push((ket, c * sign, at));
        }
        if terms.is_empty() {
            return Err(self.error("expected a ket"));
        }
        let len = terms[0].0.len();
        if let Some((ket, _, at)) = terms.iter().find(|(k, _, _)| k.len() != len) {
            return Err(Error::InvalidTarget(format!(
                "ket {ket} at position {at} has {} slots, expected {len}",
                ket.len()
            )));
        }
        TargetState::new(terms.into_iter().map(|(k, c, _)| (k, c)))
    }

    fn term(&mut self) -> Result<(KetTerm, Complex64)> {
        self.skip_ws();
        let coeff = if self.peek() == Some('|') {
            Complex64::new(1.0, 0.0)
        } else {
            let c = self.coefficient()?;
            self.expect('*')?;
            c
        };
        Ok((self.ket()?, coeff))
    }

    fn coefficient(&mut self) -> Result<Complex64> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let c = self.complex()?;
                self.expect(')')?;
                Ok(c)
            }
            Some('i') => {
                self.pos += 1;
                Ok(Complex64::new(0.0, 1.0))
            }
            Some(_) => {
                let v = self.real(true)?;
                if self.peek() == Some('i') {
                    self.pos += 1;
                    Ok(Complex64::new(0.0, v))
                } else {
                    Ok(Complex64::new(v, 0.0))
                }
            }
            None => Err(self.error("expected a coefficient or ket")),
        }
    }

    /// `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`, with optional signs and whitespace.
    fn complex(&mut self) -> Result<Complex64> {
        self.skip_ws();
        let first = self.signed_part()?;
        self.skip_ws();
        match (first, self.peek()) {
            ((v, false), Some(s @ ('+' | '-'))) => {
                self.pos += 1;
                self.skip_ws();
                let (w, imag) = self.signed_part()?;
                if !imag {
                    return Err(self.error("expected an imaginary part ending in `i`"));
                }
                Ok(Complex64::new(v, if s == '-' { -w } else { w }))
            }
            ((v, false), _) => Ok(Complex64::new(v, 0.0)),
            ((v, true), _) => Ok(Complex64::new(0.0, v)),
        }
    }

    /// A signed real, optionally followed by `i`. A bare `i` counts as `1i`.
    fn signed_part(&mut self) -> Result<(f64, bool)> {
        let mut sign = 1.0;
        if let Some(s @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            if s == '-' {
                sign = -1.0;
            }
        }
        if self.peek() == Some('i') {
            self.pos += 1;
            return Ok((sign, true));
        }
        let v = self.real(false)?;
        if self.peek() == Some('i') {
            self.pos += 1;
            Ok((sign * v, true))
        } else {
            Ok((sign * v, false))
        }
    }

    fn real(&mut self, allow_sign: bool) -> Result<f64> {
        let start = self.pos;
        if allow_sign && matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        let mut digits = 0;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                digits += 1;
            } else if c != '.' {
                break;
            }
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e' | 'E')) && digits > 0 {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        if digits == 0 {
            self.pos = start;
            return Err(self.error(match self.peek() {
                Some(c) => format!("expected a number, found `{c}`"),
                None => "expected a number".to_string(),
            }));
        }
        text.parse().map_err(|_| Error::Syntax {
            position: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn ket(&mut self) -> Result<KetTerm> {
        self.expect('|')?;
        let mut modes = Vec::new();
        while let Some(c) = self.peek() {
            match c.to_digit(10) {
                Some(d) => {
                    modes.push(d as usize);
                    self.pos += 1;
                }
                None => break,
            }
        }
        if modes.is_empty() {
            return Err(self.error("a ket needs at least one digit"));
        }
        match self.bump() {
            Some('>') => Ok(KetTerm::new(modes)),
            Some(c) => {
                self.pos -= 1;
                Err(self.error(format!("expected `>` to close the ket, found `{c}`")))
            }
            None => Err(self.error("unterminated ket")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn state(s: &str) -> TargetState {
        parse_state(s).unwrap()
    }

    #[test]
    fn ghz3_from_kets() {
        let t = state("|000> + |111>");
        assert_eq!(t.terms().len(), 2);
        for c in t.terms().values() {
            assert_abs_diff_eq!(c.re, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        }
        assert_eq!(t, TargetState::ghz(3, 2).unwrap());
    }

    #[test]
    fn constructors() {
        assert_eq!(state("ghz(4,2)"), TargetState::ghz(4, 2).unwrap());
        assert_eq!(state(" bell( 3 ) "), TargetState::bell(3).unwrap());
        assert!(matches!(
            parse_target("cnot(2,2)").unwrap(),
            Target::Gate(_)
        ));
        assert!(matches!(
            parse_target("ghz(4)"),
            Err(Error::Syntax { position: 0, .. })
        ));
        assert!(matches!(parse_target("foo(1)"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn coefficients() {
        let t = state("2*|01> - 2i*|10> + (1-1i)*|11> + i*|00>");
        let s = (4.0 + 4.0 + 2.0 + 1.0f64).sqrt();
        let c =
            |k: &str| t.coefficient(&KetTerm::new(k.chars().map(|c| c as usize - 48).collect()));
        assert_abs_diff_eq!(c("01").re, 2.0 / s, epsilon = 1e-15);
        assert_abs_diff_eq!(c("10").im, -2.0 / s, epsilon = 1e-15);
        assert_abs_diff_eq!(c("11").im, -1.0 / s, epsilon = 1e-15);
        assert_abs_diff_eq!(c("00").im, 1.0 / s, epsilon = 1e-15);
        assert!(state("-|0> + |1>").coefficient(&KetTerm::new(vec![0])).re < 0.0);
        assert_eq!(state("1e-1*|0>"), state("|0>"));
    }

    #[test]
    fn ket_length_mismatch() {
        assert!(matches!(
            parse_target("|00> + |1>"),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn zero_norm() {
        assert!(matches!(
            parse_target("|01> - |01>"),
            Err(Error::InvalidTarget(_))
        ));
        assert!(matches!(
            parse_target("0*|0>"),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let pos = |s: &str| match parse_target(s) {
            Err(Error::Syntax { position, .. }) => position,
            other => panic!("{s}: {other:?}"),
        };
        assert_eq!(pos("|00"), 3);
        assert_eq!(pos("|00> +"), 6);
        assert_eq!(pos("|0a>"), 2);
        assert_eq!(pos("|00> |11>"), 5);
        assert_eq!(pos("2 |0>"), 2);
        assert_eq!(pos(""), 0);
    }

    #[test]
    fn format_roundtrip() {
        let t = state("(0.3-0.2i)*|012> + -1.5*|210> + 0.25i*|111>");
        let back = state(&format_state(&t));
        for (k, c) in t.terms() {
            assert_abs_diff_eq!((back.coefficient(k) - c).norm(), 0.0, epsilon = 1e-15);
        }
    }
}
