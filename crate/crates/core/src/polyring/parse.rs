use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::MixedPoly;
use super::rational::{ComplexRational, Rational};
use super::PolyError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Imag,
    Z1,
    Z2,
    Func(Func),
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Caret,
    End,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Func {
    Conj,
    Abs2,
    Re,
    Im,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

fn syntax(offset: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Syntax { offset, message: msg.into() }
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, PolyError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        lx.lex()?;
        Ok(lx.toks)
    }

    fn lex(&mut self) -> Result<(), PolyError> {
        let bytes = self.src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'(' => self.push(Tok::LParen, start, &mut i, 1),
                b')' => self.push(Tok::RParen, start, &mut i, 1),
                b'+' => self.push(Tok::Plus, start, &mut i, 1),
                b'-' => self.push(Tok::Minus, start, &mut i, 1),
                b'*' => self.push(Tok::Star, start, &mut i, 1),
                b'^' => self.push(Tok::Caret, start, &mut i, 1),
                b'0'..=b'9' => {
                    let num = self.digits(&mut i);
                    let mut value = Rational::from_integer(num);
                    // a '/' directly after an integer is part of the literal
                    if i < bytes.len() && bytes[i] == b'/' {
                        i += 1;
                        if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                            return Err(syntax(i, "expected denominator"));
                        }
                        let den_at = i;
                        let den = self.digits(&mut i);
                        if den.is_zero() {
                            return Err(syntax(den_at, "zero denominator"));
                        }
                        value /= Rational::from_integer(den);
                    }
                    self.toks.push((Tok::Num(value), start));
                    if i < bytes.len() && bytes[i] == b'i' && !self.ident_continues(i + 1) {
                        self.toks.push((Tok::Imag, i));
                        i += 1;
                    }
                }
                b'a'..=b'z' | b'A'..=b'Z' => {
                    let mut j = i;
                    while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_') {
                        j += 1;
                    }
                    let word = &self.src[i..j];
                    let tok = match word {
                        "z1" => Tok::Z1,
                        "z2" => Tok::Z2,
                        "i" => Tok::Imag,
                        "conj" => Tok::Func(Func::Conj),
                        "abs2" => Tok::Func(Func::Abs2),
                        "Re" => Tok::Func(Func::Re),
                        "Im" => Tok::Func(Func::Im),
                        _ => return Err(syntax(start, format!("unknown token '{word}'"))),
                    };
                    self.toks.push((tok, start));
                    i = j;
                }
                _ => {
                    let ch = self.src[i..].chars().next().unwrap_or('?');
                    return Err(syntax(start, format!("unexpected character '{ch}'")));
                }
            }
        }
        self.toks.push((Tok::End, self.src.len()));
        Ok(())
    }

    fn ident_continues(&self, i: usize) -> bool {
        self.src.as_bytes().get(i).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
    }

    fn push(&mut self, t: Tok, start: usize, i: &mut usize, len: usize) {
        self.toks.push((t, start));
        *i += len;
    }

    fn digits(&self, i: &mut usize) -> BigInt {
        let bytes = self.src.as_bytes();
        let s = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        self.src[s..*i].parse().expect("digit run")
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), PolyError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<MixedPoly, PolyError> {
        let mut acc = match self.peek() {
            Tok::Minus => {
                self.bump();
                self.term()?.neg()
            }
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MixedPoly, PolyError> {
        let mut acc = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MixedPoly, PolyError> {
        let base = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let at = self.offset();
            match self.bump() {
                Tok::Num(r) if r.is_integer() => {
                    let e: u32 = r
                        .to_integer()
                        .try_into()
                        .map_err(|_| syntax(at, "exponent out of range"))?;
                    Ok(base.pow(e))
                }
                _ => Err(syntax(at, "expected natural exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<MixedPoly, PolyError> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(r) => {
                if *self.peek() == Tok::Imag {
                    self.bump();
                    Ok(MixedPoly::constant(ComplexRational::new(Rational::zero(), r)))
                } else {
                    Ok(MixedPoly::constant(ComplexRational::real(r)))
                }
            }
            Tok::Imag => Ok(MixedPoly::constant(ComplexRational::i())),
            Tok::Z1 => Ok(MixedPoly::z1()),
            Tok::Z2 => Ok(MixedPoly::z2()),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Func(f) => {
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let half = Rational::new(1.into(), 2.into());
                Ok(match f {
                    Func::Conj => e.conj(),
                    Func::Abs2 => e.mul(&e.conj()),
                    Func::Re => e.add(&e.conj()).scale(&half),
                    Func::Im => e
                        .sub(&e.conj())
                        .scale_complex(&ComplexRational::new(Rational::zero(), -half)),
                })
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            _ => Err(syntax(at, "expected operand")),
        }
    }
}

/// Parses an expression in `z1`, `z2`, `conj`, `abs2`, `Re`, `Im` with
/// rational (optionally imaginary) coefficients.
///
/// The result may be real or holomorphic; mixed non-real results are
/// accepted here and rejected by [`parse_real`].
pub fn parse_poly(text: &str) -> Result<MixedPoly, PolyError> {
    let toks = Lexer::run(text)?;
    let mut p = Parser { toks, pos: 0 };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "unexpected token"));
    }
    Ok(out)
}

/// Parses an expression that must define a real-valued function.
pub fn parse_real(text: &str) -> Result<MixedPoly, PolyError> {
    let p = parse_poly(text)?;
    if !p.is_real() {
        return Err(PolyError::NotReal);
    }
    Ok(p)
}

/// Parses an expression that must be holomorphic (no conjugates survive).
pub fn parse_holomorphic(text: &str) -> Result<MixedPoly, PolyError> {
    let p = parse_poly(text)?;
    if !p.is_holomorphic() {
        return Err(PolyError::NotHolomorphic);
    }
    Ok(p)
}

/// Serialized as its canonical text form.
impl serde::Serialize for MixedPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for MixedPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_poly(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::poly::Monomial;
    use crate::polyring::rational::rat;

    #[test]
    fn abs2_squared() {
        let p = parse_poly("abs2(z1)^2").unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff(&Monomial::new(2, 2, 0, 0)), ComplexRational::one());
    }

    #[test]
    fn real_part_sugar() {
        let p = parse_real("(15/7)*abs2(z1)*Re(z1^6)").unwrap();
        let c = ComplexRational::real(rat(15, 14));
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.coeff(&Monomial::new(7, 1, 0, 0)), c);
        assert_eq!(p.coeff(&Monomial::new(1, 7, 0, 0)), c);
    }

    #[test]
    fn unknown_token_offset() {
        match parse_poly("z1 + q") {
            Err(PolyError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn imaginary_part_is_real() {
        let p = parse_real("Im(z1^2)").unwrap();
        // Im(z^2) = (z^2 - zbar^2)/(2i)
        assert_eq!(p.coeff(&Monomial::new(2, 0, 0, 0)), ComplexRational::new(rat(0, 1), rat(-1, 2)));
    }

    #[test]
    fn rejects_non_real() {
        assert!(matches!(parse_real("i*abs2(z1)"), Err(PolyError::NotReal)));
        assert!(parse_holomorphic("z1*z2 + 3i*z1").is_ok());
    }

    #[test]
    fn syntax_errors() {
        assert!(parse_poly("z1^").is_err());
        assert!(parse_poly("(z1").is_err());
        assert!(parse_poly("z1 z2").is_err());
        assert!(parse_poly("1/0").is_err());
        assert!(parse_poly("").is_err());
    }

    #[test]
    fn canonical_round_trip() {
        for src in [
            "abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)",
            "abs2(z1)*abs2(z2) + abs2(z2)^3",
            "(1/2 - 3/4i)*z1*conj(z2) + (1/2 + 3/4i)*conj(z1)*z2 - 7",
            "i*z1^2 - i*conj(z1)^2",
            "0",
        ] {
            let p = parse_poly(src).unwrap();
            let s = p.to_string();
            assert_eq!(parse_poly(&s).unwrap(), p, "{s}");
        }
    }
}
