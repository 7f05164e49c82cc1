use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{rat_int, ComplexRational, Rational};

/// Exponent quadruple of `z1^a conj(z1)^b z2^m conj(z2)^n`.
///
/// The derived ordering is lexicographic on `(a, b, m, n)`, which is the
/// canonical printing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub a: u32,
    pub b: u32,
    pub m: u32,
    pub n: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { a: 0, b: 0, m: 0, n: 0 };

    pub fn new(a: u32, b: u32, m: u32, n: u32) -> Self {
        Self { a, b, m, n }
    }

    pub fn degree(&self) -> u32 {
        self.a + self.b + self.m + self.n
    }

    /// Degrees in the first and second variable, `(a+b, m+n)`.
    pub fn bidegree(&self) -> (u32, u32) {
        (self.a + self.b, self.m + self.n)
    }

    /// Exponents of the conjugate monomial.
    pub fn conj(&self) -> Self {
        Self::new(self.b, self.a, self.n, self.m)
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        Monomial::new(self.a + o.a, self.b + o.b, self.m + o.m, self.n + o.n)
    }

    pub fn is_pluriharmonic(&self) -> bool {
        (self.b == 0 && self.n == 0) || (self.a == 0 && self.m == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Var {
    Z1,
    Z2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivKind {
    Holomorphic,
    Antiholomorphic,
}

/// Weighted homogeneity data: every monomial satisfies
/// `(a+b)/m1 + (m+n)/m2 = r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSignature {
    pub m1: Rational,
    pub m2: Rational,
    pub r: Rational,
}

/// Polynomial in `z1, conj(z1), z2, conj(z2)` with Gaussian-rational
/// coefficients. Zero coefficients are never stored.
///
/// Most polynomials in this crate are real-valued (the coefficient at
/// `(a,b,m,n)` is the conjugate of the one at `(b,a,n,m)`); holomorphic
/// polynomials (`b = n = 0` everywhere) share the same type.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MixedPoly {
    terms: BTreeMap<Monomial, ComplexRational>,
}

impl MixedPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: ComplexRational) -> Self {
        Self::term(c, Monomial::ONE)
    }

    pub fn one() -> Self {
        Self::constant(ComplexRational::one())
    }

    pub fn term(c: ComplexRational, mono: Monomial) -> Self {
        let mut p = Self::zero();
        p.add_term(mono, &c);
        p
    }

    pub fn z1() -> Self {
        Self::term(ComplexRational::one(), Monomial::new(1, 0, 0, 0))
    }

    pub fn z2() -> Self {
        Self::term(ComplexRational::one(), Monomial::new(0, 0, 1, 0))
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, ComplexRational)>>(it: I) -> Self {
        let mut p = Self::zero();
        for (mono, c) in it {
            p.add_term(mono, &c);
        }
        p
    }

    pub fn add_term(&mut self, mono: Monomial, c: &ComplexRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono).or_insert_with(ComplexRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&mono);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ComplexRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, mono: &Monomial) -> ComplexRational {
        self.terms.get(mono).cloned().unwrap_or_else(ComplexRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == Monomial::ONE)
    }

    /// Maximal total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Minimal total degree among the nonzero terms.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn is_holomorphic(&self) -> bool {
        self.terms.keys().all(|m| m.b == 0 && m.n == 0)
    }

    /// Complex conjugate of the function `z -> p(z)`.
    pub fn conj(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.conj(), c.conj())).collect(),
        }
    }

    /// Reality invariant: `p` equals its own conjugate.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|(m, c)| match self.terms.get(&m.conj()) {
            Some(d) => *d == c.conj(),
            None => false,
        })
    }

    pub fn add(&self, o: &MixedPoly) -> MixedPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, o: &MixedPoly) -> MixedPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, &-c);
        }
        out
    }

    pub fn neg(&self) -> MixedPoly {
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn mul(&self, o: &MixedPoly) -> MixedPoly {
        let mut out = MixedPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, s: &Rational) -> MixedPoly {
        if s.is_zero() {
            return MixedPoly::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, c.scale(s))).collect(),
        }
    }

    pub fn scale_complex(&self, s: &ComplexRational) -> MixedPoly {
        if s.is_zero() {
            return MixedPoly::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MixedPoly {
        let mut acc = MixedPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal Wirtinger derivative `d/dz_j` or `d/dzbar_j`.
    pub fn wirtinger(&self, var: Var, kind: DerivKind) -> MixedPoly {
        let mut out = MixedPoly::zero();
        for (mono, c) in &self.terms {
            let (e, dm) = match (var, kind) {
                (Var::Z1, DerivKind::Holomorphic) => (mono.a, Monomial { a: mono.a.wrapping_sub(1), ..*mono }),
                (Var::Z1, DerivKind::Antiholomorphic) => (mono.b, Monomial { b: mono.b.wrapping_sub(1), ..*mono }),
                (Var::Z2, DerivKind::Holomorphic) => (mono.m, Monomial { m: mono.m.wrapping_sub(1), ..*mono }),
                (Var::Z2, DerivKind::Antiholomorphic) => (mono.n, Monomial { n: mono.n.wrapping_sub(1), ..*mono }),
            };
            if e > 0 {
                out.add_term(dm, &c.scale(&rat_int(e as i64)));
            }
        }
        out
    }

    /// Terms that are purely holomorphic or purely antiholomorphic
    /// (the constant term included).
    pub fn pluriharmonic_part(&self) -> MixedPoly {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.is_pluriharmonic())
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Weight `r` such that every monomial satisfies
    /// `(a+b)/m1 + (m+n)/m2 = r`, if one exists.
    pub fn weight(&self, m1: &Rational, m2: &Rational) -> Option<Rational> {
        let mut r: Option<Rational> = None;
        for mono in self.terms.keys() {
            let (d1, d2) = mono.bidegree();
            let w = rat_int(d1 as i64) / m1 + rat_int(d2 as i64) / m2;
            match &r {
                None => r = Some(w),
                Some(r0) if *r0 != w => return None,
                _ => {}
            }
        }
        r
    }

    /// Infers `(m1, m2)` with weight one.
    ///
    /// A polynomial whose monomials share one total degree `d` is read as
    /// homogeneous, `(d, d)`. Otherwise two distinct bidegrees fix the
    /// weights through a 2x2 linear solve, and the result must fit every
    /// term with positive weights.
    pub fn infer_weights(&self) -> Option<WeightSignature> {
        let bidegrees: Vec<(u32, u32)> = {
            let mut v: Vec<_> = self.terms.keys().map(Monomial::bidegree).collect();
            v.sort();
            v.dedup();
            v
        };
        let first = *bidegrees.first()?;
        let total = first.0 + first.1;
        if total > 0 && bidegrees.iter().all(|(x, y)| x + y == total) {
            let d = rat_int(total as i64);
            return Some(WeightSignature { m1: d.clone(), m2: d, r: Rational::one() });
        }
        // (d1/m1 + d2/m2 = 1) in the unknowns u = 1/m1, v = 1/m2
        for i in 0..bidegrees.len() {
            for j in i + 1..bidegrees.len() {
                let (a1, b1) = bidegrees[i];
                let (a2, b2) = bidegrees[j];
                let det = a1 as i64 * b2 as i64 - a2 as i64 * b1 as i64;
                if det == 0 {
                    continue;
                }
                let det = rat_int(det);
                let u = rat_int(b2 as i64 - b1 as i64) / &det;
                let v = rat_int(a1 as i64 - a2 as i64) / &det;
                if !u.is_positive() || !v.is_positive() {
                    return None;
                }
                let m1 = u.recip();
                let m2 = v.recip();
                return match self.weight(&m1, &m2) {
                    Some(r) if r.is_one() => Some(WeightSignature { m1, m2, r }),
                    _ => None,
                };
            }
        }
        None
    }

    /// Whether every monomial has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.degree()?;
        if self.terms.keys().all(|m| m.degree() == d) {
            Some(d)
        } else {
            None
        }
    }

    /// `Some((2p, 2q))` when every monomial has z1-degree `2p` and z2-degree `2q`.
    pub fn bidegree(&self) -> Option<(u32, u32)> {
        let first = self.terms.keys().next()?.bidegree();
        if self.terms.keys().all(|m| m.bidegree() == first) {
            Some(first)
        } else {
            None
        }
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn evaluate_exact(&self, z1: &ComplexRational, z2: &ComplexRational) -> ComplexRational {
        let (z1c, z2c) = (z1.conj(), z2.conj());
        let mut acc = ComplexRational::zero();
        for (m, c) in &self.terms {
            let v = &(&(&z1.pow(m.a) * &z1c.pow(m.b)) * &z2.pow(m.m)) * &z2c.pow(m.n);
            acc += &(c * &v);
        }
        acc
    }

    /// Exact real value at a Gaussian-rational point; `None` when the
    /// polynomial is not real there.
    pub fn evaluate_real_exact(&self, z1: &ComplexRational, z2: &ComplexRational) -> Option<Rational> {
        let v = self.evaluate_exact(z1, z2);
        v.is_real().then_some(v.re)
    }

    /// Floating evaluation returning the full complex value.
    pub fn evaluate_complex(&self, z: [Complex64; 2]) -> Complex64 {
        self.compile().eval(z)
    }

    /// Floating evaluation of a real polynomial; the imaginary residue is
    /// discarded.
    pub fn evaluate(&self, z: [Complex64; 2]) -> f64 {
        self.evaluate_complex(z).re
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }

    /// Sum of coefficient magnitudes.
    pub fn coeff_l1(&self) -> f64 {
        self.terms.values().map(ComplexRational::abs_l1).sum()
    }

    /// Lowest common denominator of all coefficient parts.
    pub fn common_denominator(&self) -> num_bigint::BigInt {
        let mut l = num_bigint::BigInt::one();
        for c in self.terms.values() {
            l = l.lcm(c.re.denom());
            l = l.lcm(c.im.denom());
        }
        l
    }
}

const STACK_POWERS: usize = 33;

/// Floating-point copy of a [`MixedPoly`] for fast repeated evaluation.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<([usize; 4], Complex64)>,
    max_exp: [usize; 4],
}

impl CompiledPoly {
    pub fn new(p: &MixedPoly) -> Self {
        let mut max_exp = [0usize; 4];
        let terms = p
            .terms()
            .map(|(m, c)| {
                let e = [m.a as usize, m.b as usize, m.m as usize, m.n as usize];
                for k in 0..4 {
                    max_exp[k] = max_exp[k].max(e[k]);
                }
                (e, c.to_c64())
            })
            .collect();
        Self { terms, max_exp }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: [Complex64; 2]) -> Complex64 {
        if self.terms.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let base = [z[0], z[0].conj(), z[1], z[1].conj()];
        if self.max_exp.iter().all(|&e| e < STACK_POWERS) {
            let mut pows = [[Complex64::new(1.0, 0.0); STACK_POWERS]; 4];
            for k in 0..4 {
                for e in 1..=self.max_exp[k] {
                    pows[k][e] = pows[k][e - 1] * base[k];
                }
            }
            return self.sum(|k, e| pows[k][e]);
        }
        let mut pows: [Vec<Complex64>; 4] = Default::default();
        for k in 0..4 {
            let mut v = Vec::with_capacity(self.max_exp[k] + 1);
            let mut acc = Complex64::new(1.0, 0.0);
            v.push(acc);
            for _ in 0..self.max_exp[k] {
                acc *= base[k];
                v.push(acc);
            }
            pows[k] = v;
        }
        self.sum(|k, e| pows[k][e])
    }

    fn sum(&self, pow: impl Fn(usize, usize) -> Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            s += c * pow(0, e[0]) * pow(1, e[1]) * pow(2, e[2]) * pow(3, e[3]);
        }
        s
    }

    pub fn eval_real(&self, z: [Complex64; 2]) -> f64 {
        self.eval(z).re
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (name, e) in [("z1", m.a), ("conj(z1)", m.b), ("z2", m.m), ("conj(z2)", m.n)] {
        if e == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        if e == 1 {
            write!(f, "{name}")?;
        } else {
            write!(f, "{name}^{e}")?;
        }
    }
    Ok(())
}

/// Canonical text form: monomials in lexicographic order, coefficients as
/// `a/b`, `c/di` or `(a/b + c/di)`. Parsing it back gives the same polynomial.
impl fmt::Display for MixedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let constant = *m == Monomial::ONE;
            // real or purely imaginary coefficients carry their sign outside
            let (negative, body) = if c.im.is_zero() || c.re.is_zero() {
                let (v, unit) = if c.im.is_zero() { (&c.re, "") } else { (&c.im, "i") };
                let mag = v.abs();
                let body = if mag.is_one() && !constant {
                    if unit.is_empty() { String::new() } else { "i".to_string() }
                } else {
                    format!("{mag}{unit}")
                };
                (v.is_negative(), body)
            } else {
                (false, c.to_string())
            };
            match (idx, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{body}")?;
            if !constant {
                if !body.is_empty() {
                    write!(f, "*")?;
                }
                write_monomial(f, m)?;
            }
        }
        Ok(())
    }
}
