use std::collections::BTreeMap;

use super::poly::{MixedPoly, Monomial};
use super::rational::ComplexRational;

/// Lazily filled table of powers `f^0, f^1, ...`.
struct Powers {
    base: MixedPoly,
    table: Vec<MixedPoly>,
}

impl Powers {
    fn new(base: MixedPoly) -> Self {
        Self { base, table: vec![MixedPoly::one()] }
    }

    fn get(&mut self, e: u32) -> &MixedPoly {
        while self.table.len() <= e as usize {
            let next = self.table.last().expect("nonempty").mul(&self.base);
            self.table.push(next);
        }
        &self.table[e as usize]
    }
}

/// Replaces `z1` by `f1` and `z2` by `f2` (and the conjugates by the
/// conjugates). `f1` and `f2` are expected to be holomorphic.
pub fn substitute(p: &MixedPoly, f1: &MixedPoly, f2: &MixedPoly) -> MixedPoly {
    let mut p1 = Powers::new(f1.clone());
    let mut p1c = Powers::new(f1.conj());
    let mut p2 = Powers::new(f2.clone());
    let mut p2c = Powers::new(f2.conj());
    let mut out = MixedPoly::zero();
    for (m, c) in p.terms() {
        let t = p1.get(m.a).mul(p1c.get(m.b));
        let t = t.mul(p2.get(m.m)).mul(p2c.get(m.n));
        out = out.add(&t.scale_complex(c));
    }
    out
}

/// `p(z1 + c z2, z2)`.
pub fn shear(p: &MixedPoly, c: &ComplexRational) -> MixedPoly {
    let f1 = MixedPoly::z1().add(&MixedPoly::z2().scale_complex(c));
    substitute(p, &f1, &MixedPoly::z2())
}

/// `p(z1, z2 + c z1)`.
pub fn shear_second(p: &MixedPoly, c: &ComplexRational) -> MixedPoly {
    let f2 = MixedPoly::z2().add(&MixedPoly::z1().scale_complex(c));
    substitute(p, &MixedPoly::z1(), &f2)
}

/// `p(z2, z1)`.
pub fn swap(p: &MixedPoly) -> MixedPoly {
    MixedPoly::from_terms(p.terms().map(|(m, c)| (Monomial::new(m.m, m.n, m.a, m.b), c.clone())))
}

/// Pullback `p(z1^s1, z2^s2)`.
pub fn power(p: &MixedPoly, s1: u32, s2: u32) -> MixedPoly {
    MixedPoly::from_terms(
        p.terms()
            .map(|(m, c)| (Monomial::new(m.a * s1, m.b * s1, m.m * s2, m.n * s2), c.clone())),
    )
}

/// Restriction to the line `z1 = zeta w, z2 = w` as a polynomial in `w`,
/// stored in the first variable slot.
pub fn restrict_line(p: &MixedPoly, zeta: &ComplexRational) -> MixedPoly {
    let zc = zeta.conj();
    MixedPoly::from_terms(p.terms().map(|(m, c)| {
        let v = &(c * &zeta.pow(m.a)) * &zc.pow(m.b);
        (Monomial::new(m.a + m.m, m.b + m.n, 0, 0), v)
    }))
}

/// Restriction to the line `z2 = 0` (the line at infinity in the `zeta`
/// chart), as a polynomial in `z1`.
pub fn restrict_infinity(p: &MixedPoly) -> MixedPoly {
    MixedPoly::from_terms(p.terms().filter(|(m, _)| m.m == 0 && m.n == 0).map(|(m, c)| (*m, c.clone())))
}

/// Coefficients `c_mn(zeta)` of `p(zeta w, w) = sum c_mn(zeta) w^m conj(w)^n`
/// with `zeta` formal; each `c_mn` is a polynomial in `zeta` stored in the
/// first variable slot.
pub fn line_family(p: &MixedPoly) -> BTreeMap<(u32, u32), MixedPoly> {
    let mut out: BTreeMap<(u32, u32), MixedPoly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key = (m.a + m.m, m.b + m.n);
        out.entry(key).or_default().add_term(Monomial::new(m.a, m.b, 0, 0), c);
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// `u(f(z), conj(f(z)))` for `u` in one variable (slot `z1`) and
/// holomorphic `f`.
pub fn compose(u: &MixedPoly, f: &MixedPoly) -> MixedPoly {
    substitute(u, f, &MixedPoly::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse::parse_poly;
    use crate::polyring::rational::rat;

    fn p(s: &str) -> MixedPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn line_family_of_product() {
        let fam = line_family(&p("abs2(z1*z2)"));
        assert_eq!(fam.len(), 1);
        assert_eq!(fam[&(2, 2)], p("abs2(z1)"));
    }

    #[test]
    fn power_pullback() {
        assert_eq!(
            power(&p("abs2(z1)*abs2(z2) + abs2(z2)^3"), 2, 1),
            p("abs2(z1)^2*abs2(z2) + abs2(z2)^3")
        );
    }

    #[test]
    fn shear_expands() {
        let c = ComplexRational::new(rat(1, 2), rat(1, 1));
        let s = shear(&p("abs2(z1)"), &c);
        let expect = p("abs2(z1 + (1/2 + i)*z2)");
        assert_eq!(s, expect);
        assert!(s.is_real());
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose(&p("abs2(z1)"), &p("z1*z2")), p("abs2(z1*z2)"));
        assert_eq!(compose(&p("Re(z1)"), &p("z1^2")), p("Re(z1^2)"));
        let g = p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)");
        assert_eq!(
            compose(&g, &p("z1*z2")),
            p("abs2(z1*z2)^4 + (15/7)*abs2(z1*z2)*Re(z1^6*z2^6)")
        );
    }

    #[test]
    fn restrict_line_matches_family() {
        let q = p("abs2(z1)^2 + Re(z1^2*conj(z2)^2) + abs2(z2)*abs2(z1)");
        let zeta = ComplexRational::new(rat(2, 3), rat(-1, 5));
        let direct = restrict_line(&q, &zeta);
        let mut via = MixedPoly::zero();
        for ((m, n), c) in line_family(&q) {
            let v = c.evaluate_exact(&zeta, &ComplexRational::zero());
            via.add_term(Monomial::new(m, n, 0, 0), &v);
        }
        assert_eq!(direct, via);
    }
}
