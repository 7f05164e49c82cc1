//! Exact recovery of `U` and `F` with `p = U(F)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::Signed;

use super::{check_property_b, StructureError};
use crate::levi::complex_hessian;
use crate::polyring::{compose, rat_int, ComplexRational, DerivKind, MixedPoly, Monomial, Var};

/// `p = U(F)` with `F` holomorphic and `U` a real polynomial in one
/// variable (held in the `z1` slot).
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub f: MixedPoly,
    pub u: MixedPoly,
    /// `deg U = 2ν`.
    pub nu: u32,
    /// `U(F) - p` vanishes identically.
    pub residual_zero: bool,
    /// `(d, D)` when `F = z1^d z2^D`.
    pub exponents: Option<(u32, u32)>,
    /// Least sampled value of `ΔU` on the unit circle.
    pub laplacian_min: f64,
    /// Largest relative mismatch `|p - U(c)|` over points found on level
    /// sets `F = c`.
    pub level_check: Option<f64>,
}

/// `ΔU(e^{iθ})` at `samples` equally spaced angles.
pub fn circle_laplacian(u: &MixedPoly, samples: usize) -> Vec<f64> {
    let lap = u
        .wirtinger(Var::Z1, DerivKind::Holomorphic)
        .wirtinger(Var::Z1, DerivKind::Antiholomorphic)
        .scale(&rat_int(4))
        .compile();
    (0..samples)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / samples as f64;
            lap.eval_real([Complex64::from_polar(1.0, th), Complex64::new(0.0, 0.0)])
        })
        .collect()
}

/// Checks `ΔU ≥ -1e-10 ‖U‖` on the circle and a positive `|ξ|^{2ν}`
/// coefficient; returns the sampled minimum.
fn check_subharmonic(u: &MixedPoly, nu: u32) -> Result<f64, StructureError> {
    let samples = 3600;
    let lap = circle_laplacian(u, samples);
    let (k, min) = lap
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    let lead = u.coeff(&Monomial::new(nu, nu, 0, 0));
    if min < -1e-10 * u.coeff_l1() || !lead.re.is_positive() {
        return Err(StructureError::NotSubharmonic {
            theta: 2.0 * PI * k as f64 / samples as f64,
            value: min,
        });
    }
    Ok(min)
}

/// `q = U(z1^d z2^D)` for `q` of bidegree `(2p, 2q)`.
pub fn factor_bidegree(q: &MixedPoly, p_half: u32, q_half: u32) -> Result<Factorization, StructureError> {
    let bideg = (2 * p_half, 2 * q_half);
    if q.is_zero() || bideg == (0, 0) || q.terms().any(|(m, _)| m.bidegree() != bideg) {
        return Err(StructureError::NotBihomogeneous(bideg.0, bideg.1));
    }
    if !q.is_real() {
        return Err(StructureError::NotReal);
    }
    if complex_hessian(q).is_zero() {
        return Err(StructureError::Harmonic);
    }
    if q.terms().any(|(m, _)| m.a * q_half != m.m * p_half) {
        return Err(StructureError::NotMonomialComposite);
    }
    let (d, big_d) = if p_half > 0 {
        let d = q.terms().fold(0u32, |g, (m, _)| g.gcd(&m.a));
        if d == 0 || (q_half * d) % p_half != 0 {
            return Err(StructureError::NotMonomialComposite);
        }
        (d, q_half * d / p_half)
    } else {
        (0, q.terms().fold(0u32, |g, (m, _)| g.gcd(&m.m)))
    };
    let mut u = MixedPoly::zero();
    for (m, c) in q.terms() {
        let (hol, anti, step) = if d > 0 { (m.a, m.b, d) } else { (m.m, m.n, big_d) };
        if anti % step != 0 {
            return Err(StructureError::NotMonomialComposite);
        }
        u.add_term(Monomial::new(hol / step, anti / step, 0, 0), c);
    }
    let f = MixedPoly::term(ComplexRational::one(), Monomial::new(d, 0, big_d, 0));
    let residual_zero = compose(&u, &f) == *q;
    if !residual_zero {
        return Err(StructureError::NotMonomialComposite);
    }
    let nu = u.degree().unwrap_or(0) / 2;
    let laplacian_min = check_subharmonic(&u, nu)?;
    Ok(Factorization {
        f,
        u,
        nu,
        residual_zero,
        exponents: Some((d, big_d)),
        laplacian_min,
        level_check: None,
    })
}

/// `p = U(F)` for a property-B polynomial. Without a hint only the
/// bihomogeneous case is handled; `F` is reduced to a primitive root.
pub fn factor_levelsets(p: &MixedPoly, f_hint: Option<&MixedPoly>) -> Result<Factorization, StructureError> {
    if !p.is_real() {
        return Err(StructureError::NotReal);
    }
    if complex_hessian(p).is_zero() {
        return Err(StructureError::Harmonic);
    }
    if !check_property_b(p) {
        return Err(StructureError::NotPropertyB);
    }
    if let Some((b1, b2)) = p.bidegree() {
        if b1 % 2 == 0 && b2 % 2 == 0 {
            let fac = factor_bidegree(p, b1 / 2, b2 / 2)?;
            let (d, big_d) = fac.exponents.expect("bidegree path records exponents");
            let g = d.gcd(&big_d);
            if g <= 1 {
                return Ok(fac);
            }
            let f = MixedPoly::term(ComplexRational::one(), Monomial::new(d / g, 0, big_d / g, 0));
            return finish(p, f);
        }
    }
    let hint = f_hint.ok_or(StructureError::FRequired)?;
    if !hint.is_holomorphic() || hint.degree().unwrap_or(0) == 0 {
        return Err(StructureError::HintNotHolomorphic);
    }
    if !levi_along_levels(p, hint).is_zero() {
        return Err(StructureError::HintNotHarmonic);
    }
    let (g, _, _) = primitive_root(hint);
    finish(p, g)
}

fn finish(p: &MixedPoly, f: MixedPoly) -> Result<Factorization, StructureError> {
    let u = solve_u(p, &f).ok_or(StructureError::HintInconsistent)?;
    let residual_zero = compose(&u, &f) == *p;
    if !residual_zero || !u.is_real() {
        return Err(StructureError::HintInconsistent);
    }
    let nu = u.degree().unwrap_or(0) / 2;
    let laplacian_min = check_subharmonic(&u, nu)?;
    let level_check = level_crosscheck(p, &f, &u);
    let exponents = match f.terms().next() {
        Some((m, _)) if f.num_terms() == 1 => Some((m.a, m.m)),
        _ => None,
    };
    Ok(Factorization { f, u, nu, residual_zero, exponents, laplacian_min, level_check })
}

/// `ℒp(z; (∂2F, -∂1F))` as a polynomial.
fn levi_along_levels(p: &MixedPoly, f: &MixedPoly) -> MixedPoly {
    let h = complex_hessian(p);
    let v1 = f.wirtinger(Var::Z2, DerivKind::Holomorphic);
    let v2 = f.wirtinger(Var::Z1, DerivKind::Holomorphic).neg();
    let (c1, c2) = (v1.conj(), v2.conj());
    h.h11
        .mul(&v1.mul(&c1))
        .add(&h.h12.mul(&v1.mul(&c2)))
        .add(&h.h21().mul(&v2.mul(&c1)))
        .add(&h.h22.mul(&v2.mul(&c2)))
}

fn order_key(m: &Monomial) -> (u32, u32) {
    (m.a + m.m, m.a)
}

fn leading(f: &MixedPoly) -> Option<(Monomial, ComplexRational)> {
    f.terms().max_by_key(|(m, _)| order_key(m)).map(|(m, c)| (*m, c.clone()))
}

/// Writes a holomorphic `f` as `c g^M` with `M` maximal and `g` having
/// leading coefficient 1 in the graded order. Returns `(g, c, M)`.
pub fn primitive_root(f: &MixedPoly) -> (MixedPoly, ComplexRational, u32) {
    let Some((lead, c)) = leading(f) else {
        return (f.clone(), ComplexRational::one(), 1);
    };
    let monic = f.scale_complex(&c.inv().expect("leading coefficient is nonzero"));
    let deg = lead.a + lead.m;
    for big_m in (2..=deg).rev() {
        if lead.a % big_m != 0 || lead.m % big_m != 0 {
            continue;
        }
        if let Some(g) = exact_root(&monic, Monomial::new(lead.a / big_m, 0, lead.m / big_m, 0), big_m) {
            return (g, c, big_m);
        }
    }
    (monic, c, 1)
}

/// Term-by-term extraction of an `M`-th root of a monic polynomial.
fn exact_root(f: &MixedPoly, t0: Monomial, big_m: u32) -> Option<MixedPoly> {
    let mut g = MixedPoly::term(ComplexRational::one(), t0);
    let top = t0.a + t0.m;
    let bound = ((top + 1) * (top + 2) / 2) as usize + 1;
    let base = Monomial::new(t0.a * (big_m - 1), 0, t0.m * (big_m - 1), 0);
    let denom = ComplexRational::from_ints(big_m as i64, 0).inv().expect("M >= 2");
    for _ in 0..bound {
        let r = f.sub(&g.pow(big_m));
        let Some((lt, c)) = leading(&r) else {
            return Some(g);
        };
        if lt.a < base.a || lt.m < base.m || order_key(&lt) >= order_key(&t0.mul(&base)) {
            return None;
        }
        let next = Monomial::new(lt.a - base.a, 0, lt.m - base.m, 0);
        g = g.add(&MixedPoly::term(&c * &denom, next));
    }
    None
}

/// Solves `p = Σ u_ab F^a conj(F)^b` exactly.
fn solve_u(p: &MixedPoly, f: &MixedPoly) -> Option<MixedPoly> {
    let fd = f.degree()?.max(1);
    let top = p.degree()? / fd;
    let fc = f.conj();
    let mut cols = Vec::new();
    let mut keys = Vec::new();
    let mut fa = MixedPoly::one();
    for a in 0..=top {
        let mut prod = fa.clone();
        for b in 0..=(top - a) {
            cols.push(prod.clone());
            keys.push((a, b));
            prod = prod.mul(&fc);
        }
        fa = fa.mul(f);
    }
    let mut rows: Vec<Monomial> = p.terms().map(|(m, _)| *m).collect();
    for c in &cols {
        rows.extend(c.terms().map(|(m, _)| *m));
    }
    rows.sort();
    rows.dedup();
    let matrix: Vec<Vec<ComplexRational>> =
        rows.iter().map(|m| cols.iter().map(|c| c.coeff(m)).collect()).collect();
    let rhs: Vec<ComplexRational> = rows.iter().map(|m| p.coeff(m)).collect();
    let x = solve_exact(matrix, rhs)?;
    Some(MixedPoly::from_terms(
        keys.iter().zip(x).map(|(&(a, b), c)| (Monomial::new(a, b, 0, 0), c)),
    ))
}

/// Gaussian elimination; free variables are set to zero. `None` when
/// the system is inconsistent.
fn solve_exact(mut a: Vec<Vec<ComplexRational>>, mut b: Vec<ComplexRational>) -> Option<Vec<ComplexRational>> {
    let ncols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(piv) = (row..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, piv);
        b.swap(row, piv);
        let inv = a[row][col].inv().expect("pivot is nonzero");
        for r in 0..a.len() {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..ncols {
                let delta = &factor * &a[row][c];
                a[r][c] = &a[r][c] - &delta;
            }
            let delta = &factor * &b[row];
            b[r] = &b[r] - &delta;
        }
        pivots.push((row, col));
        row += 1;
        if row == a.len() {
            break;
        }
    }
    if b[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![ComplexRational::zero(); ncols];
    for (r, c) in pivots {
        x[c] = &b[r] / &a[r][c];
    }
    Some(x)
}

/// Finds points on level sets `F(z, τz) = c` by Newton's method and
/// compares `p` there with `U(c)`.
fn level_crosscheck(p: &MixedPoly, f: &MixedPoly, u: &MixedPoly) -> Option<f64> {
    let fc = f.compile();
    let df = f.wirtinger(Var::Z1, DerivKind::Holomorphic).compile();
    let df2 = f.wirtinger(Var::Z2, DerivKind::Holomorphic).compile();
    let (pc, uc) = (p.compile(), u.compile());
    let zero = Complex64::new(0.0, 0.0);
    let mut worst: Option<f64> = None;
    for k in 0..10 {
        let kf = k as f64;
        let c = Complex64::from_polar(0.5 + 0.1 * kf, 0.7 * kf + 0.3);
        let tau = Complex64::from_polar(0.4 + 0.13 * kf, 1.9 * kf - 0.5);
        let mut z = Complex64::new(0.8, 0.35);
        let mut found = false;
        for _ in 0..200 {
            let pt = [z, tau * z];
            let g = fc.eval(pt) - c;
            let dg = df.eval(pt) + tau * df2.eval(pt);
            if g.norm() <= 1e-13 * (1.0 + c.norm()) {
                found = true;
                break;
            }
            if dg == zero {
                break;
            }
            z -= g / dg;
            if !z.is_finite() {
                break;
            }
        }
        if !found {
            continue;
        }
        let pt = [z, tau * z];
        let lhs = pc.eval_real(pt);
        let rhs = uc.eval_real([c, zero]);
        let err = (lhs - rhs).abs() / (1.0 + rhs.abs());
        worst = Some(worst.map_or(err, |w: f64| w.max(err)));
    }
    worst
}
