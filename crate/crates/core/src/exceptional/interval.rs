//! Outward-rounded interval arithmetic and real bivariate polynomials.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;

use num_traits::{One, Signed, Zero};

use crate::polyring::{rat_to_f64, ComplexRational, MixedPoly, Monomial, Rational};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi || lo.is_nan() || hi.is_nan());
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// `x ± r`, rounded outward.
    pub fn around(x: f64, r: f64) -> Self {
        Self::new((x - r).next_down(), (x + r).next_up())
    }

    fn widened(lo: f64, hi: f64) -> Self {
        Self::new(lo.next_down(), hi.next_up())
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then(|| Interval::new(lo, hi))
    }

    pub fn powi(&self, e: u32) -> Interval {
        if e == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.abs().powi(e as i32);
        let b = self.hi.abs().powi(e as i32);
        // powi is accurate to a few ulps; widen generously
        let fudge = 1.0 + 4.0 * e as f64 * f64::EPSILON;
        if e % 2 == 1 {
            let lo = self.lo.signum() * self.lo.abs().powi(e as i32);
            let hi = self.hi.signum() * self.hi.abs().powi(e as i32);
            let lo = if lo < 0.0 { lo * fudge } else { lo / fudge };
            let hi = if hi > 0.0 { hi * fudge } else { hi / fudge };
            Interval::widened(lo, hi)
        } else if self.contains_zero() {
            Interval::new(0.0, (a.max(b) * fudge).next_up())
        } else {
            Interval::widened(a.min(b) / fudge, a.max(b) * fudge)
        }
    }

    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval::widened(self.lo * c, self.hi * c)
        } else {
            Interval::widened(self.hi * c, self.lo * c)
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::widened(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::widened(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::widened(lo, hi)
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x: Interval,
    pub y: Interval,
}

impl Rect {
    pub fn square(cx: f64, cy: f64, half: f64) -> Self {
        Self {
            x: Interval::new(cx - half, cx + half),
            y: Interval::new(cy - half, cy + half),
        }
    }

    pub fn width(&self) -> f64 {
        self.x.width().max(self.y.width())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x.mid(), self.y.mid())
    }

    pub fn split(&self) -> [Rect; 4] {
        let (cx, cy) = self.center();
        let xl = Interval::new(self.x.lo, cx);
        let xr = Interval::new(cx, self.x.hi);
        let yl = Interval::new(self.y.lo, cy);
        let yr = Interval::new(cy, self.y.hi);
        [
            Rect { x: xl, y: yl },
            Rect { x: xr, y: yl },
            Rect { x: xl, y: yr },
            Rect { x: xr, y: yr },
        ]
    }

    /// Closed boxes share at least a corner.
    pub fn touches(&self, o: &Rect) -> bool {
        self.x.lo <= o.x.hi && o.x.lo <= self.x.hi && self.y.lo <= o.y.hi && o.y.lo <= self.y.hi
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.lo <= x && x <= self.x.hi && self.y.lo <= y && y <= self.y.hi
    }
}

/// Real polynomial in `(x, y)` kept both exactly and in floating point.
///
/// Coefficients are stored relative to `origin`; a shifted copy evaluates
/// accurately near its origin where the global form would cancel.
#[derive(Clone, Debug)]
pub struct RealPoly2 {
    origin: (f64, f64),
    origin_exact: (Rational, Rational),
    exact: Vec<((u32, u32), Rational)>,
    deg: usize,
    /// Dense coefficients, `dense[i * (deg + 1) + j]` for `x^i y^j`.
    dense: Vec<f64>,
}

impl RealPoly2 {
    fn from_exact(exact: Vec<((u32, u32), Rational)>) -> Self {
        let deg = exact.iter().map(|((i, j), _)| (*i).max(*j) as usize).max().unwrap_or(0);
        let n = deg + 1;
        let mut dense = vec![0.0; n * n];
        for ((i, j), c) in &exact {
            dense[*i as usize * n + *j as usize] = rat_to_f64(c);
        }
        Self { origin: (0.0, 0.0), origin_exact: (Rational::zero(), Rational::zero()), exact, deg, dense }
    }

    /// Real and imaginary parts of `f(x + iy)` for `f` a polynomial in
    /// `ζ, conj(ζ)` held in the first variable slot.
    pub fn split_complex(f: &MixedPoly) -> (RealPoly2, RealPoly2) {
        // x and y live in the z1 and z2 slots as formal holomorphic variables
        let zeta = MixedPoly::z1().add(&MixedPoly::z2().scale_complex(&ComplexRational::i()));
        let zeta_bar = MixedPoly::z1().sub(&MixedPoly::z2().scale_complex(&ComplexRational::i()));
        let mut zp = vec![MixedPoly::one()];
        let mut zbp = vec![MixedPoly::one()];
        let mut expanded = MixedPoly::zero();
        for (m, c) in f.terms() {
            while zp.len() <= m.a as usize {
                let next = zp.last().unwrap().mul(&zeta);
                zp.push(next);
            }
            while zbp.len() <= m.b as usize {
                let next = zbp.last().unwrap().mul(&zeta_bar);
                zbp.push(next);
            }
            expanded = expanded.add(&zp[m.a as usize].mul(&zbp[m.b as usize]).scale_complex(c));
        }
        let mut re = Vec::new();
        let mut im = Vec::new();
        for (m, c) in expanded.terms() {
            let key = (m.a, m.m);
            if !c.re.is_zero() {
                re.push((key, c.re.clone()));
            }
            if !c.im.is_zero() {
                im.push((key, c.im.clone()));
            }
        }
        (Self::from_exact(re), Self::from_exact(im))
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_empty()
    }

    /// Exact re-expansion around the point `(x0, y0)`.
    pub fn shifted(&self, x0: &Rational, y0: &Rational) -> RealPoly2 {
        let rx = x0 - &self.origin_exact.0;
        let ry = y0 - &self.origin_exact.1;
        let px = powers(&rx, self.deg as u32);
        let py = powers(&ry, self.deg as u32);
        let mut acc: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for ((i, j), c) in &self.exact {
            for a in 0..=*i {
                let ca = c * binomial(*i, a) * &px[(*i - a) as usize];
                if ca.is_zero() {
                    continue;
                }
                for b in 0..=*j {
                    let t = &ca * binomial(*j, b) * &py[(*j - b) as usize];
                    *acc.entry((a, b)).or_insert_with(Rational::zero) += t;
                }
            }
        }
        let exact = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut out = Self::from_exact(exact);
        out.origin = (rat_to_f64(x0), rat_to_f64(y0));
        out.origin_exact = (x0.clone(), y0.clone());
        out
    }

    /// Taylor coefficients at the local point `(u, v)` together with
    /// bounds on their rounding errors.
    fn taylor(&self, u: f64, v: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.deg + 1;
        let mut c = self.dense.clone();
        let mut m: Vec<f64> = c.iter().map(|x| x.abs()).collect();
        let (au, av) = (u.abs(), v.abs());
        // shift in x for every power of y
        for j in 0..n {
            for i in 0..n {
                for k in (i..n - 1).rev() {
                    c[k * n + j] += u * c[(k + 1) * n + j];
                    m[k * n + j] += au * m[(k + 1) * n + j];
                }
            }
        }
        // then in y for every power of x
        for i in 0..n {
            for jj in 0..n {
                for k in (jj..n - 1).rev() {
                    c[i * n + k] += v * c[i * n + k + 1];
                    m[i * n + k] += av * m[i * n + k + 1];
                }
            }
        }
        let gamma = (4 * n + 4) as f64 * f64::EPSILON;
        let err = m.iter().map(|x| gamma * x).collect();
        (c, err)
    }

    /// Value and a bound on its floating-point evaluation error.
    pub fn eval_with_error(&self, x: f64, y: f64) -> (f64, f64) {
        let (u, v) = (x - self.origin.0, y - self.origin.1);
        let n = self.deg + 1;
        let mut s = 0.0;
        let mut mag = 0.0;
        let mut pu = 1.0;
        for i in 0..n {
            let mut pv = 1.0;
            for j in 0..n {
                let t = self.dense[i * n + j] * pu * pv;
                s += t;
                mag += t.abs();
                pv *= v;
            }
            pu *= u;
        }
        let err = (4 * n + 4) as f64 * f64::EPSILON * mag;
        (s, err + f64::MIN_POSITIVE)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_error(x, y).0
    }

    /// Enclosure of the range over `r` by the centered Taylor form
    /// `f(c) + Σ |∂^α f(c)/α!| h^α`.
    pub fn range(&self, r: &Rect) -> Interval {
        let (cx, cy) = r.center();
        let hx = ((r.x.hi - cx).max(cx - r.x.lo)).next_up();
        let hy = ((r.y.hi - cy).max(cy - r.y.lo)).next_up();
        let (u, v) = (cx - self.origin.0, cy - self.origin.1);
        // rounding of the origin and of the local center, a few ulps
        let hx = hx + 2.0 * f64::EPSILON * (u.abs() + cx.abs() + self.origin.0.abs());
        let hy = hy + 2.0 * f64::EPSILON * (v.abs() + cy.abs() + self.origin.1.abs());
        let (c, err) = self.taylor(u, v);
        let n = self.deg + 1;
        let mut spread = 0.0;
        let mut px = 1.0;
        for i in 0..n {
            let mut py = 1.0;
            for j in 0..n {
                let idx = i * n + j;
                if i + j > 0 {
                    spread += (c[idx].abs() + err[idx]) * px * py;
                }
                py *= hy;
            }
            px *= hx;
        }
        let spread = spread * (1.0 + (4 * n) as f64 * f64::EPSILON);
        Interval::around(c[0], err[0] + spread)
    }

    /// Sum of absolute coefficient values.
    pub fn coeff_l1(&self) -> f64 {
        self.dense.iter().map(|c| c.abs()).sum()
    }

    pub fn degree(&self) -> u32 {
        self.exact.iter().map(|((i, j), _)| i + j).max().unwrap_or(0)
    }
}

fn powers(x: &Rational, n: u32) -> Vec<Rational> {
    let mut v = vec![Rational::one()];
    for _ in 0..n {
        let next = v.last().unwrap() * x;
        v.push(next);
    }
    v
}

fn binomial(n: u32, k: u32) -> Rational {
    let mut r = BigInt::one();
    for t in 0..k {
        r = r * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    Rational::from_integer(r)
}

/// Exact rational value of a finite float.
pub fn exact_f64(x: f64) -> Rational {
    Rational::from_float(x).unwrap_or_else(Rational::zero)
}

/// Radius containing every zero of `φ_kk`: one plus the lower coefficient
/// magnitudes over the leading `|ζ|^(2k)` coefficient. `None` unless that
/// coefficient is real and positive.
pub fn cauchy_radius(phi_kk: &MixedPoly, k: u32) -> Option<f64> {
    let lead = phi_kk.coeff(&Monomial::new(k, k, 0, 0));
    if !lead.im.is_zero() || !lead.re.is_positive() {
        return None;
    }
    let lead = rat_to_f64(&lead.re);
    let rest: f64 = phi_kk
        .terms()
        .filter(|(m, _)| **m != Monomial::new(k, k, 0, 0))
        .map(|(_, c)| c.abs_l1())
        .sum();
    Some(1.0 + rest / lead)
}
