//! Complex Hessians, pointwise Levi forms and the line-restriction
//! Laplacian family.
//!
//! Laplacians follow `Δ = 4 ∂∂̄` everywhere.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::polyring::{line_family, rat_int, CompiledPoly, DerivKind, MixedPoly, Var};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LeviError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial is not real-valued")]
    NotReal,
}

/// Symbolic complex Hessian `[[h11, h12], [conj(h12), h22]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeviField {
    pub h11: MixedPoly,
    pub h12: MixedPoly,
    pub h22: MixedPoly,
}

fn mixed(p: &MixedPoly, i: Var, j: Var) -> MixedPoly {
    p.wirtinger(i, DerivKind::Holomorphic).wirtinger(j, DerivKind::Antiholomorphic)
}

impl LeviField {
    pub fn trace(&self) -> MixedPoly {
        self.h11.add(&self.h22)
    }

    pub fn det(&self) -> MixedPoly {
        self.h11.mul(&self.h22).sub(&self.h12.mul(&self.h12.conj()))
    }

    pub fn h21(&self) -> MixedPoly {
        self.h12.conj()
    }

    pub fn compile(&self) -> CompiledLevi {
        CompiledLevi {
            h11: self.h11.compile(),
            h12: self.h12.compile(),
            h22: self.h22.compile(),
        }
    }

    /// Whether every entry vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.h11.is_zero() && self.h12.is_zero() && self.h22.is_zero()
    }
}

pub fn complex_hessian(p: &MixedPoly) -> LeviField {
    LeviField {
        h11: mixed(p, Var::Z1, Var::Z1),
        h12: mixed(p, Var::Z1, Var::Z2),
        h22: mixed(p, Var::Z2, Var::Z2),
    }
}

/// Floating copy of a [`LeviField`].
#[derive(Clone, Debug)]
pub struct CompiledLevi {
    h11: CompiledPoly,
    h12: CompiledPoly,
    h22: CompiledPoly,
}

impl CompiledLevi {
    pub fn at(&self, z: [Complex64; 2]) -> HermitianForm2 {
        HermitianForm2 {
            h11: self.h11.eval_real(z),
            h22: self.h22.eval_real(z),
            h12: self.h12.eval(z),
        }
    }
}

/// Hermitian 2x2 matrix `[[h11, h12], [conj(h12), h22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm2 {
    pub h11: f64,
    pub h22: f64,
    pub h12: Complex64,
}

impl HermitianForm2 {
    pub fn new(h11: f64, h22: f64, h12: Complex64) -> Self {
        Self { h11, h22, h12 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, Complex64::new(0.0, 0.0))
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12.norm_sqr()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.h11 * self.h11 + self.h22 * self.h22 + 2.0 * self.h12.norm_sqr()).sqrt()
    }

    pub fn add(&self, o: &HermitianForm2) -> HermitianForm2 {
        Self::new(self.h11 + o.h11, self.h22 + o.h22, self.h12 + o.h12)
    }

    pub fn scale(&self, s: f64) -> HermitianForm2 {
        Self::new(self.h11 * s, self.h22 * s, self.h12 * s)
    }

    /// `v* H v`.
    pub fn apply(&self, v: [Complex64; 2]) -> f64 {
        self.h11 * v[0].norm_sqr()
            + self.h22 * v[1].norm_sqr()
            + 2.0 * (v[0].conj() * self.h12 * v[1]).re
    }

    /// Eigenvalues `(max, min)`; the smaller one is recovered from the
    /// determinant to avoid cancellation.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.trace();
        let half_gap = (0.25 * (self.h11 - self.h22).powi(2) + self.h12.norm_sqr()).sqrt();
        let mid = 0.5 * tr;
        if mid >= 0.0 {
            let hi = mid + half_gap;
            let lo = if hi != 0.0 { self.det() / hi } else { 0.0 };
            (hi, lo)
        } else {
            let lo = mid - half_gap;
            let hi = if lo != 0.0 { self.det() / lo } else { 0.0 };
            (hi, lo)
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().1
    }

    /// `|det| / ‖H‖`, a quantity comparable to the least eigenvalue in
    /// magnitude (within a factor of two).
    pub fn eig_rel(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            0.0
        } else {
            self.det().abs() / n
        }
    }
}

pub fn min_eigenvalue(h: &HermitianForm2) -> f64 {
    h.min_eigenvalue()
}

/// Laplacians of the restrictions `w -> p(ζw, w)`:
/// `Δ p(ζw, w) = Σ φ_mn(ζ) w^(m-1) conj(w)^(n-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiFamily {
    /// Keyed by `(m, n)` with `m, n ≥ 1`; each value is a polynomial in
    /// `ζ` held in the first variable slot.
    pub entries: BTreeMap<(u32, u32), MixedPoly>,
    pub degree: u32,
}

impl PhiFamily {
    /// Index `k` of the diagonal entry `φ_kk`.
    pub fn half_degree(&self) -> u32 {
        self.degree / 2
    }

    pub fn diagonal(&self) -> Option<&MixedPoly> {
        let k = self.half_degree();
        self.entries.get(&(k, k))
    }
}

pub fn phi_coefficients(p: &MixedPoly) -> Result<PhiFamily, LeviError> {
    let degree = p.homogeneous_degree().ok_or(LeviError::NotHomogeneous)?;
    if !p.is_real() {
        return Err(LeviError::NotReal);
    }
    let entries = line_family(p)
        .into_iter()
        .filter(|((m, n), _)| *m >= 1 && *n >= 1)
        .map(|((m, n), c)| ((m, n), c.scale(&rat_int(4 * m as i64 * n as i64))))
        .collect();
    Ok(PhiFamily { entries, degree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::parse_poly;

    fn p(s: &str) -> MixedPoly {
        parse_poly(s).unwrap()
    }

    #[test]
    fn hessian_examples() {
        let l = complex_hessian(&p("abs2(z1)^2 + abs2(z2)^2"));
        assert_eq!(l.h11, p("4*abs2(z1)"));
        assert_eq!(l.h22, p("4*abs2(z2)"));
        assert!(l.h12.is_zero());
        assert_eq!(l.det(), p("16*abs2(z1)*abs2(z2)"));

        let l = complex_hessian(&p("abs2(z1*z2)"));
        assert_eq!(l.h11, p("abs2(z2)"));
        assert_eq!(l.h12, p("conj(z1)*z2"));
        assert_eq!(l.h22, p("abs2(z1)"));
        assert!(l.det().is_zero());

        assert!(complex_hessian(&p("Re(z1^2)")).is_zero());
    }

    #[test]
    fn eigenvalue_examples() {
        let c0 = Complex64::new(0.0, 0.0);
        assert_eq!(HermitianForm2::new(2.0, 1.0, c0).min_eigenvalue(), 1.0);
        assert!(HermitianForm2::new(1.0, 1.0, Complex64::new(1.0, 0.0)).min_eigenvalue().abs() < 1e-15);
        let h = HermitianForm2::new(5.0, 1.0, Complex64::new(0.0, 2.0));
        assert!((h.min_eigenvalue() - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14);
        let (hi, lo) = HermitianForm2::new(-3.0, -1.0, c0).eigenvalues();
        assert_eq!((hi, lo), (-1.0, -3.0));
    }

    #[test]
    fn phi_examples() {
        let f = phi_coefficients(&p("abs2(z1*z2)")).unwrap();
        assert_eq!(f.entries.len(), 1);
        assert_eq!(f.entries[&(2, 2)], p("16*abs2(z1)"));

        let f = phi_coefficients(&p("abs2(z1^2 - z2^2)")).unwrap();
        assert_eq!(f.entries[&(2, 2)], p("16*abs2(z1^2 - 1)"));

        let f = phi_coefficients(&p("abs2(z2)^2")).unwrap();
        assert_eq!(f.diagonal().unwrap(), &p("16"));

        assert_eq!(
            phi_coefficients(&p("abs2(z1) + abs2(z2)^2")),
            Err(LeviError::NotHomogeneous)
        );
    }

    #[test]
    fn hermitian_symmetry_is_exact() {
        let q = p("abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6) + Re(z1^3*conj(z2)) + abs2(z2)^2");
        let l = complex_hessian(&q);
        assert!(l.h11.is_real() && l.h22.is_real());
        let h21 = q
            .wirtinger(Var::Z2, DerivKind::Holomorphic)
            .wirtinger(Var::Z1, DerivKind::Antiholomorphic);
        assert_eq!(h21, l.h21());
    }
}
