//! Exact mixed polynomials in `z1, conj(z1), z2, conj(z2)`.

mod parse;
mod poly;
mod rational;
mod subst;

pub use parse::{parse_holomorphic, parse_poly, parse_real};
pub use poly::{CompiledPoly, DerivKind, MixedPoly, Monomial, Var, WeightSignature};
pub use rational::{rat, rat_from_f64, rat_int, rat_to_f64, ComplexRational, Rational};
pub use subst::{
    compose, line_family, power, restrict_infinity, restrict_line, shear, shear_second, substitute, swap,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("expression is not real-valued")]
    NotReal,
    #[error("expression is not holomorphic")]
    NotHolomorphic,
}

#[cfg(test)]
mod tests;
