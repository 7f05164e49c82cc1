//! Built-in example polynomials.

use serde::{Deserialize, Serialize};

use crate::polyring::{compose, parse_poly, MixedPoly};

/// The Kohn–Nirenberg polynomial `G(z1) = |z1|⁸ + (15/7)|z1|² Re(z1⁶)`.
pub const KN: &str = "abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)";
pub const EX1: &str = "abs2(z1)^3*abs2(z2) + abs2(z1)^4 + (15/7)*abs2(z1)*Re(z1^6)";
pub const WEIGHTED: &str = "abs2(z1)*abs2(z2) + abs2(z2)^3";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Example {
    Kn,
    Ex1,
    Ex2,
    Weighted,
}

pub const ALL: [Example; 4] = [Example::Kn, Example::Ex1, Example::Ex2, Example::Weighted];

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub poly: MixedPoly,
    pub weights: Option<(u32, u32)>,
    pub description: &'static str,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Kn => "kn",
            Example::Ex1 => "ex1",
            Example::Ex2 => "ex2",
            Example::Weighted => "weighted",
        }
    }

    pub fn fixture(self) -> Fixture {
        let p = |s: &str| parse_poly(s).expect("fixture parses");
        match self {
            Example::Kn => Fixture {
                name: self.name(),
                poly: p(KN),
                weights: None,
                description: "Kohn-Nirenberg polynomial G(z1), harmonic along every line z1 = const",
            },
            Example::Ex1 => Fixture {
                name: self.name(),
                poly: p(EX1),
                weights: None,
                description: "|z1|^6|z2|^2 + G(z1), degenerate exactly on the exceptional line z1 = 0",
            },
            Example::Ex2 => Fixture {
                name: self.name(),
                poly: compose(&p(KN), &p("z1*z2")),
                weights: Some((16, 16)),
                description: "G(z1 z2), harmonic along the level sets of z1 z2",
            },
            Example::Weighted => Fixture {
                name: self.name(),
                poly: p(WEIGHTED),
                weights: Some((3, 6)),
                description: "(3,6)-homogeneous |z1|^2|z2|^2 + |z2|^6",
            },
        }
    }
}
