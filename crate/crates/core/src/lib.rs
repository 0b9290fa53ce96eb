//! Numerical laboratory for hyperbolic dynamics and fractal uncertainty.
//!
//! The crate is organised by topic:
//!
//! * [`lorentz`]: Minkowski algebra, the group `SO₀(1,n+1)`, its Lie algebra
//!   frame, one-parameter flows and group decompositions.
//! * [`stable`]: stable/unstable tangent geometry, boundary maps and the
//!   symplectomorphisms `κ±` with their numerical checks.
//! * [`porosity`]: discretized sets, ball and line porosity checkers, the
//!   transformation-lemma verifiers and hyperbolic flow-box samplers.
//! * [`fup`]: masked Fourier and oscillatory-kernel operator norms, decay
//!   fits, gnomonic charts and the mixed-Hessian checks.
//! * [`words`]: exact counting over words in `{1,2}`.

pub mod error;
pub mod fup;
pub mod lorentz;
pub mod porosity;
pub mod stable;
pub mod words;

pub use error::{Error, Result};

/// Sign selector for `±` families (horospherical groups, boundary maps, `κ±`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "minus" => Ok(Sign::Minus),
            _ => Err(Error::Parse(format!("unknown sign `{s}`"))),
        }
    }
}
