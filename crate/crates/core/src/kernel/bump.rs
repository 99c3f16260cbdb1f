//! Unit bumps: the indicator of `[0, 1]` and its trapezoidal approximation.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Piece, PiecewisePoly, Poly};
use crate::rational::{self, rat, Rational};

/// Ramp half-width of a trapezoid bump, always in the open interval (0, 1/2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Epsilon(Rational);

impl Epsilon {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_zero() || value < Rational::zero() || value >= rat(1, 2) {
            return Err(Error::InvalidEpsilon(rational::format(&value)));
        }
        Ok(Self(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.0)
    }
}

impl fmt::Debug for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Epsilon({})", self.0)
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<String> for Epsilon {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::new(rational::parse(&s)?)
    }
}

impl From<Epsilon> for String {
    fn from(e: Epsilon) -> String {
        rational::format(&e.0)
    }
}

/// `g` (indicator of `[0, 1]`) or `g_ε` (continuous trapezoid).
///
/// The trapezoid rises linearly from 0 at `-ε` to 1 at `ε`, stays at 1 up to
/// `1 - ε` and falls back to 0 at `1 + ε`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bump {
    Indicator,
    Trapezoid(Epsilon),
}

impl Bump {
    pub fn trapezoid(epsilon: Rational) -> Result<Self> {
        Ok(Self::Trapezoid(Epsilon::new(epsilon)?))
    }

    pub fn epsilon(&self) -> Option<&Epsilon> {
        match self {
            Self::Indicator => None,
            Self::Trapezoid(e) => Some(e),
        }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let one = Rational::one();
        match self {
            Self::Indicator => {
                if x >= &Rational::zero() && x <= &one {
                    one
                } else {
                    Rational::zero()
                }
            }
            Self::Trapezoid(eps) => {
                let e = eps.value();
                let half = rat(1, 2);
                if x <= &-e || x >= &(&one + e) {
                    Rational::zero()
                } else if x <= e {
                    &half + x / (e * Rational::from_integer(2.into()))
                } else if x <= &(&one - e) {
                    one
                } else {
                    &half + (&one - x) / (e * Rational::from_integer(2.into()))
                }
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match self {
            Self::Indicator => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Trapezoid(eps) => {
                let e = eps.to_f64();
                if x <= -e || x >= 1.0 + e {
                    0.0
                } else if x <= e {
                    0.5 + x / (2.0 * e)
                } else if x <= 1.0 - e {
                    1.0
                } else {
                    0.5 + (1.0 - x) / (2.0 * e)
                }
            }
        }
    }

    /// Closed interval outside of which the bump vanishes.
    pub fn support(&self) -> (Rational, Rational) {
        match self {
            Self::Indicator => (Rational::zero(), Rational::one()),
            Self::Trapezoid(e) => (-e.value().clone(), Rational::one() + e.value()),
        }
    }

    pub fn breakpoints(&self) -> Vec<Rational> {
        match self {
            Self::Indicator => vec![Rational::zero(), Rational::one()],
            Self::Trapezoid(e) => {
                let e = e.value();
                let one = Rational::one();
                vec![-e.clone(), e.clone(), &one - e, &one + e]
            }
        }
    }

    /// Polynomial pieces over the support.
    pub fn pieces(&self) -> Vec<Piece> {
        let one = Rational::one();
        match self {
            Self::Indicator => vec![Piece {
                lo: Rational::zero(),
                hi: one.clone(),
                poly: Poly::constant(one),
            }],
            Self::Trapezoid(eps) => {
                let e = eps.value();
                let slope = Rational::one() / (e * Rational::from_integer(2.into()));
                let half = rat(1, 2);
                vec![
                    Piece {
                        lo: -e.clone(),
                        hi: e.clone(),
                        poly: Poly::linear(half.clone(), slope.clone()),
                    },
                    Piece {
                        lo: e.clone(),
                        hi: &one - e,
                        poly: Poly::constant(one.clone()),
                    },
                    Piece {
                        lo: &one - e,
                        hi: &one + e,
                        poly: Poly::linear(&half + &slope, -slope),
                    },
                ]
            }
        }
    }

    pub fn as_piecewise(&self) -> PiecewisePoly {
        PiecewisePoly::from_pieces(self.pieces())
    }

    /// `x -> self(x - shift)` as a piecewise polynomial, scaled by `weight`.
    pub fn shifted_pieces(&self, shift: &Rational, weight: &Rational) -> Vec<Piece> {
        self.pieces()
            .into_iter()
            .map(|p| Piece {
                lo: p.lo + shift,
                hi: p.hi + shift,
                poly: p.poly.shifted(shift).scale(weight),
            })
            .collect()
    }

    /// `∫ g = 1` for both kinds.
    pub fn integral(&self) -> Rational {
        self.pieces()
            .iter()
            .map(|p| p.poly.integral(&p.lo, &p.hi))
            .fold(Rational::zero(), |a, b| a + b)
    }

    /// `∫_a^b` of the bump.
    pub fn integral_over(&self, a: &Rational, b: &Rational) -> Rational {
        if a >= b {
            return Rational::zero();
        }
        self.pieces()
            .iter()
            .filter_map(|p| {
                let lo = if &p.lo > a { &p.lo } else { a };
                let hi = if &p.hi < b { &p.hi } else { b };
                (lo < hi).then(|| p.poly.integral(lo, hi))
            })
            .fold(Rational::zero(), |acc, v| acc + v)
    }

    /// Largest absolute slope, `1/(2ε)` for the trapezoid; `None` for the
    /// discontinuous indicator.
    pub fn slope_bound(&self) -> Option<Rational> {
        self.epsilon()
            .map(|e| Rational::one() / (e.value() * Rational::from_integer(2.into())))
    }
}

/// `∫ |a - b|` over the real line, computed exactly.
pub fn l1_distance(a: &Bump, b: &Bump) -> Rational {
    a.as_piecewise().sub(&b.as_piecewise()).abs_integral().value
}
