//! Univariate piecewise polynomials with rational coefficients and exact
//! integration, including integration of absolute values.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::rational::{self, Rational};

/// Polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `a + b x`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + rational::to_f64(c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        Self::new(
            (0..len)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// `x -> p(x - shift)`
    pub fn shifted(&self, shift: &Rational) -> Self {
        // Horner in polynomial arithmetic: p(x - s) = (..(c_d (x - s) + c_{d-1})(x - s) ..)
        let step = Poly::linear(-shift.clone(), Rational::from_integer(1.into()));
        self.coeffs.iter().rev().fold(Poly::zero(), |acc, c| {
            acc.mul(&step).add(&Poly::constant(c.clone()))
        })
    }

    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / Rational::from_integer(BigInt::from(i + 1)));
        }
        Self::new(out)
    }

    pub fn integral(&self, lo: &Rational, hi: &Rational) -> Rational {
        let anti = self.antiderivative();
        anti.eval(hi) - anti.eval(lo)
    }

    /// Real roots strictly inside `(lo, hi)`, ascending. The flag is false
    /// when a root had to be approximated (irrational quadratic roots or
    /// degree above two).
    fn interior_roots(&self, lo: &Rational, hi: &Rational) -> (Vec<Rational>, bool) {
        let inside = |r: &Rational| r > lo && r < hi;
        match self.degree() {
            _ if self.is_zero() => (Vec::new(), true),
            0 => (Vec::new(), true),
            1 => {
                let r = -&self.coeffs[0] / &self.coeffs[1];
                (if inside(&r) { vec![r] } else { Vec::new() }, true)
            }
            2 => {
                let (c, b, a) = (&self.coeffs[0], &self.coeffs[1], &self.coeffs[2]);
                let disc = b * b - Rational::from_integer(4.into()) * a * c;
                if !disc.is_positive() {
                    // No sign change: either no real root or a double root.
                    return (Vec::new(), true);
                }
                let (sqrt, exact) = rational_sqrt(&disc);
                let two_a = a * Rational::from_integer(2.into());
                let mut roots: Vec<Rational> = [(-b - &sqrt) / &two_a, (-b + &sqrt) / &two_a]
                    .into_iter()
                    .filter(inside)
                    .collect();
                roots.sort();
                (roots, exact)
            }
            _ => self.bisect_roots(lo, hi),
        }
    }

    fn bisect_roots(&self, lo: &Rational, hi: &Rational) -> (Vec<Rational>, bool) {
        const SCAN: i64 = 256;
        let width = hi - lo;
        let mut roots = Vec::new();
        let mut prev_x = lo.clone();
        let mut prev_v = self.eval(lo);
        for i in 1..=SCAN {
            let x = lo + &width * rational::rat(i, SCAN);
            let v = self.eval(&x);
            if (prev_v.is_negative() && v.is_positive())
                || (prev_v.is_positive() && v.is_negative())
            {
                let (mut a, mut b) = (prev_x.clone(), x.clone());
                let sign_a = prev_v.is_positive();
                for _ in 0..64 {
                    let mid = (&a + &b) / Rational::from_integer(2.into());
                    if self.eval(&mid).is_positive() == sign_a {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                roots.push((a + b) / Rational::from_integer(2.into()));
            }
            prev_x = x;
            prev_v = v;
        }
        (roots, false)
    }

    /// `∫_lo^hi |p(x)| dx`; the flag reports whether the value is exact.
    pub fn abs_integral(&self, lo: &Rational, hi: &Rational) -> (Rational, bool) {
        let (roots, exact) = self.interior_roots(lo, hi);
        let anti = self.antiderivative();
        let mut knots = Vec::with_capacity(roots.len() + 2);
        knots.push(lo.clone());
        knots.extend(roots);
        knots.push(hi.clone());
        let total = knots
            .windows(2)
            .map(|w| (anti.eval(&w[1]) - anti.eval(&w[0])).abs())
            .fold(Rational::zero(), |a, b| a + b);
        (total, exact)
    }
}

/// Square root of a positive rational; exact when numerator and denominator
/// are perfect squares, otherwise accurate to about 2^-80 relative.
fn rational_sqrt(r: &Rational) -> (Rational, bool) {
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        return (Rational::new(sn, sd), true);
    }
    let scale = BigInt::from(1) << 80u32;
    let approx = (n * &scale * &scale / d).sqrt();
    (Rational::new(approx, scale), false)
}

/// One polynomial piece on the closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub lo: Rational,
    pub hi: Rational,
    pub poly: Poly,
}

/// Piecewise polynomial, zero outside its pieces. Pieces are sorted and
/// overlap at most at endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PiecewisePoly {
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbsIntegral {
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    pub exact: bool,
}

impl PiecewisePoly {
    /// Builds from pieces in any order; panics if two pieces overlap on a
    /// set of positive length.
    pub fn from_pieces(mut pieces: Vec<Piece>) -> Self {
        pieces.retain(|p| p.lo < p.hi);
        pieces.sort_by(|a, b| a.lo.cmp(&b.lo));
        for w in pieces.windows(2) {
            assert!(w[0].hi <= w[1].lo, "overlapping polynomial pieces");
        }
        Self { pieces }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        // First piece wins at shared endpoints; both agree for continuous functions.
        let idx = self.pieces.partition_point(|p| &p.hi < x);
        match self.pieces.get(idx) {
            Some(p) if &p.lo <= x => p.poly.eval(x),
            _ => Rational::zero(),
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| rational::to_f64(&p.hi) < x);
        match self.pieces.get(idx) {
            Some(p) if rational::to_f64(&p.lo) <= x => p.poly.eval_f64(x),
            _ => 0.0,
        }
    }

    pub fn integral(&self) -> Rational {
        self.pieces
            .iter()
            .map(|p| p.poly.integral(&p.lo, &p.hi))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn abs_integral(&self) -> AbsIntegral {
        let mut exact = true;
        let mut value = Rational::zero();
        for p in &self.pieces {
            let (v, e) = p.poly.abs_integral(&p.lo, &p.hi);
            value += v;
            exact &= e;
        }
        AbsIntegral { value, exact }
    }

    /// Difference `self - other` on the common refinement of both partitions.
    pub fn sub(&self, other: &Self) -> Self {
        let mut knots: Vec<Rational> = self
            .pieces
            .iter()
            .chain(other.pieces.iter())
            .flat_map(|p| [p.lo.clone(), p.hi.clone()])
            .collect();
        knots.sort();
        knots.dedup();
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = (&w[0] + &w[1]) / Rational::from_integer(2.into());
                let poly = self.poly_at(&mid).add(
                    &other
                        .poly_at(&mid)
                        .scale(&Rational::from_integer((-1).into())),
                );
                Piece {
                    lo: w[0].clone(),
                    hi: w[1].clone(),
                    poly,
                }
            })
            .filter(|p| !p.poly.is_zero())
            .collect();
        Self::from_pieces(pieces)
    }

    fn poly_at(&self, x: &Rational) -> Poly {
        self.pieces
            .iter()
            .find(|p| &p.lo < x && x < &p.hi)
            .map(|p| p.poly.clone())
            .unwrap_or_else(Poly::zero)
    }
}
