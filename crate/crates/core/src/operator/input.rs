use std::io::{Read, Write};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::kernel::Bump;
use crate::rational::{self, Rational};

/// Piecewise-constant input with `‖u‖∞ ≤ 1`.
///
/// `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`; the input is
/// zero before the first breakpoint and after the last (the domain end).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedInput {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl BoundedInput {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints[0] < Rational::zero() {
            return Err(Error::InvalidInput(
                "inputs live on the positive half-line".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| v.abs() > Rational::one()) {
            return Err(Error::InvalidInput(format!(
                "value {} exceeds the unit sup-norm bound",
                rational::format(v)
            )));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Constant `value` on `[lo, hi)`.
    pub fn constant(lo: Rational, hi: Rational, value: Rational) -> Result<Self> {
        Self::new(vec![lo, hi], vec![value])
    }

    /// Segments `(a, b, v)` in increasing order; gaps (including `[0, a_0)`)
    /// are filled with zero.
    pub fn from_segments(segments: &[(Rational, Rational, Rational)]) -> Result<Self> {
        let mut bps = vec![Rational::zero()];
        let mut vals = Vec::new();
        for (a, b, v) in segments {
            let last = bps.last().expect("non-empty");
            if a < last {
                return Err(Error::InvalidInput(
                    "segments overlap or are out of order".into(),
                ));
            }
            if a > last {
                vals.push(Rational::zero());
                bps.push(a.clone());
            }
            vals.push(v.clone());
            bps.push(b.clone());
        }
        Self::new(bps, vals)
    }

    /// Parses `a:b:v` segments separated by commas, e.g. `0:2:1,2:4:-1/2`.
    pub fn parse_segments(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        let mut column = 1;
        for part in text.split(',') {
            let fields: Vec<&str> = part.split(':').collect();
            let bad = |message: String| Error::Parse {
                line: 1,
                column,
                message,
            };
            if fields.len() != 3 {
                return Err(bad(format!("expected lo:hi:value, got {:?}", part.trim())));
            }
            let mut vals = fields.iter().map(|f| {
                rational::parse(f)
                    .map_err(|_| bad(format!("not a rational number: {:?}", f.trim())))
            });
            let (a, b, v) = (
                vals.next().unwrap()?,
                vals.next().unwrap()?,
                vals.next().unwrap()?,
            );
            segments.push((a, b, v));
            column += part.chars().count() + 1;
        }
        Self::from_segments(&segments)
    }

    /// `±1` signs on a uniform grid starting at `start` with step `step`.
    pub fn from_signs(start: &Rational, step: &Rational, signs: &[i8]) -> Result<Self> {
        let bps = (0..=signs.len())
            .map(|i| start + step * Rational::from_integer(i.into()))
            .collect();
        let vals = signs
            .iter()
            .map(|&s| Rational::from_integer(if s >= 0 { 1 } else { -1 }.into()))
            .collect();
        Self::new(bps, vals)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn domain_end(&self) -> &Rational {
        self.breakpoints.last().expect("non-empty")
    }

    pub fn segments(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn sup_norm(&self) -> Rational {
        self.values
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let idx = self.breakpoints.partition_point(|b| b <= x);
        if idx == 0 || idx > self.values.len() {
            return Rational::zero();
        }
        self.values[idx - 1].clone()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let idx = self
            .breakpoints
            .partition_point(|b| rational::to_f64(b) <= x);
        if idx == 0 || idx > self.values.len() {
            return 0.0;
        }
        rational::to_f64(&self.values[idx - 1])
    }

    /// `∫_a^b u`.
    pub fn integral_over(&self, a: &Rational, b: &Rational) -> Rational {
        self.segments()
            .filter_map(|(lo, hi, v)| {
                let l = if lo > a { lo } else { a };
                let h = if hi < b { hi } else { b };
                (l < h).then(|| v * (h - l))
            })
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// `∫ bump(y - shift) u(y) dy`.
    pub fn bump_moment(&self, bump: &Bump, shift: &Rational) -> Rational {
        let (lo, hi) = bump.support();
        let (lo, hi) = (lo + shift, hi + shift);
        self.segments()
            .filter(|(a, b, v)| !v.is_zero() && *a < &hi && *b > &lo)
            .map(|(a, b, v)| v * bump.integral_over(&(a - shift), &(b - shift)))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// `a u1 + b u2` on the merged partition; fails when the result leaves
    /// the unit ball.
    pub fn combine(a: &Rational, u1: &Self, b: &Rational, u2: &Self) -> Result<Self> {
        let mut knots: Vec<Rational> = u1
            .breakpoints
            .iter()
            .chain(&u2.breakpoints)
            .cloned()
            .collect();
        knots.sort();
        knots.dedup();
        let vals = knots
            .windows(2)
            .map(|w| a * u1.eval(&w[0]) + b * u2.eval(&w[0]))
            .collect();
        Self::new(knots, vals)
    }

    /// CSV with header `x,value`: one row per segment start, then a final
    /// row at the domain end with value `0`. Rationals are written `p/q`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (a, _, v) in self.segments() {
            w.write_record([rational::format(a), rational::format(v)])?;
        }
        w.write_record([rational::format(self.domain_end()), "0".to_string()])?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let field = |j: usize| -> Result<Rational> {
                let text = rec.get(j).ok_or_else(|| Error::Parse {
                    line: i + 2,
                    column: j + 1,
                    message: "missing field".into(),
                })?;
                rational::parse(text).map_err(|e| Error::Parse {
                    line: i + 2,
                    column: j + 1,
                    message: e.to_string(),
                })
            };
            bps.push(field(0)?);
            vals.push(field(1)?);
        }
        // The last row only marks the domain end.
        vals.pop();
        Self::new(bps, vals)
    }
}

/// `ū(k) = ∫_{2k-1}^{2k} u` for `k = 1..=n`.
pub fn reduce_input(u: &BoundedInput, n: usize) -> Result<Vec<Rational>> {
    if n == 0 {
        return Err(Error::DomainMismatch("dimension must be positive".into()));
    }
    let end = Rational::from_integer((2 * n).into());
    if u.domain_end() < &end {
        return Err(Error::DomainMismatch(format!(
            "input ends at {} but the reduction needs [0, {}]",
            rational::format(u.domain_end()),
            2 * n
        )));
    }
    Ok((1..=n)
        .map(|k| {
            let a = Rational::from_integer((2 * k - 1).into());
            let b = Rational::from_integer((2 * k).into());
            u.integral_over(&a, &b)
        })
        .collect())
}
