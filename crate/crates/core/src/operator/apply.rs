use std::io::Write;

use num_traits::Zero;
use serde::Serialize;

use super::input::BoundedInput;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, LayoutBlock};
use crate::piecewise::{Piece, PiecewisePoly};
use crate::quadrature;
use crate::rational::{self, rat, Rational};

/// Default output sampling step.
pub fn default_step() -> Rational {
    rat(1, 8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form integration of the piecewise-polynomial output.
    ExactPiecewise,
    /// Composite Gauss-Legendre on breakpoint-aligned panels.
    Quadrature,
}

/// How to evaluate the operator; `Auto` prefers the exact route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Quadrature,
}

/// Output `y_u = K u` sampled on a grid, with its L1 norm.
#[derive(Debug, Clone)]
pub struct OperatorOutput {
    pub grid: Vec<Rational>,
    pub values: Vec<f64>,
    pub l1_estimate: f64,
    /// Exact `‖K u‖₁` on the exact route.
    pub l1_exact: Option<Rational>,
    pub method: Method,
    /// Set when `Auto` had to fall back to quadrature.
    pub fallback_warning: bool,
    /// The exact output function on the exact route.
    pub profile: Option<PiecewisePoly>,
}

impl OperatorOutput {
    /// CSV with header `x,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.write_record([rational::to_f64(x).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Grid with step `step` covering the kernel support padded by one unit on
/// each side, clamped at zero.
pub fn default_grid(kernel: &dyn Kernel, step: &Rational) -> Result<Vec<Rational>> {
    if step <= &Rational::zero() {
        return Err(Error::InvalidArgument("grid step must be positive".into()));
    }
    let (lo, hi) = kernel.support().ok_or(Error::UnboundedSupport)?;
    let one = Rational::from_integer(1.into());
    let lo = (lo - &one).max(Rational::zero());
    let hi = hi + one;
    let first = (lo / step).floor();
    let last = (hi / step).ceil();
    let count = (&last - &first).to_integer();
    let count: usize = count
        .try_into()
        .map_err(|_| Error::InvalidArgument("grid too large".into()))?;
    Ok((0..=count)
        .map(|i| (&first + Rational::from_integer(i.into())) * step)
        .collect())
}

/// Per-block band responses `z̄ = M ū_b`, where
/// `ū_b(k) = ∫ b(y - shift_k) u(y) dy`.
fn band_outputs(block: &LayoutBlock, u: &BoundedInput) -> Vec<Rational> {
    let n = block.matrix.dim();
    let moments: Vec<Rational> = (0..n)
        .map(|k| u.bump_moment(&block.bump, &block.cell_shift(k)))
        .collect();
    let active: Vec<usize> = (0..n).filter(|&k| !moments[k].is_zero()).collect();
    (0..n)
        .map(|h| {
            active
                .iter()
                .map(|&k| block.matrix.entry(h, k) * &moments[k])
                .fold(Rational::zero(), |a, b| a + b)
        })
        .collect()
}

fn exact_profile(layout: &[LayoutBlock], u: &BoundedInput) -> PiecewisePoly {
    let mut pieces: Vec<Piece> = Vec::new();
    for block in layout {
        for (h, z) in band_outputs(block, u).iter().enumerate() {
            if !z.is_zero() {
                pieces.extend(block.bump.shifted_pieces(&block.cell_shift(h), z));
            }
        }
    }
    PiecewisePoly::from_pieces(pieces)
}

/// `[K u](x) = ∫_0^∞ K(x, y) u(y) dy` on `grid` (default grid when `None`).
pub fn apply_operator(
    kernel: &dyn Kernel,
    u: &BoundedInput,
    grid: Option<Vec<Rational>>,
    method: MethodChoice,
) -> Result<OperatorOutput> {
    let grid = match grid {
        Some(g) => g,
        None => default_grid(kernel, &default_step())?,
    };
    let layout = match method {
        MethodChoice::Auto => kernel.layout(),
        MethodChoice::Quadrature => None,
    };
    if let Some(layout) = layout {
        let profile = exact_profile(&layout, u);
        let abs = profile.abs_integral();
        let values = grid
            .iter()
            .map(|x| rational::to_f64(&profile.eval(x)))
            .collect();
        return Ok(OperatorOutput {
            grid,
            values,
            l1_estimate: rational::to_f64(&abs.value),
            l1_exact: abs.exact.then_some(abs.value),
            method: Method::ExactPiecewise,
            fallback_warning: false,
            profile: Some(profile),
        });
    }

    let (lo, hi) = kernel.support().ok_or(Error::UnboundedSupport)?;
    let (lo, hi) = (rational::to_f64(&lo), rational::to_f64(&hi));
    let kernel_bps: Vec<f64> = kernel.breakpoints().iter().map(rational::to_f64).collect();
    let mut inner_bps = kernel_bps.clone();
    inner_bps.extend(u.breakpoints().iter().map(rational::to_f64));
    let output = |x: f64| {
        quadrature::integrate_1d(lo, hi, &inner_bps, |y| {
            kernel.eval_f64(x, y) * u.eval_f64(y)
        })
    };
    let values = grid.iter().map(|x| output(rational::to_f64(x))).collect();
    let l1_estimate = quadrature::integrate_1d(lo, hi, &kernel_bps, |x| output(x).abs());
    Ok(OperatorOutput {
        grid,
        values,
        l1_estimate,
        l1_exact: None,
        method: Method::Quadrature,
        fallback_warning: method == MethodChoice::Auto,
        profile: None,
    })
}
