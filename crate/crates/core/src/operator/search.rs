use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::input::BoundedInput;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, LayoutBlock};
use crate::norms::{self, NormValue};
use crate::quadrature::{self, GaussLegendre};
use crate::rational::{self, Rational};

/// Largest block dimension whose sign witness is enumerated exactly when
/// seeding the search; larger blocks use the local-search witness.
pub const INIT_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Width of the constant pieces of candidate inputs.
    pub resolution: Rational,
    /// Maximum accepted flips per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(resolution: Rational, budget: usize) -> Self {
        Self {
            resolution,
            budget,
            restarts: 1,
            seed: norms::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    /// `‖K u‖₁` for the witness; a lower bound on `‖K‖_{∞,1}`.
    pub lower_bound: NormValue,
    #[serde(skip)]
    pub witness: BoundedInput,
    /// Best value after the start and after each accepted flip.
    pub history: Vec<f64>,
    pub flips: usize,
    pub segments: usize,
}

/// Uniform segments `[start + i r, start + (i+1) r)` covering the support.
fn segment_grid(kernel: &dyn Kernel, r: &Rational) -> Result<(Rational, usize)> {
    if r <= &Rational::zero() {
        return Err(Error::InvalidArgument("resolution must be positive".into()));
    }
    let (lo, hi) = kernel.support().ok_or(Error::UnboundedSupport)?;
    let first = (lo / r).floor().max(Rational::zero());
    let last = (hi / r).ceil();
    let count = (&last - &first)
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::InvalidArgument("too many segments".into()))?;
    Ok((first * r, count.max(1)))
}

/// Response matrix `B` (`rows x segments`) with `‖K u‖₁ = ‖B u‖₁` for every
/// `u` constant on the segments. Row `(block, h)` collects the band output
/// `z̄(h) = Σ_k M_hk ∫_seg b(y - shift_k) dy`, weighted by `∫ b`.
fn exact_response(
    layout: &[LayoutBlock],
    start: &Rational,
    step: &Rational,
    segs: usize,
) -> (Vec<Rational>, usize) {
    let rows: usize = layout.iter().map(|b| b.matrix.dim()).sum();
    let mut out = vec![Rational::zero(); rows * segs];
    let mut row0 = 0;
    for block in layout {
        let n = block.matrix.dim();
        let mass = block.bump.integral();
        let (blo, bhi) = block.bump.support();
        for k in 0..n {
            let shift = block.cell_shift(k);
            let (lo, hi) = (&blo + &shift, &bhi + &shift);
            let s0 = ((&lo - start) / step)
                .floor()
                .to_integer()
                .to_i64()
                .unwrap_or(0)
                .max(0) as usize;
            let s1 = (((&hi - start) / step)
                .ceil()
                .to_integer()
                .to_i64()
                .unwrap_or(0)
                .max(0) as usize)
                .min(segs);
            for s in s0..s1 {
                let a = start + step * Rational::from_integer(s.into());
                let b = &a + step;
                let w = block.bump.integral_over(&(&a - &shift), &(&b - &shift));
                if w.is_zero() {
                    continue;
                }
                let w = w * &mass;
                for h in 0..n {
                    let m = block.matrix.entry(h, k);
                    if !m.is_zero() {
                        out[(row0 + h) * segs + s] += m * &w;
                    }
                }
            }
        }
        row0 += n;
    }
    (out, rows)
}

/// Starting signs from each block's best matrix sign vector: a segment takes
/// the sign of the band containing its midpoint, `+1` elsewhere.
fn block_witness_init(
    layout: &[LayoutBlock],
    start: &Rational,
    step: &Rational,
    segs: usize,
    seed: u64,
) -> Vec<i8> {
    let mut init = vec![1i8; segs];
    let two = Rational::from_integer(2.into());
    for block in layout {
        let n = block.matrix.dim();
        let witness = if n <= INIT_ENUMERATION_CAP {
            norms::matrix_opnorm_inf1_exact(&block.matrix)
                .map(|(_, w)| w)
                .unwrap_or_else(|_| vec![1; n])
        } else {
            norms::matrix_opnorm_inf1_bounds(&block.matrix, seed)
                .witness
                .unwrap_or_else(|| vec![1; n])
        };
        let (blo, bhi) = block.bump.support();
        for (s, slot) in init.iter_mut().enumerate() {
            let mid = start
                + step * (Rational::from_integer(s.into()) + Rational::new(1.into(), 2.into()));
            // Candidate band from the midpoint, then check it is inside.
            let rel = (&mid - &block.offset - Rational::from_integer(1.into())) / &two;
            let base = rel.floor().to_integer().to_i64().unwrap_or(-1);
            for k in [base, base + 1] {
                if k < 0 || k as usize >= n {
                    continue;
                }
                let shift = block.cell_shift(k as usize);
                if mid > &blo + &shift && mid < &bhi + &shift {
                    *slot = witness[k as usize];
                }
            }
        }
    }
    init
}

/// Coordinate ascent over `±1` inputs constant on a `resolution` grid. The
/// returned value is `‖K u‖₁` for the witness `u`, hence a lower bound on
/// `‖K‖_{∞,1}`.
pub fn adversarial_search(kernel: &dyn Kernel, config: &SearchConfig) -> Result<SearchResult> {
    let step = &config.resolution;
    let (start, segs) = segment_grid(kernel, step)?;
    if let Some(layout) = kernel.layout() {
        let (response, rows) = exact_response(&layout, &start, step, segs);
        let init = block_witness_init(&layout, &start, step, segs, config.seed);
        let denom = rational::common_denominator(&response);
        let ints = response
            .iter()
            .map(|v| v.numer() * (&denom / v.denom()))
            .collect();
        let ascent = norms::multistart_exact(
            ints,
            rows,
            segs,
            Some(&init),
            config.restarts,
            config.seed,
            config.budget,
        );
        let value = Rational::new(ascent.value, denom.clone());
        let history = ascent
            .history
            .iter()
            .map(|v| rational::to_f64(&Rational::new(v.clone(), denom.clone())))
            .collect();
        return Ok(SearchResult {
            lower_bound: NormValue::exact(value),
            witness: BoundedInput::from_signs(&start, step, &ascent.signs)?,
            history,
            flips: ascent.flips,
            segments: segs,
        });
    }

    // Sampled route: rows are quadrature nodes in x with their weights.
    let (lo, hi) = kernel.support().ok_or(Error::UnboundedSupport)?;
    let (lo, hi) = (rational::to_f64(&lo), rational::to_f64(&hi));
    let bps: Vec<f64> = kernel.breakpoints().iter().map(rational::to_f64).collect();
    let rule = GaussLegendre::standard();
    let nodes: Vec<(f64, f64)> = quadrature::panels(lo, hi, &bps)
        .into_iter()
        .flat_map(|(a, b)| rule.mapped(a, b).collect::<Vec<_>>())
        .collect();
    let (s0, stepf) = (rational::to_f64(&start), rational::to_f64(step));
    let bps = &bps;
    let response: Vec<f64> = nodes
        .par_iter()
        .flat_map_iter(|&(x, w)| {
            (0..segs).map(move |s| {
                let a = s0 + stepf * s as f64;
                w * quadrature::integrate_1d(a, a + stepf, bps, |y| kernel.eval_f64(x, y))
            })
        })
        .collect();
    let ascent = norms::multistart(
        &response,
        nodes.len(),
        segs,
        None,
        config.restarts,
        config.seed,
        config.budget,
    );
    Ok(SearchResult {
        lower_bound: NormValue::approx(ascent.value),
        witness: BoundedInput::from_signs(&start, step, &ascent.signs)?,
        history: ascent.history,
        flips: ascent.flips,
        segments: segs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{PiecewiseConstantKernel, SymMatrix, TrapezoidKernel};
    use crate::rational::{int, rat};

    #[test]
    fn two_by_two_reaches_matrix_norm() {
        let k =
            PiecewiseConstantKernel::new(SymMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]).unwrap());
        let r = adversarial_search(&k, &SearchConfig::new(int(1), 100)).unwrap();
        assert_eq!(r.lower_bound.exact, Some(int(6)));
        assert_eq!(r.witness.eval(&rat(3, 2)), int(1));
        assert_eq!(r.witness.eval(&rat(7, 2)), int(1));
    }

    #[test]
    fn zero_kernel() {
        let k = PiecewiseConstantKernel::new(SymMatrix::zeros(2));
        let r = adversarial_search(&k, &SearchConfig::new(int(1), 100)).unwrap();
        assert_eq!(r.lower_bound.exact, Some(int(0)));
    }

    #[test]
    fn trapezoid_lands_in_bracket() {
        let k = TrapezoidKernel::with_epsilon(SymMatrix::identity(1), rat(1, 10)).unwrap();
        let r = adversarial_search(&k, &SearchConfig::new(rat(1, 2), 100)).unwrap();
        assert!((0.6..=1.4).contains(&r.lower_bound.approx));
        assert!(r.history.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sampled_route_for_kernels_without_layout() {
        let k = crate::verification::Negated(PiecewiseConstantKernel::new(SymMatrix::identity(1)));
        let r = adversarial_search(&k, &SearchConfig::new(int(1), 100)).unwrap();
        assert!(r.lower_bound.exact.is_none());
        assert!((r.lower_bound.approx - 1.0).abs() < 1e-9);
    }
}
