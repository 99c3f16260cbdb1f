//! Kernel objects on the positive half-line and their pointwise evaluation.
//!
//! Every concrete kernel here is "bump separable": a sum over blocks of
//! `Σ_{h,k} M_hk b(x - T + 1 - 2h) b(y - T + 1 - 2k)` with `h, k` running
//! over `1..=n`, a unit bump `b` and a block offset `T`. [`LayoutBlock`]
//! exposes that structure so the operator and norm code can integrate
//! exactly instead of sampling.

mod blockdiag;
mod bump;
mod matrix;

pub use blockdiag::{BlockCount, BlockDiagKernel, BlockSource, ExplicitBlocks};
pub use bump::{l1_distance as bump_l1_distance, Bump, Epsilon};
pub use matrix::{sylvester_sign, Factor, SylvesterShift, SymMatrix};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// One bump-separable block of a kernel.
#[derive(Debug, Clone)]
pub struct LayoutBlock {
    pub bump: Bump,
    pub offset: Rational,
    pub matrix: SymMatrix,
}

impl LayoutBlock {
    /// Shift applied to the bump argument for zero-based index `h`:
    /// the bump is evaluated at `x - (offset + 2h + 1)`.
    pub fn cell_shift(&self, h: usize) -> Rational {
        &self.offset + Rational::from_integer((2 * h + 1).into())
    }
}

/// A symmetric kernel `K(x, y)` on the positive quadrant.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: &Rational, y: &Rational) -> Rational;

    fn eval_f64(&self, x: f64, y: f64) -> f64;

    /// Closed interval containing the support along either axis, or `None`
    /// when the support is unbounded.
    fn support(&self) -> Option<(Rational, Rational)>;

    /// Points along an axis where the piecewise-polynomial structure changes.
    fn breakpoints(&self) -> Vec<Rational>;

    /// Bump-separable structure, when the kernel has one and it is finite.
    fn layout(&self) -> Option<Vec<LayoutBlock>> {
        None
    }

    /// Per-coordinate Lipschitz constant; `None` when none is claimed
    /// (discontinuous kernels, or unbounded block sequences).
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }
}

/// Shared evaluation for `Σ_{h,k} M_hk b(x + 1 - 2h) b(y + 1 - 2k)`.
#[derive(Debug, Clone)]
struct BumpGrid {
    matrix: SymMatrix,
    bump: Bump,
}

impl BumpGrid {
    /// Zero-based index `h` with `b(x + 1 - 2(h+1)) != 0`, and that value.
    /// Distinct cells have disjoint bump supports since `ε < 1/2`; at a
    /// shared point the lower index wins.
    fn locate(&self, x: &Rational) -> Option<(usize, Rational)> {
        let two = Rational::from_integer(2.into());
        let base = ((x + Rational::one()) / &two).floor().to_integer();
        let base = base.to_i64()?;
        for h1 in [base, base + 1] {
            if h1 < 1 || h1 > self.matrix.dim() as i64 {
                continue;
            }
            let arg = x + Rational::one() - Rational::from_integer((2 * h1).into());
            let v = self.bump.eval(&arg);
            if !v.is_zero() {
                return Some(((h1 - 1) as usize, v));
            }
        }
        None
    }

    fn locate_f64(&self, x: f64) -> Option<(usize, f64)> {
        if !x.is_finite() {
            return None;
        }
        let base = ((x + 1.0) / 2.0).floor();
        for h1 in [base, base + 1.0] {
            if h1 < 1.0 || h1 > self.matrix.dim() as f64 {
                continue;
            }
            let v = self.bump.eval_f64(x + 1.0 - 2.0 * h1);
            if v != 0.0 {
                return Some((h1 as usize - 1, v));
            }
        }
        None
    }

    fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        match (self.locate(x), self.locate(y)) {
            (Some((h, bx)), Some((k, by))) => self.matrix.entry(h, k) * bx * by,
            _ => Rational::zero(),
        }
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        match (self.locate_f64(x), self.locate_f64(y)) {
            (Some((h, bx)), Some((k, by))) => self.matrix.entry_f64(h, k) * (bx * by),
            _ => 0.0,
        }
    }

    fn support(&self) -> (Rational, Rational) {
        let (lo, hi) = self.bump.support();
        let last = Rational::from_integer((2 * self.matrix.dim() - 1).into());
        (lo + Rational::one(), hi + last)
    }

    fn breakpoints(&self) -> Vec<Rational> {
        let base = self.bump.breakpoints();
        let mut out: Vec<Rational> = (0..self.matrix.dim())
            .flat_map(|h| {
                let shift = Rational::from_integer((2 * h + 1).into());
                base.iter().map(move |b| b + &shift)
            })
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn layout(&self) -> LayoutBlock {
        LayoutBlock {
            bump: self.bump.clone(),
            offset: Rational::zero(),
            matrix: self.matrix.clone(),
        }
    }
}

/// `M̄(x, y) = M_hk` on the cell `[2h-1, 2h] x [2k-1, 2k]`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct PiecewiseConstantKernel {
    grid: BumpGrid,
}

impl PiecewiseConstantKernel {
    pub fn new(matrix: SymMatrix) -> Self {
        Self {
            grid: BumpGrid {
                matrix,
                bump: Bump::Indicator,
            },
        }
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.grid.matrix
    }
}

impl Kernel for PiecewiseConstantKernel {
    fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.grid.eval(x, y)
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.grid.eval_f64(x, y)
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        Some(self.grid.support())
    }

    fn breakpoints(&self) -> Vec<Rational> {
        self.grid.breakpoints()
    }

    fn layout(&self) -> Option<Vec<LayoutBlock>> {
        Some(vec![self.grid.layout()])
    }
}

/// Continuous approximation `M̄_ε(x, y) = Σ M_hk g_ε(x+1-2h) g_ε(y+1-2k)`.
#[derive(Debug, Clone)]
pub struct TrapezoidKernel {
    grid: BumpGrid,
}

impl TrapezoidKernel {
    pub fn new(matrix: SymMatrix, epsilon: Epsilon) -> Self {
        Self {
            grid: BumpGrid {
                matrix,
                bump: Bump::Trapezoid(epsilon),
            },
        }
    }

    pub fn with_epsilon(matrix: SymMatrix, epsilon: Rational) -> Result<Self> {
        Ok(Self::new(matrix, Epsilon::new(epsilon)?))
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.grid.matrix
    }

    pub fn epsilon(&self) -> &Epsilon {
        self.grid.bump.epsilon().expect("trapezoid bump")
    }

    pub fn bump(&self) -> &Bump {
        &self.grid.bump
    }

    /// Number of rank factors `B_r`, when the matrix carries a factor.
    pub fn factor_count(&self) -> Option<usize> {
        self.grid.matrix.factor().map(Factor::cols)
    }

    /// `B_r(x) = Σ_h V_hr g_ε(x + 1 - 2h)` for zero-based column `r`.
    pub fn factor_function(&self, r: usize, x: &Rational) -> Result<Rational> {
        let factor = self.grid.matrix.factor().ok_or(Error::MissingFactor)?;
        if r >= factor.cols() {
            return Err(Error::FactorIndex {
                index: r,
                columns: factor.cols(),
            });
        }
        Ok(match self.grid.locate(x) {
            Some((h, b)) => factor.entry(h, r) * b,
            None => Rational::zero(),
        })
    }
}

impl Kernel for TrapezoidKernel {
    fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        self.grid.eval(x, y)
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.grid.eval_f64(x, y)
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        Some(self.grid.support())
    }

    fn breakpoints(&self) -> Vec<Rational> {
        self.grid.breakpoints()
    }

    fn layout(&self) -> Option<Vec<LayoutBlock>> {
        Some(vec![self.grid.layout()])
    }

    /// `max|M_hk| · (1/(2ε)) · (1 + 1/(2ε))`.
    fn lipschitz_bound(&self) -> Option<f64> {
        let slope = self.grid.bump.slope_bound()?;
        let bound = self.grid.matrix.max_abs_entry().abs() * &slope * (Rational::one() + &slope);
        Some(rational::to_f64(&bound))
    }
}
