//! Matrix and kernel norms: `‖·‖₁` and the `(∞,1)` operator norm
//! `sup_{‖v‖∞ ≤ 1} ‖M v‖₁`.
//!
//! The operator norm of a matrix is a maximum of a convex function over the
//! unit cube, so it is attained at a sign vector. Exact values enumerate
//! sign vectors in Gray-code order (one column update per step) with the
//! first coordinate pinned to `+1`, since `v` and `-v` give the same value.

use std::ops::{AddAssign, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kernel::{Bump, Epsilon, Kernel, PiecewiseConstantKernel, SymMatrix, TrapezoidKernel};
use crate::linalg;
use crate::piecewise::Poly;
use crate::rational::{self, Rational};

/// Largest dimension for exhaustive sign enumeration.
pub const ENUMERATION_CAP: usize = 24;
/// Random restarts of the single-flip local search.
pub const LOCAL_SEARCH_RESTARTS: usize = 32;
pub const DEFAULT_SEED: u64 = 0x5eed_0001;

/// Numeric types the sign searches run on: machine or big integers for
/// exact work, `f64` for sampled operators.
pub trait SearchScalar:
    Clone
    + Send
    + Sync
    + PartialOrd
    + Signed
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
{
}

impl<T> SearchScalar for T where
    T: Clone
        + Send
        + Sync
        + PartialOrd
        + Signed
        + for<'a> AddAssign<&'a T>
        + for<'a> SubAssign<&'a T>
{
}

fn l1<T: SearchScalar>(y: &[T]) -> T {
    y.iter().fold(T::zero(), |mut acc, v| {
        acc += &v.abs();
        acc
    })
}

/// `B u` for row-major `B` (`rows x cols`) and a sign vector `u`.
fn apply<T: SearchScalar>(b: &[T], rows: usize, cols: usize, u: &[i8]) -> Vec<T> {
    (0..rows)
        .map(|i| {
            let mut acc = T::zero();
            for j in 0..cols {
                if u[j] >= 0 {
                    acc += &b[i * cols + j];
                } else {
                    acc -= &b[i * cols + j];
                }
            }
            acc
        })
        .collect()
}

/// Exhaustive maximum of `‖A v‖₁` over sign vectors with `v_0 = +1`, for a
/// square symmetric row-major `A`. Returns the value and the first maximizer
/// in Gray-code order.
pub fn enumerate_signs<T: SearchScalar>(a: &[T], n: usize) -> (T, Vec<i8>) {
    assert!(n >= 1 && a.len() == n * n);
    let free = n - 1;
    let total: u64 = 1u64 << free;
    let chunk_bits = free.min(12);
    let chunk_len: u64 = 1u64 << chunk_bits;
    let chunks = total / chunk_len;
    let twice: Vec<T> = a
        .iter()
        .map(|v| {
            let mut d = v.clone();
            d += v;
            d
        })
        .collect();

    let signs_of = |gray: u64| -> Vec<i8> {
        let mut v = vec![1i8; n];
        for (b, slot) in v.iter_mut().skip(1).enumerate() {
            if gray >> b & 1 == 1 {
                *slot = -1;
            }
        }
        v
    };

    let (best_value, best_index) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk_len;
            let mut v = signs_of(start ^ (start >> 1));
            let mut y = apply(a, n, n, &v);
            let mut best = (l1(&y), start);
            for t in start + 1..start + chunk_len {
                let j = t.trailing_zeros() as usize + 1;
                // Symmetric: column j is row j.
                let col = &twice[j * n..(j + 1) * n];
                if v[j] > 0 {
                    y.iter_mut().zip(col).for_each(|(yi, c)| *yi -= c);
                } else {
                    y.iter_mut().zip(col).for_each(|(yi, c)| *yi += c);
                }
                v[j] = -v[j];
                let val = l1(&y);
                if val > best.0 {
                    best = (val, t);
                }
            }
            best
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one chunk");
    (best_value, signs_of(best_index ^ (best_index >> 1)))
}

/// Result of a steepest single-flip ascent.
#[derive(Debug, Clone)]
pub struct Ascent<T> {
    pub value: T,
    pub signs: Vec<i8>,
    /// Objective after the start and after every accepted flip.
    pub history: Vec<T>,
    pub flips: usize,
}

/// Steepest single-flip ascent of `‖B u‖₁` over sign vectors `u`, starting
/// at `start`, accepting at most `max_flips` strictly improving flips.
pub fn steepest_ascent<T: SearchScalar>(
    b: &[T],
    rows: usize,
    cols: usize,
    start: Vec<i8>,
    max_flips: usize,
) -> Ascent<T> {
    assert_eq!(b.len(), rows * cols);
    assert_eq!(start.len(), cols);
    let columns: Vec<Vec<T>> = (0..cols)
        .map(|j| {
            (0..rows)
                .map(|i| {
                    let mut d = b[i * cols + j].clone();
                    d += &b[i * cols + j];
                    d
                })
                .collect()
        })
        .collect();
    let mut u = start;
    let mut y = apply(b, rows, cols, &u);
    let mut value = l1(&y);
    let mut history = vec![value.clone()];
    let mut flips = 0;
    let mut trial = vec![T::zero(); rows];
    while flips < max_flips {
        let mut best: Option<(T, usize)> = None;
        for (j, col) in columns.iter().enumerate() {
            for ((t, yi), c) in trial.iter_mut().zip(&y).zip(col) {
                *t = yi.clone();
                if u[j] > 0 {
                    *t -= c;
                } else {
                    *t += c;
                }
            }
            let val = l1(&trial);
            let better = match &best {
                Some((bv, _)) => val > *bv,
                None => val > value,
            };
            if better {
                best = Some((val, j));
            }
        }
        let Some((val, j)) = best else { break };
        for (yi, c) in y.iter_mut().zip(&columns[j]) {
            if u[j] > 0 {
                *yi -= c;
            } else {
                *yi += c;
            }
        }
        u[j] = -u[j];
        value = val;
        history.push(value.clone());
        flips += 1;
    }
    Ascent {
        value,
        signs: u,
        history,
        flips,
    }
}

/// Integer matrix in the narrowest exact representation.
pub(crate) enum IntMatrix {
    Small(Vec<i128>),
    Big(Vec<BigInt>),
}

impl IntMatrix {
    /// Picks `i128` when no partial sum of a row can overflow it.
    pub(crate) fn new(entries: Vec<BigInt>, cols: usize) -> Self {
        let limit = BigInt::from(i128::MAX) / BigInt::from(4 * cols.max(1) as u64);
        let fits = entries.iter().all(|e| e.abs() <= limit);
        if fits {
            Self::Small(
                entries
                    .iter()
                    .map(|e| e.to_i128().expect("checked"))
                    .collect(),
            )
        } else {
            Self::Big(entries)
        }
    }
}

fn small_to_big(v: i128) -> BigInt {
    BigInt::from(v)
}

/// A norm value: exact when known, always with a float approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormValue {
    pub exact: Option<Rational>,
    pub approx: f64,
}

impl NormValue {
    pub fn exact(value: Rational) -> Self {
        let approx = rational::to_f64(&value);
        Self {
            exact: Some(value),
            approx,
        }
    }

    pub fn approx(approx: f64) -> Self {
        Self {
            exact: None,
            approx,
        }
    }
}

impl Serialize for NormValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("NormValue", 2)?;
        st.serialize_field("value", &self.exact.as_ref().map(rational::format))?;
        st.serialize_field("approx", &self.approx)?;
        st.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Exact,
    Bounds,
}

/// `‖·‖₁` together with the `(∞,1)` norm as an exact value or a bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub l1: NormValue,
    pub exact: Option<NormValue>,
    pub lower: Option<NormValue>,
    pub upper: Option<NormValue>,
    /// Sign vector attaining `exact`, or `lower` when no exact value exists.
    pub witness: Option<Vec<i8>>,
}

impl NormReport {
    pub fn flavor(&self) -> Flavor {
        if self.exact.is_some() {
            Flavor::Exact
        } else {
            Flavor::Bounds
        }
    }

    /// `lower ≤ exact ≤ upper` over whichever values are present.
    pub fn is_consistent(&self) -> bool {
        let vals = [&self.lower, &self.exact, &self.upper];
        let present: Vec<&NormValue> = vals.iter().filter_map(|v| v.as_ref()).collect();
        present
            .windows(2)
            .all(|w| match (&w[0].exact, &w[1].exact) {
                (Some(a), Some(b)) => a <= b,
                _ => w[0].approx <= w[1].approx * (1.0 + 1e-12) + 1e-300,
            })
    }

    /// Best certified finite upper bound on the operator norm.
    pub fn certified_upper(&self) -> Option<&NormValue> {
        self.exact.as_ref().or(self.upper.as_ref())
    }
}

impl Serialize for NormReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct Op<'a> {
            #[serde(skip_serializing_if = "Option::is_none")]
            exact: Option<&'a NormValue>,
            #[serde(skip_serializing_if = "Option::is_none")]
            lower: Option<&'a NormValue>,
            #[serde(skip_serializing_if = "Option::is_none")]
            upper: Option<&'a NormValue>,
        }
        let mut st = s.serialize_struct("NormReport", 5)?;
        st.serialize_field("schema", "1")?;
        st.serialize_field("l1", &self.l1)?;
        st.serialize_field(
            "op_inf1",
            &Op {
                exact: self.exact.as_ref(),
                lower: self.lower.as_ref(),
                upper: self.upper.as_ref(),
            },
        )?;
        st.serialize_field("flavor", &self.flavor())?;
        st.serialize_field("witness", &self.witness)?;
        st.end()
    }
}

/// `Σ_ij |M_ij|`, exact.
pub fn matrix_l1(m: &SymMatrix) -> Rational {
    if let Some(s) = m.sylvester() {
        // Off-diagonal entries are ±1; for order ≥ 2 the diagonal of the
        // Sylvester matrix is half +1 and half -1.
        let n = m.dim();
        let shift = Rational::from_integer(s.shift.clone());
        let one = Rational::one();
        let diag = if n == 1 {
            (&shift + &one).abs()
        } else {
            Rational::from_integer((n / 2).into()) * ((&shift + &one).abs() + (&shift - &one).abs())
        };
        let off = Rational::from_integer(((n * n - n) as u64).into());
        return s.scale.abs() * (off + diag);
    }
    (0..m.dim())
        .flat_map(|i| (0..m.dim()).map(move |j| (i, j)))
        .map(|(i, j)| m.entry(i, j).abs())
        .fold(Rational::zero(), |a, b| a + b)
}

/// `‖M‖_{∞,1}` by exhaustive enumeration, with an attaining sign vector.
pub fn matrix_opnorm_inf1_exact(m: &SymMatrix) -> Result<(Rational, Vec<i8>)> {
    matrix_opnorm_inf1_exact_capped(m, ENUMERATION_CAP)
}

pub fn matrix_opnorm_inf1_exact_capped(m: &SymMatrix, cap: usize) -> Result<(Rational, Vec<i8>)> {
    let n = m.dim();
    if n > cap {
        return Err(Error::DimensionTooLarge { n, cap });
    }
    let (nums, denom) = m.integer_form();
    let (value, signs) = match IntMatrix::new(nums, n) {
        IntMatrix::Small(a) => {
            let (v, s) = enumerate_signs(&a, n);
            (small_to_big(v), s)
        }
        IntMatrix::Big(a) => enumerate_signs(&a, n),
    };
    Ok((Rational::new(value, denom), signs))
}

/// Best of `restarts` steepest-ascent runs on `‖B u‖₁`. Restart 0 starts
/// from `init` (or all ones), the others from random signs drawn from a
/// per-restart seed, so the result does not depend on scheduling.
pub fn multistart<T: SearchScalar>(
    b: &[T],
    rows: usize,
    cols: usize,
    init: Option<&[i8]>,
    restarts: usize,
    seed: u64,
    max_flips: usize,
) -> Ascent<T> {
    (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let start = if r == 0 {
                init.map_or_else(|| vec![1; cols], <[i8]>::to_vec)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                (0..cols)
                    .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                    .collect()
            };
            (r, steepest_ascent(b, rows, cols, start, max_flips))
        })
        .reduce_with(|a, b| {
            if b.1.value > a.1.value || (b.1.value == a.1.value && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart")
        .1
}

/// [`multistart`] on an integer matrix, run in `i128` when that is safe.
pub(crate) fn multistart_exact(
    b: Vec<BigInt>,
    rows: usize,
    cols: usize,
    init: Option<&[i8]>,
    restarts: usize,
    seed: u64,
    max_flips: usize,
) -> Ascent<BigInt> {
    match IntMatrix::new(b, cols) {
        IntMatrix::Small(a) => {
            let res = multistart(&a, rows, cols, init, restarts, seed, max_flips);
            Ascent {
                value: small_to_big(res.value),
                signs: res.signs,
                history: res.history.into_iter().map(small_to_big).collect(),
                flips: res.flips,
            }
        }
        IntMatrix::Big(a) => multistart(&a, rows, cols, init, restarts, seed, max_flips),
    }
}

/// Certified bracket for `‖M‖_{∞,1}` at any dimension: the upper leg is
/// `min(‖M‖₁, n σ_max)` and the lower leg a local-search witness.
pub fn matrix_opnorm_inf1_bounds(m: &SymMatrix, seed: u64) -> NormReport {
    let n = m.dim();
    let l1 = matrix_l1(m);
    let sigma = linalg::symmetric_sigma_max(&m.to_f64(), n);
    // Slack covers the Jacobi tolerance and rounding in the spectral leg.
    let spectral = n as f64 * sigma * (1.0 + 1e-9) + 1e-12;
    let upper = if rational::to_f64(&l1) <= spectral {
        NormValue::exact(l1.clone())
    } else {
        NormValue::approx(spectral)
    };
    let (nums, denom) = m.integer_form();
    let ascent = multistart_exact(nums, n, n, None, LOCAL_SEARCH_RESTARTS, seed, usize::MAX);
    let lower = Rational::new(ascent.value, denom);
    NormReport {
        l1: NormValue::exact(l1),
        exact: None,
        lower: Some(NormValue::exact(lower)),
        upper: Some(upper),
        witness: Some(ascent.signs),
    }
}

/// Exact report when `n` is within the enumeration cap, bounds otherwise.
pub fn matrix_norm_report(m: &SymMatrix, seed: u64) -> NormReport {
    match matrix_opnorm_inf1_exact(m) {
        Ok((value, witness)) => NormReport {
            l1: NormValue::exact(matrix_l1(m)),
            exact: Some(NormValue::exact(value)),
            lower: None,
            upper: None,
            witness: Some(witness),
        },
        Err(_) => matrix_opnorm_inf1_bounds(m, seed),
    }
}

/// `‖M̄‖₁ = Σ |M_hk| (∫g)²`.
pub fn kernel_l1_pwc(k: &PiecewiseConstantKernel) -> Rational {
    let mass = Bump::Indicator.integral();
    matrix_l1(k.matrix()) * &mass * &mass
}

/// `‖M̄_ε‖₁ = Σ |M_hk| (∫g_ε)²`: the terms have disjoint supports.
pub fn kernel_l1_trap(k: &TrapezoidKernel) -> Rational {
    let mass = k.bump().integral();
    matrix_l1(k.matrix()) * &mass * &mass
}

/// `∫∫ |g(x)g(y) - g_ε(x)g_ε(y)|` over the plane, exact.
///
/// On each cell of the breakpoint grid both products are polynomial and the
/// difference has constant sign: it is `≤ 0` where `g⊗g = 1` (since
/// `g_ε ≤ 1`) and `≥ 0` where `g⊗g = 0`.
pub fn cell_l1_distance(epsilon: &Epsilon) -> Rational {
    let trap = Bump::Trapezoid(epsilon.clone());
    let ind = Bump::Indicator;
    let mut knots: Vec<Rational> = trap.breakpoints();
    knots.extend(ind.breakpoints());
    knots.sort();
    knots.dedup();
    let polys_on = |lo: &Rational, hi: &Rational| -> (Poly, Rational) {
        let mid = (lo + hi) / Rational::from_integer(2.into());
        let p = trap
            .pieces()
            .into_iter()
            .find(|p| p.lo <= mid && mid <= p.hi)
            .map(|p| p.poly)
            .unwrap_or_else(Poly::zero);
        (p, ind.eval(&mid))
    };
    let mut total = Rational::zero();
    for wx in knots.windows(2) {
        let (px, gx) = polys_on(&wx[0], &wx[1]);
        let ix = px.integral(&wx[0], &wx[1]);
        for wy in knots.windows(2) {
            let (py, gy) = polys_on(&wy[0], &wy[1]);
            let iy = py.integral(&wy[0], &wy[1]);
            let area = (&wx[1] - &wx[0]) * (&wy[1] - &wy[0]);
            // ∫∫ (g_ε⊗g_ε - g⊗g) on the cell.
            let signed = &ix * &iy - &gx * &gy * area;
            total += signed.abs();
        }
    }
    total
}

/// `‖M̄ - M̄_ε‖₁`, exact. Terms of distinct cells have disjoint supports.
pub fn kernel_l1_distance_pwc_trap(m: &SymMatrix, epsilon: &Epsilon) -> Rational {
    matrix_l1(m) * cell_l1_distance(epsilon)
}

/// `‖M̄‖_{∞,1} = ‖M‖_{∞,1}`.
pub fn kernel_opnorm_pwc(k: &PiecewiseConstantKernel) -> Result<(Rational, Vec<i8>)> {
    matrix_opnorm_inf1_exact(k.matrix())
}

/// Bracket `‖M‖_{∞,1} ± 4‖M‖₁ε` for `‖M̄_ε‖_{∞,1}`, lower leg clamped at 0.
pub fn kernel_opnorm_trap_bracket(k: &TrapezoidKernel) -> Result<NormReport> {
    let (op, _) = matrix_opnorm_inf1_exact(k.matrix())?;
    let l1 = matrix_l1(k.matrix());
    let radius = Rational::from_integer(4.into()) * &l1 * k.epsilon().value();
    let lower = (&op - &radius).max(Rational::zero());
    let upper = &op + &radius;
    Ok(NormReport {
        l1: NormValue::exact(kernel_l1_trap(k)),
        exact: None,
        lower: Some(NormValue::exact(lower)),
        upper: Some(NormValue::exact(upper)),
        witness: None,
    })
}

/// Quadrature estimate of `∫∫ |K|` over the kernel's support, with panels
/// aligned to its breakpoints.
pub fn quadrature_l1(k: &dyn Kernel) -> Result<f64> {
    let (lo, hi) = k.support().ok_or(Error::UnboundedSupport)?;
    let bps: Vec<f64> = k.breakpoints().iter().map(rational::to_f64).collect();
    Ok(crate::quadrature::integrate_2d(
        rational::to_f64(&lo),
        rational::to_f64(&hi),
        &bps,
        |x, y| k.eval_f64(x, y).abs(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn m(rows: &[&[i64]]) -> SymMatrix {
        SymMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn l1_examples() {
        assert_eq!(matrix_l1(&m(&[&[2, 1], &[1, 2]])), int(6));
        assert_eq!(matrix_l1(&SymMatrix::identity(5)), int(5));
        assert_eq!(matrix_l1(&SymMatrix::zeros(3)), int(0));
    }

    #[test]
    fn exact_opnorm_examples() {
        let (v, w) = matrix_opnorm_inf1_exact(&m(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!((v, w), (int(6), vec![1, 1]));
        let (v, w) = matrix_opnorm_inf1_exact(&m(&[&[1, -1], &[-1, 1]])).unwrap();
        assert_eq!((v, w), (int(4), vec![1, -1]));
        for n in 1..=6 {
            assert_eq!(
                matrix_opnorm_inf1_exact(&SymMatrix::identity(n)).unwrap().0,
                int(n as i64)
            );
        }
    }

    #[test]
    fn witness_reproduces_value() {
        let a = m(&[&[3, -1, 2], &[-1, 4, 0], &[2, 0, -5]]);
        let (v, w) = matrix_opnorm_inf1_exact(&a).unwrap();
        let y = a.apply_signs(&w);
        assert_eq!(y.iter().map(Signed::abs).fold(int(0), |x, y| x + y), v);
    }

    #[test]
    fn enumeration_cap_enforced() {
        let big = SymMatrix::identity(ENUMERATION_CAP + 1);
        assert!(matches!(
            matrix_opnorm_inf1_exact(&big),
            Err(Error::DimensionTooLarge { n: 25, cap: 24 })
        ));
    }

    #[test]
    fn bounds_examples() {
        let r = matrix_opnorm_inf1_bounds(&SymMatrix::identity(4), DEFAULT_SEED);
        assert_eq!(r.upper.as_ref().unwrap().exact, Some(int(4)));
        assert_eq!(r.lower.as_ref().unwrap().exact, Some(int(4)));
        let r = matrix_opnorm_inf1_bounds(&m(&[&[2, 1], &[1, 2]]), DEFAULT_SEED);
        assert_eq!(r.upper.as_ref().unwrap().exact, Some(int(6)));
        assert_eq!(r.lower.as_ref().unwrap().exact, Some(int(6)));
        assert_eq!(r.witness, Some(vec![1, 1]));
        assert!(r.is_consistent());
    }

    #[test]
    fn spectral_leg_can_beat_l1() {
        // Order-4 Hadamard: ‖M‖₁ = 16 but n σ_max = 4·2 = 8.
        let h = m(&[
            &[1, 1, 1, 1],
            &[1, -1, 1, -1],
            &[1, 1, -1, -1],
            &[1, -1, -1, 1],
        ]);
        let r = matrix_opnorm_inf1_bounds(&h, DEFAULT_SEED);
        let up = r.upper.unwrap();
        assert!(up.exact.is_none());
        assert!((up.approx - 8.0).abs() < 1e-6);
        assert_eq!(r.lower.unwrap().exact, Some(int(8)));
    }

    #[test]
    fn kernel_l1_examples() {
        assert_eq!(
            kernel_l1_pwc(&PiecewiseConstantKernel::new(SymMatrix::identity(1))),
            int(1)
        );
        let k = TrapezoidKernel::with_epsilon(SymMatrix::identity(1), rat(1, 4)).unwrap();
        assert_eq!(kernel_l1_trap(&k), int(1));
        let k = TrapezoidKernel::with_epsilon(m(&[&[2, 1], &[1, 2]]), rat(1, 10)).unwrap();
        assert_eq!(kernel_l1_trap(&k), int(6));
    }

    #[test]
    fn cell_distance_closed_form() {
        // Independent derivation: with J = ∫_0^1 g_ε = 1 - ε/2, the distance is
        // (1 - J²) inside the unit square plus (1 - J²) outside.
        for (p, q) in [(1, 4), (1, 8), (1, 3), (2, 5)] {
            let e = rat(p, q);
            let j = int(1) - &e / int(2);
            let expected = int(2) * (int(1) - &j * &j);
            assert_eq!(cell_l1_distance(&Epsilon::new(e).unwrap()), expected);
        }
    }

    #[test]
    fn distance_respects_bound() {
        let e = Epsilon::new(rat(1, 4)).unwrap();
        let d = kernel_l1_distance_pwc_trap(&SymMatrix::identity(1), &e);
        assert!(d <= int(1));
        assert_eq!(
            kernel_l1_distance_pwc_trap(&SymMatrix::zeros(2), &e),
            int(0)
        );
    }

    #[test]
    fn trap_bracket_example() {
        let k = TrapezoidKernel::with_epsilon(SymMatrix::identity(1), rat(1, 10)).unwrap();
        let r = kernel_opnorm_trap_bracket(&k).unwrap();
        assert_eq!(r.lower.unwrap().exact, Some(rat(3, 5)));
        assert_eq!(r.upper.unwrap().exact, Some(rat(7, 5)));
    }

    #[test]
    fn report_json_shape() {
        let r = matrix_norm_report(&m(&[&[2, 1], &[1, 2]]), DEFAULT_SEED);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], "1");
        assert_eq!(v["flavor"], "exact");
        assert_eq!(v["l1"]["value"], "6");
        assert_eq!(v["op_inf1"]["exact"]["value"], "6");
        assert_eq!(v["witness"], serde_json::json!([1, 1]));
    }

    #[test]
    fn f64_and_big_paths_agree() {
        let a: Vec<f64> = vec![2.0, -1.0, 0.5, -1.0, 3.0, 1.0, 0.5, 1.0, -2.0];
        let (vf, wf) = enumerate_signs(&a, 3);
        let b: Vec<BigInt> = [4, -2, 1, -2, 6, 2, 1, 2, -4]
            .into_iter()
            .map(BigInt::from)
            .collect();
        let (vb, wb) = enumerate_signs(&b, 3);
        assert_eq!(wf, wb);
        assert!((vf * 2.0 - vb.to_f64().unwrap()).abs() < 1e-12);
    }
}
