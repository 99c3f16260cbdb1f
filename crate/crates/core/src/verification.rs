//! Mercer checks: positive semidefiniteness, symmetry and continuity.

use std::io::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, SymMatrix};
use crate::linalg;
use crate::rational::{self, Rational};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_SEED: u64 = 0x5eed_0002;

/// Largest order checked with Jacobi when no exact certificate exists.
pub const JACOBI_CAP: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdMethod {
    /// `M = V V^T` verified on construction.
    Factor,
    /// Eigenvalues of `c (H + s I)` are `c (s ± √n)` since `H² = n I`.
    SylvesterIdentity,
    Jacobi,
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdReport {
    pub pass: bool,
    pub method: PsdMethod,
    /// Exact minimum eigenvalue when it is rational and known.
    #[serde(serialize_with = "opt_rational")]
    pub exact_min_eigenvalue: Option<Rational>,
    /// Jacobi estimate, whenever the order is within the Jacobi cap.
    pub min_eigenvalue: Option<f64>,
}

fn opt_rational<S: serde::Serializer>(
    v: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&rational::format(r)),
        None => s.serialize_none(),
    }
}

fn isqrt_exact(n: usize) -> Option<BigInt> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then(|| BigInt::from(r))
}

/// Exact PSD decision for Sylvester storage: `(pass, exact min eigenvalue)`.
fn sylvester_psd(m: &SymMatrix) -> Option<(bool, Option<Rational>)> {
    let s = m.sylvester()?;
    let n = m.dim();
    let shift = Rational::from_integer(s.shift.clone());
    if n == 1 {
        let v = &s.scale * (shift + Rational::one());
        return Some((!v.is_negative(), Some(v)));
    }
    let n_big = BigInt::from(n);
    // Both c (s + √n) and c (s - √n) are ≥ 0 iff c = 0, or c > 0 and
    // s ≥ √n, or c < 0 and s ≤ -√n.
    let dominates = &s.shift * &s.shift >= n_big;
    let pass = s.scale.is_zero()
        || (s.scale.is_positive() && !s.shift.is_negative() && dominates)
        || (s.scale.is_negative() && !s.shift.is_positive() && dominates);
    let exact = isqrt_exact(n).map(|r| {
        let r = Rational::from_integer(r);
        let a = &s.scale * (&shift + &r);
        let b = &s.scale * (&shift - &r);
        a.min(b)
    });
    Some((pass, exact))
}

/// Passes iff the minimum eigenvalue is at least `-tol`. A factor or the
/// Sylvester identity decides exactly; Jacobi otherwise.
pub fn check_psd_matrix(m: &SymMatrix, tol: f64) -> PsdReport {
    let n = m.dim();
    let jacobi = (n <= JACOBI_CAP).then(|| {
        linalg::symmetric_eigenvalues(&m.to_f64(), n)
            .first()
            .copied()
            .unwrap_or(0.0)
    });
    if m.factor().is_some() {
        return PsdReport {
            pass: true,
            method: PsdMethod::Factor,
            exact_min_eigenvalue: None,
            min_eigenvalue: jacobi,
        };
    }
    if let Some((pass, exact)) = sylvester_psd(m) {
        return PsdReport {
            pass,
            method: PsdMethod::SylvesterIdentity,
            exact_min_eigenvalue: exact,
            min_eigenvalue: jacobi,
        };
    }
    PsdReport {
        pass: jacobi.is_some_and(|e| e >= -tol),
        method: PsdMethod::Jacobi,
        exact_min_eigenvalue: None,
        min_eigenvalue: jacobi,
    }
}

/// Kernel evaluations at sample points.
#[derive(Debug, Clone, Serialize)]
pub struct GramSample {
    pub points: Vec<f64>,
    /// Row-major `gram[i][j] = K(points[i], points[j])`.
    pub gram: Vec<f64>,
    pub min_eigenvalue: f64,
}

impl GramSample {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.points.len() + j]
    }

    /// CSV matrix: header `x,p_1,...,p_n`, then one row per point.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = std::iter::once("x".to_string())
            .chain(self.points.iter().map(f64::to_string))
            .collect();
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let row: Vec<String> = std::iter::once(p.to_string())
                .chain((0..self.points.len()).map(|j| self.entry(i, j).to_string()))
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GramCheck {
    pub pass: bool,
    pub tol: f64,
    pub sample: GramSample,
}

/// Gram matrix at distinct non-negative points; passes iff its minimum
/// eigenvalue is at least `-tol`.
pub fn gram_check(kernel: &dyn Kernel, points: &[f64], tol: f64) -> Result<GramCheck> {
    if points.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one point is required".into(),
        ));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample point {p} is not a non-negative real"
        )));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoints(w[0]));
    }
    let n = points.len();
    let upper: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| (i..n).map(move |j| (i, j, kernel.eval_f64(points[i], points[j]))))
        .collect();
    let mut gram = vec![0.0; n * n];
    for (i, j, v) in upper {
        gram[i * n + j] = v;
        gram[j * n + i] = v;
    }
    let min_eigenvalue = linalg::symmetric_eigenvalues(&gram, n)[0];
    Ok(GramCheck {
        pass: min_eigenvalue >= -tol,
        tol,
        sample: GramSample {
            points: points.to_vec(),
            gram,
            min_eigenvalue,
        },
    })
}

/// `count` distinct uniform points in `[lo, hi)` from a seeded stream.
pub fn random_points(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.random_range(lo..hi);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// `count` evenly spaced points spanning `[lo, hi]`.
pub fn uniform_points(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Span probed for kernels with unbounded support.
const UNBOUNDED_PROBE_SPAN: f64 = 64.0;

/// Cap on breakpoints used for targeted probes.
const BREAKPOINT_PROBES: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub delta: f64,
    /// `max |K(x, y) - K(y, x)|`.
    pub symmetry_defect: f64,
    /// `max |K(x + δ, y) - K(x, y)| / δ`.
    pub max_quotient: f64,
    pub lipschitz_bound: Option<f64>,
    /// Quotient threshold used when no Lipschitz bound is claimed: `1/√δ`.
    pub threshold: f64,
    pub discontinuity_flagged: bool,
}

impl ProbeReport {
    pub fn symmetric(&self) -> bool {
        self.symmetry_defect == 0.0
    }
}

/// Random pairs plus pairs straddling each breakpoint. A quotient above
/// the kernel's Lipschitz bound, or above `1/√δ` when it claims none,
/// flags a discontinuity. This can falsify continuity, never prove it.
pub fn symmetry_continuity_probe(
    kernel: &dyn Kernel,
    samples: usize,
    delta: f64,
    seed: u64,
) -> Result<ProbeReport> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(
            "delta must be a positive real".into(),
        ));
    }
    let (lo, hi) = match kernel.support() {
        Some((lo, hi)) => (
            (rational::to_f64(&lo) - 1.0).max(0.0),
            rational::to_f64(&hi) + 1.0,
        ),
        None => (0.0, UNBOUNDED_PROBE_SPAN),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(f64, f64)> = (0..samples)
        .map(|_| (rng.random_range(lo..hi), rng.random_range(lo..hi)))
        .collect();
    let mut bps: Vec<f64> = kernel
        .breakpoints()
        .iter()
        .map(rational::to_f64)
        .filter(|b| *b <= hi)
        .collect();
    if bps.len() > BREAKPOINT_PROBES {
        let stride = bps.len().div_ceil(BREAKPOINT_PROBES);
        bps = bps.into_iter().step_by(stride).collect();
    }
    let interior: Vec<f64> = bps.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    for b in &bps {
        for y in &interior {
            pairs.push(((b - 0.5 * delta).max(0.0), *y));
        }
    }
    let (symmetry_defect, max_quotient) = pairs
        .par_iter()
        .map(|&(x, y)| {
            let sym = (kernel.eval_f64(x, y) - kernel.eval_f64(y, x)).abs();
            let q = (kernel.eval_f64(x + delta, y) - kernel.eval_f64(x, y)).abs() / delta;
            (sym, q)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let lipschitz_bound = kernel.lipschitz_bound();
    let threshold = 1.0 / delta.sqrt();
    let discontinuity_flagged = match lipschitz_bound {
        Some(l) => max_quotient > l * (1.0 + 1e-9) + 1e-9,
        None => max_quotient > threshold,
    };
    Ok(ProbeReport {
        samples: pairs.len(),
        delta,
        symmetry_defect,
        max_quotient,
        lipschitz_bound,
        threshold,
        discontinuity_flagged,
    })
}

/// Kernel with the sign flipped; not PSD unless the original is zero.
#[derive(Debug)]
pub struct Negated<K>(pub K);

impl<K: Kernel> Kernel for Negated<K> {
    fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        -self.0.eval(x, y)
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        -self.0.eval_f64(x, y)
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        self.0.support()
    }

    fn breakpoints(&self) -> Vec<Rational> {
        self.0.breakpoints()
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        self.0.lipschitz_bound()
    }
}
