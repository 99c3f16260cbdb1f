//! Block-diagonal kernel that is BIBO stable but not absolutely integrable.
//!
//! Block `h` is the trapezoid kernel of `M^(h) = (H_n + √n I) / (h ‖H_n + √n I‖₁)`
//! with bandwidth `1/(3h)`, where `H_n` is the Sylvester Hadamard matrix of
//! the smallest order `n = 4^m` with `√n ≥ 2h`. Then `‖M^(h)‖₁ = 1/h` while
//! `‖M^(h)‖_{∞,1} ≤ 2 n^{3/2} / (h ‖M₀‖₁) ≤ 1/h²`.

use std::io::Write;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    sylvester_sign, BlockCount, BlockDiagKernel, BlockSource, Epsilon, SylvesterShift, SymMatrix,
    TrapezoidKernel,
};
use crate::norms::{self, NormReport, NormValue};
use crate::operator::{stability_verdict, DivergenceCertificate, L1Evidence, VerdictRecord};
use crate::rational::{self, Rational};

/// Largest Hadamard exponent materialized as an explicit array.
pub const HADAMARD_CAP: u32 = 12;

/// Largest order whose `(∞,1)` norm is certified by enumeration.
pub const EXACT_ORDER_CAP: usize = 16;

/// Largest order whose `‖M₀‖₁` is recomputed entry by entry; above this the
/// closed form `n² - n + n^{3/2}` is used.
pub const L1_COUNT_CAP: usize = 1024;

fn ri(v: u64) -> Rational {
    Rational::from_integer(v.into())
}

/// Explicit Sylvester Hadamard matrix of order `2^m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    exponent: u32,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn order(&self) -> usize {
        1 << self.exponent
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.order() + j]
    }

    pub fn rows(&self) -> Vec<Vec<i8>> {
        self.entries
            .chunks(self.order())
            .map(<[i8]>::to_vec)
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (i + 1..n).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    /// `H H = n I` by direct multiplication.
    pub fn square_is_scaled_identity(&self) -> bool {
        let n = self.order();
        (0..n).into_par_iter().all(|i| {
            (0..n).all(|j| {
                let dot: i64 = (0..n)
                    .map(|k| i64::from(self.entry(i, k)) * i64::from(self.entry(k, j)))
                    .sum();
                dot == if i == j { n as i64 } else { 0 }
            })
        })
    }

    /// Structural check: every entry matches the doubling rule
    /// `H_{2n} = [[H, H], [H, -H]]`, which gives `H² = nI` by induction.
    fn doubling_consistent(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| {
            (0..n).all(|j| {
                let e = self.entry(i, j);
                let half = n / 2;
                if half == 0 {
                    return e == 1;
                }
                let inner = self.entry(i % half, j % half);
                let flip = if i >= half && j >= half { -1 } else { 1 };
                e == inner * flip
            })
        })
    }
}

/// `H_{2^m}` by iterated doubling of `[[1]]`.
pub fn sylvester_hadamard(m: u32) -> Result<HadamardMatrix> {
    if m > HADAMARD_CAP {
        return Err(Error::HadamardCap {
            m,
            cap: HADAMARD_CAP,
        });
    }
    let mut entries = vec![1i8];
    let mut n = 1usize;
    for _ in 0..m {
        let size = 2 * n;
        let mut next = vec![0i8; size * size];
        for i in 0..size {
            for j in 0..size {
                let e = entries[(i % n) * n + j % n];
                next[i * size + j] = if i >= n && j >= n { -e } else { e };
            }
        }
        entries = next;
        n = size;
    }
    let h = HadamardMatrix {
        exponent: m,
        entries,
    };
    if !h.is_symmetric() || !h.doubling_consistent() {
        return Err(Error::CertificateFailure(
            "Hadamard doubling produced an invalid matrix".into(),
        ));
    }
    Ok(h)
}

/// Exponent `m` of `n = 4^m`: the smallest with `2^m ≥ 2h`.
pub fn order_exponent(h: u64) -> u32 {
    let two_h = 2 * h.max(1);
    let m = 64 - (two_h - 1).leading_zeros();
    m.max(1)
}

/// `‖M₀‖₁ = n² - n + n^{3/2}` for `M₀ = H_n + √n I`, `n = 4^m`.
pub fn m0_l1_closed_form(m: u32) -> BigInt {
    let s = BigInt::one() << m;
    let n = &s * &s;
    &n * &n - &n + &n * &s
}

fn m0_l1_counted(m: u32) -> BigInt {
    let s = 1i64 << m;
    let n = 1usize << (2 * m);
    let total: i64 = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut e = i64::from(sylvester_sign(i, j));
                    if i == j {
                        e += s;
                    }
                    e.abs()
                })
                .sum::<i64>()
        })
        .sum();
    BigInt::from(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpCertificate {
    /// Attained by enumeration over all sign vectors.
    Exact {
        #[serde(with = "rational::serde_str")]
        value: Rational,
        witness: Vec<i8>,
    },
    /// `2 n^{3/2} / (h ‖M₀‖₁)`.
    Analytic {
        #[serde(with = "rational::serde_str")]
        bound: Rational,
    },
}

impl OpCertificate {
    pub fn value(&self) -> &Rational {
        match self {
            Self::Exact { value, .. } => value,
            Self::Analytic { bound } => bound,
        }
    }
}

/// Norm and PSD facts about `M^(h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCertificate {
    pub h: u64,
    pub n: usize,
    #[serde(with = "rational::serde_str")]
    pub m0_l1: Rational,
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    #[serde(with = "rational::serde_str")]
    pub l1: Rational,
    #[serde(with = "rational::serde_str")]
    pub analytic_bound: Rational,
    pub op_inf1: OpCertificate,
    /// Eigenvalues of `H_n + √n I` are `0` and `2√n`, so this is `0`.
    #[serde(with = "rational::serde_str")]
    pub min_eigenvalue: Rational,
}

#[derive(Debug, Clone)]
pub struct CertifiedMatrix {
    pub matrix: SymMatrix,
    pub certificate: MatrixCertificate,
}

/// `M^(h)` with its certificate. Fails if any certified fact does not hold.
pub fn build_m_h(h: u64) -> Result<CertifiedMatrix> {
    if h == 0 {
        return Err(Error::InvalidArgument(
            "block index h must be at least 1".into(),
        ));
    }
    let m = order_exponent(h);
    let n = 1usize
        .checked_shl(2 * m)
        .filter(|_| 2 * m < usize::BITS / 2)
        .ok_or_else(|| Error::InvalidArgument(format!("block {h} is too large to index")))?;
    let root = BigInt::one() << m;
    let closed = m0_l1_closed_form(m);
    let m0_l1 = if n <= L1_COUNT_CAP {
        let counted = m0_l1_counted(m);
        if counted != closed {
            return Err(Error::CertificateFailure(format!(
                "‖M₀‖₁ count {counted} differs from closed form {closed} at n = {n}"
            )));
        }
        counted
    } else {
        closed
    };
    let hq = ri(h);
    let m0_l1 = Rational::from_integer(m0_l1);
    let scale = Rational::one() / (&hq * &m0_l1);
    let matrix = SymMatrix::sylvester_shift(SylvesterShift {
        exponent: 2 * m,
        shift: root.clone(),
        scale: scale.clone(),
    })?;
    let l1 = norms::matrix_l1(&matrix);
    let target_l1 = Rational::one() / &hq;
    if l1 != target_l1 {
        return Err(Error::CertificateFailure(format!(
            "‖M^({h})‖₁ = {l1}, expected 1/{h}"
        )));
    }
    let n_q = Rational::from_integer(BigInt::from(n));
    let analytic_bound = ri(2) * &n_q * Rational::from_integer(root.clone()) * &scale;
    let target_op = Rational::one() / (&hq * &hq);
    let op_inf1 = if n <= EXACT_ORDER_CAP {
        let (value, witness) = norms::matrix_opnorm_inf1_exact(&matrix)?;
        if value > analytic_bound {
            return Err(Error::CertificateFailure(format!(
                "enumerated ‖M^({h})‖_(∞,1) = {value} exceeds the analytic bound {analytic_bound}"
            )));
        }
        OpCertificate::Exact { value, witness }
    } else {
        OpCertificate::Analytic {
            bound: analytic_bound.clone(),
        }
    };
    if op_inf1.value() > &target_op {
        return Err(Error::CertificateFailure(format!(
            "‖M^({h})‖_(∞,1) ≤ {} is not ≤ 1/h²",
            op_inf1.value()
        )));
    }
    if &root * &root != BigInt::from(n) || !scale.is_positive() {
        return Err(Error::CertificateFailure("shift is not √n".into()));
    }
    Ok(CertifiedMatrix {
        matrix,
        certificate: MatrixCertificate {
            h,
            n,
            m0_l1,
            scale,
            l1,
            analytic_bound,
            op_inf1,
            min_eigenvalue: Rational::zero(),
        },
    })
}

/// `T_h` for one-based `h`: `T_1 = 0`, `T_{h+1} = T_h + 2 n_h + 1`.
pub fn block_offset(h: u64) -> Rational {
    // Blocks with the same exponent m ≥ 2 are h ∈ (2^{m-2}, 2^{m-1}].
    let mut total = BigInt::zero();
    let mut done = 0u64;
    let mut m = 1u32;
    while done < h - 1 {
        let last = if m == 1 { 1 } else { 1u64 << (m - 1) };
        let count = last.min(h - 1) - done;
        let n = BigInt::one() << (2 * m);
        total += (n * 2 + 1) * BigInt::from(count);
        done += count;
        m += 1;
    }
    Rational::from_integer(total)
}

pub fn block_epsilon(h: u64) -> Epsilon {
    Epsilon::new(Rational::new(BigInt::one(), BigInt::from(3 * h))).expect("1/(3h) < 1/2")
}

/// Per-block record of the counterexample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub h: u64,
    pub n: usize,
    pub epsilon: Epsilon,
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    #[serde(with = "rational::serde_str")]
    pub offset: Rational,
    /// `‖block_h‖₁ = ‖M^(h)‖₁ (∫ g_ε)² = 1/h`.
    #[serde(with = "rational::serde_str")]
    pub l1: Rational,
    /// `‖M^(h)‖_{∞,1} + 4 ‖M^(h)‖₁ ε_h`, at most `7/(3h²)`.
    #[serde(with = "rational::serde_str")]
    pub op_upper: Rational,
    pub certificate: MatrixCertificate,
}

fn block_record(h: u64, cm: &CertifiedMatrix) -> Result<BlockRecord> {
    let epsilon = block_epsilon(h);
    let kernel = TrapezoidKernel::new(cm.matrix.clone(), epsilon.clone());
    let l1 = norms::kernel_l1_trap(&kernel);
    if l1 != cm.certificate.l1 {
        return Err(Error::CertificateFailure(format!(
            "block {h} L1 norm {l1} differs from ‖M^(h)‖₁"
        )));
    }
    let op_upper = cm.certificate.op_inf1.value() + ri(4) * &l1 * epsilon.value();
    if op_upper > per_block_bound(h) {
        return Err(Error::CertificateFailure(format!(
            "block {h} operator bound exceeds 7/(3h²)"
        )));
    }
    Ok(BlockRecord {
        h,
        n: cm.certificate.n,
        epsilon,
        scale: cm.certificate.scale.clone(),
        offset: block_offset(h),
        l1,
        op_upper,
        certificate: cm.certificate.clone(),
    })
}

/// `7/(3h²)`.
pub fn per_block_bound(h: u64) -> Rational {
    Rational::new(
        7.into(),
        BigInt::from(3) * BigInt::from(h) * BigInt::from(h),
    )
}

/// Block records of a finite counterexample, or none for the lazy one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub schema: String,
    /// `None` for the unbounded block sequence.
    pub h_max: Option<u64>,
    pub blocks: Vec<BlockRecord>,
}

impl CounterexampleSpec {
    pub fn block_count(&self) -> BlockCount {
        match self.h_max {
            Some(h) => BlockCount::Finite(h as usize),
            None => BlockCount::Unbounded,
        }
    }

    /// Rebuilds every block and compares with the stored records.
    pub fn verify(&self) -> Result<()> {
        if self.schema != "1" {
            return Err(Error::CertificateFailure(format!(
                "unknown schema {}",
                self.schema
            )));
        }
        let expected = match self.h_max {
            Some(0) => return Err(Error::CertificateFailure("H_max must be at least 1".into())),
            Some(h) => h as usize,
            None => 0,
        };
        if self.blocks.len() != expected {
            return Err(Error::CertificateFailure(format!(
                "{} block records for H_max = {expected}",
                self.blocks.len()
            )));
        }
        let rebuilt = records(1..=expected as u64)?;
        for (stored, fresh) in self.blocks.iter().zip(&rebuilt) {
            if stored != fresh {
                return Err(Error::CertificateFailure(format!(
                    "stored record for block {} does not match its rebuild",
                    stored.h
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and re-verifies; an unverified spec is never returned.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.verify()?;
        Ok(spec)
    }

    pub fn record(&self, h: u64) -> Result<BlockRecord> {
        if let Some(r) = self.blocks.get((h as usize).wrapping_sub(1)) {
            return Ok(r.clone());
        }
        if let Some(max) = self.h_max {
            if h > max || h == 0 {
                return Err(Error::InvalidArgument(format!(
                    "block {h} outside 1..={max}"
                )));
            }
        }
        block_record(h, &build_m_h(h)?)
    }
}

fn records(hs: impl IntoIterator<Item = u64>) -> Result<Vec<BlockRecord>> {
    let hs: Vec<u64> = hs.into_iter().collect();
    hs.par_iter()
        .map(|&h| block_record(h, &build_m_h(h)?))
        .collect()
}

/// Block source for the counterexample; blocks are built on demand.
#[derive(Debug, Clone)]
pub struct CounterexampleBlocks {
    count: BlockCount,
}

impl CounterexampleBlocks {
    pub fn new(count: BlockCount) -> Self {
        Self { count }
    }
}

impl BlockSource for CounterexampleBlocks {
    fn count(&self) -> BlockCount {
        self.count
    }

    fn offset(&self, index: usize) -> Rational {
        block_offset(index as u64 + 1)
    }

    fn build(&self, index: usize) -> Result<TrapezoidKernel> {
        let h = index as u64 + 1;
        let cm = build_m_h(h)?;
        Ok(TrapezoidKernel::new(cm.matrix, block_epsilon(h)))
    }
}

/// The block-diagonal kernel with its spec. For `Unbounded` the spec holds
/// no records; they are produced on request.
pub fn build_counterexample(count: BlockCount) -> Result<(BlockDiagKernel, CounterexampleSpec)> {
    let (h_max, blocks) = match count {
        BlockCount::Finite(0) => {
            return Err(Error::InvalidArgument("H_max must be at least 1".into()));
        }
        BlockCount::Finite(h) => (Some(h as u64), records(1..=h as u64)?),
        BlockCount::Unbounded => (None, Vec::new()),
    };
    let kernel = BlockDiagKernel::new(Arc::new(CounterexampleBlocks::new(count)));
    Ok((
        kernel,
        CounterexampleSpec {
            schema: "1".into(),
            h_max,
            blocks,
        },
    ))
}

/// `7π²/18`, the limit of `Σ 7/(3h²)`.
pub fn basel_limit() -> f64 {
    7.0 * std::f64::consts::PI * std::f64::consts::PI / 18.0
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesRow {
    pub h: u64,
    #[serde(with = "rational::serde_str")]
    pub l1_partial_sum: Rational,
    #[serde(with = "rational::serde_str")]
    pub opnorm_upper_bound: Rational,
}

/// Partial sums certifying `‖K‖₁ = ∞` and `‖K‖_{∞,1} < ∞`.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesEvidence {
    pub schema: &'static str,
    pub horizon: u64,
    /// `Σ_{h ≤ H} ‖block_h‖₁`, the harmonic number `H_H`.
    #[serde(with = "rational::serde_str")]
    pub l1_partial_sum: Rational,
    /// `ln(H + 1) ≤ H_H`.
    pub l1_floor: f64,
    /// `Σ_{h ≤ H} 7/(3h²)`.
    #[serde(with = "rational::serde_str")]
    pub op_partial_sum: Rational,
    /// `7/(3H) ≥ Σ_{h > H} 7/(3h²)`.
    #[serde(with = "rational::serde_str")]
    pub op_tail: Rational,
    /// `op_partial_sum + op_tail`, an upper bound on `‖K‖_{∞,1}`.
    #[serde(with = "rational::serde_str")]
    pub op_total_bound: Rational,
    /// `Σ_{h ≤ H}` of the sharper per-block bounds.
    #[serde(with = "rational::serde_str")]
    pub certified_block_sum: Rational,
    pub basel_limit: f64,
    pub rows: Vec<SeriesRow>,
    pub divergence: DivergenceCertificate,
}

impl SeriesEvidence {
    /// Report for the whole kernel: only the certified upper bound is known.
    pub fn op_report(&self) -> NormReport {
        NormReport {
            l1: NormValue::approx(f64::INFINITY),
            exact: None,
            lower: None,
            upper: Some(NormValue::exact(self.op_total_bound.clone())),
            witness: None,
        }
    }

    pub fn verdict(&self) -> VerdictRecord {
        stability_verdict(
            L1Evidence::Divergent(self.divergence.clone()),
            &self.op_report(),
        )
    }

    /// CSV with header `H,l1_partial_sum,opnorm_upper_bound`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["H", "l1_partial_sum", "opnorm_upper_bound"])?;
        for row in &self.rows {
            w.write_record([
                row.h.to_string(),
                rational::format(&row.l1_partial_sum),
                rational::format(&row.opnorm_upper_bound),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Series evidence up to horizon `H`.
pub fn series_evidence(spec: &CounterexampleSpec, horizon: u64) -> Result<SeriesEvidence> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    if let Some(max) = spec.h_max {
        if horizon > max {
            return Err(Error::InvalidArgument(format!(
                "horizon {horizon} exceeds H_max = {max}"
            )));
        }
    }
    let blocks: Vec<BlockRecord> = if spec.blocks.len() as u64 >= horizon {
        spec.blocks[..horizon as usize].to_vec()
    } else {
        records(1..=horizon)?
    };
    let mut rows = Vec::with_capacity(blocks.len());
    let mut l1 = Rational::zero();
    let mut op = Rational::zero();
    let mut sharp = Rational::zero();
    for b in &blocks {
        l1 += &b.l1;
        op += per_block_bound(b.h);
        sharp += &b.op_upper;
        rows.push(SeriesRow {
            h: b.h,
            l1_partial_sum: l1.clone(),
            opnorm_upper_bound: op.clone(),
        });
    }
    let tail = Rational::new(7.into(), BigInt::from(3 * horizon));
    let total = &op + &tail;
    let divergence = DivergenceCertificate {
        coefficient: Rational::one(),
        horizon,
        partial_sum: l1.clone(),
    };
    if !divergence.check() || sharp > op {
        return Err(Error::CertificateFailure(
            "series certificates do not check".into(),
        ));
    }
    Ok(SeriesEvidence {
        schema: "1",
        horizon,
        l1_partial_sum: l1,
        l1_floor: ((horizon + 1) as f64).ln(),
        op_partial_sum: op,
        op_tail: tail,
        op_total_bound: total,
        certified_block_sum: sharp,
        basel_limit: basel_limit(),
        rows,
        divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Kernel;
    use crate::rational::{int, rat};

    #[test]
    fn hadamard_small_orders() {
        assert_eq!(sylvester_hadamard(0).unwrap().rows(), vec![vec![1]]);
        assert_eq!(
            sylvester_hadamard(1).unwrap().rows(),
            vec![vec![1, 1], vec![1, -1]]
        );
        let h4 = sylvester_hadamard(2).unwrap();
        let diag: Vec<i8> = (0..4).map(|i| h4.entry(i, i)).collect();
        assert_eq!(diag, vec![1, -1, -1, 1]);
        assert!(h4.square_is_scaled_identity());
        for m in 0..=6 {
            let h = sylvester_hadamard(m).unwrap();
            assert!(h.is_symmetric());
            assert!(h.square_is_scaled_identity());
            for i in 0..h.order() {
                for j in 0..h.order() {
                    assert_eq!(h.entry(i, j), sylvester_sign(i, j));
                }
            }
        }
        assert!(matches!(
            sylvester_hadamard(13),
            Err(Error::HadamardCap { .. })
        ));
    }

    #[test]
    fn order_schedule() {
        let orders: Vec<usize> = (1..=17).map(|h| 1 << (2 * order_exponent(h))).collect();
        assert_eq!(&orders[..5], &[4, 16, 64, 64, 256]);
        assert!(orders[..16].iter().all(|&n| n <= 1024));
        assert_eq!(orders[16], 4096);
    }

    #[test]
    fn m1_certificate() {
        let cm = build_m_h(1).unwrap();
        let c = &cm.certificate;
        assert_eq!(c.n, 4);
        assert_eq!(c.m0_l1, int(20));
        assert_eq!(c.scale, rat(1, 20));
        assert_eq!(c.l1, int(1));
        match &c.op_inf1 {
            OpCertificate::Exact { value, .. } => assert_eq!(value, &rat(16, 20)),
            other => panic!("expected enumeration, got {other:?}"),
        }
    }

    #[test]
    fn m2_certificate() {
        let c = build_m_h(2).unwrap().certificate;
        assert_eq!(c.n, 16);
        assert_eq!(c.m0_l1, int(304));
        assert_eq!(c.l1, rat(1, 2));
        assert_eq!(c.analytic_bound, rat(128, 608));
        assert!(c.op_inf1.value() <= &rat(1, 4));
    }

    #[test]
    fn analytic_certificates() {
        for h in 3..=10 {
            let c = build_m_h(h).unwrap().certificate;
            assert!(matches!(c.op_inf1, OpCertificate::Analytic { .. }));
            assert!(c.op_inf1.value() <= &Rational::new(1.into(), (h * h).into()));
        }
    }

    #[test]
    fn offsets() {
        assert_eq!(block_offset(1), int(0));
        assert_eq!(block_offset(2), int(9));
        assert_eq!(block_offset(3), int(9 + 33));
        assert_eq!(block_offset(4), int(42 + 129));
        let mut t = int(0);
        for h in 1..=40u64 {
            assert_eq!(block_offset(h), t);
            let n = 1u64 << (2 * order_exponent(h));
            t += int(2 * n as i64 + 1);
        }
    }

    #[test]
    fn disjoint_blocks() {
        let (k, spec) = build_counterexample(BlockCount::Finite(2)).unwrap();
        assert_eq!(spec.blocks[1].offset, int(9));
        let (lo, hi) = k.support().unwrap();
        assert_eq!(lo, rat(2, 3));
        assert!(hi < int(9 + 33));
        assert_eq!(k.eval(&rat(3, 2), &rat(21, 2)), int(0));
        let b1 = k.block(0).unwrap();
        let (blo, bhi) = b1.support().unwrap();
        assert_eq!((blo, bhi), (rat(2, 3), rat(25, 3)));
    }

    #[test]
    fn lazy_kernel_evaluates_far_blocks() {
        let (k, spec) = build_counterexample(BlockCount::Unbounded).unwrap();
        assert!(spec.blocks.is_empty());
        assert!(k.support().is_none());
        let t = block_offset(20);
        let x = &t + int(1) + rat(1, 2);
        assert!(k.eval(&x, &x) > int(0));
        assert_eq!(spec.record(20).unwrap().l1, rat(1, 20));
    }

    #[test]
    fn series() {
        let (_, spec) = build_counterexample(BlockCount::Finite(4)).unwrap();
        let ev = series_evidence(&spec, 4).unwrap();
        let l1: Vec<Rational> = ev.rows.iter().map(|r| r.l1_partial_sum.clone()).collect();
        assert_eq!(l1, vec![int(1), rat(3, 2), rat(11, 6), rat(25, 12)]);
        assert_eq!(ev.rows[0].opnorm_upper_bound, rat(7, 3));
        let mut out = Vec::new();
        ev.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("H,l1_partial_sum,opnorm_upper_bound\n1,1,7/3\n"));
        assert!(series_evidence(&spec, 5).is_err());
    }

    #[test]
    fn spec_round_trip_reverifies() {
        let (_, spec) = build_counterexample(BlockCount::Finite(3)).unwrap();
        let json = spec.to_json().unwrap();
        assert_eq!(CounterexampleSpec::from_json(&json).unwrap(), spec);
        let tampered = json.replacen("\"l1\": \"1/2\"", "\"l1\": \"1/3\"", 1);
        assert_ne!(tampered, json);
        assert!(CounterexampleSpec::from_json(&tampered).is_err());
    }
}
