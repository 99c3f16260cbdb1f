//! Symmetric matrices with exact rational entries.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Entry of the Sylvester Hadamard matrix of order `2^e`, `(-1)^popcount(i & j)`.
pub fn sylvester_sign(i: usize, j: usize) -> i8 {
    if (i & j).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `scale * (H + shift * I)` with `H` the Sylvester Hadamard matrix of
/// order `2^exponent`, stored implicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SylvesterShift {
    pub exponent: u32,
    pub shift: BigInt,
    pub scale: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Dense(Arc<[Rational]>),
    Sylvester(SylvesterShift),
}

/// Rectangular `rows x cols` factor `V` with `M = V V^T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    rows: usize,
    cols: usize,
    entries: Arc<[Rational]>,
}

impl Factor {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.cols + col]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.entries.chunks(self.cols).map(<[_]>::to_vec).collect()
    }
}

/// Symmetric `n x n` matrix with exact entries.
///
/// Positive semidefiniteness is not enforced on construction; it is
/// certified by an attached factor or checked by the verification module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymMatrix {
    n: usize,
    repr: Repr,
    factor: Option<Factor>,
}

impl SymMatrix {
    #[allow(clippy::needless_range_loop)]
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix(
                "matrix must have at least one row".into(),
            ));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidMatrix(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                r.len()
            )));
        }
        for i in 0..n {
            for j in i + 1..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::NotSymmetric {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        let entries: Vec<Rational> = rows.into_iter().flatten().collect();
        Ok(Self {
            n,
            repr: Repr::Dense(entries.into()),
            factor: None,
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| rational::int(v)).collect())
                .collect(),
        )
    }

    /// `M = V V^T` for an `n x m` factor, keeping `V` as the PSD certificate.
    pub fn from_factor(v: Vec<Vec<Rational>>) -> Result<Self> {
        let factor = Self::make_factor(v)?;
        let n = factor.rows;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(
                    (0..factor.cols)
                        .map(|r| factor.entry(i, r) * factor.entry(j, r))
                        .fold(Rational::zero(), |a, b| a + b),
                );
            }
        }
        Ok(Self {
            n,
            repr: Repr::Dense(entries.into()),
            factor: Some(factor),
        })
    }

    /// Attaches a factor after checking `M = V V^T` entrywise.
    pub fn with_factor(mut self, v: Vec<Vec<Rational>>) -> Result<Self> {
        let factor = Self::make_factor(v)?;
        if factor.rows != self.n {
            return Err(Error::InvalidMatrix(format!(
                "factor has {} rows, matrix has dimension {}",
                factor.rows, self.n
            )));
        }
        for i in 0..self.n {
            for j in 0..self.n {
                let prod = (0..factor.cols)
                    .map(|r| factor.entry(i, r) * factor.entry(j, r))
                    .fold(Rational::zero(), |a, b| a + b);
                if prod != self.entry(i, j) {
                    return Err(Error::FactorMismatch {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        self.factor = Some(factor);
        Ok(self)
    }

    fn make_factor(v: Vec<Vec<Rational>>) -> Result<Factor> {
        let rows = v.len();
        let cols = v.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix("factor must be non-empty".into()));
        }
        if v.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidMatrix(
                "factor rows have unequal length".into(),
            ));
        }
        Ok(Factor {
            rows,
            cols,
            entries: v.into_iter().flatten().collect::<Vec<_>>().into(),
        })
    }

    pub fn sylvester_shift(spec: SylvesterShift) -> Result<Self> {
        if spec.exponent >= usize::BITS / 2 {
            return Err(Error::InvalidMatrix(format!(
                "Sylvester exponent {} too large",
                spec.exponent
            )));
        }
        Ok(Self {
            n: 1usize << spec.exponent,
            repr: Repr::Sylvester(spec),
            factor: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(rows).expect("identity is symmetric")
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_rows(vec![vec![Rational::zero(); n]; n]).expect("zero is symmetric")
    }

    /// Random PSD matrix `V V^T` with small integer factor entries in
    /// `[-bound, bound]`; the factor is kept as certificate.
    pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize, bound: i64) -> Self {
        let v = (0..n)
            .map(|_| {
                (0..rank.max(1))
                    .map(|_| rational::int(rng.random_range(-bound..=bound)))
                    .collect()
            })
            .collect();
        Self::from_factor(v).expect("non-empty factor")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor(&self) -> Option<&Factor> {
        self.factor.as_ref()
    }

    pub fn sylvester(&self) -> Option<&SylvesterShift> {
        match &self.repr {
            Repr::Sylvester(s) => Some(s),
            Repr::Dense(_) => None,
        }
    }

    /// Entry at zero-based `(row, col)`.
    pub fn entry(&self, row: usize, col: usize) -> Rational {
        match &self.repr {
            Repr::Dense(e) => e[row * self.n + col].clone(),
            Repr::Sylvester(s) => {
                let mut v = BigInt::from(sylvester_sign(row, col));
                if row == col {
                    v += &s.shift;
                }
                &s.scale * Rational::from_integer(v)
            }
        }
    }

    pub fn entry_f64(&self, row: usize, col: usize) -> f64 {
        match &self.repr {
            Repr::Dense(e) => rational::to_f64(&e[row * self.n + col]),
            Repr::Sylvester(s) => {
                let shift = if row == col {
                    rational::to_f64(&Rational::from_integer(s.shift.clone()))
                } else {
                    0.0
                };
                rational::to_f64(&s.scale) * (f64::from(sylvester_sign(row, col)) + shift)
            }
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.entry_f64(i, j))
            .collect()
    }

    /// Dense copy without the implicit representation.
    pub fn to_dense(&self) -> Self {
        match &self.repr {
            Repr::Dense(_) => self.clone(),
            Repr::Sylvester(_) => Self {
                n: self.n,
                repr: Repr::Dense(
                    self.to_rows()
                        .into_iter()
                        .flatten()
                        .collect::<Vec<_>>()
                        .into(),
                ),
                factor: self.factor.clone(),
            },
        }
    }

    /// `c * M`. The factor is dropped since `sqrt(c)` need not be rational.
    pub fn scaled(&self, c: &Rational) -> Self {
        let repr = match &self.repr {
            Repr::Dense(e) => Repr::Dense(e.iter().map(|v| v * c).collect::<Vec<_>>().into()),
            Repr::Sylvester(s) => Repr::Sylvester(SylvesterShift {
                exponent: s.exponent,
                shift: s.shift.clone(),
                scale: &s.scale * c,
            }),
        };
        Self {
            n: self.n,
            repr,
            factor: None,
        }
    }

    pub fn max_abs_entry(&self) -> Rational {
        match &self.repr {
            Repr::Dense(e) => e
                .iter()
                .map(Signed::abs)
                .max()
                .unwrap_or_else(Rational::zero),
            Repr::Sylvester(s) => {
                let shift = Rational::from_integer(s.shift.clone());
                let one = Rational::one();
                let diag = (&shift + &one).abs().max((&shift - &one).abs());
                let diag = if self.n == 1 {
                    (&shift + &one).abs()
                } else {
                    diag
                };
                s.scale.abs() * diag.max(one)
            }
        }
    }

    /// All entries as integers over a common denominator `d`:
    /// `M = N / d` with `N` row-major.
    pub fn integer_form(&self) -> (Vec<BigInt>, BigInt) {
        match &self.repr {
            Repr::Dense(e) => {
                let d = rational::common_denominator(e.iter());
                let nums = e.iter().map(|v| v.numer() * (&d / v.denom())).collect();
                (nums, d)
            }
            Repr::Sylvester(_) => {
                let rows = self.to_rows();
                let flat: Vec<Rational> = rows.into_iter().flatten().collect();
                let d = rational::common_denominator(flat.iter());
                let nums = flat.iter().map(|v| v.numer() * (&d / v.denom())).collect();
                (nums, d)
            }
        }
    }

    /// `M v` for a sign vector.
    pub fn apply_signs(&self, signs: &[i8]) -> Vec<Rational> {
        (0..self.n)
            .map(|i| {
                signs
                    .iter()
                    .enumerate()
                    .fold(Rational::zero(), |acc, (j, &s)| {
                        let e = self.entry(i, j);
                        if s >= 0 {
                            acc + e
                        } else {
                            acc - e
                        }
                    })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn rejects_asymmetric_and_ragged() {
        assert!(matches!(
            SymMatrix::from_i64_rows(&[&[1, 2], &[3, 1]]),
            Err(Error::NotSymmetric { row: 1, col: 2 })
        ));
        assert!(SymMatrix::from_i64_rows(&[&[1, 2], &[3]]).is_err());
        assert!(SymMatrix::from_rows(vec![]).is_err());
    }

    #[test]
    fn factor_reproduces_matrix() {
        let v = vec![vec![int(1), int(1)], vec![int(0), int(1)]];
        let m = SymMatrix::from_factor(v.clone()).unwrap();
        assert_eq!(
            m.to_rows(),
            vec![vec![int(2), int(1)], vec![int(1), int(1)]]
        );
        let direct = SymMatrix::from_i64_rows(&[&[2, 1], &[1, 1]]).unwrap();
        assert!(direct.clone().with_factor(v).is_ok());
        let wrong = vec![vec![int(1)], vec![int(1)]];
        assert!(matches!(
            direct.with_factor(wrong),
            Err(Error::FactorMismatch { .. })
        ));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn sylvester_entries_match_doubling() {
        let m = SymMatrix::sylvester_shift(SylvesterShift {
            exponent: 2,
            shift: BigInt::from(2),
            scale: rat(1, 20),
        })
        .unwrap();
        assert_eq!(m.dim(), 4);
        let expected = [[3, 1, 1, 1], [1, 1, 1, -1], [1, 1, 1, -1], [1, -1, -1, 3]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.entry(i, j), rat(expected[i][j], 20));
                assert!((m.entry_f64(i, j) - expected[i][j] as f64 / 20.0).abs() < 1e-15);
            }
        }
        assert_eq!(m.max_abs_entry(), rat(3, 20));
        assert_eq!(m.to_dense().entry(3, 3), rat(3, 20));
    }

    #[test]
    fn integer_form_scales_to_common_denominator() {
        let m = SymMatrix::from_rows(vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 3), int(2)]])
            .unwrap();
        let (nums, d) = m.integer_form();
        assert_eq!(d, BigInt::from(6));
        assert_eq!(
            nums,
            vec![3, 2, 2, 12]
                .into_iter()
                .map(BigInt::from)
                .collect::<Vec<_>>()
        );
    }
}
