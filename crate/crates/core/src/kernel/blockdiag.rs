//! Block-diagonal kernels: trapezoid blocks placed along the diagonal with
//! mutually disjoint supports, materialized on first use.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_traits::Zero;

use super::{Kernel, LayoutBlock, TrapezoidKernel};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockCount {
    Finite(usize),
    Unbounded,
}

/// Supplies blocks and their offsets. Offsets must be non-negative and
/// strictly increasing, and block `i` shifted by its offset must be
/// supported inside `[offset(i), offset(i + 1)]`.
pub trait BlockSource: Send + Sync + fmt::Debug {
    fn count(&self) -> BlockCount;
    fn offset(&self, index: usize) -> Rational;
    fn build(&self, index: usize) -> Result<TrapezoidKernel>;
}

/// A finite, explicitly listed block sequence.
#[derive(Debug, Clone)]
pub struct ExplicitBlocks {
    blocks: Vec<(TrapezoidKernel, Rational)>,
}

impl ExplicitBlocks {
    pub fn new(blocks: Vec<(TrapezoidKernel, Rational)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidBlocks(
                "at least one block is required".into(),
            ));
        }
        for (i, (k, t)) in blocks.iter().enumerate() {
            if t < &Rational::zero() {
                return Err(Error::InvalidBlocks(format!(
                    "block {} has a negative offset",
                    i + 1
                )));
            }
            if let Some((_, next)) = blocks.get(i + 1) {
                let (_, hi) = k.support().expect("trapezoid support is bounded");
                if &(t + hi) > next {
                    return Err(Error::InvalidBlocks(format!(
                        "block {} overlaps the span of block {}",
                        i + 1,
                        i + 2
                    )));
                }
            }
        }
        Ok(Self { blocks })
    }

    /// Offsets `T_1 = 0`, `T_{i+1} = T_i + 2 n_i + 1`.
    pub fn packed(kernels: Vec<TrapezoidKernel>) -> Result<Self> {
        let mut offset = Rational::zero();
        let mut blocks = Vec::with_capacity(kernels.len());
        for k in kernels {
            let span = Rational::from_integer((2 * k.matrix().dim() + 1).into());
            blocks.push((k, offset.clone()));
            offset += span;
        }
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[(TrapezoidKernel, Rational)] {
        &self.blocks
    }
}

impl BlockSource for ExplicitBlocks {
    fn count(&self) -> BlockCount {
        BlockCount::Finite(self.blocks.len())
    }

    fn offset(&self, index: usize) -> Rational {
        self.blocks[index].1.clone()
    }

    fn build(&self, index: usize) -> Result<TrapezoidKernel> {
        Ok(self.blocks[index].0.clone())
    }
}

type BlockCell = Arc<OnceLock<std::result::Result<Arc<TrapezoidKernel>, String>>>;

/// `K(x, y) = Σ_i block_i(x - T_i, y - T_i)`; at most one term is nonzero.
pub struct BlockDiagKernel {
    source: Arc<dyn BlockSource>,
    offsets: RwLock<Vec<(Rational, f64)>>,
    cache: Mutex<HashMap<usize, BlockCell>>,
}

impl fmt::Debug for BlockDiagKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockDiagKernel")
            .field("source", &self.source)
            .field("materialized", &self.materialized_count())
            .finish()
    }
}

impl BlockDiagKernel {
    pub fn new(source: Arc<dyn BlockSource>) -> Self {
        Self {
            source,
            offsets: RwLock::new(Vec::new()),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_blocks(blocks: ExplicitBlocks) -> Self {
        Self::new(Arc::new(blocks))
    }

    pub fn count(&self) -> BlockCount {
        self.source.count()
    }

    pub fn source(&self) -> &Arc<dyn BlockSource> {
        &self.source
    }

    pub fn offset(&self, index: usize) -> Rational {
        self.source.offset(index)
    }

    /// Number of blocks built so far.
    pub fn materialized_count(&self) -> usize {
        self.cache
            .lock()
            .expect("block cache poisoned")
            .values()
            .filter(|c| c.get().is_some())
            .count()
    }

    /// Block `index`, built once and shared by all callers.
    pub fn block(&self, index: usize) -> Result<Arc<TrapezoidKernel>> {
        if let BlockCount::Finite(n) = self.count() {
            if index >= n {
                return Err(Error::InvalidBlocks(format!(
                    "block index {index} out of range ({n} blocks)"
                )));
            }
        }
        let cell = {
            let mut cache = self.cache.lock().expect("block cache poisoned");
            cache.entry(index).or_default().clone()
        };
        cell.get_or_init(|| {
            self.source
                .build(index)
                .map(Arc::new)
                .map_err(|e| e.to_string())
        })
        .clone()
        .map_err(Error::CertificateFailure)
    }

    fn in_range(&self, index: usize) -> bool {
        match self.count() {
            BlockCount::Finite(n) => index < n,
            BlockCount::Unbounded => true,
        }
    }

    /// Index of the last block whose offset is `<= x`.
    fn locate_by<T: PartialOrd>(
        &self,
        x: &T,
        key: impl Fn(&(Rational, f64)) -> &T,
    ) -> Option<usize> {
        {
            let offsets = self.offsets.read().expect("offsets poisoned");
            let done =
                offsets.last().is_some_and(|last| key(last) > x) || !self.in_range(offsets.len());
            if done {
                let idx = offsets.partition_point(|o| key(o) <= x);
                return idx.checked_sub(1);
            }
        }
        let mut offsets = self.offsets.write().expect("offsets poisoned");
        while offsets.last().is_none_or(|last| key(last) <= x) && self.in_range(offsets.len()) {
            let t = self.source.offset(offsets.len());
            let tf = rational::to_f64(&t);
            offsets.push((t, tf));
        }
        let idx = offsets.partition_point(|o| key(o) <= x);
        idx.checked_sub(1)
    }

    fn locate(&self, x: &Rational) -> Option<usize> {
        self.locate_by(x, |o| &o.0)
    }

    fn locate_f64(&self, x: f64) -> Option<usize> {
        self.locate_by(&x, |o| &o.1)
    }

    fn finite_blocks(&self) -> Option<Vec<(Arc<TrapezoidKernel>, Rational)>> {
        let BlockCount::Finite(n) = self.count() else {
            return None;
        };
        (0..n)
            .map(|i| Some((self.block(i).ok()?, self.offset(i))))
            .collect()
    }
}

impl Kernel for BlockDiagKernel {
    fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let zero = Rational::zero();
        if x < &zero || y < &zero {
            return zero;
        }
        match (self.locate(x), self.locate(y)) {
            (Some(i), Some(j)) if i == j => match self.block(i) {
                Ok(block) => {
                    let t = self.offset(i);
                    block.eval(&(x - &t), &(y - &t))
                }
                Err(_) => zero,
            },
            _ => zero,
        }
    }

    fn eval_f64(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || y < 0.0 {
            return 0.0;
        }
        match (self.locate_f64(x), self.locate_f64(y)) {
            (Some(i), Some(j)) if i == j => match self.block(i) {
                Ok(block) => {
                    let t = rational::to_f64(&self.offset(i));
                    block.eval_f64(x - t, y - t)
                }
                Err(_) => 0.0,
            },
            _ => 0.0,
        }
    }

    fn support(&self) -> Option<(Rational, Rational)> {
        let blocks = self.finite_blocks()?;
        let (first, t0) = blocks.first()?;
        let (last, tn) = blocks.last()?;
        let lo = first.support()?.0 + t0;
        let hi = last.support()?.1 + tn;
        Some((lo, hi))
    }

    fn breakpoints(&self) -> Vec<Rational> {
        let Some(blocks) = self.finite_blocks() else {
            return Vec::new();
        };
        blocks
            .iter()
            .flat_map(|(k, t)| k.breakpoints().into_iter().map(move |b| b + t))
            .collect()
    }

    fn layout(&self) -> Option<Vec<LayoutBlock>> {
        let blocks = self.finite_blocks()?;
        Some(
            blocks
                .iter()
                .flat_map(|(k, t)| {
                    k.layout()
                        .unwrap_or_default()
                        .into_iter()
                        .map(move |mut b| {
                            b.offset += t;
                            b
                        })
                })
                .collect(),
        )
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        let blocks = self.finite_blocks()?;
        blocks
            .iter()
            .map(|(k, _)| k.lipschitz_bound())
            .try_fold(0.0f64, |acc, b| Some(acc.max(b?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::SymMatrix;
    use crate::rational::{int, rat};

    fn unit_block(eps: Rational) -> TrapezoidKernel {
        TrapezoidKernel::with_epsilon(SymMatrix::identity(1), eps).unwrap()
    }

    #[test]
    fn single_block_reduces_to_trapezoid() {
        let k = BlockDiagKernel::from_blocks(
            ExplicitBlocks::new(vec![(unit_block(rat(1, 3)), int(0))]).unwrap(),
        );
        assert_eq!(k.eval(&rat(3, 2), &rat(3, 2)), int(1));
        assert_eq!(k.eval(&int(50), &int(50)), int(0));
        assert_eq!(k.eval_f64(1.5, 1.5), 1.0);
    }

    #[test]
    fn cross_block_entries_vanish() {
        let k = BlockDiagKernel::from_blocks(
            ExplicitBlocks::packed(vec![unit_block(rat(1, 3)), unit_block(rat(1, 6))]).unwrap(),
        );
        assert_eq!(k.offset(1), int(3));
        assert_eq!(k.eval(&rat(3, 2), &rat(9, 2)), int(0));
        assert_eq!(k.eval(&rat(9, 2), &rat(9, 2)), int(1));
        assert_eq!(k.eval_f64(4.5, 4.5), 1.0);
        assert_eq!(k.support(), Some((rat(2, 3), rat(31, 6))));
    }

    #[test]
    fn overlapping_offsets_rejected() {
        let err = ExplicitBlocks::new(vec![
            (unit_block(rat(1, 3)), int(0)),
            (unit_block(rat(1, 3)), int(1)),
        ]);
        assert!(matches!(err, Err(Error::InvalidBlocks(_))));
        assert!(ExplicitBlocks::new(vec![]).is_err());
        assert!(ExplicitBlocks::new(vec![(unit_block(rat(1, 3)), int(-1))]).is_err());
    }

    #[test]
    fn blocks_materialize_on_demand() {
        let k = BlockDiagKernel::from_blocks(
            ExplicitBlocks::packed(vec![unit_block(rat(1, 3)), unit_block(rat(1, 3))]).unwrap(),
        );
        assert_eq!(k.materialized_count(), 0);
        k.eval(&rat(3, 2), &rat(3, 2));
        assert_eq!(k.materialized_count(), 1);
        let a = k.block(0).unwrap();
        let b = k.block(0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert!(k.block(2).is_err());
    }
}
