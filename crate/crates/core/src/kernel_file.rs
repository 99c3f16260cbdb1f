//! TOML kernel files and inline matrix text.
//!
//! ```toml
//! schema = "1"
//! kind = "trapezoid"
//! epsilon = "1/4"
//! matrix = [["2", "1"], ["1", "2"]]
//! ```
//!
//! `kind` is one of `piecewise_constant`, `trapezoid`, `block_diagonal`
//! (with `[[blocks]]` tables carrying `offset`, `epsilon` and a matrix) or
//! `counterexample` (with `h_max`, omitted for the unbounded kernel). A
//! matrix is either `matrix` rows of rational strings, optionally with a
//! `factor`, or a `[sylvester]` table with `exponent`, `shift`, `scale`.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::counterexample::{build_counterexample, CounterexampleSpec};
use crate::error::{Error, Result};
use crate::kernel::{
    BlockCount, BlockDiagKernel, Epsilon, ExplicitBlocks, Kernel, PiecewiseConstantKernel,
    SylvesterShift, SymMatrix, TrapezoidKernel,
};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    PiecewiseConstant,
    Trapezoid,
    BlockDiagonal,
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SylvesterTable {
    pub exponent: u32,
    pub shift: String,
    pub scale: String,
}

/// Matrix fields shared by top-level kernels and blocks.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFields {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sylvester: Option<SylvesterTable>,
}

fn strings(rows: Vec<Vec<Rational>>) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| r.iter().map(rational::format).collect())
        .collect()
}

fn parse_rows(rows: &[Vec<String>]) -> Result<Vec<Vec<Rational>>> {
    rows.iter()
        .map(|r| r.iter().map(|v| rational::parse(v)).collect())
        .collect()
}

impl MatrixFields {
    pub fn from_matrix(m: &SymMatrix) -> Self {
        match m.sylvester() {
            Some(s) => Self {
                matrix: None,
                factor: None,
                sylvester: Some(SylvesterTable {
                    exponent: s.exponent,
                    shift: s.shift.to_string(),
                    scale: rational::format(&s.scale),
                }),
            },
            None => Self {
                matrix: Some(strings(m.to_rows())),
                factor: m.factor().map(|f| strings(f.to_rows())),
                sylvester: None,
            },
        }
    }

    pub fn to_matrix(&self) -> Result<SymMatrix> {
        match (&self.matrix, &self.sylvester) {
            (Some(rows), None) => {
                let m = SymMatrix::from_rows(parse_rows(rows)?)?;
                match &self.factor {
                    Some(v) => m.with_factor(parse_rows(v)?),
                    None => Ok(m),
                }
            }
            (None, Some(s)) if self.factor.is_none() => {
                let shift = rational::parse(&s.shift)?;
                if !shift.is_integer() {
                    return Err(Error::InvalidMatrix(
                        "Sylvester shift must be an integer".into(),
                    ));
                }
                SymMatrix::sylvester_shift(SylvesterShift {
                    exponent: s.exponent,
                    shift: shift.to_integer(),
                    scale: rational::parse(&s.scale)?,
                })
            }
            (None, Some(_)) => Err(Error::InvalidMatrix(
                "a Sylvester matrix takes no factor".into(),
            )),
            (None, None) => match &self.factor {
                Some(v) => SymMatrix::from_factor(parse_rows(v)?),
                None => Err(Error::InvalidMatrix(
                    "no matrix, factor or sylvester table given".into(),
                )),
            },
            (Some(_), Some(_)) => Err(Error::InvalidMatrix(
                "give either matrix rows or a sylvester table, not both".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTable {
    pub offset: String,
    pub epsilon: String,
    #[serde(flatten)]
    pub matrix: MatrixFields,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelFile {
    pub schema: String,
    pub kind: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_max: Option<u64>,
    #[serde(flatten)]
    pub matrix: MatrixFields,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub blocks: Vec<BlockTable>,
}

/// A kernel built from a file, with its concrete type.
#[derive(Debug)]
pub enum LoadedKernel {
    PiecewiseConstant(PiecewiseConstantKernel),
    Trapezoid(TrapezoidKernel),
    BlockDiagonal(BlockDiagKernel),
    Counterexample(BlockDiagKernel, CounterexampleSpec),
}

impl LoadedKernel {
    pub fn as_kernel(&self) -> &dyn Kernel {
        match self {
            Self::PiecewiseConstant(k) => k,
            Self::Trapezoid(k) => k,
            Self::BlockDiagonal(k) | Self::Counterexample(k, _) => k,
        }
    }

    /// The single block matrix of a piecewise-constant or trapezoid kernel.
    pub fn matrix(&self) -> Option<&SymMatrix> {
        match self {
            Self::PiecewiseConstant(k) => Some(k.matrix()),
            Self::Trapezoid(k) => Some(k.matrix()),
            _ => None,
        }
    }
}

fn blank(kind: KernelKind) -> KernelFile {
    KernelFile {
        schema: "1".into(),
        kind,
        epsilon: None,
        h_max: None,
        matrix: MatrixFields::default(),
        blocks: Vec::new(),
    }
}

impl KernelFile {
    pub fn piecewise_constant(m: &SymMatrix) -> Self {
        Self {
            matrix: MatrixFields::from_matrix(m),
            ..blank(KernelKind::PiecewiseConstant)
        }
    }

    pub fn trapezoid(k: &TrapezoidKernel) -> Self {
        Self {
            epsilon: Some(k.epsilon().to_string()),
            matrix: MatrixFields::from_matrix(k.matrix()),
            ..blank(KernelKind::Trapezoid)
        }
    }

    pub fn block_diagonal(blocks: &ExplicitBlocks) -> Self {
        Self {
            blocks: blocks
                .blocks()
                .iter()
                .map(|(k, t)| BlockTable {
                    offset: rational::format(t),
                    epsilon: k.epsilon().to_string(),
                    matrix: MatrixFields::from_matrix(k.matrix()),
                })
                .collect(),
            ..blank(KernelKind::BlockDiagonal)
        }
    }

    /// `None` is the unbounded block sequence.
    pub fn counterexample(h_max: Option<u64>) -> Self {
        Self {
            h_max,
            ..blank(KernelKind::Counterexample)
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        if file.schema != "1" {
            return Err(Error::InvalidArgument(format!(
                "unsupported schema {:?}",
                file.schema
            )));
        }
        Ok(file)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    fn epsilon(&self) -> Result<Epsilon> {
        let text = self.epsilon.as_deref().ok_or_else(|| {
            Error::InvalidArgument(format!("{:?} kernel needs epsilon", self.kind))
        })?;
        Epsilon::new(rational::parse(text)?)
    }

    fn reject(&self, present: bool, field: &str) -> Result<()> {
        if present {
            return Err(Error::InvalidArgument(format!(
                "field {field} does not apply to {:?} kernels",
                self.kind
            )));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<LoadedKernel> {
        let has_matrix = self.matrix != MatrixFields::default();
        match self.kind {
            KernelKind::PiecewiseConstant => {
                self.reject(self.epsilon.is_some(), "epsilon")?;
                self.reject(self.h_max.is_some(), "h_max")?;
                self.reject(!self.blocks.is_empty(), "blocks")?;
                Ok(LoadedKernel::PiecewiseConstant(
                    PiecewiseConstantKernel::new(self.matrix.to_matrix()?),
                ))
            }
            KernelKind::Trapezoid => {
                self.reject(self.h_max.is_some(), "h_max")?;
                self.reject(!self.blocks.is_empty(), "blocks")?;
                Ok(LoadedKernel::Trapezoid(TrapezoidKernel::new(
                    self.matrix.to_matrix()?,
                    self.epsilon()?,
                )))
            }
            KernelKind::BlockDiagonal => {
                self.reject(has_matrix, "matrix")?;
                self.reject(self.epsilon.is_some(), "epsilon")?;
                self.reject(self.h_max.is_some(), "h_max")?;
                let blocks = self
                    .blocks
                    .iter()
                    .map(|b| {
                        let k = TrapezoidKernel::new(
                            b.matrix.to_matrix()?,
                            Epsilon::new(rational::parse(&b.epsilon)?)?,
                        );
                        Ok((k, rational::parse(&b.offset)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(LoadedKernel::BlockDiagonal(BlockDiagKernel::new(Arc::new(
                    ExplicitBlocks::new(blocks)?,
                ))))
            }
            KernelKind::Counterexample => {
                self.reject(has_matrix, "matrix")?;
                self.reject(self.epsilon.is_some(), "epsilon")?;
                self.reject(!self.blocks.is_empty(), "blocks")?;
                let count = match self.h_max {
                    Some(h) => BlockCount::Finite(
                        usize::try_from(h)
                            .map_err(|_| Error::InvalidArgument("h_max too large".into()))?,
                    ),
                    None => BlockCount::Unbounded,
                };
                let (k, spec) = build_counterexample(count)?;
                Ok(LoadedKernel::Counterexample(k, spec))
            }
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn toml_error(text: &str, e: &toml::de::Error) -> Error {
    let (line, column) = e.span().map_or((1, 1), |s| line_column(text, s.start));
    Error::Parse {
        line,
        column,
        message: e.message().to_string(),
    }
}

/// Matrix from inline text: rows separated by `;` or newlines, entries by
/// whitespace or commas. Entries are integers, `p/q` or decimals.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for (line_no, line) in text.split('\n').enumerate() {
        let mut col = 0;
        for part in line.split_inclusive(';') {
            let body = part.strip_suffix(';').unwrap_or(part);
            let mut row = Vec::new();
            let mut pos = 0;
            for token in body.split(|c: char| c.is_whitespace() || c == ',') {
                let start = col + pos;
                pos += token.len() + 1;
                if token.is_empty() {
                    continue;
                }
                let value = rational::parse(token).map_err(|_| Error::Parse {
                    line: line_no + 1,
                    column: line[..start].chars().count() + 1,
                    message: format!("not a rational number: {token:?}"),
                })?;
                row.push(value);
            }
            col += part.len();
            if !row.is_empty() {
                rows.push(row);
            }
        }
    }
    SymMatrix::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn roundtrip(file: &KernelFile) -> KernelFile {
        KernelFile::parse(&file.to_toml().unwrap()).unwrap()
    }

    #[test]
    fn inline_matrix() {
        let m = parse_matrix("2 1; 1 2").unwrap();
        assert_eq!(m, SymMatrix::from_i64_rows(&[&[2, 1], &[1, 2]]).unwrap());
        let m = parse_matrix("1/2, 0.25\n0.25 1").unwrap();
        assert_eq!(m.entry(0, 1), rat(1, 4));
        match parse_matrix("1 2; 2 x") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (1, 8)),
            other => panic!("{other:?}"),
        }
        match parse_matrix("1 0\n0 1/0") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_matrix("1 2; 3 4"),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn trapezoid_roundtrip_is_exact() {
        let m =
            SymMatrix::from_factor(vec![vec![int(1), rat(1, 3)], vec![int(-2), int(1)]]).unwrap();
        let k = TrapezoidKernel::with_epsilon(m, rat(1, 7)).unwrap();
        let file = KernelFile::trapezoid(&k);
        let back = roundtrip(&file);
        assert_eq!(back, file);
        let LoadedKernel::Trapezoid(k2) = back.build().unwrap() else {
            panic!()
        };
        assert_eq!(k2.matrix(), k.matrix());
        for x in [rat(2, 3), rat(5, 4), rat(31, 10)] {
            for y in [rat(1, 1), rat(13, 7)] {
                assert_eq!(k2.eval(&x, &y), k.eval(&x, &y));
                assert_eq!(
                    k2.eval_f64(1.3, 3.2).to_bits(),
                    k.eval_f64(1.3, 3.2).to_bits()
                );
            }
        }
    }

    #[test]
    fn sylvester_and_blocks_roundtrip() {
        let m = SymMatrix::sylvester_shift(SylvesterShift {
            exponent: 2,
            shift: 2.into(),
            scale: rat(1, 20),
        })
        .unwrap();
        let file = KernelFile::piecewise_constant(&m);
        assert!(file.to_toml().unwrap().contains("[sylvester]"));
        assert_eq!(roundtrip(&file), file);
        let blocks = ExplicitBlocks::packed(vec![
            TrapezoidKernel::with_epsilon(SymMatrix::identity(1), rat(1, 4)).unwrap(),
            TrapezoidKernel::with_epsilon(m, rat(1, 6)).unwrap(),
        ])
        .unwrap();
        let file = KernelFile::block_diagonal(&blocks);
        let back = roundtrip(&file);
        assert_eq!(back, file);
        let LoadedKernel::BlockDiagonal(k) = back.build().unwrap() else {
            panic!()
        };
        assert_eq!(k.offset(1), int(3));
    }

    #[test]
    fn counterexample_file() {
        let file =
            KernelFile::parse("schema = \"1\"\nkind = \"counterexample\"\nh_max = 2\n").unwrap();
        let LoadedKernel::Counterexample(_, spec) = file.build().unwrap() else {
            panic!()
        };
        assert_eq!(spec.blocks.len(), 2);
        let lazy = KernelFile::counterexample(None);
        assert_eq!(roundtrip(&lazy), lazy);
    }

    #[test]
    fn parse_errors_have_positions() {
        match KernelFile::parse("schema = \"1\"\nkind = \"bogus\"\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let file = KernelFile::parse("schema = \"1\"\nkind = \"trapezoid\"\nmatrix = [[\"1\"]]\n")
            .unwrap();
        assert!(file.build().is_err());
        let file = KernelFile::parse(
            "schema = \"1\"\nkind = \"piecewise_constant\"\nepsilon = \"1/4\"\nmatrix = [[\"1\"]]\n",
        )
        .unwrap();
        assert!(file.build().is_err());
    }
}
