use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// A regression problem: response `y`, low-dimensional design `x` (may have
/// zero columns) and high-dimensional design `z`.
///
/// Rows are observations. All entries must be finite; `n >= 2`, `p >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    x: DMatrix<f64>,
    z: DMatrix<f64>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, x: DMatrix<f64>, z: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 rows, got {n}")));
        }
        if z.ncols() < 1 {
            return Err(Error::Dimension("z must have at least one column".into()));
        }
        if z.nrows() != n || x.nrows() != n {
            return Err(Error::Dimension(format!(
                "row counts disagree: y has {n}, x has {}, z has {}",
                x.nrows(),
                z.nrows()
            )));
        }
        for (name, found) in [
            ("y", y.iter().all(|v| v.is_finite())),
            ("x", x.iter().all(|v| v.is_finite())),
            ("z", z.iter().all(|v| v.is_finite())),
        ] {
            if !found {
                return Err(Error::NonFinite(format!("column block {name} contains a non-finite entry")));
            }
        }
        Ok(Self { y, x, z })
    }

    /// Dataset with no low-dimensional block (`q = 0`).
    pub fn without_x(y: DVector<f64>, z: DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        Self::new(y, DMatrix::zeros(n, 0), z)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.z.ncols()
    }

    pub fn q(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }

    /// Column-concatenated design `[x | z]`, used when the response mean is
    /// modeled over both blocks jointly.
    pub fn augmented_design(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut w = DMatrix::zeros(n, self.q() + self.p());
        w.columns_mut(0, self.q()).copy_from(&self.x);
        w.columns_mut(self.q(), self.p()).copy_from(&self.z);
        w
    }
}

/// A candidate model: a canonical (strictly increasing) set of column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelIndex(Vec<usize>);

impl ModelIndex {
    /// Builds a model from arbitrary-order indices; duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(format!(
                "duplicate column index in {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    /// Caller guarantees `indices` is strictly increasing.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, col: usize) -> bool {
        self.0.binary_search(&col).is_ok()
    }

    /// Checks all indices lie in `[0, p)`.
    pub fn validate_for(&self, p: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= p => Err(Error::InvalidModel(format!(
                "column index {last} out of range for {p} columns"
            ))),
            _ => Ok(()),
        }
    }

    /// The model with `drop` replaced by `add`. `drop == add` is the identity.
    pub fn swap_one(&self, drop: usize, add: usize) -> Result<ModelIndex> {
        if !self.contains(drop) {
            return Err(Error::InvalidModel(format!(
                "cannot drop column {drop}: not in model"
            )));
        }
        if drop == add {
            return Ok(self.clone());
        }
        if self.contains(add) {
            return Err(Error::InvalidModel(format!(
                "cannot add column {add}: already in model"
            )));
        }
        let mut v: Vec<usize> = self.0.iter().copied().filter(|&c| c != drop).collect();
        let pos = v.partition_point(|&c| c < add);
        v.insert(pos, add);
        Ok(Self(v))
    }
}

impl std::fmt::Display for ModelIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}
