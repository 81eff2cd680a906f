//! Classical stochastic matrices acting on probability vectors.
//!
//! Matrices are column-stochastic and act from the left, `p_f = M p_i`. A
//! stochastic matrix can have a pseudo-inverse that is not stochastic; it is
//! then a valid inverse only on the part of the simplex whose preimage stays
//! inside the simplex.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance on sums and signs of probabilities.
pub const PROBABILITY_TOL: f64 = 1e-12;

const IMAGE_TOL: f64 = 1e-10;

fn check_simplex(p: &DVector<f64>) -> Result<()> {
    if p.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if let Some(&neg) = p.iter().find(|&&x| x < -PROBABILITY_TOL) {
        return Err(Error::NotPositive(neg));
    }
    let sum = p.sum();
    if (sum - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidTrace { re: sum, im: 0.0 });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(DVector<f64>);

impl ProbabilityVector {
    pub fn new(p: DVector<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::DimensionMismatch("empty probability vector".into()));
        }
        check_simplex(&p)?;
        Ok(Self(p))
    }

    pub fn from_slice(p: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(p))
    }

    pub fn uniform(n: usize) -> Self {
        Self(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    /// Square matrix whose columns are probability vectors.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NotSquare(m.nrows(), m.ncols()));
        }
        for col in m.column_iter() {
            check_simplex(&col.into_owned())?;
        }
        Ok(Self(m))
    }

    pub fn from_row_slice(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn uniform(n: usize) -> Self {
        Self(DMatrix::from_element(n, n, 1.0 / n as f64))
    }

    /// Column `j` of the result is `e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        let mut m = DMatrix::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            if i >= n || seen[i] {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
            seen[i] = true;
            m[(i, j)] = 1.0;
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

pub fn apply_stochastic(m: &StochasticMatrix, p: &ProbabilityVector) -> Result<ProbabilityVector> {
    if m.dim() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} matrix on a vector of length {1}",
            m.dim(),
            p.len()
        )));
    }
    Ok(ProbabilityVector(m.matrix() * p.as_vector()))
}

/// Rows also sum to one.
pub fn is_bistochastic(m: &StochasticMatrix) -> bool {
    m.matrix()
        .row_iter()
        .all(|row| (row.sum() - 1.0).abs() <= PROBABILITY_TOL)
}

/// Moore–Penrose pseudo-inverse. A full-rank matrix is inverted directly,
/// which is exact for permutations; rank-deficient ones go through the SVD.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin > 1e-10 * smax {
        if let Some(inv) = m.clone().try_inverse() {
            return inv;
        }
    }
    m.clone()
        .pseudo_inverse(1e-12 * smax.max(f64::MIN_POSITIVE))
        .expect("nonnegative epsilon")
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPreimage {
    pub preimage: DVector<f64>,
    /// The preimage is a probability vector and maps back onto `p`.
    pub in_domain: bool,
}

pub fn pseudo_inverse_stochastic(m: &StochasticMatrix, p: &ProbabilityVector) -> Result<StochasticPreimage> {
    if m.dim() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} matrix on a vector of length {1}",
            m.dim(),
            p.len()
        )));
    }
    let preimage = pseudo_inverse(m.matrix()) * p.as_vector();
    let image = m.matrix() * &preimage;
    let residual = (image - p.as_vector()).amax();
    let in_domain = residual <= IMAGE_TOL && check_simplex(&preimage).is_ok();
    Ok(StochasticPreimage {
        preimage,
        in_domain,
    })
}
