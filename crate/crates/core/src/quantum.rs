//! Complex-matrix foundation: states, composite systems, partial traces and
//! unitary propagators.
//!
//! Composite indices flatten system-major: the basis state `(r, k)` of
//! `S ⊗ E` sits at `r * d_E + k`, which is exactly the Kronecker layout of
//! `η ⊗ τ`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Absolute tolerance for Hermiticity, trace and positivity checks.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

/// Pauli matrix σ_j for j = 1, 2, 3 (σ_0 is the identity).
pub fn pauli(j: usize) -> ComplexMatrix {
    match j {
        0 => identity(2),
        1 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("Pauli index must be 0..=3, got {j}"),
    }
}

/// The swap operator on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(d * d, d * d);
    for a in 0..d {
        for b in 0..d {
            s[(a * d + b, b * d + a)] = ONE;
        }
    }
    s
}

/// `½ Σ_j σ_j ⊗ σ_j`, the isotropic exchange coupling of two qubits.
pub fn exchange_hamiltonian() -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(4, 4);
    for j in 1..=3 {
        h += kron(&pauli(j), &pauli(j)).scale(0.5);
    }
    h
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub(crate) fn require_square(m: &ComplexMatrix) -> Result<usize> {
    let (r, c) = m.shape();
    if r != c {
        return Err(Error::NotSquare(r, c));
    }
    Ok(r)
}

pub(crate) fn require_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    require_square(m)?;
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues and
/// the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        require_hermitian(m, tol)?;
        Ok(Self::of_hermitian_part(m))
    }

    /// Decomposes `(m + m†)/2` without checking how far `m` is from Hermitian.
    pub fn of_hermitian_part(m: &ComplexMatrix) -> Self {
        let eig = hermitian_part(m).symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let vectors = ComplexMatrix::from_columns(
            &order
                .iter()
                .map(|&i| eig.eigenvectors.column(i).into_owned())
                .collect::<Vec<_>>(),
        );
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `exp(-i Δt H)` from the stored eigen-system.
    pub fn propagator(&self, dt: f64) -> ComplexMatrix {
        let phases = DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&e| C64::from_polar(1.0, -e * dt)),
        );
        let scaled = ComplexMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, c| {
            self.vectors[(r, c)] * phases[c]
        });
        scaled * self.vectors.adjoint()
    }
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(HermitianEigen::new(m, DEFAULT_TOL)?.min())
}

/// Smallest eigenvalue of the Hermitian part, for diagnostics on matrices
/// that are only approximately Hermitian.
pub fn min_eigenvalue_lenient(m: &ComplexMatrix) -> f64 {
    HermitianEigen::of_hermitian_part(m).min()
}

/// `U = exp(-i Δt H)` via the eigen-decomposition of `H`.
pub fn unitary_propagator(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    Ok(HermitianEigen::new(h, DEFAULT_TOL)?.propagator(dt))
}

/// Row-major vectorisation, `v[r*d + s] = m[(r, s)]`.
pub fn vectorize(m: &ComplexMatrix) -> DVector<C64> {
    let (rows, cols) = m.shape();
    DVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

pub fn unvectorize(v: &DVector<C64>, d: usize) -> ComplexMatrix {
    assert_eq!(v.len(), d * d, "vector length is not d^2");
    ComplexMatrix::from_fn(d, d, |r, s| v[r * d + s])
}

/// Matrix unit `E_rs` in dimension `d`.
pub fn matrix_unit(d: usize, r: usize, s: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(r, s)] = ONE;
    m
}

/// A validated density matrix: unit trace, Hermitian and positive
/// semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(m, DEFAULT_TOL)
    }

    pub fn with_tolerance(m: ComplexMatrix, tol: f64) -> Result<Self> {
        require_hermitian(&m, tol)?;
        let tr = trace(&m);
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidTrace { re: tr.re, im: tr.im });
        }
        let min = min_eigenvalue_lenient(&m);
        if min < -tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix produced by a trusted numerical pipeline; positivity is
    /// reported alongside rather than enforced.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d).scale(1.0 / d as f64))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalised) vector `ψ`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument("state vector has zero norm".into()));
        }
        let psi = psi.unscale(norm);
        Ok(Self(&psi * psi.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        (&self.0 * &self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue_lenient(&self.0)
    }
}

/// Qubit state coordinates `η = ½(𝟙 + a·σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BlochVector {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl BlochVector {
    pub const fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Self { a1, a2, a3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn norm(self) -> f64 {
        (self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3).sqrt()
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(k * self.a1, k * self.a2, k * self.a3)
    }

    /// `½(𝟙 + a·σ)` for any real vector, physical or not.
    pub fn operator(self) -> ComplexMatrix {
        let mut m = identity(2);
        for (j, a) in self.to_array().into_iter().enumerate() {
            m += pauli(j + 1).scale(a);
        }
        m.scale(0.5)
    }

    /// Coordinates `Re Tr(m σ_j)` of a 2×2 operator.
    pub fn of_operator(m: &ComplexMatrix) -> Result<Self> {
        if m.shape() != (2, 2) {
            return Err(Error::DimensionMismatch(format!(
                "Bloch coordinates need a 2x2 operator, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let coord = |j| (m * pauli(j)).trace().re;
        Ok(Self::new(coord(1), coord(2), coord(3)))
    }
}

/// Rejects vectors outside the Bloch ball (beyond tolerance).
pub fn bloch_to_density(a: BlochVector) -> Result<DensityMatrix> {
    DensityMatrix::new(a.operator())
}

pub fn density_to_bloch(eta: &DensityMatrix) -> Result<BlochVector> {
    BlochVector::of_operator(eta.matrix())
}

/// An operator on `S ⊗ E` together with its factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteOperator {
    matrix: ComplexMatrix,
    d_s: usize,
    d_e: usize,
}

impl BipartiteOperator {
    pub fn new(matrix: ComplexMatrix, d_s: usize, d_e: usize) -> Result<Self> {
        let n = require_square(&matrix)?;
        if n != d_s * d_e || d_s == 0 || d_e == 0 {
            return Err(Error::DimensionMismatch(format!(
                "operator of size {n} cannot split as {d_s} x {d_e}"
            )));
        }
        Ok(Self { matrix, d_s, d_e })
    }

    pub fn product(system: &ComplexMatrix, env: &ComplexMatrix) -> Result<Self> {
        let d_s = require_square(system)?;
        let d_e = require_square(env)?;
        Ok(Self {
            matrix: kron(system, env),
            d_s,
            d_e,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }
}

/// `(Tr_E X)_{rs} = Σ_k X_{(r,k),(s,k)}`.
pub fn partial_trace_env(x: &BipartiteOperator) -> ComplexMatrix {
    let (d_s, d_e) = (x.d_s, x.d_e);
    ComplexMatrix::from_fn(d_s, d_s, |r, s| {
        (0..d_e).map(|k| x.matrix[(r * d_e + k, s * d_e + k)]).sum()
    })
}
