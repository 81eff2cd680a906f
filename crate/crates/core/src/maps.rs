//! Supermatrix calculus for linear maps on `d × d` matrices.
//!
//! Two index conventions describe the same map:
//!
//! * [`AForm`] acts by matrix-vector product on the row-major vectorised
//!   state. Row `(r′, s′)` flattens to `r′·d + s′`, column `(r, s)` to
//!   `r·d + s`.
//! * [`BForm`] is the reshuffled matrix `B_{(r′r),(s′s)} = A_{(r′s′),(rs)}`,
//!   row `(r′, r)` at `r′·d + r` and column `(s′, s)` at `s′·d + s`. A map
//!   preserves Hermiticity exactly when its B-form is a Hermitian matrix, and
//!   its eigen-decomposition yields the operator-sum form
//!   `ρ ↦ Σ_α λ_α C_α ρ C_α†`.
//!
//! Composition is matrix multiplication in the A-form only.

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::quantum::{
    hermiticity_defect, identity, is_finite, matrix_unit, max_abs_diff, min_eigenvalue_lenient,
    pauli, require_square, trace, unvectorize, vectorize, ComplexMatrix, DensityMatrix,
    HermitianEigen, C64, DEFAULT_TOL, ONE, ZERO,
};
use crate::sampling::{random_state, rng_from_seed};

/// Default number of random states used for the sampled positivity check.
pub const DEFAULT_POSITIVITY_SAMPLES: usize = 500;

/// Relative singular-value cutoff used when no explicit cutoff is given.
pub const RELATIVE_SV_CUTOFF: f64 = 1e-12;

fn check_supermatrix(dim: usize, matrix: &ComplexMatrix) -> Result<()> {
    let n = require_square(matrix)?;
    if dim == 0 || n != dim * dim {
        return Err(Error::DimensionMismatch(format!(
            "supermatrix of size {n} does not match system dimension {dim}"
        )));
    }
    if !is_finite(matrix) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

fn check_state_dim(dim: usize, m: &ComplexMatrix) -> Result<()> {
    if m.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!(
            "map acts on {dim}x{dim} matrices, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AForm {
    dim: usize,
    matrix: ComplexMatrix,
}

impl AForm {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_supermatrix(dim, &matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// Tomography of a linear map from its action on the matrix units `E_rs`.
    pub fn from_linear_map<F>(dim: usize, mut f: F) -> Self
    where
        F: FnMut(&ComplexMatrix) -> ComplexMatrix,
    {
        let n = dim * dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for r in 0..dim {
            for s in 0..dim {
                let image = vectorize(&f(&matrix_unit(dim, r, s)));
                matrix.set_column(r * dim + s, &image);
            }
        }
        Self { dim, matrix }
    }

    /// `ρ ↦ ρᵀ`.
    pub fn transpose_map(dim: usize) -> Self {
        Self::from_linear_map(dim, |x| x.transpose())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Linear action on an arbitrary `d × d` matrix.
    pub fn act(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_state_dim(self.dim, x)?;
        Ok(unvectorize(&(&self.matrix * vectorize(x)), self.dim))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BForm {
    dim: usize,
    matrix: ComplexMatrix,
}

impl BForm {
    /// Hermiticity is not enforced here; it holds exactly for
    /// Hermiticity-preserving maps and is required by
    /// [`spectral_decompose`].
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_supermatrix(dim, &matrix)?;
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        a_to_b(&AForm::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_defect(&self.matrix) <= tol
    }

    /// `ρ′_{r′s′} = Σ_{rs} B_{(r′r),(s′s)} ρ_{rs}` on an arbitrary matrix.
    pub fn act(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        check_state_dim(self.dim, x)?;
        let d = self.dim;
        Ok(ComplexMatrix::from_fn(d, d, |rp, sp| {
            let mut acc = ZERO;
            for r in 0..d {
                for s in 0..d {
                    acc += self.matrix[(rp * d + r, sp * d + s)] * x[(r, s)];
                }
            }
            acc
        }))
    }
}

/// The index exchange `(r′s′, rs) ↔ (r′r, s′s)`. It is its own inverse, so
/// the same permutation serves both directions.
fn reshuffle(dim: usize, m: &ComplexMatrix) -> ComplexMatrix {
    let d = dim;
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (rp, r) = (row / d, row % d);
        let (sp, s) = (col / d, col % d);
        m[(rp * d + sp, r * d + s)]
    })
}

pub fn a_to_b(a: &AForm) -> BForm {
    BForm {
        dim: a.dim,
        matrix: reshuffle(a.dim, &a.matrix),
    }
}

pub fn b_to_a(b: &BForm) -> AForm {
    AForm {
        dim: b.dim,
        matrix: reshuffle(b.dim, &b.matrix),
    }
}

pub fn apply_a(a: &AForm, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    a.act(rho.matrix())
}

pub fn apply_b(b: &BForm, rho: &DensityMatrix) -> Result<ComplexMatrix> {
    b.act(rho.matrix())
}

/// Outcome of [`check_a_properties`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub trace_preserving: bool,
    pub hermiticity_preserving: bool,
    pub positive_on_samples: bool,
    /// `max_{rs} |Σ_{r′} A_{(r′r′),(rs)} − δ_{rs}|`.
    pub trace_defect: f64,
    /// `max |A_{(s′r′),(sr)} − A*_{(r′s′),(rs)}|`.
    pub hermiticity_defect: f64,
    /// Smallest output eigenvalue over all sampled input states.
    pub worst_min_eigenvalue: f64,
    pub samples: usize,
}

/// Trace and Hermiticity preservation are checked on the supermatrix
/// entries; positivity is checked by applying the map to `n_samples` random
/// pure and mixed states drawn from `seed`.
pub fn check_a_properties(a: &AForm, n_samples: usize, seed: u64) -> PropertyReport {
    let d = a.dim;
    let m = &a.matrix;

    let mut trace_defect: f64 = 0.0;
    for r in 0..d {
        for s in 0..d {
            let sum: C64 = (0..d).map(|rp| m[(rp * d + rp, r * d + s)]).sum();
            let target = if r == s { ONE } else { ZERO };
            trace_defect = trace_defect.max((sum - target).norm());
        }
    }

    let mut herm_defect: f64 = 0.0;
    for rp in 0..d {
        for sp in 0..d {
            for r in 0..d {
                for s in 0..d {
                    let lhs = m[(sp * d + rp, s * d + r)];
                    let rhs = m[(rp * d + sp, r * d + s)].conj();
                    herm_defect = herm_defect.max((lhs - rhs).norm());
                }
            }
        }
    }

    let mut rng = rng_from_seed(seed);
    let mut worst = f64::INFINITY;
    for i in 0..n_samples {
        let rho = random_state(d, i, &mut rng);
        let out = a.act(rho.matrix()).expect("sample has the map's dimension");
        worst = worst.min(min_eigenvalue_lenient(&out));
    }

    PropertyReport {
        trace_preserving: trace_defect <= DEFAULT_TOL,
        hermiticity_preserving: herm_defect <= DEFAULT_TOL,
        positive_on_samples: worst >= -DEFAULT_TOL,
        trace_defect,
        hermiticity_defect: herm_defect,
        worst_min_eigenvalue: if n_samples == 0 { f64::NAN } else { worst },
        samples: n_samples,
    }
}

/// Operator-sum form `ρ ↦ Σ_α λ_α C_α ρ C_α†` of a Hermitian B-form.
#[derive(Debug, Clone)]
pub struct MapSpectrum {
    /// Sorted descending.
    pub lambdas: Vec<f64>,
    /// Trace-orthonormal: `Tr(C_α† C_β) = δ_αβ`.
    pub c_matrices: Vec<ComplexMatrix>,
}

impl MapSpectrum {
    pub fn dim(&self) -> usize {
        self.c_matrices.first().map_or(0, |c| c.nrows())
    }

    pub fn min_lambda(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rebuilds the B-form `Σ_α λ_α vec(C_α) vec(C_α)†`.
    pub fn reconstruct(&self) -> BForm {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for (lambda, c) in self.lambdas.iter().zip(&self.c_matrices) {
            let v = vectorize(c);
            m += (&v * v.adjoint()).scale(*lambda);
        }
        BForm { dim: d, matrix: m }
    }

    /// `Σ_α λ_α C_α† C_α`, the identity for trace-preserving maps.
    pub fn trace_form(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for (lambda, c) in self.lambdas.iter().zip(&self.c_matrices) {
            m += (c.adjoint() * c).scale(*lambda);
        }
        m
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (lambda, c) in self.lambdas.iter().zip(&self.c_matrices) {
            out += (c * rho * c.adjoint()).scale(*lambda);
        }
        out
    }
}

/// Rotates the global phase so the first non-negligible entry is real
/// positive.
fn normalize_phase(v: &mut nalgebra::DVector<C64>) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-10 * scale) {
        let phase = z.conj() / z.norm();
        v.apply(|x| *x *= phase);
    }
}

fn lexicographic(a: &nalgebra::DVector<C64>, b: &nalgebra::DVector<C64>) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

/// Eigen-decomposition of the B-form into real eigenvalues (descending) and
/// eigenmatrices `C_α` (eigenvector reshaped with `r′` as the row index).
///
/// Within a degenerate eigenspace the individual `C_α` are not unique; only
/// the reconstructed map is meaningful.
pub fn spectral_decompose(b: &BForm) -> Result<MapSpectrum> {
    let eig = HermitianEigen::new(&b.matrix, DEFAULT_TOL)?;
    let d = b.dim;
    let mut pairs: Vec<(f64, nalgebra::DVector<C64>)> = (0..d * d)
        .map(|k| {
            let mut v = eig.vectors.column(k).into_owned();
            normalize_phase(&mut v);
            (eig.values[k], v)
        })
        .collect();
    pairs.sort_by(|(la, va), (lb, vb)| {
        let tie = DEFAULT_TOL * la.abs().max(lb.abs()).max(1.0);
        if (la - lb).abs() <= tie {
            lexicographic(va, vb)
        } else {
            lb.total_cmp(la)
        }
    });
    let (lambdas, c_matrices) = pairs
        .into_iter()
        .map(|(l, v)| (l, unvectorize(&v, d)))
        .unzip();
    Ok(MapSpectrum {
        lambdas,
        c_matrices,
    })
}

/// All B-form eigenvalues at least `-tol`.
pub fn is_completely_positive(b: &BForm, tol: f64) -> Result<bool> {
    let eig = HermitianEigen::new(&b.matrix, DEFAULT_TOL.max(tol))?;
    Ok(eig.min() >= -tol)
}

pub fn compose_a(second: &AForm, first: &AForm) -> Result<AForm> {
    if second.dim != first.dim {
        return Err(Error::DimensionMismatch(format!(
            "cannot compose maps on dimensions {} and {}",
            second.dim, first.dim
        )));
    }
    Ok(AForm {
        dim: first.dim,
        matrix: &second.matrix * &first.matrix,
    })
}

/// Moore–Penrose pseudo-inverse of an A-form with its numerical rank.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub map: AForm,
    pub rank: usize,
    /// Singular values of the source map, descending.
    pub singular_values: Vec<f64>,
    pub cutoff: f64,
}

impl PseudoInverse {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.singular_values.len()
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }
}

/// Singular values below the cutoff are treated as zero. `None` selects the
/// relative cutoff `1e-12 · σ_max`.
pub fn pseudo_inverse_a(a: &AForm, sv_cutoff: Option<f64>) -> PseudoInverse {
    let svd = a.matrix.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = &svd.singular_values;

    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = sv_cutoff.unwrap_or(RELATIVE_SV_CUTOFF * sigma_max);

    let n = a.matrix.nrows();
    let mut pinv = ComplexMatrix::zeros(n, n);
    let mut rank = 0;
    for k in 0..sigma.len() {
        if sigma[k] > cutoff {
            rank += 1;
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k);
            pinv += (vk * uk.adjoint()).scale(1.0 / sigma[k]);
        }
    }

    let mut singular_values: Vec<f64> = sigma.iter().copied().collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    PseudoInverse {
        map: AForm {
            dim: a.dim,
            matrix: pinv,
        },
        rank,
        singular_values,
        cutoff,
    }
}

/// Details behind [`in_compatibility_domain`].
#[derive(Debug, Clone)]
pub struct CompatibilityCheck {
    /// `Ã·ρ`, the candidate preimage.
    pub preimage: ComplexMatrix,
    pub preimage_min_eigenvalue: f64,
    pub preimage_trace_defect: f64,
    pub preimage_hermiticity_defect: f64,
    /// `max |A·Ã·ρ − ρ|`.
    pub residual: f64,
    pub in_domain: bool,
}

pub fn compatibility_check(forward: &AForm, rho: &DensityMatrix, tol: f64) -> Result<CompatibilityCheck> {
    let pinv = pseudo_inverse_a(forward, None);
    let preimage = pinv.map.act(rho.matrix())?;
    let back = forward.act(&preimage)?;
    let residual = max_abs_diff(&back, rho.matrix());
    let min_eig = min_eigenvalue_lenient(&preimage);
    let tr = trace(&preimage);
    let trace_defect = (tr - ONE).norm();
    let herm = hermiticity_defect(&preimage);
    let in_domain = min_eig >= -tol && residual <= tol && trace_defect <= tol && herm <= tol;
    Ok(CompatibilityCheck {
        preimage,
        preimage_min_eigenvalue: min_eig,
        preimage_trace_defect: trace_defect,
        preimage_hermiticity_defect: herm,
        residual,
        in_domain,
    })
}

/// Whether `ρ = A·ρ₀` for some valid density matrix `ρ₀`, decided through
/// the pseudo-inverse preimage.
pub fn in_compatibility_domain(forward: &AForm, rho: &DensityMatrix, tol: f64) -> bool {
    compatibility_check(forward, rho, tol).is_ok_and(|c| c.in_domain)
}

/// Qubit map in Bloch coordinates, `a ↦ R·a + r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineQubitMap {
    pub squeeze: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl AffineQubitMap {
    pub fn new(squeeze: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self {
            squeeze,
            translation,
        }
    }

    /// `a ↦ k·a`.
    pub fn uniform_shrink(k: f64) -> Self {
        Self::new(Matrix3::identity() * k, Vector3::zeros())
    }
}

/// Extends the Bloch-space action linearly to all 2×2 matrices:
/// `X = ½(Tr X·𝟙 + Σ_j Tr(Xσ_j) σ_j)`.
#[allow(clippy::needless_range_loop)]
pub fn affine_to_a(m: &AffineQubitMap) -> AForm {
    let paulis = [pauli(1), pauli(2), pauli(3)];
    AForm::from_linear_map(2, |x| {
        let t = trace(x);
        let coords: Vec<C64> = paulis.iter().map(|p| (x * p).trace()).collect();
        let mut out = identity(2) * t;
        for j in 0..3 {
            let mut cj = t * m.translation[j];
            for k in 0..3 {
                cj += coords[k] * m.squeeze[(j, k)];
            }
            out += &paulis[j] * cj;
        }
        out.scale(0.5)
    })
}

/// Inverse of [`affine_to_a`] for trace-preserving, Hermiticity-preserving
/// qubit maps.
pub fn a_to_affine(a: &AForm) -> Result<AffineQubitMap> {
    if a.dim != 2 {
        return Err(Error::DimensionMismatch("affine form needs a qubit map".into()));
    }
    let img = |x: &ComplexMatrix| a.act(x).expect("2x2 input");
    let coord = |y: &ComplexMatrix, j: usize| (y * pauli(j)).trace().re;
    let center = img(&identity(2).scale(0.5));
    let translation = Vector3::from_fn(|j, _| coord(&center, j + 1));
    let mut squeeze = Matrix3::zeros();
    for k in 0..3 {
        let y = img(&pauli(k + 1).scale(0.5));
        for j in 0..3 {
            squeeze[(j, k)] = coord(&y, j + 1);
        }
    }
    Ok(AffineQubitMap::new(squeeze, translation))
}
