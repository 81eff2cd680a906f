//! Reduced dynamics from a closed system-environment evolution.
//!
//! The reduced map `η(t₀) ↦ Tr_E[U (η ⊗ τ) U†]` is built by tomography on the
//! matrix units `E_rs`, which are embedded linearly even though they are not
//! states.

use crate::error::{Error, Result};
use crate::maps::{a_to_b, AForm, BForm};
use crate::quantum::{
    exchange_hamiltonian, kron, min_eigenvalue_lenient, partial_trace_env, require_hermitian,
    BipartiteOperator, ComplexMatrix, DensityMatrix, HermitianEigen, DEFAULT_TOL,
};

/// A constant total Hamiltonian on `S ⊗ E` (ħ = 1), the initial time and the
/// environment state that is uncorrelated with the system at that time.
#[derive(Debug, Clone)]
pub struct TotalDynamics {
    hamiltonian: ComplexMatrix,
    t0: f64,
    tau: DensityMatrix,
    d_s: usize,
    d_e: usize,
    eigen: HermitianEigen,
}

impl PartialEq for TotalDynamics {
    fn eq(&self, other: &Self) -> bool {
        self.hamiltonian == other.hamiltonian
            && self.t0 == other.t0
            && self.tau == other.tau
            && self.d_s == other.d_s
    }
}

impl TotalDynamics {
    pub fn new(hamiltonian: ComplexMatrix, tau: DensityMatrix, t0: f64, d_s: usize) -> Result<Self> {
        require_hermitian(&hamiltonian, DEFAULT_TOL)?;
        let d_e = tau.dim();
        if d_s == 0 || hamiltonian.nrows() != d_s * d_e {
            return Err(Error::DimensionMismatch(format!(
                "Hamiltonian of size {} does not act on {} x {}",
                hamiltonian.nrows(),
                d_s,
                d_e
            )));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidArgument("t0 must be finite".into()));
        }
        let eigen = HermitianEigen::of_hermitian_part(&hamiltonian);
        Ok(Self {
            hamiltonian,
            t0,
            tau,
            d_s,
            d_e,
            eigen,
        })
    }

    /// Qubit coupled to a fully mixed qubit environment through
    /// `H = ½ Σ_j σ_j ⊗ σ_j`. The reduced Bloch vector shrinks as
    /// `cos²(t − t₀)`.
    pub fn qubit_exchange(t0: f64) -> Self {
        Self::new(exchange_hamiltonian(), DensityMatrix::maximally_mixed(2), t0, 2)
            .expect("exchange model is well formed")
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn tau(&self) -> &DensityMatrix {
        &self.tau
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_e(&self) -> usize {
        self.d_e
    }

    /// `U_{(t_f|t_i)} = exp(−i (t_f − t_i) H)`.
    pub fn propagator(&self, t_f: f64, t_i: f64) -> ComplexMatrix {
        self.eigen.propagator(t_f - t_i)
    }

    /// Same dynamics restarted at a different initial time.
    pub fn with_t0(&self, t0: f64) -> Self {
        Self { t0, ..self.clone() }
    }

    /// `ρ ↦ U ρ U†` on a raw matrix of the composite dimension.
    pub(crate) fn conjugate(&self, rho: &ComplexMatrix, t_f: f64, t_i: f64) -> ComplexMatrix {
        let u = self.propagator(t_f, t_i);
        &u * rho * u.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingResult {
    pub state: BipartiteOperator,
    /// Smallest eigenvalue of the embedded state; negative values flag a
    /// system state outside the compatibility domain.
    pub min_eig: f64,
}

impl EmbeddingResult {
    pub(crate) fn from_matrix(m: ComplexMatrix, d_s: usize, d_e: usize) -> Self {
        let min_eig = min_eigenvalue_lenient(&m);
        Self {
            state: BipartiteOperator::new(m, d_s, d_e).expect("dimensions checked by caller"),
            min_eig,
        }
    }
}

/// `η ↦ η ⊗ τ`.
pub fn product_embed(eta: &DensityMatrix, tau: &DensityMatrix) -> EmbeddingResult {
    EmbeddingResult::from_matrix(kron(eta.matrix(), tau.matrix()), eta.dim(), tau.dim())
}

pub fn evolve_total(
    td: &TotalDynamics,
    rho: &BipartiteOperator,
    t_i: f64,
    t_f: f64,
) -> Result<BipartiteOperator> {
    if rho.d_s() != td.d_s || rho.d_e() != td.d_e {
        return Err(Error::DimensionMismatch(format!(
            "state on {} x {} but dynamics on {} x {}",
            rho.d_s(),
            rho.d_e(),
            td.d_s,
            td.d_e
        )));
    }
    BipartiteOperator::new(td.conjugate(rho.matrix(), t_f, t_i), td.d_s, td.d_e)
}

/// A-form of the reduced map from `t₀` to `t_f`. Negative intervals give the
/// reduced map of the time-reversed unitary.
pub fn reduced_a_form(td: &TotalDynamics, t_f: f64) -> AForm {
    let u = td.propagator(t_f, td.t0);
    let u_dag = u.adjoint();
    let tau = td.tau.matrix();
    AForm::from_linear_map(td.d_s, |e_rs| {
        let evolved = &u * kron(e_rs, tau) * &u_dag;
        let op = BipartiteOperator::new(evolved, td.d_s, td.d_e).expect("composite dimension");
        partial_trace_env(&op)
    })
}

pub fn reduced_dynamical_map(td: &TotalDynamics, t_f: f64) -> BForm {
    a_to_b(&reduced_a_form(td, t_f))
}
