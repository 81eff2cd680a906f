//! Differential picture of open-system dynamics.
//!
//! The time-local generator of the canonical maps,
//!
//! ```text
//! η̇ = −i[H_O, η] + K_t(η),    K_t = F_t + F_t†,
//! F_t(·) = −i Tr_E[H_I Eᶜ_t(·)],    F_t†(·) = +i Tr_E[Eᶜ_t(·) H_I],
//! ```
//!
//! is available both as a central finite difference of canonical maps
//! ([`generator_at`]) and assembled from the canonical embedding
//! ([`assemble_generator`]). Alongside it live the Markovian
//! (Kossakowski–Lindblad) equation, its extraction from a near-identity map,
//! the collision model, and the short-time truncated generator.

use std::io::Write;

use crate::canonical::{backward_to_t0, CanonicalEmbedding};
use crate::error::{Error, Result};
use crate::maps::{a_to_b, b_to_a, compose_a, in_compatibility_domain, spectral_decompose, AForm, BForm};
use crate::open_system::{reduced_a_form, TotalDynamics};
use crate::quantum::{
    commutator, hermiticity_defect, identity, kron, max_abs_diff, min_eigenvalue_lenient, pauli,
    partial_trace_env, require_hermitian, trace, BipartiteOperator, BlochVector, ComplexMatrix,
    DensityMatrix, C64, DEFAULT_TOL, I, ONE,
};

/// Step for the central finite difference of canonical maps.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default RK4 time step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Split of the total Hamiltonian into a system-local part `H_O ⊗ 𝟙` and the
/// interaction `H_I`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSplit {
    h_local: ComplexMatrix,
    h_interaction: ComplexMatrix,
}

impl HamiltonianSplit {
    /// Checks `H_O ⊗ 𝟙 + H_I = H` within `1e-12`.
    pub fn new(td: &TotalDynamics, h_local: ComplexMatrix, h_interaction: ComplexMatrix) -> Result<Self> {
        if h_local.shape() != (td.d_s(), td.d_s()) {
            return Err(Error::DimensionMismatch(format!(
                "local Hamiltonian must be {0}x{0}",
                td.d_s()
            )));
        }
        require_hermitian(&h_local, DEFAULT_TOL)?;
        if h_interaction.shape() != td.hamiltonian().shape() {
            return Err(Error::DimensionMismatch("interaction Hamiltonian size".into()));
        }
        let total = kron(&h_local, &identity(td.d_e())) + &h_interaction;
        let defect = max_abs_diff(&total, td.hamiltonian());
        if defect > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "H_O ⊗ 1 + H_I differs from H by {defect:e}"
            )));
        }
        Ok(Self {
            h_local,
            h_interaction,
        })
    }

    /// `H_I = H − H_O ⊗ 𝟙`.
    pub fn from_local(td: &TotalDynamics, h_local: ComplexMatrix) -> Result<Self> {
        if h_local.shape() != (td.d_s(), td.d_s()) {
            return Err(Error::DimensionMismatch(format!(
                "local Hamiltonian must be {0}x{0}",
                td.d_s()
            )));
        }
        require_hermitian(&h_local, DEFAULT_TOL)?;
        let h_interaction = td.hamiltonian() - kron(&h_local, &identity(td.d_e()));
        Ok(Self {
            h_local,
            h_interaction,
        })
    }

    /// `H_O = 0`, the whole Hamiltonian is interaction.
    pub fn interaction_only(td: &TotalDynamics) -> Self {
        Self {
            h_local: ComplexMatrix::zeros(td.d_s(), td.d_s()),
            h_interaction: td.hamiltonian().clone(),
        }
    }

    pub fn h_local(&self) -> &ComplexMatrix {
        &self.h_local
    }

    pub fn h_interaction(&self) -> &ComplexMatrix {
        &self.h_interaction
    }
}

fn neg_i_commutator(h: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
    commutator(h, x) * (-I)
}

fn reduce(td: &TotalDynamics, m: ComplexMatrix) -> ComplexMatrix {
    partial_trace_env(&BipartiteOperator::new(m, td.d_s(), td.d_e()).expect("composite dimension"))
}

#[derive(Debug, Clone)]
pub struct FOperatorOutput {
    pub value: ComplexMatrix,
    /// False when `η` lies outside the compatibility domain at `t`; the value
    /// is computed regardless.
    pub in_domain: bool,
}

/// `F_t(η) = −i Tr_E[H_I Eᶜ_t(η)]`.
pub fn f_operator(td: &TotalDynamics, split: &HamiltonianSplit, t: f64, eta: &DensityMatrix) -> Result<FOperatorOutput> {
    let embedding = CanonicalEmbedding::at(td, t)?;
    let lifted = embedding.lift(eta.matrix())?;
    let value = reduce(td, split.h_interaction() * lifted) * (-I);
    let in_domain = in_compatibility_domain(&reduced_a_form(td, t), eta, DEFAULT_TOL);
    Ok(FOperatorOutput { value, in_domain })
}

/// Snapshot of the generator `K_t` at one time.
#[derive(Debug, Clone)]
pub struct GeneratorSample {
    pub t: f64,
    pub k_superop: BForm,
    pub h_local: ComplexMatrix,
}

impl GeneratorSample {
    /// `K_t(x)`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.k_superop.act(x).expect("generator dimension")
    }

    /// Full right-hand side `−i[H_O, x] + K_t(x)`.
    pub fn rhs(&self, x: &ComplexMatrix) -> ComplexMatrix {
        neg_i_commutator(&self.h_local, x) + self.apply(x)
    }
}

/// `K_t` from the central difference
/// `(Bᶜ(t+h|t) − Bᶜ(t−h|t)) / 2h` with the local commutator removed.
pub fn generator_at(td: &TotalDynamics, split: &HamiltonianSplit, t: f64, fd_step: f64) -> Result<GeneratorSample> {
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::InvalidArgument(format!("finite-difference step {fd_step}")));
    }
    let back = backward_to_t0(td, t)?;
    let plus = compose_a(&reduced_a_form(td, t + fd_step), &back)?;
    let minus = compose_a(&reduced_a_form(td, t - fd_step), &back)?;
    let derivative = (plus.into_matrix() - minus.into_matrix()).unscale(2.0 * fd_step);
    let local = AForm::from_linear_map(td.d_s(), |x| neg_i_commutator(split.h_local(), x));
    let k = AForm::new(td.d_s(), derivative - local.into_matrix())?;
    Ok(GeneratorSample {
        t,
        k_superop: a_to_b(&k),
        h_local: split.h_local().clone(),
    })
}

/// `K_t = F_t + F_t†` built from the canonical embedding, extended linearly
/// to all system operators.
pub fn assemble_generator(td: &TotalDynamics, split: &HamiltonianSplit, t: f64) -> Result<GeneratorSample> {
    let embedding = CanonicalEmbedding::at(td, t)?;
    let h_i = split.h_interaction();
    let k = AForm::from_linear_map(td.d_s(), |x| {
        let lifted = embedding.lift(x).expect("system dimension");
        let f = reduce(td, h_i * &lifted) * (-I);
        let f_dag = reduce(td, &lifted * h_i) * I;
        f + f_dag
    });
    Ok(GeneratorSample {
        t,
        k_superop: a_to_b(&k),
        h_local: split.h_local().clone(),
    })
}

/// Time series of states with per-row diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Filled only for qubits.
    pub bloch: Vec<BlochVector>,
    pub purity: Vec<f64>,
    pub min_eig: Vec<f64>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, state: ComplexMatrix) {
        if state.nrows() == 2 {
            self.bloch
                .push(BlochVector::of_operator(&state).expect("2x2 state"));
        }
        self.purity.push((&state * &state).trace().re);
        self.min_eig.push(min_eigenvalue_lenient(&state));
        self.times.push(t);
        self.states.push(DensityMatrix::new_unchecked(state));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }

    pub fn final_bloch_norm(&self) -> Option<f64> {
        self.bloch.last().map(|b| b.norm())
    }

    pub fn max_trace_defect(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (trace(s.matrix()) - ONE).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue_seen(&self) -> f64 {
        self.min_eig.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.states
            .iter()
            .map(|s| hermiticity_defect(s.matrix()))
            .fold(0.0, f64::max)
    }

    pub const CSV_HEADER: &'static str = "t,a1,a2,a3,purity,min_eig";

    /// One CSV row per state, 17 significant digits. Qubit trajectories only.
    pub fn csv_rows(&self) -> Result<Vec<String>> {
        if self.bloch.len() != self.len() {
            return Err(Error::DimensionMismatch(
                "trajectory CSV needs qubit states".into(),
            ));
        }
        Ok((0..self.len())
            .map(|i| {
                let a = self.bloch[i];
                [self.times[i], a.a1, a.a2, a.a3, self.purity[i], self.min_eig[i]]
                    .iter()
                    .map(|x| format!("{x:.16e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for row in self.csv_rows()? {
            writeln!(out, "{row}")?;
        }
        Ok(())
    }
}

/// Number of steps and the adjusted step size that lands exactly on `t_end`.
fn time_grid(t_start: f64, t_end: f64, dt: f64) -> Result<(usize, f64)> {
    if !(t_start.is_finite() && t_end.is_finite() && dt.is_finite()) || dt <= 0.0 || t_end <= t_start {
        return Err(Error::InvalidArgument(format!(
            "time grid [{t_start}, {t_end}] with dt = {dt}"
        )));
    }
    let n = ((t_end - t_start) / dt).round().max(1.0) as usize;
    Ok((n, (t_end - t_start) / n as f64))
}

fn rk4_step<F>(f: &mut F, t: f64, y: &ComplexMatrix, h: f64) -> Result<ComplexMatrix>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &(y + k1.scale(0.5 * h)))?;
    let k3 = f(t + 0.5 * h, &(y + k2.scale(0.5 * h)))?;
    let k4 = f(t + h, &(y + k3.scale(h)))?;
    Ok(y + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(h / 6.0))
}

/// Classic RK4 over a uniform grid; a failing right-hand side aborts with the
/// states computed so far.
fn integrate<F>(mut f: F, eta0: &DensityMatrix, t_start: f64, t_end: f64, dt: f64) -> Result<Trajectory>
where
    F: FnMut(f64, &ComplexMatrix) -> Result<ComplexMatrix>,
{
    let (n, h) = time_grid(t_start, t_end, dt)?;
    let mut traj = Trajectory::new();
    let mut y = eta0.matrix().clone();
    traj.push(t_start, y.clone());
    for k in 0..n {
        let t = t_start + k as f64 * h;
        match rk4_step(&mut f, t, &y, h) {
            Ok(next) => y = next,
            Err(cause) => {
                return Err(Error::IntegrationAborted {
                    time: t,
                    cause: Box::new(cause),
                    partial: Box::new(traj),
                })
            }
        }
        let t_next = if k + 1 == n { t_end } else { t_start + (k + 1) as f64 * h };
        traj.push(t_next, y.clone());
    }
    Ok(traj)
}

/// Exact reduced states `Tr_E[U (η₀ ⊗ τ) U†]` on the same grid the
/// integrators use, starting at `t₀` of the dynamics.
pub fn reduced_trajectory(td: &TotalDynamics, eta0: &DensityMatrix, t_end: f64, dt: f64) -> Result<Trajectory> {
    if eta0.dim() != td.d_s() {
        return Err(Error::DimensionMismatch("initial state dimension".into()));
    }
    let t_start = td.t0();
    let (n, h) = time_grid(t_start, t_end, dt)?;
    let mut traj = Trajectory::new();
    for k in 0..=n {
        let t = if k == n { t_end } else { t_start + k as f64 * h };
        traj.push(t, reduced_a_form(td, t).act(eta0.matrix())?);
    }
    Ok(traj)
}

/// RK4 on `η̇ = −i[H_O, η] + K_t(η)` with `K_t` from [`generator_at`].
pub fn integrate_nonmarkovian(
    td: &TotalDynamics,
    split: &HamiltonianSplit,
    eta0: &DensityMatrix,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if eta0.dim() != td.d_s() {
        return Err(Error::DimensionMismatch("initial state dimension".into()));
    }
    // k2 and k3 share a stage time; keep the last generator around.
    let mut cache: Option<GeneratorSample> = None;
    integrate(
        |t, y| {
            if cache.as_ref().is_none_or(|g| g.t != t) {
                cache = Some(generator_at(td, split, t, DEFAULT_FD_STEP)?);
            }
            Ok(cache.as_ref().expect("just filled").rhs(y))
        },
        eta0,
        t_start,
        t_end,
        dt,
    )
}

/// Hamiltonian plus jump operators of a Kossakowski–Lindblad generator.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    pub h: ComplexMatrix,
    pub l_ops: Vec<ComplexMatrix>,
}

impl LindbladModel {
    pub fn new(h: ComplexMatrix, l_ops: Vec<ComplexMatrix>) -> Result<Self> {
        require_hermitian(&h, DEFAULT_TOL)?;
        let d = h.nrows();
        if l_ops.iter().any(|l| l.shape() != (d, d)) {
            return Err(Error::DimensionMismatch("Lindblad operators must match H".into()));
        }
        Ok(Self { h, l_ops })
    }

    /// Qubit depolarisation `η̇ = γ(𝟙/2 − η)` with `L_j = √(γ/4) σ_j`.
    pub fn depolarizing(gamma: f64) -> Self {
        let k = (gamma / 4.0).sqrt();
        Self {
            h: ComplexMatrix::zeros(2, 2),
            l_ops: (1..=3).map(|j| pauli(j).scale(k)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// `Tr(L_α† L_α)` per jump operator.
    pub fn rates(&self) -> Vec<f64> {
        self.l_ops
            .iter()
            .map(|l| (l.adjoint() * l).trace().re)
            .collect()
    }

    /// `−i[H, x] + Σ_α ½(2 L x L† − L†L x − x L†L)` on any matrix.
    pub fn rhs(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut dissipator = ComplexMatrix::zeros(x.nrows(), x.ncols());
        for l in &self.l_ops {
            let l_dag = l.adjoint();
            let ll = &l_dag * l;
            dissipator += (l * x * &l_dag).scale(2.0) - &ll * x - x * &ll;
        }
        neg_i_commutator(&self.h, x) + dissipator.scale(0.5)
    }

    /// A-form of the Liouvillian.
    pub fn superoperator(&self) -> AForm {
        AForm::from_linear_map(self.dim(), |x| self.rhs(x))
    }
}

pub fn lindblad_rhs(model: &LindbladModel, eta: &DensityMatrix) -> ComplexMatrix {
    model.rhs(eta.matrix())
}

pub fn integrate_lindblad(
    model: &LindbladModel,
    eta0: &DensityMatrix,
    t_start: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    if eta0.dim() != model.dim() {
        return Err(Error::DimensionMismatch("initial state dimension".into()));
    }
    integrate(|_, y| Ok(model.rhs(y)), eta0, t_start, t_end, dt)
}

/// The flow map `exp(duration · L)` of a Lindblad model, obtained by RK4 on
/// the superoperator matrix.
pub fn lindblad_flow_map(model: &LindbladModel, duration: f64, dt: f64) -> Result<AForm> {
    let d = model.dim();
    if duration == 0.0 {
        return Ok(AForm::identity(d));
    }
    let generator = model.superoperator().into_matrix();
    let (n, h) = time_grid(0.0, duration, dt)?;
    let mut m = identity(d * d);
    let mut f = |_: f64, y: &ComplexMatrix| Ok(&generator * y);
    for k in 0..n {
        m = rk4_step(&mut f, k as f64 * h, &m, h)?;
    }
    AForm::new(d, m)
}

/// Reads a Lindblad generator off a near-identity map `B_t`.
///
/// With the operator-sum form `Σ λ_α C_α ρ C_α†`, the dominant term is
/// written `√λ₀ C₀ = 𝟙 + √t L₀` and the rest `√λ_α C_α = √t L_α`. The
/// anti-Hermitian part of `L₀` carries the Hamiltonian,
/// `H = i(L₀ − L₀†) / (2√t)`, so that `lindblad_rhs` of the result matches
/// `(B_t − 𝕀)/t` up to `O(t)`.
pub fn lindblad_from_map(b: &BForm, t: f64) -> Result<LindbladModel> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("extraction time {t}")));
    }
    let spectrum = spectral_decompose(b)?;
    let d = b.dim();
    let lambda0 = spectrum.lambdas[0];
    if lambda0 < 0.75 * d as f64 {
        return Err(Error::FarFromIdentity(lambda0));
    }
    let mut c0 = spectrum.c_matrices[0].clone();
    let tr = trace(&c0);
    if tr.norm() > 0.0 {
        c0 *= tr.conj() / tr.norm();
    }
    let sqrt_t = t.sqrt();
    let l0 = (c0.scale(lambda0.sqrt()) - identity(d)).unscale(sqrt_t);
    let h = (&l0 - l0.adjoint()) * C64::new(0.0, 0.5 / sqrt_t);
    let h = (&h + h.adjoint()).scale(0.5);

    let mut l_ops = Vec::with_capacity(d * d - 1);
    for (&lambda, c) in spectrum.lambdas.iter().zip(&spectrum.c_matrices).skip(1) {
        if lambda < -DEFAULT_TOL {
            return Err(Error::NotCompletelyPositive(lambda));
        }
        l_ops.push(c.scale((lambda.max(0.0) / t).sqrt()));
    }
    Ok(LindbladModel { h, l_ops })
}

/// Repeated application of one interaction map, one state per collision.
/// Row `k` is stamped `k · interval`.
pub fn collision_simulate(b_single: &BForm, n: usize, eta0: &DensityMatrix, interval: f64) -> Result<Trajectory> {
    let a = b_to_a(b_single);
    let mut traj = Trajectory::new();
    let mut state = eta0.matrix().clone();
    traj.push(0.0, state.clone());
    for k in 1..=n {
        state = a.act(&state)?;
        traj.push(k as f64 * interval, state.clone());
    }
    Ok(traj)
}

/// `γ = (2/T) ln(1/cos T)`, so that `cos(T)^{2N} = exp(−γ N T)`.
pub fn rescaled_rate(interval: f64) -> Result<f64> {
    if !(interval > 0.0 && interval < std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "collision interval {interval} outside (0, π/2)"
        )));
    }
    Ok(-2.0 * interval.cos().ln() / interval)
}

/// Integrates the short-time truncation of the exchange-model generator,
/// `η̇ = (t − t₀)(𝟙 − 2η)`, i.e. `ȧ_j = −2(t − t₀) a_j`.
pub fn integrate_truncated(eta0: &DensityMatrix, t_start: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    if eta0.dim() != 2 {
        return Err(Error::DimensionMismatch("truncated generator acts on a qubit".into()));
    }
    integrate(
        |t, y| Ok((identity(2) * trace(y) - y.scale(2.0)).scale(t - t_start)),
        eta0,
        t_start,
        t_end,
        dt,
    )
}
