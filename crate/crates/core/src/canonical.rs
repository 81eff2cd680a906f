//! Canonical dynamical maps and canonical embeddings.
//!
//! A canonical map between arbitrary times `t₁ → t₂` goes back to the
//! initial time with the pseudo-inverse of the forward reduced map and then
//! forward again:
//!
//! ```text
//! Bᶜ(t₂|t₁) = B(t₂|t₀) ⋆ B̃(t₀|t₁)
//! ```
//!
//! These maps form a one-parameter group. They preserve trace and
//! Hermiticity but are in general not positive, and are only meaningful on
//! the compatibility domain at `t₁`.
//!
//! The canonical embedding lifts a reduced state at `t` to the correlated
//! total state consistent with the history,
//!
//! ```text
//! Eᶜ_t(η) = U(t|t₀) [ Bᶜ(t₀|t) η ⊗ τ ] U(t|t₀)†
//! ```

use crate::error::{Error, Result};
use crate::maps::{a_to_b, compose_a, pseudo_inverse_a, AForm, BForm};
use crate::open_system::{reduced_a_form, EmbeddingResult, TotalDynamics};
use crate::quantum::{identity, kron, max_abs_diff, ComplexMatrix, DensityMatrix};

/// Forward maps whose smallest singular value falls below this are treated
/// as singular and not inverted.
pub const SINGULAR_SV_CUTOFF: f64 = 1e-6;

/// Pseudo-inverse of the forward map `t₀ → t`, refusing near-singular times.
pub(crate) fn backward_to_t0(td: &TotalDynamics, t: f64) -> Result<AForm> {
    let forward = reduced_a_form(td, t);
    let pinv = pseudo_inverse_a(&forward, None);
    let sigma_min = pinv.smallest_singular_value();
    if sigma_min < SINGULAR_SV_CUTOFF {
        let roundtrip = compose_a(&pinv.map, &forward)?;
        let residual = max_abs_diff(roundtrip.matrix(), &identity(forward.matrix().nrows()));
        return Err(Error::SingularTime {
            time: t,
            smallest_singular_value: sigma_min,
            residual,
        });
    }
    Ok(pinv.map)
}

/// `Bᶜ(t_to|t_from)` together with its A-form.
#[derive(Debug, Clone)]
pub struct CanonicalMap<'a> {
    a: AForm,
    b: BForm,
    pub t_from: f64,
    pub t_to: f64,
    pub source: &'a TotalDynamics,
}

impl<'a> CanonicalMap<'a> {
    fn from_a(a: AForm, t_from: f64, t_to: f64, source: &'a TotalDynamics) -> Self {
        let b = a_to_b(&a);
        Self {
            a,
            b,
            t_from,
            t_to,
            source,
        }
    }

    pub fn a_form(&self) -> &AForm {
        &self.a
    }

    pub fn b_form(&self) -> &BForm {
        &self.b
    }

    pub fn act(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.a.act(x)
    }

    pub fn apply(&self, eta: &DensityMatrix) -> Result<ComplexMatrix> {
        self.a.act(eta.matrix())
    }
}

pub fn canonical_map(td: &TotalDynamics, t1: f64, t2: f64) -> Result<CanonicalMap<'_>> {
    let back = backward_to_t0(td, t1)?;
    let forward = reduced_a_form(td, t2);
    Ok(CanonicalMap::from_a(compose_a(&forward, &back)?, t1, t2, td))
}

/// Group composition `m2 ⋆ m1`; `m1` must end where `m2` starts.
pub fn compose_canonical<'a>(m2: &CanonicalMap<'a>, m1: &CanonicalMap<'a>) -> Result<CanonicalMap<'a>> {
    if m1.t_to != m2.t_from {
        return Err(Error::TimeChainMismatch {
            first_end: m1.t_to,
            second_start: m2.t_from,
        });
    }
    if !std::ptr::eq(m1.source, m2.source) && m1.source != m2.source {
        return Err(Error::SourceMismatch);
    }
    Ok(CanonicalMap::from_a(
        compose_a(&m2.a, &m1.a)?,
        m1.t_from,
        m2.t_to,
        m1.source,
    ))
}

/// The canonical embedding at a fixed time, ready to lift many states.
#[derive(Debug, Clone)]
pub struct CanonicalEmbedding<'a> {
    td: &'a TotalDynamics,
    t: f64,
    backward: AForm,
    propagator: ComplexMatrix,
}

impl<'a> CanonicalEmbedding<'a> {
    pub fn at(td: &'a TotalDynamics, t: f64) -> Result<Self> {
        Ok(Self {
            td,
            t,
            backward: backward_to_t0(td, t)?,
            propagator: td.propagator(t, td.t0()),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Linear action on an arbitrary system operator.
    pub fn lift(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let at_t0 = self.backward.act(x)?;
        let u = &self.propagator;
        Ok(u * kron(&at_t0, self.td.tau().matrix()) * u.adjoint())
    }

    pub fn embed(&self, eta: &DensityMatrix) -> Result<EmbeddingResult> {
        let m = self.lift(eta.matrix())?;
        Ok(EmbeddingResult::from_matrix(m, self.td.d_s(), self.td.d_e()))
    }
}

/// `Eᶜ_t(η)`. States outside the compatibility domain are still embedded;
/// the negative `min_eig` of the result reports the violation.
pub fn canonical_embedding(td: &TotalDynamics, t: f64, eta: &DensityMatrix) -> Result<EmbeddingResult> {
    CanonicalEmbedding::at(td, t)?.embed(eta)
}

/// `max |Eᶜ_t(η) − U(t|t′) Eᶜ_{t′}(Bᶜ(t′|t) η) U(t|t′)†|`.
pub fn embedding_relocation_check(td: &TotalDynamics, t: f64, t_prime: f64, eta: &DensityMatrix) -> Result<f64> {
    let direct = CanonicalEmbedding::at(td, t)?.lift(eta.matrix())?;
    let moved = canonical_map(td, t, t_prime)?.act(eta.matrix())?;
    let at_t_prime = CanonicalEmbedding::at(td, t_prime)?.lift(&moved)?;
    let relocated = td.conjugate(&at_t_prime, t, t_prime);
    Ok(max_abs_diff(&direct, &relocated))
}
