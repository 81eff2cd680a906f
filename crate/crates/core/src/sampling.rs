//! Seeded random states and maps for sampled checks.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::quantum::{BlochVector, ComplexMatrix, DensityMatrix, C64};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-distributed pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let psi = DVector::from_fn(d, |_, _| gaussian_c64(rng));
    DensityMatrix::pure(&psi).expect("Gaussian vector has nonzero norm")
}

/// Hilbert-Schmidt distributed mixed state `G G† / Tr(G G†)`.
pub fn random_mixed_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian_c64(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(m.unscale(tr))
}

/// Alternates pure and mixed samples, starting with pure.
pub fn random_state<R: Rng + ?Sized>(d: usize, index: usize, rng: &mut R) -> DensityMatrix {
    if index.is_multiple_of(2) {
        random_pure_state(d, rng)
    } else {
        random_mixed_state(d, rng)
    }
}

/// Uniform in the ball of the given radius.
pub fn random_bloch_in_ball<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> BlochVector {
    let dir = random_unit_vector(rng);
    let r = radius * rng.random::<f64>().cbrt();
    dir.scale(r)
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> BlochVector {
    loop {
        let v = BlochVector::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v.scale(1.0 / n);
        }
    }
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian_c64(rng));
    (&g + g.adjoint()).scale(0.5)
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian_c64(rng))
}
