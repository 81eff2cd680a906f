//! End-to-end checks of the library against closed-form results for the
//! qubit exchange model and its Markovian and short-time approximations.
//! Prints one line per check and exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};
use std::process::ExitCode;

use canonmap::canonical::{
    canonical_embedding, canonical_map, compose_canonical, embedding_relocation_check,
};
use canonmap::classical::{
    apply_stochastic, pseudo_inverse, pseudo_inverse_stochastic, ProbabilityVector,
    StochasticMatrix,
};
use canonmap::maps::{
    a_to_b, affine_to_a, apply_b, b_to_a, compose_a, in_compatibility_domain,
    is_completely_positive, pseudo_inverse_a, spectral_decompose, AForm, AffineQubitMap,
};
use canonmap::master::{
    collision_simulate, generator_at, integrate_lindblad, integrate_nonmarkovian,
    integrate_truncated, lindblad_from_map, rescaled_rate, HamiltonianSplit, LindbladModel,
    DEFAULT_FD_STEP,
};
use canonmap::open_system::{reduced_a_form, reduced_dynamical_map, TotalDynamics};
use canonmap::quantum::{
    bloch_to_density, identity, kron, max_abs, max_abs_diff, pauli,
    BlochVector, ComplexMatrix, DensityMatrix,
};
use canonmap::sampling::{
    random_bloch_in_ball, random_complex_matrix, random_hermitian, random_state, rng_from_seed,
};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn eta(a: BlochVector) -> DensityMatrix {
    bloch_to_density(a).expect("Bloch vector inside the ball")
}

fn spectrum_error(actual: &[f64], expected: &[f64]) -> f64 {
    actual
        .iter()
        .zip(expected)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn squeeze_law() -> Outcome {
    let t0 = 0.3;
    let td = TotalDynamics::qubit_exchange(t0);
    let mut rng = rng_from_seed(1);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = 2.0 * PI * k as f64 / 99.0;
        let a0 = random_bloch_in_ball(1.0, &mut rng);
        let out = apply_b(&reduced_dynamical_map(&td, t), &eta(a0)).map_err(|e| e.to_string())?;
        let a = BlochVector::of_operator(&out).map_err(|e| e.to_string())?;
        let expected = a0.scale((t - t0).cos().powi(2));
        for (x, y) in a.to_array().iter().zip(expected.to_array()) {
            worst = worst.max((x - y).abs());
        }
    }
    check(worst < 1e-9, format!("max error {worst:.2e} over 100 times"))
}

fn forward_spectrum() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let t = 0.05 + 0.3 * k as f64;
        let c2 = t.cos().powi(2);
        let spectrum = spectral_decompose(&reduced_dynamical_map(&td, t)).map_err(|e| e.to_string())?;
        let small = 0.5 * (1.0 - c2);
        worst = worst.max(spectrum_error(&spectrum.lambdas, &[0.5 * (1.0 + 3.0 * c2), small, small, small]));
    }
    check(worst < 1e-9, format!("max eigenvalue error {worst:.2e} at 10 times"))
}

fn inverse_not_cp() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let mut worst: f64 = 0.0;
    for &c2 in &[0.25f64, 0.5, 0.9] {
        let t = c2.sqrt().acos();
        let inv = pseudo_inverse_a(&reduced_a_form(&td, t), None).map;
        let spectrum = spectral_decompose(&a_to_b(&inv)).map_err(|e| e.to_string())?;
        let small = 0.5 * (1.0 - 1.0 / c2);
        worst = worst.max(spectrum_error(&spectrum.lambdas, &[0.5 * (1.0 + 3.0 / c2), small, small, small]));
    }
    let mut cp_count = 0;
    let n = 400;
    for k in 1..n {
        let x = FRAC_PI_2 * k as f64 / n as f64;
        for t in [x, -x] {
            let inv = pseudo_inverse_a(&reduced_a_form(&td, t), None).map;
            if is_completely_positive(&a_to_b(&inv), 1e-9).map_err(|e| e.to_string())? {
                cp_count += 1;
            }
        }
    }
    check(
        worst < 1e-8 && cp_count == 0,
        format!("max eigenvalue error {worst:.2e}; {cp_count} of {} inverses judged CP", 2 * (n - 1)),
    )
}

fn regular_time<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let t: f64 = rng.random_range(-4.0..4.0);
        if t.cos().abs() > 0.2 {
            return t;
        }
    }
}

fn canonical_group_law() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let mut rng = rng_from_seed(4);
    let mut group: f64 = 0.0;
    let mut inverse: f64 = 0.0;
    for _ in 0..20 {
        let (t1, t, t2) = (regular_time(&mut rng), regular_time(&mut rng), regular_time(&mut rng));
        let err = |e: canonmap::Error| e.to_string();
        let first = canonical_map(&td, t1, t).map_err(err)?;
        let second = canonical_map(&td, t, t2).map_err(err)?;
        let direct = canonical_map(&td, t1, t2).map_err(err)?;
        let composed = compose_canonical(&second, &first).map_err(err)?;
        group = group.max(max_abs_diff(composed.a_form().matrix(), direct.a_form().matrix()));
        let back = canonical_map(&td, t2, t1).map_err(err)?;
        let round = compose_canonical(&back, &direct).map_err(err)?;
        inverse = inverse.max(max_abs_diff(round.a_form().matrix(), &identity(4)));
    }
    check(
        group < 1e-9 && inverse < 1e-9,
        format!("composition residual {group:.2e}, inverse residual {inverse:.2e} over 20 triples"),
    )
}

fn canonical_spectrum() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let map = canonical_map(&td, FRAC_PI_3, FRAC_PI_4).map_err(|e| e.to_string())?;
    let spectrum = spectral_decompose(map.b_form()).map_err(|e| e.to_string())?;
    let err = spectrum_error(&spectrum.lambdas, &[3.5, -0.5, -0.5, -0.5]);
    check(err < 1e-8, format!("spectrum {:?}, error {err:.2e}", spectrum.lambdas.iter().map(|x| (x * 1e6).round() / 1e6).collect::<Vec<_>>()))
}

/// `¼[𝟙⊗𝟙 + Σ_j a_j (σ_j⊗𝟙 + tan²t 𝟙⊗σ_j + tan t (σ_k⊗σ_l − σ_l⊗σ_k))]`
/// with `(j, k, l)` cyclic.
fn closed_form_embedding(t: f64, a: BlochVector) -> ComplexMatrix {
    let tan = t.tan();
    let id = identity(2);
    let mut m = kron(&id, &id);
    for (j, aj) in a.to_array().into_iter().enumerate() {
        let (j, k, l) = (j + 1, (j + 1) % 3 + 1, (j + 2) % 3 + 1);
        let term = kron(&pauli(j), &id)
            + kron(&id, &pauli(j)).scale(tan * tan)
            + (kron(&pauli(k), &pauli(l)) - kron(&pauli(l), &pauli(k))).scale(tan);
        m += term.scale(aj);
    }
    m.scale(0.25)
}

fn embedding_closure() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let mut rng = rng_from_seed(6);
    let (mut closure, mut relocation, mut closed_form): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in 0..10 {
        let t = -1.3 + 0.29 * k as f64;
        let radius = t.cos().powi(2);
        for _ in 0..50 {
            let a = random_bloch_in_ball(radius, &mut rng);
            let state = eta(a);
            let embedded = canonical_embedding(&td, t, &state).map_err(|e| e.to_string())?;
            closure = closure.max(max_abs_diff(
                &canonmap::quantum::partial_trace_env(&embedded.state),
                state.matrix(),
            ));
            closed_form = closed_form.max(max_abs_diff(embedded.state.matrix(), &closed_form_embedding(t, a)));
        }
        let a = random_bloch_in_ball(radius, &mut rng);
        let t_prime = regular_time(&mut rng);
        relocation = relocation.max(embedding_relocation_check(&td, t, t_prime, &eta(a)).map_err(|e| e.to_string())?);
    }
    check(
        closure < 1e-9 && relocation < 1e-8 && closed_form < 1e-8,
        format!("closure {closure:.2e}, relocation {relocation:.2e}, closed form {closed_form:.2e}"),
    )
}

fn master_round_trip() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let split = HamiltonianSplit::interaction_only(&td);
    let a0 = BlochVector::new(0.6, -0.3, 0.5);
    let traj = integrate_nonmarkovian(&td, &split, &eta(a0), 0.0, 1.2, 1e-3).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (t, a) in traj.times.iter().zip(&traj.bloch) {
        let expected = a0.scale(t.cos().powi(2));
        for (x, y) in a.to_array().iter().zip(expected.to_array()) {
            worst = worst.max((x - y).abs());
        }
    }
    let g = generator_at(&td, &split, 0.0, DEFAULT_FD_STEP).map_err(|e| e.to_string())?;
    let zeno = max_abs(&g.rhs(eta(a0).matrix()));
    check(
        worst < 1e-6 && zeno < 1e-6,
        format!("max Bloch error {worst:.2e} on [0, 1.2]; derivative at t0 {zeno:.2e}"),
    )
}

fn collision_rescaling() -> Outcome {
    let td = TotalDynamics::qubit_exchange(0.0);
    let (mut shrink, mut identity_err): (f64, f64) = (0.0, 0.0);
    for &(interval, n) in &[(0.1, 50usize), (0.3, 7), (1.0, 5)] {
        let traj = collision_simulate(&reduced_dynamical_map(&td, interval), n, &eta(BlochVector::new(1.0, 0.0, 0.0)), interval)
            .map_err(|e| e.to_string())?;
        for (k, a) in traj.bloch.iter().enumerate() {
            shrink = shrink.max((a.a1 - interval.cos().powi(2 * k as i32)).abs());
        }
        let gamma = rescaled_rate(interval).map_err(|e| e.to_string())?;
        identity_err = identity_err.max((interval.cos().powi(2 * n as i32) - (-gamma * n as f64 * interval).exp()).abs());
    }
    let gamma = 1.0;
    let decay = |model: &LindbladModel| -> Result<f64, String> {
        let traj = integrate_lindblad(model, &eta(BlochVector::new(1.0, 0.0, 0.0)), 0.0, 2.0, 1e-3).map_err(|e| e.to_string())?;
        Ok(traj
            .times
            .iter()
            .zip(&traj.bloch)
            .map(|(t, a)| (a.a1 - (-gamma * t).exp()).abs())
            .fold(0.0, f64::max))
    };
    let lindblad = decay(&LindbladModel::depolarizing(gamma))?;
    let sixth_k = (gamma / 6.0f64).sqrt();
    let mut sixth_ops = vec![identity(2).scale(sixth_k)];
    sixth_ops.extend((1..=3).map(|j| pauli(j).scale(sixth_k)));
    let sixth = decay(&LindbladModel::new(ComplexMatrix::zeros(2, 2), sixth_ops).map_err(|e| e.to_string())?)?;
    check(
        shrink < 1e-12 && identity_err < 1e-12 && lindblad < 1e-8 && sixth > 1e-3,
        format!(
            "collision shrink {shrink:.2e}, rescaling identity {identity_err:.2e}, √(γ/4) flow {lindblad:.2e} (√(γ/6) coefficients miss by {sixth:.2e})"
        ),
    )
}

fn gaussian_decay() -> Outcome {
    let traj = integrate_truncated(&eta(BlochVector::new(1.0, 0.0, 0.0)), 0.0, 1.0, 1e-3).map_err(|e| e.to_string())?;
    let a1 = traj.bloch.last().map_or(f64::NAN, |a| a.a1);
    let err = (a1 - (-1.0f64).exp()).abs();
    let mut crossing_ok = true;
    for k in 1..400 {
        let t = 0.01 * k as f64;
        if (t - 1.0).abs() < 1e-9 {
            continue;
        }
        let (gauss, expo) = ((-t * t).exp(), (-t).exp());
        crossing_ok &= if t < 1.0 { gauss > expo } else { gauss < expo };
    }
    check(err < 1e-7 && crossing_ok, format!("a1(1) = {a1:.10}, error {err:.2e}; crossing at t = 1 {}", if crossing_ok { "confirmed" } else { "violated" }))
}

fn lindblad_extraction() -> Outcome {
    let gamma = 0.8;
    let mut errors = Vec::new();
    for &t in &[1e-2f64, 1e-3, 1e-4] {
        let b = a_to_b(&affine_to_a(&AffineQubitMap::uniform_shrink((-gamma * t).exp())));
        let model = lindblad_from_map(&b, t).map_err(|e| e.to_string())?;
        let err = model.rates().iter().map(|r| (r - gamma / 2.0).abs()).fold(0.0, f64::max);
        errors.push((t, err));
    }
    let linear = errors.iter().all(|&(t, e)| e <= gamma * gamma * t);
    let shrinking = errors.windows(2).all(|w| w[1].1 < w[0].1);
    check(
        linear && shrinking,
        format!(
            "rate errors {}",
            errors.iter().map(|(t, e)| format!("{e:.2e} at t = {t:e}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn random_a(d: usize, rng: &mut rand_chacha::ChaCha8Rng) -> AForm {
    AForm::new(d, random_complex_matrix(d * d, d * d, rng).unscale((d * d) as f64)).expect("square")
}

fn property_suites() -> Outcome {
    let cases = 1000;
    let mut rng = rng_from_seed(11);
    let mut failures = [0usize; 5];
    let td = TotalDynamics::qubit_exchange(0.0);
    for i in 0..cases {
        let d = 2 + i % 2;
        let a = random_a(d, &mut rng);
        if b_to_a(&a_to_b(&a)) != a {
            failures[0] += 1;
        }

        let channel = TotalDynamics::new(random_hermitian(4, &mut rng), random_state(2, 1, &mut rng), 0.0, 2)
            .map(|td| reduced_a_form(&td, rng.random_range(-3.0..3.0)))
            .map_err(|e| e.to_string())?;
        let b = a_to_b(&channel);
        if !b.is_hermitian(1e-12) {
            failures[1] += 1;
        }
        match spectral_decompose(&b) {
            Ok(spectrum) if max_abs_diff(&spectrum.trace_form(), &identity(2)) < 1e-9 => {}
            _ => failures[2] += 1,
        }

        let (y, z) = (random_a(d, &mut rng), random_a(d, &mut rng));
        let left = compose_a(&compose_a(&a, &y).map_err(|e| e.to_string())?, &z).map_err(|e| e.to_string())?;
        let right = compose_a(&a, &compose_a(&y, &z).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        if max_abs_diff(left.matrix(), right.matrix()) >= 1e-12 {
            failures[3] += 1;
        }

        let t = regular_time(&mut rng);
        let bloch = random_bloch_in_ball(1.0, &mut rng);
        if (bloch.norm() - t.cos().powi(2)).abs() < 1e-6 {
            continue;
        }
        let state = eta(bloch);
        let positive = canonical_embedding(&td, t, &state).map_err(|e| e.to_string())?.min_eig >= -1e-9;
        if positive != in_compatibility_domain(&reduced_a_form(&td, t), &state, 1e-9) {
            failures[4] += 1;
        }
    }
    check(
        failures.iter().all(|&f| f == 0),
        format!(
            "{cases} cases each; failures: involution {}, B-form Hermiticity {}, trace form {}, associativity {}, domain vs embedding {}",
            failures[0], failures[1], failures[2], failures[3], failures[4]
        ),
    )
}

fn classical_module() -> Outcome {
    let mut rng = rng_from_seed(12);
    let mut exact = true;
    for n in 1..8 {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let m = StochasticMatrix::permutation(&perm).map_err(|e| e.to_string())?;
        let inv = pseudo_inverse(m.matrix());
        exact &= inv == m.matrix().transpose() && StochasticMatrix::new(inv).is_ok();
    }
    let simplex = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let v = DVector::from_fn(n, |_, _| -rng.random::<f64>().max(1e-300).ln());
        let s = v.sum();
        v / s
    };
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = 2 + i % 5;
        let cols: Vec<_> = (0..n).map(|_| simplex(n, &mut rng)).collect();
        let m = StochasticMatrix::new(DMatrix::from_columns(&cols)).map_err(|e| e.to_string())?;
        let p0 = ProbabilityVector::new(simplex(n, &mut rng)).map_err(|e| e.to_string())?;
        let p = apply_stochastic(&m, &p0).map_err(|e| e.to_string())?;
        let pre = pseudo_inverse_stochastic(&m, &p).map_err(|e| e.to_string())?;
        let back = apply_stochastic(&m, &ProbabilityVector::new(pre.preimage.clone()).unwrap_or_else(|_| p0.clone()))
            .map_err(|e| e.to_string())?;
        worst = worst.max((m.matrix() * &pre.preimage - p.as_vector()).amax());
        worst = worst.max((back.as_vector() - p.as_vector()).amax());
    }
    check(
        exact && worst < 1e-10,
        format!("permutation inverse exact: {exact}; max round-trip residual {worst:.2e} over 200 systems"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("squeeze law", squeeze_law),
        ("forward spectrum", forward_spectrum),
        ("inverse not CP", inverse_not_cp),
        ("canonical group law", canonical_group_law),
        ("canonical spectrum", canonical_spectrum),
        ("embedding closure", embedding_closure),
        ("master equation round trip", master_round_trip),
        ("collision and rescaling", collision_rescaling),
        ("Gaussian decay", gaussian_decay),
        ("Lindblad extraction", lindblad_extraction),
        ("property suites", property_suites),
        ("classical module", classical_module),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
