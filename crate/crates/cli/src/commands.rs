//! The three subcommands. Each returns the human-readable report; data files
//! are written as a side effect.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use canonmap::canonical::{canonical_map, compose_canonical};
use canonmap::maps::{
    a_to_b, check_a_properties, in_compatibility_domain, pseudo_inverse_a, spectral_decompose,
    AForm,
};
use canonmap::master::{
    collision_simulate, integrate_lindblad, integrate_nonmarkovian, integrate_truncated,
    reduced_trajectory, rescaled_rate, HamiltonianSplit, LindbladModel, Trajectory,
};
use canonmap::open_system::{reduced_a_form, reduced_dynamical_map, TotalDynamics};
use canonmap::quantum::{bloch_to_density, max_abs_diff, BlochVector, DEFAULT_TOL};
use canonmap::sampling::{random_unit_vector, rng_from_seed};
use canonmap::Error;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{MapFile, Method, ScenarioConfig, ScenarioName};
use crate::sweep::Sweep;
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn qubit_only(td: &TotalDynamics) -> Result<(), CliError> {
    if td.d_s() != 2 {
        return Err(CliError::Config(format!(
            "trajectories are written in Bloch coordinates and need a qubit system, got dS = {}",
            td.d_s()
        )));
    }
    Ok(())
}

/// Trajectory of one fully resolved scenario.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Trajectory, Error> {
    let eta0 = cfg
        .initial_state()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let t0 = cfg.t0.unwrap_or(0.0);
    let t1 = || cfg.require_t1().map_err(|e| Error::InvalidArgument(e.to_string()));
    match cfg.scenario {
        ScenarioName::SwapQubit | ScenarioName::Custom => {
            let td = cfg
                .total_dynamics()
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
            qubit_only(&td).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            match cfg.method.unwrap_or_default() {
                Method::Map => reduced_trajectory(&td, &eta0, t1()?, cfg.dt()),
                Method::Master => {
                    let h_local = cfg
                        .local_hamiltonian(td.d_s())
                        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                    let split = HamiltonianSplit::from_local(&td, h_local)?;
                    integrate_nonmarkovian(&td, &split, &eta0, t0, t1()?, cfg.dt())
                }
            }
        }
        ScenarioName::Collision => {
            let interval = cfg
                .interval
                .ok_or_else(|| Error::InvalidArgument("collision scenario needs T".into()))?;
            let n = cfg
                .collisions
                .ok_or_else(|| Error::InvalidArgument("collision scenario needs N".into()))?;
            if !(interval > 0.0 && interval.is_finite()) {
                return Err(Error::InvalidArgument(format!("collision interval T = {interval}")));
            }
            let map = reduced_dynamical_map(&TotalDynamics::qubit_exchange(0.0), interval);
            collision_simulate(&map, n, &eta0, interval)
        }
        ScenarioName::Lindblad => {
            let gamma = cfg
                .gamma
                .ok_or_else(|| Error::InvalidArgument("lindblad scenario needs gamma".into()))?;
            integrate_lindblad(&LindbladModel::depolarizing(gamma), &eta0, t0, t1()?, cfg.dt())
        }
        ScenarioName::Truncated => integrate_truncated(&eta0, t0, t1()?, cfg.dt()),
    }
}

fn summarize(report: &mut String, cfg: &ScenarioConfig, traj: &Trajectory) {
    let _ = writeln!(report, "scenario: {}", cfg.scenario.as_str());
    let _ = writeln!(report, "rows: {}", traj.len());
    if let (Some(first), Some(last)) = (traj.times.first(), traj.times.last()) {
        let _ = writeln!(report, "time range: {first} to {last}");
    }
    if cfg.scenario == ScenarioName::Collision {
        if let Some(Ok(gamma)) = cfg.interval.map(rescaled_rate) {
            let _ = writeln!(report, "rescaled decay rate: {gamma:.12}");
        }
    }
    if let Some(norm) = traj.final_bloch_norm() {
        let _ = writeln!(report, "final Bloch norm: {norm:.12}");
    }
    let _ = writeln!(report, "max |trace - 1|: {:.3e}", traj.max_trace_defect());
    let _ = writeln!(report, "min eigenvalue: {:.12}", traj.min_eigenvalue_seen());
}

fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let mut out = create(path)?;
    traj.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// `run`: integrate one scenario, or every point of a sweep, into a CSV file.
pub fn run(cfg: &ScenarioConfig, sweep: Option<&Sweep>) -> Result<String, CliError> {
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Config("no output path (set \"out\" or pass --out)".into()))?;
    let mut report = String::new();

    let Some(sweep) = sweep else {
        let traj = match simulate(cfg) {
            Ok(traj) => traj,
            Err(Error::IntegrationAborted { time, cause, partial }) => {
                write_trajectory(&out, &partial)?;
                let err = CliError::from(Error::IntegrationAborted { time, cause, partial });
                return Err(match err {
                    CliError::Numerical(msg) => CliError::Numerical(format!(
                        "{msg} (partial trajectory written to {})",
                        out.display()
                    )),
                    other => other,
                });
            }
            Err(e) => return Err(e.into()),
        };
        write_trajectory(&out, &traj)?;
        summarize(&mut report, cfg, &traj);
        let _ = writeln!(report, "trajectory: {}", out.display());
        return Ok(report);
    };

    let configs = sweep.expand(cfg)?;
    let results: Vec<_> = configs.par_iter().map(simulate).collect();
    let mut trajectories = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        trajectories.push(result.map_err(|e| match CliError::from(e) {
            CliError::Config(msg) => CliError::Config(format!("sweep point {i}: {msg}")),
            CliError::Numerical(msg) => CliError::Numerical(format!("sweep point {i}: {msg}")),
        })?);
    }

    let mut file = create(&out)?;
    writeln!(file, "sweep,{}", Trajectory::CSV_HEADER)?;
    for (i, (cfg, traj)) in configs.iter().zip(&trajectories).enumerate() {
        for row in traj.csv_rows()? {
            writeln!(file, "{i},{row}")?;
        }
        let _ = writeln!(report, "[sweep point {i}]");
        summarize(&mut report, cfg, traj);
    }
    file.flush()?;
    let _ = writeln!(report, "trajectories: {}", out.display());
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub dim: usize,
    pub trace_preserving: bool,
    pub trace_defect: f64,
    pub hermiticity_preserving: bool,
    pub hermiticity_defect: f64,
    pub samples: usize,
    pub seed: u64,
    pub positive_on_samples: bool,
    pub worst_min_eigenvalue: Option<f64>,
    /// Eigenvalues of the B-form, descending; absent when the B-form is not
    /// Hermitian.
    pub choi_spectrum: Option<Vec<f64>>,
    pub completely_positive: bool,
    pub pseudo_inverse_rank: usize,
    pub singular_values: Vec<f64>,
}

pub fn analyze(a: &AForm, samples: usize, seed: u64) -> MapReport {
    let props = check_a_properties(a, samples, seed);
    let spectrum = spectral_decompose(&a_to_b(a)).ok().map(|s| s.lambdas);
    let completely_positive = spectrum
        .as_ref()
        .is_some_and(|l| l.iter().all(|&x| x >= -DEFAULT_TOL));
    let pinv = pseudo_inverse_a(a, None);
    MapReport {
        dim: a.dim(),
        trace_preserving: props.trace_preserving,
        trace_defect: props.trace_defect,
        hermiticity_preserving: props.hermiticity_preserving,
        hermiticity_defect: props.hermiticity_defect,
        samples,
        seed,
        positive_on_samples: props.positive_on_samples,
        worst_min_eigenvalue: (samples > 0).then_some(props.worst_min_eigenvalue),
        choi_spectrum: spectrum,
        completely_positive,
        pseudo_inverse_rank: pinv.rank,
        singular_values: pinv.singular_values,
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn format_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|x| format!("{x:.12}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `analyze-map`: property, spectrum and pseudo-inverse report of a map file.
pub fn analyze_map(path: &Path, samples: usize, seed: u64, out: Option<&Path>) -> Result<String, CliError> {
    let a = MapFile::load(path)?.to_a()?;
    let r = analyze(&a, samples, seed);
    let mut text = String::new();
    let _ = writeln!(text, "map: {} (acts on {}x{} matrices)", path.display(), r.dim, r.dim);
    let _ = writeln!(text, "trace preserving: {} (defect {:.3e})", yes_no(r.trace_preserving), r.trace_defect);
    let _ = writeln!(
        text,
        "Hermiticity preserving: {} (defect {:.3e})",
        yes_no(r.hermiticity_preserving),
        r.hermiticity_defect
    );
    match r.worst_min_eigenvalue {
        Some(worst) => {
            let _ = writeln!(
                text,
                "positive on {} sampled states (seed {}): {} (worst min eigenvalue {worst:.12})",
                r.samples,
                r.seed,
                yes_no(r.positive_on_samples)
            );
        }
        None => {
            let _ = writeln!(text, "positivity: not sampled");
        }
    }
    match &r.choi_spectrum {
        Some(l) => {
            let _ = writeln!(text, "B-form spectrum: {}", format_list(l));
        }
        None => {
            let _ = writeln!(text, "B-form spectrum: undefined (B-form is not Hermitian)");
        }
    }
    let _ = writeln!(text, "completely positive: {}", yes_no(r.completely_positive));
    let _ = writeln!(
        text,
        "pseudo-inverse rank: {} of {} (smallest singular value {:.3e})",
        r.pseudo_inverse_rank,
        r.dim * r.dim,
        r.singular_values.last().copied().unwrap_or(0.0)
    );
    if let Some(out) = out {
        write_json(out, &r)?;
        let _ = writeln!(text, "report: {}", out.display());
    }
    Ok(text)
}

#[derive(Debug, Clone, Serialize)]
pub struct CanonicalReport {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub spectrum: Vec<f64>,
    pub completely_positive: bool,
    pub intermediate_time: f64,
    pub group_residual: f64,
    /// Largest Bloch radius whose whole sphere lies in the compatibility
    /// domain at `t1`; qubit systems only.
    pub domain_radius: Option<f64>,
    pub domain_directions: usize,
    pub seed: u64,
}

const DOMAIN_DIRECTIONS: usize = 64;

/// Bisection for the largest in-domain radius along each direction; the
/// axes are always included.
fn domain_radius(forward: &AForm, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut directions: Vec<BlochVector> = Vec::with_capacity(DOMAIN_DIRECTIONS);
    for j in 0..3 {
        for sign in [1.0, -1.0] {
            let mut a = [0.0; 3];
            a[j] = sign;
            directions.push(BlochVector::from_array(a));
        }
    }
    while directions.len() < DOMAIN_DIRECTIONS {
        directions.push(random_unit_vector(&mut rng));
    }
    let inside = |a: BlochVector| {
        bloch_to_density(a).is_ok_and(|rho| in_compatibility_domain(forward, &rho, DEFAULT_TOL))
    };
    directions
        .iter()
        .map(|dir| {
            if inside(*dir) {
                return 1.0;
            }
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if inside(dir.scale(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        })
        .fold(1.0, f64::min)
}

/// `canonical`: report on the canonical map `t1 → t2`.
pub fn canonical(td: &TotalDynamics, t1: f64, t2: f64, seed: u64, out: Option<&Path>) -> Result<String, CliError> {
    let map = canonical_map(td, t1, t2)?;
    let spectrum = spectral_decompose(map.b_form())?.lambdas;
    let completely_positive = spectrum.iter().all(|&x| x >= -DEFAULT_TOL);

    let mut rng = rng_from_seed(seed);
    let (lo, hi) = (t1.min(t2) - 1.0, t1.max(t2) + 1.0);
    let mut found = None;
    for _ in 0..100 {
        let t = rng.random_range(lo..hi);
        if let (Ok(first), Ok(second)) = (canonical_map(td, t1, t), canonical_map(td, t, t2)) {
            let composed = compose_canonical(&second, &first)?;
            found = Some((t, max_abs_diff(composed.a_form().matrix(), map.a_form().matrix())));
            break;
        }
    }
    let (intermediate_time, group_residual) = found.ok_or_else(|| {
        CliError::Numerical("no invertible intermediate time found for the group check".into())
    })?;

    let domain_radius = (td.d_s() == 2).then(|| domain_radius(&reduced_a_form(td, t1), seed));
    let report = CanonicalReport {
        t0: td.t0(),
        t1,
        t2,
        spectrum,
        completely_positive,
        intermediate_time,
        group_residual,
        domain_radius,
        domain_directions: if domain_radius.is_some() { DOMAIN_DIRECTIONS } else { 0 },
        seed,
    };

    let mut text = String::new();
    let _ = writeln!(text, "canonical map from t1 = {t1} to t2 = {t2} (t0 = {})", report.t0);
    let _ = writeln!(text, "B-form spectrum: {}", format_list(&report.spectrum));
    let _ = writeln!(text, "completely positive: {}", yes_no(report.completely_positive));
    let _ = writeln!(
        text,
        "group residual via t = {:.12}: {:.3e}",
        report.intermediate_time, report.group_residual
    );
    match report.domain_radius {
        Some(r) => {
            let _ = writeln!(
                text,
                "compatibility domain radius at t1: {r:.9} ({DOMAIN_DIRECTIONS} directions)"
            );
        }
        None => {
            let _ = writeln!(text, "compatibility domain radius: only estimated for qubits");
        }
    }
    if let Some(out) = out {
        write_json(out, &report)?;
        let _ = writeln!(text, "report: {}", out.display());
    }
    Ok(text)
}
