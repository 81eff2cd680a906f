//! Scenario and map files.

use std::fs;
use std::path::{Path, PathBuf};

use canonmap::maps::{AForm, BForm};
use canonmap::quantum::{
    exchange_hamiltonian, BlochVector, ComplexMatrix, DensityMatrix, C64,
};
use canonmap::open_system::TotalDynamics;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Row-major `[re, im]` pairs of a square matrix.
pub type Entries = Vec<[f64; 2]>;

pub fn entries_to_matrix(entries: &[[f64; 2]], what: &str) -> Result<ComplexMatrix, CliError> {
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != entries.len() {
        return Err(CliError::Config(format!(
            "{what}: {} entries do not form a square matrix",
            entries.len()
        )));
    }
    let values: Vec<C64> = entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    Ok(ComplexMatrix::from_row_slice(n, n, &values))
}

pub fn matrix_to_entries(m: &ComplexMatrix) -> Entries {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push([m[(r, c)].re, m[(r, c)].im]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioName {
    SwapQubit,
    Collision,
    Lindblad,
    Truncated,
    Custom,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::SwapQubit => "swap-qubit",
            Self::Collision => "collision",
            Self::Lindblad => "lindblad",
            Self::Truncated => "truncated",
            Self::Custom => "custom",
        }
    }
}

/// How exchange-type scenarios produce their trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact reduced dynamics, valid across singular times.
    #[default]
    Map,
    /// RK4 on the time-local master equation; stops at singular times.
    Master,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Entries>,
    #[serde(default, rename = "dS", skip_serializing_if = "Option::is_none")]
    pub d_s: Option<usize>,
    #[serde(default, rename = "dE", skip_serializing_if = "Option::is_none")]
    pub d_e: Option<usize>,
    /// System-local part of the Hamiltonian for the master method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_local: Option<Entries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub interval: Option<f64>,
    #[serde(default, rename = "N", skip_serializing_if = "Option::is_none")]
    pub collisions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn named(scenario: ScenarioName) -> Self {
        Self {
            scenario,
            hamiltonian: None,
            tau: None,
            d_s: None,
            d_e: None,
            h_local: None,
            bloch: None,
            t0: None,
            t1: None,
            dt: None,
            interval: None,
            collisions: None,
            gamma: None,
            method: None,
            out: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn initial_bloch(&self) -> BlochVector {
        BlochVector::from_array(self.bloch.unwrap_or([1.0, 0.0, 0.0]))
    }

    pub fn initial_state(&self) -> Result<DensityMatrix, CliError> {
        canonmap::quantum::bloch_to_density(self.initial_bloch())
            .map_err(|e| CliError::Config(format!("initial Bloch vector: {e}")))
    }

    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(canonmap::master::DEFAULT_DT)
    }

    pub fn require_t1(&self) -> Result<f64, CliError> {
        self.t1.ok_or_else(|| {
            CliError::Config(format!("scenario {} needs t1", self.scenario.as_str()))
        })
    }

    /// Closed dynamics for `swap-qubit` and `custom`.
    pub fn total_dynamics(&self) -> Result<TotalDynamics, CliError> {
        let t0 = self.t0.unwrap_or(0.0);
        match self.scenario {
            ScenarioName::Custom => {
                let h = entries_to_matrix(
                    self.hamiltonian.as_deref().ok_or_else(|| missing("hamiltonian"))?,
                    "hamiltonian",
                )?;
                let tau = entries_to_matrix(self.tau.as_deref().ok_or_else(|| missing("tau"))?, "tau")?;
                let d_s = self.d_s.ok_or_else(|| missing("dS"))?;
                if let Some(d_e) = self.d_e {
                    if d_e != tau.nrows() {
                        return Err(CliError::Config(format!(
                            "dE = {d_e} but tau is {0}x{0}",
                            tau.nrows()
                        )));
                    }
                }
                let tau = DensityMatrix::new(tau).map_err(|e| CliError::Config(format!("tau: {e}")))?;
                TotalDynamics::new(h, tau, t0, d_s).map_err(|e| CliError::Config(e.to_string()))
            }
            _ => TotalDynamics::new(exchange_hamiltonian(), DensityMatrix::maximally_mixed(2), t0, 2)
                .map_err(|e| CliError::Config(e.to_string())),
        }
    }

    pub fn local_hamiltonian(&self, d_s: usize) -> Result<ComplexMatrix, CliError> {
        match &self.h_local {
            Some(entries) => entries_to_matrix(entries, "h_local"),
            None => Ok(ComplexMatrix::zeros(d_s, d_s)),
        }
    }
}

fn missing(field: &str) -> CliError {
    CliError::Config(format!("custom scenario needs \"{field}\""))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum Form {
    A,
    B,
}

/// `{"dim": d, "form": "A" | "B", "entries": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub dim: usize,
    pub form: Form,
    pub entries: Entries,
}

impl MapFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_a(a: &AForm) -> Self {
        Self {
            dim: a.dim(),
            form: Form::A,
            entries: matrix_to_entries(a.matrix()),
        }
    }

    pub fn from_b(b: &BForm) -> Self {
        Self {
            dim: b.dim(),
            form: Form::B,
            entries: matrix_to_entries(b.matrix()),
        }
    }

    pub fn to_a(&self) -> Result<AForm, CliError> {
        let n = self.dim * self.dim;
        if self.entries.len() != n * n {
            return Err(CliError::Config(format!(
                "a map on {0}x{0} matrices needs {1} entries, got {2}",
                self.dim,
                n * n,
                self.entries.len()
            )));
        }
        let m = entries_to_matrix(&self.entries, "entries")?;
        let invalid = |e: canonmap::Error| CliError::Config(format!("map: {e}"));
        Ok(match self.form {
            Form::A => AForm::new(self.dim, m).map_err(invalid)?,
            Form::B => canonmap::maps::b_to_a(&BForm::new(self.dim, m).map_err(invalid)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_scenario() {
        let cfg: ScenarioConfig =
            serde_json::from_str(r#"{"scenario": "swap-qubit", "bloch": [1, 0, 0], "t1": 3.0, "T": 0.1, "N": 4}"#)
                .unwrap();
        assert_eq!(cfg.scenario, ScenarioName::SwapQubit);
        assert_eq!(cfg.interval, Some(0.1));
        assert_eq!(cfg.collisions, Some(4));
        assert_eq!(cfg.method, None);
    }

    #[test]
    fn rejects_unknown_fields_and_names() {
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"scenario": "swap"}"#).is_err());
        assert!(serde_json::from_str::<ScenarioConfig>(r#"{"scenario": "truncated", "gama": 1}"#).is_err());
    }

    #[test]
    fn custom_needs_matrices() {
        let cfg = ScenarioConfig::named(ScenarioName::Custom);
        assert!(matches!(cfg.total_dynamics(), Err(CliError::Config(_))));
    }

    #[test]
    fn custom_round_trips_exchange_model() {
        let mut cfg = ScenarioConfig::named(ScenarioName::Custom);
        cfg.hamiltonian = Some(matrix_to_entries(&exchange_hamiltonian()));
        cfg.tau = Some(matrix_to_entries(&canonmap::quantum::identity(2).scale(0.5)));
        cfg.d_s = Some(2);
        cfg.d_e = Some(2);
        assert_eq!(cfg.total_dynamics().unwrap(), TotalDynamics::qubit_exchange(0.0));
        cfg.d_e = Some(3);
        assert!(cfg.total_dynamics().is_err());
    }

    #[test]
    fn map_file_forms_agree() {
        let a = canonmap::maps::AForm::transpose_map(2);
        let from_a = MapFile::from_a(&a).to_a().unwrap();
        let from_b = MapFile::from_b(&canonmap::maps::a_to_b(&a)).to_a().unwrap();
        assert_eq!(from_a, a);
        assert_eq!(from_b, a);
    }

    #[test]
    fn map_file_checks_entry_count() {
        let file = MapFile {
            dim: 2,
            form: Form::A,
            entries: vec![[1.0, 0.0]; 9],
        };
        assert!(file.to_a().is_err());
    }
}
