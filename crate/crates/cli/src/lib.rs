//! Configuration-driven scenario runner for the skewlab library.
//!
//! Each run writes into its own directory: `config.json` (the resolved
//! configuration, every threshold explicit), `summary.txt` (metrics and one
//! `assertion.<name>=pass|fail` line per check), CSV artifacts and PNG plots.

pub mod config;
pub mod plot;
mod scenarios;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

pub use config::{ScenarioConfig, ScenarioKind};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Numerical(_) => EXIT_NUMERICAL,
            Self::Io(_) => EXIT_IO,
        }
    }
}

impl From<image::ImageError> for RunError {
    fn from(e: image::ImageError) -> Self {
        Self::Io(std::io::Error::other(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Metrics, assertions and artifacts accumulated by a scenario.
#[derive(Debug, Default)]
pub struct Report {
    pub metrics: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
    files: Vec<(String, Vec<u8>)>,
    plots: Vec<(String, plot::Plot)>,
}

impl Report {
    pub fn metric(&mut self, key: &str, value: impl fmt::Display) {
        self.metrics.push((key.to_string(), value.to_string()));
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn file(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn plot(&mut self, name: &str, plot: plot::Plot) {
        self.plots.push((name.to_string(), plot));
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub name: String,
    pub kind: ScenarioKind,
    pub output_dir: PathBuf,
    pub metrics: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
    pub runtime_s: f64,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_PASS
        } else {
            EXIT_ASSERTION
        }
    }

    pub fn metric(&self, key: &str) -> Option<&str> {
        self.metrics.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn summary(&self, config: &ScenarioConfig) -> String {
        let mut out = format!("scenario={}\nkind={}\nseed={}\n", config.name, config.kind, config.seed);
        for (k, v) in &self.metrics {
            out.push_str(&format!("metric.{k}={v}\n"));
        }
        for a in &self.assertions {
            let verdict = if a.passed { "pass" } else { "fail" };
            out.push_str(&format!("assertion.{}={verdict} {}\n", a.name, a.detail));
        }
        out.push_str(&format!("status={}\n", if self.passed() { "pass" } else { "fail" }));
        out.push_str(&format!("runtime_s={:.3}\n", self.runtime_s));
        out
    }
}

/// Where a run writes: `root/<name>` when a root is given, otherwise the
/// config's `output` entry, otherwise `output/<name>`.
pub fn output_dir(config: &ScenarioConfig, root: Option<&Path>) -> PathBuf {
    match (root, &config.output) {
        (Some(r), _) => r.join(&config.name),
        (None, Some(o)) => PathBuf::from(o),
        (None, None) => Path::new("output").join(&config.name),
    }
}

/// Run one scenario and write its artifacts.
pub fn run_scenario(config: &ScenarioConfig, root: Option<&Path>) -> Result<RunOutcome, RunError> {
    config.validate()?;
    let started = Instant::now();
    let dir = output_dir(config, root);
    let report = scenarios::run(config)?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("config.json"), config.to_json() + "\n")?;
    for (name, bytes) in &report.files {
        fs::write(dir.join(name), bytes)?;
    }
    for (name, plot) in &report.plots {
        plot.render(&dir.join(name))?;
    }
    let outcome = RunOutcome {
        name: config.name.clone(),
        kind: config.kind,
        output_dir: dir.clone(),
        metrics: report.metrics,
        assertions: report.assertions,
        runtime_s: started.elapsed().as_secs_f64(),
    };
    fs::write(dir.join("summary.txt"), outcome.summary(config))?;
    Ok(outcome)
}

/// Read, parse and validate a config file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text).map_err(|e| match e {
        RunError::Config(msg) => RunError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Worst exit status across runs; config errors dominate numerical errors,
/// which dominate assertion failures.
pub fn combined_exit_code(codes: &[i32]) -> i32 {
    let rank = |c: i32| match c {
        EXIT_CONFIG => 4,
        EXIT_NUMERICAL => 3,
        EXIT_ASSERTION => 2,
        EXIT_IO => 1,
        _ => 0,
    };
    codes.iter().copied().max_by_key(|&c| rank(c)).unwrap_or(EXIT_PASS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub kind: ScenarioKind,
    pub anchor: &'static str,
    pub description: &'static str,
}

/// Static catalog of scenario kinds with the property each one exercises.
pub fn list_scenarios() -> Vec<CatalogEntry> {
    ScenarioKind::ALL
        .iter()
        .map(|&kind| {
            let (anchor, description) = match kind {
                ScenarioKind::HeatDecay => (
                    "closed-form linear solutions",
                    "Fourier-mode decay and drift of linear equations against exact solutions",
                ),
                ScenarioKind::ZeroMonotone => (
                    "zero-number monotonicity",
                    "zero count of random solution differences never increases; every drop has a multiple-zero witness",
                ),
                ScenarioKind::DropWitness => (
                    "zero-number drops at multiple zeros",
                    "one engineered zero-count drop located in time and witnessed by a multiple zero",
                ),
                ScenarioKind::ExtensionEquivalenceNeumann => (
                    "Neumann problems as even periodic problems",
                    "direct cosine solve agrees with even extension, periodic solve and restriction",
                ),
                ScenarioKind::ExtensionEquivalenceDirichlet => (
                    "Dirichlet problems as odd periodic problems",
                    "direct sine solve agrees with odd extension, periodic solve and restriction",
                ),
                ScenarioKind::ShiftConstancy => (
                    "constancy property",
                    "zero count of a profile minus its shifted copy is one constant on a near-minimal set",
                ),
                ScenarioKind::CircleReduction => (
                    "circle-flow reduction",
                    "phase of the profile maximum obeys dc/dt = G(t; g) with second-order residual",
                ),
                ScenarioKind::SymmetricConjugacy => (
                    "common critical point and evaluation conjugacy",
                    "fields even in u_x: shared critical point and injective evaluation on fibers",
                ),
                ScenarioKind::TrichotomyScan => (
                    "structure of omega-limit sets",
                    "one minimal set, or minimal sets joined by connecting orbits, never three persistent clusters",
                ),
                ScenarioKind::FinkTorus => (
                    "forced circle flow example",
                    "rotation number, omega-limit classification and the derived equation for torus flows",
                ),
            };
            CatalogEntry {
                kind,
                anchor,
                description,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_complete_and_stable() {
        let a = list_scenarios();
        assert_eq!(a.len(), 10);
        assert_eq!(a, list_scenarios());
        assert!(a.iter().all(|e| !e.anchor.is_empty() && !e.description.is_empty()));
    }

    #[test]
    fn worst_exit_code_wins() {
        assert_eq!(combined_exit_code(&[0, 2, 0]), 2);
        assert_eq!(combined_exit_code(&[2, 3]), 3);
        assert_eq!(combined_exit_code(&[3, 4, 2]), 4);
        assert_eq!(combined_exit_code(&[]), 0);
    }

    #[test]
    fn output_dir_precedence() {
        let mut c = ScenarioConfig::from_json(r#"{"name": "x", "kind": "heat_decay"}"#).unwrap();
        assert_eq!(output_dir(&c, None), Path::new("output/x"));
        c.output = Some("elsewhere".into());
        assert_eq!(output_dir(&c, None), Path::new("elsewhere"));
        assert_eq!(output_dir(&c, Some(Path::new("r"))), Path::new("r/x"));
    }
}
