//! JSON scenario configuration. Every field has an explicit default that is
//! written back in the config echo, so an output directory fully documents
//! the run that produced it.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use skewlab::forcing::{Factor, ForcingField, SymmetryFlags, Term, TorusTrig};
use skewlab::pde::{BoundaryCondition, Domain, GridFunction};
use skewlab::torus::{TorusTerm, TorusVectorField, Trig};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    HeatDecay,
    ZeroMonotone,
    DropWitness,
    ExtensionEquivalenceNeumann,
    ExtensionEquivalenceDirichlet,
    ShiftConstancy,
    CircleReduction,
    SymmetricConjugacy,
    TrichotomyScan,
    FinkTorus,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        Self::HeatDecay,
        Self::ZeroMonotone,
        Self::DropWitness,
        Self::ExtensionEquivalenceNeumann,
        Self::ExtensionEquivalenceDirichlet,
        Self::ShiftConstancy,
        Self::CircleReduction,
        Self::SymmetricConjugacy,
        Self::TrichotomyScan,
        Self::FinkTorus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::HeatDecay => "heat_decay",
            Self::ZeroMonotone => "zero_monotone",
            Self::DropWitness => "drop_witness",
            Self::ExtensionEquivalenceNeumann => "extension_equivalence_neumann",
            Self::ExtensionEquivalenceDirichlet => "extension_equivalence_dirichlet",
            Self::ShiftConstancy => "shift_constancy",
            Self::CircleReduction => "circle_reduction",
            Self::SymmetricConjugacy => "symmetric_conjugacy",
            Self::TrichotomyScan => "trichotomy_scan",
            Self::FinkTorus => "fink_torus",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigName {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorName {
    One,
    U,
    U2,
    U3,
    P,
    P2,
    Up,
    SinU,
    CosU,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coeff: f64,
    /// Torus mode; empty means the zero mode.
    #[serde(default)]
    pub mode: Vec<i64>,
    #[serde(default = "default_cos")]
    pub trig: TrigName,
    pub factor: FactorName,
    /// Argument scale for `sin_u` / `cos_u`.
    #[serde(default = "one")]
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymmetrySpec {
    pub even_in_p: bool,
    pub odd_in_u: bool,
    pub zero_at_u0: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForcingSpec {
    pub frequencies: Vec<f64>,
    pub terms: Vec<TermSpec>,
    pub symmetry: SymmetrySpec,
}

impl Default for ForcingSpec {
    fn default() -> Self {
        Self {
            frequencies: vec![1.0],
            terms: Vec::new(),
            symmetry: SymmetrySpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Periodic,
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSpec {
    pub length: f64,
    pub n: usize,
    pub bc: BoundaryName,
}

impl Default for DomainSpec {
    fn default() -> Self {
        Self {
            length: TAU,
            n: 64,
            bc: BoundaryName::Periodic,
        }
    }
}

/// `constant + Σ a cos(κ k x) + Σ b sin(κ k x)` with `κ = 2π/L` on the circle
/// and `π/L` on an interval; `k` may be fractional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSpec {
    pub constant: f64,
    pub cos: Vec<(f64, f64)>,
    pub sin: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSpec {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between stored samples.
    pub sample_every: usize,
}

impl Default for IntegrationSpec {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSpec {
    /// Max-norm tolerance for analytic or cross-discretization agreement.
    pub tolerance: f64,
    /// Tolerance on a measured decay rate.
    pub rate_tolerance: f64,
    /// Randomized ensembles: tracks, initial data, trajectories.
    pub n_random: usize,
    pub random_modes: usize,
    pub random_amplitude: f64,
    pub random_family: RandomFamily,
    /// Samples before this time are ignored by zero tracking.
    pub t_start: f64,
    /// Fraction of samples forming the tail that must be constant.
    pub tail_fraction: f64,
    pub expected_drop_time: Option<f64>,
    pub drop_time_tolerance: f64,
    pub base_phase: Vec<f64>,
    pub delta_base: f64,
    /// Absolute clustering threshold; `eps_factor · max amplitude` when absent.
    pub eps_cluster: Option<f64>,
    pub eps_factor: f64,
    pub transient_fraction: f64,
    pub recheck_horizon: f64,
    pub high_score: f64,
    pub n_shifts: usize,
    pub sampling_levels: Vec<f64>,
    pub window: (f64, f64),
    pub residual_bound: f64,
    pub halving_factor: f64,
    pub critical_tolerance: f64,
    pub separation_floor: f64,
    pub same_tolerance: f64,
    /// Accepted outcomes of the trichotomy classifier; empty accepts any.
    pub expected_alternatives: Vec<String>,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            rate_tolerance: 1e-4,
            n_random: 10,
            random_modes: 3,
            random_amplitude: 1.0,
            random_family: RandomFamily::Full,
            t_start: 0.01,
            tail_fraction: 0.2,
            expected_drop_time: None,
            drop_time_tolerance: 1e-3,
            base_phase: Vec::new(),
            delta_base: 0.02,
            eps_cluster: None,
            eps_factor: 1e-3,
            transient_fraction: 0.2,
            recheck_horizon: 10.0,
            high_score: 0.95,
            n_shifts: 32,
            sampling_levels: vec![0.01, 0.005, 0.0025],
            window: (0.2, 1.0),
            residual_bound: 1e-3,
            halving_factor: 1.8,
            critical_tolerance: 1e-5,
            separation_floor: 1e-3,
            same_tolerance: 1e-8,
            expected_alternatives: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusTermSpec {
    pub coeff: f64,
    #[serde(default)]
    pub j: i32,
    #[serde(default)]
    pub m: i32,
    #[serde(default = "default_cos")]
    pub trig: TrigName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaClassName {
    Dense,
    Gapped,
    Periodic,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TorusSpec {
    pub terms: Vec<TorusTermSpec>,
    pub eta: f64,
    pub dt: f64,
    pub n_rotation: usize,
    pub n_omega: usize,
    pub derived_t_end: f64,
    /// Reference rotation number checked to within `2/n`.
    pub expected_rho: Option<f64>,
    pub expected_class: Option<OmegaClassName>,
    pub derived_bound: f64,
}

impl Default for TorusSpec {
    fn default() -> Self {
        Self {
            terms: vec![TorusTermSpec {
                coeff: 0.3,
                j: 0,
                m: 0,
                trig: TrigName::Cos,
            }],
            eta: 0.0,
            dt: 1e-3,
            n_rotation: 1000,
            n_omega: 10_000,
            derived_t_end: 100.0,
            expected_rho: None,
            expected_class: None,
            derived_bound: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    /// Second initial datum for difference tracking; zero when absent.
    #[serde(default)]
    pub partner: Option<InitialSpec>,
    #[serde(default)]
    pub integration: IntegrationSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub torus: Option<TorusSpec>,
}

fn default_cos() -> TrigName {
    TrigName::Cos
}

fn one() -> f64 {
    1.0
}

fn invalid(field: &str, message: impl fmt::Display) -> RunError {
    RunError::Config(format!("{field}: {message}"))
}

fn positive(field: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite (got {v})")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let config: Self = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(invalid("name", "must be a nonempty file-name-safe string"));
        }
        let i = &self.integration;
        positive("integration.dt", i.dt)?;
        positive("integration.t_end", i.t_end)?;
        if i.sample_every == 0 {
            return Err(invalid("integration.sample_every", "must be at least 1"));
        }
        positive("domain.length", self.domain.length)?;
        let n = self.domain.n;
        match self.domain.bc {
            BoundaryName::Periodic if n < 16 => return Err(invalid("domain.n", "must be at least 16")),
            BoundaryName::Neumann | BoundaryName::Dirichlet if n < 17 || !(n - 1).is_power_of_two() => {
                return Err(invalid("domain.n", format!("interval grids need 2^m + 1 nodes (got {n})")));
            }
            _ => {}
        }
        let a = &self.analysis;
        for (field, v) in [
            ("analysis.tolerance", a.tolerance),
            ("analysis.rate_tolerance", a.rate_tolerance),
            ("analysis.delta_base", a.delta_base),
            ("analysis.eps_factor", a.eps_factor),
            ("analysis.recheck_horizon", a.recheck_horizon),
            ("analysis.residual_bound", a.residual_bound),
            ("analysis.critical_tolerance", a.critical_tolerance),
            ("analysis.separation_floor", a.separation_floor),
        ] {
            positive(field, v)?;
        }
        if let Some(e) = a.eps_cluster {
            positive("analysis.eps_cluster", e)?;
        }
        if !(0.0..1.0).contains(&a.transient_fraction) {
            return Err(invalid("analysis.transient_fraction", "must lie in [0, 1)"));
        }
        if !(a.tail_fraction > 0.0 && a.tail_fraction <= 1.0) {
            return Err(invalid("analysis.tail_fraction", "must lie in (0, 1]"));
        }
        if a.sampling_levels.iter().any(|&h| !(h > 0.0)) {
            return Err(invalid("analysis.sampling_levels", "entries must be positive"));
        }
        if a.window.0 >= a.window.1 {
            return Err(invalid("analysis.window", "start must precede end"));
        }
        if !a.base_phase.is_empty() && a.base_phase.len() != self.forcing.frequencies.len() {
            return Err(invalid("analysis.base_phase", "length must match forcing.frequencies"));
        }
        for alt in &a.expected_alternatives {
            if !ALTERNATIVES.contains(&alt.as_str()) {
                return Err(invalid("analysis.expected_alternatives", format!("unknown alternative {alt}")));
            }
        }
        self.field()?;
        if let Some(t) = &self.torus {
            positive("torus.dt", t.dt)?;
        }
        Ok(())
    }

    pub fn field(&self) -> Result<ForcingField, RunError> {
        let k = self.forcing.frequencies.len();
        let terms = self
            .forcing
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mode = if t.mode.is_empty() { vec![0; k] } else { t.mode.clone() };
                if mode.len() != k {
                    return Err(invalid(
                        &format!("forcing.terms[{i}].mode"),
                        format!("needs {k} entries (got {})", mode.len()),
                    ));
                }
                Ok(Term {
                    coeff: t.coeff,
                    mode,
                    trig: match t.trig {
                        TrigName::Cos => TorusTrig::Cos,
                        TrigName::Sin => TorusTrig::Sin,
                    },
                    factor: match t.factor {
                        FactorName::One => Factor::One,
                        FactorName::U => Factor::U,
                        FactorName::U2 => Factor::U2,
                        FactorName::U3 => Factor::U3,
                        FactorName::P => Factor::P,
                        FactorName::P2 => Factor::P2,
                        FactorName::Up => Factor::UP,
                        FactorName::SinU => Factor::SinU(t.beta),
                        FactorName::CosU => Factor::CosU(t.beta),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let s = self.forcing.symmetry;
        ForcingField::new(
            self.forcing.frequencies.clone(),
            terms,
            SymmetryFlags {
                even_in_p: s.even_in_p,
                odd_in_u: s.odd_in_u,
                zero_at_u0: s.zero_at_u0,
            },
        )
        .map_err(|e| invalid("forcing", e))
    }

    pub fn domain(&self) -> Domain {
        let l = self.domain.length;
        match self.domain.bc {
            BoundaryName::Periodic => Domain::Circle { length: l },
            BoundaryName::Neumann => Domain::interval(l, BoundaryCondition::Neumann),
            BoundaryName::Dirichlet => Domain::interval(l, BoundaryCondition::Dirichlet),
        }
    }

    fn wavenumber(&self) -> f64 {
        match self.domain.bc {
            BoundaryName::Periodic => TAU / self.domain.length,
            _ => PI / self.domain.length,
        }
    }

    pub fn profile(&self, spec: &InitialSpec) -> Result<GridFunction, RunError> {
        let kappa = self.wavenumber();
        GridFunction::from_fn(self.domain(), self.domain.n, |x| {
            spec.constant
                + spec.cos.iter().map(|(k, a)| a * (kappa * k * x).cos()).sum::<f64>()
                + spec.sin.iter().map(|(k, b)| b * (kappa * k * x).sin()).sum::<f64>()
        })
        .map_err(|e| invalid("initial", e))
    }

    pub fn initial_profile(&self) -> Result<GridFunction, RunError> {
        self.profile(&self.initial)
    }

    pub fn partner_profile(&self) -> Result<GridFunction, RunError> {
        self.profile(self.partner.as_ref().unwrap_or(&InitialSpec::default()))
    }

    /// Seeded random trigonometric datum number `index`.
    pub fn random_initial(&self, index: u64, family: RandomFamily) -> InitialSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index));
        let a = self.analysis.random_amplitude;
        let modes = self.analysis.random_modes;
        let mut spec = InitialSpec::default();
        if family != RandomFamily::Sine {
            spec.constant = rng.gen_range(-a..a) * 0.5;
        }
        for k in 1..=modes {
            let k = k as f64;
            if family != RandomFamily::Sine {
                spec.cos.push((k, rng.gen_range(-a..a) / k));
            }
            if family != RandomFamily::Cosine {
                spec.sin.push((k, rng.gen_range(-a..a) / k));
            }
        }
        spec
    }

    pub fn base_phase(&self) -> Vec<f64> {
        if self.analysis.base_phase.is_empty() {
            vec![0.0; self.forcing.frequencies.len()]
        } else {
            self.analysis.base_phase.clone()
        }
    }

    pub fn torus_field(&self) -> Result<(TorusSpec, TorusVectorField), RunError> {
        let spec = self
            .torus
            .clone()
            .ok_or_else(|| invalid("torus", "fink_torus scenarios need a torus section"))?;
        let vf = TorusVectorField::new(
            spec.terms
                .iter()
                .map(|t| TorusTerm {
                    coeff: t.coeff,
                    j: t.j,
                    m: t.m,
                    trig: match t.trig {
                        TrigName::Cos => Trig::Cos,
                        TrigName::Sin => Trig::Sin,
                    },
                })
                .collect(),
        );
        Ok((spec, vf))
    }
}

/// Random trigonometric data: all modes, cosines with a constant, or sines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomFamily {
    Full,
    Cosine,
    Sine,
}

pub const ALTERNATIVES: [&str; 4] = [
    "single_minimal",
    "minimal_plus_connecting",
    "two_minimal_plus_connecting",
    "inconclusive",
];
