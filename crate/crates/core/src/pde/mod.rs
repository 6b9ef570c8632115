//! Integration of `u_t = u_xx + g(t, u, u_x)` on the circle and on `[0, L]`.
//!
//! Diffusion is propagated exactly in transform space and the forcing is
//! treated with the second-order exponential Runge–Kutta scheme ETD2RK.
//! Interval problems have two independent discretizations: direct
//! cosine/sine collocation ([`solve_interval`]) and reflection onto the
//! doubled circle ([`solve_interval_by_extension`]).

mod circle;
mod etd;
mod extension;
mod grid;
pub mod io;
mod interval;
pub mod spectral;

use thiserror::Error;

use crate::forcing::{BasePoint, ForcingField};

pub use circle::CircleSolver;
pub use etd::{phi1, phi2, EtdCoefficients};
pub use extension::{extend_even, extend_odd, restrict, ODD_EXTENSION_ENDPOINT_TOL};
pub use grid::{BoundaryCondition, Domain, GridFunction, OrbitSnapshot, DIRICHLET_ENDPOINT_TOL, MIN_GRID};
pub use interval::IntervalSolver;
pub use spectral::TrigInterpolant;

/// Any `|u|` above this is treated as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Debug, Error, Clone)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("Dirichlet endpoint value {0:e} does not vanish")]
    NonzeroEndpoint(f64),
    #[error("derivative order {0} is outside 1..=3")]
    InvalidOrder(u32),
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("integration horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("sample interval must be at least one step")]
    InvalidSampling,
    #[error("blow-up at t = {t}: solution left the finite range (last finite snapshot at t = {})", last.t)]
    BlowUp { t: f64, last: Box<OrbitSnapshot> },
    #[error("under-resolved at t = {t}: top-eighth spectral energy fraction {tail_fraction:e} exceeds {tolerance:e}")]
    Resolution {
        t: f64,
        tail_fraction: f64,
        tolerance: f64,
    },
    #[error("forcing field has {field} frequencies but the base point has {base}")]
    BaseDimension { field: usize, base: usize },
}

/// One step of a transform-space scheme for `v' = Λv + N(v, t)`.
pub trait Propagator {
    type State: Clone;

    fn eigenvalues(&self) -> &[f64];
    fn to_state(&self, values: &[f64]) -> Self::State;
    fn to_values(&self, state: &Self::State) -> Vec<f64>;
    fn step(
        &self,
        state: &Self::State,
        field: &ForcingField,
        base: &BasePoint,
        coeffs: &EtdCoefficients,
    ) -> Self::State;
    /// Upper bound for `max |u|`.
    fn amplitude_bound(&self, state: &Self::State) -> f64;
    fn tail_fraction(&self, state: &Self::State) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub dealias: bool,
    pub monitor_tail: bool,
    pub tail_tolerance: f64,
    /// Elapsed time after which the tail monitor is armed.
    pub tail_after: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            dealias: true,
            monitor_tail: true,
            tail_tolerance: 1e-8,
            tail_after: 0.01,
        }
    }
}

/// Default step `1e-3 · (L/2π)²`.
pub fn default_dt(length: f64) -> f64 {
    let r = length / std::f64::consts::TAU;
    1e-3 * r * r
}

/// Reusable integrator for one grid; dispatches on the domain.
#[derive(Debug, Clone)]
pub struct Integrator {
    domain: Domain,
    n: usize,
    options: IntegratorOptions,
    backend: Backend,
}

#[derive(Debug, Clone)]
enum Backend {
    Circle(CircleSolver),
    Interval(IntervalSolver),
}

/// Where to record snapshots.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplePlan {
    /// Every `sample_every` steps up to `t0 + t_end`, plus the final time.
    Every { t_end: f64, sample_every: usize },
    /// Exactly at the given absolute times (ascending, after `t0`).
    At(Vec<f64>),
}

impl Integrator {
    pub fn new(domain: Domain, n: usize, options: IntegratorOptions) -> Self {
        let backend = match domain {
            Domain::Circle { length } => Backend::Circle(CircleSolver::new(n, length, options.dealias)),
            Domain::IntervalNeumann { length } => {
                Backend::Interval(IntervalSolver::new(n, length, BoundaryCondition::Neumann))
            }
            Domain::IntervalDirichlet { length } => {
                Backend::Interval(IntervalSolver::new(n, length, BoundaryCondition::Dirichlet))
            }
        };
        Self {
            domain,
            n,
            options,
            backend,
        }
    }

    pub fn for_profile(u: &GridFunction) -> Self {
        Self::new(u.domain(), u.len(), IntegratorOptions::default())
    }

    pub fn with_options(u: &GridFunction, options: IntegratorOptions) -> Self {
        Self::new(u.domain(), u.len(), options)
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn options(&self) -> IntegratorOptions {
        self.options
    }

    /// Run from `start` under `plan`, returning the start snapshot followed by every capture.
    pub fn run(
        &self,
        start: &OrbitSnapshot,
        field: &ForcingField,
        dt: f64,
        plan: &SamplePlan,
    ) -> Result<Vec<OrbitSnapshot>, PdeError> {
        if start.profile.domain() != self.domain || start.profile.len() != self.n {
            return Err(PdeError::DomainMismatch(
                "integrator was built for a different grid".to_string(),
            ));
        }
        if field.dim() != start.base.dim() {
            return Err(PdeError::BaseDimension {
                field: field.dim(),
                base: start.base.dim(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(PdeError::InvalidTimeStep(dt));
        }
        let stops = match plan {
            SamplePlan::Every { t_end, sample_every } => {
                if !(*t_end > 0.0 && t_end.is_finite()) {
                    return Err(PdeError::InvalidHorizon(*t_end));
                }
                if *sample_every == 0 {
                    return Err(PdeError::InvalidSampling);
                }
                let total = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
                let mut stops: Vec<f64> = (1..=total / sample_every)
                    .map(|i| start.t + (i * sample_every) as f64 * dt)
                    .collect();
                if total % sample_every != 0 || stops.is_empty() {
                    stops.push(start.t + t_end);
                } else if let Some(last) = stops.last_mut() {
                    if (*last - (start.t + t_end)).abs() < 1e-9 * dt.max(1.0) {
                        *last = start.t + t_end;
                    } else {
                        stops.push(start.t + t_end);
                    }
                }
                stops
            }
            SamplePlan::At(times) => times.clone(),
        };
        match &self.backend {
            Backend::Circle(p) => drive(p, &self.options, self.domain, start, field, dt, &stops),
            Backend::Interval(p) => drive(p, &self.options, self.domain, start, field, dt, &stops),
        }
    }

    pub fn integrate(
        &self,
        u0: &GridFunction,
        base: &BasePoint,
        field: &ForcingField,
        t_end: f64,
        dt: f64,
        sample_every: usize,
    ) -> Result<Vec<OrbitSnapshot>, PdeError> {
        let start = OrbitSnapshot::new(u0.clone(), base.clone(), 0.0);
        self.run(&start, field, dt, &SamplePlan::Every { t_end, sample_every })
    }

    /// Advance a snapshot by exactly `duration`.
    pub fn advance(
        &self,
        snap: &OrbitSnapshot,
        field: &ForcingField,
        duration: f64,
        dt: f64,
    ) -> Result<OrbitSnapshot, PdeError> {
        if !(duration > 0.0) {
            return Ok(snap.clone());
        }
        let mut out = self.run(snap, field, dt, &SamplePlan::At(vec![snap.t + duration]))?;
        Ok(out.pop().expect("one capture"))
    }
}

fn drive<P: Propagator>(
    prop: &P,
    options: &IntegratorOptions,
    domain: Domain,
    start: &OrbitSnapshot,
    field: &ForcingField,
    dt: f64,
    stops: &[f64],
) -> Result<Vec<OrbitSnapshot>, PdeError> {
    let full = EtdCoefficients::new(prop.eigenvalues(), dt);
    let freq = field.frequencies();
    let snapshot = |state: &P::State, t: f64| {
        OrbitSnapshot::new(
            GridFunction::from_parts_unchecked(prop.to_values(state), domain),
            start.base.translate(t - start.t, freq),
            t,
        )
    };
    let mut state = prop.to_state(start.profile.values());
    let mut out = Vec::with_capacity(stops.len() + 1);
    out.push(start.clone());
    let mut anchor = start.t;
    for &stop in stops {
        if stop <= anchor {
            continue;
        }
        let span = stop - anchor;
        let full_steps = (span / dt + 1e-9).floor() as usize;
        let remainder = span - full_steps as f64 * dt;
        let partial = (remainder > 1e-9 * dt).then(|| EtdCoefficients::new(prop.eigenvalues(), remainder));
        let total = full_steps + usize::from(partial.is_some());
        for i in 0..total {
            let t_here = anchor + i as f64 * dt;
            let base = start.base.translate(t_here - start.t, freq);
            let coeffs = if i < full_steps { &full } else { partial.as_ref().expect("partial step") };
            let next = prop.step(&state, field, &base, coeffs);
            if !finite_and_bounded(prop, &next) {
                return Err(PdeError::BlowUp {
                    t: t_here + coeffs.dt,
                    last: Box::new(snapshot(&state, t_here)),
                });
            }
            state = next;
        }
        if options.monitor_tail && stop - start.t >= options.tail_after {
            let tail = prop.tail_fraction(&state);
            if tail > options.tail_tolerance {
                return Err(PdeError::Resolution {
                    t: stop,
                    tail_fraction: tail,
                    tolerance: options.tail_tolerance,
                });
            }
        }
        out.push(snapshot(&state, stop));
        anchor = stop;
    }
    Ok(out)
}

fn finite_and_bounded<P: Propagator>(prop: &P, state: &P::State) -> bool {
    let bound = prop.amplitude_bound(state);
    if !bound.is_finite() {
        return false;
    }
    if bound <= BLOWUP_THRESHOLD {
        return true;
    }
    prop.to_values(state).iter().all(|v| v.is_finite() && v.abs() <= BLOWUP_THRESHOLD)
}

/// Spectral `∂ₓ^order u`. Interval profiles are differentiated through their
/// reflection; odd derivatives swap the Neumann and Dirichlet tags.
pub fn spatial_derivatives(u: &GridFunction, order: u32) -> Result<GridFunction, PdeError> {
    if !(1..=3).contains(&order) {
        return Err(PdeError::InvalidOrder(order));
    }
    match u.domain() {
        Domain::Circle { length } => Ok(GridFunction::from_parts_unchecked(
            spectral::circle_derivative(u.values(), length, order),
            u.domain(),
        )),
        Domain::IntervalNeumann { length } | Domain::IntervalDirichlet { length } => {
            let neumann = matches!(u.domain(), Domain::IntervalNeumann { .. });
            let ext = if neumann {
                extension::extend_even_values(u.values())
            } else {
                extension::extend_odd_values(u.values())
            };
            let d = spectral::circle_derivative(&ext, 2.0 * length, order);
            let mut values = d[..u.len()].to_vec();
            let out_neumann = neumann == (order % 2 == 0);
            if !out_neumann {
                let last = values.len() - 1;
                values[0] = 0.0;
                values[last] = 0.0;
            }
            let bc = if out_neumann {
                BoundaryCondition::Neumann
            } else {
                BoundaryCondition::Dirichlet
            };
            Ok(GridFunction::from_parts_unchecked(values, Domain::interval(length, bc)))
        }
    }
}

/// One step of the skew-product semiflow: profile advanced by `dt`, base by `translate(·, dt)`.
pub fn step(snap: &OrbitSnapshot, field: &ForcingField, dt: f64) -> Result<OrbitSnapshot, PdeError> {
    Integrator::for_profile(&snap.profile).advance(snap, field, dt, dt)
}

/// Snapshots every `sample_every` steps on `[0, t_end]`, starting with `u0`.
pub fn integrate(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Vec<OrbitSnapshot>, PdeError> {
    Integrator::for_profile(u0).integrate(u0, base, field, t_end, dt, sample_every)
}

/// Direct cosine/sine collocation solve; the boundary condition is the profile's tag.
pub fn solve_interval(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Vec<OrbitSnapshot>, PdeError> {
    if u0.domain().is_circle() {
        return Err(PdeError::DomainMismatch("solve_interval needs an interval profile".to_string()));
    }
    integrate(u0, base, field, t_end, dt, sample_every)
}

/// Reflect onto the doubled circle, solve there, and restrict back to `[0, L]`.
pub fn solve_interval_by_extension(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Vec<OrbitSnapshot>, PdeError> {
    let bc = u0
        .domain()
        .boundary()
        .ok_or_else(|| PdeError::DomainMismatch("extension needs an interval profile".to_string()))?;
    let ext = match bc {
        BoundaryCondition::Neumann => extend_even(u0)?,
        BoundaryCondition::Dirichlet => extend_odd(u0)?,
    };
    integrate(&ext, base, field, t_end, dt, sample_every)?
        .into_iter()
        .map(|s| {
            Ok(OrbitSnapshot {
                profile: restrict(&s.profile, bc)?,
                base: s.base,
                t: s.t,
            })
        })
        .collect()
}
