//! Zero counting on the circle and its evolution along solution differences.

use std::io::{self, Write};

use thiserror::Error;

use crate::forcing::{hull_distance, ForcingField};
use crate::group_action::{shift, GroupError};
use crate::pde::spectral::TrigInterpolant;
use crate::pde::{spatial_derivatives, Domain, GridFunction, Integrator, OrbitSnapshot, PdeError, SamplePlan};

/// Default relative zero tolerance, `tol = ZERO_TOLERANCE · max|u|`.
pub const ZERO_TOLERANCE: f64 = 1e-9;
/// Relative derivative tolerance, scaled by `max|u| · 2π/L`.
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;
/// Profiles with `max|u|` below this are the zero function.
pub const NUMERICAL_ZERO: f64 = 1e-12;

#[derive(Debug, Error, Clone)]
pub enum ZeroError {
    #[error("profile is numerically zero (max |u| = {max:e})")]
    NumericallyZero { max: f64 },
    #[error("two roots within one grid cell near x = {location}")]
    UnresolvedCluster { location: f64 },
    #[error("zero counting requires a circle profile")]
    NotCircle,
    #[error("tolerance must be positive and finite")]
    InvalidTolerance,
    #[error("orbits are sampled differently: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Pde(#[from] PdeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub location: f64,
    pub simple: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroReport {
    pub count: usize,
    pub zeros: Vec<Zero>,
    pub tolerance_used: f64,
    pub derivative_tolerance: f64,
}

impl ZeroReport {
    pub fn all_simple(&self) -> bool {
        self.zeros.iter().all(|z| z.simple)
    }

    pub fn first_multiple(&self) -> Option<&Zero> {
        self.zeros.iter().find(|z| !z.simple)
    }
}

/// `z(u)` with the default relative tolerance.
pub fn count_zeros(u: &GridFunction) -> Result<ZeroReport, ZeroError> {
    zero_number(u, ZERO_TOLERANCE)
}

/// Zeros of the spectral interpolant of a circle profile.
///
/// Each grid cell is split at the critical points of the interpolant into
/// monotone pieces, so every root is bracketed and refined by safeguarded
/// Newton. Critical points with `|u| < tol` are near-tangencies and count as a
/// single multiple zero absorbing the crossings next to them.
pub fn zero_number(u: &GridFunction, rel_tol: f64) -> Result<ZeroReport, ZeroError> {
    let length = match u.domain() {
        Domain::Circle { length } => length,
        _ => return Err(ZeroError::NotCircle),
    };
    if !(rel_tol > 0.0 && rel_tol.is_finite()) {
        return Err(ZeroError::InvalidTolerance);
    }
    let max = u.max_abs();
    if max < NUMERICAL_ZERO {
        return Err(ZeroError::NumericallyZero { max });
    }
    let tol = rel_tol * max;
    let dtol = DERIVATIVE_TOLERANCE * max * std::f64::consts::TAU / length;
    let interp = TrigInterpolant::new(u);
    let du = spatial_derivatives(u, 1)?;
    let v = u.values();
    let dv = du.values();
    let n = v.len();
    let h = u.spacing();

    let mut crossings: Vec<(f64, usize)> = Vec::new();
    let mut tangencies: Vec<(f64, f64)> = Vec::new();
    for j in 0..n {
        let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
        let (va, vb) = (v[j], v[(j + 1) % n]);
        let (da, db) = (dv[j], dv[(j + 1) % n]);
        // breakpoints: cell ends plus at most one interior critical point
        let mut pts = vec![(a, va)];
        if da * db < 0.0 {
            let xc = bracketed_root(|x| interp.derivative(x, 1), |x| interp.derivative(x, 2), a, b, da);
            let vc = interp.eval(xc);
            if vc.abs() < tol {
                tangencies.push((xc, vc.abs()));
            }
            pts.push((xc, vc));
        }
        pts.push((b, vb));
        for w in pts.windows(2) {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if f0 == 0.0 {
                crossings.push((x0, j));
            } else if f0 * f1 < 0.0 {
                crossings.push((
                    bracketed_root(|x| interp.eval(x), |x| interp.derivative(x, 1), x0, x1, f0),
                    j,
                ));
            }
        }
    }

    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(length);
        d.min(length - d)
    };
    let mut zeros: Vec<Zero> = tangencies
        .iter()
        .map(|&(x, r)| Zero {
            location: x.rem_euclid(length),
            simple: false,
            residual: r,
        })
        .collect();
    let free: Vec<(f64, usize)> = crossings
        .into_iter()
        .filter(|&(r, _)| tangencies.iter().all(|&(x, _)| circ(r, x) >= h))
        .collect();
    if let Some(w) = free.windows(2).find(|w| w[0].1 == w[1].1) {
        return Err(ZeroError::UnresolvedCluster {
            location: w[0].0.rem_euclid(length),
        });
    }
    zeros.extend(free.into_iter().map(|(x, _)| {
        let x = x.rem_euclid(length);
        let d = interp.eval_derivatives(x);
        Zero {
            location: x,
            simple: d[1].abs() > dtol,
            residual: d[0].abs(),
        }
    }));
    zeros.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(ZeroReport {
        count: zeros.len(),
        zeros,
        tolerance_used: tol,
        derivative_tolerance: dtol,
    })
}

/// Root of `f` in `[a, b]` given `f(a) = fa` with `f(a)·f(b) < 0`.
fn bracketed_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_left = fa < 0.0;
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if (fx < 0.0) == neg_left {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) || b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0)
        {
            return next;
        }
        x = next;
    }
    x
}

/// Outcome of counting at one sampled time.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroOutcome {
    Report(ZeroReport),
    Unresolved { location: f64 },
}

impl ZeroOutcome {
    pub fn count(&self) -> Option<usize> {
        match self {
            Self::Report(r) => Some(r.count),
            Self::Unresolved { .. } => None,
        }
    }

    /// Location of a multiple zero or unresolved cluster, if any.
    pub fn witness(&self) -> Option<(f64, WitnessKind)> {
        match self {
            Self::Report(r) => r.first_multiple().map(|z| (z.location, WitnessKind::MultipleZero)),
            Self::Unresolved { location } => Some((*location, WitnessKind::UnresolvedCluster)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSample {
    pub t: f64,
    pub outcome: ZeroOutcome,
}

fn classify(diff: &GridFunction) -> Result<ZeroOutcome, ZeroError> {
    match count_zeros(diff) {
        Ok(r) => Ok(ZeroOutcome::Report(r)),
        Err(ZeroError::UnresolvedCluster { location }) => Ok(ZeroOutcome::Unresolved { location }),
        Err(e) => Err(e),
    }
}

/// `w = u − σ_a v`.
pub fn shifted_difference(u: &GridFunction, v: &GridFunction, a: f64) -> Result<GridFunction, ZeroError> {
    let sv = if a == 0.0 { v.clone() } else { shift(v, a)? };
    u.sub(&sv).map_err(|e| ZeroError::Mismatch(e.to_string()))
}

/// Zero count of `φ₁(t) − σ_a φ₂(t)` at every shared sample time.
pub fn track_difference(
    orbit1: &[OrbitSnapshot],
    orbit2: &[OrbitSnapshot],
    a: f64,
) -> Result<Vec<ZeroSample>, ZeroError> {
    if orbit1.len() != orbit2.len() {
        return Err(ZeroError::Mismatch(format!("{} vs {} samples", orbit1.len(), orbit2.len())));
    }
    orbit1
        .iter()
        .zip(orbit2)
        .map(|(p, q)| {
            let scale = p.t.abs().max(1.0);
            if (p.t - q.t).abs() > 1e-12 * scale {
                return Err(ZeroError::Mismatch(format!("times {} and {}", p.t, q.t)));
            }
            if hull_distance(&p.base, &q.base).map_or(true, |d| d > 1e-12) {
                return Err(ZeroError::Mismatch(format!("base points differ at t = {}", p.t)));
            }
            let outcome = classify(&shifted_difference(&p.profile, &q.profile, a)?)?;
            Ok(ZeroSample { t: p.t, outcome })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    MultipleZero,
    UnresolvedCluster,
}

impl WitnessKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::MultipleZero => "multiple",
            Self::UnresolvedCluster => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub t: f64,
    pub x: f64,
    pub kind: WitnessKind,
}

/// A strict decrease of the zero count between two counted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DropEvent {
    pub t_lo: f64,
    pub t_hi: f64,
    pub before: usize,
    pub after: usize,
    pub witness: Option<Witness>,
}

impl DropEvent {
    pub fn is_anomaly(&self) -> bool {
        self.witness.is_none()
    }
}

/// A strict increase between two witness-free counted samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IncreaseEvent {
    pub t_lo: f64,
    pub t_hi: f64,
    pub before: usize,
    pub after: usize,
}

fn counted(series: &[ZeroSample]) -> Vec<(usize, usize)> {
    series
        .iter()
        .enumerate()
        .filter_map(|(i, s)| s.outcome.count().map(|c| (i, c)))
        .collect()
}

/// Strict decreases between consecutive counted samples, each paired with a
/// witness sampled inside the bracket when one exists.
pub fn detect_drop_events(series: &[ZeroSample]) -> Vec<DropEvent> {
    counted(series)
        .windows(2)
        .filter(|w| w[1].1 < w[0].1)
        .map(|w| {
            let (i, j) = (w[0].0, w[1].0);
            let witness = series[i..=j].iter().find_map(|s| {
                s.outcome.witness().map(|(x, kind)| Witness { t: s.t, x, kind })
            });
            DropEvent {
                t_lo: series[i].t,
                t_hi: series[j].t,
                before: w[0].1,
                after: w[1].1,
                witness,
            }
        })
        .collect()
}

/// Count increases between consecutive witness-free samples.
pub fn detect_increases(series: &[ZeroSample]) -> Vec<IncreaseEvent> {
    series
        .windows(2)
        .filter_map(|w| match (&w[0].outcome, &w[1].outcome) {
            (ZeroOutcome::Report(p), ZeroOutcome::Report(q))
                if p.all_simple() && q.all_simple() && q.count > p.count =>
            {
                Some(IncreaseEvent {
                    t_lo: w[0].t,
                    t_hi: w[1].t,
                    before: p.count,
                    after: q.count,
                })
            }
            _ => None,
        })
        .collect()
}

/// Pair of trajectories whose difference is being tracked.
pub struct DifferenceTrack<'a> {
    pub orbit1: &'a [OrbitSnapshot],
    pub orbit2: &'a [OrbitSnapshot],
    pub shift: f64,
    pub field: &'a ForcingField,
    pub integrator: &'a Integrator,
    pub dt: f64,
}

const MAX_BISECTIONS: usize = 60;

impl DifferenceTrack<'_> {
    fn snapshot_at(&self, t: f64) -> Option<(&OrbitSnapshot, &OrbitSnapshot)> {
        let i = self.orbit1.iter().position(|s| s.t == t)?;
        Some((&self.orbit1[i], self.orbit2.get(i)?))
    }

    fn outcome(&self, p: &OrbitSnapshot, q: &OrbitSnapshot) -> Result<ZeroOutcome, ZeroError> {
        classify(&shifted_difference(&p.profile, &q.profile, self.shift)?)
    }

    fn advance_pair(
        &self,
        p: &OrbitSnapshot,
        q: &OrbitSnapshot,
        duration: f64,
        dt: f64,
    ) -> Result<(OrbitSnapshot, OrbitSnapshot), ZeroError> {
        let step = dt.min(duration);
        Ok((
            self.integrator.advance(p, self.field, duration, step)?,
            self.integrator.advance(q, self.field, duration, step)?,
        ))
    }

    /// Search a drop bracket for a witness: the bracket is re-sampled at `dt/8`
    /// and the sub-interval where the count falls is then bisected in time.
    /// Unresolved clusters mean the colliding roots still exist, so the search
    /// continues past them towards the tangency and keeps them as a fallback.
    pub fn find_witness(&self, event: &DropEvent) -> Result<Option<Witness>, ZeroError> {
        let Some((p0, q0)) = self.snapshot_at(event.t_lo) else {
            return Err(ZeroError::Mismatch(format!("no stored snapshot at t = {}", event.t_lo)));
        };
        let fine = self.dt / 8.0;
        let span = event.t_hi - event.t_lo;
        let plan = SamplePlan::Every {
            t_end: span,
            sample_every: 1,
        };
        let run1 = self.integrator.run(p0, self.field, fine, &plan)?;
        let run2 = self.integrator.run(q0, self.field, fine, &plan)?;
        let mut fallback = None;
        let mut prev: Option<(usize, &OrbitSnapshot, &OrbitSnapshot)> = None;
        for (p, q) in run1.iter().zip(&run2) {
            let out = self.outcome(p, q)?;
            match out.witness() {
                Some((x, WitnessKind::MultipleZero)) => {
                    return Ok(Some(Witness {
                        t: p.t,
                        x,
                        kind: WitnessKind::MultipleZero,
                    }));
                }
                Some((x, kind)) => {
                    fallback = Some(Witness { t: p.t, x, kind });
                    if let Some((c_prev, _, _)) = prev {
                        prev = Some((c_prev, p, q));
                    }
                    continue;
                }
                None => {}
            }
            let count = out.count().expect("witness-free outcomes are counted");
            if let Some((c_prev, lp, lq)) = prev {
                if count < c_prev {
                    let found = self.bisect(lp, lq, c_prev, p.t - lp.t, fine)?;
                    return Ok(found.or(fallback));
                }
            }
            prev = Some((count, p, q));
        }
        Ok(fallback)
    }

    fn bisect(
        &self,
        p: &OrbitSnapshot,
        q: &OrbitSnapshot,
        before: usize,
        width: f64,
        dt: f64,
    ) -> Result<Option<Witness>, ZeroError> {
        let (mut p, mut q) = (p.clone(), q.clone());
        let mut width = width;
        let mut fallback = None;
        for _ in 0..MAX_BISECTIONS {
            width *= 0.5;
            let (pm, qm) = self.advance_pair(&p, &q, width, dt)?;
            let out = self.outcome(&pm, &qm)?;
            let still_before = match out.witness() {
                Some((x, WitnessKind::MultipleZero)) => {
                    return Ok(Some(Witness {
                        t: pm.t,
                        x,
                        kind: WitnessKind::MultipleZero,
                    }));
                }
                Some((x, kind)) => {
                    fallback = Some(Witness { t: pm.t, x, kind });
                    true
                }
                None => out.count() == Some(before),
            };
            // keep the half in which the count still falls
            if still_before {
                p = pm;
                q = qm;
            }
        }
        Ok(fallback)
    }

    /// Drop events with witnesses filled in by temporal refinement where the
    /// stored samples missed them.
    pub fn resolve_drops(&self, events: Vec<DropEvent>) -> Result<Vec<DropEvent>, ZeroError> {
        events
            .into_iter()
            .map(|mut e| {
                if e.witness.is_none() {
                    e.witness = self.find_witness(&e)?;
                }
                Ok(e)
            })
            .collect()
    }
}

pub const DROP_CSV_HEADER: &str = "t_lo,t_hi,z_before,z_after,witness_x,witness_kind";

pub fn write_drop_csv<W: Write>(mut w: W, events: &[DropEvent]) -> io::Result<()> {
    writeln!(w, "{DROP_CSV_HEADER}")?;
    for e in events {
        let (x, kind) = match e.witness {
            Some(wt) => (wt.x.to_string(), wt.kind.label()),
            None => ("NaN".to_string(), "none"),
        };
        writeln!(w, "{},{},{},{},{},{}", e.t_lo, e.t_hi, e.before, e.after, x, kind)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    fn circle(n: usize, l: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(Domain::Circle { length: l }, n, f).unwrap()
    }

    #[test]
    fn two_oscillations_have_four_simple_zeros() {
        let l = 3.0;
        let r = count_zeros(&circle(64, l, |x| (2.0 * TAU * x / l).sin())).unwrap();
        assert_eq!(r.count, 4);
        assert!(r.all_simple());
        for (z, k) in r.zeros.iter().zip(0..) {
            assert!((z.location - k as f64 * l / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tangential_zero_is_multiple() {
        let r = count_zeros(&circle(64, TAU, |x| 1.0 + x.cos())).unwrap();
        assert_eq!(r.count, 1);
        assert!(!r.zeros[0].simple);
        assert!((r.zeros[0].location - PI).abs() < 1e-6);
    }

    #[test]
    fn shallow_crossing_pair_is_a_tangency() {
        let r = count_zeros(&circle(64, TAU, |x| 1.0 + 1e-12 + x.cos() - 2e-12)).unwrap();
        assert_eq!(r.count, 1);
        assert!(!r.zeros[0].simple);
    }

    #[test]
    fn dip_inside_a_cell_is_unresolved() {
        let half = TAU / 32.0;
        let r = count_zeros(&circle(16, TAU, |x| 1.0 + (x - half).cos() - 1e-3));
        assert!(matches!(r, Err(ZeroError::UnresolvedCluster { .. })), "{r:?}");
    }

    #[test]
    fn zero_function_is_rejected() {
        let r = count_zeros(&circle(32, 1.0, |_| 0.0));
        assert!(matches!(r, Err(ZeroError::NumericallyZero { .. })));
    }

    #[test]
    fn positive_profile_has_no_zeros() {
        assert_eq!(count_zeros(&circle(32, 1.0, |x| 2.0 + (TAU * x).sin())).unwrap().count, 0);
    }

    fn sample(t: f64, count: usize, simple: bool) -> ZeroSample {
        let zeros = (0..count)
            .map(|i| Zero {
                location: i as f64,
                simple: simple || i > 0,
                residual: 0.0,
            })
            .collect();
        ZeroSample {
            t,
            outcome: ZeroOutcome::Report(ZeroReport {
                count,
                zeros,
                tolerance_used: 1e-9,
                derivative_tolerance: 1e-6,
            }),
        }
    }

    #[test]
    fn constant_series_has_no_drops() {
        let s: Vec<_> = (0..5).map(|i| sample(i as f64, 2, true)).collect();
        assert!(detect_drop_events(&s).is_empty());
        assert!(detect_increases(&s).is_empty());
    }

    #[test]
    fn drop_with_and_without_witness() {
        let s = vec![
            sample(0.0, 4, true),
            sample(1.0, 3, false),
            sample(2.0, 2, true),
            sample(3.0, 0, true),
        ];
        let ev = detect_drop_events(&s);
        assert_eq!(ev.len(), 3);
        assert_eq!(ev[0].witness.unwrap().t, 1.0);
        assert_eq!(ev[1].witness.unwrap().kind, WitnessKind::MultipleZero);
        assert!(ev[2].is_anomaly());
        let mut buf = Vec::new();
        write_drop_csv(&mut buf, &ev).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(DROP_CSV_HEADER));
        assert!(text.ends_with("2,3,2,0,NaN,none\n"));
    }
}
