//! Phase of the profile maximum and the reduced circle flow `ċ = G(t; g)`.
//!
//! With `φ(t, x) = u_{g·t}(x + c(t))` and `u_g` normalized to peak at `0`,
//! the phase is `c(t) = −argmax φ(t)`. Differentiating `φ_x = 0` at the peak
//! gives `ċ = f_p(t, max φ, 0) + φ'''/φ''` there.

use std::io::{self, Write};

use thiserror::Error;

use crate::forcing::ForcingField;
use crate::group_action::{golden_min, max_phase, smallest_period, GroupError, MaxPhase};
use crate::pde::spectral::TrigInterpolant;
use crate::pde::{Domain, OrbitSnapshot};

/// Relative tolerance used to detect the spatial period of the first snapshot.
pub const PERIOD_TOLERANCE: f64 = 1e-6;
/// Wrapped phase increments above this fraction of `L⁰` are ambiguous.
pub const LIFT_MARGIN: f64 = 0.45;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("no snapshots supplied")]
    Empty,
    #[error("phase jump {jump} at t = {t} is not below {limit} (L0 = {period}); reduce sample_every")]
    LiftAmbiguity { t: f64, jump: f64, limit: f64, period: f64 },
    #[error("degenerate maximum (u'' = {second_deriv:e}) at t = {t}")]
    Degenerate { t: f64, second_deriv: f64 },
    #[error("need at least three samples for central differences")]
    TooFewSamples,
    #[error("snapshots must be profiles on one circle with increasing times")]
    InvalidSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrack {
    pub times: Vec<f64>,
    pub c_lifted: Vec<f64>,
    pub period: f64,
    pub degenerate: Vec<bool>,
    pub peaks: Vec<MaxPhase>,
}

impl PhaseTrack {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// Continuous lift of `c(t) = −argmax φ(t)`, unwrapped modulo `L⁰`. Without an
/// explicit `period`, `L⁰` is the smallest period of the first snapshot.
pub fn track_phase(snapshots: &[OrbitSnapshot], period: Option<f64>) -> Result<PhaseTrack, ReductionError> {
    let first = snapshots.first().ok_or(ReductionError::Empty)?;
    if snapshots.windows(2).any(|w| w[1].t <= w[0].t || w[1].profile.domain() != w[0].profile.domain()) {
        return Err(ReductionError::InvalidSeries);
    }
    let l0 = match period {
        Some(p) => p,
        None => {
            let p = smallest_period(&first.profile, PERIOD_TOLERANCE)?;
            if p.homogeneous {
                return Err(GroupError::Homogeneous.into());
            }
            p.length
        }
    };
    let limit = LIFT_MARGIN * l0;
    let mut track = PhaseTrack {
        times: Vec::with_capacity(snapshots.len()),
        c_lifted: Vec::with_capacity(snapshots.len()),
        period: l0,
        degenerate: Vec::with_capacity(snapshots.len()),
        peaks: Vec::with_capacity(snapshots.len()),
    };
    for s in snapshots {
        let peak = max_phase(&s.profile, Some(l0))?;
        let raw = -peak.c;
        let lifted = match track.c_lifted.last() {
            None => raw,
            Some(&prev) => {
                let jump = (raw - prev + 0.5 * l0).rem_euclid(l0) - 0.5 * l0;
                if jump.abs() > limit {
                    return Err(ReductionError::LiftAmbiguity {
                        t: s.t,
                        jump,
                        limit,
                        period: l0,
                    });
                }
                prev + jump
            }
        };
        track.times.push(s.t);
        track.c_lifted.push(lifted);
        track.degenerate.push(peak.degenerate);
        track.peaks.push(peak);
    }
    Ok(track)
}

/// `G = f_p(t, max u, 0) + u'''/u''` at the global maximum.
pub fn compute_g(snap: &OrbitSnapshot, field: &ForcingField) -> Result<f64, ReductionError> {
    let peak = max_phase(&snap.profile, None)?;
    g_from_peak(snap, field, &peak)
}

fn g_from_peak(snap: &OrbitSnapshot, field: &ForcingField, peak: &MaxPhase) -> Result<f64, ReductionError> {
    if peak.degenerate {
        return Err(ReductionError::Degenerate {
            t: snap.t,
            second_deriv: peak.second_deriv,
        });
    }
    let (_, fp) = field.eval_partials(&snap.base, 0.0, peak.max_value, 0.0);
    Ok(fp + peak.third_deriv / peak.second_deriv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub t: f64,
    pub c_lifted: f64,
    pub g: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCheck {
    pub rows: Vec<ResidualRow>,
    pub max_residual: f64,
    pub period: f64,
}

/// Compare the three-point central difference of the lifted phase with `G`
/// at every interior sample.
pub fn verify_reduction(
    snapshots: &[OrbitSnapshot],
    field: &ForcingField,
    period: Option<f64>,
) -> Result<ReductionCheck, ReductionError> {
    if snapshots.len() < 3 {
        return Err(ReductionError::TooFewSamples);
    }
    let track = track_phase(snapshots, period)?;
    let (t, c) = (&track.times, &track.c_lifted);
    let mut rows = Vec::with_capacity(t.len() - 2);
    for i in 1..t.len() - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        // second-order derivative on a possibly non-uniform stencil
        let cdot = (-h1 / (h0 * (h0 + h1))) * c[i - 1]
            + ((h1 - h0) / (h0 * h1)) * c[i]
            + (h0 / (h1 * (h0 + h1))) * c[i + 1];
        let g = g_from_peak(&snapshots[i], field, &track.peaks[i])?;
        rows.push(ResidualRow {
            t: t[i],
            c_lifted: c[i],
            g,
            residual: (cdot - g).abs(),
        });
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(ReductionCheck {
        rows,
        max_residual,
        period: track.period,
    })
}

pub const RESIDUAL_CSV_HEADER: &str = "t,c_lifted,G,residual";

pub fn write_residual_csv<W: Write>(mut w: W, rows: &[ResidualRow]) -> io::Result<()> {
    writeln!(w, "{RESIDUAL_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.t, r.c_lifted, r.g, r.residual)?;
    }
    Ok(())
}

/// Oversampling of the search grid relative to the profile grid.
pub const CRITICAL_POINT_OVERSAMPLING: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub x0: f64,
    /// `max_s |u_x^s(x0)|` over all snapshots.
    pub residual: f64,
    /// Largest `max|u|` across the snapshots.
    pub amplitude: f64,
}

/// Point minimizing the largest slope across all snapshots, located on a fine
/// grid and refined by golden-section search.
pub fn find_common_critical_point(snapshots: &[OrbitSnapshot]) -> Result<CriticalPoint, ReductionError> {
    let first = snapshots.first().ok_or(ReductionError::Empty)?;
    let length = match first.profile.domain() {
        Domain::Circle { length } => length,
        _ => return Err(GroupError::NotCircle.into()),
    };
    if snapshots.iter().any(|s| s.profile.domain() != first.profile.domain()) {
        return Err(ReductionError::InvalidSeries);
    }
    let interps: Vec<TrigInterpolant> = snapshots.iter().map(|s| TrigInterpolant::new(&s.profile)).collect();
    let worst = |x: f64| {
        interps
            .iter()
            .map(|p| p.derivative(x, 1).abs())
            .fold(0.0, f64::max)
    };
    let m = first.profile.len() * CRITICAL_POINT_OVERSAMPLING;
    let dx = length / m as f64;
    let (best_i, best) = (0..m)
        .map(|i| (i, worst(i as f64 * dx)))
        .fold((0, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
    let centre = best_i as f64 * dx;
    let (x, r) = if best > 0.0 {
        golden_min(worst, centre - dx, centre + dx, 60)
    } else {
        (centre, best)
    };
    let (x0, residual) = if r < best { (x.rem_euclid(length), r) } else { (centre, best) };
    let amplitude = snapshots.iter().map(|s| s.profile.max_abs()).fold(0.0, f64::max);
    Ok(CriticalPoint {
        x0,
        residual,
        amplitude,
    })
}

/// Default lower bound on `|u(x0) − v(x0)| / ‖u − v‖∞` below which a pair is
/// reported as a separation violation.
pub const SEPARATION_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationViolation {
    pub i: usize,
    pub j: usize,
    pub evaluation_gap: f64,
    pub profile_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    pub x0: f64,
    pub pairs_checked: usize,
    /// Smallest observed ratio; `+∞` when no distinct pair exists.
    pub modulus: f64,
    pub violations: Vec<SeparationViolation>,
}

impl ConjugacyReport {
    pub fn is_injective(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Injectivity of `u ↦ u(x0)` on fibers: snapshots sharing a sample time lie
/// over the same base point and are compared pairwise. Pairs closer than
/// `same_tol` in max norm are the same point.
pub fn evaluation_conjugacy_check(
    snapshots: &[OrbitSnapshot],
    x0: f64,
    same_tol: f64,
    floor: f64,
) -> ConjugacyReport {
    let values: Vec<f64> = snapshots
        .iter()
        .map(|s| TrigInterpolant::new(&s.profile).eval(x0))
        .collect();
    let mut report = ConjugacyReport {
        x0,
        pairs_checked: 0,
        modulus: f64::INFINITY,
        violations: Vec::new(),
    };
    for i in 0..snapshots.len() {
        for j in i + 1..snapshots.len() {
            let (a, b) = (&snapshots[i], &snapshots[j]);
            if (a.t - b.t).abs() > 1e-12 * a.t.abs().max(1.0) {
                continue;
            }
            let Ok(dist) = a.profile.max_distance(&b.profile) else {
                continue;
            };
            if dist <= same_tol {
                continue;
            }
            report.pairs_checked += 1;
            let gap = (values[i] - values[j]).abs();
            let ratio = gap / dist;
            report.modulus = report.modulus.min(ratio);
            if ratio < floor {
                report.violations.push(SeparationViolation {
                    i,
                    j,
                    evaluation_gap: gap,
                    profile_distance: dist,
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::{BasePoint, Factor};
    use crate::pde::GridFunction;
    use std::f64::consts::TAU;

    fn snap(t: f64, f: impl Fn(f64) -> f64) -> OrbitSnapshot {
        let u = GridFunction::from_fn(Domain::Circle { length: TAU }, 64, f).unwrap();
        OrbitSnapshot::new(u, BasePoint::origin(1), t)
    }

    #[test]
    fn cosine_g_values() {
        let s = snap(0.0, f64::cos);
        let adv = ForcingField::autonomous(&[(-1.0, Factor::P)]).unwrap();
        let g = compute_g(&s, &adv).unwrap();
        assert!((g + 1.0).abs() < 1e-10, "{g}");
        let react = ForcingField::autonomous(&[(1.0, Factor::U), (-1.0, Factor::U3)]).unwrap();
        assert!(compute_g(&s, &react).unwrap().abs() < 1e-10);
    }

    #[test]
    fn lift_unwraps_past_the_period() {
        let snaps: Vec<_> = (0..40).map(|i| snap(i as f64 * 0.2, move |x| (x - i as f64 * 0.2).cos())).collect();
        let track = track_phase(&snaps, None).unwrap();
        for (t, c) in track.times.iter().zip(&track.c_lifted) {
            assert!((c + t).abs() < 1e-10, "{c} vs {t}");
        }
    }

    #[test]
    fn large_jumps_are_ambiguous() {
        let snaps = vec![snap(0.0, f64::cos), snap(1.0, |x| (x - 3.0).cos())];
        assert!(matches!(track_phase(&snaps, None), Err(ReductionError::LiftAmbiguity { .. })));
    }

    #[test]
    fn symmetric_axis_is_common_critical_point() {
        let x0 = 0.25 * TAU;
        let snaps: Vec<_> = (1..5)
            .map(|k| snap(0.0, move |x| (x - x0).cos() + 0.1 * k as f64 * (2.0 * (x - x0)).cos()))
            .collect();
        let cp = find_common_critical_point(&snaps).unwrap();
        assert!(cp.residual < 1e-9);
        let gap = (cp.x0 - x0).rem_euclid(TAU / 2.0);
        assert!(gap.min(TAU / 2.0 - gap) < 1e-8, "{}", cp.x0);
    }

    #[test]
    fn constant_snapshots_pick_the_origin() {
        let snaps = vec![snap(0.0, |_| 1.0), snap(1.0, |_| 1.0)];
        let cp = find_common_critical_point(&snaps).unwrap();
        assert_eq!((cp.x0, cp.residual), (0.0, 0.0));
    }

    #[test]
    fn conjugacy_on_constants_and_a_forced_violation() {
        let pair = vec![snap(1.0, |_| 1.0), snap(1.0, |_| -1.0)];
        let r = evaluation_conjugacy_check(&pair, 0.0, 1e-9, SEPARATION_FLOOR);
        assert_eq!(r.pairs_checked, 1);
        assert!((r.modulus - 1.0).abs() < 1e-12);
        let single = vec![snap(1.0, f64::cos)];
        assert_eq!(evaluation_conjugacy_check(&single, 0.0, 1e-9, SEPARATION_FLOOR).modulus, f64::INFINITY);
        let bad = vec![snap(1.0, f64::cos), snap(1.0, |x| x.cos() + 0.5 * x.sin())];
        let r = evaluation_conjugacy_check(&bad, 0.0, 1e-9, SEPARATION_FLOOR);
        assert_eq!(r.violations.len(), 1);
    }
}
