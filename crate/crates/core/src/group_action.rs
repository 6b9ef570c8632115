//! The rotation action `(σ_a u)(x) = u(x + a)` on circle profiles.

use num_complex::Complex64;
use thiserror::Error;

use crate::pde::spectral::{angular_wavenumbers, RealFft, TrigInterpolant};
use crate::pde::{Domain, GridFunction};

/// Relative threshold below which two peaks are considered tied.
pub const TIE_TOLERANCE: f64 = 1e-10;
/// `|u''| < DEGENERACY_TOLERANCE · max|u| · (2π/L)²` flags a degenerate maximum.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("the rotation action is only defined on circle profiles")]
    NotCircle,
    #[error("profiles live on different grids")]
    DomainMismatch,
    #[error("profile is spatially homogeneous; its maximum has no phase")]
    Homogeneous,
}

fn circle_length(u: &GridFunction) -> Result<f64, GroupError> {
    match u.domain() {
        Domain::Circle { length } => Ok(length),
        _ => Err(GroupError::NotCircle),
    }
}

/// Reduce `a` into `[0, L)`.
pub fn reduce_shift(a: f64, length: f64) -> f64 {
    let r = a.rem_euclid(length);
    if r >= length {
        0.0
    } else {
        r
    }
}

/// Precomputed spectrum of a profile for repeated off-grid shifts.
#[derive(Debug, Clone)]
pub struct Shifter {
    values: Vec<f64>,
    length: f64,
    coeffs: Vec<Complex64>,
    kappa: Vec<f64>,
    fft: RealFft,
}

impl Shifter {
    pub fn new(u: &GridFunction) -> Result<Self, GroupError> {
        let length = circle_length(u)?;
        let fft = RealFft::new(u.len());
        Ok(Self {
            values: u.values().to_vec(),
            length,
            coeffs: fft.forward(u.values()),
            kappa: angular_wavenumbers(u.len(), length),
            fft,
        })
    }

    /// Values of `σ_a u` at the grid nodes.
    pub fn shifted(&self, a: f64) -> Vec<f64> {
        let n = self.values.len();
        let a = reduce_shift(a, self.length);
        let cells = a * n as f64 / self.length;
        let nearest = cells.round();
        if (cells - nearest).abs() < 1e-9 {
            let m = nearest as usize % n;
            return (0..n).map(|j| self.values[(j + m) % n]).collect();
        }
        let nyq = n / 2;
        let rotated: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k == nyq {
                    // the real Nyquist cosine can only be shifted by its real part
                    c * (self.kappa[k] * a).cos()
                } else {
                    c * Complex64::from_polar(1.0, self.kappa[k] * a)
                }
            })
            .collect();
        self.fft.inverse(&rotated)
    }
}

/// `σ_a u`. Grid-multiple shifts are exact index rotations, other shifts use
/// the trigonometric interpolant.
pub fn shift(u: &GridFunction, a: f64) -> Result<GridFunction, GroupError> {
    let s = Shifter::new(u)?;
    GridFunction::new(s.shifted(a), u.domain()).map_err(|_| GroupError::NotCircle)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Closest approach between two group orbits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub distance: f64,
    /// Shift `a` realizing `‖u − σ_a v‖∞ = distance`.
    pub shift: f64,
}

/// `min_a ‖u − σ_a v‖∞` over `n_shifts` equally spaced shifts only.
pub fn orbit_distance_on_grid(u: &GridFunction, v: &GridFunction, n_shifts: usize) -> Result<Alignment, GroupError> {
    check_pair(u, v)?;
    let sv = Shifter::new(v)?;
    Ok(grid_scan(u.values(), &sv, n_shifts))
}

fn grid_scan(u: &[f64], sv: &Shifter, n_shifts: usize) -> Alignment {
    let step = sv.length / n_shifts as f64;
    let mut best = Alignment {
        distance: f64::INFINITY,
        shift: 0.0,
    };
    for i in 0..n_shifts {
        let a = i as f64 * step;
        let d = max_diff(u, &sv.shifted(a));
        if d < best.distance {
            best = Alignment { distance: d, shift: a };
        }
    }
    best
}

fn check_pair(u: &GridFunction, v: &GridFunction) -> Result<(), GroupError> {
    circle_length(u)?;
    circle_length(v)?;
    if u.domain() != v.domain() || u.len() != v.len() {
        return Err(GroupError::DomainMismatch);
    }
    Ok(())
}

/// Best alignment of `v` onto `u`: shift grid scan, then golden-section
/// refinement around the deepest local minima of the scan.
pub fn best_alignment(u: &GridFunction, v: &GridFunction, n_shifts: usize) -> Result<Alignment, GroupError> {
    check_pair(u, v)?;
    let sv = Shifter::new(v)?;
    Ok(refined_alignment(u.values(), &sv, n_shifts.max(1)))
}

const REFINED_MINIMA: usize = 3;

fn refined_alignment(u: &[f64], sv: &Shifter, n_shifts: usize) -> Alignment {
    let step = sv.length / n_shifts as f64;
    let scan: Vec<f64> = (0..n_shifts)
        .map(|i| max_diff(u, &sv.shifted(i as f64 * step)))
        .collect();
    let mut minima: Vec<usize> = (0..n_shifts)
        .filter(|&i| {
            let (l, r) = (scan[(i + n_shifts - 1) % n_shifts], scan[(i + 1) % n_shifts]);
            scan[i] <= l && scan[i] <= r
        })
        .collect();
    minima.sort_by(|&a, &b| scan[a].total_cmp(&scan[b]).then(a.cmp(&b)));
    let mut best = Alignment {
        distance: f64::INFINITY,
        shift: 0.0,
    };
    for &i in minima.iter().take(REFINED_MINIMA) {
        let centre = i as f64 * step;
        let (a, d) = golden_min(|a| max_diff(u, &sv.shifted(a)), centre - step, centre + step, 48);
        let (a, d) = if d < scan[i] { (a, d) } else { (centre, scan[i]) };
        if d < best.distance {
            best = Alignment {
                distance: d,
                shift: reduce_shift(a, sv.length),
            };
        }
    }
    best
}

/// Quotient distance `d_H(Σu, Σv) = min_a ‖u − σ_a v‖∞`, evaluated from both
/// sides so that it is exactly symmetric.
pub fn orbit_distance(u: &GridFunction, v: &GridFunction, n_shifts: usize) -> Result<f64, GroupError> {
    check_pair(u, v)?;
    let n_shifts = n_shifts.max(1);
    let uv = refined_alignment(u.values(), &Shifter::new(v)?, n_shifts).distance;
    let vu = refined_alignment(v.values(), &Shifter::new(u)?, n_shifts).distance;
    Ok(uv.min(vu))
}

pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smallest spatial period of a circle profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialPeriod {
    /// `L/k*`, or `0.0` for homogeneous profiles.
    pub length: f64,
    pub homogeneous: bool,
    pub fold: usize,
}

/// `L⁰ = L/k*` with `k*` the largest `k ≤ n/4` such that `‖u − σ_{L/k} u‖∞ < tol·max|u|`.
pub fn smallest_period(u: &GridFunction, tol: f64) -> Result<SpatialPeriod, GroupError> {
    let length = circle_length(u)?;
    let mean = u.mean();
    let spread = u.values().iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    if spread < tol {
        return Ok(SpatialPeriod {
            length: 0.0,
            homogeneous: true,
            fold: 0,
        });
    }
    let sv = Shifter::new(u)?;
    let scale = u.max_abs();
    let fold = (1..=u.len() / 4)
        .rev()
        .find(|&k| max_diff(u.values(), &sv.shifted(length / k as f64)) < tol * scale)
        .unwrap_or(1);
    Ok(SpatialPeriod {
        length: length / fold as f64,
        homogeneous: false,
        fold,
    })
}

/// Location and curvature of the global maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPhase {
    pub c: f64,
    pub max_value: f64,
    pub second_deriv: f64,
    pub third_deriv: f64,
    pub degenerate: bool,
}

/// Global maximum of the spectral interpolant, refined from every discrete
/// local maximum by safeguarded Newton on `u'`. Ties resolve to the smallest
/// location; with `period` the location is reduced mod `period`.
pub fn max_phase(u: &GridFunction, period: Option<f64>) -> Result<MaxPhase, GroupError> {
    let length = circle_length(u)?;
    let scale = u.max_abs();
    let (lo, hi) = u
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-12 * scale.max(f64::MIN_POSITIVE) || scale == 0.0 {
        return Err(GroupError::Homogeneous);
    }
    let interp = TrigInterpolant::new(u);
    let v = u.values();
    let n = v.len();
    let h = u.spacing();
    let mut peaks: Vec<(f64, [f64; 4])> = Vec::new();
    for j in 0..n {
        let left = v[(j + n - 1) % n];
        let right = v[(j + 1) % n];
        if v[j] >= left && v[j] >= right {
            let x = refine_peak(&interp, j as f64 * h, h);
            peaks.push((reduce_shift(x, length), interp.eval_derivatives(x)));
        }
    }
    let best_value = peaks.iter().map(|(_, d)| d[0]).fold(f64::NEG_INFINITY, f64::max);
    let tie = TIE_TOLERANCE * scale;
    let reduce = |x: f64| match period {
        Some(p) if p > 0.0 => reduce_shift(x, p),
        _ => x,
    };
    let (c, d) = peaks
        .iter()
        .filter(|(_, d)| d[0] >= best_value - tie)
        .map(|&(x, d)| (reduce(x), d))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("a circle profile has a maximum");
    let curvature_scale = scale * (std::f64::consts::TAU / length).powi(2);
    Ok(MaxPhase {
        c,
        max_value: d[0],
        second_deriv: d[2],
        third_deriv: d[3],
        degenerate: d[2].abs() < DEGENERACY_TOLERANCE * curvature_scale,
    })
}

fn refine_peak(interp: &TrigInterpolant, x0: f64, h: f64) -> f64 {
    let (mut a, mut b) = (x0 - h, x0 + h);
    let (da, db) = (interp.derivative(a, 1), interp.derivative(b, 1));
    if !(da > 0.0 && db < 0.0) {
        return golden_min(|x| -interp.eval(x), a, b, 80).0;
    }
    let mut x = x0;
    for _ in 0..100 {
        let d = interp.eval_derivatives(x);
        if d[1].abs() <= 1e-15 * d[2].abs().max(1.0) * h || b - a <= 4.0 * f64::EPSILON * b.abs().max(1.0) {
            break;
        }
        if d[1] > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - d[1] / d[2];
        let next = if d[2] < 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if next == x {
            break;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn circle(n: usize, l: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(Domain::Circle { length: l }, n, f).unwrap()
    }

    #[test]
    fn quarter_shift_of_sine() {
        let l = 3.0;
        let u = circle(64, l, |x| (TAU * x / l).sin());
        let s = shift(&u, l / 4.0).unwrap();
        for (x, v) in s.nodes().iter().zip(s.values()) {
            assert!((v - (TAU * (x + l / 4.0) / l).sin()).abs() < 1e-12);
        }
        assert_eq!(shift(&u, 0.0).unwrap(), u);
    }

    #[test]
    fn interval_profiles_have_no_rotation() {
        let u = GridFunction::new(vec![0.0; 17], Domain::IntervalNeumann { length: 1.0 }).unwrap();
        assert_eq!(shift(&u, 0.1).unwrap_err(), GroupError::NotCircle);
    }

    #[test]
    fn sine_and_cosine_share_an_orbit() {
        let l = TAU;
        let u = circle(64, l, f64::sin);
        let v = circle(64, l, f64::cos);
        assert!(orbit_distance(&u, &v, 64).unwrap() < 1e-9);
        let w = shift(&u, 1.2345).unwrap();
        assert!(orbit_distance(&u, &w, 64).unwrap() < 1e-9);
    }

    #[test]
    fn period_examples() {
        let l = 2.0;
        let u = circle(64, l, |x| (2.0 * TAU * x / l).sin());
        let p = smallest_period(&u, 1e-8).unwrap();
        assert!(!p.homogeneous);
        assert!((p.length - l / 2.0).abs() < 1e-15);
        let c = circle(64, l, |_| 0.7);
        assert!(smallest_period(&c, 1e-8).unwrap().homogeneous);
        let mixed = circle(64, l, |x| (TAU * x / l).sin() + 0.5 * (3.0 * TAU * x / l).sin());
        assert_eq!(smallest_period(&mixed, 1e-8).unwrap().length, l);
    }

    #[test]
    fn cosine_peak() {
        let l = 5.0;
        let u = circle(64, l, |x| (TAU * x / l).cos());
        let m = max_phase(&u, None).unwrap();
        assert!(m.c.abs() < 1e-12 || (m.c - l).abs() < 1e-12);
        assert!((m.second_deriv + (TAU / l).powi(2)).abs() < 1e-10);
        let v = circle(64, l, |x| (TAU * (x - 0.3 * l) / l).cos());
        assert!((max_phase(&v, None).unwrap().c - 0.3 * l).abs() < 1e-10);
    }

    #[test]
    fn ties_resolve_to_smallest_location() {
        let l = TAU;
        let u = circle(64, l, |x| (2.0 * (x - 0.4)).cos());
        let m = max_phase(&u, None).unwrap();
        assert!((m.c - 0.4).abs() < 1e-10, "{}", m.c);
        let shifted = circle(64, l, |x| (2.0 * (x - 0.4 - std::f64::consts::PI)).cos());
        assert!((max_phase(&shifted, None).unwrap().c - 0.4).abs() < 1e-10);
    }

    #[test]
    fn homogeneous_profile_has_no_phase() {
        let u = circle(32, 1.0, |_| 2.0);
        assert_eq!(max_phase(&u, None).unwrap_err(), GroupError::Homogeneous);
    }
}
