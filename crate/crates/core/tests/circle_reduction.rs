use std::f64::consts::TAU;

use proptest::prelude::*;
use skewlab::circle_reduction::{compute_g, track_phase, verify_reduction};
use skewlab::forcing::{BasePoint, Factor, ForcingField, SymmetryFlags, Term, TorusTrig};
use skewlab::group_action::shift;
use skewlab::pde::{Domain, GridFunction, Integrator, OrbitSnapshot, SamplePlan};

fn circle(n: usize, l: f64, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(Domain::Circle { length: l }, n, f).unwrap()
}

fn advection() -> ForcingField {
    ForcingField::autonomous(&[(-1.0, Factor::P)]).unwrap()
}

/// Snapshots every `sample` time units on `[t0, t1]`, integrated at `dt`.
fn sampled(
    u0: &GridFunction,
    base: &BasePoint,
    field: &ForcingField,
    dt: f64,
    sample: f64,
    t0: f64,
    t1: f64,
) -> Vec<OrbitSnapshot> {
    let integ = Integrator::for_profile(u0);
    let start = OrbitSnapshot::new(u0.clone(), base.clone(), 0.0);
    let count = ((t1 - t0) / sample).round() as usize;
    let times: Vec<f64> = (0..=count).map(|i| t0 + i as f64 * sample).filter(|&t| t > 0.0).collect();
    let mut out = integ.run(&start, field, dt, &SamplePlan::At(times)).unwrap();
    if t0 > 0.0 {
        out.remove(0);
    }
    out
}

#[test]
fn drifting_cosine_phase_is_minus_t() {
    let u0 = circle(64, TAU, f64::cos);
    let snaps = sampled(&u0, &BasePoint::origin(1), &advection(), 1e-3, 0.05, 0.0, 3.0);
    let track = track_phase(&snaps, None).unwrap();
    for (t, c) in track.times.iter().zip(&track.c_lifted) {
        assert!((c + t).abs() < 1e-4, "c({t}) = {c}");
    }
    let check = verify_reduction(&snaps, &advection(), None).unwrap();
    assert!(check.max_residual < 1e-6, "{}", check.max_residual);
}

#[test]
fn equilibrium_phase_is_constant() {
    let u0 = circle(64, TAU, |x| 0.5 * (x - 1.0).cos());
    let heat_free = ForcingField::autonomous(&[(1.0, Factor::U)]).unwrap();
    // u_t = u_xx + u keeps the first mode fixed
    let snaps = sampled(&u0, &BasePoint::origin(1), &heat_free, 1e-3, 0.1, 0.0, 2.0);
    let check = verify_reduction(&snaps, &heat_free, None).unwrap();
    assert!(check.max_residual < 1e-9);
    let track = track_phase(&snaps, None).unwrap();
    assert!(track.c_lifted.iter().all(|c| (c + 1.0).abs() < 1e-9));
}

// cos x + 0.3 sin 2x advected at unit speed: the peak shape changes as the
// second mode decays, so c is not linear in t.
fn skewed(x: f64) -> f64 {
    x.cos() + 0.3 * (2.0 * x).sin()
}

#[test]
fn residual_is_second_order_in_sampling_interval() {
    let u0 = circle(64, TAU, skewed);
    let field = advection();
    let residuals: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&h| {
            let snaps = sampled(&u0, &BasePoint::origin(1), &field, 1.25e-4, h, 0.2, 1.0);
            verify_reduction(&snaps, &field, None).unwrap().max_residual
        })
        .collect();
    assert!(residuals[0] < 1e-3, "{residuals:?}");
    for w in residuals.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{residuals:?}");
    }
}

fn analytic_peak(f: impl Fn(f64) -> f64, guess: f64) -> [f64; 3] {
    let h = 1e-3;
    let d = |x: f64, k: usize| -> f64 {
        match k {
            1 => (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h),
            2 => (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h),
            _ => (-f(x - 2.0 * h) + 2.0 * f(x - h) - 2.0 * f(x + h) + f(x + 2.0 * h)) / (2.0 * h * h * h),
        }
    };
    let mut x = guess;
    for _ in 0..30 {
        x -= d(x, 1) / d(x, 2);
    }
    [x, d(x, 2), d(x, 3)]
}

#[test]
fn g_matches_finite_difference_oracle() {
    for f in [(|x: f64| x.cos() + 0.2 * (2.0 * x).cos()) as fn(f64) -> f64, skewed] {
        let u = circle(64, TAU, f);
        let snap = OrbitSnapshot::new(u.clone(), BasePoint::origin(1), 0.0);
        let guess = (0..4096)
            .map(|i| i as f64 * TAU / 4096.0)
            .fold(0.0, |b, x| if f(x) > f(b) { x } else { b });
        let [_, d2, d3] = analytic_peak(f, guess);
        let g = compute_g(&snap, &advection()).unwrap();
        assert!((g - (-1.0 + d3 / d2)).abs() < 1e-6, "{g} vs {}", -1.0 + d3 / d2);
    }
}

fn quasi_periodic_drift(beta: f64, gamma: f64) -> ForcingField {
    ForcingField::new(
        vec![1.0, 2f64.sqrt()],
        vec![
            Term::autonomous(1.0, Factor::U, 2),
            Term::autonomous(-1.0, Factor::U3, 2),
            Term {
                coeff: beta,
                mode: vec![1, 0],
                trig: TorusTrig::Cos,
                factor: Factor::P,
            },
            Term {
                coeff: gamma,
                mode: vec![0, 1],
                trig: TorusTrig::Sin,
                factor: Factor::UP,
            },
        ],
        SymmetryFlags::default(),
    )
    .unwrap()
}

#[test]
fn quasi_periodic_residual_halves() {
    let l = 2.0 * TAU;
    let u0 = circle(64, l, |x| (x / 2.0).cos() + 0.2 * (x / 2.0).sin() * (x / 2.0).cos());
    let field = quasi_periodic_drift(0.6, 0.3);
    let base = BasePoint::new(vec![0.1, 0.7]);
    let residuals: Vec<f64> = [0.01, 0.005, 0.0025]
        .iter()
        .map(|&h| {
            let snaps = sampled(&u0, &base, &field, 2.5e-4, h, 1.0, 3.0);
            verify_reduction(&snaps, &field, Some(l)).unwrap().max_residual
        })
        .collect();
    assert!(residuals[0] < 5e-3, "{residuals:?}");
    for w in residuals.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{residuals:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn g_is_shift_invariant(a in 0.0f64..TAU, b in -0.4f64..0.4, c in -0.4f64..0.4) {
        let u = circle(64, TAU, |x| x.cos() + b * (2.0 * x).sin() + c * (3.0 * x).cos());
        let field = quasi_periodic_drift(0.5, 0.2);
        let base = BasePoint::new(vec![0.3, 0.4]);
        let s0 = OrbitSnapshot::new(u.clone(), base.clone(), 0.0);
        let s1 = OrbitSnapshot::new(shift(&u, a).unwrap(), base, 0.0);
        let (g0, g1) = (compute_g(&s0, &field).unwrap(), compute_g(&s1, &field).unwrap());
        prop_assert!((g0 - g1).abs() < 1e-8, "{} vs {}", g0, g1);
    }
}
