use std::collections::BTreeSet;
use std::f64::consts::TAU;

use skewlab::forcing::{hull_distance, BasePoint, Factor, ForcingField, SymmetryFlags, Term, TorusTrig};
use skewlab::group_action::{orbit_distance, shift};
use skewlab::pde::{Domain, GridFunction, Integrator};
use skewlab::skew_product::{
    classify_trichotomy, classify_with_persistence, cluster_modulo_shift, collect_omega_sample, near_minimality_score,
    return_times, Alternative, ClassifierParams, RecheckSpec, SamplingSpec, SkewError,
};

fn circle(n: usize, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(Domain::Circle { length: TAU }, n, f).unwrap()
}

fn bistable() -> ForcingField {
    ForcingField::autonomous(&[(1.0, Factor::U), (-1.0, Factor::U3)]).unwrap()
}

fn circle_gap(x: f64) -> f64 {
    (x - x.round()).abs()
}

#[test]
fn two_torus_returns_satisfy_three_gap_law() {
    let w = [1.0, 2f64.sqrt()];
    let b = BasePoint::origin(2);
    let delta = 0.02;
    let t_max = 5000.0;
    let times = return_times(&b, 0.0, &w, &b, delta, 0.0, t_max);

    // a visit near integer n exists iff ‖n√2‖ < δ(1+√2)
    let predicted: Vec<i64> = (1..=t_max as i64)
        .filter(|&n| circle_gap(n as f64 * w[1]) < delta * (1.0 + w[1]))
        .collect();
    let observed: Vec<i64> = times.iter().map(|t| t.round() as i64).collect();
    assert_eq!(observed, predicted);

    let gaps: BTreeSet<i64> = observed.windows(2).map(|p| p[1] - p[0]).collect();
    assert!(gaps.len() <= 3, "{gaps:?}");
    if gaps.len() == 3 {
        let g: Vec<i64> = gaps.into_iter().collect();
        assert_eq!(g[2], g[0] + g[1]);
    }

    // direct phase scan over a shorter window
    let scan_end = 400.0;
    let h = 1e-4;
    let mut visits = 0;
    let mut inside = false;
    for i in 0..=(scan_end / h) as usize {
        let t = i as f64 * h;
        let d = hull_distance(&b.translate(t, &w), &b).unwrap();
        let now = d < delta && t > 0.5;
        if now && !inside {
            visits += 1;
        }
        inside = now;
    }
    assert_eq!(visits, times.iter().filter(|&&t| t <= scan_end).count());
}

#[test]
fn returns_for_periodic_base_are_integers() {
    let b = BasePoint::new(vec![0.3]);
    for delta in [0.001, 0.1, 0.4] {
        let t = return_times(&b, 0.0, &[1.0], &b, delta, 0.0, 25.0);
        assert_eq!(t, (1..=25).map(f64::from).collect::<Vec<_>>());
    }
}

#[test]
fn heat_limit_sample_is_the_mean() {
    let u0 = circle(32, |x| 0.4 + x.cos() - 0.3 * (2.0 * x).sin());
    let integ = Integrator::for_profile(&u0);
    let field = ForcingField::new(vec![1.0], vec![], SymmetryFlags::default()).unwrap();
    let sample = collect_omega_sample(&u0, &BasePoint::origin(1), &field, &integ, &SamplingSpec {
        transient: 20.0,
        ..SamplingSpec::new(1e-2, 45.0)
    }).unwrap();
    assert_eq!(sample.len(), 25);
    for s in &sample.snapshots {
        assert!(s.profile.values().iter().all(|v| (v - 0.4).abs() < 1e-8));
    }
    let clusters = cluster_modulo_shift(&sample, sample.default_eps()).unwrap();
    assert_eq!(clusters.len(), 1);
    let recheck = RecheckSpec {
        dt: 1e-2,
        horizon: 10.0,
        eps: sample.default_eps(),
    };
    assert_eq!(near_minimality_score(&sample, &clusters[0], &field, &integ, &recheck).unwrap(), 1.0);
}

#[test]
fn too_short_horizon_reports_achieved_count() {
    let u0 = circle(16, f64::cos);
    let integ = Integrator::for_profile(&u0);
    let err = collect_omega_sample(&u0, &BasePoint::origin(1), &bistable(), &integ, &SamplingSpec::new(1e-2, 10.0));
    match err {
        Err(SkewError::InsufficientReturns { achieved, required }) => {
            assert_eq!((achieved, required), (8, 20));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn bistable_near_one_is_single_minimal() {
    let u0 = circle(32, |x| 0.9 + 0.1 * x.cos());
    let integ = Integrator::for_profile(&u0);
    let field = bistable();
    let spec = SamplingSpec::new(1e-2, 30.0);
    let sample = collect_omega_sample(&u0, &BasePoint::origin(1), &field, &integ, &spec).unwrap();
    let eps = sample.default_eps();
    let clusters = cluster_modulo_shift(&sample, eps).unwrap();
    let params = ClassifierParams::new(eps, 10.0, 1e-2);
    let report = classify_trichotomy(&sample, &clusters, &field, &integ, &params).unwrap();
    assert_eq!(report.alternative, Alternative::SingleMinimal);
    assert_eq!(report.clusters[0].score, 1.0);
    assert!(report.clusters[0].representative.values().iter().all(|v| (v - 1.0).abs() < 1e-6));
}

#[test]
fn equilibrium_zero_to_one_is_connecting() {
    let u0 = circle(32, |x| 1e-12 * (1.0 + 0.5 * x.cos()));
    let integ = Integrator::for_profile(&u0);
    let field = bistable();
    let spec = SamplingSpec {
        transient: 0.0,
        ..SamplingSpec::new(1e-2, 60.0)
    };
    let params = ClassifierParams::new(1e-3, 10.0, 1e-2);
    let check = classify_with_persistence(&u0, &BasePoint::origin(1), &field, &integ, &spec, &params).unwrap();
    let report = &check.first;
    assert!(
        matches!(
            report.alternative,
            Alternative::MinimalPlusConnecting | Alternative::TwoMinimalPlusConnecting
        ),
        "{:?}",
        report
    );
    assert!(!report.connecting_evidence.is_empty());
    assert!(!check.is_red_flag());
}

#[test]
fn connecting_representative_scores_below_one() {
    let u0 = circle(32, |x| 1e-3 * (1.0 + 0.5 * x.cos()));
    let integ = Integrator::for_profile(&u0);
    let field = bistable();
    let spec = SamplingSpec {
        transient: 0.0,
        ..SamplingSpec::new(1e-2, 25.0)
    };
    let sample = collect_omega_sample(&u0, &BasePoint::origin(1), &field, &integ, &spec).unwrap();
    let clusters = cluster_modulo_shift(&sample, 1e-3).unwrap();
    let transit = clusters
        .iter()
        .find(|c| c.members.contains(&2))
        .expect("t = 3 snapshot is clustered");
    let recheck = RecheckSpec {
        dt: 1e-2,
        horizon: 10.0,
        eps: 1e-3,
    };
    assert!(near_minimality_score(&sample, transit, &field, &integ, &recheck).unwrap() < 1.0);
}

fn scalar_forcing() -> ForcingField {
    ForcingField::new(
        vec![1.0, 2f64.sqrt()],
        vec![
            Term {
                coeff: 1.0,
                mode: vec![1, 0],
                trig: TorusTrig::Sin,
                factor: Factor::One,
            },
            Term {
                coeff: 0.5,
                mode: vec![0, 1],
                trig: TorusTrig::Cos,
                factor: Factor::One,
            },
        ],
        SymmetryFlags::default(),
    )
    .unwrap()
}

#[test]
fn scalar_forcing_tracks_quadrature_mean() {
    let u0 = circle(16, |x| 0.2 * x.sin());
    let integ = Integrator::for_profile(&u0);
    let field = scalar_forcing();
    let spec = SamplingSpec::new(1e-3, 1500.0);
    let sample = collect_omega_sample(&u0, &BasePoint::origin(2), &field, &integ, &spec).unwrap();
    assert!(sample.len() >= 20);
    let r2 = 2f64.sqrt();
    let mean = |t: f64| (1.0 - (TAU * t).cos()) / TAU + 0.5 * (TAU * r2 * t).sin() / (TAU * r2);
    for s in &sample.snapshots {
        let m = mean(s.t);
        let err = s.profile.values().iter().map(|v| (v - m).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "t = {} err {err}", s.t);
    }
    // mean varies by O(δ) across returns; a threshold above that spread gives one cluster
    let eps = 0.05;
    let clusters = cluster_modulo_shift(&sample, eps).unwrap();
    assert_eq!(clusters.len(), 1);
    let params = ClassifierParams::new(eps, 300.0, 1e-3);
    let report = classify_trichotomy(&sample, &clusters, &field, &integ, &params).unwrap();
    assert_eq!(report.alternative, Alternative::SingleMinimal);
}

#[test]
fn shifting_initial_data_shifts_representatives() {
    let field = ForcingField::new(
        vec![1.0],
        vec![
            Term::autonomous(1.0, Factor::U, 1),
            Term::autonomous(-1.0, Factor::U3, 1),
            Term {
                coeff: 0.5,
                mode: vec![1],
                trig: TorusTrig::Cos,
                factor: Factor::P,
            },
        ],
        SymmetryFlags::default(),
    )
    .unwrap();
    let l = 2.0 * TAU;
    let u0 = GridFunction::from_fn(Domain::Circle { length: l }, 64, |x| (x / 2.0).sin()).unwrap();
    let shifted = shift(&u0, 1.3).unwrap();
    let integ = Integrator::for_profile(&u0);
    let spec = SamplingSpec::new(2.5e-3, 30.0);
    let run = |u: &GridFunction| {
        let sample = collect_omega_sample(u, &BasePoint::origin(1), &field, &integ, &spec).unwrap();
        let eps = sample.default_eps();
        let clusters = cluster_modulo_shift(&sample, eps).unwrap();
        classify_trichotomy(&sample, &clusters, &field, &integ, &ClassifierParams::new(eps, 5.0, 2.5e-3)).unwrap()
    };
    let (a, b) = (run(&u0), run(&shifted));
    assert_eq!(a.alternative, b.alternative);
    assert_eq!(a.clusters.len(), b.clusters.len());
    for (p, q) in a.clusters.iter().zip(&b.clusters) {
        assert!(orbit_distance(&p.representative, &q.representative, 64).unwrap() < 1e-6);
    }
}

#[test]
fn sampling_is_deterministic() {
    let u0 = circle(32, |x| 0.5 + 0.2 * x.cos());
    let integ = Integrator::for_profile(&u0);
    let spec = SamplingSpec::new(1e-2, 25.0);
    let a = collect_omega_sample(&u0, &BasePoint::origin(1), &bistable(), &integ, &spec).unwrap();
    let b = collect_omega_sample(&u0, &BasePoint::origin(1), &bistable(), &integ, &spec).unwrap();
    assert_eq!(a, b);
}
