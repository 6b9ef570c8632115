use std::f64::consts::TAU;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewlab::group_action::{
    max_phase, orbit_distance, orbit_distance_on_grid, reduce_shift, shift, smallest_period, Shifter,
};
use skewlab::pde::spectral::TrigInterpolant;
use skewlab::pde::{Domain, GridFunction};

fn circle(n: usize, l: f64, f: impl Fn(f64) -> f64) -> GridFunction {
    GridFunction::from_fn(Domain::Circle { length: l }, n, f).unwrap()
}

fn random_profile(rng: &mut impl Rng, n: usize, l: f64, modes: usize) -> GridFunction {
    let coeffs: Vec<(f64, f64)> = (1..=modes)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    circle(n, l, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let w = TAU * (k + 1) as f64 * x / l;
                a * w.cos() + b * w.sin()
            })
            .sum()
    })
}

#[test]
fn off_grid_shifts_compose() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let l = 2.5;
    for _ in 0..20 {
        let u = random_profile(&mut rng, 64, l, 8);
        let a = 0.3 * l;
        let b = rng.gen_range(0.0..l);
        let twice = shift(&shift(&u, a).unwrap(), b).unwrap();
        let once = shift(&u, a + b).unwrap();
        assert!(twice.max_distance(&once).unwrap() < 1e-10);
    }
}

#[test]
fn distance_between_modes_matches_dense_scan() {
    let l = TAU;
    let u = circle(64, l, f64::sin);
    let v = circle(64, l, |x| (2.0 * x).sin());
    let sv = Shifter::new(&v).unwrap();
    let brute = (0..4096)
        .map(|i| {
            let s = sv.shifted(i as f64 * l / 4096.0);
            u.values().iter().zip(&s).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let d = orbit_distance(&u, &v, 64).unwrap();
    assert!(d <= brute + 1e-12);
    assert!(brute - d < 1e-4, "{d} vs {brute}");
}

#[test]
fn hausdorff_identity_on_shift_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 256;
    let l = 3.0;
    for _ in 0..20 {
        let u = random_profile(&mut rng, n, l, 6);
        let v = random_profile(&mut rng, n, l, 6);
        let (uv, vv) = (u.values(), v.values());
        let rot = |w: &[f64], m: usize| -> Vec<f64> { (0..n).map(|j| w[(j + m) % n]).collect() };
        let dist = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let us: Vec<Vec<f64>> = (0..n).map(|m| rot(uv, m)).collect();
        let vs: Vec<Vec<f64>> = (0..n).map(|m| rot(vv, m)).collect();
        let one_sided = |p: &[Vec<f64>], q: &[Vec<f64>]| {
            p.iter()
                .map(|a| q.iter().map(|b| dist(a, b)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let hausdorff = one_sided(&us, &vs).max(one_sided(&vs, &us));
        let d = orbit_distance_on_grid(&u, &v, n).unwrap().distance;
        assert!((d - hausdorff).abs() < 1e-8);
    }
}

#[test]
fn period_cross_checked_by_shift_scan() {
    let l = 4.0;
    let u = circle(128, l, |x| (TAU * x / l).sin() + 0.5 * (3.0 * TAU * x / l).sin());
    assert_eq!(smallest_period(&u, 1e-8).unwrap().length, l);
    let sv = Shifter::new(&u).unwrap();
    let near_zero = (1..128)
        .filter(|&i| {
            let s = sv.shifted(i as f64 * l / 128.0);
            u.values().iter().zip(&s).all(|(p, q)| (p - q).abs() < 1e-8)
        })
        .count();
    assert_eq!(near_zero, 0);
    let three = circle(128, l, |x| (3.0 * TAU * x / l).cos() + 0.2 * (6.0 * TAU * x / l).sin());
    assert!((smallest_period(&three, 1e-8).unwrap().length - l / 3.0).abs() < 1e-14);
}

#[test]
fn argmax_matches_dense_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let l = TAU;
    for _ in 0..30 {
        let u = random_profile(&mut rng, 64, l, 3);
        let interp = TrigInterpolant::new(&u);
        let fine = 64 * 64;
        let (xs, _) = (0..fine)
            .map(|i| {
                let x = i as f64 * l / fine as f64;
                (x, interp.eval(x))
            })
            .fold((0.0, f64::NEG_INFINITY), |b, p| if p.1 > b.1 { p } else { b });
        let m = max_phase(&u, None).unwrap();
        let gap = (m.c - xs).rem_euclid(l);
        assert!(gap.min(l - gap) <= l / fine as f64, "{} vs {xs}", m.c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn orbit_distance_is_a_pseudometric(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = 2.0;
        let u = random_profile(&mut rng, 64, l, 4);
        let v = random_profile(&mut rng, 64, l, 4);
        let w = random_profile(&mut rng, 64, l, 4);
        let duv = orbit_distance(&u, &v, 64).unwrap();
        let dvu = orbit_distance(&v, &u, 64).unwrap();
        let dvw = orbit_distance(&v, &w, 64).unwrap();
        let duw = orbit_distance(&u, &w, 64).unwrap();
        prop_assert!((duv - dvu).abs() < 1e-8);
        prop_assert!(duw <= duv + dvw + 1e-8);
        let a = rng.gen_range(0.0..l);
        prop_assert!(orbit_distance(&u, &shift(&u, a).unwrap(), 64).unwrap() < 1e-9);
    }

    #[test]
    fn max_phase_is_equivariant(seed in 0u64..100_000, a in 0.0f64..TAU) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = TAU;
        let u = random_profile(&mut rng, 64, l, 3);
        let c = max_phase(&u, None).unwrap().c;
        let cs = max_phase(&shift(&u, a).unwrap(), None).unwrap().c;
        let expect = reduce_shift(c - a, l);
        let gap = (cs - expect).rem_euclid(l);
        prop_assert!(gap.min(l - gap) < l / (64.0 * 64.0), "{} vs {}", cs, expect);
    }
}
