use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewlab::torus::{
    check_monotone, derived_equation, integrate_torus_ode, iterate_map, omega_limit_circle, poincare_map,
    rotation_number, OmegaClass, TorusTerm, TorusVectorField, Trig,
};

/// Periodic trapezoid rule; spectrally accurate for analytic periodic integrands.
fn periodic_quadrature(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    (0..m).map(|i| f(i as f64 / m as f64)).sum::<f64>() / m as f64
}

fn forced_arnold(a: f64, k: f64, c: f64) -> TorusVectorField {
    let mut terms = TorusVectorField::arnold(a, k).terms().to_vec();
    terms.push(TorusTerm {
        coeff: c,
        j: 1,
        m: 0,
        trig: Trig::Cos,
    });
    terms.push(TorusTerm {
        coeff: 0.5 * c,
        j: 1,
        m: 1,
        trig: Trig::Sin,
    });
    TorusVectorField::new(terms)
}

#[test]
fn autonomous_period_matches_quadrature() {
    let (a, b) = (1.0, 0.5);
    let vf = TorusVectorField::autonomous_cosine(a, b);
    let period = periodic_quadrature(|x| 1.0 / (a + b * (TAU * x).cos()), 256);
    assert!((period - 1.0 / (a * a - b * b as f64).sqrt()).abs() < 1e-12);
    let tr = integrate_torus_ode(&vf, 0.0, period, 1e-3).unwrap();
    assert!((tr.x.last().unwrap() - 1.0).abs() < 1e-10);

    for n in [100, 1000, 4000] {
        let est = rotation_number(&vf, 0.1, n, 1e-3).unwrap();
        assert!((est.rho - 1.0 / period).abs() < 2.0 / n as f64, "n = {n}: {}", est.rho);
        assert!(est.spread < 4.0 / n as f64);
    }
}

#[test]
fn rigid_rotation_is_exact() {
    let vf = TorusVectorField::constant(0.3);
    let est = rotation_number(&vf, 0.0, 1000, 1e-3).unwrap();
    assert!(est.table.iter().all(|&(_, r)| r == 0.3));
    assert_eq!(est.rho, 0.3);
    assert_eq!(est.spread, 0.0);

    let time_dependent = TorusVectorField::new(vec![
        TorusTerm::constant(0.3),
        TorusTerm {
            coeff: 0.7,
            j: 2,
            m: 0,
            trig: Trig::Sin,
        },
    ]);
    let tr = integrate_torus_ode(&time_dependent, 0.2, 1.0, 1e-3).unwrap();
    assert!((tr.x.last().unwrap() - poincare_map(&time_dependent, 0.2, 1e-3).unwrap()).abs() < 1e-12);
}

#[test]
fn round_trip_returns_to_start() {
    let vf = forced_arnold(0.4, 0.8, 0.3);
    let fwd = integrate_torus_ode(&vf, 0.37, 3.0, 1e-3).unwrap();
    let x1 = *fwd.x.last().unwrap();
    // one-periodicity in t: the solution through (3, x1) is the one through (0, x1) shifted by 3
    let rev = integrate_torus_ode(&vf, x1, -3.0, 1e-3).unwrap();
    assert!((rev.x.last().unwrap() - 0.37).abs() < 1e-9);
}

#[test]
fn lift_commutes_with_integer_translation() {
    let vf = forced_arnold(0.45, 0.9, 0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let eta: f64 = rng.gen_range(-2.0..2.0);
        let a = poincare_map(&vf, eta, 1e-3).unwrap();
        let b = poincare_map(&vf, eta + 1.0, 1e-3).unwrap();
        assert!((b - a - 1.0).abs() < 1e-10);
    }
    check_monotone(&vf, 1e-3, 200).unwrap();
}

#[test]
fn poincare_map_survives_step_refinement() {
    let vf = TorusVectorField::arnold(0.6, 0.8);
    for eta in [0.0, 0.25, 0.7] {
        let coarse = poincare_map(&vf, eta, 1e-3).unwrap();
        let fine = poincare_map(&vf, eta, 1e-4).unwrap();
        assert!((coarse - fine).abs() < 1e-8);
    }
}

/// Cobweb oracle: iterate the map until the tail repeats modulo integers.
fn cobweb_plateau(vf: &TorusVectorField, dt: f64) -> (i64, u32) {
    let orbit = iterate_map(vf, 0.0, 2000, dt).unwrap();
    let n = orbit.len() - 1;
    for q in 1..=50u32 {
        let d = orbit[n] - orbit[n - q as usize];
        if (d - d.round()).abs() < 1e-9 {
            let p = d.round() as i64;
            let g = gcd(p.unsigned_abs() as u32, q).max(1);
            return (p / g as i64, q / g);
        }
    }
    panic!("no plateau");
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `0.5 + (1/2π) sin 2πx + 0.3 sin 2π(2x − t)`: the last term resonates at ρ = 1/2.
fn half_resonant() -> TorusVectorField {
    let mut terms = TorusVectorField::arnold(0.5, 1.0).terms().to_vec();
    terms.push(TorusTerm {
        coeff: 0.3,
        j: -1,
        m: 2,
        trig: Trig::Sin,
    });
    TorusVectorField::new(terms)
}

#[test]
fn locked_field_has_rational_plateau() {
    let vf = half_resonant();
    let (p, q) = cobweb_plateau(&vf, 5e-4);
    let est = rotation_number(&vf, 0.1, 2000, 1e-3).unwrap();
    assert_eq!(est.locked, Some((p, q)));
    assert!(est.spread < 1e-9);
    assert!((est.rho - p as f64 / q as f64).abs() < 1e-12);
    assert_eq!((p, q), (1, 2));
}

#[test]
fn rigid_irrational_is_dense_and_rational_is_periodic() {
    let alpha = 2f64.sqrt() - 1.0;
    let om = omega_limit_circle(&TorusVectorField::constant(alpha), 0.0, 10_000, 1e-3).unwrap();
    assert_eq!(om.classification, OmegaClass::Dense);
    assert!(om.gaps[0].largest_gap < 3.0 / 1e4);

    let third = omega_limit_circle(&TorusVectorField::constant(1.0 / 3.0), 0.0, 10_000, 1e-3).unwrap();
    assert_eq!(third.classification, OmegaClass::Periodic { p: 1, q: 3 });
    assert_eq!(third.points.len(), 3);
    for (x, e) in third.points.iter().zip([0.0, 1.0 / 3.0, 2.0 / 3.0]) {
        let d = (x - e).rem_euclid(1.0);
        assert!(d.min(1.0 - d) < 1e-9);
    }
}

#[test]
fn classification_stable_under_step_halving() {
    let vf = TorusVectorField::arnold(0.5 * (5f64.sqrt() - 1.0), 0.3);
    let a = omega_limit_circle(&vf, 0.0, 10_000, 1e-3).unwrap();
    assert_eq!(a.classification, OmegaClass::Dense);
    let b = omega_limit_circle(&vf, 0.0, 10_000, 5e-4).unwrap();
    assert_eq!(a.classification, b.classification);
}

#[test]
fn derived_equation_for_rigid_rotation_is_static() {
    let rho = 0.3;
    let run = derived_equation(&TorusVectorField::constant(rho), rho, 0.42, 50.0, 1e-3).unwrap();
    assert!(run.trajectory.x.iter().all(|&x| x == 0.42));
    assert_eq!(run.sup_deviation, 0.0);
}

#[test]
fn derived_solution_stays_bounded() {
    let vf = forced_arnold(0.62, 0.4, 0.2);
    let rho = rotation_number(&vf, 0.0, 4000, 1e-3).unwrap().rho;
    let coarse = derived_equation(&vf, rho, 0.0, 1000.0, 1e-3).unwrap();
    let fine = derived_equation(&vf, rho, 0.0, 1000.0, 5e-4).unwrap();
    // lift displacement minus nρ stays within one unit for circle homeomorphisms
    assert!(coarse.sup_deviation < 2.0, "{}", coarse.sup_deviation);
    for (c, f) in coarse.deviation_table.iter().zip(&fine.deviation_table) {
        assert_eq!(c.0, f.0);
        assert!((c.1 - f.1).abs() < 1e-6);
    }
}
