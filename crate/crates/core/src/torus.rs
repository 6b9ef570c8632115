//! Time-periodic circle ODEs `ẋ = f(t, x)` with `f` one-periodic in both
//! arguments: Poincaré maps, rotation numbers, ω-limit diagnostics and the
//! derived quasi-periodic equation `ẋ = f(t, x + ρt) − ρ`.

use std::f64::consts::TAU;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

pub const MAX_DT: f64 = 1e-3;
pub const MIN_ROTATION_ITERATES: usize = 100;
pub const MIN_OMEGA_ITERATES: usize = 10_000;
pub const MAX_PERIOD: u32 = 100;
pub const PERIODIC_TOLERANCE: f64 = 1e-9;
/// Log-log slope of the largest gap below which iterates are called dense.
pub const DENSE_SLOPE: f64 = -0.5;
/// Largest gaps staying above this across all doublings indicate a gap.
pub const GAP_FLOOR: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorusError {
    #[error("time step {0} must lie in (0, {MAX_DT}]")]
    InvalidStep(f64),
    #[error("{got} iterates requested; at least {required} are needed")]
    TooFewIterates { got: usize, required: usize },
    #[error("Poincaré map lift is not monotone between η = {lo} and η = {hi}; reduce dt")]
    NotMonotone { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

/// `coeff · trig(2π(j t + m x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusTerm {
    pub coeff: f64,
    pub j: i32,
    pub m: i32,
    pub trig: Trig,
}

impl TorusTerm {
    pub fn constant(c: f64) -> Self {
        Self {
            coeff: c,
            j: 0,
            m: 0,
            trig: Trig::Cos,
        }
    }

    fn eval(&self, t: f64, x: f64) -> f64 {
        let arg = TAU * (self.j as f64 * t + self.m as f64 * x);
        self.coeff
            * match self.trig {
                Trig::Cos => arg.cos(),
                Trig::Sin => arg.sin(),
            }
    }
}

/// Finite trigonometric field on the torus; one-periodic in `t` and `x` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusVectorField {
    terms: Vec<TorusTerm>,
}

impl TorusVectorField {
    pub fn new(terms: Vec<TorusTerm>) -> Self {
        Self { terms }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![TorusTerm::constant(c)])
    }

    /// `a + b cos(2πx)`.
    pub fn autonomous_cosine(a: f64, b: f64) -> Self {
        Self::new(vec![
            TorusTerm::constant(a),
            TorusTerm {
                coeff: b,
                j: 0,
                m: 1,
                trig: Trig::Cos,
            },
        ])
    }

    /// `a + (k/2π) sin(2πx)`.
    pub fn arnold(a: f64, k: f64) -> Self {
        Self::new(vec![
            TorusTerm::constant(a),
            TorusTerm {
                coeff: k / TAU,
                j: 0,
                m: 1,
                trig: Trig::Sin,
            },
        ])
    }

    pub fn terms(&self) -> &[TorusTerm] {
        &self.terms
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t, x)).sum()
    }

    /// Independent of `x`: the Poincaré map is a rigid rotation.
    pub fn is_rigid(&self) -> bool {
        self.terms.iter().all(|t| t.m == 0 || t.coeff == 0.0)
    }

    /// `∫₀¹ f(t, ·) dt` for rigid fields: only the `j = 0` cosine terms survive.
    fn rigid_rotation(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.j == 0 && t.trig == Trig::Cos)
            .map(|t| t.coeff)
            .sum()
    }
}

fn check_dt(dt: f64) -> Result<(), TorusError> {
    if dt > 0.0 && dt <= MAX_DT {
        Ok(())
    } else {
        Err(TorusError::InvalidStep(dt))
    }
}

fn rk4(rhs: impl Fn(f64, f64) -> f64, t0: f64, x0: f64, t_end: f64, dt: f64, mut visit: impl FnMut(f64, f64)) -> f64 {
    let span = t_end - t0;
    let steps = (span.abs() / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut x = x0;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let k1 = rhs(t, x);
        let k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
        let k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
        let k4 = rhs(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        visit(t0 + (i + 1) as f64 * h, x);
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusTrajectory {
    pub times: Vec<f64>,
    /// Lift values, not reduced mod 1.
    pub x: Vec<f64>,
}

/// Fourth-order fixed-step solution of the lift from `x(0) = η` to `t_end`
/// (which may be negative).
pub fn integrate_torus_ode(vf: &TorusVectorField, eta: f64, t_end: f64, dt: f64) -> Result<TorusTrajectory, TorusError> {
    check_dt(dt)?;
    let mut times = vec![0.0];
    let mut x = vec![eta];
    rk4(|t, y| vf.eval(t, y), 0.0, eta, t_end, dt, |t, y| {
        times.push(t);
        x.push(y);
    });
    Ok(TorusTrajectory { times, x })
}

/// Time-one lift `ψ(η) = x(1, η)`.
pub fn poincare_map(vf: &TorusVectorField, eta: f64, dt: f64) -> Result<f64, TorusError> {
    check_dt(dt)?;
    Ok(psi(vf, eta, dt))
}

fn psi(vf: &TorusVectorField, eta: f64, dt: f64) -> f64 {
    if vf.is_rigid() {
        eta + vf.rigid_rotation()
    } else {
        rk4(|t, y| vf.eval(t, y), 0.0, eta, 1.0, dt, |_, _| {})
    }
}

/// Check that `ψ` is strictly increasing on `samples` equally spaced points of `[0, 1]`.
pub fn check_monotone(vf: &TorusVectorField, dt: f64, samples: usize) -> Result<(), TorusError> {
    check_dt(dt)?;
    let etas: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
    let values: Vec<f64> = etas.par_iter().map(|&e| psi(vf, e, dt)).collect();
    for i in 0..samples {
        if values[i + 1] <= values[i] {
            return Err(TorusError::NotMonotone {
                lo: etas[i],
                hi: etas[i + 1],
            });
        }
    }
    Ok(())
}

/// Orbit `η, ψ(η), …, ψⁿ(η)` of lift values.
pub fn iterate_map(vf: &TorusVectorField, eta: f64, n: usize, dt: f64) -> Result<Vec<f64>, TorusError> {
    check_dt(dt)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(eta);
    if vf.is_rigid() {
        let alpha = vf.rigid_rotation();
        out.extend((1..=n).map(|k| eta + k as f64 * alpha));
    } else {
        let mut x = eta;
        for _ in 0..n {
            x = psi(vf, x, dt);
            out.push(x);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationEstimate {
    pub rho: f64,
    /// `(k, ρ_k)` for `k = 1, 2, 4, …` and finally `n`.
    pub table: Vec<(usize, f64)>,
    pub seeds: Vec<f64>,
    pub seed_rhos: Vec<f64>,
    pub spread: f64,
    /// Common `p/q` when every seed's tail is periodic.
    pub locked: Option<(i64, u32)>,
}

fn doubling_sequence(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 2)).take_while(|&k| k < n).collect();
    ks.push(n);
    ks
}

fn rho_table(orbit: &[f64], rigid: Option<f64>) -> Vec<(usize, f64)> {
    let n = orbit.len() - 1;
    doubling_sequence(n)
        .into_iter()
        .map(|k| (k, rigid.unwrap_or((orbit[k] - orbit[0]) / k as f64)))
        .collect()
}

/// `ρ_n = (ψⁿ(η) − η)/n` with its doubling table, cross-checked at the seeds
/// `η, η + 1/3, η + 2/3`.
pub fn rotation_number(vf: &TorusVectorField, eta: f64, n: usize, dt: f64) -> Result<RotationEstimate, TorusError> {
    if n < MIN_ROTATION_ITERATES {
        return Err(TorusError::TooFewIterates {
            got: n,
            required: MIN_ROTATION_ITERATES,
        });
    }
    check_dt(dt)?;
    let rigid = vf.is_rigid().then(|| vf.rigid_rotation());
    let seeds: Vec<f64> = (0..3).map(|i| eta + i as f64 / 3.0).collect();
    let runs = seeds
        .par_iter()
        .map(|&s| iterate_map(vf, s, n, dt).map(|o| (rho_table(&o, rigid), detect_period(&o))))
        .collect::<Result<Vec<_>, _>>()?;
    let locked = runs[0].1.filter(|&(p, q)| {
        runs.iter()
            .all(|(_, l)| l.is_some_and(|(p2, q2)| p2 as f64 / q2 as f64 == p as f64 / q as f64))
    });
    let seed_rhos: Vec<f64> = match locked {
        Some((p, q)) => vec![p as f64 / q as f64; 3],
        None => runs.iter().map(|(t, _)| t.last().expect("nonempty table").1).collect(),
    };
    let tables: Vec<_> = runs.into_iter().map(|(t, _)| t).collect();
    let lo = seed_rhos.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = seed_rhos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RotationEstimate {
        rho: seed_rhos[0],
        table: tables.into_iter().next().expect("three seeds"),
        seeds,
        seed_rhos,
        spread: hi - lo,
        locked,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum OmegaClass {
    Dense,
    Gapped,
    /// Neither rule applies at the computed resolutions.
    Undetermined,
    Periodic { p: i64, q: u32 },
}

impl OmegaClass {
    pub fn label(&self) -> String {
        match self {
            Self::Dense => "dense".into(),
            Self::Gapped => "gapped".into(),
            Self::Undetermined => "undetermined".into(),
            Self::Periodic { p, q } => format!("periodic {p}/{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapStat {
    pub n: usize,
    pub largest_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaLimitCircle {
    /// Sorted iterates mod 1 (the periodic orbit alone when periodic).
    pub points: Vec<f64>,
    pub classification: OmegaClass,
    pub gaps: Vec<GapStat>,
    /// Least-squares slope of log largest gap against log n.
    pub slope: Option<f64>,
}

fn largest_gap(points: &[f64]) -> f64 {
    let mut p: Vec<f64> = points.iter().map(|x| x.rem_euclid(1.0)).collect();
    p.sort_by(f64::total_cmp);
    let inner = p.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    inner.max(p[0] + 1.0 - p[p.len() - 1])
}

fn log_slope(stats: &[GapStat]) -> f64 {
    let xs: Vec<f64> = stats.iter().map(|s| (s.n as f64).ln()).collect();
    let ys: Vec<f64> = stats.iter().map(|s| s.largest_gap.max(f64::MIN_POSITIVE).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Periodicity of the tail: smallest `q ≤ 100` with `|x_N − x_{N−q} − p| < 1e-9`.
fn detect_period(orbit: &[f64]) -> Option<(i64, u32)> {
    let n = orbit.len() - 1;
    (1..=MAX_PERIOD.min(n as u32)).find_map(|q| {
        let disp = orbit[n] - orbit[n - q as usize];
        let p = disp.round();
        ((disp - p).abs() < PERIODIC_TOLERANCE).then_some((p as i64, q))
    })
}

/// Iterates of `ψ` mod 1 and a dense/gapped decision from the largest-gap
/// scaling over `n, 2n, 4n, 8n` iterates; periodic orbits are reported instead.
pub fn omega_limit_circle(vf: &TorusVectorField, eta: f64, n: usize, dt: f64) -> Result<OmegaLimitCircle, TorusError> {
    if n < MIN_OMEGA_ITERATES {
        return Err(TorusError::TooFewIterates {
            got: n,
            required: MIN_OMEGA_ITERATES,
        });
    }
    let orbit = iterate_map(vf, eta, 8 * n, dt)?;
    if let Some((p, q)) = detect_period(&orbit) {
        let tail = &orbit[orbit.len() - q as usize..];
        let mut points: Vec<f64> = tail.iter().map(|x| x.rem_euclid(1.0)).collect();
        points.sort_by(f64::total_cmp);
        return Ok(OmegaLimitCircle {
            points,
            classification: OmegaClass::Periodic { p, q },
            gaps: Vec::new(),
            slope: None,
        });
    }
    let gaps: Vec<GapStat> = [1, 2, 4, 8]
        .iter()
        .map(|&m| GapStat {
            n: m * n,
            largest_gap: largest_gap(&orbit[1..=m * n]),
        })
        .collect();
    let slope = log_slope(&gaps);
    let classification = if slope < DENSE_SLOPE {
        OmegaClass::Dense
    } else if gaps.iter().all(|g| g.largest_gap > GAP_FLOOR) {
        OmegaClass::Gapped
    } else {
        OmegaClass::Undetermined
    };
    let mut points: Vec<f64> = orbit[1..].iter().map(|x| x.rem_euclid(1.0)).collect();
    points.sort_by(f64::total_cmp);
    Ok(OmegaLimitCircle {
        points,
        classification,
        gaps,
        slope: Some(slope),
    })
}

/// `ẋ = f(t, x + ρt) − ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedEquation {
    pub field: TorusVectorField,
    pub rho: f64,
}

impl DerivedEquation {
    pub fn new(field: TorusVectorField, rho: f64) -> Self {
        Self { field, rho }
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.field.eval(t, x + self.rho * t) - self.rho
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedRun {
    pub trajectory: TorusTrajectory,
    pub sup_deviation: f64,
    /// `(T, sup_{[0,T]} |x − x(0)|)` at doubling horizons.
    pub deviation_table: Vec<(f64, f64)>,
}

/// Integrate the derived equation from `x0` and monitor `sup |x(t) − x(0)|`.
pub fn derived_equation(
    vf: &TorusVectorField,
    rho: f64,
    x0: f64,
    t_end: f64,
    dt: f64,
) -> Result<DerivedRun, TorusError> {
    check_dt(dt)?;
    let eq = DerivedEquation::new(vf.clone(), rho);
    let mut times = vec![0.0];
    let mut x = vec![x0];
    rk4(|t, y| eq.eval(t, y), 0.0, x0, t_end, dt, |t, y| {
        times.push(t);
        x.push(y);
    });
    let mut running = 0.0f64;
    let mut table = Vec::new();
    let mut next = 1.0;
    for (t, v) in times.iter().zip(&x) {
        running = running.max((v - x0).abs());
        if *t >= next - 1e-12 {
            table.push((*t, running));
            next *= 2.0;
        }
    }
    if table.last().map_or(true, |(t, _)| *t < t_end.abs()) {
        table.push((*times.last().expect("nonempty"), running));
    }
    Ok(DerivedRun {
        trajectory: TorusTrajectory { times, x },
        sup_deviation: running,
        deviation_table: table,
    })
}

pub const ITERATE_CSV_HEADER: &str = "k,x_mod1";
pub const ROTATION_CSV_HEADER: &str = "n,rho_n";

pub fn write_iterate_csv<W: Write>(mut w: W, orbit: &[f64]) -> io::Result<()> {
    writeln!(w, "{ITERATE_CSV_HEADER}")?;
    for (k, x) in orbit.iter().enumerate() {
        writeln!(w, "{k},{}", x.rem_euclid(1.0))?;
    }
    Ok(())
}

pub fn write_rotation_csv<W: Write>(mut w: W, table: &[(usize, f64)]) -> io::Result<()> {
    writeln!(w, "{ROTATION_CSV_HEADER}")?;
    for (n, r) in table {
        writeln!(w, "{n},{r}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_translates_linearly() {
        let tr = integrate_torus_ode(&TorusVectorField::constant(0.5), 0.2, 3.0, 1e-3).unwrap();
        assert!((tr.x.last().unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn step_bound_enforced() {
        assert_eq!(
            poincare_map(&TorusVectorField::constant(1.0), 0.0, 0.01),
            Err(TorusError::InvalidStep(0.01))
        );
    }

    #[test]
    fn zero_field_is_identity() {
        assert_eq!(poincare_map(&TorusVectorField::new(vec![]), 0.37, 1e-3).unwrap(), 0.37);
    }

    #[test]
    fn doubling_table_ends_at_n() {
        assert_eq!(doubling_sequence(100), vec![1, 2, 4, 8, 16, 32, 64, 100]);
        assert_eq!(doubling_sequence(128), vec![1, 2, 4, 8, 16, 32, 64, 128]);
    }

    #[test]
    fn largest_gap_wraps() {
        assert!((largest_gap(&[0.1, 0.2, 0.9]) - 0.7).abs() < 1e-15);
        assert!((largest_gap(&[0.05, 0.5, 0.95]) - 0.45).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_iterate_csv(&mut buf, &[0.25, 1.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,x_mod1\n0,0.25\n1,0.5\n");
        let mut buf = Vec::new();
        write_rotation_csv(&mut buf, &[(1, 0.3)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,rho_n\n1,0.3\n");
    }
}
