//! Quasi-periodic forcing fields `f(t, u, p)` and their hull.
//!
//! A field is a finite sum of terms `c · trig(2π m·θ) · φ(u, p)` where `θ`
//! is a phase on the k-torus and `φ` is drawn from a closed symbolic family,
//! so every partial derivative is exact. The hull of such a field is the
//! torus itself: a [`BasePoint`] identifies a hull element and the base flow
//! is `θ ↦ θ + ωt (mod 1)`.

use std::f64::consts::TAU;
use std::fmt;

use thiserror::Error;

/// Largest denominator considered by the rational-dependence heuristic.
pub const RESONANCE_MAX_DENOMINATOR: u32 = 1000;
/// Distance below which a frequency ratio is treated as rational.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForcingError {
    #[error("forcing needs at least one frequency")]
    NoFrequencies,
    #[error("frequency {index} is {value}; frequencies must be finite and nonzero")]
    InvalidFrequency { index: usize, value: f64 },
    #[error("term {term}: torus mode has {got} entries, expected {expected}")]
    ModeLength {
        term: usize,
        got: usize,
        expected: usize,
    },
    #[error("term {term}: coefficient must be finite")]
    InvalidCoefficient { term: usize },
    #[error("term {term}: factor {factor} is incompatible with the {flag} symmetry flag")]
    SymmetryViolation {
        term: usize,
        factor: Factor,
        flag: &'static str,
    },
    #[error("base points live on tori of different dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("series has {0} samples; at least 10 are needed")]
    InsufficientData(usize),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
}

/// Reduce a real number into `[0, 1)`.
pub(crate) fn reduce_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Element of the hull, identified with a phase on the k-torus.
#[derive(Debug, Clone, PartialEq)]
pub struct BasePoint {
    phase: Vec<f64>,
}

impl BasePoint {
    pub fn new(phase: Vec<f64>) -> Self {
        Self {
            phase: phase.into_iter().map(reduce_unit).collect(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            phase: vec![0.0; dim],
        }
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn dim(&self) -> usize {
        self.phase.len()
    }

    /// The base flow `g · τ`.
    pub fn translate(&self, tau: f64, frequencies: &[f64]) -> BasePoint {
        translate(self, tau, frequencies)
    }
}

/// `θ ↦ (θ + ωτ) mod 1`.
pub fn translate(base: &BasePoint, tau: f64, frequencies: &[f64]) -> BasePoint {
    debug_assert_eq!(base.dim(), frequencies.len());
    BasePoint {
        phase: base
            .phase
            .iter()
            .zip(frequencies)
            .map(|(theta, omega)| reduce_unit(theta + omega * tau))
            .collect(),
    }
}

/// Circle distance on each coordinate, maximized over coordinates. Always in `[0, 0.5]`.
pub fn hull_distance(b1: &BasePoint, b2: &BasePoint) -> Result<f64, ForcingError> {
    if b1.dim() != b2.dim() {
        return Err(ForcingError::DimensionMismatch(b1.dim(), b2.dim()));
    }
    Ok(b1
        .phase
        .iter()
        .zip(&b2.phase)
        .map(|(a, b)| circle_gap(a - b))
        .fold(0.0, f64::max))
}

pub(crate) fn circle_gap(delta: f64) -> f64 {
    let d = reduce_unit(delta);
    d.min(1.0 - d)
}

/// Trigonometric carrier of a torus mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusTrig {
    Cos,
    Sin,
}

/// The `(u, p)`-dependence of a term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    One,
    U,
    U2,
    U3,
    P,
    P2,
    UP,
    SinU(f64),
    CosU(f64),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::One => write!(f, "1"),
            Factor::U => write!(f, "u"),
            Factor::U2 => write!(f, "u^2"),
            Factor::U3 => write!(f, "u^3"),
            Factor::P => write!(f, "p"),
            Factor::P2 => write!(f, "p^2"),
            Factor::UP => write!(f, "u*p"),
            Factor::SinU(b) => write!(f, "sin({b}u)"),
            Factor::CosU(b) => write!(f, "cos({b}u)"),
        }
    }
}

impl Factor {
    #[inline]
    pub fn value(self, u: f64, p: f64) -> f64 {
        match self {
            Factor::One => 1.0,
            Factor::U => u,
            Factor::U2 => u * u,
            Factor::U3 => u * u * u,
            Factor::P => p,
            Factor::P2 => p * p,
            Factor::UP => u * p,
            Factor::SinU(b) => (b * u).sin(),
            Factor::CosU(b) => (b * u).cos(),
        }
    }

    /// `(∂φ/∂u, ∂φ/∂p)`.
    #[inline]
    pub fn partials(self, u: f64, p: f64) -> (f64, f64) {
        match self {
            Factor::One => (0.0, 0.0),
            Factor::U => (1.0, 0.0),
            Factor::U2 => (2.0 * u, 0.0),
            Factor::U3 => (3.0 * u * u, 0.0),
            Factor::P => (0.0, 1.0),
            Factor::P2 => (0.0, 2.0 * p),
            Factor::UP => (p, u),
            Factor::SinU(b) => (b * (b * u).cos(), 0.0),
            Factor::CosU(b) => (-b * (b * u).sin(), 0.0),
        }
    }

    fn odd_in_p(self) -> bool {
        matches!(self, Factor::P | Factor::UP)
    }

    fn even_in_u(self) -> bool {
        matches!(
            self,
            Factor::One | Factor::U2 | Factor::P | Factor::P2 | Factor::CosU(_)
        )
    }

    fn nonzero_at_u0(self) -> bool {
        matches!(self, Factor::One | Factor::P | Factor::P2 | Factor::CosU(_))
    }
}

/// One summand `coeff · trig(2π mode·θ) · factor(u, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub mode: Vec<i64>,
    pub trig: TorusTrig,
    pub factor: Factor,
}

impl Term {
    /// A term with no torus dependence.
    pub fn autonomous(coeff: f64, factor: Factor, dim: usize) -> Self {
        Self {
            coeff,
            mode: vec![0; dim],
            trig: TorusTrig::Cos,
            factor,
        }
    }
}

/// Symmetries the field is required to satisfy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SymmetryFlags {
    /// `f(t, u, -p) = f(t, u, p)`
    pub even_in_p: bool,
    /// `f(t, -u, p) = -f(t, u, p)`
    pub odd_in_u: bool,
    /// `f(t, 0, p) = 0`
    pub zero_at_u0: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForcingField {
    frequencies: Vec<f64>,
    terms: Vec<Term>,
    symmetry: SymmetryFlags,
    warnings: Vec<String>,
}

impl ForcingField {
    pub fn new(
        frequencies: Vec<f64>,
        terms: Vec<Term>,
        symmetry: SymmetryFlags,
    ) -> Result<Self, ForcingError> {
        if frequencies.is_empty() {
            return Err(ForcingError::NoFrequencies);
        }
        for (index, &value) in frequencies.iter().enumerate() {
            if !value.is_finite() || value == 0.0 {
                return Err(ForcingError::InvalidFrequency { index, value });
            }
        }
        let k = frequencies.len();
        for (i, term) in terms.iter().enumerate() {
            if term.mode.len() != k {
                return Err(ForcingError::ModeLength {
                    term: i,
                    got: term.mode.len(),
                    expected: k,
                });
            }
            if !term.coeff.is_finite() {
                return Err(ForcingError::InvalidCoefficient { term: i });
            }
            let checks = [
                (symmetry.even_in_p && term.factor.odd_in_p(), "even_in_p"),
                (symmetry.odd_in_u && term.factor.even_in_u(), "odd_in_u"),
                (
                    symmetry.zero_at_u0 && term.factor.nonzero_at_u0(),
                    "zero_at_u0",
                ),
            ];
            if let Some((_, flag)) = checks.iter().find(|(bad, _)| *bad) {
                return Err(ForcingError::SymmetryViolation {
                    term: i,
                    factor: term.factor,
                    flag,
                });
            }
        }
        let warnings = resonance_warnings(&frequencies);
        Ok(Self {
            frequencies,
            terms,
            symmetry,
            warnings,
        })
    }

    /// The identically zero field with a single frequency.
    pub fn zero() -> Self {
        Self::new(vec![1.0], Vec::new(), SymmetryFlags::default()).expect("valid")
    }

    /// A field with no torus dependence, built from `(coeff, factor)` pairs.
    pub fn autonomous(terms: &[(f64, Factor)]) -> Result<Self, ForcingError> {
        Self::new(
            vec![1.0],
            terms
                .iter()
                .map(|&(c, f)| Term::autonomous(c, f, 1))
                .collect(),
            SymmetryFlags::default(),
        )
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn symmetry(&self) -> SymmetryFlags {
        self.symmetry
    }

    pub fn dim(&self) -> usize {
        self.frequencies.len()
    }

    /// Resonance warnings recorded at construction.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Torus carriers of every term at phase `θ + ωt`.
    pub fn torus_factors(&self, base: &BasePoint, t: f64) -> Vec<f64> {
        let phase: Vec<f64> = base
            .phase()
            .iter()
            .zip(&self.frequencies)
            .map(|(theta, omega)| reduce_unit(theta + omega * t))
            .collect();
        self.terms
            .iter()
            .map(|term| {
                let arg: f64 = term
                    .mode
                    .iter()
                    .zip(&phase)
                    .map(|(&m, &ph)| m as f64 * ph)
                    .sum::<f64>()
                    * TAU;
                match term.trig {
                    TorusTrig::Cos => arg.cos(),
                    TorusTrig::Sin => arg.sin(),
                }
            })
            .collect()
    }

    /// Freeze the torus dependence at `(base, t)`; the result is a function of `(u, p)` only.
    pub fn freeze(&self, base: &BasePoint, t: f64) -> FrozenField<'_> {
        let weights = self
            .torus_factors(base, t)
            .into_iter()
            .zip(&self.terms)
            .map(|(carrier, term)| carrier * term.coeff)
            .collect();
        FrozenField {
            terms: &self.terms,
            weights,
        }
    }

    /// `g(t, u, p)` where `g` is the hull element named by `base`.
    pub fn eval(&self, base: &BasePoint, t: f64, u: f64, p: f64) -> f64 {
        self.freeze(base, t).value(u, p)
    }

    /// Exact `(g_u, g_p)`.
    pub fn eval_partials(&self, base: &BasePoint, t: f64, u: f64, p: f64) -> (f64, f64) {
        self.freeze(base, t).partials(u, p)
    }

    pub fn translate(&self, base: &BasePoint, tau: f64) -> BasePoint {
        translate(base, tau, &self.frequencies)
    }
}

/// A forcing field with its torus dependence evaluated at one instant.
#[derive(Debug, Clone)]
pub struct FrozenField<'a> {
    terms: &'a [Term],
    weights: Vec<f64>,
}

impl FrozenField<'_> {
    #[inline]
    pub fn value(&self, u: f64, p: f64) -> f64 {
        self.terms
            .iter()
            .zip(&self.weights)
            .map(|(term, w)| w * term.factor.value(u, p))
            .sum()
    }

    #[inline]
    pub fn partials(&self, u: f64, p: f64) -> (f64, f64) {
        self.terms
            .iter()
            .zip(&self.weights)
            .fold((0.0, 0.0), |(fu, fp), (term, w)| {
                let (du, dp) = term.factor.partials(u, p);
                (fu + w * du, fp + w * dp)
            })
    }
}

fn resonance_warnings(frequencies: &[f64]) -> Vec<String> {
    let mut warnings = Vec::new();
    for i in 0..frequencies.len() {
        for j in (i + 1)..frequencies.len() {
            let ratio = (frequencies[i] / frequencies[j]).abs();
            if let Some((p, q)) = near_rational(ratio, RESONANCE_MAX_DENOMINATOR, RESONANCE_TOLERANCE)
            {
                warnings.push(format!(
                    "frequencies {i} and {j} have ratio {ratio} within {RESONANCE_TOLERANCE:e} of {p}/{q}"
                ));
            }
        }
    }
    warnings
}

/// Smallest-denominator rational `p/q` with `q ≤ max_den` and `|x - p/q| < tol`.
pub fn near_rational(x: f64, max_den: u32, tol: f64) -> Option<(i64, u32)> {
    (1..=max_den).find_map(|q| {
        let p = (x * q as f64).round();
        ((x - p / q as f64).abs() < tol).then_some((p as i64, q))
    })
}

/// Result of scanning a sampled signal for ε-almost-periods.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostPeriodScan {
    /// Lags in samples.
    pub lags: Vec<usize>,
    /// Lags in time units.
    pub periods: Vec<f64>,
    /// Largest gap between consecutive almost-periods (including the gap from 0), in time units.
    pub max_gap: Option<f64>,
    pub mean_gap: Option<f64>,
    /// Longest lag examined, in time units.
    pub horizon: f64,
}

impl AlmostPeriodScan {
    /// Relatively dense in the sense that the largest gap is at most `ratio` times the mean gap.
    pub fn is_relatively_dense(&self, ratio: f64) -> bool {
        match (self.max_gap, self.mean_gap) {
            (Some(max), Some(mean)) => max <= ratio * mean,
            _ => false,
        }
    }
}

/// Every lag `τ` on the sample grid (up to half the record, so the overlap is at least
/// half the record) with `sup_t |s(t + τ) - s(t)| < ε` over the overlap.
pub fn almost_period_scan(series: &[f64], dt: f64, eps: f64) -> Result<AlmostPeriodScan, ForcingError> {
    if series.len() < 10 {
        return Err(ForcingError::InsufficientData(series.len()));
    }
    if !(eps > 0.0) {
        return Err(ForcingError::InvalidEpsilon(eps));
    }
    let n = series.len();
    let max_lag = n / 2;
    let lags: Vec<usize> = (1..=max_lag)
        .filter(|&lag| {
            series[..n - lag]
                .iter()
                .zip(&series[lag..])
                .all(|(a, b)| (b - a).abs() < eps)
        })
        .collect();
    let mut gaps = Vec::with_capacity(lags.len());
    let mut prev = 0usize;
    for &lag in &lags {
        gaps.push((lag - prev) as f64 * dt);
        prev = lag;
    }
    let max_gap = gaps.iter().copied().reduce(f64::max);
    let mean_gap = (!gaps.is_empty()).then(|| gaps.iter().sum::<f64>() / gaps.len() as f64);
    Ok(AlmostPeriodScan {
        periods: lags.iter().map(|&l| l as f64 * dt).collect(),
        lags,
        max_gap,
        mean_gap,
        horizon: max_lag as f64 * dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_tone() -> ForcingField {
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
                    coeff: 1.0,
                    mode: vec![0, 1],
                    trig: TorusTrig::Sin,
                    factor: Factor::One,
                },
            ],
            SymmetryFlags::default(),
        )
        .unwrap()
    }

    #[test]
    fn cubic_root_evaluates_to_zero() {
        let f = ForcingField::autonomous(&[(1.0, Factor::U), (-1.0, Factor::U3)]).unwrap();
        assert_eq!(f.eval(&BasePoint::new(vec![0.37]), 4.2, 1.0, 0.0), 0.0);
    }

    #[test]
    fn two_tone_scalar_value() {
        let f = two_tone();
        let v = f.eval(&BasePoint::origin(2), 0.25, 0.3, -1.2);
        let expected = 1.0 + (std::f64::consts::PI * 2f64.sqrt() / 2.0).sin();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 1.795693, epsilon = 1e-6);
    }

    #[test]
    fn cocycle_identity() {
        let f = two_tone();
        let b = BasePoint::new(vec![0.1, 0.7]);
        let direct = f.eval(&b, 1.0, 0.4, 0.2);
        let shifted = f.eval(&f.translate(&b, 0.3), 0.7, 0.4, 0.2);
        assert_abs_diff_eq!(direct, shifted, epsilon = 1e-12);
    }

    #[test]
    fn polynomial_partials() {
        let f = ForcingField::autonomous(&[(1.0, Factor::U3), (1.0, Factor::P2)]).unwrap();
        let b = BasePoint::origin(1);
        let (fu, fp) = f.eval_partials(&b, 0.0, 2.0, 0.0);
        assert_eq!(fu, 12.0);
        assert_eq!(fp, 0.0);
    }

    #[test]
    fn translate_examples() {
        let b = translate(&BasePoint::origin(1), 1.0, &[1.0]);
        assert_eq!(b.phase(), &[0.0]);
        let b = translate(&BasePoint::origin(2), 1.0, &[1.0, 2f64.sqrt()]);
        assert_abs_diff_eq!(b.phase()[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.phase()[1], 2f64.sqrt() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.phase()[1], 0.41421, epsilon = 1e-5);
        let b0 = BasePoint::new(vec![0.3, 0.9]);
        assert_eq!(translate(&b0, 0.0, &[1.0, 2f64.sqrt()]), b0);
    }

    #[test]
    fn hull_distance_examples() {
        let a = BasePoint::new(vec![0.1]);
        assert_eq!(hull_distance(&a, &a).unwrap(), 0.0);
        assert_abs_diff_eq!(
            hull_distance(&a, &BasePoint::new(vec![0.9])).unwrap(),
            0.2,
            epsilon = 1e-15
        );
        assert_eq!(
            hull_distance(&BasePoint::origin(2), &BasePoint::new(vec![0.5, 0.25])).unwrap(),
            0.5
        );
        assert!(matches!(
            hull_distance(&a, &BasePoint::origin(2)),
            Err(ForcingError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn symmetry_flags_reject_bad_factors() {
        let flags = SymmetryFlags {
            even_in_p: true,
            ..Default::default()
        };
        let err = ForcingField::new(vec![1.0], vec![Term::autonomous(1.0, Factor::UP, 1)], flags)
            .unwrap_err();
        assert!(matches!(err, ForcingError::SymmetryViolation { flag: "even_in_p", .. }));

        let flags = SymmetryFlags {
            odd_in_u: true,
            ..Default::default()
        };
        assert!(ForcingField::new(vec![1.0], vec![Term::autonomous(1.0, Factor::CosU(2.0), 1)], flags).is_err());
        assert!(ForcingField::new(vec![1.0], vec![Term::autonomous(1.0, Factor::SinU(2.0), 1)], flags).is_ok());

        let flags = SymmetryFlags {
            zero_at_u0: true,
            ..Default::default()
        };
        assert!(ForcingField::new(vec![1.0], vec![Term::autonomous(1.0, Factor::P2, 1)], flags).is_err());
        assert!(ForcingField::new(vec![1.0], vec![Term::autonomous(1.0, Factor::U2, 1)], flags).is_ok());
    }

    #[test]
    fn invalid_frequencies() {
        assert_eq!(
            ForcingField::new(vec![], vec![], SymmetryFlags::default()).unwrap_err(),
            ForcingError::NoFrequencies
        );
        assert!(ForcingField::new(vec![1.0, 0.0], vec![], SymmetryFlags::default()).is_err());
    }

    #[test]
    fn resonance_is_warned_not_rejected() {
        let f = ForcingField::new(vec![1.0, 1.5], vec![], SymmetryFlags::default()).unwrap();
        assert_eq!(f.warnings().len(), 1);
        let g = ForcingField::new(vec![1.0, 2f64.sqrt()], vec![], SymmetryFlags::default()).unwrap();
        assert!(g.warnings().is_empty());
    }

    #[test]
    fn almost_periods_of_a_sine() {
        let dt = TAU / 100.0;
        let series: Vec<f64> = (0..1000).map(|i| (i as f64 * dt).sin()).collect();
        let scan = almost_period_scan(&series, dt, 1e-6).unwrap();
        assert_eq!(scan.lags, vec![100, 200, 300, 400, 500]);
        for (k, p) in scan.periods.iter().enumerate() {
            assert_abs_diff_eq!(*p, TAU * (k + 1) as f64, epsilon = dt);
        }
        assert_abs_diff_eq!(scan.max_gap.unwrap(), TAU, epsilon = 1e-9);
    }

    #[test]
    fn constant_series_every_lag() {
        let scan = almost_period_scan(&[2.0; 40], 0.1, 1e-12).unwrap();
        assert_eq!(scan.lags, (1..=20).collect::<Vec<_>>());
    }

    #[test]
    fn almost_period_scan_errors() {
        assert_eq!(
            almost_period_scan(&[0.0; 9], 0.1, 0.1).unwrap_err(),
            ForcingError::InsufficientData(9)
        );
        assert!(almost_period_scan(&[0.0; 20], 0.1, 0.0).is_err());
    }
}
