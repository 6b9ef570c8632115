//! Fourier transforms, spectral derivatives and trigonometric interpolation on the circle.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::extension::{extend_even_values, extend_odd_values};
use super::grid::{Domain, GridFunction};

/// Forward/inverse transform pair for real data of a fixed length.
///
/// Coefficients are normalized so that `u_j = Σ_k c_k e^{2πi jk/n}`.
#[derive(Clone)]
pub struct RealFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFft").field("n", &self.n).finish()
    }
}

impl RealFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let scale = 1.0 / self.n as f64;
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v * scale, 0.0)).collect();
        self.forward.process(&mut buf);
        buf
    }

    /// Forward transform of an already-complex buffer, in place, with normalization.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
    }
}

/// Signed wavenumber of FFT index `k`; the Nyquist index maps to `+n/2`.
#[inline]
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Angular wavenumbers `2πk/L` in FFT order.
pub fn angular_wavenumbers(n: usize, length: f64) -> Vec<f64> {
    (0..n)
        .map(|k| TAU * signed_index(k, n) as f64 / length)
        .collect()
}

/// Multiply coefficients by `(iκ)^order`; odd derivatives drop the Nyquist mode.
pub fn differentiate_coeffs(coeffs: &mut [Complex64], length: f64, order: u32) {
    let n = coeffs.len();
    let kappa = angular_wavenumbers(n, length);
    for (k, c) in coeffs.iter_mut().enumerate() {
        if order % 2 == 1 && n % 2 == 0 && k == n / 2 {
            *c = Complex64::new(0.0, 0.0);
            continue;
        }
        *c *= Complex64::new(0.0, kappa[k]).powu(order);
    }
}

/// Spectral derivative of a periodic sample.
pub fn circle_derivative(values: &[f64], length: f64, order: u32) -> Vec<f64> {
    if order == 0 {
        return values.to_vec();
    }
    let fft = RealFft::new(values.len());
    let mut coeffs = fft.forward(values);
    differentiate_coeffs(&mut coeffs, length, order);
    fft.inverse(&coeffs)
}

/// Fraction of spectral energy carried by the top eighth of wavenumbers.
pub fn tail_energy_fraction(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    let cutoff = (n / 2) as i64 - (n / 16) as i64;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if signed_index(k, n).abs() > cutoff {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// The trigonometric interpolant of a grid profile, evaluable off the grid.
///
/// Interval profiles are interpolated through their even (Neumann) or odd
/// (Dirichlet) reflection, so evaluation is valid on `[0, L]`.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    period: f64,
    mean: f64,
    /// Coefficients for wavenumbers `1..n/2`, exclusive.
    coeffs: Vec<Complex64>,
    nyquist: f64,
}

impl TrigInterpolant {
    pub fn from_periodic(values: &[f64], period: f64) -> Self {
        let n = values.len();
        let c = RealFft::new(n).forward(values);
        let half = n / 2;
        let nyquist = if n % 2 == 0 { c[half].re } else { 0.0 };
        let upper = if n % 2 == 0 { half } else { half + 1 };
        Self {
            period,
            mean: c[0].re,
            coeffs: c[1..upper].to_vec(),
            nyquist,
        }
    }

    pub fn new(u: &GridFunction) -> Self {
        match u.domain() {
            Domain::Circle { length } => Self::from_periodic(u.values(), length),
            Domain::IntervalNeumann { length } => {
                Self::from_periodic(&extend_even_values(u.values()), 2.0 * length)
            }
            Domain::IntervalDirichlet { length } => {
                Self::from_periodic(&extend_odd_values(u.values()), 2.0 * length)
            }
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// `[u, u', u'', u''']` at `x`.
    pub fn eval_derivatives(&self, x: f64) -> [f64; 4] {
        let base = TAU / self.period;
        let theta = base * x;
        let step = Complex64::new(theta.cos(), theta.sin());
        let mut phase = step;
        let mut out = [self.mean, 0.0, 0.0, 0.0];
        for (idx, c) in self.coeffs.iter().enumerate() {
            if idx > 0 && idx % 32 == 0 {
                // re-anchor the recurrence to keep roundoff bounded
                let a = base * (idx + 1) as f64 * x;
                phase = Complex64::new(a.cos(), a.sin());
            }
            let kappa = base * (idx + 1) as f64;
            let term = c * phase;
            // 2 Re((iκ)^r c e^{iκx})
            out[0] += 2.0 * term.re;
            out[1] += -2.0 * kappa * term.im;
            out[2] += -2.0 * kappa * kappa * term.re;
            out[3] += 2.0 * kappa * kappa * kappa * term.im;
            phase *= step;
        }
        if self.nyquist != 0.0 {
            let kappa = base * (self.coeffs.len() + 1) as f64;
            let (s, c) = (kappa * x).sin_cos();
            out[0] += self.nyquist * c;
            out[1] -= self.nyquist * kappa * s;
            out[2] -= self.nyquist * kappa * kappa * c;
            out[3] += self.nyquist * kappa * kappa * kappa * s;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_derivatives(x)[0]
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.eval_derivatives(x)[order.min(3)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn roundtrip() {
        let v: Vec<f64> = (0..32).map(|j| ((j * j) % 7) as f64 - 3.0).collect();
        let fft = RealFft::new(32);
        let back = fft.inverse(&fft.forward(&v));
        for (a, b) in v.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn interpolant_reproduces_nodes_and_derivatives() {
        let l = 3.0;
        let n = 64;
        let f = |x: f64| (TAU * x / l).sin() + 0.3 * (3.0 * TAU * x / l).cos();
        let df = |x: f64| {
            TAU / l * (TAU * x / l).cos() - 0.9 * TAU / l * (3.0 * TAU * x / l).sin()
        };
        let v: Vec<f64> = (0..n).map(|j| f(j as f64 * l / n as f64)).collect();
        let it = TrigInterpolant::from_periodic(&v, l);
        for x in [0.0, 0.123, 1.7, 2.99] {
            assert_abs_diff_eq!(it.eval(x), f(x), epsilon = 1e-12);
            assert_abs_diff_eq!(it.derivative(x, 1), df(x), epsilon = 1e-11);
        }
    }

    #[test]
    fn tail_fraction_of_smooth_profile_is_tiny() {
        let v: Vec<f64> = (0..64).map(|j| (TAU * j as f64 / 64.0).cos()).collect();
        let c = RealFft::new(64).forward(&v);
        assert!(tail_energy_fraction(&c) < 1e-25);
    }
}
