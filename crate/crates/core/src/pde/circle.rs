//! Pseudo-spectral ETD2RK propagator on the circle.

use num_complex::Complex64;

use crate::forcing::{BasePoint, ForcingField};

use super::etd::EtdCoefficients;
use super::spectral::{angular_wavenumbers, signed_index, tail_energy_fraction, RealFft};
use super::Propagator;

/// State is the normalized Fourier coefficient vector. The nonlinearity is
/// evaluated on a 3/2-padded grid and truncated back (2/3 rule) when
/// dealiasing is on.
#[derive(Debug, Clone)]
pub struct CircleSolver {
    n: usize,
    length: f64,
    dealias: bool,
    fft: RealFft,
    pad: RealFft,
    kappa: Vec<f64>,
    eigenvalues: Vec<f64>,
    pad_index: Vec<Option<usize>>,
}

impl CircleSolver {
    pub fn new(n: usize, length: f64, dealias: bool) -> Self {
        let m = if dealias { 3 * n / 2 } else { n };
        let kappa = angular_wavenumbers(n, length);
        let eigenvalues = kappa.iter().map(|k| -k * k).collect();
        let pad_index = (0..n)
            .map(|k| {
                let s = signed_index(k, n);
                if dealias && s == (n / 2) as i64 {
                    None
                } else if s >= 0 {
                    Some(s as usize)
                } else {
                    Some((m as i64 + s) as usize)
                }
            })
            .collect();
        Self {
            n,
            length,
            dealias,
            fft: RealFft::new(n),
            pad: RealFft::new(m),
            kappa,
            eigenvalues,
            pad_index,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    /// Spectral coefficients of `g(s, u, u_x)` with `g` the hull element `base`.
    pub fn nonlinear(
        &self,
        field: &ForcingField,
        base: &BasePoint,
        s: f64,
        u_hat: &[Complex64],
    ) -> Vec<Complex64> {
        let m = self.pad.len();
        let nyq = self.n / 2;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        // u and u_x are real, so one inverse transform of û + i·(iκû) yields u + i u_x.
        for (k, c) in u_hat.iter().enumerate() {
            if let Some(idx) = self.pad_index[k] {
                let dx = if k == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, self.kappa[k]) * c
                };
                buf[idx] = c + Complex64::new(0.0, 1.0) * dx;
            }
        }
        self.pad.inverse_in_place(&mut buf);
        let frozen = field.freeze(base, s);
        for z in buf.iter_mut() {
            *z = Complex64::new(frozen.value(z.re, z.im), 0.0);
        }
        self.pad.forward_in_place(&mut buf);
        self.pad_index
            .iter()
            .map(|idx| idx.map_or(Complex64::new(0.0, 0.0), |i| buf[i]))
            .collect()
    }
}

impl Propagator for CircleSolver {
    type State = Vec<Complex64>;

    fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn to_state(&self, values: &[f64]) -> Self::State {
        self.fft.forward(values)
    }

    fn to_values(&self, state: &Self::State) -> Vec<f64> {
        self.fft.inverse(state)
    }

    fn step(
        &self,
        state: &Self::State,
        field: &ForcingField,
        base: &BasePoint,
        coeffs: &EtdCoefficients,
    ) -> Self::State {
        let n0 = self.nonlinear(field, base, 0.0, state);
        let a: Vec<Complex64> = (0..self.n)
            .map(|k| state[k] * coeffs.decay[k] + n0[k] * coeffs.phi1_dt[k])
            .collect();
        let n1 = self.nonlinear(field, base, coeffs.dt, &a);
        (0..self.n)
            .map(|k| a[k] + (n1[k] - n0[k]) * coeffs.phi2_dt[k])
            .collect()
    }

    fn amplitude_bound(&self, state: &Self::State) -> f64 {
        state.iter().map(|c| c.norm()).sum()
    }

    fn tail_fraction(&self, state: &Self::State) -> f64 {
        tail_energy_fraction(state)
    }
}
