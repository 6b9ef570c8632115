//! Direct cosine (Neumann) and sine (Dirichlet) collocation on `[0, L]`.
//!
//! This path never forms the reflected circle profile: transforms are dense
//! DCT-I / DST-I matrices, so it serves as an independent check on the
//! extend → circle solve → restrict route.

use std::f64::consts::PI;

use crate::forcing::{BasePoint, ForcingField};

use super::etd::EtdCoefficients;
use super::grid::BoundaryCondition;
use super::Propagator;

#[derive(Debug, Clone)]
pub struct IntervalSolver {
    bc: BoundaryCondition,
    /// Number of intervals; the grid has `segments + 1` nodes.
    segments: usize,
    /// Node-major synthesis matrix for `u` at the collocation nodes.
    synth: Vec<Vec<f64>>,
    /// Node-major synthesis matrix for `u_x` at the collocation nodes.
    synth_dx: Vec<Vec<f64>>,
    /// Mode-major analysis matrix.
    analysis: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

// cos(π jk/K) and sin(π jk/K) with the argument reduced mod 2K.
fn trig_table(j: usize, k: usize, segments: usize) -> (f64, f64) {
    let r = (j * k) % (2 * segments);
    let a = PI * r as f64 / segments as f64;
    (a.cos(), a.sin())
}

impl IntervalSolver {
    pub fn new(nodes: usize, length: f64, bc: BoundaryCondition) -> Self {
        let segments = nodes - 1;
        let kk = segments;
        let wave = |k: usize| k as f64 * PI / length;
        let (modes, points): (Vec<usize>, Vec<usize>) = match bc {
            BoundaryCondition::Neumann => ((0..=kk).collect(), (0..=kk).collect()),
            BoundaryCondition::Dirichlet => ((1..kk).collect(), (1..kk).collect()),
        };
        let mut synth = Vec::with_capacity(points.len());
        let mut synth_dx = Vec::with_capacity(points.len());
        for &j in &points {
            let mut row = Vec::with_capacity(modes.len());
            let mut row_dx = Vec::with_capacity(modes.len());
            for &k in &modes {
                let (c, s) = trig_table(j, k, segments);
                match bc {
                    BoundaryCondition::Neumann => {
                        row.push(c);
                        row_dx.push(-wave(k) * s);
                    }
                    BoundaryCondition::Dirichlet => {
                        row.push(s);
                        row_dx.push(wave(k) * c);
                    }
                }
            }
            synth.push(row);
            synth_dx.push(row_dx);
        }
        let analysis = modes
            .iter()
            .map(|&k| {
                points
                    .iter()
                    .map(|&j| {
                        let (c, s) = trig_table(j, k, segments);
                        match bc {
                            BoundaryCondition::Neumann => {
                                let wj = if j == 0 || j == kk { 0.5 } else { 1.0 };
                                let ck = if k == 0 || k == kk { 2.0 } else { 1.0 };
                                2.0 * wj * c / (kk as f64 * ck)
                            }
                            BoundaryCondition::Dirichlet => 2.0 * s / kk as f64,
                        }
                    })
                    .collect()
            })
            .collect();
        let eigenvalues = modes.iter().map(|&k| -wave(k) * wave(k)).collect();
        Self {
            bc,
            segments,
            synth,
            synth_dx,
            analysis,
            eigenvalues,
        }
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.bc
    }

    fn apply(matrix: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        matrix
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn nonlinear(&self, field: &ForcingField, base: &BasePoint, s: f64, coeffs: &[f64]) -> Vec<f64> {
        let u = Self::apply(&self.synth, coeffs);
        let ux = Self::apply(&self.synth_dx, coeffs);
        let frozen = field.freeze(base, s);
        let g: Vec<f64> = u.iter().zip(&ux).map(|(&a, &b)| frozen.value(a, b)).collect();
        Self::apply(&self.analysis, &g)
    }
}

impl Propagator for IntervalSolver {
    type State = Vec<f64>;

    fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    fn to_state(&self, values: &[f64]) -> Self::State {
        match self.bc {
            BoundaryCondition::Neumann => Self::apply(&self.analysis, values),
            BoundaryCondition::Dirichlet => Self::apply(&self.analysis, &values[1..self.segments]),
        }
    }

    fn to_values(&self, state: &Self::State) -> Vec<f64> {
        let inner = Self::apply(&self.synth, state);
        match self.bc {
            BoundaryCondition::Neumann => inner,
            BoundaryCondition::Dirichlet => {
                let mut v = Vec::with_capacity(self.segments + 1);
                v.push(0.0);
                v.extend(inner);
                v.push(0.0);
                v
            }
        }
    }

    fn step(
        &self,
        state: &Self::State,
        field: &ForcingField,
        base: &BasePoint,
        coeffs: &EtdCoefficients,
    ) -> Self::State {
        let n0 = self.nonlinear(field, base, 0.0, state);
        let a: Vec<f64> = (0..state.len())
            .map(|k| state[k] * coeffs.decay[k] + n0[k] * coeffs.phi1_dt[k])
            .collect();
        let n1 = self.nonlinear(field, base, coeffs.dt, &a);
        (0..state.len())
            .map(|k| a[k] + (n1[k] - n0[k]) * coeffs.phi2_dt[k])
            .collect()
    }

    fn amplitude_bound(&self, state: &Self::State) -> f64 {
        state.iter().map(|c| c.abs()).sum()
    }

    fn tail_fraction(&self, state: &Self::State) -> f64 {
        let m = state.len();
        let cutoff = m - m / 8;
        let total: f64 = state.iter().map(|c| c * c).sum();
        if total == 0.0 {
            return 0.0;
        }
        state[cutoff..].iter().map(|c| c * c).sum::<f64>() / total
    }
}
