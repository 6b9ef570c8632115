//! Exponential time differencing weights for `v' = λv + N(v, t)` with real `λ ≤ 0`.

/// `(e^z - 1)/z`
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 0.1 {
        taylor(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// `(e^z - 1 - z)/z²`
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        taylor(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

// Σ_{j≥0} z^j / (j + shift)!
fn taylor(z: f64, shift: u32) -> f64 {
    let mut fact: f64 = (1..=shift).map(f64::from).product();
    let mut term = 1.0 / fact;
    let mut sum = term;
    for j in 1..16 {
        fact = (j + shift) as f64;
        term *= z / fact;
        sum += term;
    }
    sum
}

/// Per-mode ETD2RK weights for a fixed step.
#[derive(Debug, Clone)]
pub struct EtdCoefficients {
    pub dt: f64,
    pub decay: Vec<f64>,
    pub phi1_dt: Vec<f64>,
    pub phi2_dt: Vec<f64>,
}

impl EtdCoefficients {
    pub fn new(eigenvalues: &[f64], dt: f64) -> Self {
        let mut decay = Vec::with_capacity(eigenvalues.len());
        let mut phi1_dt = Vec::with_capacity(eigenvalues.len());
        let mut phi2_dt = Vec::with_capacity(eigenvalues.len());
        for &lam in eigenvalues {
            let z = lam * dt;
            decay.push(z.exp());
            phi1_dt.push(dt * phi1(z));
            phi2_dt.push(dt * phi2(z));
        }
        Self {
            dt,
            decay,
            phi1_dt,
            phi2_dt,
        }
    }
}
