use crate::forcing::BasePoint;

use super::PdeError;

/// Tolerance for the vanishing of Dirichlet data at the endpoints.
pub const DIRICHLET_ENDPOINT_TOL: f64 = 1e-12;
pub const MIN_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

/// Spatial domain of a profile.
///
/// Circle grids have `n` nodes at `jL/n`. Interval grids include both
/// endpoints, `n` nodes at `jL/(n-1)`, and `n - 1` must be a power of two so
/// that the even/odd reflection lives on a power-of-two circle grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Circle { length: f64 },
    IntervalNeumann { length: f64 },
    IntervalDirichlet { length: f64 },
}

impl Domain {
    pub fn length(&self) -> f64 {
        match *self {
            Domain::Circle { length }
            | Domain::IntervalNeumann { length }
            | Domain::IntervalDirichlet { length } => length,
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self, Domain::Circle { .. })
    }

    pub fn interval(length: f64, bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::Neumann => Domain::IntervalNeumann { length },
            BoundaryCondition::Dirichlet => Domain::IntervalDirichlet { length },
        }
    }

    pub fn boundary(&self) -> Option<BoundaryCondition> {
        match self {
            Domain::Circle { .. } => None,
            Domain::IntervalNeumann { .. } => Some(BoundaryCondition::Neumann),
            Domain::IntervalDirichlet { .. } => Some(BoundaryCondition::Dirichlet),
        }
    }

    pub fn spacing(&self, n: usize) -> f64 {
        if self.is_circle() {
            self.length() / n as f64
        } else {
            self.length() / (n - 1) as f64
        }
    }

    pub fn nodes(&self, n: usize) -> Vec<f64> {
        let h = self.spacing(n);
        (0..n).map(|j| j as f64 * h).collect()
    }
}

/// Real profile sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
    domain: Domain,
}

impl GridFunction {
    pub fn new(values: Vec<f64>, domain: Domain) -> Result<Self, PdeError> {
        let n = values.len();
        let length = domain.length();
        if !(length.is_finite() && length > 0.0) {
            return Err(PdeError::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n < MIN_GRID {
            return Err(PdeError::InvalidGrid(format!("grid size {n} is below {MIN_GRID}")));
        }
        let ok_size = if domain.is_circle() {
            n.is_power_of_two()
        } else {
            (n - 1).is_power_of_two()
        };
        if !ok_size {
            return Err(PdeError::InvalidGrid(if domain.is_circle() {
                format!("circle grids need a power-of-two size, got {n}")
            } else {
                format!("interval grids need 2^m + 1 nodes, got {n}")
            }));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(PdeError::InvalidGrid(format!("value at node {i} is not finite")));
        }
        if let Domain::IntervalDirichlet { .. } = domain {
            let worst = values[0].abs().max(values[n - 1].abs());
            if worst > DIRICHLET_ENDPOINT_TOL {
                return Err(PdeError::NonzeroEndpoint(worst));
            }
        }
        Ok(Self { values, domain })
    }

    /// Sample `f` at the grid nodes. Dirichlet endpoints are pinned to zero.
    pub fn from_fn(domain: Domain, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, PdeError> {
        let mut values: Vec<f64> = domain.nodes(n).into_iter().map(f).collect();
        if let Domain::IntervalDirichlet { .. } = domain {
            if values.len() >= 2 {
                for i in [0, values.len() - 1] {
                    if values[i].abs() <= 1e-10 {
                        values[i] = 0.0;
                    }
                }
            }
        }
        Self::new(values, domain)
    }

    pub(crate) fn from_parts_unchecked(values: Vec<f64>, domain: Domain) -> Self {
        Self { values, domain }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.domain.length()
    }

    pub fn spacing(&self) -> f64 {
        self.domain.spacing(self.len())
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.domain.nodes(self.len())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Grid mean; for intervals the trapezoidal mean.
    pub fn mean(&self) -> f64 {
        let n = self.len();
        if self.domain.is_circle() {
            self.values.iter().sum::<f64>() / n as f64
        } else {
            let inner: f64 = self.values[1..n - 1].iter().sum();
            (inner + 0.5 * (self.values[0] + self.values[n - 1])) / (n - 1) as f64
        }
    }

    /// Pointwise difference on the same domain.
    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, PdeError> {
        self.check_compatible(other)?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            domain: self.domain,
        })
    }

    pub fn max_distance(&self, other: &GridFunction) -> Result<f64, PdeError> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    fn check_compatible(&self, other: &GridFunction) -> Result<(), PdeError> {
        if self.len() != other.len() || self.domain != other.domain {
            return Err(PdeError::DomainMismatch(
                "profiles live on different grids".to_string(),
            ));
        }
        Ok(())
    }
}

/// A point `(u, g)` of the skew-product orbit at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSnapshot {
    pub profile: GridFunction,
    pub base: BasePoint,
    pub t: f64,
}

impl OrbitSnapshot {
    pub fn new(profile: GridFunction, base: BasePoint, t: f64) -> Self {
        Self { profile, base, t }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        let circle = Domain::Circle { length: 1.0 };
        assert!(GridFunction::new(vec![0.0; 32], circle).is_ok());
        assert!(GridFunction::new(vec![0.0; 8], circle).is_err());
        assert!(GridFunction::new(vec![0.0; 48], circle).is_err());
        let mut v = vec![0.0; 32];
        v[3] = f64::NAN;
        assert!(GridFunction::new(v, circle).is_err());

        let dir = Domain::IntervalDirichlet { length: 1.0 };
        assert!(GridFunction::new(vec![0.0; 33], dir).is_ok());
        assert!(GridFunction::new(vec![0.0; 32], dir).is_err());
        let mut v = vec![0.0; 33];
        v[32] = 1e-6;
        assert!(matches!(GridFunction::new(v, dir), Err(PdeError::NonzeroEndpoint(_))));
    }

    #[test]
    fn nodes_and_mean() {
        let u = GridFunction::from_fn(Domain::IntervalNeumann { length: 2.0 }, 17, |x| x).unwrap();
        assert_eq!(u.nodes()[16], 2.0);
        assert!((u.mean() - 1.0).abs() < 1e-14);
        let c = GridFunction::from_fn(Domain::Circle { length: 2.0 }, 16, |_| 3.0).unwrap();
        assert_eq!(c.mean(), 3.0);
    }
}
