//! Reflection of interval data onto the doubled circle and back.
//!
//! An interval profile on `[0, L]` with `K + 1` nodes becomes a circle
//! profile of circumference `2L` with `2K` nodes, where the circle
//! coordinate `x ∈ [L, 2L)` stands for `x - 2L ∈ [-L, 0)`.

use super::grid::{BoundaryCondition, Domain, GridFunction};
use super::PdeError;

/// Endpoint magnitude above which odd extension is refused.
pub const ODD_EXTENSION_ENDPOINT_TOL: f64 = 1e-10;

pub(crate) fn extend_even_values(u: &[f64]) -> Vec<f64> {
    let k = u.len() - 1;
    let mut ext = Vec::with_capacity(2 * k);
    ext.extend_from_slice(u);
    ext.extend(u[1..k].iter().rev());
    ext
}

pub(crate) fn extend_odd_values(u: &[f64]) -> Vec<f64> {
    let k = u.len() - 1;
    let mut ext = Vec::with_capacity(2 * k);
    ext.extend_from_slice(u);
    ext.extend(u[1..k].iter().rev().map(|v| -v));
    ext
}

/// `u0(-x)` on `[-L, 0]`: Neumann data becomes an even profile on the circle of length `2L`.
pub fn extend_even(u0: &GridFunction) -> Result<GridFunction, PdeError> {
    let Domain::IntervalNeumann { length } = u0.domain() else {
        return Err(PdeError::DomainMismatch(
            "even extension needs a Neumann interval profile".to_string(),
        ));
    };
    GridFunction::new(
        extend_even_values(u0.values()),
        Domain::Circle {
            length: 2.0 * length,
        },
    )
}

/// `-u0(-x)` on `[-L, 0]`: Dirichlet data becomes an odd profile on the circle of length `2L`.
pub fn extend_odd(u0: &GridFunction) -> Result<GridFunction, PdeError> {
    let length = u0.length();
    let v = u0.values();
    let worst = v[0].abs().max(v[v.len() - 1].abs());
    if worst > ODD_EXTENSION_ENDPOINT_TOL {
        return Err(PdeError::NonzeroEndpoint(worst));
    }
    if !matches!(u0.domain(), Domain::IntervalDirichlet { .. }) {
        return Err(PdeError::DomainMismatch(
            "odd extension needs a Dirichlet interval profile".to_string(),
        ));
    }
    GridFunction::new(
        extend_odd_values(v),
        Domain::Circle {
            length: 2.0 * length,
        },
    )
}

/// The `[0, L]` half of a profile on the circle of length `2L`.
pub fn restrict(u: &GridFunction, bc: BoundaryCondition) -> Result<GridFunction, PdeError> {
    let Domain::Circle { length } = u.domain() else {
        return Err(PdeError::DomainMismatch("restrict needs a circle profile".to_string()));
    };
    let half = u.len() / 2;
    let mut values = u.values()[..=half].to_vec();
    if bc == BoundaryCondition::Dirichlet {
        for i in [0, half] {
            if values[i].abs() > ODD_EXTENSION_ENDPOINT_TOL {
                return Err(PdeError::NonzeroEndpoint(values[i].abs()));
            }
            values[i] = 0.0;
        }
    }
    GridFunction::new(values, Domain::interval(length / 2.0, bc))
}
