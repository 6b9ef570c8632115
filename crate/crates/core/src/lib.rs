//! Numerical laboratory for the skew-product semiflow of
//! `u_t = u_xx + f(t, u, u_x)` under quasi-periodic forcing.

pub mod forcing;
pub mod pde;
pub mod group_action;
pub mod zero_number;
pub mod circle_reduction;
pub mod skew_product;
pub mod torus;
