//! Special functions: Bessel `J_n`, associated Legendre functions and an
//! adaptive quadrature used as an integration oracle.

mod bessel;
mod legendre;
mod quad;

pub use bessel::{bessel_j, bessel_j_sequence, bessel_j_zero, negligible_order, MAX_ORDER};
pub use legendre::{
    legendre_f, legendre_f_degrees, legendre_f_orders, legendre_f_with_derivative, legendre_p, reduced_legendre_orders,
    MAX_DEGREE,
};
pub use quad::{
    kronrod_nodes, quad_adaptive, quad_adaptive_capped, quad_piecewise, QuadResult, DEFAULT_MAX_SUBDIVISIONS,
};

pub(crate) use legendre::{
    coefficients as legendre_recurrence, diagonal_constant as legendre_diagonal,
    orders_with_sine as legendre_f_orders_sine,
};
