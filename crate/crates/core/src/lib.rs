//! Bifurcation analysis for `u_xx + λ f(u) = 0` on (−1,1)\{0} with Neumann ends
//! and the point-interaction matching conditions
//! `u(−0) + a u_x(−0) = u(+0) − a u_x(+0)`, `u_x(−0) = u_x(+0)`.

pub mod acceptance;
pub mod branches;
pub mod error;
pub mod grid;
pub mod nonlinearity;
pub mod ode;
pub mod oracle;
pub mod quadrature;
pub mod shooting;
pub mod roots;
pub mod spectrum;

pub use error::{Error, Result};
