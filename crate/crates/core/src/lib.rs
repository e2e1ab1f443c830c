//! Numerical laboratory for the integrated free boundary problem
//!
//! ```text
//! ∂t U = ½ ∂xx U + U   for x > L_t,     U = 1 for x ≤ L_t,     ∂x U(t, L_t) = 0,
//! ```
//!
//! its boundary-slope generalisation, their travelling waves and front
//! asymptotics, and Monte Carlo validators built on branching Brownian
//! motion with selection and on Brownian motion killed at the front.

pub mod acceptance;
pub mod asymptotics;
pub mod beta;
pub mod brunet_derrida;
pub mod error;
pub mod exec;
pub mod grid;
pub mod io;
pub mod ic;
pub mod mc;
pub mod solver;
pub mod stochastic;
pub mod quad;
pub mod waves;

pub use error::{FbpError, Result};
pub use exec::Exec;
pub use ic::InitialCondition;
