//! Exit-left probabilities of jump-diffusions and the inverse first-passage
//! place problem.
//!
//! A [`model::ProcessSpec`] describes `dX = μ(X)dt + σ(X)dB` plus an upward
//! and a downward compound-Poisson stream, killed on leaving `(a, b)`. The
//! probability `π_a(x)` of leaving through the left can be obtained from the
//! catalog closed forms ([`closed_forms`]), the finite-difference solver
//! ([`pide`]) or simulation ([`mc`]). [`generator`] checks candidates
//! against the integro-differential equation, and [`inverse`] searches a
//! density family for a start law achieving a prescribed `q = ∫ g π_a`.

pub mod closed_forms;
pub mod error;
pub mod generator;
pub mod inverse;
pub mod mc;
pub mod model;
pub mod pide;
pub mod quadrature;
pub mod verify;

pub mod cli;

pub use error::{FppError, Result};
