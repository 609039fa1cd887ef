//! Numerical laboratory for the asymptotic behavior of power-bounded
//! Hilbert-space operators: finite truncations of weighted shifts and the
//! Volterra operator, forward/adjoint orbits, Cesàro-averaged asymptote
//! Grams, and minimal-norm backward sequences.

pub mod config;
pub mod linalg;
pub mod report;
pub mod runner;
pub mod asymptotics;
pub mod backward;
pub mod zoo;
