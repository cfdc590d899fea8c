//! Solvers for one-dimensional and radially symmetric p-Laplacian Dirichlet
//! and obstacle problems, together with the explicit construction of the
//! p -> infinity limit profile.
//!
//! The crate is organized around exact piecewise-polynomial calculus
//! ([`piecewise`]), the limit constructors ([`limit`]), finite-p solvers
//! ([`psolver`]), the radial-to-1D reduction ([`radial`]), and closed-form
//! reference solutions for seven worked examples ([`oracles`]).

pub mod limit;
pub mod oracles;
pub mod piecewise;
pub mod psolver;
pub mod radial;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid construction: {0}")]
    BadConstruction(String),
    #[error("point {x} outside domain [{lo}, {hi}]")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },
    #[error("operands live on different domains")]
    DomainMismatch,
    #[error("polynomial degree would exceed 3")]
    DegreeOverflow,
    #[error("component is infeasible: threshold target {target} is negative")]
    InfeasibleComponent { target: f64 },
    #[error("boundary slope {slope} exceeds 1; use the affine connector")]
    SlopeTooSteep { slope: f64 },
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
    #[error("invalid problem: {0}")]
    BadSpec(String),
    #[error("p = {p} is too large for this solver (limit {max})")]
    PTooLarge { p: f64, max: f64 },
    #[error("shooting overflowed at p = {p}; the exponent is too large for f64")]
    ShootOverflow { p: f64 },
    #[error("solver stalled after {iterations} iterations, residual {residual:e}")]
    SolverStall { residual: f64, iterations: usize },
    #[error("no root in bracket [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
