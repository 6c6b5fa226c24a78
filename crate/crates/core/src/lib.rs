//! Induced corepresentations of finite quantum groups.
//!
//! A finite quantum group is modelled as a multi-matrix algebra `M` with a
//! comultiplication. Given an action `α : M → M ⊗ N` of a quantum subgroup
//! `(N, Δ_N)` and a unitary corepresentation `U` of `N`, the crate builds the
//! carrier space `𝒦`, the induced corepresentation `ρ ∈ M ⊗ B(𝒦)`, and a set of
//! numerical certificates for every identity the construction relies on.
//!
//! Everything is finite dimensional and dense. Elements are stored through
//! their faithful block realization, so tensor products are Kronecker products
//! and slice maps are partial traces.

#![forbid(unsafe_code)]

pub mod action;
pub mod algebra;
pub mod catalog;
pub mod cli;
pub mod induction;
pub mod linalg;
pub mod par;
pub mod quantum_group;
pub mod report;
pub mod spec_file;
pub mod suites;
pub mod weight_correspondence;
pub mod weights;

pub use num_complex::Complex64;

/// Errors raised while building or certifying the construction.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{what}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Residual { what: String, residual: f64, tol: f64 },
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("spec file: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default absolute tolerance before scaling.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default tolerance, overridden by the `QINDUCE_TOL` environment variable.
pub fn default_tol() -> f64 {
    std::env::var("QINDUCE_TOL")
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .unwrap_or(DEFAULT_TOL)
}

/// Fails with [`Error::Residual`] when `residual > tol * max(1, scale)`.
pub fn check(what: &str, residual: f64, tol: f64, scale: f64) -> Result<()> {
    let bound = tol * scale.max(1.0);
    if residual.is_finite() && residual <= bound {
        Ok(())
    } else {
        Err(Error::Residual { what: what.to_string(), residual, tol: bound })
    }
}
