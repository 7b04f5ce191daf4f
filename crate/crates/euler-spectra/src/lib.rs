//! Spectral analysis of the Jacobi-type difference equation
//!
//! ```text
//! z_{n-1} - z_{n+1} = (lambda / rho_n) z_n,    n in Z,
//! ```
//!
//! which governs linear (in)stability of unidirectional Kolmogorov-type
//! flows of the 2D Euler equations. Five analytically equal functions of
//! the spectral parameter are computed along independent numerical routes
//! and cross-validated against each other:
//!
//! * `det(I - K_lambda)` — Fredholm determinant of the scalar
//!   Birman–Schwinger pencil (finite sections + tail extrapolation),
//! * `det(I - T_lambda)` — Fredholm determinant of the first-order-system
//!   pencil,
//! * `E(lambda)` — Evans function from matrix Jost solutions,
//! * `F(lambda)` — Jost function from scalar Jost solutions,
//! * `G(lambda)` — continued-fraction function (for `Re lambda > 0`).
//!
//! Zeros of any (hence all) of them are the discrete eigenvalues of the
//! difference equation, i.e. the unstable modes of the flow.
//!
//! ```
//! use euler_spectra::flow::{CoefficientSequence, FlowConfig};
//! use euler_spectra::params::EvalParams;
//! use euler_spectra::{spectrum, C64};
//!
//! // decoupled equation: every spectral function is identically 1
//! let free = CoefficientSequence::free(8);
//! let params = EvalParams { n_section: 16, ..EvalParams::default() };
//! let record = spectrum::evaluate_five(&free, C64::new(1.5, 0.0), &params).unwrap();
//! assert!((record.evans - 1.0).norm() < 1e-12);
//! assert!(record.max_pairwise_gap < 1e-12);
//!
//! // an admissible flow pair carries an unstable eigenvalue
//! let coeffs =
//!     CoefficientSequence::from_flow(FlowConfig::new([2, 3], [2, -1]).unwrap(), 64).unwrap();
//! let light = EvalParams { n_section: 32, n_tail: Some(20_000), ..EvalParams::default() };
//! let found = spectrum::find_real_eigenvalue(&coeffs, &light).unwrap();
//! assert!(found.lambda_star.re > 0.0 && found.residual < 1e-6);
//! ```

pub mod config;
pub mod contfrac;
pub mod error;
pub mod evans;
pub mod flow;
pub mod fredholm;
pub mod jost;
pub mod linalg;
pub mod multipliers;
pub mod params;
pub mod spectrum;

pub use config::ProblemConfig;
pub use error::SpectraError;
pub use flow::{AdmissibilityReport, CoefficientSequence, FlowConfig};
pub use jost::SequenceWindow;
pub use multipliers::MultiplierData;
pub use params::EvalParams;
pub use spectrum::{EigenvalueResult, FiveFunctionRecord};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Library-wide result type.
pub type Result<T> = std::result::Result<T, SpectraError>;
