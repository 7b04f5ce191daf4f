//! Error taxonomy shared by all modules.

use crate::C64;

/// Everything that can go wrong while evaluating the spectral functions.
#[derive(Debug, Clone, thiserror::Error)]
pub enum SpectraError {
    /// The spectral parameter is within `eps` of the essential spectrum
    /// `[-2i, 2i]`, where the multipliers sit on the unit circle and no
    /// decaying/growing splitting exists.
    #[error("lambda = {lambda} is within {dist:.3e} of the essential spectrum [-2i, 2i] (guard {eps:.1e})")]
    EssentialSpectrum { lambda: C64, dist: f64, eps: f64 },

    /// `q` is parallel to `p`: the sliced operator is identically zero.
    #[error("degenerate slice: L_q = 0 (q parallel to p)")]
    DegenerateSlice,

    /// Malformed input (zero `p`, bad window, inconsistent arrays, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The coupling tail beyond `n_tail` is too large for the Volterra
    /// solve to be trustworthy; increase the tail index.
    #[error("contraction failure: tail sum {tail_sum:.3e} * sup|h| = {product:.3e} >= 1/2 at n_tail = {n_tail}")]
    ContractionFailure {
        n_tail: i64,
        tail_sum: f64,
        product: f64,
    },

    /// Continued fractions are only evaluated strictly inside the sector
    /// `|arg lambda| <= pi/2 - delta`.
    #[error("sector violation: lambda = {lambda} outside |arg| <= pi/2 - {delta:.1e}")]
    SectorViolation { lambda: C64, delta: f64 },

    /// An iterative evaluation exceeded its cap without meeting tolerance.
    #[error("no convergence: {context} (reached {reached:.3e}, wanted {wanted:.3e})")]
    NonConvergence {
        context: String,
        reached: f64,
        wanted: f64,
    },

    /// An exactly zero pivot during LU elimination.
    #[error("singular factorization: pivot magnitude {pivot:.3e} at step {step}")]
    SingularFactorization { pivot: f64, step: usize },

    /// The system pencil lost its (1,1)-block structure — an internal bug.
    #[error("block mismatch in system pencil: max off-block {off_block:.3e}, max (1,1) deviation {diag_dev:.3e}")]
    BlockMismatch { off_block: f64, diag_dev: f64 },

    /// A sequence window was indexed outside its stored range.
    #[error("index {index} outside stored window [{lo}, {hi}]")]
    IndexOutOfWindow { index: i64, lo: i64, hi: i64 },

    /// The sign change bracketing a real eigenvalue could not be found.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// A candidate eigensequence does not satisfy the recurrence.
    #[error(
        "large residual {residual:.3e} (threshold {threshold:.1e}): candidate is not an eigenvalue"
    )]
    LargeResidual { residual: f64, threshold: f64 },

    /// A cross-module identity failed beyond tolerance.
    #[error("identity violation: {context} residual {residual:.3e} (tolerance {tolerance:.1e})")]
    IdentityViolation {
        context: String,
        residual: f64,
        tolerance: f64,
    },

    /// A zero of the function sits (numerically) on the winding contour.
    #[error("zero too close to contour: min boundary modulus {min_abs:.3e}")]
    BoundaryZero { min_abs: f64 },

    /// The winding rectangle comes too close to the essential spectrum.
    #[error("contour rectangle intersects essential-spectrum guard band (distance {dist:.3e})")]
    EssentialSpectrumIntersection { dist: f64 },

    /// The operation needs the rho sequence, which general-coefficient
    /// inputs do not define.
    #[error("rho sequence unavailable: {0} requires flow-mode (or unit-rho) coefficients")]
    RhoUnavailable(&'static str),

    /// A precondition documented on the operation was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}
