//! Evaluation parameters with the documented defaults.

/// Tunable tolerances and truncation sizes shared by the evaluators. The
/// defaults are what the command-line tools report when run unmodified.
#[derive(Debug, Clone)]
pub struct EvalParams {
    /// Guard distance to the essential spectrum `[-2i, 2i]`; conditioning
    /// of every solve degrades like one over this distance.
    pub eps_ess: f64,
    /// Finite-section half-width for the pencil determinants. Every
    /// determinant is reported together with its doubled-window partner.
    pub n_section: usize,
    /// Explicit Jost tail index; `None` selects the smallest tail with
    /// `|lambda| * tail_weight < tail_target * |mu_+ - mu_-|`, capped.
    pub n_tail: Option<i64>,
    /// Target for the automatic tail selection.
    pub tail_target: f64,
    /// Cap for the automatic tail selection.
    pub tail_cap: i64,
    /// Cross-validation tolerance on the max pairwise relative gap of the
    /// five function values.
    pub cross_tol: f64,
    /// Continued-fraction value tolerance.
    pub fraction_tol: f64,
    /// Sector margin (radians) inside `|arg lambda| < pi/2` required for
    /// continued-fraction evaluation.
    pub sector_delta: f64,
    /// Continued-fraction depth cap; exceeding it is a hard error rather
    /// than a silent best effort.
    pub depth_cap: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            eps_ess: 1e-8,
            n_section: 256,
            n_tail: None,
            tail_target: 1e-9,
            tail_cap: 1_000_000,
            cross_tol: 1e-6,
            fraction_tol: 1e-12,
            sector_delta: 1e-3,
            depth_cap: 1_000_000,
        }
    }
}
