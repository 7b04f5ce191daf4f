//! Continued fractions associated with the difference equation.
//!
//! For `Re lambda > 0` the fractions
//! `g_+ = 1/(lambda/rho_1 + 1/(lambda/rho_2 + ...))` and its mirror
//! `g_-` converge inside the sector `|arg lambda| <= pi/2 - delta`.
//! They are evaluated by the backward recurrence (tail seeded with zero),
//! with the depth doubled until two successive depths agree; for real
//! positive `lambda` the even/odd truncations bracket the limit
//! monotonically and the bracket width is reported.

use serde::Serialize;

use crate::error::SpectraError;
use crate::flow::CoefficientSequence;
use crate::jost::{JostOptions, JostPair};
use crate::multipliers::multipliers;
use crate::params::EvalParams;
use crate::{Result, C64};

/// Which fraction: `+` walks `rho_1, rho_2, ...`, `-` walks
/// `rho_{-1}, rho_{-2}, ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracSide {
    Plus,
    Minus,
}

/// A converged continued-fraction value with truncation metadata.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuedFractionValue {
    pub value: C64,
    /// Depth at which the doubling test was met.
    pub depth: usize,
    /// Even/odd convergent bracket for real positive `lambda`.
    pub bracket: Option<(f64, f64)>,
    pub est_error: f64,
}

fn sector_check(lambda: C64, delta: f64) -> Result<()> {
    if lambda.re <= 0.0 || lambda.arg().abs() > std::f64::consts::FRAC_PI_2 - delta {
        return Err(SpectraError::SectorViolation { lambda, delta });
    }
    Ok(())
}

/// One backward evaluation of the depth-`d` truncation.
fn truncated(
    side: FracSide,
    lambda: C64,
    coeffs: &CoefficientSequence,
    depth: usize,
) -> Result<C64> {
    let mut t = C64::new(0.0, 0.0);
    for k in (1..=depth as i64).rev() {
        let idx = match side {
            FracSide::Plus => k,
            FracSide::Minus => -k,
        };
        let rho = coeffs.rho(idx)?;
        t = 1.0 / (lambda / rho + t);
    }
    Ok(t)
}

/// Evaluates `g_±(lambda)` to tolerance `tol` by depth doubling.
pub fn continued_fraction(
    side: FracSide,
    lambda: C64,
    coeffs: &CoefficientSequence,
    tol: f64,
    params: &EvalParams,
) -> Result<ContinuedFractionValue> {
    sector_check(lambda, params.sector_delta)?;
    if !coeffs.has_rho() {
        return Err(SpectraError::RhoUnavailable("continued fractions"));
    }
    let real_case = lambda.im == 0.0;
    let mut depth = 32usize;
    let mut prev = truncated(side, lambda, coeffs, depth)?;
    let mut last_diff = f64::INFINITY;
    loop {
        depth = if 2 * depth <= params.depth_cap {
            2 * depth
        } else if depth < params.depth_cap {
            params.depth_cap
        } else {
            return Err(SpectraError::NonConvergence {
                context: format!("continued fraction depth cap {}", params.depth_cap),
                reached: last_diff,
                wanted: tol,
            });
        };
        let value = truncated(side, lambda, coeffs, depth)?;
        let diff = (value - prev).norm();
        last_diff = diff;
        if diff <= tol * value.norm().max(1.0) {
            let (bracket, width) = if real_case {
                let next = truncated(side, lambda, coeffs, depth + 1)?;
                let (lo, hi) = if value.re <= next.re {
                    (value.re, next.re)
                } else {
                    (next.re, value.re)
                };
                (Some((lo, hi)), hi - lo)
            } else {
                (None, 0.0)
            };
            if real_case && width > tol * value.norm().max(1.0) {
                prev = value;
                continue;
            }
            return Ok(ContinuedFractionValue {
                value,
                depth,
                bracket,
                est_error: diff.max(width),
            });
        }
        prev = value;
    }
}

/// The continued-fraction spectral function
/// `G = z_0^+ z_0^- (lambda/rho_0 + g_+ + g_-) / (mu_+ - mu_-)`,
/// normalized (like the Jost function) so that the free case gives 1.
pub fn g_function(lambda: C64, coeffs: &CoefficientSequence, params: &EvalParams) -> Result<C64> {
    let opts = JostOptions {
        n_tail: params.n_tail,
        store: 2,
        ..JostOptions::default()
    };
    let pair = JostPair::solve(lambda, coeffs, params, &opts)?;
    Ok(g_function_from_pair(&pair, coeffs, params)?.0)
}

/// Same function, reusing an already solved Jost pair; also returns the
/// deeper of the two fraction depths.
pub fn g_function_from_pair(
    pair: &JostPair,
    coeffs: &CoefficientSequence,
    params: &EvalParams,
) -> Result<(C64, usize)> {
    let lambda = pair.lambda;
    sector_check(lambda, params.sector_delta)?;
    let md = multipliers(lambda, params.eps_ess)?;
    let gp = continued_fraction(FracSide::Plus, lambda, coeffs, params.fraction_tol, params)?;
    let gm = continued_fraction(FracSide::Minus, lambda, coeffs, params.fraction_tol, params)?;
    let rho0 = coeffs.rho(0)?;
    let z0p = pair.z_plus(0)?;
    let z0m = pair.z_minus(0)?;
    Ok((
        z0p * z0m * (lambda / rho0 + gp.value + gm.value) / md.gap(),
        gp.depth.max(gm.depth),
    ))
}

/// Report of the ratio identities tying the fractions to the Jost
/// solutions at real positive `lambda`.
#[derive(Debug, Clone, Serialize)]
pub struct RatioReport {
    /// `|v_0^+ - (lambda/rho_0 + g_+)|`.
    pub v0_plus_residual: f64,
    /// `|v_0^- + g_-|`.
    pub v0_minus_residual: f64,
    /// Max residual of `v_n^+ = lambda/rho_n + 1/v_{n+1}^+` over the
    /// checked range (the recurrence the truncated fractions iterate).
    pub recurrence_residual: f64,
    pub checked_up_to: i64,
}

/// Verifies `v_0^+ = lambda/rho_0 + g_+` and `v_0^- = -g_-` where
/// `v^±_0 = z^±_{-1}/z^±_0`, plus the ratio recurrence on a range of
/// indices, at tolerance `tol`.
pub fn ratio_identity_check(
    lambda: C64,
    coeffs: &CoefficientSequence,
    params: &EvalParams,
    tol: f64,
) -> Result<RatioReport> {
    if lambda.im != 0.0 || lambda.re <= 0.0 {
        return Err(SpectraError::Precondition(
            "ratio identities are checked for real lambda > 0".into(),
        ));
    }
    let opts = JostOptions {
        n_tail: params.n_tail,
        store: 26,
        ..JostOptions::default()
    };
    let pair = JostPair::solve(lambda, coeffs, params, &opts)?;
    let check_to: i64 = (pair.plus.zhat.hi() - 1).min(24);
    let gp = continued_fraction(FracSide::Plus, lambda, coeffs, params.fraction_tol, params)?;
    let gm = continued_fraction(FracSide::Minus, lambda, coeffs, params.fraction_tol, params)?;
    let rho0 = coeffs.rho(0)?;

    let v0_plus = pair.z_plus_minus1(coeffs)? / pair.z_plus(0)?;
    let v0_minus = pair.z_minus(-1)? / pair.z_minus(0)?;
    let v0_plus_residual = (v0_plus - (lambda / rho0 + gp.value)).norm();
    let v0_minus_residual = (v0_minus + gm.value).norm();

    // v_n^+ = lambda/rho_n + 1/v_{n+1}^+ for n >= 1, which is what the
    // difference equation gives when divided through by z_n.
    let mut recurrence_residual: f64 = 0.0;
    for n in 1..check_to {
        let vn = pair.z_plus(n - 1)? / pair.z_plus(n)?;
        let vn1 = pair.z_plus(n)? / pair.z_plus(n + 1)?;
        let rho_n = coeffs.rho(n)?;
        recurrence_residual = recurrence_residual.max((vn - (lambda / rho_n + 1.0 / vn1)).norm());
    }
    for n in (-check_to + 1)..0 {
        let vn = pair.z_minus(n - 1)? / pair.z_minus(n)?;
        let vn1 = pair.z_minus(n)? / pair.z_minus(n + 1)?;
        let rho_n = coeffs.rho(n)?;
        recurrence_residual = recurrence_residual.max((vn - (lambda / rho_n + 1.0 / vn1)).norm());
    }

    let worst = v0_plus_residual
        .max(v0_minus_residual)
        .max(recurrence_residual);
    if worst > tol {
        return Err(SpectraError::IdentityViolation {
            context: "ratio identities (fraction vs Jost)".into(),
            residual: worst,
            tolerance: tol,
        });
    }
    Ok(RatioReport {
        v0_plus_residual,
        v0_minus_residual,
        recurrence_residual,
        checked_up_to: check_to,
    })
}
