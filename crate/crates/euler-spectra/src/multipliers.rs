//! Multipliers of the free equation and the similarity frame.
//!
//! The constant-coefficient transfer matrix `A = [[-lambda, 1], [1, 0]]`
//! has eigenvalues solving `mu^2 + lambda mu - 1 = 0`. Off the essential
//! spectrum `[-2i, 2i]` exactly one root lies inside the unit circle; the
//! roots are labeled by modulus (`|mu_+| < 1 < |mu_-|`), not by a branch
//! of the square root, so the labeling works on the whole cut plane.

use crate::error::SpectraError;
use crate::linalg::Mat2;
use crate::{Result, C64};

/// Euclidean distance from `lambda` to the segment `{it : t in [-2, 2]}`.
pub fn distance_to_essential(lambda: C64) -> f64 {
    let x = lambda.re;
    let y = lambda.im;
    let dy = if y.abs() <= 2.0 { 0.0 } else { y.abs() - 2.0 };
    (x * x + dy * dy).sqrt()
}

/// A spectral parameter together with its distance to the essential
/// spectrum; admitted points keep a strictly positive distance.
#[derive(Debug, Clone, Copy)]
pub struct SpectralPoint {
    pub lambda: C64,
    pub dist_essential: f64,
}

impl SpectralPoint {
    pub fn new(lambda: C64) -> Self {
        SpectralPoint {
            lambda,
            dist_essential: distance_to_essential(lambda),
        }
    }

    /// Errors out when the point sits within `eps` of the segment.
    pub fn admit(&self, eps: f64) -> Result<()> {
        if self.dist_essential <= eps {
            Err(SpectraError::EssentialSpectrum {
                lambda: self.lambda,
                dist: self.dist_essential,
                eps,
            })
        } else {
            Ok(())
        }
    }
}

/// Multipliers, diagonalizing matrices and spectral projections of the
/// free transfer matrix at one value of `lambda`.
#[derive(Debug, Clone)]
pub struct MultiplierData {
    pub lambda: C64,
    /// Root with `|mu_+| < 1`.
    pub mu_plus: C64,
    /// Root with `|mu_-| > 1`.
    pub mu_minus: C64,
    /// `A = [[-lambda, 1], [1, 0]]`.
    pub a: Mat2,
    /// Eigenvector matrix `W = [[mu_+, mu_-], [1, 1]]`.
    pub w: Mat2,
    /// Closed-form inverse of `W`.
    pub w_inv: Mat2,
    /// `M = W^{-1} Q_+ W`.
    pub m: Mat2,
    /// Riesz projection onto the `mu_+` eigendirection.
    pub p_plus: Mat2,
    pub p_minus: Mat2,
    /// Coordinate projections `diag(1, 0)` and `diag(0, 1)`.
    pub q_plus: Mat2,
    pub q_minus: Mat2,
}

impl MultiplierData {
    /// `mu_+ - mu_-`, the denominator of every kernel below.
    pub fn gap(&self) -> C64 {
        self.mu_plus - self.mu_minus
    }

    /// Contraction ratio `mu_+ / mu_-`, of modulus < 1.
    pub fn ratio(&self) -> C64 {
        self.mu_plus / self.mu_minus
    }
}

/// Computes the multipliers and the similarity frame at `lambda`,
/// guarding against the essential spectrum with tolerance `eps_ess`.
///
/// The quadratic is solved cancellation-free: the root of larger modulus
/// takes the sign that avoids subtraction of nearly equal quantities, the
/// other root is `-1 / mu` (the product of the roots is exactly -1).
pub fn multipliers(lambda: C64, eps_ess: f64) -> Result<MultiplierData> {
    SpectralPoint::new(lambda).admit(eps_ess)?;
    let half = lambda * 0.5;
    let s = (half * half + 1.0).sqrt();
    let cand_a = -half + s;
    let cand_b = -half - s;
    let big = if cand_a.norm_sqr() >= cand_b.norm_sqr() {
        cand_a
    } else {
        cand_b
    };
    let small = -1.0 / big;
    debug_assert!(small.norm() < 1.0 && big.norm() > 1.0);
    let (mu_plus, mu_minus) = (small, big);

    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let a = Mat2::new(-lambda, one, one, zero);
    let w = Mat2::new(mu_plus, mu_minus, one, one);
    let gap = mu_plus - mu_minus;
    let w_inv = Mat2::new(one, -mu_minus, -one, mu_plus).scale(1.0 / gap);
    let m = Mat2::new(mu_plus, mu_minus, -mu_plus, -mu_minus).scale(1.0 / gap);
    let q_plus = Mat2::new(one, zero, zero, zero);
    let q_minus = Mat2::new(zero, zero, zero, one);
    // P_+ = W Q_+ W^{-1} = [[mu_+, 1], [1, -mu_-]] / gap  (uses mu_+ mu_- = -1)
    let p_plus = Mat2::new(mu_plus, one, one, -mu_minus).scale(1.0 / gap);
    let p_minus = Mat2::identity().sub(&p_plus);

    Ok(MultiplierData {
        lambda,
        mu_plus,
        mu_minus,
        a,
        w,
        w_inv,
        m,
        p_plus,
        p_minus,
        q_plus,
        q_minus,
    })
}

/// Convolution kernel of the rescaled Volterra equations:
/// `h(n) = (mu_+ - mu_-)^{-1} ((mu_+/mu_-)^n - 1)` for `n >= 0`.
///
/// `h(0) = 0` (which is what makes the triangular solve strict) and
/// `|h(n)| <= 2 / |mu_+ - mu_-|` for all `n`.
pub fn h_kernel(md: &MultiplierData, n: i64) -> C64 {
    assert!(n >= 0, "h kernel is only used for nonnegative offsets");
    (md.ratio().powi(n as i32) - 1.0) / md.gap()
}
