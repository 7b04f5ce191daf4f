//! Matrix Jost solutions and the Evans function.
//!
//! The first-order system `y_{n+1} = (A + b_n c_n Q_+ ... ) y_n` has
//! matrix Jost solutions `Y^±_n ~ A^n P_±` at `±inf`. Solving in the raw
//! frame mixes the growing and decaying modes, so the Volterra equations
//! are solved in the diagonalized frame: with `Ytilde = W^{-1} Y W` only
//! one column is nonzero, and after rescaling by `mu_±^{-n}` the sweep
//! uses the same geometric/flat running sums as the scalar solver. The
//! per-step diagonal block `I + (a_n/gap) D` has `D` nilpotent, so its
//! inverse is exactly `I - (a_n/gap) D`.

use crate::error::SpectraError;
use crate::flow::CoefficientSequence;
use crate::jost::{auto_n_tail, geometric_tail, JostOptions, SequenceWindow, Side};
use crate::linalg::Mat2;
use crate::multipliers::{multipliers, MultiplierData};
use crate::params::EvalParams;
use crate::{Result, C64};

/// One solved matrix-Jost side in the diagonalized, rescaled frame:
/// `ytilde^±_n = mu_±^n (p_n, q_n)`.
#[derive(Debug, Clone)]
pub struct MatrixJostSolution {
    pub side: Side,
    pub n_tail: i64,
    /// First component of the rescaled nonzero column.
    pub p: SequenceWindow,
    /// Second component.
    pub q: SequenceWindow,
}

/// Matrix Jost data at one `lambda`: the rescaled columns and the
/// reconstructed boundary matrices `Y_0^± = W Ytilde_0^± W^{-1}`.
#[derive(Debug, Clone)]
pub struct MatrixJostPair {
    pub lambda: C64,
    pub md: MultiplierData,
    pub plus: MatrixJostSolution,
    pub minus: MatrixJostSolution,
    pub y0_plus: Mat2,
    pub y0_minus: Mat2,
}

fn contraction_check(
    coeffs: &CoefficientSequence,
    lambda: C64,
    md: &MultiplierData,
    n_tail: i64,
) -> Result<()> {
    let tail_sum = lambda.norm() * coeffs.tail_weight(n_tail);
    let product = tail_sum * 2.0 / md.gap().norm();
    if product >= 0.5 {
        return Err(SpectraError::ContractionFailure {
            n_tail,
            tail_sum,
            product,
        });
    }
    Ok(())
}

/// Solves both diagonalized matrix Volterra systems and reconstructs
/// `Y_0^±`.
pub fn solve_matrix_jost(
    lambda: C64,
    coeffs: &CoefficientSequence,
    params: &EvalParams,
    opts: &JostOptions,
) -> Result<MatrixJostPair> {
    let md = multipliers(lambda, params.eps_ess)?;
    let n_tail = opts
        .n_tail
        .unwrap_or_else(|| auto_n_tail(coeffs, lambda, params))
        .max(2);
    if opts.check_contraction {
        contraction_check(coeffs, lambda, &md, n_tail)?;
    }
    let r = md.ratio();
    let r_inv = md.mu_minus / md.mu_plus;
    let gap = md.gap();
    let store = opts.store.min(n_tail);
    let len = (store + 1) as usize;

    // ---- plus side: backward sweep, zhat tail (1, 0) beyond n_tail ----
    let s0 = lambda * coeffs.tail_gamma_plus(n_tail);
    let s1 = geometric_tail(coeffs, lambda, r, n_tail, Side::Plus);
    let mut p_store = vec![C64::new(1.0, 0.0); len];
    let mut q_store = vec![C64::new(0.0, 0.0); len];
    // running sums over k > n of a_k x_k (flat) and a_k r^{k-n} x_k (geom)
    let mut sp = s0;
    let mut sq = C64::new(0.0, 0.0);
    let mut up = r * s1;
    let mut uq = C64::new(0.0, 0.0);
    let mut n = n_tail - 1;
    loop {
        let a = coeffs.coupling(n, lambda);
        let t = a / gap;
        let rhs_p = 1.0 - (sp + r_inv * sq) / gap;
        let rhs_q = (r * up + uq) / gap;
        // x = (I - D) rhs with D = (a/gap) [[1, 1/r], [-r, -1]]
        let p = rhs_p - t * (rhs_p + r_inv * rhs_q);
        let q = rhs_q + t * (r * rhs_p + rhs_q);
        if n <= store {
            p_store[n as usize] = p;
            q_store[n as usize] = q;
        }
        if n == 0 {
            break;
        }
        sp += a * p;
        sq += a * q;
        up = r * (up + a * p);
        uq = r * (uq + a * q);
        n -= 1;
    }
    let plus = MatrixJostSolution {
        side: Side::Plus,
        n_tail,
        p: SequenceWindow::new(0, p_store),
        q: SequenceWindow::new(0, q_store),
    };

    // ---- minus side: forward sweep, zhat tail (0, 1) below -n_tail ----
    let s0m = lambda * coeffs.tail_gamma_minus(n_tail);
    let s1m = geometric_tail(coeffs, lambda, r, n_tail, Side::Minus);
    let mut p_store = vec![C64::new(0.0, 0.0); len];
    let mut q_store = vec![C64::new(1.0, 0.0); len];
    let mut vp = C64::new(0.0, 0.0); // sum a_k r^{n-k} p_k over k < n
    let mut vq = s1m; // sum a_k r^{n-k-1} q_k over k < n
    let mut fp = C64::new(0.0, 0.0); // flat sums
    let mut fq = s0m;
    let mut n = -n_tail + 1;
    loop {
        let p = (vp + vq) / gap;
        let q = 1.0 - (r * fp + fq) / gap;
        if n >= -store {
            p_store[(n + store) as usize] = p;
            q_store[(n + store) as usize] = q;
        }
        if n == 0 {
            break;
        }
        let a = coeffs.coupling(n, lambda);
        vp = r * (vp + a * p);
        vq = a * q + r * vq;
        fp += a * p;
        fq += a * q;
        n += 1;
    }
    let minus = MatrixJostSolution {
        side: Side::Minus,
        n_tail,
        p: SequenceWindow::new(-store, p_store),
        q: SequenceWindow::new(-store, q_store),
    };

    let zero = C64::new(0.0, 0.0);
    let ytilde0_plus = Mat2::new(plus.p.require(0)?, zero, plus.q.require(0)?, zero);
    let ytilde0_minus = Mat2::new(zero, minus.p.require(0)?, zero, minus.q.require(0)?);
    let y0_plus = md.w.mul(&ytilde0_plus).mul(&md.w_inv);
    let y0_minus = md.w.mul(&ytilde0_minus).mul(&md.w_inv);

    Ok(MatrixJostPair {
        lambda,
        md,
        plus,
        minus,
        y0_plus,
        y0_minus,
    })
}

impl MatrixJostPair {
    /// The Evans function `E = det(Y_0^+ + Y_0^-)`.
    pub fn evans(&self) -> C64 {
        self.y0_plus.add(&self.y0_minus).det()
    }

    /// Scalar Jost values implied by the matrix solution through
    /// `y_n^± = mu_±^{-1} W ytilde_n^±`: returns `(z_n^±, z_{n-1}^±)`.
    pub fn implied_z(&self, side: Side, n: i64) -> Result<(C64, C64)> {
        let md = &self.md;
        match side {
            Side::Plus => {
                let scale = md.mu_plus.powi(n as i32);
                let p = self.plus.p.require(n)?;
                let q = self.plus.q.require(n)?;
                let top = scale * (md.mu_plus * p + md.mu_minus * q) / md.mu_plus;
                let bot = scale * (p + q) / md.mu_plus;
                Ok((top, bot))
            }
            Side::Minus => {
                let scale = md.mu_minus.powi(n as i32);
                let p = self.minus.p.require(n)?;
                let q = self.minus.q.require(n)?;
                let top = scale * (md.mu_plus * p + md.mu_minus * q) / md.mu_minus;
                let bot = scale * (p + q) / md.mu_minus;
                Ok((top, bot))
            }
        }
    }

    /// Second route to the same determinant via the scalar boundary
    /// values: `E = -(z_0^+ z_{-1}^- - z_0^- z_{-1}^+)/(mu_+ - mu_-)`.
    pub fn evans_via_factorization(&self) -> Result<C64> {
        let (z0p, zm1p) = self.implied_z(Side::Plus, 0)?;
        let (z0m, zm1m) = self.implied_z(Side::Minus, 0)?;
        Ok(-(z0p * zm1m - z0m * zm1p) / self.md.gap())
    }
}

/// Evaluates the Evans function at `lambda` (free case: exactly 1).
pub fn evans_function(
    lambda: C64,
    coeffs: &CoefficientSequence,
    params: &EvalParams,
) -> Result<C64> {
    let opts = JostOptions {
        store: 2,
        ..JostOptions::default()
    };
    Ok(solve_matrix_jost(lambda, coeffs, params, &opts)?.evans())
}
