//! Eigenvalue location and the cross-validated five-function record.
//!
//! Three independent routes locate the unstable eigenvalue of an
//! admissible configuration: real-axis bisection on
//! `phi(lambda) = lambda/rho_0 + g_+ + g_-`, argument-principle counting
//! plus secant refinement of the Evans function, and the finite-section
//! oracle (characteristic polynomial of the truncated operator). The
//! routes share no numerics beyond the coefficient sequence, which is the
//! point: their agreement validates all of them.

use serde::Serialize;

use crate::contfrac::{continued_fraction, g_function_from_pair, FracSide};
use crate::error::SpectraError;
use crate::evans::{evans_function, solve_matrix_jost};
use crate::flow::CoefficientSequence;
use crate::fredholm::{det_pencil_extrapolated, det_system_extrapolated};
use crate::jost::{auto_n_tail, JostOptions, JostPair, SequenceWindow};
use crate::linalg::{lu_det, CMatrix};
use crate::multipliers::SpectralPoint;
use crate::params::EvalParams;
use crate::{Result, C64};

/// All five spectral function values at one `lambda`, with truncation
/// metadata and the cross-validation gap.
#[derive(Debug, Clone, Serialize)]
pub struct FiveFunctionRecord {
    pub lambda: C64,
    /// Extrapolated `det(I - K)`.
    pub det_k: C64,
    /// Raw section determinants behind the extrapolation.
    pub det_k_n: C64,
    pub det_k_2n: C64,
    /// Extrapolated `det(I - T)`.
    pub det_t: C64,
    pub evans: C64,
    pub jost: C64,
    /// Present iff `Re lambda > 0` inside the sector and rho is defined.
    pub g_fun: Option<C64>,
    pub n_used: usize,
    /// Window used for the system-pencil sections (its matrices are twice
    /// the dimension, so it runs at half the scalar window by default).
    pub t_section_used: usize,
    pub n_tail_used: i64,
    pub depth_used: Option<usize>,
    pub max_pairwise_gap: f64,
}

fn pairwise_gap(values: &[C64]) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            let denom = values[i].norm().max(values[j].norm()).max(1e-300);
            worst = worst.max((values[i] - values[j]).norm() / denom);
        }
    }
    worst
}

/// Evaluates all five functions (four when `G` is undefined) at `lambda`.
pub fn evaluate_five(
    coeffs: &CoefficientSequence,
    lambda: C64,
    params: &EvalParams,
) -> Result<FiveFunctionRecord> {
    SpectralPoint::new(lambda).admit(params.eps_ess)?;
    let n_tail = params
        .n_tail
        .unwrap_or_else(|| auto_n_tail(coeffs, lambda, params));
    let opts = JostOptions {
        n_tail: Some(n_tail),
        store: 2,
        check_contraction: true,
    };
    let jpair = JostPair::solve(lambda, coeffs, params, &opts)?;
    let jost = jpair.jost_function(coeffs)?;
    let evans = solve_matrix_jost(lambda, coeffs, params, &opts)?.evans();
    let kd = det_pencil_extrapolated(lambda, coeffs, params.n_section, params)?;
    let t_section = (params.n_section / 2).max(16);
    let td = det_system_extrapolated(lambda, coeffs, t_section, params)?;
    let (g_fun, depth_used) = if coeffs.has_rho() {
        match g_function_from_pair(&jpair, coeffs, params) {
            Ok((g, depth)) => (Some(g), Some(depth)),
            Err(SpectraError::SectorViolation { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    let mut values = vec![kd.extrapolated, td.extrapolated, evans, jost];
    if let Some(g) = g_fun {
        values.push(g);
    }
    Ok(FiveFunctionRecord {
        lambda,
        det_k: kd.extrapolated,
        det_k_n: kd.det_n,
        det_k_2n: kd.det_2n,
        det_t: td.extrapolated,
        evans,
        jost,
        g_fun,
        n_used: params.n_section,
        t_section_used: t_section,
        n_tail_used: n_tail,
        depth_used,
        max_pairwise_gap: pairwise_gap(&values),
    })
}

/// How an eigenvalue estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    RealBisection,
    ArgumentPrincipleRefine,
    Oracle,
}

/// A located eigenvalue with its certificate data.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueResult {
    pub lambda_star: C64,
    pub method: Method,
    pub five_values: FiveFunctionRecord,
    pub eigensequence: SequenceWindow,
    /// Relative l2 residual of the eigenvalue equation on the window.
    pub residual: f64,
    pub winding: Option<i64>,
}

/// `phi(lambda) = lambda/rho_0 + g_+(lambda) + g_-(lambda)` for real
/// positive `lambda`; its sign change brackets the positive eigenvalue.
pub fn phi(lambda: f64, coeffs: &CoefficientSequence, params: &EvalParams) -> Result<f64> {
    let l = C64::new(lambda, 0.0);
    let gp = continued_fraction(FracSide::Plus, l, coeffs, params.fraction_tol, params)?;
    let gm = continued_fraction(FracSide::Minus, l, coeffs, params.fraction_tol, params)?;
    Ok(lambda / coeffs.rho(0)? + gp.value.re + gm.value.re)
}

/// Locates the positive eigenvalue by bracketing and bisecting `phi`:
/// `phi -> 2 > 0` as `lambda -> 0+` and `phi ~ lambda/rho_0 < 0` at
/// infinity, so a sign change always exists for admissible coefficients.
pub fn find_real_eigenvalue(
    coeffs: &CoefficientSequence,
    params: &EvalParams,
) -> Result<EigenvalueResult> {
    let rho0 = coeffs.rho(0)?;
    if rho0 >= 0.0 {
        return Err(SpectraError::Precondition(
            "positive-eigenvalue search requires rho_0 < 0".into(),
        ));
    }
    let mut a = 1e-4;
    let fa = phi(a, coeffs, params)?;
    if fa <= 0.0 {
        return Err(SpectraError::BracketFailure(format!(
            "phi({a}) = {fa} <= 0; expected the small-lambda limit 2"
        )));
    }
    let mut b = 0.5;
    let mut fb = phi(b, coeffs, params)?;
    while fb > 0.0 {
        b *= 2.0;
        if b > 1e3 {
            return Err(SpectraError::BracketFailure(
                "no sign change of phi up to lambda = 1e3".into(),
            ));
        }
        fb = phi(b, coeffs, params)?;
    }
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let fm = phi(mid, coeffs, params)?;
        if fm.abs() <= 1e-10 || (b - a) <= 1e-12 {
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let lambda_star = C64::new(mid, 0.0);
    let (eigensequence, residual) = eigensequence(coeffs, lambda_star, 64, params)?;
    let five_values = evaluate_five(coeffs, lambda_star, params)?;
    Ok(EigenvalueResult {
        lambda_star,
        method: Method::RealBisection,
        five_values,
        eigensequence,
        residual,
        winding: None,
    })
}

/// Builds the eigensequence at a located eigenvalue by gluing the two
/// Jost solutions at `n = 0` (`z^+` rightward, `kappa z^-` leftward with
/// `kappa = z^+_0 / z^-_0`), converting to `w_n = z_n / rho_n` and
/// normalizing. Returns the sequence and the relative l2 residual of
/// `rho_{n-1} w_{n-1} - rho_{n+1} w_{n+1} = lambda w_n` over the interior.
pub fn eigensequence(
    coeffs: &CoefficientSequence,
    lambda_star: C64,
    half_width: i64,
    params: &EvalParams,
) -> Result<(SequenceWindow, f64)> {
    let opts = JostOptions {
        n_tail: params.n_tail,
        store: half_width + 1,
        check_contraction: true,
    };
    let pair = JostPair::solve(lambda_star, coeffs, params, &opts)?;
    let kappa = pair.z_plus(0)? / pair.z_minus(0)?;
    let mut w = Vec::with_capacity((2 * half_width + 1) as usize);
    for n in -half_width..=half_width {
        let z = if n >= 0 {
            pair.z_plus(n)?
        } else {
            kappa * pair.z_minus(n)?
        };
        w.push(z / coeffs.rho(n)?);
    }
    let norm = w.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for v in &mut w {
        *v /= norm;
    }
    let seq = SequenceWindow::new(-half_width, w);
    let mut res_sq = 0.0;
    let mut scale_sq = 0.0;
    for n in (-half_width + 1)..half_width {
        let wm = seq.require(n - 1)?;
        let wc = seq.require(n)?;
        let wp = seq.require(n + 1)?;
        let r = coeffs.rho(n - 1)? * wm - coeffs.rho(n + 1)? * wp - lambda_star * wc;
        res_sq += r.norm_sqr();
        scale_sq += (lambda_star * wc).norm_sqr();
    }
    let residual = (res_sq / scale_sq.max(1e-300)).sqrt();
    if residual > 1e-6 {
        return Err(SpectraError::LargeResidual {
            residual,
            threshold: 1e-6,
        });
    }
    Ok((seq, residual))
}

/// Normalized proportionality defect of the two Jost solutions over the
/// overlap `[-overlap, overlap]`; near zero exactly at eigenvalues.
pub fn proportionality_defect(
    coeffs: &CoefficientSequence,
    lambda: C64,
    overlap: i64,
    params: &EvalParams,
) -> Result<f64> {
    let opts = JostOptions {
        n_tail: params.n_tail,
        store: overlap + 1,
        check_contraction: true,
    };
    let pair = JostPair::solve(lambda, coeffs, params, &opts)?;
    let u = pair.z_plus_window(coeffs, -overlap, overlap)?;
    let v = pair.z_minus_window(coeffs, -overlap, overlap)?;
    let nu = u.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|(_, x)| x.norm_sqr()).sum::<f64>().sqrt();
    let phase = {
        let s = (u.require(0)? / nu) / (v.require(0)? / nv);
        s / s.norm()
    };
    let mut defect = 0.0;
    for n in -overlap..=overlap {
        defect += (u.require(n)? / nu - phase * v.require(n)? / nv).norm_sqr();
    }
    Ok(defect.sqrt())
}

/// Axis-aligned rectangle in the spectral plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    /// Distance from the rectangle (as a solid set) to the essential
    /// spectrum segment.
    pub fn distance_to_essential(&self) -> f64 {
        let dx = if self.re_lo > 0.0 {
            self.re_lo
        } else if self.re_hi < 0.0 {
            -self.re_hi
        } else {
            0.0
        };
        let dy = if self.im_lo > 2.0 {
            self.im_lo - 2.0
        } else if self.im_hi < -2.0 {
            -2.0 - self.im_hi
        } else {
            0.0
        };
        (dx * dx + dy * dy).sqrt()
    }
}

fn arc_phase<F>(
    f: &F,
    a: C64,
    fa: C64,
    b: C64,
    fb: C64,
    depth: usize,
    min_abs: &mut f64,
) -> Result<f64>
where
    F: Fn(C64) -> Result<C64>,
{
    let dphi = (fb / fa).arg();
    // phase steps below pi/2 unwrap unambiguously
    if dphi.abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(dphi);
    }
    if depth == 0 {
        return Err(SpectraError::BoundaryZero {
            min_abs: fa.norm().min(fb.norm()),
        });
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid)?;
    *min_abs = min_abs.min(fm.norm());
    if fm.norm() <= 1e-8 {
        return Err(SpectraError::BoundaryZero { min_abs: fm.norm() });
    }
    Ok(arc_phase(f, a, fa, mid, fm, depth - 1, min_abs)?
        + arc_phase(f, mid, fm, b, fb, depth - 1, min_abs)?)
}

/// Counts zeros of the Evans function inside a rectangle by the argument
/// principle, with adaptive boundary refinement until every phase step is
/// below `pi/2`.
pub fn winding_number(
    coeffs: &CoefficientSequence,
    rect: Rect,
    samples_per_side: usize,
    params: &EvalParams,
) -> Result<i64> {
    if rect.re_lo >= rect.re_hi || rect.im_lo >= rect.im_hi {
        return Err(SpectraError::InvalidInput(format!(
            "degenerate contour rectangle {rect:?}"
        )));
    }
    let dist = rect.distance_to_essential();
    if dist <= params.eps_ess {
        return Err(SpectraError::EssentialSpectrumIntersection { dist });
    }
    let f = |lambda: C64| evans_function(lambda, coeffs, params);
    let corners = [
        C64::new(rect.re_lo, rect.im_lo),
        C64::new(rect.re_hi, rect.im_lo),
        C64::new(rect.re_hi, rect.im_hi),
        C64::new(rect.re_lo, rect.im_hi),
    ];
    let m = samples_per_side.max(2);
    let mut pts = Vec::with_capacity(4 * m);
    for side in 0..4 {
        let a = corners[side];
        let b = corners[(side + 1) % 4];
        for j in 0..m {
            pts.push(a + (b - a) * (j as f64 / m as f64));
        }
    }
    let vals: Vec<C64> = pts.iter().map(|&l| f(l)).collect::<Result<_>>()?;
    let mut min_abs = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if min_abs <= 1e-8 {
        return Err(SpectraError::BoundaryZero { min_abs });
    }
    let mut total = 0.0;
    for i in 0..pts.len() {
        let j = (i + 1) % pts.len();
        total += arc_phase(&f, pts[i], vals[i], pts[j], vals[j], 48, &mut min_abs)?;
    }
    let w = total / (2.0 * std::f64::consts::PI);
    let rounded = w.round();
    if (w - rounded).abs() > 0.1 {
        return Err(SpectraError::NonConvergence {
            context: "winding number not integral".into(),
            reached: (w - rounded).abs(),
            wanted: 0.1,
        });
    }
    Ok(rounded as i64)
}

/// Outcome of secant refinement on the Evans function.
#[derive(Debug, Clone, Serialize)]
pub struct RefinedZero {
    pub lambda: C64,
    pub converged: bool,
    pub iterations: usize,
    pub f_abs: f64,
    pub last_step: f64,
}

/// Secant iteration on `E(lambda)` from a seed, stopping at
/// `|E| <= 1e-10 * scale` or step `<= 1e-12`; at most 100 iterations.
/// Divergence is reported through the `converged` flag, not an error.
pub fn refine_zero(
    coeffs: &CoefficientSequence,
    seed: C64,
    scale: f64,
    params: &EvalParams,
) -> Result<RefinedZero> {
    let f = |lambda: C64| evans_function(lambda, coeffs, params);
    let mut x0 = seed;
    let mut f0 = f(x0)?;
    let mut x1 = seed + C64::new(1e-6 * seed.norm().max(1.0), 0.0);
    let mut f1 = match f(x1) {
        Ok(v) => v,
        Err(_) => {
            return Ok(RefinedZero {
                lambda: x0,
                converged: false,
                iterations: 0,
                f_abs: f0.norm(),
                last_step: 0.0,
            })
        }
    };
    let mut last_step = (x1 - x0).norm();
    for it in 0..100 {
        if f1.norm() <= 1e-10 * scale || last_step <= 1e-12 * x1.norm().max(1.0) {
            return Ok(RefinedZero {
                lambda: x1,
                converged: true,
                iterations: it,
                f_abs: f1.norm(),
                last_step,
            });
        }
        let df = f1 - f0;
        if df.norm() == 0.0 {
            break;
        }
        let step = f1 * (x1 - x0) / df;
        let x2 = x1 - step;
        if SpectralPoint::new(x2).dist_essential <= 2.0 * params.eps_ess || x2.norm() > 1e3 {
            break;
        }
        let f2 = match f(x2) {
            Ok(v) => v,
            Err(_) => break,
        };
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        last_step = step.norm();
    }
    Ok(RefinedZero {
        lambda: x1,
        converged: f1.norm() <= 1e-8 * scale,
        iterations: 100,
        f_abs: f1.norm(),
        last_step,
    })
}

/// A determinant value with a separate power-of-two exponent, so that the
/// characteristic-polynomial recurrence never overflows.
#[derive(Debug, Clone, Copy)]
pub struct ScaledDet {
    pub mantissa: f64,
    pub exp2: i64,
}

impl ScaledDet {
    pub fn sign(&self) -> f64 {
        self.mantissa.signum()
    }

    /// The plain value; may overflow to infinity for large sections.
    pub fn value(&self) -> f64 {
        self.mantissa * 2f64.powi(self.exp2.clamp(-1400, 1400) as i32)
    }
}

/// Characteristic polynomial `det(L_N - lambda I)` of the `(2N+1)` finite
/// section of `(S - S*) diag(rho)` with zero boundary conditions,
/// evaluated by the tridiagonal three-term recurrence with overflow
/// rescaling.
pub fn char_poly(coeffs: &CoefficientSequence, n: usize, lambda: f64) -> Result<ScaledDet> {
    let half = n as i64;
    let mut d_prev = 1.0f64; // empty determinant
    let mut d_cur = -lambda; // leading 1x1 block
    let mut exp2 = 0i64;
    for i in 2..=(2 * n + 1) as i64 {
        // row i couples to row i-1; in lattice coordinates the pair is
        // (n-1, n) with off-diagonal product -rho_{n-1} rho_n
        let nn = i - 1 - half;
        let prod = coeffs.rho(nn - 1)? * coeffs.rho(nn)?;
        let d_next = -lambda * d_cur + prod * d_prev;
        d_prev = d_cur;
        d_cur = d_next;
        let mag = d_cur.abs().max(d_prev.abs());
        if mag > 1e150 {
            d_cur *= 2f64.powi(-512);
            d_prev *= 2f64.powi(-512);
            exp2 += 512;
        } else if mag < 1e-150 && mag > 0.0 {
            d_cur *= 2f64.powi(512);
            d_prev *= 2f64.powi(512);
            exp2 -= 512;
        }
    }
    Ok(ScaledDet {
        mantissa: d_cur,
        exp2,
    })
}

/// Dense complex determinant of the same section, the independent
/// cross-check for `char_poly` at small sizes.
pub fn char_poly_dense(coeffs: &CoefficientSequence, n: usize, lambda: f64) -> Result<C64> {
    let half = n as i64;
    let dim = 2 * n + 1;
    let mut m = CMatrix::zeros(dim);
    for i in 0..dim {
        let nn = i as i64 - half;
        m[(i, i)] = C64::new(-lambda, 0.0);
        if i > 0 {
            m[(i, i - 1)] = C64::new(coeffs.rho(nn - 1)?, 0.0);
        }
        if i + 1 < dim {
            m[(i, i + 1)] = C64::new(-coeffs.rho(nn + 1)?, 0.0);
        }
    }
    lu_det(m)
}

/// Real roots of the characteristic polynomial in `(0, lambda_max]`,
/// located by a sign-change scan plus bisection. This is the independent
/// finite-section oracle for the eigenvalue machinery.
pub fn finite_section_oracle(
    coeffs: &CoefficientSequence,
    n: usize,
    lambda_max: f64,
    scan_points: usize,
) -> Result<Vec<f64>> {
    if n < 8 {
        return Err(SpectraError::Precondition(
            "finite sections below N = 8 carry no spectral information".into(),
        ));
    }
    let eval = |l: f64| -> Result<f64> { Ok(char_poly(coeffs, n, l)?.sign()) };
    let mut roots = Vec::new();
    let mut prev_l = lambda_max * 1e-6;
    let mut prev_s = eval(prev_l)?;
    for j in 1..=scan_points {
        let l = lambda_max * j as f64 / scan_points as f64;
        let s = eval(l)?;
        if s == 0.0 {
            roots.push(l);
        } else if prev_s != 0.0 && s != prev_s {
            let (mut a, mut b) = (prev_l, l);
            let mut sa = prev_s;
            for _ in 0..90 {
                let mid = 0.5 * (a + b);
                let sm = eval(mid)?;
                if sm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if sm == sa {
                    a = mid;
                } else {
                    b = mid;
                }
                sa = eval(a)?;
                if b - a < 1e-13 * b.max(1.0) {
                    break;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev_l = l;
        prev_s = s;
    }
    Ok(roots)
}
