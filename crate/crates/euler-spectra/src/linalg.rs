//! Small dense complex linear algebra: 2x2 matrices and a pivoted LU
//! determinant for the finite-section pencils.

use crate::error::SpectraError;
use crate::{Result, C64};

/// Column-major-free 2x2 complex matrix with value semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2::new(z, z, z, z)
    }

    pub fn identity() -> Self {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        Mat2::new(o, z, z, o)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a + rhs.a,
            self.b + rhs.b,
            self.c + rhs.c,
            self.d + rhs.d,
        )
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        Mat2::new(
            self.a - rhs.a,
            self.b - rhs.b,
            self.c - rhs.c,
            self.d - rhs.d,
        )
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn apply(&self, v: (C64, C64)) -> (C64, C64) {
        (self.a * v.0 + self.b * v.1, self.c * v.0 + self.d * v.1)
    }

    /// Max entrywise modulus, used by identity checks.
    pub fn max_abs(&self) -> f64 {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest row sum of entry moduli (the induced infinity norm).
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Determinant by in-place LU with partial pivoting.
///
/// Pivot choice (largest modulus, first index on ties) is deterministic, so
/// repeated runs give bit-identical results. An exactly vanishing pivot
/// column aborts with [`SpectraError::SingularFactorization`].
pub fn lu_det(mut m: CMatrix) -> Result<C64> {
    let n = m.dim;
    let mut det = C64::new(1.0, 0.0);
    for j in 0..n {
        let mut piv = j;
        let mut piv_abs = m[(j, j)].norm_sqr();
        for i in (j + 1)..n {
            let a = m[(i, j)].norm_sqr();
            if a > piv_abs {
                piv_abs = a;
                piv = i;
            }
        }
        if piv_abs == 0.0 {
            return Err(SpectraError::SingularFactorization {
                pivot: 0.0,
                step: j,
            });
        }
        if piv != j {
            let (lo, hi) = m.data.split_at_mut(piv * n);
            lo[j * n..(j + 1) * n].swap_with_slice(&mut hi[..n]);
            det = -det;
        }
        let pivot = m[(j, j)];
        det *= pivot;
        let inv = C64::new(1.0, 0.0) / pivot;
        for i in (j + 1)..n {
            let factor = m[(i, j)] * inv;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            let (above, below) = m.data.split_at_mut(i * n);
            let row_j = &above[j * n + j + 1..(j + 1) * n];
            let row_i = &mut below[j + 1..n];
            for (x, y) in row_i.iter_mut().zip(row_j) {
                *x -= factor * *y;
            }
        }
    }
    Ok(det)
}
