//! Direct solvers for the banded systems produced by the implicit step.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thomas algorithm for a complex tridiagonal system. `lower[0]` and
/// `upper[n-1]` are ignored. The solution overwrites `rhs`.
pub fn solve_tridiagonal(
    lower: &[Complex64],
    diag: &[Complex64],
    upper: &[Complex64],
    rhs: &mut [Complex64],
) -> Result<()> {
    let n = rhs.len();
    if lower.len() != n || diag.len() != n || upper.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: diag.len(),
        });
    }
    if n == 0 {
        return Ok(());
    }
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    let mut pivot = diag[0];
    if pivot.norm_sqr() == 0.0 {
        return Err(Error::Domain("singular tridiagonal system".into()));
    }
    c[0] = upper[0] / pivot;
    rhs[0] /= pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.norm_sqr() == 0.0 {
            return Err(Error::Domain("singular tridiagonal system".into()));
        }
        c[i] = upper[i] / pivot;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= c[i] * next;
    }
    Ok(())
}

/// Row-major 2x2 real block.
pub type Block = [f64; 4];

#[inline]
fn mat_mul(a: &Block, b: &Block) -> Block {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[inline]
fn mat_vec(a: &Block, x: [f64; 2]) -> [f64; 2] {
    [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]]
}

#[inline]
fn mat_sub(a: &Block, b: &Block) -> Block {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
fn inverse(a: &Block) -> Option<Block> {
    let det = a[0] * a[3] - a[1] * a[2];
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(det.abs() > 1e-300 && det.abs() > 1e-14 * scale * scale) {
        return None;
    }
    let inv = 1.0 / det;
    Some([a[3] * inv, -a[1] * inv, -a[2] * inv, a[0] * inv])
}

/// Block Thomas algorithm for a tridiagonal system with 2x2 real blocks.
/// `lower[0]` and `upper[n-1]` are ignored. The solution overwrites `rhs`.
pub fn solve_block_tridiagonal(
    lower: &[Block],
    diag: &[Block],
    upper: &[Block],
    rhs: &mut [[f64; 2]],
) -> Result<()> {
    let n = rhs.len();
    if lower.len() != n || diag.len() != n || upper.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: diag.len(),
        });
    }
    if n == 0 {
        return Ok(());
    }
    let singular = || Error::Domain("singular block tridiagonal system".into());
    let mut c: Vec<Block> = vec![[0.0; 4]; n];
    let mut inv = inverse(&diag[0]).ok_or_else(singular)?;
    c[0] = mat_mul(&inv, &upper[0]);
    rhs[0] = mat_vec(&inv, rhs[0]);
    for i in 1..n {
        let pivot = mat_sub(&diag[i], &mat_mul(&lower[i], &c[i - 1]));
        inv = inverse(&pivot).ok_or_else(singular)?;
        c[i] = mat_mul(&inv, &upper[i]);
        let lr = mat_vec(&lower[i], rhs[i - 1]);
        rhs[i] = mat_vec(&inv, [rhs[i][0] - lr[0], rhs[i][1] - lr[1]]);
    }
    for i in (0..n - 1).rev() {
        let cx = mat_vec(&c[i], rhs[i + 1]);
        rhs[i] = [rhs[i][0] - cx[0], rhs[i][1] - cx[1]];
    }
    Ok(())
}
