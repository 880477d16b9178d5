//! Fixed-size complex linear algebra on the 8-dimensional density vector.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type Mat8 = SMatrix<C64, 8, 8>;
pub type Vec8 = SVector<C64, 8>;

/// Solves with a 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Solution of a checked linear solve.
#[derive(Clone, Copy, Debug)]
pub struct Solved {
    pub x: Vec8,
    /// `‖A x − b‖₁ / ‖b‖₁` (absolute when `b = 0`).
    pub residual: f64,
    pub condition: f64,
}

pub fn norm1_vec(v: &Vec8) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// Maximum absolute column sum.
pub fn norm1(a: &Mat8) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solve `A x = b` by LU with partial pivoting.
///
/// The 1-norm condition number is computed exactly from the inverse, which is
/// cheap at this size.
pub fn solve_checked(a: &Mat8, b: &Vec8) -> Result<Solved> {
    let lu = a.lu();
    let inverse = lu.try_inverse().ok_or(Error::SingularGenerator { condition: f64::INFINITY })?;
    let condition = norm1(a) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularGenerator { condition });
    }
    let x = lu.solve(b).ok_or(Error::SingularGenerator { condition })?;
    let scale = norm1_vec(b);
    let r = norm1_vec(&(a * x - b));
    let residual = if scale > 0.0 { r / scale } else { r };
    Ok(Solved { x, residual, condition })
}
