//! Dirichlet problem `Δp = rhs` in Ω, `p = h₀` on ∂Ω, solved directly.

use crate::error::{Error, Result};
use crate::mesh::SpatialField;
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone)]
pub struct PoissonProblem {
    /// Right-hand side; boundary entries are ignored.
    pub rhs: SpatialField,
    pub boundary_left: f64,
    pub boundary_right: f64,
}

/// Three-point discrete Poisson solve. The boundary values are copied exactly.
pub fn solve_poisson(problem: &PoissonProblem) -> Result<SpatialField> {
    let grid = *problem.rhs.grid();
    let n = grid.n_cells();
    if n < 2 {
        return Err(Error::GridTooCoarse {
            n_cells: n,
            required: 2,
        });
    }
    let (left, right) = (problem.boundary_left, problem.boundary_right);
    if !(left.is_finite() && right.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "boundary values must be finite, got ({left}, {right})"
        )));
    }
    let h2 = grid.h().powi(2);
    let interior = n - 1;
    let f = problem.rhs.values();

    // (p_{i-1} − 2 p_i + p_{i+1}) = h² rhs_i, boundary values moved right.
    let mut b: Vec<f64> = (1..n).map(|i| h2 * f[i]).collect();
    b[0] -= left;
    b[interior - 1] -= right;
    let sub = vec![1.0; interior];
    let diag = vec![-2.0; interior];
    let sup = vec![1.0; interior];
    Tridiagonal::factor(&sub, &diag, &sup).solve_in_place(&mut b);

    let mut values = Vec::with_capacity(n + 1);
    values.push(left);
    values.extend_from_slice(&b);
    values.push(right);
    SpatialField::new(grid, values)
}
