//! Thomas elimination for tridiagonal systems.

/// LU factors of a tridiagonal matrix without pivoting.
///
/// Valid for diagonally dominant matrices, which is all the solvers here build.
#[derive(Debug, Clone)]
pub(crate) struct Tridiagonal {
    lower: Vec<f64>,
    upper: Vec<f64>,
    // Reciprocals of the eliminated pivots.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// Factor the matrix with sub-diagonal `sub` (`sub[i]` multiplies `x[i-1]`
    /// in row `i`, `sub[0]` unused), main diagonal `diag` and super-diagonal
    /// `sup` (`sup[n-1]` unused).
    pub(crate) fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        assert!(n >= 1 && sub.len() == n && sup.len() == n);
        let mut inv_pivot = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut pivot = diag[0];
        assert!(pivot != 0.0, "singular tridiagonal system");
        inv_pivot[0] = 1.0 / pivot;
        for i in 1..n {
            upper[i - 1] = sup[i - 1] * inv_pivot[i - 1];
            pivot = diag[i] - sub[i] * upper[i - 1];
            assert!(pivot != 0.0, "singular tridiagonal system");
            inv_pivot[i] = 1.0 / pivot;
        }
        Self {
            lower: sub.to_vec(),
            upper,
            inv_pivot,
        }
    }

    /// Overwrites `rhs` with the solution.
    pub(crate) fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.inv_pivot.len();
        assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}
