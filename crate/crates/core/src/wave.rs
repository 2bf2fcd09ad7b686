//! Implicit finite-difference solver for
//!
//! ```text
//! ∂ₜ²u − ∂ₓ(p ∂ₓu) = F   in Ω × (0, T)
//! u = u₀, ∂ₜu = 0        at t = 0
//! p ∂ₓu = 0              on ∂Ω
//! ```
//!
//! Space: flux form with arithmetic-mean interface coefficients and mirrored
//! ghost nodes at both ends. Time: average-acceleration Newmark, written as the
//! three-level scheme
//!
//! ```text
//! (uᵏ⁺¹ − 2uᵏ + uᵏ⁻¹)/τ² + A(uᵏ⁺¹ + 2uᵏ + uᵏ⁻¹)/4 = (Fᵏ⁺¹ + 2Fᵏ + Fᵏ⁻¹)/4
//! ```
//!
//! with the virtual level `u⁻¹ = u¹` (and `F⁻¹ = F¹`) encoding the zero initial
//! velocity. Every level is one tridiagonal solve with a fixed matrix, which is
//! factored once per solver.
//!
//! The backward (adjoint) problem with terminal data at `t = T` is solved by
//! running the same scheme on the time-reversed source.

use crate::error::{Error, Result};
use crate::mesh::{Grid1D, SpaceTimeField, SpatialField, TimeGrid};
use crate::tridiag::Tridiagonal;
use crate::window::ObservationWindow;

/// Forward problem data. The initial velocity is always zero and the boundary
/// condition is homogeneous Neumann.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    pub p: SpatialField,
    pub source: SpaceTimeField,
    pub initial_value: SpatialField,
}

impl WaveProblem {
    pub fn new(p: SpatialField, source: SpaceTimeField, initial_value: SpatialField) -> Result<Self> {
        let problem = Self {
            p,
            source,
            initial_value,
        };
        problem.validate()?;
        Ok(problem)
    }

    fn validate(&self) -> Result<()> {
        check_positive(&self.p)?;
        if self.source.grid() != self.p.grid() || self.initial_value.grid() != self.p.grid() {
            return Err(Error::DimensionMismatch(
                "coefficient, source and initial value must share one grid".into(),
            ));
        }
        Ok(())
    }
}

pub(crate) fn check_positive(p: &SpatialField) -> Result<()> {
    match p.values().iter().position(|&v| v <= 0.0) {
        Some(node) => Err(Error::DegenerateCoefficient {
            node,
            value: p.values()[node],
        }),
        None => Ok(()),
    }
}

/// Interface coefficients `p_{i+1/2} = (p_i + p_{i+1}) / 2`.
fn midpoints(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// `out = A u` where `A ≈ −∂ₓ(c ∂ₓ ·)` with mirrored ghost nodes.
fn apply_stiffness(mid: &[f64], h2: f64, u: &[f64], out: &mut [f64]) {
    let n = u.len() - 1;
    out[0] = 2.0 * mid[0] * (u[0] - u[1]) / h2;
    for i in 1..n {
        out[i] = (mid[i - 1] * (u[i] - u[i - 1]) + mid[i] * (u[i] - u[i + 1])) / h2;
    }
    out[n] = 2.0 * mid[n - 1] * (u[n] - u[n - 1]) / h2;
}

/// Discrete `∂ₓ(c ∂ₓu)` with the same flux stencil as the wave operator.
pub fn divergence_flux(c: &SpatialField, u: &SpatialField) -> Result<SpatialField> {
    if c.grid() != u.grid() {
        return Err(Error::DimensionMismatch("flux operands on different grids".into()));
    }
    let h2 = c.grid().h().powi(2);
    let mut out = vec![0.0; u.len()];
    apply_stiffness(&midpoints(c.values()), h2, u.values(), &mut out);
    out.iter_mut().for_each(|v| *v = -*v);
    SpatialField::new(*c.grid(), out)
}

/// Time stepper for a fixed coefficient and time grid.
#[derive(Debug, Clone)]
pub struct WaveSolver {
    grid: Grid1D,
    tgrid: TimeGrid,
    mid: Vec<f64>,
    lhs: Tridiagonal,
}

impl WaveSolver {
    pub fn new(p: &SpatialField, tgrid: TimeGrid) -> Result<Self> {
        check_positive(p)?;
        let grid = *p.grid();
        let n = grid.n_cells();
        let h2 = grid.h().powi(2);
        let inv_tau2 = 1.0 / tgrid.tau().powi(2);
        let mid = midpoints(p.values());

        // I/τ² + A/4
        let mut sub = vec![0.0; n + 1];
        let mut diag = vec![0.0; n + 1];
        let mut sup = vec![0.0; n + 1];
        diag[0] = inv_tau2 + 0.25 * 2.0 * mid[0] / h2;
        sup[0] = -0.25 * 2.0 * mid[0] / h2;
        for i in 1..n {
            sub[i] = -0.25 * mid[i - 1] / h2;
            diag[i] = inv_tau2 + 0.25 * (mid[i - 1] + mid[i]) / h2;
            sup[i] = -0.25 * mid[i] / h2;
        }
        sub[n] = -0.25 * 2.0 * mid[n - 1] / h2;
        diag[n] = inv_tau2 + 0.25 * 2.0 * mid[n - 1] / h2;

        Ok(Self {
            grid,
            tgrid,
            mid,
            lhs: Tridiagonal::factor(&sub, &diag, &sup),
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn tgrid(&self) -> &TimeGrid {
        &self.tgrid
    }

    fn check_mesh(&self, source: &SpaceTimeField, initial: &SpatialField) -> Result<()> {
        if source.grid() != &self.grid || source.tgrid() != &self.tgrid {
            return Err(Error::DimensionMismatch(
                "source does not live on the solver mesh".into(),
            ));
        }
        if initial.grid() != &self.grid {
            return Err(Error::DimensionMismatch(
                "initial value does not live on the solver grid".into(),
            ));
        }
        Ok(())
    }

    /// Runs the scheme from `u⁰ = initial` with zero initial velocity.
    pub fn solve(&self, source: &SpaceTimeField, initial: &SpatialField) -> Result<SpaceTimeField> {
        self.check_mesh(source, initial)?;
        let nn = self.grid.n_nodes();
        let levels = self.tgrid.n_levels();
        let h2 = self.grid.h().powi(2);
        let inv_tau2 = 1.0 / self.tgrid.tau().powi(2);

        let mut u = vec![0.0; nn * levels];
        u[..nn].copy_from_slice(initial.values());
        let mut a_u = vec![0.0; nn];
        let mut a_prev = vec![0.0; nn];
        let mut rhs = vec![0.0; nn];

        // First step, u⁻¹ = u¹ and F⁻¹ = F¹.
        apply_stiffness(&self.mid, h2, &u[..nn], &mut a_u);
        {
            let f0 = source.level(0);
            let f1 = source.level(1);
            for i in 0..nn {
                rhs[i] = u[i] * inv_tau2 - 0.25 * a_u[i] + 0.25 * (f0[i] + f1[i]);
            }
        }
        self.lhs.solve_in_place(&mut rhs);
        u[nn..2 * nn].copy_from_slice(&rhs);

        std::mem::swap(&mut a_prev, &mut a_u);
        for k in 1..self.tgrid.n_steps() {
            let (done, rest) = u.split_at_mut((k + 1) * nn);
            let cur = &done[k * nn..];
            let prev = &done[(k - 1) * nn..k * nn];
            apply_stiffness(&self.mid, h2, cur, &mut a_u);
            let (fp, fc, fn_) = (source.level(k - 1), source.level(k), source.level(k + 1));
            for i in 0..nn {
                rhs[i] = (2.0 * cur[i] - prev[i]) * inv_tau2
                    - 0.25 * (2.0 * a_u[i] + a_prev[i])
                    + 0.25 * (fn_[i] + 2.0 * fc[i] + fp[i]);
            }
            self.lhs.solve_in_place(&mut rhs);
            rest[..nn].copy_from_slice(&rhs);
            std::mem::swap(&mut a_prev, &mut a_u);
        }
        SpaceTimeField::from_levels(self.grid, self.tgrid, u)
    }

    /// Solves with zero initial data.
    pub fn solve_with_source(&self, source: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.solve(source, &SpatialField::zeros(self.grid))
    }

    /// Backward problem with zero terminal data at `t = T`: the forward scheme
    /// applied to the time-reversed source, reversed back.
    pub fn solve_terminal(&self, source: &SpaceTimeField) -> Result<SpaceTimeField> {
        Ok(self
            .solve_with_source(&source.reversed_in_time())?
            .reversed_in_time())
    }

    /// Largest per-level residual of the implicit scheme for a computed `u`.
    pub fn scheme_residual(
        &self,
        source: &SpaceTimeField,
        initial: &SpatialField,
        u: &SpaceTimeField,
    ) -> Result<f64> {
        self.check_mesh(source, initial)?;
        let nn = self.grid.n_nodes();
        let h2 = self.grid.h().powi(2);
        let inv_tau2 = 1.0 / self.tgrid.tau().powi(2);
        let mut worst = u
            .level(0)
            .iter()
            .zip(initial.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let mut a = vec![vec![0.0; nn]; 3];
        for k in 0..self.tgrid.n_steps() {
            let (prev_k, f_prev) = if k == 0 { (1, 1) } else { (k - 1, k - 1) };
            apply_stiffness(&self.mid, h2, u.level(k + 1), &mut a[0]);
            apply_stiffness(&self.mid, h2, u.level(k), &mut a[1]);
            apply_stiffness(&self.mid, h2, u.level(prev_k), &mut a[2]);
            let (un, uc, up) = (u.level(k + 1), u.level(k), u.level(prev_k));
            let (fn_, fc, fp) = (source.level(k + 1), source.level(k), source.level(f_prev));
            for i in 0..nn {
                let r = (un[i] - 2.0 * uc[i] + up[i]) * inv_tau2
                    + 0.25 * (a[0][i] + 2.0 * a[1][i] + a[2][i])
                    - 0.25 * (fn_[i] + 2.0 * fc[i] + fp[i]);
                // Scale by τ² so the residual is measured in units of u.
                worst = worst.max((r / inv_tau2).abs());
            }
        }
        Ok(worst)
    }

    /// Discrete energies `E^{k+1/2} = ½‖δₜu‖² + ½⟨A ū, ū⟩` for `k = 0..n_steps`,
    /// with `ū = (uᵏ⁺¹ + uᵏ)/2` and trapezoid-weighted norms. Conserved exactly
    /// by the scheme when `F ≡ 0`.
    pub fn energies(&self, u: &SpaceTimeField) -> Result<Vec<f64>> {
        if u.grid() != &self.grid || u.tgrid() != &self.tgrid {
            return Err(Error::DimensionMismatch("field not on solver mesh".into()));
        }
        let w = self.grid.trapezoid_weights();
        let h2 = self.grid.h().powi(2);
        let tau = self.tgrid.tau();
        let nn = self.grid.n_nodes();
        let mut avg = vec![0.0; nn];
        let mut a_avg = vec![0.0; nn];
        Ok((0..self.tgrid.n_steps())
            .map(|k| {
                let (a, b) = (u.level(k), u.level(k + 1));
                let mut kinetic = 0.0;
                for i in 0..nn {
                    let v = (b[i] - a[i]) / tau;
                    kinetic += w[i] * v * v;
                    avg[i] = 0.5 * (a[i] + b[i]);
                }
                apply_stiffness(&self.mid, h2, &avg, &mut a_avg);
                let potential: f64 = (0..nn).map(|i| w[i] * a_avg[i] * avg[i]).sum();
                0.5 * (kinetic + potential)
            })
            .collect())
    }
}

/// Coefficient-independent inputs of the forward problem: the source `F` and
/// the initial value `u₀`.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    pub source: SpaceTimeField,
    pub initial_value: SpatialField,
}

impl ForwardModel {
    pub fn new(source: SpaceTimeField, initial_value: SpatialField) -> Result<Self> {
        if source.grid() != initial_value.grid() {
            return Err(Error::DimensionMismatch(
                "source and initial value on different grids".into(),
            ));
        }
        Ok(Self {
            source,
            initial_value,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        self.source.grid()
    }

    pub fn tgrid(&self) -> &TimeGrid {
        self.source.tgrid()
    }

    /// `u(p)`.
    pub fn state(&self, p: &SpatialField) -> Result<SpaceTimeField> {
        if p.grid() != self.grid() {
            return Err(Error::DimensionMismatch(
                "coefficient not on the model grid".into(),
            ));
        }
        WaveSolver::new(p, *self.tgrid())?.solve(&self.source, &self.initial_value)
    }
}

/// Solution `u(p)` of the forward problem.
pub fn solve_forward(problem: &WaveProblem) -> Result<SpaceTimeField> {
    problem.validate()?;
    WaveSolver::new(&problem.p, *problem.source.tgrid())?
        .solve(&problem.source, &problem.initial_value)
}

/// Adjoint field `z` driven by `χ_ω · residual` with `z = ∂ₜz = 0` at `t = T`.
pub fn solve_backward(
    p: &SpatialField,
    residual: &SpaceTimeField,
    window: &ObservationWindow,
) -> Result<SpaceTimeField> {
    if residual.grid() != p.grid() {
        return Err(Error::DimensionMismatch(
            "residual and coefficient on different grids".into(),
        ));
    }
    let source = residual.masked(window)?;
    WaveSolver::new(p, *residual.tgrid())?.solve_terminal(&source)
}

pub(crate) fn check_vanishes_on_boundary(direction: &SpatialField) -> Result<()> {
    let v = direction.values();
    let (left, right) = (v[0], v[v.len() - 1]);
    let tol = 1e-12 * direction.max_abs().max(1.0);
    if left.abs() > tol || right.abs() > tol {
        return Err(Error::InadmissibleDirection { left, right });
    }
    Ok(())
}

/// Source `∂ₓ(p̃ ∂ₓu)` level by level, assembled with the wave operator's flux stencil.
pub fn sensitivity_source(direction: &SpatialField, u: &SpaceTimeField) -> Result<SpaceTimeField> {
    if direction.grid() != u.grid() {
        return Err(Error::DimensionMismatch(
            "direction and state on different grids".into(),
        ));
    }
    let grid = *u.grid();
    let nn = grid.n_nodes();
    let h2 = grid.h().powi(2);
    let mid = midpoints(direction.values());
    let mut values = vec![0.0; u.values().len()];
    for (k, out) in values.chunks_exact_mut(nn).enumerate() {
        apply_stiffness(&mid, h2, u.level(k), out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
    SpaceTimeField::new(grid, *u.tgrid(), values)
}

/// Sensitivity `w₀ = ∂u(p)/∂p · p̃`: zero initial data, source `∂ₓ(p̃ ∂ₓu(p))`.
pub fn solve_sensitivity(
    p: &SpatialField,
    direction: &SpatialField,
    u: &SpaceTimeField,
) -> Result<SpaceTimeField> {
    check_vanishes_on_boundary(direction)?;
    let source = sensitivity_source(direction, u)?;
    WaveSolver::new(p, *u.tgrid())?.solve_with_source(&source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mesh(n: usize, m: usize) -> (Grid1D, TimeGrid) {
        (Grid1D::unit(n).unwrap(), TimeGrid::new(1.0, m).unwrap())
    }

    fn standing_wave_error(n: usize) -> f64 {
        let (g, t) = mesh(n, n);
        let problem = WaveProblem::new(
            SpatialField::constant(g, 1.0),
            SpaceTimeField::zeros(g, t),
            SpatialField::from_fn(g, |x| (PI * x).cos()).unwrap(),
        )
        .unwrap();
        let u = solve_forward(&problem).unwrap();
        let mut err = 0.0f64;
        for k in 0..t.n_levels() {
            let s = t.level(k);
            for (x, v) in g.nodes().zip(u.level(k)) {
                err = err.max((v - (PI * x).cos() * (PI * s).cos()).abs());
            }
        }
        err
    }

    #[test]
    fn constant_state_is_preserved() {
        let (g, t) = mesh(100, 100);
        let p = SpatialField::from_fn(g, |x| 1.0 + 0.5 * (PI * x).sin()).unwrap();
        let problem = WaveProblem::new(
            p,
            SpaceTimeField::zeros(g, t),
            SpatialField::constant(g, 1.0),
        )
        .unwrap();
        let u = solve_forward(&problem).unwrap();
        let dev = u.values().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn standing_wave_converges_second_order() {
        let e50 = standing_wave_error(50);
        let e100 = standing_wave_error(100);
        assert!(e100 < 5e-3, "error {e100}");
        let ratio = e50 / e100;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn residual_of_each_step_is_tiny() {
        let (g, t) = mesh(100, 100);
        let p = SpatialField::from_fn(g, |x| 0.5 * (PI * x).sin() + 1.0).unwrap();
        let f = SpaceTimeField::from_fn(g, t, |x, s| x + s + 1.0).unwrap();
        let u0 = SpatialField::constant(g, 1.0);
        let solver = WaveSolver::new(&p, t).unwrap();
        let u = solver.solve(&f, &u0).unwrap();
        assert!(solver.scheme_residual(&f, &u0, &u).unwrap() < 1e-10);
    }

    #[test]
    fn energy_is_conserved_without_source() {
        let (g, t) = mesh(100, 100);
        let p = SpatialField::from_fn(g, |x| 1.0 + 0.3 * x).unwrap();
        let solver = WaveSolver::new(&p, t).unwrap();
        let u0 = SpatialField::from_fn(g, |x| (PI * x).cos()).unwrap();
        let u = solver.solve(&SpaceTimeField::zeros(g, t), &u0).unwrap();
        let e = solver.energies(&u).unwrap();
        let drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max) / e[0];
        assert!(drift < 1e-8, "drift {drift}");
    }

    #[test]
    fn stable_for_large_time_steps() {
        let n = 40;
        for ratio in [0.5, 1.0, 2.0, 4.0] {
            let steps = (n as f64 / ratio).round() as usize;
            let (g, t) = mesh(n, steps);
            let u0 = SpatialField::from_fn(g, |x| (3.0 * PI * x).cos() + 0.2).unwrap();
            let problem =
                WaveProblem::new(SpatialField::constant(g, 1.0), SpaceTimeField::zeros(g, t), u0.clone())
                    .unwrap();
            let u = solve_forward(&problem).unwrap();
            assert!(u.max_abs() <= 2.0 * u0.max_abs(), "tau/h = {ratio}");
        }
    }

    #[test]
    fn linear_in_the_source() {
        let (g, t) = mesh(30, 25);
        let solver = WaveSolver::new(&SpatialField::from_fn(g, |x| 1.0 + x * x).unwrap(), t).unwrap();
        let f1 = SpaceTimeField::from_fn(g, t, |x, s| (x * 7.0).sin() * s).unwrap();
        let f2 = SpaceTimeField::from_fn(g, t, |x, s| x - s * s).unwrap();
        let (a, b) = (1.7, -0.4);
        let combo = f1.scaled(a).unwrap().add_scaled(b, &f2).unwrap();
        let lhs = solver.solve_with_source(&combo).unwrap();
        let rhs = solver
            .solve_with_source(&f1)
            .unwrap()
            .scaled(a)
            .unwrap()
            .add_scaled(b, &solver.solve_with_source(&f2).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn rejects_non_positive_coefficient() {
        let (g, t) = mesh(10, 10);
        let mut v = vec![1.0; 11];
        v[4] = 0.0;
        let p = SpatialField::new(g, v).unwrap();
        let err = WaveProblem::new(p, SpaceTimeField::zeros(g, t), SpatialField::zeros(g)).unwrap_err();
        assert_eq!(err, Error::DegenerateCoefficient { node: 4, value: 0.0 });
    }

    #[test]
    fn backward_of_zero_is_zero_and_terminal_data_vanish() {
        let (g, t) = mesh(20, 20);
        let p = SpatialField::constant(g, 1.0);
        let w = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9).unwrap();
        let z = solve_backward(&p, &SpaceTimeField::zeros(g, t), &w).unwrap();
        assert_eq!(z.max_abs(), 0.0);

        let r = SpaceTimeField::from_fn(g, t, |x, s| x * s + 1.0).unwrap();
        let z = solve_backward(&p, &r, &w).unwrap();
        assert!(z.level(20).iter().all(|&v| v == 0.0));
        assert!(z.max_abs() > 0.0);
    }

    #[test]
    fn backward_equals_reversed_forward() {
        let (g, t) = mesh(16, 12);
        let p = SpatialField::from_fn(g, |x| 1.0 + 0.2 * x).unwrap();
        let w = ObservationWindow::new((0.0, 1.0), vec![(0.0, 0.3), (0.6, 1.0)]).unwrap();
        let r = SpaceTimeField::from_fn(g, t, |x, s| (5.0 * x).cos() * (1.0 + s)).unwrap();
        let z = solve_backward(&p, &r, &w).unwrap();
        let forward = WaveSolver::new(&p, t)
            .unwrap()
            .solve_with_source(&r.masked(&w).unwrap().reversed_in_time())
            .unwrap()
            .reversed_in_time();
        assert_eq!(z, forward);
    }

    #[test]
    fn sensitivity_trivial_cases() {
        let (g, t) = mesh(20, 20);
        let p = SpatialField::constant(g, 1.0);
        let u = SpaceTimeField::from_fn(g, t, |x, s| x * x * s).unwrap();
        let w = solve_sensitivity(&p, &SpatialField::zeros(g), &u).unwrap();
        assert_eq!(w.max_abs(), 0.0);

        let flat = SpaceTimeField::from_fn(g, t, |_, _| 1.0).unwrap();
        let dir = SpatialField::from_fn(g, |x| (PI * x).sin()).unwrap();
        let dir = SpatialField::new(g, {
            let mut v = dir.into_values();
            v[0] = 0.0;
            v[20] = 0.0;
            v
        })
        .unwrap();
        assert_eq!(solve_sensitivity(&p, &dir, &flat).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn sensitivity_rejects_boundary_values() {
        let (g, t) = mesh(10, 10);
        let dir = SpatialField::constant(g, 1.0);
        let u = SpaceTimeField::zeros(g, t);
        let err = solve_sensitivity(&SpatialField::constant(g, 1.0), &dir, &u).unwrap_err();
        assert!(matches!(err, Error::InadmissibleDirection { .. }));
    }

    #[test]
    fn flux_divergence_matches_product_rule() {
        let g = Grid1D::unit(200).unwrap();
        let c = SpatialField::from_fn(g, |x| 1.0 + x).unwrap();
        let u = SpatialField::from_fn(g, |x| (PI * x).cos()).unwrap();
        let d = divergence_flux(&c, &u).unwrap();
        // (c u')' = u' + (1 + x) u''
        for (i, x) in g.nodes().enumerate().skip(1).take(198) {
            let exact = -PI * (PI * x).sin() - (1.0 + x) * PI * PI * (PI * x).cos();
            assert!((d.values()[i] - exact).abs() < 1e-3);
        }
    }
}
