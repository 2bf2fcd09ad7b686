//! Iterative reconstruction of `p` from interior observations.
//!
//! Each step solves the forward problem, the backward problem driven by the
//! windowed residual, and one Poisson problem:
//!
//! ```text
//! Δp_{m+1} = K/(K+α) Δp_m − 1/(K+α) ∫₀ᵀ ∂ₓu(p_m) ∂ₓz(p_m) dt   in Ω
//! p_{m+1}  = h₀                                              on ∂Ω
//! ```
//!
//! The Laplacian `q_m = Δp_m` is carried as state and updated by the affine
//! recursion, so the reconstructed `p_m` is never differentiated twice.
//! Iteration stops once `‖p_{m+1} − p_m‖ / ‖p_m‖ ≤ ε`.

use crate::elliptic::{solve_poisson, PoissonProblem};
use crate::error::{Error, Result};
use crate::mesh::{grad_spatial, l2_norm_spatial, laplacian_spatial, SpaceTimeField, SpatialField};
use crate::objective::{evaluate_j, gradient_field, ObjectiveConfig};
use crate::synth::check_noise_level;
use crate::wave::{solve_backward, ForwardModel};
use crate::window::ObservationWindow;
use std::time::{Duration, Instant};

/// Admissible set: boundary values `h₀`, floor `κ₁` and the (monitored) `H¹` bound `M₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSpec {
    pub boundary_left: f64,
    pub boundary_right: f64,
    pub kappa1: f64,
    pub m1: f64,
    pub clamp_enabled: bool,
}

impl CoefficientSpec {
    pub fn new(boundary_left: f64, boundary_right: f64, kappa1: f64, m1: f64, clamp_enabled: bool) -> Result<Self> {
        let spec = Self {
            boundary_left,
            boundary_right,
            kappa1,
            m1,
            clamp_enabled,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa1.is_finite() && self.kappa1 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa1 must be > 0, got {}",
                self.kappa1
            )));
        }
        if self.m1.is_nan() || self.m1 <= 0.0 {
            return Err(Error::InvalidParameter(format!("M1 must be > 0, got {}", self.m1)));
        }
        for b in [self.boundary_left, self.boundary_right] {
            if !(b.is_finite() && b >= self.kappa1) {
                return Err(Error::InvalidParameter(format!(
                    "boundary value {b} must be finite and >= kappa1 = {}",
                    self.kappa1
                )));
            }
        }
        Ok(())
    }
}

impl Default for CoefficientSpec {
    fn default() -> Self {
        Self {
            boundary_left: 1.0,
            boundary_right: 1.0,
            kappa1: 0.1,
            m1: 100.0,
            clamp_enabled: true,
        }
    }
}

pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub k: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("K", self.k), ("alpha", self.alpha), ("epsilon", self.epsilon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One row of the iteration history; quantities refer to the new iterate `p_{m+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub step_ratio: f64,
    pub j: f64,
    pub misfit: f64,
    /// Relative `L²` error against `p_true`, when one was supplied.
    pub err: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub p_final: SpatialField,
    pub iterations: usize,
    pub rel_error: Option<f64>,
    pub history: Vec<IterationRecord>,
    pub elapsed: Duration,
    pub converged: bool,
    /// Largest `‖p_m‖_{H¹}` seen; compared against `M₁` only for reporting.
    pub max_h1_norm: f64,
    /// Number of iterations in which the `κ₁` clamp changed at least one node.
    pub clamp_activations: usize,
}

impl ReconstructionResult {
    pub fn exceeded_m1(&self, spec: &CoefficientSpec) -> bool {
        self.max_h1_norm > spec.m1
    }
}

/// `‖p − p_true‖ / ‖p_true‖`.
pub fn relative_error(p: &SpatialField, p_true: &SpatialField) -> Result<f64> {
    Ok(l2_norm_spatial(&p.sub(p_true)?)? / l2_norm_spatial(p_true)?)
}

pub fn h1_norm(p: &SpatialField) -> Result<f64> {
    let g = grad_spatial(p)?;
    Ok((p.inner(p)? + g.inner(&g)?).sqrt())
}

/// Everything one reconstruction needs besides the iterate.
#[derive(Debug, Clone)]
pub struct Reconstruction<'a> {
    pub model: &'a ForwardModel,
    pub data: &'a SpaceTimeField,
    pub window: &'a ObservationWindow,
    pub spec: CoefficientSpec,
    pub cfg: IterationConfig,
}

/// Outcome of one update.
#[derive(Debug, Clone)]
pub struct Step {
    pub p: SpatialField,
    pub q: SpatialField,
    pub clamped: bool,
}

impl<'a> Reconstruction<'a> {
    pub fn new(
        model: &'a ForwardModel,
        data: &'a SpaceTimeField,
        window: &'a ObservationWindow,
        spec: CoefficientSpec,
        cfg: IterationConfig,
    ) -> Result<Self> {
        spec.validate()?;
        cfg.validate()?;
        if data.grid() != model.grid() || data.tgrid() != model.tgrid() {
            return Err(Error::DimensionMismatch("data not on the model mesh".into()));
        }
        if !window.is_compatible(model.grid()) {
            return Err(Error::DimensionMismatch(
                "window domain differs from the model grid".into(),
            ));
        }
        Ok(Self {
            model,
            data,
            window,
            spec,
            cfg,
        })
    }

    fn objective_config(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            alpha: self.cfg.alpha,
            window: self.window.clone(),
        }
    }

    /// Update from `p_m` given its state `u(p_m)` and carried Laplacian `q_m`.
    pub fn step_with_state(
        &self,
        p_m: &SpatialField,
        u_m: &SpaceTimeField,
        q_m: &SpatialField,
    ) -> Result<Step> {
        let residual = u_m.sub(self.data)?;
        let z = solve_backward(p_m, &residual, self.window)?;
        let g = gradient_field(u_m, &z)?;
        let (k, alpha) = (self.cfg.k, self.cfg.alpha);
        let mut q = q_m
            .scaled(k / (k + alpha))?
            .add_scaled(-1.0 / (k + alpha), &g)?
            .into_values();
        let last = q.len() - 1;
        q[0] = 0.0;
        q[last] = 0.0;
        let q = SpatialField::new(*p_m.grid(), q)?;
        let mut p = solve_poisson(&PoissonProblem {
            rhs: q.clone(),
            boundary_left: self.spec.boundary_left,
            boundary_right: self.spec.boundary_right,
        })?;
        let mut clamped = false;
        if self.spec.clamp_enabled && p.min() < self.spec.kappa1 {
            clamped = true;
            let floor = self.spec.kappa1;
            p = p.map(|v| v.max(floor))?;
        }
        Ok(Step { p, q, clamped })
    }

    /// `(p_{m+1}, q_{m+1})` from `(p_m, q_m)`.
    pub fn iterate_once(&self, p_m: &SpatialField, q_m: &SpatialField) -> Result<(SpatialField, SpatialField)> {
        let u_m = self.model.state(p_m)?;
        let step = self.step_with_state(p_m, &u_m, q_m)?;
        Ok((step.p, step.q))
    }

    /// Runs the iteration from `p0` until the step test passes or `max_iter` is hit.
    pub fn run(&self, p0: &SpatialField, p_true: Option<&SpatialField>) -> Result<ReconstructionResult> {
        let start = Instant::now();
        let cfg = self.objective_config();
        let mut p = pin_boundary(p0, &self.spec)?;
        let mut q = laplacian_spatial(&p)?;
        let mut u = self.state_at(&p, 0)?;
        let mut history = Vec::new();
        let mut converged = false;
        let mut max_h1 = h1_norm(&p)?;
        let mut clamp_activations = 0;

        for iter in 1..=self.cfg.max_iter {
            let step = self.step_with_state(&p, &u, &q)?;
            clamp_activations += usize::from(step.clamped);
            let u_next = self.state_at(&step.p, iter)?;
            let step_ratio = l2_norm_spatial(&step.p.sub(&p)?)? / l2_norm_spatial(&p)?;
            let objective = evaluate_j(&step.p, &u_next, self.data, &cfg)?;
            let err = p_true.map(|t| relative_error(&step.p, t)).transpose()?;
            history.push(IterationRecord {
                iter,
                step_ratio,
                j: objective.total(),
                misfit: objective.misfit,
                err,
            });
            max_h1 = max_h1.max(h1_norm(&step.p)?);
            p = step.p;
            q = step.q;
            u = u_next;
            if step_ratio <= self.cfg.epsilon {
                converged = true;
                break;
            }
        }

        let rel_error = p_true.map(|t| relative_error(&p, t)).transpose()?;
        Ok(ReconstructionResult {
            iterations: history.len(),
            p_final: p,
            rel_error,
            history,
            elapsed: start.elapsed(),
            converged,
            max_h1_norm: max_h1,
            clamp_activations,
        })
    }

    fn state_at(&self, p: &SpatialField, iteration: usize) -> Result<SpaceTimeField> {
        self.model.state(p).map_err(|e| match e {
            Error::DegenerateCoefficient { node, value } => Error::DegenerateIterate {
                iteration,
                node,
                value,
            },
            other => other,
        })
    }
}

fn pin_boundary(p0: &SpatialField, spec: &CoefficientSpec) -> Result<SpatialField> {
    let mut v = p0.values().to_vec();
    let last = v.len() - 1;
    v[0] = spec.boundary_left;
    v[last] = spec.boundary_right;
    SpatialField::new(*p0.grid(), v)
}

/// Free-function form of [`Reconstruction::iterate_once`].
#[allow(clippy::too_many_arguments)]
pub fn iterate_once(
    p_m: &SpatialField,
    q_m: &SpatialField,
    data: &SpaceTimeField,
    spec: &CoefficientSpec,
    cfg: &IterationConfig,
    model: &ForwardModel,
    window: &ObservationWindow,
) -> Result<(SpatialField, SpatialField)> {
    Reconstruction::new(model, data, window, *spec, *cfg)?.iterate_once(p_m, q_m)
}

/// Free-function form of [`Reconstruction::run`].
pub fn run(
    data: &SpaceTimeField,
    spec: &CoefficientSpec,
    cfg: &IterationConfig,
    model: &ForwardModel,
    window: &ObservationWindow,
    p0: &SpatialField,
    p_true: Option<&SpatialField>,
) -> Result<ReconstructionResult> {
    Reconstruction::new(model, data, window, *spec, *cfg)?.run(p0, p_true)
}

/// Empirical parameter choice: `K ∝ |ω|`, `α ∝ δ₀`, `ε ∝ δ₀`, with floors for
/// noiseless data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuggestedParameters {
    pub k: f64,
    pub alpha: f64,
    pub epsilon: f64,
}

pub const K_PER_MEASURE: f64 = 1e-4;
pub const ALPHA_PER_NOISE: f64 = 1e-5;
pub const ALPHA_FLOOR: f64 = 1e-9;
pub const EPSILON_PER_NOISE: f64 = 8e-3;
/// Tolerance used for noiseless data, where `ε ∝ δ₀` would vanish.
pub const EPSILON_NOISELESS: f64 = 1e-4;

pub fn suggest_parameters(window: &ObservationWindow, delta0: f64) -> Result<SuggestedParameters> {
    check_noise_level(delta0)?;
    Ok(SuggestedParameters {
        k: K_PER_MEASURE * window.measure(),
        alpha: (ALPHA_PER_NOISE * delta0).max(ALPHA_FLOOR),
        epsilon: if delta0 == 0.0 {
            EPSILON_NOISELESS
        } else {
            EPSILON_PER_NOISE * delta0
        },
    })
}
