//! Tikhonov functional `J(p) = ‖u(p) − u^δ‖²_{L²(ω×(0,T))} + α‖∇p‖²_{L²(Ω)}`,
//! its adjoint gradient field and directional derivative, and the surrogate
//! functional used to judge the tuning constant `K`.

use crate::error::{Error, Result};
use crate::mesh::{
    gradient_of, grad_spatial, l2_norm_spacetime, laplacian_spatial, weighted_spacetime_inner,
    SpaceTimeField, SpatialField,
};
use crate::wave::{check_vanishes_on_boundary, solve_backward, solve_sensitivity, ForwardModel};
use crate::window::ObservationWindow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct ObjectiveConfig {
    pub alpha: f64,
    pub window: ObservationWindow,
}

impl ObjectiveConfig {
    pub fn new(alpha: f64, window: ObservationWindow) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        Ok(Self { alpha, window })
    }
}

/// `J` split into its two addends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Objective {
    /// `‖u(p) − u^δ‖²` over `ω × (0, T)`.
    pub misfit: f64,
    /// `α‖∇p‖²`.
    pub regularization: f64,
}

impl Objective {
    pub fn total(&self) -> f64 {
        self.misfit + self.regularization
    }
}

/// `‖∇f‖²_{L²(Ω)}` with the discrete gradient and trapezoid rule.
pub fn grad_norm_sq(f: &SpatialField) -> Result<f64> {
    let g = grad_spatial(f)?;
    g.inner(&g)
}

pub fn evaluate_j(
    p: &SpatialField,
    u_of_p: &SpaceTimeField,
    data: &SpaceTimeField,
    cfg: &ObjectiveConfig,
) -> Result<Objective> {
    if u_of_p.grid() != p.grid() {
        return Err(Error::DimensionMismatch(
            "state and coefficient on different grids".into(),
        ));
    }
    let misfit = l2_norm_spacetime(&u_of_p.sub(data)?, &cfg.window)?.powi(2);
    let regularization = if cfg.alpha == 0.0 {
        0.0
    } else {
        cfg.alpha * grad_norm_sq(p)?
    };
    Ok(Objective {
        misfit,
        regularization,
    })
}

/// `g(x) = ∫₀ᵀ ∂ₓu · ∂ₓz dt`, trapezoid in time. Only interior values enter
/// the iteration.
pub fn gradient_field(u: &SpaceTimeField, z: &SpaceTimeField) -> Result<SpatialField> {
    u.check_same_mesh(z)?;
    let grid = *u.grid();
    let h = grid.h();
    let wt = u.tgrid().trapezoid_weights();
    let mut g = vec![0.0; grid.n_nodes()];
    for (k, w) in wt.iter().enumerate() {
        let du = gradient_of(u.level(k), h);
        let dz = gradient_of(z.level(k), h);
        for i in 0..g.len() {
            g[i] += w * du[i] * dz[i];
        }
    }
    SpatialField::new(grid, g)
}

/// State, adjoint and gradient field at one coefficient.
#[derive(Debug, Clone)]
pub struct AdjointState {
    pub u: SpaceTimeField,
    pub z: SpaceTimeField,
    pub g: SpatialField,
}

pub fn adjoint_state(
    model: &ForwardModel,
    p: &SpatialField,
    data: &SpaceTimeField,
    window: &ObservationWindow,
) -> Result<AdjointState> {
    let u = model.state(p)?;
    let z = solve_backward(p, &u.sub(data)?, window)?;
    let g = gradient_field(&u, &z)?;
    Ok(AdjointState { u, z, g })
}

/// `J′(p)p̃ = −2 ∫_Ω (g + αΔp) p̃ dx`, evaluated with one forward and one
/// backward solve.
pub fn directional_derivative(
    model: &ForwardModel,
    p: &SpatialField,
    direction: &SpatialField,
    data: &SpaceTimeField,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    check_vanishes_on_boundary(direction)?;
    let state = adjoint_state(model, p, data, &cfg.window)?;
    let integrand = state.g.add_scaled(cfg.alpha, &laplacian_spatial(p)?)?;
    Ok(-2.0 * integrand.inner(direction)?)
}

/// `J′(p)p̃ = 2 ∫∫ w₀ χ_ω (u − u^δ) + 2α ∫ ∇p · ∇p̃`, evaluated through the
/// sensitivity `w₀`. Independent of the adjoint route.
pub fn directional_derivative_by_sensitivity(
    model: &ForwardModel,
    p: &SpatialField,
    direction: &SpatialField,
    data: &SpaceTimeField,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    let u = model.state(p)?;
    let w0 = solve_sensitivity(p, direction, &u)?;
    let misfit_term = weighted_spacetime_inner(&w0, &u.sub(data)?, &cfg.window)?;
    let reg_term = grad_spatial(p)?.inner(&grad_spatial(direction)?)?;
    Ok(2.0 * misfit_term + 2.0 * cfg.alpha * reg_term)
}

/// `J^s(p, q) = J(p) + K‖∇(p − q)‖² − ‖u(p) − u(q)‖²_{L²(ω×(0,T))}`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_surrogate(
    p: &SpatialField,
    q: &SpatialField,
    u_p: &SpaceTimeField,
    u_q: &SpaceTimeField,
    data: &SpaceTimeField,
    k: f64,
    cfg: &ObjectiveConfig,
) -> Result<f64> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!("K must be > 0, got {k}")));
    }
    let j = evaluate_j(p, u_p, data, cfg)?.total();
    let diff = p.sub(q)?;
    let state_gap = l2_norm_spacetime(&u_p.sub(u_q)?, &cfg.window)?.powi(2);
    Ok(j + k * grad_norm_sq(&diff)? - state_gap)
}

/// Ratio `‖u(p) − u(q)‖²_{L²(ω×(0,T))} / ‖∇(p − q)‖²` for one pair; the
/// positivity condition on the surrogate holds for the pair iff `ratio ≤ K`.
pub fn surrogate_ratio(
    p: &SpatialField,
    q: &SpatialField,
    u_p: &SpaceTimeField,
    u_q: &SpaceTimeField,
    window: &ObservationWindow,
) -> Result<f64> {
    let denom = grad_norm_sq(&p.sub(q)?)?;
    if denom == 0.0 {
        return Err(Error::InvalidParameter(
            "pair with identical gradients has no ratio".into(),
        ));
    }
    Ok(l2_norm_spacetime(&u_p.sub(u_q)?, window)?.powi(2) / denom)
}

/// Sampled lower bound on the smallest admissible `K`.
#[derive(Debug, Clone, PartialEq)]
pub struct KEstimate {
    pub ratios: Vec<f64>,
}

impl KEstimate {
    pub fn max(&self) -> f64 {
        self.ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Random coefficient sharing the boundary values `(left, right)`: the linear
/// interpolant plus three sine modes, kept above half the smaller boundary value.
pub fn random_admissible(
    grid: &crate::mesh::Grid1D,
    left: f64,
    right: f64,
    rng: &mut impl Rng,
) -> Result<SpatialField> {
    let amp = 0.5 * left.min(right) / 1.9;
    let c: Vec<f64> = (1..=3)
        .map(|k| rng.gen_range(-1.0..=1.0) * amp / k as f64)
        .collect();
    let (a, b) = (grid.x_min(), grid.length());
    SpatialField::from_fn(*grid, |x| {
        let s = (x - a) / b;
        let base = left + (right - left) * s;
        base + c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * ((k + 1) as f64 * std::f64::consts::PI * s).sin())
            .sum::<f64>()
    })
}

/// Evaluates [`surrogate_ratio`] on `count` random admissible pairs.
pub fn estimate_k(
    model: &ForwardModel,
    boundary: (f64, f64),
    window: &ObservationWindow,
    count: usize,
    seed: u64,
) -> Result<KEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(count);
    for _ in 0..count {
        let p = random_admissible(model.grid(), boundary.0, boundary.1, &mut rng)?;
        let q = random_admissible(model.grid(), boundary.0, boundary.1, &mut rng)?;
        let (u_p, u_q) = (model.state(&p)?, model.state(&q)?);
        ratios.push(surrogate_ratio(&p, &q, &u_p, &u_q, window)?);
    }
    Ok(KEstimate { ratios })
}
