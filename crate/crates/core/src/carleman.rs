//! Weight-function geometry behind the stability estimate: `ψ = d(x) − βt²`,
//! `φ = e^{λψ}`, the level sets `Ω(δ) = {d > δ}` and `Q(δ) = {ψ > δ}`, and
//! checks of the observation assumptions
//!
//! ```text
//! closure(Ω(δ₀)) ⊂ Ω ∪ Γ,   ∂ω ⊇ Γ,   T² > max d.
//! ```
//!
//! In one dimension `Γ` is taken as the set of domain endpoints that are also
//! endpoints of `ω`. Diagnostics only; nothing here feeds the reconstruction.

use crate::error::{Error, Result};
use crate::mesh::{gradient_of, grad_spatial, SpatialField, TimeGrid};
use crate::window::ObservationWindow;

const ENDPOINT_TOL: f64 = 1e-12;

/// The spatial part `d` of the weight.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightProfile {
    /// `d(x) = (x − center)²`.
    Quadratic { center: f64 },
    /// Nodal samples, linearly interpolated.
    Sampled(SpatialField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanWeights {
    domain: (f64, f64),
    profile: WeightProfile,
    beta: f64,
    lambda: f64,
    delta: f64,
}

impl CarlemanWeights {
    pub fn new(domain: (f64, f64), profile: WeightProfile, beta: f64, lambda: f64, delta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta must be >= 0, got {delta}")));
        }
        if domain.1 <= domain.0 {
            return Err(Error::InvalidParameter("empty domain".into()));
        }
        if let WeightProfile::Sampled(f) = &profile {
            let g = f.grid();
            if (g.x_min() - domain.0).abs() > ENDPOINT_TOL || (g.x_max() - domain.1).abs() > ENDPOINT_TOL {
                return Err(Error::DimensionMismatch(
                    "sampled weight does not cover the domain".into(),
                ));
            }
        }
        let w = Self {
            domain,
            profile,
            beta,
            lambda,
            delta,
        };
        if w.min_d() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "d must be positive on the closed domain, min d = {}",
                w.min_d()
            )));
        }
        Ok(w)
    }

    /// `d(x) = (x − x₀)²` with `x₀ = −0.1` on `(0, 1)`.
    pub fn canonical(beta: f64, lambda: f64, delta: f64) -> Result<Self> {
        Self::new((0.0, 1.0), WeightProfile::Quadratic { center: -0.1 }, beta, lambda, delta)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn profile(&self) -> &WeightProfile {
        &self.profile
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d(&self, x: f64) -> f64 {
        match &self.profile {
            WeightProfile::Quadratic { center } => (x - center).powi(2),
            WeightProfile::Sampled(f) => {
                let g = f.grid();
                let s = ((x - g.x_min()) / g.h()).clamp(0.0, g.n_cells() as f64);
                let i = (s.floor() as usize).min(g.n_cells() - 1);
                let frac = s - i as f64;
                let v = f.values();
                v[i] * (1.0 - frac) + v[i + 1] * frac
            }
        }
    }

    /// Derivative of `d`.
    pub fn d_prime(&self, x: f64) -> f64 {
        match &self.profile {
            WeightProfile::Quadratic { center } => 2.0 * (x - center),
            WeightProfile::Sampled(f) => {
                let g = f.grid();
                let slopes = gradient_of(f.values(), g.h());
                let i = (((x - g.x_min()) / g.h()).round().max(0.0) as usize).min(g.n_cells());
                slopes[i]
            }
        }
    }

    pub fn max_d(&self) -> f64 {
        match &self.profile {
            WeightProfile::Quadratic { .. } => self.d(self.domain.0).max(self.d(self.domain.1)),
            WeightProfile::Sampled(f) => f.max(),
        }
    }

    pub fn min_d(&self) -> f64 {
        match &self.profile {
            WeightProfile::Quadratic { center } => {
                let nearest = center.clamp(self.domain.0, self.domain.1);
                self.d(nearest)
            }
            WeightProfile::Sampled(f) => f.min(),
        }
    }

    pub fn psi(&self, x: f64, t: f64) -> f64 {
        self.d(x) - self.beta * t * t
    }

    pub fn phi(&self, x: f64, t: f64) -> f64 {
        (self.lambda * self.psi(x, t)).exp()
    }

    /// Maximal open subintervals of the domain where `d > threshold`.
    pub fn superlevel(&self, threshold: f64) -> Vec<(f64, f64)> {
        let (lo, hi) = self.domain;
        match &self.profile {
            WeightProfile::Quadratic { center } => {
                if threshold < 0.0 {
                    return vec![(lo, hi)];
                }
                let r = threshold.sqrt();
                [(f64::NEG_INFINITY, center - r), (center + r, f64::INFINITY)]
                    .into_iter()
                    .map(|(a, b)| (a.max(lo), b.min(hi)))
                    .filter(|(a, b)| a < b)
                    .collect()
            }
            WeightProfile::Sampled(f) => {
                let xs: Vec<f64> = f.grid().nodes().collect();
                let above: Vec<f64> = f.values().iter().map(|v| v - threshold).collect();
                let crossing = |i: usize| {
                    let (a, b) = (above[i], above[i + 1]);
                    xs[i] + (xs[i + 1] - xs[i]) * a / (a - b)
                };
                let mut out = Vec::new();
                let mut start = if above[0] > 0.0 { Some(lo) } else { None };
                for i in 0..above.len() - 1 {
                    match (above[i] > 0.0, above[i + 1] > 0.0) {
                        (false, true) => start = Some(crossing(i)),
                        (true, false) => {
                            if let Some(s) = start.take() {
                                let e = crossing(i);
                                if s < e {
                                    out.push((s, e));
                                }
                            }
                        }
                        _ => {}
                    }
                }
                if let Some(s) = start {
                    out.push((s, hi));
                }
                out
            }
        }
    }

    /// `Ω(δ)` for the configured `δ`.
    pub fn level_set_omega(&self) -> Vec<(f64, f64)> {
        self.superlevel(self.delta)
    }

    /// `Q(δ)` sliced at every time level: `{x : d(x) > δ + βt²}`.
    pub fn level_set_q(&self, tgrid: &TimeGrid) -> Vec<(f64, Vec<(f64, f64)>)> {
        (0..tgrid.n_levels())
            .map(|k| {
                let t = tgrid.level(k);
                (t, self.superlevel(self.delta + self.beta * t * t))
            })
            .collect()
    }
}

/// `Ω(δ)` as maximal open subintervals.
pub fn level_set_omega(w: &CarlemanWeights) -> Vec<(f64, f64)> {
    w.level_set_omega()
}

pub fn psi(w: &CarlemanWeights, x: f64, t: f64) -> f64 {
    w.psi(x, t)
}

pub fn phi(w: &CarlemanWeights, x: f64, t: f64) -> f64 {
    w.phi(x, t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryReport {
    pub t_max: f64,
    pub max_d: f64,
    /// `T² > max d`.
    pub time_condition: bool,
    /// Smallest `T` satisfying the time condition, `√max d`.
    pub minimal_t: f64,
    /// `∂ω ⊇ ∂Ω`.
    pub boundary_coverage: bool,
    /// Domain endpoints covered by `ω`; plays the role of `Γ`.
    pub gamma: Vec<f64>,
    /// `closure(Ω(δ)) ⊂ Ω ∪ Γ`.
    pub containment: bool,
    pub level_set: Vec<(f64, f64)>,
    /// Open interval of `β` with `βT² > max d` and `β < 1`, if nonempty.
    pub feasible_beta: Option<(f64, f64)>,
    /// `min |∂ₓu₀ · ∂ₓd|` over the nodes, when `u₀` was supplied.
    pub nonvanishing_min: Option<f64>,
}

impl GeometryReport {
    pub fn all_hold(&self) -> bool {
        self.time_condition && self.boundary_coverage && self.containment
    }
}

pub fn check_observation_geometry(
    w: &CarlemanWeights,
    window: &ObservationWindow,
    t_max: f64,
    initial_value: Option<&SpatialField>,
) -> Result<GeometryReport> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("T must be > 0, got {t_max}")));
    }
    let (lo, hi) = w.domain;
    if (window.domain().0 - lo).abs() > ENDPOINT_TOL || (window.domain().1 - hi).abs() > ENDPOINT_TOL {
        return Err(Error::DimensionMismatch(
            "window and weight live on different domains".into(),
        ));
    }
    let max_d = w.max_d();
    let gamma: Vec<f64> = [lo, hi].into_iter().filter(|&x| window.has_endpoint(x)).collect();
    let level_set = w.level_set_omega();
    let touches = |x: f64| level_set.iter().any(|&(a, b)| (a - x).abs() <= ENDPOINT_TOL || (b - x).abs() <= ENDPOINT_TOL);
    let containment = [lo, hi]
        .into_iter()
        .all(|x| !touches(x) || gamma.iter().any(|g| (g - x).abs() <= ENDPOINT_TOL));
    let beta_min = max_d / (t_max * t_max);
    let feasible_beta = (beta_min < 1.0).then_some((beta_min, 1.0));
    let nonvanishing_min = match initial_value {
        Some(u0) => {
            let du = grad_spatial(u0)?;
            Some(
                u0.grid()
                    .nodes()
                    .zip(du.values())
                    .map(|(x, g)| (g * w.d_prime(x)).abs())
                    .fold(f64::INFINITY, f64::min),
            )
        }
        None => None,
    };
    Ok(GeometryReport {
        t_max,
        max_d,
        time_condition: t_max * t_max > max_d,
        minimal_t: max_d.sqrt(),
        boundary_coverage: window.covers_boundary(),
        gamma,
        containment,
        level_set,
        feasible_beta,
        nonvanishing_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid1D;
    use proptest::prelude::*;

    fn canon(delta: f64) -> CarlemanWeights {
        CarlemanWeights::canonical(0.5, 1.0, delta).unwrap()
    }

    #[test]
    fn psi_and_phi_pointwise() {
        let w = canon(0.0);
        assert_eq!(w.psi(0.4, 0.0), w.d(0.4));
        assert_eq!(w.phi(0.4, 0.0), w.d(0.4).exp());
        // Independent evaluation: (0.4 + 0.1)² − 0.5·1² = 0.25 − 0.5.
        assert!((w.psi(0.4, 1.0) - (-0.25)).abs() < 1e-15);
        for t in [0.3, 0.9, 2.0] {
            assert_eq!(w.psi(0.7, t), w.psi(0.7, -t));
        }
    }

    #[test]
    fn omega_level_sets() {
        let ls = canon(0.25).level_set_omega();
        assert_eq!(ls.len(), 1);
        assert!((ls[0].0 - 0.4).abs() < 1e-12 && ls[0].1 == 1.0);
        assert!(canon(1.21).level_set_omega().is_empty());
        assert!(canon(2.0).level_set_omega().is_empty());
        assert_eq!(canon(0.005).level_set_omega(), vec![(0.0, 1.0)]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(CarlemanWeights::canonical(1.0, 1.0, 0.0).is_err());
        assert!(CarlemanWeights::canonical(0.5, 0.0, 0.0).is_err());
        assert!(CarlemanWeights::new((0.0, 1.0), WeightProfile::Quadratic { center: 0.5 }, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn geometry_at_t_equal_one_fails_time_condition() {
        let w = canon(0.0);
        let omega = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9).unwrap();
        let r = check_observation_geometry(&w, &omega, 1.0, None).unwrap();
        assert!(!r.time_condition);
        assert!((r.max_d - 1.21).abs() < 1e-12);
        assert!((r.minimal_t - 1.1).abs() < 1e-12);
        assert!(r.boundary_coverage && r.containment);
        assert_eq!(r.feasible_beta, None);
    }

    #[test]
    fn geometry_at_t_1_2_holds() {
        let w = canon(0.0);
        let omega = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9).unwrap();
        let r = check_observation_geometry(&w, &omega, 1.2, None).unwrap();
        assert!(r.all_hold());
        let (b0, b1) = r.feasible_beta.unwrap();
        assert!((b0 - 1.21 / 1.44).abs() < 1e-12 && b1 == 1.0);
        assert!((b0 - 0.8403).abs() < 1e-4);
    }

    #[test]
    fn containment_fails_without_coverage_of_a_touched_endpoint() {
        let w = canon(0.0);
        let one_sided = ObservationWindow::new((0.0, 1.0), vec![(0.8, 1.0)]).unwrap();
        let r = check_observation_geometry(&w, &one_sided, 1.2, None).unwrap();
        assert!(!r.boundary_coverage);
        assert!(!r.containment);
        assert_eq!(r.gamma, vec![1.0]);
        // Raising δ pulls Ω(δ) away from x = 0, which restores containment.
        let r = check_observation_geometry(&canon(0.25), &one_sided, 1.2, None).unwrap();
        assert!(r.containment);
    }

    #[test]
    fn nonvanishing_diagnostic() {
        let g = Grid1D::unit(20).unwrap();
        let w = canon(0.0);
        let omega = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9).unwrap();
        let flat = SpatialField::constant(g, 1.0);
        let r = check_observation_geometry(&w, &omega, 1.2, Some(&flat)).unwrap();
        assert_eq!(r.nonvanishing_min, Some(0.0));
        let ramp = SpatialField::from_fn(g, |x| x).unwrap();
        let r = check_observation_geometry(&w, &omega, 1.2, Some(&ramp)).unwrap();
        assert!((r.nonvanishing_min.unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn sampled_profile_agrees_with_closed_form() {
        let g = Grid1D::unit(200).unwrap();
        let f = SpatialField::from_fn(g, |x| (x + 0.1).powi(2)).unwrap();
        let w = CarlemanWeights::new((0.0, 1.0), WeightProfile::Sampled(f), 0.5, 1.0, 0.25).unwrap();
        let ls = w.level_set_omega();
        assert_eq!(ls.len(), 1);
        assert!((ls[0].0 - 0.4).abs() < 1e-4);
        assert!((w.max_d() - 1.21).abs() < 1e-12);
    }

    #[test]
    fn q_slices_shrink_in_time() {
        let w = canon(0.1);
        let t = TimeGrid::new(1.0, 4).unwrap();
        let q = w.level_set_q(&t);
        assert_eq!(q.len(), 5);
        assert_eq!(q[0].1, w.level_set_omega());
        let start = |s: &Vec<(f64, f64)>| s.first().map(|i| i.0).unwrap_or(f64::INFINITY);
        for pair in q.windows(2) {
            assert!(start(&pair[1].1) >= start(&pair[0].1));
        }
    }

    fn contained(inner: &[(f64, f64)], outer: &[(f64, f64)]) -> bool {
        inner
            .iter()
            .all(|&(a, b)| outer.iter().any(|&(c, d)| c <= a + 1e-12 && b <= d + 1e-12))
    }

    proptest! {
        #[test]
        fn level_sets_are_monotone(d1 in 0.0f64..1.5, d2 in 0.0f64..1.5, c in -2.0f64..-0.01) {
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            let mk = |d| CarlemanWeights::new((0.0, 1.0), WeightProfile::Quadratic { center: c }, 0.5, 1.0, d).unwrap();
            prop_assert!(contained(&mk(hi).level_set_omega(), &mk(lo).level_set_omega()));
        }

        #[test]
        fn level_set_matches_pointwise_test(delta in 0.0f64..1.3) {
            let w = canon(delta);
            let ls = w.level_set_omega();
            let g = Grid1D::unit(100).unwrap();
            let h = g.h();
            for x in g.nodes() {
                let near_end = ls.iter().any(|&(a, b)| (x - a).abs() < h || (x - b).abs() < h);
                let inside_open = ls.iter().any(|&(a, b)| a < x && x < b);
                let inside = inside_open || ls.iter().any(|&(a, b)| (a == x && a == 0.0) || (b == x && b == 1.0));
                if !near_end {
                    prop_assert_eq!(inside, w.d(x) > delta);
                }
            }
        }

        #[test]
        fn phi_is_positive_and_increasing(x in 0.0f64..1.0, t in -2.0f64..2.0, dt in 0.01f64..1.0) {
            let w = canon(0.0);
            prop_assert!(w.phi(x, t) > 0.0);
            // ψ decreases as |t| grows, so φ must too.
            let (a, b) = (t.abs(), t.abs() + dt);
            prop_assert!(w.phi(x, b) < w.phi(x, a));
        }
    }
}
