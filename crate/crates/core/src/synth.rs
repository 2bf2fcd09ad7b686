//! Synthetic observations: `u^δ = u(p_true) + δ ξ` on `ω × [0, T]` with
//! `ξ ~ U[−1, 1]` i.i.d. and `δ = δ₀ ‖u(p_true)‖_max`.
//!
//! Noise is drawn from a ChaCha8 stream seeded with the 64-bit seed, in
//! time-major order (level ascending, then node ascending), and only at nodes
//! where the window indicator is nonzero.

use crate::error::{Error, Result};
use crate::mesh::{SpaceTimeField, SpatialField};
use crate::wave::ForwardModel;
pub use crate::window::ObservationWindow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct NoisySample {
    pub clean: SpaceTimeField,
    pub noisy: SpaceTimeField,
    /// Absolute noise level `δ`.
    pub delta: f64,
    /// Relative noise level `δ₀`.
    pub delta0: f64,
    pub seed: u64,
}

pub fn check_noise_level(delta0: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta0) {
        return Err(Error::InvalidParameter(format!(
            "relative noise level must lie in [0, 1), got {delta0}"
        )));
    }
    Ok(())
}

/// The i.i.d. `U[−1, 1]` draws for every perturbed node, in the normative order.
pub fn noise_stream(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

pub fn make_observation(
    model: &ForwardModel,
    p_true: &SpatialField,
    window: &ObservationWindow,
    delta0: f64,
    seed: u64,
) -> Result<NoisySample> {
    check_noise_level(delta0)?;
    let clean = model.state(p_true)?;
    let delta = delta0 * clean.max_abs();
    let noisy = if delta0 == 0.0 {
        clean.clone()
    } else {
        let chi = window.indicator(clean.grid())?;
        let observed: Vec<usize> = (0..chi.len()).filter(|&i| chi[i] > 0.0).collect();
        let levels = clean.tgrid().n_levels();
        let xi = noise_stream(seed, observed.len() * levels);
        let nn = chi.len();
        let mut values = clean.values().to_vec();
        let mut draws = xi.iter();
        for k in 0..levels {
            for &i in &observed {
                values[k * nn + i] += delta * draws.next().expect("noise stream length");
            }
        }
        SpaceTimeField::new(*clean.grid(), *clean.tgrid(), values)?
    };
    Ok(NoisySample {
        clean,
        noisy,
        delta,
        delta0,
        seed,
    })
}
