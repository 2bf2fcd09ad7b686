//! Reconstructs `p(x) = ½ sin(πx) + 1` from 1% noisy data near both ends.

use std::f64::consts::PI;

use wavecoeff::reconstruct::{run, suggest_parameters, IterationConfig};
use wavecoeff::synth::make_observation;
use wavecoeff::*;

fn main() -> Result<()> {
    let g = Grid1D::unit(100)?;
    let t = TimeGrid::new(1.0, 100)?;
    let model = ForwardModel::new(
        SpaceTimeField::from_fn(g, t, |x, s| x + s + 1.0)?,
        SpatialField::constant(g, 1.0),
    )?;
    let p_true = SpatialField::from_fn(g, |x| 0.5 * (PI * x).sin() + 1.0)?;
    let omega = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9)?;
    let data = make_observation(&model, &p_true, &omega, 0.01, 0)?.noisy;

    let s = suggest_parameters(&omega, 0.01)?;
    let cfg = IterationConfig {
        k: s.k,
        alpha: s.alpha,
        epsilon: s.epsilon,
        max_iter: 500,
        seed: 0,
    };
    let p0 = SpatialField::constant(g, 1.0);
    let result = run(&data, &CoefficientSpec::default(), &cfg, &model, &omega, &p0, Some(&p_true))?;
    println!(
        "N = {}, err = {:.2}%",
        result.iterations,
        100.0 * result.rel_error.unwrap_or(f64::NAN)
    );
    Ok(())
}
