use std::f64::consts::PI;

use wavecoeff::reconstruct::{run, suggest_parameters, IterationConfig, DEFAULT_MAX_ITER};
use wavecoeff::synth::make_observation;
use wavecoeff::{CoefficientSpec, ForwardModel, Grid1D, ObservationWindow, ReconstructionResult, SpaceTimeField, SpatialField, TimeGrid};

fn model() -> ForwardModel {
    let g = Grid1D::unit(100).unwrap();
    let t = TimeGrid::new(1.0, 100).unwrap();
    ForwardModel::new(
        SpaceTimeField::from_fn(g, t, |x, s| x + s + 1.0).unwrap(),
        SpatialField::constant(g, 1.0),
    )
    .unwrap()
}

fn sine_bump(g: Grid1D) -> SpatialField {
    SpatialField::from_fn(g, |x| 0.5 * (PI * x).sin() + 1.0).unwrap()
}

fn reconstruct(model: &ForwardModel, p_true: &SpatialField, a: f64, b: f64, delta0: f64, seed: u64) -> ReconstructionResult {
    let window = ObservationWindow::complement_of(0.0, 1.0, a, b).unwrap();
    let data = make_observation(model, p_true, &window, delta0, seed).unwrap().noisy;
    let s = suggest_parameters(&window, delta0).unwrap();
    let cfg = IterationConfig {
        k: s.k,
        alpha: s.alpha,
        epsilon: s.epsilon,
        max_iter: DEFAULT_MAX_ITER,
        seed,
    };
    let p0 = SpatialField::constant(*model.grid(), 1.0);
    run(&data, &CoefficientSpec::default(), &cfg, model, &window, &p0, Some(p_true)).unwrap()
}

#[test]
fn smooth_coefficient_is_recovered() {
    let m = model();
    let p_true = sine_bump(*m.grid());
    let r = reconstruct(&m, &p_true, 0.1, 0.9, 0.01, 0);
    assert!(r.converged);
    assert!(r.rel_error.unwrap() <= 0.02, "err {:?}", r.rel_error);
    assert!((7..=63).contains(&r.iterations), "N = {}", r.iterations);
    assert_eq!(r.history.len(), r.iterations);
    assert!(r.history.last().unwrap().step_ratio <= 8e-5);
    let v = r.p_final.values();
    assert_eq!((v[0], v[v.len() - 1]), (1.0, 1.0));
}

#[test]
fn error_grows_with_noise_on_most_seeds() {
    let m = model();
    let p_true = sine_bump(*m.grid());
    let monotone = (0..4u64)
        .filter(|&seed| {
            let errs: Vec<f64> = [0.0, 0.02, 0.04]
                .iter()
                .map(|&d| reconstruct(&m, &p_true, 0.1, 0.9, d, seed).rel_error.unwrap())
                .collect();
            errs[0] < errs[1] && errs[1] < errs[2]
        })
        .count();
    assert!(monotone >= 3, "monotone on {monotone} of 4 seeds");
}

#[test]
fn identical_inputs_give_identical_histories() {
    let m = model();
    let p_true = sine_bump(*m.grid());
    let a = reconstruct(&m, &p_true, 0.1, 0.9, 0.02, 7);
    let b = reconstruct(&m, &p_true, 0.1, 0.9, 0.02, 7);
    assert_eq!(a.history, b.history);
    assert_eq!(a.p_final, b.p_final);
}
