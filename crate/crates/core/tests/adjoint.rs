use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wavecoeff::mesh::{l2_norm_spacetime, weighted_spacetime_inner};
use wavecoeff::objective::{directional_derivative, evaluate_j, random_admissible, ObjectiveConfig};
use wavecoeff::synth::make_observation;
use wavecoeff::wave::{solve_backward, solve_sensitivity, WaveSolver};
use wavecoeff::{ForwardModel, Grid1D, ObservationWindow, SpaceTimeField, SpatialField, TimeGrid};

/// A smooth space-time field built from a handful of random low modes.
fn smooth_field(g: Grid1D, t: TimeGrid, coeffs: &[[f64; 3]; 3]) -> SpaceTimeField {
    SpaceTimeField::from_fn(g, t, |x, s| {
        let mut v = 0.0;
        for (j, row) in coeffs.iter().enumerate() {
            for (k, c) in row.iter().enumerate() {
                v += c * (j as f64 * PI * x).cos() * (k as f64 * PI * s + 0.3).sin();
            }
        }
        v
    })
    .unwrap()
}

fn pairing_gap(n: usize, f_c: &[[f64; 3]; 3], g_c: &[[f64; 3]; 3]) -> f64 {
    let g = Grid1D::unit(n).unwrap();
    let t = TimeGrid::new(1.0, n).unwrap();
    let p = SpatialField::constant(g, 1.0);
    let whole = ObservationWindow::whole(0.0, 1.0).unwrap();
    let f = smooth_field(g, t, f_c);
    let r = smooth_field(g, t, g_c);
    let u = WaveSolver::new(&p, t).unwrap().solve_with_source(&f).unwrap();
    let z = solve_backward(&p, &r, &whole).unwrap();
    let lhs = weighted_spacetime_inner(&u, &r, &whole).unwrap();
    let rhs = weighted_spacetime_inner(&f, &z, &whole).unwrap();
    let scale = l2_norm_spacetime(&u, &whole).unwrap() * l2_norm_spacetime(&r, &whole).unwrap();
    (lhs - rhs).abs() / scale
}

#[test]
fn forward_and_backward_solvers_are_adjoint_up_to_discretization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut draw = || {
        let mut c = [[0.0; 3]; 3];
        c.iter_mut().flatten().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        c
    };
    let (f_c, g_c) = (draw(), draw());
    let coarse = pairing_gap(10, &f_c, &g_c);
    let fine = pairing_gap(20, &f_c, &g_c);
    let finer = pairing_gap(40, &f_c, &g_c);
    let ratio = coarse / fine;
    assert!((3.0..=5.0).contains(&ratio), "gaps {coarse} {fine} ratio {ratio}");
    assert!(fine / finer > 3.0, "gaps {fine} {finer}");
}

fn example_model(n: usize) -> ForwardModel {
    let g = Grid1D::unit(n).unwrap();
    let t = TimeGrid::new(1.0, n).unwrap();
    ForwardModel::new(
        SpaceTimeField::from_fn(g, t, |x, s| x + s + 1.0).unwrap(),
        SpatialField::constant(g, 1.0),
    )
    .unwrap()
}

#[test]
fn difference_quotients_approach_the_sensitivity() {
    let model = example_model(60);
    let g = *model.grid();
    let whole = ObservationWindow::whole(0.0, 1.0).unwrap();
    let p = SpatialField::from_fn(g, |x| 1.0 + 0.1 * (PI * x).sin()).unwrap();
    let dir = SpatialField::from_fn(g, |x| (PI * x).sin()).unwrap();
    let u = model.state(&p).unwrap();
    let w0 = solve_sensitivity(&p, &dir, &u).unwrap();
    let mut errors = Vec::new();
    for eps in [1e-2, 1e-3, 1e-4] {
        let up = model.state(&p.add_scaled(eps, &dir).unwrap()).unwrap();
        let quotient = up.sub(&u).unwrap().scaled(1.0 / eps).unwrap();
        errors.push(l2_norm_spacetime(&quotient.sub(&w0).unwrap(), &whole).unwrap());
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
    // First-order behaviour: each decade of ε buys roughly a decade of error.
    assert!(errors[0] / errors[1] > 5.0 && errors[1] / errors[2] > 5.0, "{errors:?}");
}

#[test]
fn adjoint_derivative_matches_central_differences_in_random_directions() {
    let model = example_model(100);
    let g = *model.grid();
    let window = ObservationWindow::complement_of(0.0, 1.0, 0.1, 0.9).unwrap();
    let p_true = SpatialField::from_fn(g, |x| 0.5 * (PI * x).sin() + 1.0).unwrap();
    let data = make_observation(&model, &p_true, &window, 0.01, 0).unwrap().noisy;
    let cfg = ObjectiveConfig::new(1e-7, window).unwrap();
    let p = SpatialField::from_fn(g, |x| 1.0 + 0.1 * (PI * x).sin()).unwrap();
    let j = |q: &SpatialField| evaluate_j(q, &model.state(q).unwrap(), &data, &cfg).unwrap().total();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let eps = 1e-4;
    for _ in 0..5 {
        let dir = random_admissible(&g, 1.0, 1.0, &mut rng)
            .unwrap()
            .map(|v| v - 1.0)
            .unwrap();
        let fd = (j(&p.add_scaled(eps, &dir).unwrap()) - j(&p.add_scaled(-eps, &dir).unwrap())) / (2.0 * eps);
        let adj = directional_derivative(&model, &p, &dir, &data, &cfg).unwrap();
        assert!((fd - adj).abs() / fd.abs().max(1.0) < 1e-2, "fd {fd} adjoint {adj}");
    }
}
