mod common;

use common::{brute_force_two_step, grid_oracle, mean, random_instance, reference_forward, rng, Instance};
use gmbounds_core::{solve, SourceModel, DEFAULT_EPS};

fn model_of(inst: &Instance) -> SourceModel {
    SourceModel::new(inst.alpha.clone(), inst.sigma_w2.clone(), inst.sigma_x1_2).unwrap()
}

#[test]
fn solver_matches_grid_search() {
    let mut r = rng(0x5eed);
    for case in 0..40 {
        let inst = random_instance(&mut r, 12);
        let schedule = solve(&model_of(&inst), inst.d_target, DEFAULT_EPS).unwrap();
        let (_, d, lambda) = grid_oracle(&inst, 20_000);
        assert!((schedule.mean_distortion() - mean(&d)).abs() <= 1e-6, "case {case}");
        for t in 0..d.len() {
            assert!((schedule.d[t] - d[t]).abs() <= 1e-5, "case {case} step {}", t + 1);
            assert!((schedule.lambda[t] - lambda[t]).abs() <= 1e-5, "case {case} step {}", t + 1);
        }
    }
}

#[test]
fn forward_pass_matches_reference_recursion() {
    let mut r = rng(17);
    for _ in 0..50 {
        let inst = random_instance(&mut r, 30);
        let model = model_of(&inst);
        for theta in [1e-3, 0.1, 0.7, 3.0, 50.0] {
            let s = gmbounds_core::waterfill::forward_pass(&model, theta).unwrap();
            let (d, lambda) = reference_forward(&inst, theta);
            for t in 0..d.len() {
                assert!((s.d[t] - d[t]).abs() <= 1e-12 * d[t].max(1.0));
                assert!((s.lambda[t] - lambda[t]).abs() <= 1e-12 * lambda[t].max(1.0));
            }
        }
    }
}

#[test]
fn two_step_closed_form_agrees_with_brute_force() {
    let (rate, d1, d2) = brute_force_two_step(0.5, 2_000_000);
    let s = solve(&model_of(&Instance {
        alpha: vec![1.0, 1.0],
        sigma_w2: vec![1.0, 1.0],
        sigma_x1_2: 1.0,
        d_target: 0.5,
    }), 0.5, DEFAULT_EPS)
    .unwrap();
    assert!((s.d[0] - d1).abs() < 1e-5, "{} vs {d1}", s.d[0]);
    assert!((s.d[1] - d2).abs() < 1e-5);
    // the solver stops within 1e-9 of the budget, which moves the rate slightly
    assert!((s.total_rate() - rate).abs() < 1e-7, "{} vs {rate}", s.total_rate());
    assert!((d2 - (2.0 - 2f64.sqrt())).abs() < 1e-5);
}

#[test]
fn generous_budgets_need_no_rate() {
    let inst = Instance {
        alpha: vec![0.5, 0.2, 0.9],
        sigma_w2: vec![1.0, 1.0, 1.0],
        sigma_x1_2: 1.0,
        d_target: 5.0,
    };
    let s = solve(&model_of(&inst), inst.d_target, DEFAULT_EPS).unwrap();
    let (theta, d, _) = grid_oracle(&inst, 1000);
    assert_eq!(theta, 0.0);
    assert!(s.zero_rate);
    assert_eq!(s.d, d);
    assert!(s.r.iter().all(|&r| r == 0.0));
}
