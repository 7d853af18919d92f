mod common;

use common::model;
use levy_scale::fluctuation::up_exit;
use levy_scale::mc_oracle::{
    simulate_overshoot_undershoot, simulate_two_sided_exit, simulate_two_sided_exit_with, SimOptions, SimProcess,
};
use levy_scale::models::{exp1_jumps, DENSITY_SCENARIO, EXIT_SCENARIO};
use levy_scale::scale::build_scale;

const Q: f64 = 0.05;

#[test]
fn table_cell_is_covered() {
    let m = model(EXIT_SCENARIO.mu, 1.0, EXIT_SCENARIO.lambda, exp1_jumps());
    let (up, down) = simulate_two_sided_exit(&m, Q, 2.0, EXIT_SCENARIO.b, 100_000, 2024).unwrap();
    assert!(up.contains(0.46728), "{up:?}");
    assert!(up.value + down.value <= 1.0);
}

#[test]
fn confidence_intervals_cover_at_the_nominal_rate() {
    let m = model(EXIT_SCENARIO.mu, 0.0, EXIT_SCENARIO.lambda, exp1_jumps());
    let exact = up_exit(&build_scale(&m, Q).unwrap(), 2.0, EXIT_SCENARIO.b).unwrap();
    let covered = (0..100u64)
        .filter(|&seed| {
            simulate_two_sided_exit(&m, Q, 2.0, EXIT_SCENARIO.b, 4_000, 10_000 + seed).unwrap().0.contains(exact)
        })
        .count();
    assert!(covered >= 90, "covered {covered} of 100");
}

#[test]
fn halving_the_step_moves_the_estimate_less_than_noise() {
    let m = model(EXIT_SCENARIO.mu, 1.0, EXIT_SCENARIO.lambda, exp1_jumps());
    let p = SimProcess::from_model(&m);
    let coarse = SimOptions::default();
    let fine = SimOptions { substeps: 2 * coarse.substeps, ..coarse };
    let (a, _) = simulate_two_sided_exit_with(&p, Q, 2.0, EXIT_SCENARIO.b, 100_000, 77, coarse).unwrap();
    let (b, _) = simulate_two_sided_exit_with(&p, Q, 2.0, EXIT_SCENARIO.b, 100_000, 78, fine).unwrap();
    let se = a.stderr.hypot(b.stderr);
    assert!((a.value - b.value).abs() < 2.0 * se, "{} vs {} (se {se})", a.value, b.value);
}

#[test]
fn results_do_not_depend_on_the_thread_count() {
    let m = model(EXIT_SCENARIO.mu, 1.0, EXIT_SCENARIO.lambda, exp1_jumps());
    let run = || simulate_two_sided_exit(&m, Q, 1.0, EXIT_SCENARIO.b, 20_000, 5).unwrap();
    let many = run();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
    assert_eq!(many, one);
    assert_eq!(many, run());
}

#[test]
fn undershoot_histogram_shows_the_jump_at_the_start() {
    let m = model(DENSITY_SCENARIO.mu, 0.0, DENSITY_SCENARIO.lambda, exp1_jumps());
    let h = simulate_overshoot_undershoot(&m, Q, DENSITY_SCENARIO.x, 0.1, 200_000, 9).unwrap();
    let below = h.undershoot[h.bin_of(4.95)];
    let above = h.undershoot[h.bin_of(5.05)];
    assert!(above.value - below.value > 3.0 * above.stderr.hypot(below.stderr), "{below:?} {above:?}");
    assert_eq!(h.creep_mass.value, 0.0);
}
