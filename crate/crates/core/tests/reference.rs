mod common;

use common::{spec, with_field, COUPLED, DECOUPLED};
use shockfit::model::ProblemSpec;
use shockfit::reference::{extract_shocks, output_times, run_reference, ShockTrack};

fn with_cells(s: &ProblemSpec<f64>, cells: usize) -> ProblemSpec<f64> {
    let mut c = s.config.clone();
    c.numerics.fv_cells = cells;
    ProblemSpec::from_config(c).unwrap()
}

#[test]
fn undamped_burgers_shock_moves_at_half_speed() {
    let s = spec(&with_field(&with_field(DECOUPLED, "f", "0"), "g", "0"));
    let sol = run_reference(&s, &[0.5]).unwrap();
    let (xm, xp) = extract_shocks(&sol, 0).unwrap();
    assert!((xm - 0.25).abs() <= 2.0 * sol.dx, "{xm}");
    assert!((xp - 1.25).abs() <= 2.0 * sol.dx, "{xp}");
}

#[test]
fn fronts_converge_under_refinement() {
    let base = spec(COUPLED);
    let times = output_times(&base);
    let coarse = run_reference(&base, &times).unwrap();
    let fine = run_reference(&with_cells(&base, 2 * base.numerics.fv_cells), &times).unwrap();
    let (a, b) = (ShockTrack::from_solution(&coarse).unwrap(), ShockTrack::from_solution(&fine).unwrap());
    for k in 0..times.len() {
        assert!((a.minus[k] - b.minus[k]).abs() <= 2.0 * fine.dx, "t={}", times[k]);
        assert!((a.plus[k] - b.plus[k]).abs() <= 2.0 * fine.dx, "t={}", times[k]);
    }
}

#[test]
fn damped_u_shock_on_a_fine_grid() {
    let s = with_cells(&spec(DECOUPLED), 16384);
    let sol = run_reference(&s, &[0.5]).unwrap();
    let (xm, _) = extract_shocks(&sol, 0).unwrap();
    let exact = 0.5 * -(-0.05_f64 * 0.5).exp_m1() / 0.05;
    assert!((xm - exact).abs() < 5e-4, "{xm} vs {exact}");
    assert!(sol.max_courant <= s.numerics.fv_cfl * (1.0 + 1e-12));
}
