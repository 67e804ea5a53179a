mod common;

use common::*;
use netepi::{
    integrate, si_closed_form, sir_rinf, sir_xmax, sis_closed_form, EpidemicState, Graph,
    ModelParams,
};
use proptest::prelude::*;

const X0: [f64; 5] = [0.01, 0.1, 0.3, 0.6, 0.95];
const BETA: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];

#[test]
fn si_matches_rk4() {
    for &x0 in &X0 {
        for &beta in &BETA {
            let reference = rk4(|y| vec![beta * (1.0 - y[0]) * y[0]], &[x0], 1e-3, 20.0);
            let worst = reference
                .iter()
                .map(|(t, y)| (si_closed_form(x0, beta, *t).unwrap() - y[0]).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8, "x0={x0} beta={beta}: {worst}");
        }
    }
}

#[test]
fn sis_matches_rk4() {
    for &x0 in &X0 {
        for &beta in &BETA {
            for &gamma in &[0.1, 0.5, 1.0, 2.0, beta] {
                let reference =
                    rk4(|y| vec![beta * (1.0 - y[0]) * y[0] - gamma * y[0]], &[x0], 1e-3, 20.0);
                let worst = reference
                    .iter()
                    .map(|(t, y)| (sis_closed_form(x0, beta, gamma, *t).unwrap() - y[0]).abs())
                    .fold(0.0, f64::max);
                assert!(worst < 1e-8, "x0={x0} beta={beta} gamma={gamma}: {worst}");
            }
        }
    }
}

#[test]
fn sis_late_value_and_equal_rates() {
    let late = sis_closed_form(0.9, 1.0, 0.5, 200.0).unwrap();
    assert!((late - 0.5).abs() < 1e-12);
    let v = sis_closed_form(0.5, 1.0, 1.0, 1.0).unwrap();
    assert!((v - 1.0 / 3.0).abs() < 1e-15);
    let reference = rk4(|y| vec![-y[0] * y[0]], &[0.5], 1e-3, 1.0);
    assert!((reference.last().unwrap().1[0] - v).abs() < 1e-10);
    // Large times do not overflow in either regime.
    for (beta, gamma) in [(5.0, 0.1), (0.1, 5.0)] {
        let v = sis_closed_form(0.4, beta, gamma, 500.0).unwrap();
        assert!(v.is_finite());
    }
    assert!(si_closed_form(0.4, 5.0, 500.0).unwrap().is_finite());
}

fn rinf_residual(s0: f64, r0: f64, ratio: f64, r: f64) -> f64 {
    1.0 - r - s0 * (-ratio * (r - r0)).exp()
}

#[test]
fn rinf_bracket_values() {
    let low = sir_rinf(0.95, 0.0, 0.25, 1.0).unwrap();
    assert!(low > 0.05 && low < 0.1, "{low}");
    assert!(rinf_residual(0.95, 0.0, 0.25, low).abs() <= 1e-10);
    let high = sir_rinf(0.95, 0.0, 4.0, 1.0).unwrap();
    assert!(high > 0.95, "{high}");
    assert!(rinf_residual(0.95, 0.0, 4.0, high).abs() <= 1e-10);
    assert_eq!(sir_rinf(0.6, 0.4, 3.0, 1.0).unwrap(), 0.4);
}

proptest! {
    #[test]
    fn rinf_is_the_unique_root(
        s0 in 0.01f64..0.99,
        frac in 0.0f64..0.9,
        beta in 0.05f64..8.0,
        gamma in 0.05f64..8.0,
    ) {
        let r0 = frac * (1.0 - s0);
        let ratio = beta / gamma;
        let r = sir_rinf(s0, r0, beta, gamma).unwrap();
        prop_assert!(r >= r0 && r <= 1.0);
        prop_assert!(rinf_residual(s0, r0, ratio, r).abs() <= 1e-10);
        // Sign analysis: positive to the left of the root, negative to the right.
        let step = 1e-6;
        for k in 1..=20 {
            let left = r0 + (r - r0) * k as f64 / 21.0;
            if r - left > step {
                prop_assert!(rinf_residual(s0, r0, ratio, left) > 0.0);
            }
            let right = r + (1.0 - r) * k as f64 / 21.0;
            if right - r > step {
                prop_assert!(rinf_residual(s0, r0, ratio, right) < 0.0);
            }
        }
    }
}

fn trajectory_max(s0: f64, x0: f64, beta: f64, gamma: f64, t_end: f64) -> f64 {
    rk4(scalar_sir(beta, gamma), &[s0, x0, 0.0], 1e-3, t_end)
        .iter()
        .map(|(_, y)| y[1])
        .fold(0.0, f64::max)
}

#[test]
fn xmax_matches_trajectory_peak() {
    let formula = sir_xmax(0.95, 0.05, 2.0, 0.25).unwrap();
    assert!((formula - 0.6215).abs() < 1e-4);
    assert!((formula - trajectory_max(0.95, 0.05, 2.0, 0.25, 20.0)).abs() < 1e-4);

    let formula = sir_xmax(0.9, 0.1, 1.0, 0.5).unwrap();
    assert!((formula - trajectory_max(0.9, 0.1, 1.0, 0.5, 30.0)).abs() < 1e-4);
}

/// A single node with a unit self-loop is the scalar model.
fn single_node() -> Graph {
    Graph::from_rows(&[vec![1.0]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_sir_conservation_and_monotonicity(
        x0 in 0.001f64..0.5,
        beta in 0.2f64..4.0,
        gamma in 0.2f64..2.0,
    ) {
        let params = ModelParams::sir(beta, gamma).unwrap();
        let init = EpidemicState::sir(vec![1.0 - x0], vec![x0], vec![0.0]).unwrap();
        let traj = integrate(&single_node(), &params, &init, 10.0, 1e-2).unwrap();
        for w in traj.states.windows(2) {
            prop_assert!(w[1].s[0] < w[0].s[0]);
            prop_assert!(w[1].r[0] > w[0].r[0]);
        }
        for st in &traj.states {
            prop_assert!((st.s[0] + st.x[0] + st.r[0] - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn single_node_network_matches_scalar_oracle() {
    let (beta, gamma) = (1.5, 0.5);
    let params = ModelParams::sir(beta, gamma).unwrap();
    let init = EpidemicState::sir(vec![0.97], vec![0.03], vec![0.0]).unwrap();
    let traj = integrate(&single_node(), &params, &init, 10.0, 1e-3).unwrap();
    let reference = rk4(scalar_sir(beta, gamma), &[0.97, 0.03, 0.0], 1e-3, 10.0);
    assert_eq!(traj.len(), reference.len());
    for (st, (_, y)) in traj.states.iter().zip(&reference) {
        assert!(sup_dist(&[st.s[0], st.x[0], st.r[0]], y) < 1e-12);
    }
}
