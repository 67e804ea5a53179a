mod common;

use common::*;
use netepi::equilibria::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use netepi::{
    integrate_with, rhs, sir_asymptotic, sir_asymptotic_bracketed, sir_rinf, sis_endemic,
    sis_endemic_expansion_high_rate, sis_endemic_expansion_threshold, Bracket, EndemicStart,
    EpidemicState, Error, Graph, IntegrationOptions, ModelParams, SirStart, SpectralTriple,
};
use proptest::prelude::*;
use rand::Rng;

fn endemic(g: &Graph, beta: f64, gamma: f64, start: EndemicStart) -> netepi::EndemicResult {
    sis_endemic(g, beta, gamma, DEFAULT_TOL, DEFAULT_MAX_ITER, &start).unwrap()
}

#[test]
fn regular_graphs_have_uniform_endemic_state() {
    for (g, k) in [(complete(4), 3.0), (circulant(12, 4), 4.0), (swap_pair(), 1.0)] {
        let (beta, gamma) = (0.9, 0.5);
        let expected = 1.0 - gamma / (beta * k);
        for start in [EndemicStart::Lower, EndemicStart::Upper] {
            let res = endemic(&g, beta, gamma, start);
            assert!(res.x_star.iter().all(|x| (x - expected).abs() <= 1e-10));
            assert!(res.monotone && res.residual <= DEFAULT_TOL);
        }
        let high = sis_endemic_expansion_high_rate(&g, beta, gamma).unwrap();
        assert!(high.iter().all(|x| (x - expected).abs() < 1e-15));
    }
}

#[test]
fn bipartite_pair_endemic_state() {
    let g = bipartite_pair();
    for start in [EndemicStart::Lower, EndemicStart::Upper] {
        let res = endemic(&g, 1.0, 1.0, start);
        assert!((res.x_star[0] - 5.0 / 8.0).abs() <= 1e-10);
        assert!((res.x_star[1] - 5.0 / 6.0).abs() <= 1e-10);
    }
}

#[test]
fn below_threshold_is_rejected() {
    let g = complete(4);
    let err = sis_endemic(&g, 0.3, 1.0, DEFAULT_TOL, DEFAULT_MAX_ITER, &EndemicStart::Lower).unwrap_err();
    assert!(matches!(err, Error::BelowThreshold { r0 } if (r0 - 0.9).abs() < 1e-12));
}

#[test]
fn near_threshold_run_warns() {
    let g = complete(4);
    let res = endemic(&g, (1.0 + 5e-4) / 3.0, 1.0, EndemicStart::Lower);
    assert_eq!(res.warnings.len(), 1);
    let res = endemic(&g, 1.0, 1.0, EndemicStart::Lower);
    assert!(res.warnings.is_empty());
}

#[test]
fn custom_starts_follow_bracket_rules() {
    let g = graph20();
    let (beta, gamma) = (0.5, 0.4);
    let triple = SpectralTriple::of_graph(&g).unwrap();
    let bound = 1.0 - gamma / (beta * triple.lambda_max);
    let umax = triple.u_max.iter().cloned().fold(0.0, f64::max);
    let umin = triple.u_max.iter().cloned().fold(1.0, f64::min);
    let low: Vec<f64> = triple.u_max.iter().map(|u| 0.5 * bound * u / umax).collect();
    let res = endemic(&g, beta, gamma, EndemicStart::Custom(low));
    assert_eq!(res.bracket, Bracket::Lower);
    assert!(res.monotone);
    let high: Vec<f64> = triple.u_max.iter().map(|u| 1.1 * bound * u / umin).collect();
    assert_eq!(endemic(&g, beta, gamma, EndemicStart::Custom(high)).bracket, Bracket::Upper);

    let middle: Vec<f64> = triple.u_max.iter().map(|u| bound * u / (0.5 * (umax + umin))).collect();
    let not_parallel = vec![0.1; 20];
    for y in [middle, not_parallel, vec![0.0; 20]] {
        assert!(sis_endemic(&g, beta, gamma, DEFAULT_TOL, DEFAULT_MAX_ITER, &EndemicStart::Custom(y)).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn brackets_agree_and_are_monotone(seed in any::<u64>(), n in 2usize..=30, r0 in 1.05f64..6.0) {
        let g = random_irreducible(&mut rng(seed), n, 0.2, 0.1, 2.0);
        let lambda = SpectralTriple::of_graph(&g).unwrap().lambda_max;
        let (gamma, beta) = (1.0, r0 / lambda);
        let lo = endemic(&g, beta, gamma, EndemicStart::Lower);
        let hi = endemic(&g, beta, gamma, EndemicStart::Upper);
        prop_assert!(lo.monotone && hi.monotone);
        prop_assert!(sup_dist(&lo.x_star, &hi.x_star) <= 2.0 * DEFAULT_TOL);
        prop_assert!(lo.x_star.iter().all(|&x| x > 0.0 && x < 1.0));
        let d = rhs(&g, &ModelParams::sis(beta, gamma).unwrap(), &EpidemicState::from_infected(lo.x_star.clone())).unwrap();
        prop_assert!(d.sup_norm() < 1e-8);
    }
}

#[test]
fn endemic_state_attracts_the_ode() {
    let mut r = rng(11);
    for n in [5, 12, 25] {
        let g = random_irreducible(&mut r, n, 0.25, 0.1, 2.0);
        let lambda = SpectralTriple::of_graph(&g).unwrap().lambda_max;
        let (gamma, beta) = (1.0, 2.0 / lambda);
        let fixed = endemic(&g, beta, gamma, EndemicStart::Lower);
        let opts = IntegrationOptions::until(5000.0).dt(1e-2).record_every(usize::MAX).until_steady(1e-10);
        let traj = integrate_with(&g, &ModelParams::sis(beta, gamma).unwrap(), &EpidemicState::from_infected(vec![0.5; n]), &opts).unwrap();
        assert!(traj.reached_steady_state);
        assert!(sup_dist(&traj.final_state().x, &fixed.x_star) <= 1e-5);
    }
}

fn ratio_spread(ratios: &[f64]) -> f64 {
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

#[test]
fn threshold_expansion_is_second_order() {
    let g = bipartite_pair();
    let ratios: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
        .iter()
        .map(|&delta| {
            let (gamma, beta) = (1.0, (1.0 + delta) / 4.0);
            let exact = endemic(&g, beta, gamma, EndemicStart::Lower).x_star;
            let approx = sis_endemic_expansion_threshold(&g, beta, gamma).unwrap();
            sup_dist(&exact, &approx) / (delta * delta)
        })
        .collect();
    assert!(ratio_spread(&ratios) < 2.0, "{ratios:?}");
}

#[test]
fn threshold_expansion_on_regular_graph() {
    let g = circulant(8, 2);
    let delta = 0.05;
    let approx = sis_endemic_expansion_threshold(&g, (1.0 + delta) / 2.0, 1.0).unwrap();
    assert!(approx.iter().all(|x| (x - delta).abs() < 1e-12));
    let exact = delta / (1.0 + delta);
    assert!((approx[0] - exact).abs() <= delta * delta);
    let zero = sis_endemic_expansion_threshold(&g, 0.5, 1.0).unwrap();
    assert!(zero.iter().all(|&x| x == 0.0));
    assert!(sis_endemic_expansion_threshold(&g, 0.4, 1.0).is_err());
}

#[test]
fn high_rate_expansion_is_second_order() {
    let g = bipartite_pair();
    let ratios: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&q| {
            let exact = endemic(&g, 1.0, q, EndemicStart::Lower).x_star;
            let approx = sis_endemic_expansion_high_rate(&g, 1.0, q).unwrap();
            sup_dist(&exact, &approx) / (q * q)
        })
        .collect();
    assert!(ratio_spread(&ratios) < 2.0, "{ratios:?}");
}

fn sir_initial(n: usize, x0: f64) -> EpidemicState {
    EpidemicState::sir(vec![1.0 - x0; n], vec![x0; n], vec![0.0; n]).unwrap()
}

#[test]
fn symmetric_pair_matches_scalar_final_size() {
    let init = sir_initial(2, 0.05);
    let res = sir_asymptotic(&swap_pair(), 4.0, 1.0, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Zero).unwrap();
    let rinf = sir_rinf(0.95, 0.0, 4.0, 1.0).unwrap();
    for s in &res.s_inf {
        assert!((s - (1.0 - rinf)).abs() < 1e-9);
        assert!(*s < 0.05);
    }
}

#[test]
fn vanishing_infection_leaves_susceptibles() {
    let g = graph20();
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-4, 1e-6, 1e-8] {
        // Below threshold in the effective sense, so the outbreak is small.
        let mut s0 = vec![0.3; 20];
        let mut r0 = vec![0.7; 20];
        for i in 0..20 {
            s0[i] -= eps;
            r0[i] -= 0.0;
        }
        let init = EpidemicState::sir(s0.clone(), vec![eps; 20], r0).unwrap();
        let res = sir_asymptotic(&g, 0.5, 0.8, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Upper).unwrap();
        let gap = sup_dist(&res.s_inf, &s0);
        assert!(gap < prev);
        prev = gap;
    }
    assert!(prev < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sir_brackets_are_ordered(seed in any::<u64>(), n in 2usize..=50, beta in 0.1f64..2.0, x0 in 1e-4f64..0.3) {
        let g = random_irreducible(&mut rng(seed), n, 0.15, 0.1, 2.0);
        let init = sir_initial(n, x0);
        let report = sir_asymptotic_bracketed(&g, beta, 1.0, &init, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(report.ordered);
        prop_assert!(report.lower.monotone && report.upper.monotone);
        prop_assert!(report.gap <= 2.0 * DEFAULT_TOL);
        prop_assert!(report.lower.residual <= DEFAULT_TOL && report.upper.residual <= DEFAULT_TOL);
        for res in [&report.lower, &report.upper] {
            for i in 0..n {
                prop_assert!(res.s_inf[i] >= 0.0 && res.s_inf[i] <= 1.0);
                prop_assert!((res.s_inf[i] + res.r_inf[i] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_starts_reach_the_same_point(seed in any::<u64>(), n in 2usize..=20) {
        let mut r = rng(seed);
        let g = random_irreducible(&mut r, n, 0.2, 0.1, 2.0);
        let init = sir_initial(n, 0.02);
        let reference = sir_asymptotic(&g, 1.0, 0.5, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Zero).unwrap();
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..=1.0)).collect();
        let res = sir_asymptotic(&g, 1.0, 0.5, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Custom(y)).unwrap();
        prop_assert!(sup_dist(&res.s_inf, &reference.s_inf) <= 1e-8);
    }
}

#[test]
fn sir_fixed_point_matches_long_integration() {
    let mut r = rng(3);
    for (n, beta) in [(8, 0.6), (20, 0.3), (40, 0.25)] {
        let g = random_irreducible(&mut r, n, 0.15, 0.1, 2.0);
        let gamma = 0.5;
        let init = sir_initial(n, 0.01);
        let fixed = sir_asymptotic(&g, beta, gamma, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Zero).unwrap();
        let opts = IntegrationOptions::until(5000.0).dt(1e-2).record_every(usize::MAX).until_steady(1e-10);
        let traj = integrate_with(&g, &ModelParams::sir(beta, gamma).unwrap(), &init, &opts).unwrap();
        assert!(sup_dist(&traj.final_state().s, &fixed.s_inf) <= 1e-4);
    }
}

#[test]
fn sir_rejects_bad_inputs() {
    let g = swap_pair();
    let no_infection = sir_initial(2, 0.0);
    assert!(sir_asymptotic(&g, 1.0, 1.0, &no_infection, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Zero).is_err());
    let init = sir_initial(2, 0.1);
    let outside = SirStart::Custom(vec![0.5, 1.5]);
    assert!(sir_asymptotic(&g, 1.0, 1.0, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &outside).is_err());
    let reducible = Graph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    assert!(matches!(
        sir_asymptotic(&reducible, 1.0, 1.0, &init, DEFAULT_TOL, DEFAULT_MAX_ITER, &SirStart::Zero),
        Err(Error::ReducibleMatrix)
    ));
}
