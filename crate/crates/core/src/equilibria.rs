//! Endemic state of the network SIS model and asymptotic state of the
//! network SIR model, both computed by monotone fixed-point iteration.
//!
//! SIS: the endemic state `x*` is the unique nonzero fixed point of
//! `y -> F+((beta/gamma) A y)` with `f+(z) = z / (1 + z)` entrywise. Starting
//! from `c * u_max` with `max_i c u_i <= 1 - gamma/(beta lambda)` the iterates
//! increase to `x*`; with `min_i c u_i >= 1 - gamma/(beta lambda)` they
//! decrease to it.
//!
//! SIR: the final susceptible fractions are the unique fixed point in
//! `[0, 1 - r(0)]` of
//! `H(s)_i = s_i(0) exp((beta/gamma) sum_j a_ij (s_j - 1 + r_j(0)))`.
//! Iterating from `0` gives a nondecreasing sequence, from `1 - r(0)` a
//! nonincreasing one, and the two bracket every other sequence.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{dot, sup_dist, sup_norm};
use crate::network::EpidemicState;
use crate::scalar::check_rate;
use crate::spectral::SpectralTriple;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Distance above threshold below which convergence is flagged as slow.
pub const NEAR_THRESHOLD_DELTA: f64 = 1e-3;

/// `R0` values within this distance of 1 count as critical.
pub const CRITICAL_TOL: f64 = 1e-12;

const MONOTONE_SLACK: f64 = 4.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bracket {
    /// Iterates increase to the fixed point.
    Lower,
    /// Iterates decrease to the fixed point.
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndemicStart {
    Lower,
    Upper,
    /// Must be a positive multiple of `u_max` satisfying one of the two
    /// bracket bounds.
    Custom(Vec<f64>),
}

impl From<Bracket> for EndemicStart {
    fn from(b: Bracket) -> Self {
        match b {
            Bracket::Lower => EndemicStart::Lower,
            Bracket::Upper => EndemicStart::Upper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndemicResult {
    pub x_star: Vec<f64>,
    pub iterations: usize,
    /// `||F+((beta/gamma) A x*) - x*||_inf`.
    pub residual: f64,
    pub bracket: Bracket,
    /// Whether every iterate moved in the direction the bracket promises.
    pub monotone: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SirStart {
    Zero,
    Upper,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirAsymptoticResult {
    pub s_inf: Vec<f64>,
    pub r_inf: Vec<f64>,
    pub iterations: usize,
    /// `||H(s_inf) - s_inf||_inf`.
    pub residual: f64,
    pub start: SirStart,
    /// Monotone in the promised direction (always true for custom starts,
    /// which promise nothing).
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Both bracketing sequences of the SIR map run in lockstep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirBracketReport {
    pub lower: SirAsymptoticResult,
    pub upper: SirAsymptoticResult,
    /// `p(k) <= q(k)` held at every step.
    pub ordered: bool,
    pub gap: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Up,
    Down,
    Free,
}

/// Stopping rule. A step within `tol` is not enough on its own: near
/// threshold the contraction factor `rho` is close to one and the remaining
/// distance is about `step * rho / (1 - rho)`, so that tail estimate must
/// also fall below `tol / 2`. On periodic graphs the step norms oscillate,
/// so `rho` is the largest per-step rate seen over several lags.
struct Stopper {
    tol: f64,
    history: VecDeque<f64>,
}

const STOP_LAGS: usize = 8;

impl Stopper {
    fn new(tol: f64) -> Self {
        Self { tol, history: VecDeque::with_capacity(STOP_LAGS) }
    }

    fn done(&mut self, step: f64, y: &[f64]) -> bool {
        let rho = self
            .history
            .iter()
            .enumerate()
            .map(|(j, prev)| (step / prev).powf(1.0 / (j + 1) as f64))
            .fold(0.0f64, f64::max);
        let warm = self.history.len() == STOP_LAGS;
        if warm {
            self.history.pop_back();
        }
        self.history.push_front(step);
        if step > self.tol {
            return false;
        }
        // Round-off floor: nothing more to gain.
        if step <= 8.0 * f64::EPSILON * sup_norm(y).max(1.0) {
            return true;
        }
        warm && rho < 1.0 && step * rho / (1.0 - rho) <= 0.5 * self.tol
    }
}

struct Run {
    y: Vec<f64>,
    iterations: usize,
    residual: f64,
    monotone: bool,
}

fn moved_as_promised(prev: &[f64], next: &[f64], dir: Direction, rel_slack: f64) -> bool {
    prev.iter().zip(next).all(|(&p, &q)| {
        let slack = rel_slack * p.abs().max(q.abs());
        match dir {
            Direction::Up => q >= p - slack,
            Direction::Down => q <= p + slack,
            Direction::Free => true,
        }
    })
}

/// Iterates `map` until [`Stopper`] accepts the step, then confirms
/// that the returned point has fixed-point residual within `tol`.
///
/// `slack` is the relative tolerance of the monotonicity check. It must
/// cover how inexactly the start meets its bracket condition, since that
/// error is carried along by the iteration (around cycles it barely decays).
fn iterate<F>(
    mut map: F,
    y0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    dir: Direction,
    slack: f64,
) -> Result<Run>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut y = y0;
    let mut next = vec![0.0; y.len()];
    let mut monotone = true;
    let mut stop = Stopper::new(tol);
    for k in 1..=max_iter {
        map(&y, &mut next);
        monotone &= moved_as_promised(&y, &next, dir, slack);
        let step = sup_dist(&y, &next);
        std::mem::swap(&mut y, &mut next);
        if stop.done(step, &y) {
            map(&y, &mut next);
            let residual = sup_dist(&y, &next);
            if residual <= tol {
                monotone &= moved_as_promised(&y, &next, dir, slack);
                return Ok(Run {
                    y,
                    iterations: k,
                    residual,
                    monotone,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        what: "fixed-point iteration",
        iterations: max_iter,
    })
}

fn check_iteration_params(tol: f64, max_iter: usize) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be positive"));
    }
    Ok(())
}

/// `1 - gamma / (beta lambda)`, or `BelowThreshold` when `beta lambda / gamma <= 1`.
fn endemic_bound(triple: &SpectralTriple, beta: f64, gamma: f64) -> Result<f64> {
    let r0 = beta * triple.lambda_max / gamma;
    if r0 <= 1.0 + CRITICAL_TOL {
        return Err(Error::BelowThreshold { r0 });
    }
    Ok(1.0 - 1.0 / r0)
}

/// Endemic state of the network SIS model above threshold.
pub fn sis_endemic(
    g: &Graph,
    beta: f64,
    gamma: f64,
    tol: f64,
    max_iter: usize,
    start: &EndemicStart,
) -> Result<EndemicResult> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    check_iteration_params(tol, max_iter)?;
    g.ensure_strongly_connected()?;
    let triple = SpectralTriple::of_graph(g)?;
    let bound = endemic_bound(&triple, beta, gamma)?;
    let u = &triple.u_max;
    let u_max = u.iter().cloned().fold(f64::MIN, f64::max);
    let u_min = u.iter().cloned().fold(f64::MAX, f64::min);

    let (y0, bracket) = match start {
        EndemicStart::Lower => (u.iter().map(|v| bound * v / u_max).collect(), Bracket::Lower),
        EndemicStart::Upper => (u.iter().map(|v| bound * v / u_min).collect(), Bracket::Upper),
        EndemicStart::Custom(y) => {
            g.check_len(y)?;
            (y.clone(), classify_custom_start(y, u, bound)?)
        }
    };

    let a = g.adjacency();
    // The canonical starts make the first step an equality at the extreme
    // node, so errors in u_max (and in a custom start's direction) can
    // show up as tiny moves the wrong way.
    let au = a.mul_vec(u);
    let eig_err = au
        .iter()
        .zip(u)
        .fold(0.0f64, |m, (x, ui)| m.max((x - triple.lambda_max * ui).abs() / (triple.lambda_max * ui)));
    let c: f64 = y0.iter().sum();
    let dir_err = y0.iter().zip(u).fold(0.0f64, |m, (yi, ui)| m.max((yi - c * ui).abs() / (c * ui)));
    let slack = MONOTONE_SLACK.max(2.0 * (eig_err + dir_err));
    let ratio = beta / gamma;
    let dir = match bracket {
        Bracket::Lower => Direction::Up,
        Bracket::Upper => Direction::Down,
    };
    let run = iterate(
        |y, out| {
            for (i, o) in out.iter_mut().enumerate() {
                let z = ratio * dot(a.row(i), y);
                *o = z / (1.0 + z);
            }
        },
        y0,
        tol,
        max_iter,
        dir,
        slack,
    )?;

    let delta = beta * triple.lambda_max / gamma - 1.0;
    let mut warnings = Vec::new();
    if delta < NEAR_THRESHOLD_DELTA {
        warnings.push(format!(
            "near threshold (beta*lambda/gamma - 1 = {delta:e}); convergence is slow"
        ));
    }
    Ok(EndemicResult {
        x_star: run.y,
        iterations: run.iterations,
        residual: run.residual,
        bracket,
        monotone: run.monotone,
        warnings,
    })
}

fn classify_custom_start(y: &[f64], u: &[f64], bound: f64) -> Result<Bracket> {
    // 1^T u = 1, so the multiple is the entry sum of y.
    let c: f64 = y.iter().sum();
    if !(c > 0.0) {
        return Err(Error::invalid("custom start must be a positive multiple of u_max"));
    }
    let off = y
        .iter()
        .zip(u)
        .fold(0.0f64, |m, (yi, ui)| m.max((yi - c * ui).abs()));
    if off > 1e-9 * c {
        return Err(Error::invalid(format!(
            "custom start is not a multiple of u_max (deviation {off:e})"
        )));
    }
    let hi = y.iter().cloned().fold(f64::MIN, f64::max);
    let lo = y.iter().cloned().fold(f64::MAX, f64::min);
    let slack = 1e-12 * bound;
    if hi <= bound + slack {
        Ok(Bracket::Lower)
    } else if lo >= bound - slack {
        Ok(Bracket::Upper)
    } else {
        Err(Error::invalid(format!(
            "custom start must have max <= {bound} or min >= {bound}"
        )))
    }
}

/// First-order expansion `delta * a * u_max` of the endemic state just
/// above threshold, with `delta = beta lambda / gamma - 1` and
/// `a = v^T u / (v^T diag(u) u)`.
pub fn sis_endemic_expansion_threshold(g: &Graph, beta: f64, gamma: f64) -> Result<Vec<f64>> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    g.ensure_strongly_connected()?;
    let triple = SpectralTriple::of_graph(g)?;
    let delta = beta * triple.lambda_max / gamma - 1.0;
    if delta < -CRITICAL_TOL {
        return Err(Error::BelowThreshold { r0: delta + 1.0 });
    }
    let delta = delta.max(0.0);
    let SpectralTriple { v_max: v, u_max: u, .. } = &triple;
    let weighted: f64 = v.iter().zip(u).map(|(vi, ui)| vi * ui * ui).sum();
    let a = dot(v, u) / weighted;
    Ok(u.iter().map(|ui| delta * a * ui).collect())
}

/// First-order expansion `1 - (gamma/beta) / d_i` of the endemic state for
/// small `gamma / beta`. `gamma = 0` gives the full-contagion limit.
pub fn sis_endemic_expansion_high_rate(g: &Graph, beta: f64, gamma: f64) -> Result<Vec<f64>> {
    check_rate("beta", beta)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::invalid(format!("gamma must be nonnegative, got {gamma}")));
    }
    let d = g.degree_vector();
    if d.iter().any(|&di| di <= 0.0) {
        return Err(Error::ReducibleMatrix);
    }
    let eps = gamma / beta;
    Ok(d.iter().map(|di| 1.0 - eps / di).collect())
}

fn check_sir_initial(g: &Graph, initial: &EpidemicState) -> Result<()> {
    for v in [&initial.s, &initial.x, &initial.r] {
        g.check_len(v)?;
    }
    let nonneg = |v: &[f64]| v.iter().all(|&e| e >= 0.0);
    if !(nonneg(&initial.s) && nonneg(&initial.x) && nonneg(&initial.r)) {
        return Err(Error::invalid("initial fractions must be nonnegative"));
    }
    if !initial.x.iter().any(|&e| e > 0.0) {
        return Err(Error::invalid("initial infected fractions must not all vanish"));
    }
    for i in 0..g.n() {
        let total = initial.s[i] + initial.x[i] + initial.r[i];
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "node {}: initial fractions sum to {total}, not 1",
                i + 1
            )));
        }
    }
    Ok(())
}

/// The map `H` as a closure writing `H(y)` into its second argument.
fn sir_map<'a>(
    g: &'a Graph,
    beta: f64,
    gamma: f64,
    initial: &'a EpidemicState,
) -> impl Fn(&[f64], &mut [f64]) + 'a {
    let ratio = beta / gamma;
    let a = g.adjacency();
    // A (r(0) - 1), the constant part of the exponent.
    let offset: Vec<f64> = {
        let shifted: Vec<f64> = initial.r.iter().map(|r| r - 1.0).collect();
        a.mul_vec(&shifted)
    };
    move |y, out| {
        for (i, o) in out.iter_mut().enumerate() {
            *o = initial.s[i] * (ratio * (dot(a.row(i), y) + offset[i])).exp();
        }
    }
}

fn sir_result(run: Run, start: SirStart) -> SirAsymptoticResult {
    let r_inf = run.y.iter().map(|s| 1.0 - s).collect();
    let mut warnings = Vec::new();
    if run.iterations > 10_000 {
        warnings.push(format!("slow convergence: {} iterations", run.iterations));
    }
    SirAsymptoticResult {
        s_inf: run.y,
        r_inf,
        iterations: run.iterations,
        residual: run.residual,
        start,
        monotone: run.monotone,
        warnings,
    }
}

/// Asymptotic state `(s_inf, 0, r_inf)` of the network SIR model started
/// from `initial`.
pub fn sir_asymptotic(
    g: &Graph,
    beta: f64,
    gamma: f64,
    initial: &EpidemicState,
    tol: f64,
    max_iter: usize,
    start: &SirStart,
) -> Result<SirAsymptoticResult> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    check_iteration_params(tol, max_iter)?;
    g.ensure_strongly_connected()?;
    check_sir_initial(g, initial)?;
    let ceiling: Vec<f64> = initial.r.iter().map(|r| 1.0 - r).collect();
    let (y0, dir) = match start {
        SirStart::Zero => (vec![0.0; g.n()], Direction::Up),
        SirStart::Upper => (ceiling, Direction::Down),
        SirStart::Custom(y) => {
            g.check_len(y)?;
            if y.iter().zip(&ceiling).any(|(yi, ci)| !(*yi >= 0.0 && *yi <= *ci)) {
                return Err(Error::invalid("custom start must lie in [0, 1 - r(0)]"));
            }
            (y.clone(), Direction::Free)
        }
    };
    let run = iterate(sir_map(g, beta, gamma, initial), y0, tol, max_iter, dir, MONOTONE_SLACK)?;
    Ok(sir_result(run, start.clone()))
}

/// Runs the sequences from `0` and from `1 - r(0)` side by side, checking
/// that they stay ordered at every step.
pub fn sir_asymptotic_bracketed(
    g: &Graph,
    beta: f64,
    gamma: f64,
    initial: &EpidemicState,
    tol: f64,
    max_iter: usize,
) -> Result<SirBracketReport> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    check_iteration_params(tol, max_iter)?;
    g.ensure_strongly_connected()?;
    check_sir_initial(g, initial)?;
    let map = sir_map(g, beta, gamma, initial);
    let n = g.n();

    let mut p = vec![0.0; n];
    let mut q: Vec<f64> = initial.r.iter().map(|r| 1.0 - r).collect();
    let (mut p_next, mut q_next) = (vec![0.0; n], vec![0.0; n]);
    let mut ordered = true;
    let (mut p_mono, mut q_mono) = (true, true);
    let (mut p_stop, mut q_stop) = (Stopper::new(tol), Stopper::new(tol));
    let (mut p_done, mut q_done) = (false, false);
    let mut steps = None;

    // The fixed point lies between p and q, so a gap within tol settles both
    // sides at once.
    for k in 1..=max_iter {
        if !p_done {
            map(&p, &mut p_next);
            p_mono &= moved_as_promised(&p, &p_next, Direction::Up, MONOTONE_SLACK);
            let step = sup_dist(&p, &p_next);
            std::mem::swap(&mut p, &mut p_next);
            p_done = p_stop.done(step, &p);
        }
        if !q_done {
            map(&q, &mut q_next);
            q_mono &= moved_as_promised(&q, &q_next, Direction::Down, MONOTONE_SLACK);
            let step = sup_dist(&q, &q_next);
            std::mem::swap(&mut q, &mut q_next);
            q_done = q_stop.done(step, &q);
        }
        ordered &= p
            .iter()
            .zip(&q)
            .all(|(a, b)| *a <= *b + MONOTONE_SLACK * b.abs());
        if sup_dist(&p, &q) <= tol || (p_done && q_done) {
            steps = Some(k);
            break;
        }
    }
    let Some(k) = steps else {
        return Err(Error::NonConvergence {
            what: "bracketed fixed-point iteration",
            iterations: max_iter,
        });
    };

    // Polish each side to a residual within tol with the single-sequence
    // driver; monotonicity carries over.
    let lower = iterate(&map, p, tol, max_iter, Direction::Up, MONOTONE_SLACK)?;
    let upper = iterate(&map, q, tol, max_iter, Direction::Down, MONOTONE_SLACK)?;
    let gap = sup_dist(&lower.y, &upper.y);
    let lower = Run {
        iterations: k + lower.iterations,
        monotone: p_mono && lower.monotone,
        ..lower
    };
    let upper = Run {
        iterations: k + upper.iterations,
        monotone: q_mono && upper.monotone,
        ..upper
    };
    Ok(SirBracketReport {
        lower: sir_result(lower, SirStart::Zero),
        upper: sir_result(upper, SirStart::Upper),
        ordered,
        gap,
    })
}
