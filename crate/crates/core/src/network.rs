//! Network SI, SIS and SIR dynamics.
//!
//! With `s`, `x`, `r` the per-node susceptible, infected and recovered
//! fractions, all three models share the infection flow
//! `beta * diag(s) A x`. Recovery at rate `gamma` returns infected nodes to
//! `s` (SIS), moves them to `r` (SIR), or is absent (SI).
//!
//! Integration is classic fixed-step RK4 over all three compartments. Both
//! `s` and `x` are integrated directly rather than reconstructing one from
//! the other, so small susceptible fractions late in an SI run keep full
//! relative precision.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{dot, sup_norm, Matrix};
use crate::scalar::check_rate;
use crate::spectral::{projection_coefficient, SpectralTriple};

/// Excursions outside `[0, 1]` below this size are clamped as rounding
/// noise; larger ones abort the integration.
pub const CLAMP_TOL: f64 = 1e-9;

/// Default derivative-norm threshold for open-ended runs.
pub const STEADY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "SI")]
    Si,
    #[serde(rename = "SIS")]
    Sis,
    #[serde(rename = "SIR")]
    Sir,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Si => "SI",
            ModelKind::Sis => "SIS",
            ModelKind::Sir => "SIR",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SI" => Ok(ModelKind::Si),
            "SIS" => Ok(ModelKind::Sis),
            "SIR" => Ok(ModelKind::Sir),
            _ => Err(Error::invalid(format!("unknown model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kind: ModelKind,
    pub beta: f64,
    /// `None` for SI.
    pub gamma: Option<f64>,
}

impl ModelParams {
    pub fn new(kind: ModelKind, beta: f64, gamma: Option<f64>) -> Result<Self> {
        check_rate("beta", beta)?;
        let gamma = match (kind, gamma) {
            (ModelKind::Si, _) => None,
            (_, Some(g)) => {
                check_rate("gamma", g)?;
                Some(g)
            }
            (_, None) => {
                return Err(Error::invalid(format!("{kind} model needs a recovery rate")))
            }
        };
        Ok(Self { kind, beta, gamma })
    }

    pub fn si(beta: f64) -> Result<Self> {
        Self::new(ModelKind::Si, beta, None)
    }

    pub fn sis(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(ModelKind::Sis, beta, Some(gamma))
    }

    pub fn sir(beta: f64, gamma: f64) -> Result<Self> {
        Self::new(ModelKind::Sir, beta, Some(gamma))
    }

    /// Recovery rate, zero for SI.
    pub fn recovery(&self) -> f64 {
        self.gamma.unwrap_or(0.0)
    }

    /// `1e-3 * min(1/beta, 1/gamma)`.
    pub fn default_dt(&self) -> f64 {
        1e-3 / self.beta.max(self.recovery())
    }
}

/// Per-node compartment fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicState {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

impl EpidemicState {
    /// SI/SIS state with `s = 1 - x` and no recovered.
    pub fn from_infected(x: Vec<f64>) -> Self {
        let s = x.iter().map(|v| 1.0 - v).collect();
        let r = vec![0.0; x.len()];
        Self { s, x, r }
    }

    pub fn sir(s: Vec<f64>, x: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if x.len() != s.len() || r.len() != s.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                got: if x.len() != s.len() { x.len() } else { r.len() },
            });
        }
        Ok(Self { s, x, r })
    }

    /// Node `seed` (0-based) fully infected, everyone else susceptible.
    pub fn single_seed(n: usize, seed: usize) -> Result<Self> {
        if seed >= n {
            return Err(Error::invalid(format!("seed node {} outside 1..={n}", seed + 1)));
        }
        let mut x = vec![0.0; n];
        x[seed] = 1.0;
        Ok(Self::from_infected(x))
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn mean_infected(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.n() as f64
    }

    /// Checks the box and simplex invariants for `kind` up to `tol`.
    pub fn validate(&self, kind: ModelKind, tol: f64) -> Result<()> {
        let n = self.n();
        for v in [&self.x, &self.r] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        for i in 0..n {
            let (s, x, r) = (self.s[i], self.x[i], self.r[i]);
            for v in [s, x, r] {
                if !(v >= -tol && v <= 1.0 + tol) {
                    return Err(Error::invalid(format!(
                        "node {}: fraction {v} outside [0, 1]",
                        i + 1
                    )));
                }
            }
            if kind != ModelKind::Sir && r.abs() > tol {
                return Err(Error::invalid(format!(
                    "node {}: {kind} state has recovered fraction {r}",
                    i + 1
                )));
            }
            if (s + x + r - 1.0).abs() > tol {
                return Err(Error::invalid(format!(
                    "node {}: fractions sum to {}, not 1",
                    i + 1,
                    s + x + r
                )));
            }
        }
        Ok(())
    }
}

/// Time derivative of each compartment.
#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

impl Derivative {
    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.s).max(sup_norm(&self.x)).max(sup_norm(&self.r))
    }
}

/// Right-hand side of the network model selected by `params.kind`.
pub fn rhs(g: &Graph, params: &ModelParams, state: &EpidemicState) -> Result<Derivative> {
    let n = g.n();
    for v in [&state.s, &state.x, &state.r] {
        g.check_len(v)?;
    }
    let mut y = Vec::with_capacity(3 * n);
    y.extend_from_slice(&state.s);
    y.extend_from_slice(&state.x);
    y.extend_from_slice(&state.r);
    let mut dy = vec![0.0; 3 * n];
    let mut ax = vec![0.0; n];
    field(g.adjacency(), params, &y, &mut dy, &mut ax);
    Ok(Derivative {
        s: dy[..n].to_vec(),
        x: dy[n..2 * n].to_vec(),
        r: dy[2 * n..].to_vec(),
    })
}

/// Vector field on the stacked state `[s; x; r]`.
fn field(a: &Matrix, params: &ModelParams, y: &[f64], dy: &mut [f64], ax: &mut [f64]) {
    let n = a.dim();
    let (s, rest) = y.split_at(n);
    let x = &rest[..n];
    a.mul_vec_into(x, ax);
    let beta = params.beta;
    let gamma = params.recovery();
    let (ds, rest) = dy.split_at_mut(n);
    let (dx, dr) = rest.split_at_mut(n);
    for i in 0..n {
        let infection = beta * s[i] * ax[i];
        let recovery = gamma * x[i];
        dx[i] = infection - recovery;
        match params.kind {
            ModelKind::Si => {
                ds[i] = -infection;
                dr[i] = 0.0;
            }
            ModelKind::Sis => {
                ds[i] = recovery - infection;
                dr[i] = 0.0;
            }
            ModelKind::Sir => {
                ds[i] = -infection;
                dr[i] = recovery;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationOptions {
    pub t_end: f64,
    /// Defaults to [`ModelParams::default_dt`].
    pub dt: Option<f64>,
    /// Record every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    /// Stop early once `||rhs||_inf` falls below this value.
    pub steady_tol: Option<f64>,
}

impl IntegrationOptions {
    pub fn until(t_end: f64) -> Self {
        Self {
            t_end,
            dt: None,
            record_every: 1,
            steady_tol: None,
        }
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn record_every(mut self, stride: usize) -> Self {
        self.record_every = stride;
        self
    }

    /// Stops at `||rhs||_inf < tol` or `t_end`, whichever comes first.
    pub fn until_steady(mut self, tol: f64) -> Self {
        self.steady_tol = Some(tol);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EpidemicState>,
    pub params: ModelParams,
    pub step_size: f64,
    /// True when the run stopped on the derivative-norm criterion.
    pub reached_steady_state: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &EpidemicState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory always holds the initial state")
    }

    pub fn n(&self) -> usize {
        self.states.first().map_or(0, EpidemicState::n)
    }

    /// Writes `t,s_1..s_n,x_1..x_n,r_1..r_n` rows using shortest round-trip
    /// float formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.n();
        let mut header = String::from("t");
        for prefix in ["s", "x", "r"] {
            for i in 1..=n {
                header.push_str(&format!(",{prefix}_{i}"));
            }
        }
        writeln!(w, "{header}")?;
        let mut line = String::new();
        for (t, st) in self.times.iter().zip(&self.states) {
            line.clear();
            line.push_str(&t.to_string());
            for v in st.s.iter().chain(&st.x).chain(&st.r) {
                line.push(',');
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parses the CSV written by [`Trajectory::write_csv`]. The model
    /// parameters are not part of the file and must be supplied.
    pub fn from_csv(text: &str, params: ModelParams) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.first() != Some(&"t") || cols.len() < 4 || !(cols.len() - 1).is_multiple_of(3) {
            return Err(Error::MalformedLine {
                line: 1,
                reason: "expected header t,s_1..s_n,x_1..x_n,r_1..r_n".into(),
            });
        }
        let n = (cols.len() - 1) / 3;
        let mut times = Vec::new();
        let mut states = Vec::new();
        for (idx, line) in lines {
            let values: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|v| v.trim().parse::<f64>()).collect();
            let values = values.map_err(|e| Error::MalformedLine {
                line: idx + 1,
                reason: e.to_string(),
            })?;
            if values.len() != cols.len() {
                return Err(Error::MalformedLine {
                    line: idx + 1,
                    reason: format!("expected {} columns, found {}", cols.len(), values.len()),
                });
            }
            if let Some(&prev) = times.last() {
                if values[0] <= prev {
                    return Err(Error::MalformedLine {
                        line: idx + 1,
                        reason: "times must be strictly increasing".into(),
                    });
                }
            }
            times.push(values[0]);
            states.push(EpidemicState {
                s: values[1..=n].to_vec(),
                x: values[n + 1..=2 * n].to_vec(),
                r: values[2 * n + 1..].to_vec(),
            });
        }
        if times.is_empty() {
            return Err(Error::EmptyInput);
        }
        let step_size = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Self {
            times,
            states,
            params,
            step_size,
            reached_steady_state: false,
        })
    }
}

/// Integrates to `t_end` with step `dt`, recording every step.
pub fn integrate(
    g: &Graph,
    params: &ModelParams,
    initial: &EpidemicState,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_with(g, params, initial, &IntegrationOptions::until(t_end).dt(dt))
}

pub fn integrate_with(
    g: &Graph,
    params: &ModelParams,
    initial: &EpidemicState,
    opts: &IntegrationOptions,
) -> Result<Trajectory> {
    let n = g.n();
    for v in [&initial.s, &initial.x, &initial.r] {
        g.check_len(v)?;
    }
    initial.validate(params.kind, CLAMP_TOL)?;
    let dt = opts.dt.unwrap_or_else(|| params.default_dt());
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {dt}")));
    }
    if !(opts.t_end.is_finite() && opts.t_end >= dt) {
        return Err(Error::invalid(format!(
            "t_end = {} must be at least the step size {dt}",
            opts.t_end
        )));
    }
    let stride = opts.record_every.max(1);
    let a = g.adjacency();

    let mut y = Vec::with_capacity(3 * n);
    y.extend_from_slice(&initial.s);
    y.extend_from_slice(&initial.x);
    y.extend_from_slice(&initial.r);

    let mut k1 = vec![0.0; 3 * n];
    let mut k2 = vec![0.0; 3 * n];
    let mut k3 = vec![0.0; 3 * n];
    let mut k4 = vec![0.0; 3 * n];
    let mut tmp = vec![0.0; 3 * n];
    let mut ax = vec![0.0; n];

    let steps = ((opts.t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let mut times = vec![0.0];
    let mut states = vec![unstack(&y, n)];
    let mut reached_steady_state = false;
    let mut t = 0.0;

    for step in 0..steps {
        field(a, params, &y, &mut k1, &mut ax);
        if let Some(tol) = opts.steady_tol {
            if sup_norm(&k1) < tol {
                reached_steady_state = true;
                break;
            }
        }
        let t_next = if step + 1 == steps {
            opts.t_end
        } else {
            (step + 1) as f64 * dt
        };
        let h = t_next - t;

        axpy(&y, 0.5 * h, &k1, &mut tmp);
        field(a, params, &tmp, &mut k2, &mut ax);
        axpy(&y, 0.5 * h, &k2, &mut tmp);
        field(a, params, &tmp, &mut k3, &mut ax);
        axpy(&y, h, &k3, &mut tmp);
        field(a, params, &tmp, &mut k4, &mut ax);
        for i in 0..3 * n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t = t_next;
        enforce_box(&mut y, t)?;

        if (step + 1) % stride == 0 {
            times.push(t);
            states.push(unstack(&y, n));
        }
    }
    if *times.last().unwrap() < t {
        times.push(t);
        states.push(unstack(&y, n));
    }

    Ok(Trajectory {
        times,
        states,
        params: *params,
        step_size: dt,
        reached_steady_state,
    })
}

fn axpy(y: &[f64], h: f64, k: &[f64], out: &mut [f64]) {
    for ((o, yi), ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + h * ki;
    }
}

fn unstack(y: &[f64], n: usize) -> EpidemicState {
    EpidemicState {
        s: y[..n].to_vec(),
        x: y[n..2 * n].to_vec(),
        r: y[2 * n..].to_vec(),
    }
}

fn enforce_box(y: &mut [f64], t: f64) -> Result<()> {
    let mut worst = 0.0f64;
    for v in y.iter_mut() {
        if v.is_nan() {
            return Err(Error::NotANumber { t });
        }
        let excursion = if *v < 0.0 {
            -*v
        } else if *v > 1.0 {
            *v - 1.0
        } else {
            continue;
        };
        worst = worst.max(excursion);
        *v = v.clamp(0.0, 1.0);
    }
    if worst >= CLAMP_TOL {
        return Err(Error::InvariantViolation { t, excursion: worst });
    }
    Ok(())
}

/// Linearized early-time solution around the disease-free state:
/// `exp((beta lambda - gamma) t) (v^T x0 / v^T u) u`, with `gamma = 0` for SI
/// and `(lambda, u, v)` the Perron eigen-data of `A`.
pub fn initial_growth_approx(
    g: &Graph,
    params: &ModelParams,
    x0: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    g.check_len(x0)?;
    g.ensure_strongly_connected()?;
    let triple = SpectralTriple::of_graph(g)?;
    let rate = params.beta * triple.lambda_max - params.recovery();
    let coef = (rate * t).exp() * projection_coefficient(&triple, x0);
    Ok(triple.u_max.iter().map(|u| coef * u).collect())
}

/// Least-squares slope of `ln s_i(t)` over the samples with `t` in
/// `[start, end]`, per node. Late in an SI run these approach `-beta d_i`.
pub fn late_time_decay_rates(traj: &Trajectory, window: (f64, f64)) -> Result<Vec<f64>> {
    let (start, end) = window;
    if traj.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(start < end && start >= traj.times[0] && end <= traj.final_time()) {
        return Err(Error::invalid(format!(
            "window [{start}, {end}] is not inside the trajectory span [{}, {}]",
            traj.times[0],
            traj.final_time()
        )));
    }
    if let Some(x) = traj.final_state().x.iter().find(|&&x| x <= 1.0 - 1e-2) {
        return Err(Error::invalid(format!(
            "trajectory has not approached full contagion (final infected fraction {x})"
        )));
    }
    let samples: Vec<usize> = (0..traj.len())
        .filter(|&k| traj.times[k] >= start && traj.times[k] <= end)
        .collect();
    if samples.len() < 2 {
        return Err(Error::invalid("window holds fewer than two samples"));
    }
    let ts: Vec<f64> = samples.iter().map(|&k| traj.times[k]).collect();
    let t_mean = ts.iter().sum::<f64>() / ts.len() as f64;
    let sxx: f64 = ts.iter().map(|t| (t - t_mean).powi(2)).sum();

    (0..traj.n())
        .map(|i| {
            let mut logs = Vec::with_capacity(samples.len());
            for &k in &samples {
                let s = traj.states[k].s[i];
                if s <= 0.0 {
                    return Err(Error::invalid(format!(
                        "node {} has zero susceptible fraction at t = {}",
                        i + 1,
                        traj.times[k]
                    )));
                }
                logs.push(s.ln());
            }
            let l_mean = logs.iter().sum::<f64>() / logs.len() as f64;
            let sxy: f64 = ts.iter().zip(&logs).map(|(t, l)| (t - t_mean) * (l - l_mean)).sum();
            Ok(sxy / sxx)
        })
        .collect()
}

/// `V_i = s_i exp((beta/gamma) sum_j a_ij r_j)`, constant along network SIR
/// trajectories.
pub fn sir_conserved_quantities(
    g: &Graph,
    params: &ModelParams,
    state: &EpidemicState,
) -> Result<Vec<f64>> {
    let gamma = params
        .gamma
        .ok_or_else(|| Error::invalid("conserved quantities need a recovery rate"))?;
    g.check_len(&state.s)?;
    g.check_len(&state.r)?;
    let ratio = params.beta / gamma;
    Ok((0..g.n())
        .map(|i| state.s[i] * (ratio * dot(g.adjacency().row(i), &state.r)).exp())
        .collect())
}
