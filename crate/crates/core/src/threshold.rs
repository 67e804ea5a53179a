//! Reproduction numbers and threshold crossings.

use serde::{Deserialize, Serialize};

use crate::equilibria::CRITICAL_TOL;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::network::{ModelKind, Trajectory};
use crate::scalar::check_rate;
use crate::spectral::{dominant_right, effective_matrix, SpectralTriple, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Below,
    Critical,
    Above,
}

impl Classification {
    pub fn of(r0: f64) -> Self {
        if (r0 - 1.0).abs() <= CRITICAL_TOL {
            Classification::Critical
        } else if r0 < 1.0 {
            Classification::Below
        } else {
            Classification::Above
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub r0: f64,
    pub classification: Classification,
    pub lambda_max: f64,
    /// First time the effective reproduction number drops below one (SIR).
    pub crossing_time: Option<f64>,
}

/// `R0 = beta lambda_max(A) / gamma` and its classification.
pub fn reproduction_number(g: &Graph, beta: f64, gamma: f64) -> Result<ThresholdReport> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    g.ensure_strongly_connected()?;
    let lambda_max = SpectralTriple::of_graph(g)?.lambda_max;
    let r0 = beta * lambda_max / gamma;
    Ok(ThresholdReport {
        r0,
        classification: Classification::of(r0),
        lambda_max,
        crossing_time: None,
    })
}

fn check_sir(traj: &Trajectory, g: &Graph) -> Result<()> {
    if traj.params.kind != ModelKind::Sir {
        return Err(Error::invalid(format!(
            "expected an SIR trajectory, got {}",
            traj.params.kind
        )));
    }
    if traj.is_empty() {
        return Err(Error::EmptyInput);
    }
    g.check_len(&traj.states[0].s)
}

/// `(t, beta lambda_max(diag(s(t)) A) / gamma)` at every recorded time. Each
/// eigenvalue solve is warm-started from the previous sample's eigenvector.
pub fn effective_r_series(
    traj: &Trajectory,
    g: &Graph,
    beta: f64,
    gamma: f64,
) -> Result<Vec<(f64, f64)>> {
    check_rate("beta", beta)?;
    check_rate("gamma", gamma)?;
    check_sir(traj, g)?;
    let mut warm: Option<Vec<f64>> = None;
    let mut series = Vec::with_capacity(traj.len());
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let m = effective_matrix(&state.s, g)?;
        let (lambda, u) = dominant_right(&m, warm.as_deref(), DEFAULT_TOL, DEFAULT_MAX_ITER)?;
        series.push((*t, beta * lambda / gamma));
        warm = Some(u);
    }
    Ok(series)
}

/// First time `beta lambda_max(t) < gamma`, linearly interpolated between
/// the two samples that bracket the crossing. `None` when the whole
/// trajectory stays at or above threshold.
pub fn time_to_subthreshold(
    traj: &Trajectory,
    g: &Graph,
    beta: f64,
    gamma: f64,
) -> Result<Option<f64>> {
    let series = effective_r_series(traj, g, beta, gamma)?;
    Ok(first_crossing(&series))
}

/// First crossing below one in a `(t, R)` series, as in
/// [`time_to_subthreshold`].
pub fn first_crossing(series: &[(f64, f64)]) -> Option<f64> {
    let k = series.iter().position(|&(_, r)| r < 1.0)?;
    if k == 0 {
        return Some(series[0].0);
    }
    let (t0, r0) = series[k - 1];
    let (t1, r1) = series[k];
    if r0 == r1 {
        return Some(t1);
    }
    Some(t0 + (r0 - 1.0) / (r0 - r1) * (t1 - t0))
}
