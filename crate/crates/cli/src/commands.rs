use std::fmt::Write as _;

use log::{info, warn};
use netepi::{
    equilibria, first_crossing, effective_r_series, integrate_with, reproduction_number, si_closed_form,
    sir_asymptotic, sir_rinf, sir_xmax, sis_closed_form, sis_endemic, Bracket, EndemicStart, Error,
    IntegrationOptions, ModelKind, ModelParams, SirStart, Trajectory,
};
use rayon::prelude::*;
use serde_json::json;

use crate::args::{required, Format, RunArgs};
use crate::error::CliError;
use crate::input::{initial_state, load_graph};

type Output = Result<String, CliError>;

fn to_json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize to JSON");
    s.push('\n');
    s
}

fn model_params(args: &RunArgs) -> Result<ModelParams, CliError> {
    let kind = required(&args.model, "model")?;
    let beta = required(&args.beta, "beta")?;
    let gamma = match kind {
        ModelKind::Si => None,
        _ => Some(required(&args.gamma, "gamma")?),
    };
    Ok(ModelParams::new(kind, beta, gamma)?)
}

fn integration_options(args: &RunArgs) -> Result<IntegrationOptions, CliError> {
    let mut opts = IntegrationOptions::until(required(&args.t_end, "t-end")?);
    if let Some(dt) = args.dt {
        opts = opts.dt(dt);
    }
    if let Some(k) = args.stride {
        if k == 0 {
            return Err(CliError::config("--stride must be at least 1"));
        }
        opts = opts.record_every(k);
    }
    if let Some(tol) = args.steady_tol {
        opts = opts.until_steady(tol);
    }
    Ok(opts)
}

fn trajectory_json(traj: &Trajectory) -> String {
    to_json(&json!({
        "params": traj.params,
        "step_size": traj.step_size,
        "reached_steady_state": traj.reached_steady_state,
        "times": traj.times,
        "states": traj.states,
    }))
}

pub fn simulate(args: &RunArgs, format: Format) -> Output {
    let g = load_graph(&required(&args.graph, "graph")?)?;
    let params = model_params(args)?;
    let init = initial_state(args, g.n(), params.kind)?;
    let traj = integrate_with(&g, &params, &init, &integration_options(args)?)?;
    info!("{} samples up to t = {}", traj.len(), traj.final_time());
    Ok(match format {
        Format::Csv => traj.to_csv(),
        Format::Json => trajectory_json(&traj),
    })
}

fn tol(args: &RunArgs) -> f64 {
    args.tol.unwrap_or(equilibria::DEFAULT_TOL)
}

fn max_iter(args: &RunArgs) -> usize {
    args.max_iter.unwrap_or(equilibria::DEFAULT_MAX_ITER)
}

pub fn endemic(args: &RunArgs, format: Format) -> Output {
    let g = load_graph(&required(&args.graph, "graph")?)?;
    let beta = required(&args.beta, "beta")?;
    let gamma = required(&args.gamma, "gamma")?;
    let bracket: Bracket = args.bracket.map_or(Bracket::Lower, Into::into);
    let res = sis_endemic(&g, beta, gamma, tol(args), max_iter(args), &EndemicStart::from(bracket))?;
    for w in &res.warnings {
        warn!("{w}");
    }
    info!("converged in {} iterations, residual {:e}", res.iterations, res.residual);
    Ok(match format {
        Format::Json => to_json(&res),
        Format::Csv => {
            let mut out = String::from("node,x\n");
            for (i, x) in res.x_star.iter().enumerate() {
                writeln!(out, "{},{x}", i + 1).unwrap();
            }
            out
        }
    })
}

pub fn asymptotic(args: &RunArgs, format: Format) -> Output {
    let g = load_graph(&required(&args.graph, "graph")?)?;
    let beta = required(&args.beta, "beta")?;
    let gamma = required(&args.gamma, "gamma")?;
    let init = initial_state(args, g.n(), ModelKind::Sir)?;
    let start: SirStart = args.start.map_or(SirStart::Zero, Into::into);
    let res = sir_asymptotic(&g, beta, gamma, &init, tol(args), max_iter(args), &start)?;
    for w in &res.warnings {
        warn!("{w}");
    }
    info!("converged in {} iterations, residual {:e}", res.iterations, res.residual);
    Ok(match format {
        Format::Json => to_json(&res),
        Format::Csv => {
            let mut out = String::from("node,s,r\n");
            for (i, (s, r)) in res.s_inf.iter().zip(&res.r_inf).enumerate() {
                writeln!(out, "{},{s},{r}", i + 1).unwrap();
            }
            out
        }
    })
}

pub fn threshold(args: &RunArgs, format: Format) -> Output {
    if args.gamma_sweep.is_some() {
        return gamma_sweep(args, format);
    }
    let g = load_graph(&required(&args.graph, "graph")?)?;
    let beta = required(&args.beta, "beta")?;
    let gamma = required(&args.gamma, "gamma")?;
    let mut report = reproduction_number(&g, beta, gamma)?;
    if let Some(path) = &args.trajectory {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let traj = Trajectory::from_csv(&text, ModelParams::sir(beta, gamma)?)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let series = effective_r_series(&traj, &g, beta, gamma)?;
        report.crossing_time = first_crossing(&series);
        match &args.series_out {
            Some(out) => {
                let mut csv = String::from("t,R\n");
                for (t, r) in &series {
                    writeln!(csv, "{t},{r}").unwrap();
                }
                std::fs::write(out, csv).map_err(CliError::io)?;
            }
            None => info!("R(t) series computed; pass --series-out to save it"),
        }
    } else if args.series_out.is_some() {
        return Err(CliError::config("--series-out needs --trajectory"));
    }
    Ok(match format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "r0,classification,lambda_max,crossing_time\n{},{},{},{}\n",
            report.r0,
            to_json(&report.classification).trim().trim_matches('"'),
            report.lambda_max,
            report.crossing_time.map_or(String::new(), |t| t.to_string()),
        ),
    })
}

/// One SIR run per recovery rate, reporting `R0` and the crossing time.
fn gamma_sweep(args: &RunArgs, format: Format) -> Output {
    let g = load_graph(&required(&args.graph, "graph")?)?;
    let beta = required(&args.beta, "beta")?;
    let gammas = required(&args.gamma_sweep, "gamma-sweep")?;
    let init = initial_state(args, g.n(), ModelKind::Sir)?;
    let opts = integration_options(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(1).max(1))
        .build()
        .map_err(|e| CliError::config(e.to_string()))?;
    let reports = pool.install(|| {
        gammas
            .par_iter()
            .map(|&gamma| -> Result<_, Error> {
                let mut report = reproduction_number(&g, beta, gamma)?;
                let traj = integrate_with(&g, &ModelParams::sir(beta, gamma)?, &init, &opts)?;
                report.crossing_time = first_crossing(&effective_r_series(&traj, &g, beta, gamma)?);
                Ok(report)
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(match format {
        Format::Json => to_json(&gammas.iter().zip(&reports).map(|(gamma, r)| json!({"gamma": gamma, "report": r})).collect::<Vec<_>>()),
        Format::Csv => {
            let mut out = String::from("gamma,r0,crossing_time\n");
            for (gamma, r) in gammas.iter().zip(&reports) {
                let tau = r.crossing_time.map_or(String::new(), |t| t.to_string());
                writeln!(out, "{gamma},{},{tau}", r.r0).unwrap();
            }
            out
        }
    })
}

pub fn scalar(args: &RunArgs, format: Format) -> Output {
    let params = model_params(args)?;
    if params.kind == ModelKind::Sir {
        return scalar_sir(args, params, format);
    }
    let x0 = required(&args.x0, "x0")?;
    let t_end = required(&args.t_end, "t-end")?;
    let dt = args.dt.unwrap_or(0.1);
    if !(t_end > 0.0 && dt > 0.0 && t_end.is_finite()) {
        return Err(CliError::config("--t-end and --dt must be positive"));
    }
    let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil() as usize;
    let mut rows = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = (k as f64 * dt).min(t_end);
        let x = match params.gamma {
            None => si_closed_form(x0, params.beta, t)?,
            Some(gamma) => sis_closed_form(x0, params.beta, gamma, t)?,
        };
        rows.push((t, x));
    }
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("t,x\n");
            for (t, x) in &rows {
                writeln!(out, "{t},{x}").unwrap();
            }
            out
        }
        Format::Json => {
            let (t, x): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
            to_json(&json!({"t": t, "x": x}))
        }
    })
}

fn scalar_sir(args: &RunArgs, params: ModelParams, format: Format) -> Output {
    let s0 = required(&args.s0, "s0")?;
    let r0 = args.r0.unwrap_or(0.0);
    let x0 = args.x0.unwrap_or(1.0 - s0 - r0);
    let (beta, gamma) = (params.beta, params.recovery());
    let r_inf = sir_rinf(s0, r0, beta, gamma)?;
    // Below threshold the infected fraction only falls, so the peak is x0.
    let x_max = match sir_xmax(s0, x0, beta, gamma) {
        Ok(v) => v,
        Err(Error::BelowThreshold { .. }) => x0,
        Err(e) => return Err(e.into()),
    };
    let rows = [("reproduction_number", beta * s0 / gamma), ("r_inf", r_inf), ("s_inf", 1.0 - r_inf), ("x_max", x_max)];
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("quantity,value\n");
            for (name, v) in rows {
                writeln!(out, "{name},{v}").unwrap();
            }
            out
        }
        Format::Json => to_json(&rows.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>()),
    })
}
