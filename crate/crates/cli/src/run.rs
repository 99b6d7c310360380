//! Subcommand execution: engine dispatch, parallel evaluation and artifact writing.

use std::fs;
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use spinbath::compiler::{compile, verify, GateSequence};
use spinbath::echo::{echo_central_spin, DeterminantEcho, Method, DETERMINANT_EXPONENT};
use spinbath::ed::{echo_ed, echo_trotter, DENSE_CAP};
use spinbath::entanglement::{alpha_vs_concurrence, ChainParam};
use spinbath::freefermion::diagonalize;
use spinbath::model::{build_quadratic_form_with, Boundary, PeriodicConvention};
use spinbath::perturbation::{
    alpha_perturbative_for, fit_alpha, fit_critical_scaling, fit_envelope, fit_log_divergence_excluding,
    fit_plateau, linear_fit, plateau_perturbative, r_squared,
};
use spinbath::studies::{echo_minimum, stroboscopic_times};
use spinbath::{Chain, Coupling, Series};

use crate::config::{Point, RunConfig, SweepParam, SCHEMA_VERSION};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Echo,
    Sweep,
    AlphaScan,
    PlateauScan,
    CriticalScaling,
    ConcurrenceScan,
    EnvelopeFit,
    Compile,
    Verify,
}

/// A file written by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<f64>,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: Task,
    pub method: Method,
    /// Power of `|det|` used by the determinant engine.
    pub determinant_exponent: u32,
    pub library_version: String,
    pub cli_version: String,
    pub threads: usize,
    pub wall_time_s: f64,
    pub config: RunConfig,
    pub artifacts: Vec<Artifact>,
    pub summary: Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Rounds to 15 significant digits, then prints the shortest string that reads back to that value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.14e}").parse().unwrap_or(x);
    let mag = rounded.abs();
    if rounded == 0.0 || (1e-5..1e16).contains(&mag) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rejects method/model pairings no engine can evaluate, naming the alternative.
pub fn dispatch(method: Method, chain: &Chain, coupling: &Coupling) -> Result<()> {
    let interacting = !chain.is_free_fermion();
    match method {
        Method::Determinant if interacting => Err(CliError::Dispatch(format!(
            "method=determinant needs delta = 0 (got delta = {}); use method=ed for interacting chains with N <= {DENSE_CAP}",
            chain.delta
        ))),
        Method::CentralSpin => {
            if interacting {
                return Err(CliError::Dispatch(format!(
                    "method=central_spin needs delta = 0 (got delta = {}); use method=ed",
                    chain.delta
                )));
            }
            let linked = coupling.resolve_sites(chain).map(|s| s.len()).unwrap_or(0);
            if linked != chain.n || chain.boundary != Boundary::Periodic || !chain.n.is_multiple_of(2) {
                return Err(CliError::Dispatch(
                    "method=central_spin needs a periodic chain of even N with every site linked; use method=determinant"
                        .into(),
                ));
            }
            Ok(())
        }
        Method::EdExact | Method::EdTrotter if chain.n > DENSE_CAP => {
            let hint = if interacting {
                "no engine handles interacting chains beyond this size".to_string()
            } else {
                "use method=determinant".to_string()
            };
            Err(CliError::Dispatch(format!(
                "method={} is limited to N <= {DENSE_CAP} (got N = {}); {hint}",
                method.tag(),
                chain.n
            )))
        }
        _ => Ok(()),
    }
}

/// Echo of one point with the configured engine; the determinant is evaluated in parallel over time.
pub fn echo_point(config: &RunConfig, point: &Point, times: &[f64]) -> Result<Series> {
    let (chain, coupling) = (&point.chain, &point.coupling);
    dispatch(config.method, chain, coupling)?;
    let series = match config.method {
        Method::Determinant => {
            let engine = DeterminantEcho::new(chain, coupling, config.convention)?;
            let values: Vec<f64> = times.par_iter().map(|&t| engine.value(t)).collect();
            if values.iter().any(|v| !v.is_finite()) {
                return Err(spinbath::Error::NumericalFailure("non-finite determinant".into()).into());
            }
            Series { times: times.to_vec(), values, method: Method::Determinant, chain: *chain, coupling: coupling.clone() }
        }
        Method::CentralSpin => echo_central_spin(chain, coupling.epsilon, times)?,
        Method::EdExact => echo_ed(chain, coupling, times, config.sector_for(chain))?,
        Method::EdTrotter => echo_trotter(chain, coupling, times, config.sector_for(chain), config.analysis.dt)?,
    };
    Ok(series)
}

fn sweep_label(config: &RunConfig) -> &'static str {
    config.sweep.as_ref().map(|s| s.param.label()).unwrap_or("param")
}

fn require_sweep(config: &RunConfig, allowed: &[SweepParam], task: &str) -> Result<SweepParam> {
    let names: Vec<&str> = allowed.iter().map(|p| p.label()).collect();
    match &config.sweep {
        Some(s) if allowed.contains(&s.param) => Ok(s.param),
        Some(_) => Err(CliError::config("/sweep/param", format!("{task} sweeps one of: {}", names.join(", ")))),
        None => Err(CliError::config("/sweep", format!("{task} needs a sweep over one of: {}", names.join(", ")))),
    }
}

/// Runs `task` for `config`, writing CSV tables and `manifest.json` into `out`.
pub fn execute(task: Task, config: &RunConfig, out: &Path) -> Result<Manifest> {
    config.validate()?;
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let points = config.points()?;
    info!("{task:?}: {} point(s) into {}", points.len(), out.display());
    let (artifacts, summary) = match task {
        Task::Echo | Task::Sweep => run_echo(task, config, &points, out)?,
        Task::AlphaScan => run_alpha(config, &points, out)?,
        Task::PlateauScan => run_plateau(config, &points, out)?,
        Task::CriticalScaling => run_critical(config, &points, out)?,
        Task::ConcurrenceScan => run_concurrence(config, &points, out)?,
        Task::EnvelopeFit => run_envelope(config, &points, out)?,
        Task::Compile => run_compile(config, out)?,
        Task::Verify => run_verify(config, out)?,
    };
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        command: task,
        method: config.method,
        determinant_exponent: DETERMINANT_EXPONENT,
        library_version: spinbath::VERSION.to_string(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        config: config.clone(),
        artifacts,
        summary,
    };
    fs::write(out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when unset.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config("/threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

type Outcome = Result<(Vec<Artifact>, Value)>;

fn run_echo(task: Task, config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    if task == Task::Sweep && config.sweep.is_none() {
        return Err(CliError::config("/sweep", "sweep needs a sweep section"));
    }
    let times = config.time.times();
    let series: Vec<Series> = points.par_iter().map(|p| echo_point(config, p, &times)).collect::<Result<_>>()?;
    let mut artifacts = Vec::with_capacity(points.len());
    let mut minima = Vec::with_capacity(points.len());
    for (p, s) in points.iter().zip(&series) {
        let file = match p.value {
            None => "echo.csv".to_string(),
            Some(_) => format!("{}_{:03}.csv", sweep_label(config), p.index),
        };
        let rows: Vec<Vec<String>> =
            s.times.iter().zip(&s.values).map(|(t, l)| vec![format_float(*t), format_float(*l)]).collect();
        write_table(&out.join(&file), &["t", "L"], &rows)?;
        artifacts.push(Artifact { file, param: p.value, rows: rows.len() });
        let (t_min, l_min) = s.minimum().unwrap_or((0.0, 1.0));
        minima.push(json!({"param": p.value, "t_min": t_min, "L_min": l_min}));
    }
    Ok((artifacts, json!({ "minima": minima })))
}

fn run_alpha(config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    let times = config.fit_times();
    let rows: Vec<(f64, Option<f64>, f64, bool)> = points
        .par_iter()
        .map(|p| {
            let fit = fit_alpha(&echo_point(config, p, &times)?)?;
            let single = p.coupling.resolve_sites(&p.chain).is_ok_and(|s| s.len() == 1);
            let closed = if single && p.chain.is_free_fermion() {
                alpha_perturbative_for(&p.chain, &p.coupling).ok().map(|a| a.alpha)
            } else {
                None
            };
            Ok((fit.alpha, closed, fit.residual, fit.flagged))
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = points
        .iter()
        .zip(&rows)
        .map(|(p, r)| vec![cell(p.value), format_float(r.0), cell(r.1), format_float(r.2), r.3.to_string()])
        .collect();
    let file = "alpha.csv".to_string();
    write_table(&out.join(&file), &[sweep_label(config), "alpha", "alpha_perturbative", "residual", "flagged"], &table)?;
    let mut summary = json!({});
    if let (Some(lc), Some(sweep)) = (config.analysis.lambda_c, &config.sweep) {
        if sweep.param == SweepParam::Lambda {
            let alphas: Vec<(f64, f64)> = points.iter().zip(&rows).map(|(p, r)| (p.value.unwrap_or(0.0), r.0)).collect();
            let (c1, c2) = fit_log_divergence_excluding(&alphas, lc, config.coupling.epsilon, config.analysis.exclusion)?;
            summary = json!({ "log_divergence": { "lambda_c": lc, "c1": c1, "c2": c2 } });
        }
    }
    Ok((vec![Artifact { file, param: None, rows: table.len() }], summary))
}

fn run_plateau(config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    let times = config.time.times();
    let rows: Vec<(f64, f64, Option<f64>)> = points
        .par_iter()
        .map(|p| {
            let plateau = fit_plateau(&echo_point(config, p, &times)?)?;
            let sites = p.coupling.resolve_sites(&p.chain)?;
            let closed = if sites.len() == 1 && p.chain.is_free_fermion() {
                let form = build_quadratic_form_with(&p.chain, None, config.convention)?;
                match plateau_perturbative(&diagonalize(&form)?, p.coupling.epsilon, sites[0]) {
                    Ok(e) => Some(e.value),
                    Err(e) => {
                        warn!("no perturbative plateau at point {}: {e}", p.index);
                        None
                    }
                }
            } else {
                None
            };
            Ok((plateau.value, plateau.std, closed))
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = points
        .iter()
        .zip(&rows)
        .map(|(p, r)| vec![cell(p.value), format_float(r.0), format_float(r.1), cell(r.2)])
        .collect();
    let file = "plateau.csv".to_string();
    write_table(&out.join(&file), &[sweep_label(config), "plateau", "std", "plateau_perturbative"], &table)?;
    Ok((vec![Artifact { file, param: None, rows: table.len() }], json!({})))
}

fn run_critical(config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    require_sweep(config, &[SweepParam::N], "critical-scaling")?;
    if config.method != Method::Determinant {
        return Err(CliError::Dispatch("critical-scaling searches minima with method=determinant".into()));
    }
    if config.convention != PeriodicConvention::CCyclic {
        return Err(CliError::config("/convention", "critical-scaling uses the c_cyclic convention"));
    }
    let minima: Vec<(f64, f64)> = points
        .par_iter()
        .map(|p| {
            dispatch(config.method, &p.chain, &p.coupling)?;
            let (lo, hi) = config.analysis.minimum_window.unwrap_or((0.0, p.chain.n as f64 / 2.0));
            Ok(echo_minimum(&p.chain, &p.coupling, lo, hi, config.analysis.coarse_step)?)
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = points
        .iter()
        .zip(&minima)
        .map(|(p, m)| vec![p.chain.n.to_string(), format_float(m.0), format_float(m.1)])
        .collect();
    let file = "minima.csv".to_string();
    write_table(&out.join(&file), &["N", "t_min", "L_min"], &table)?;
    let decreasing = minima.windows(2).all(|w| w[1].1 < w[0].1);
    let summary = if points.len() >= 4 {
        let data: Vec<(usize, f64)> = points.iter().zip(&minima).map(|(p, m)| (p.chain.n, m.1)).collect();
        let (l0, beta) = fit_critical_scaling(&data)?;
        json!({ "L0": l0, "beta": beta, "decreasing": decreasing })
    } else {
        warn!("fewer than 4 sizes; skipping the scaling fit");
        json!({ "decreasing": decreasing })
    };
    Ok((vec![Artifact { file, param: None, rows: table.len() }], summary))
}

fn run_concurrence(config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    let param = match require_sweep(
        config,
        &[SweepParam::Lambda, SweepParam::Delta, SweepParam::Gamma],
        "concurrence-scan",
    )? {
        SweepParam::Lambda => ChainParam::Lambda,
        SweepParam::Delta => ChainParam::Delta,
        _ => ChainParam::Gamma,
    };
    let times = config.fit_times();
    let rows: Vec<spinbath::entanglement::AlphaConcurrenceRow<f64>> = points
        .par_iter()
        .map(|p| {
            if p.chain.n > DENSE_CAP {
                return Err(CliError::Dispatch(format!(
                    "concurrence-scan builds dense ground states and is limited to N <= {DENSE_CAP}"
                )));
            }
            let rule = config.sector_for(&p.chain);
            Ok(alpha_vs_concurrence(std::slice::from_ref(&p.chain), &p.coupling, param, &times, rule)?.remove(0))
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> =
        rows.iter().map(|r| vec![format_float(r.param), format_float(r.c1), format_float(r.alpha)]).collect();
    let file = "concurrence.csv".to_string();
    write_table(&out.join(&file), &["param", "C1", "alpha"], &table)?;
    Ok((vec![Artifact { file, param: None, rows: table.len() }], json!({})))
}

fn run_envelope(config: &RunConfig, points: &[Point], out: &Path) -> Outcome {
    let fits: Vec<spinbath::perturbation::EnvelopeFit<f64>> = points
        .par_iter()
        .map(|p| {
            let eps = p.coupling.epsilon.abs();
            let lobes = (config.time.t_max * eps / std::f64::consts::PI).round() as usize;
            if lobes == 0 {
                return Err(CliError::config("/time/t_max", "shorter than one oscillation period pi/epsilon"));
            }
            let series = echo_point(config, p, &stroboscopic_times(p.coupling.epsilon, lobes))?;
            let exponent = match config.analysis.exponent {
                Some(n) => n,
                None => p.coupling.resolve_sites(&p.chain)?.len(),
            };
            Ok(fit_envelope(&series, p.coupling.epsilon, exponent)?)
        })
        .collect::<Result<_>>()?;
    let table: Vec<Vec<String>> = points
        .iter()
        .zip(&fits)
        .map(|(p, f)| vec![cell(p.value), format_float(f.s2), format_float(f.quality), f.points.to_string()])
        .collect();
    let file = "envelope.csv".to_string();
    write_table(&out.join(&file), &[sweep_label(config), "S2", "quality", "points"], &table)?;
    let s2: Vec<f64> = fits.iter().map(|f| f.s2).collect();
    let mean = s2.iter().sum::<f64>() / s2.len() as f64;
    let (lo, hi) = s2.iter().fold((f64::MAX, f64::MIN), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let mut summary = json!({ "relative_spread": (hi - lo) / mean });
    if points.len() >= 3 {
        let xs: Vec<f64> = points.iter().map(|p| p.value.unwrap_or(0.0)).collect();
        let (slope, intercept) = linear_fit(&xs, &s2)?;
        summary["linear"] = json!({
            "slope": slope,
            "intercept": intercept,
            "r_squared": r_squared(&xs, &s2, slope, intercept),
        });
    }
    Ok((vec![Artifact { file, param: None, rows: table.len() }], summary))
}

fn layout_error(e: spinbath::Error) -> CliError {
    match e {
        spinbath::Error::UnsupportedLayout(_) | spinbath::Error::InvalidArgument(_) | spinbath::Error::SizeLimit { .. } => {
            CliError::Dispatch(e.to_string())
        }
        other => CliError::Numerical(other),
    }
}

fn no_sweep(config: &RunConfig, task: &str) -> Result<()> {
    match config.sweep {
        Some(_) => Err(CliError::config("/sweep", format!("{task} takes a single model, not a sweep"))),
        None => Ok(()),
    }
}

fn run_compile(config: &RunConfig, out: &Path) -> Outcome {
    no_sweep(config, "compile")?;
    let a = &config.analysis;
    let seq: GateSequence<f64> =
        compile(&config.model, &config.coupling, config.time.t_max, a.n_steps, a.level).map_err(layout_error)?;
    fs::write(out.join("schedule.txt"), seq.to_text())?;
    fs::write(out.join("schedule.json"), serde_json::to_string_pretty(&seq)?)?;
    let artifacts = vec![
        Artifact { file: "schedule.txt".into(), param: None, rows: seq.gates.len() },
        Artifact { file: "schedule.json".into(), param: None, rows: seq.gates.len() },
    ];
    let summary = json!({
        "gates": seq.gates.len(),
        "gates_per_step": seq.gates_per_step(),
        "tau": seq.tau,
        "level": seq.level,
    });
    Ok((artifacts, summary))
}

fn run_verify(config: &RunConfig, out: &Path) -> Outcome {
    no_sweep(config, "verify")?;
    let a = &config.analysis;
    let report = verify(&config.model, &config.coupling, config.time.t_max, &a.verify_steps, a.level)
        .map_err(layout_error)?;
    let table: Vec<Vec<String>> = report
        .n_steps
        .iter()
        .zip(&report.distances)
        .map(|(n, d)| vec![n.to_string(), format_float(*d)])
        .collect();
    let file = "convergence.csv".to_string();
    write_table(&out.join(&file), &["n_steps", "distance"], &table)?;
    let summary = json!({ "order": report.order, "monotone": report.monotone(), "level": report.level });
    Ok((vec![Artifact { file, param: None, rows: table.len() }], summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_at_fifteen_digits() {
        assert_eq!(format_float(0.1), "0.1");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_float(2.5e-9), "2.5e-9");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
        let x = 0.987_654_321_012_345_6;
        assert!((format_float(x).parse::<f64>().unwrap() - x).abs() < 1e-15);
    }

    #[test]
    fn determinant_rejects_interacting_chains() {
        let chain = Chain::xxz(8, 0.5, 0.0, Boundary::Open).unwrap();
        let err = dispatch(Method::Determinant, &chain, &Coupling::single(0.1)).unwrap_err();
        assert!(err.to_string().contains("method=ed"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
