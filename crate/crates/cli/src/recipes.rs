//! Named bundles of runs reproducing the standard studies.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;
use spinbath::echo::Method;
use spinbath::ed::SectorRule;
use spinbath::model::Boundary;
use spinbath::studies::grid_excluding;
use spinbath::{Chain, Coupling};

use crate::config::{RunConfig, SweepParam};
use crate::error::{CliError, Result};
use crate::run::{execute, Manifest, Task};

#[derive(Debug, Clone, Serialize)]
pub struct Job {
    /// Output subdirectory.
    pub name: String,
    pub task: Task,
    pub config: RunConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct Recipe {
    pub name: &'static str,
    pub description: &'static str,
    pub jobs: Vec<Job>,
}

pub const RECIPE_NAMES: [&str; 9] = [
    "fig2",
    "fig3",
    "fig4",
    "fig7",
    "xx_fig",
    "xxz_smallN",
    "mlink_alpha",
    "strong_envelope",
    "compiler_verify",
];

fn job(name: impl Into<String>, task: Task, config: RunConfig) -> Job {
    Job { name: name.into(), task, config }
}

fn ising(n: usize, lambda: f64, boundary: Boundary) -> Chain {
    Chain::ising(n, lambda, boundary).expect("valid recipe chain")
}

fn build(name: &str) -> Option<Recipe> {
    let periodic = Boundary::Periodic;
    let recipe = match name {
        "fig2" => Recipe {
            name: "fig2",
            description: "Ising echo curves across the transition, N=300, eps=0.25",
            jobs: vec![job(
                "echo",
                Task::Sweep,
                RunConfig::new(ising(300, 1.0, periodic), Coupling::single(0.25))
                    .with_time(200.0, 2001)
                    .with_sweep(SweepParam::Lambda, vec![0.25, 0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 1.5, 1.75]),
            )],
        },
        "fig3" => Recipe {
            name: "fig3",
            description: "short-time rate near the critical field and its log divergence, N=200",
            jobs: [0.05, 0.1, 0.25]
                .iter()
                .map(|&eps| {
                    let mut c = RunConfig::new(ising(200, 1.0, periodic), Coupling::single(eps))
                        .with_sweep(SweepParam::Lambda, grid_excluding(0.9, 1.1, 5e-3, Some(1.0)));
                    c.analysis.lambda_c = Some(1.0);
                    c.analysis.exclusion = 0.02;
                    job(format!("eps_{eps}"), Task::AlphaScan, c)
                })
                .collect(),
        },
        "fig4" => Recipe {
            name: "fig4",
            description: "long-time plateau against the field, N=200",
            jobs: [0.05, 0.25]
                .iter()
                .map(|&eps| {
                    let lambdas = (1..=20).map(|k| 0.1 * k as f64).collect();
                    let c = RunConfig::new(ising(200, 1.0, periodic), Coupling::single(eps))
                        .with_time(120.0, 2001)
                        .with_sweep(SweepParam::Lambda, lambdas);
                    job(format!("eps_{eps}"), Task::PlateauScan, c)
                })
                .collect(),
        },
        "fig7" => Recipe {
            name: "fig7",
            description: "size scaling of the critical echo minimum, lambda=1, eps=0.25",
            jobs: vec![job(
                "minima",
                Task::CriticalScaling,
                RunConfig::new(ising(50, 1.0, periodic), Coupling::single(0.25))
                    .with_sweep(SweepParam::N, vec![50.0, 100.0, 200.0, 300.0, 400.0]),
            )],
        },
        "xx_fig" => Recipe {
            name: "xx_fig",
            description: "XX bath: frozen above the saturation field, decaying below",
            jobs: vec![job(
                "echo",
                Task::Sweep,
                RunConfig::new(Chain::xy(100, 0.0, 0.5, periodic).expect("valid"), Coupling::single(0.25))
                    .with_time(100.0, 2001)
                    .with_sweep(SweepParam::Lambda, vec![0.5, 1.5]),
            )],
        },
        "xxz_smallN" => {
            let base = || {
                let mut c = RunConfig::new(Chain::xxz(10, 0.0, 0.0, Boundary::Open).expect("valid"), Coupling::single(0.1))
                    .with_method(Method::EdExact)
                    .with_sweep(SweepParam::Delta, vec![1.5, 0.5, 0.0, -0.5, -2.5]);
                c.sector = Some(SectorRule::MaxSz);
                c
            };
            Recipe {
                name: "xxz_smallN",
                description: "XXZ bath by exact diagonalization, N=10, eps=0.1",
                jobs: vec![
                    job("echo", Task::Sweep, base().with_time(20.0, 101)),
                    job("alpha", Task::AlphaScan, base()),
                ],
            }
        }
        "mlink_alpha" => Recipe {
            name: "mlink_alpha",
            description: "short-time rate against the number of equally spaced links, N=300",
            jobs: vec![job(
                "alpha",
                Task::AlphaScan,
                RunConfig::new(ising(300, 0.5, periodic), Coupling::star(0.25, 1))
                    .with_sweep(SweepParam::M, vec![1.0, 2.0, 3.0, 5.0, 10.0]),
            )],
        },
        "strong_envelope" => Recipe {
            name: "strong_envelope",
            description: "Gaussian envelope width at strong coupling, N=300, lambda=0.5",
            jobs: vec![
                job(
                    "central",
                    Task::EnvelopeFit,
                    RunConfig::new(ising(300, 0.5, periodic), Coupling::central(20.0, 300))
                        .with_time(6.0 * PI, 2)
                        .with_sweep(SweepParam::Epsilon, vec![20.0, 40.0]),
                ),
                job(
                    "geometry_b",
                    Task::EnvelopeFit,
                    RunConfig::new(ising(300, 0.5, periodic), Coupling::contiguous(80.0, 10))
                        .with_time(2.5 * PI, 2)
                        .with_sweep(SweepParam::M, vec![10.0, 30.0, 100.0]),
                ),
                job(
                    "geometry_a",
                    Task::EnvelopeFit,
                    RunConfig::new(ising(300, 0.5, periodic), Coupling::star(80.0, 25))
                        .with_time(2.5 * PI, 2)
                        .with_sweep(SweepParam::Lambda, vec![0.2, 0.4]),
                ),
            ],
        },
        "compiler_verify" => {
            let base = || {
                RunConfig::new(ising(4, 0.5, Boundary::Open), Coupling::single(0.25).with_omega_e(1.0)).with_time(1.0, 2)
            };
            Recipe {
                name: "compiler_verify",
                description: "stroboscopic gate schedule for N=4 and its convergence to the exact propagator",
                jobs: vec![job("verify", Task::Verify, base()), job("schedule", Task::Compile, base())],
            }
        }
        _ => return None,
    };
    Some(recipe)
}

/// Every recipe, in a fixed order.
pub fn recipes() -> Vec<Recipe> {
    RECIPE_NAMES.iter().filter_map(|n| build(n)).collect()
}

pub fn recipe(name: &str) -> Result<Recipe> {
    build(name).ok_or_else(|| CliError::UnknownRecipe {
        name: name.to_string(),
        available: RECIPE_NAMES.iter().map(|s| s.to_string()).collect(),
    })
}

/// Runs each job into `out/<job name>`.
pub fn run_recipe(recipe: &Recipe, out: &Path) -> Result<Vec<Manifest>> {
    recipe
        .jobs
        .iter()
        .map(|j| {
            log::info!("recipe {}: job {}", recipe.name, j.name);
            execute(j.task, &j.config, &out.join(&j.name))
        })
        .collect()
}
