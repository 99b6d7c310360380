//! Configuration, dispatch and artifact writing behind the `spinbath` command.

pub mod config;
pub mod error;
pub mod recipes;
pub mod run;

pub use config::{RunConfig, SweepParam};
pub use error::{CliError, Result};
pub use recipes::{recipe, recipes, run_recipe, Recipe};
pub use run::{execute, format_float, with_threads, Manifest, Task};
