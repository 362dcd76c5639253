//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use zelf::CrossSection;

use crate::config::{Command, Format, Grid, Schedule, Seed, Settings};

#[derive(Debug, Parser)]
#[command(name = "zelf", version, about = "Particle focusing in curved rectangular ducts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Sample lift and drag on a grid (optionally with zero-level contours)
    Field(Flags),
    /// Integrate particle trajectories from seed points
    Simulate(Flags),
    /// Find and classify equilibria at one bend radius
    Equilibria(Flags),
    /// Lift-only and drag-only limit reports
    Limits(Flags),
    /// Follow equilibria down a bend-radius schedule and detect bifurcations
    Sweep(Flags),
}

#[derive(Debug, Args, Default, Clone)]
pub struct Flags {
    /// Flat TOML file with default settings
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "2x1|1x2")]
    pub cross_section: Option<CrossSection>,
    /// Dimensionless particle size
    #[arg(long)]
    pub a_tilde: Option<f64>,
    /// Dimensionless bend radius
    #[arg(long)]
    pub r_tilde: Option<f64>,
    /// Bend-radius schedule lo:hi:n[:lin], swept from hi down to lo
    #[arg(long, value_name = "LO:HI:N")]
    pub r_schedule: Option<Schedule>,
    /// Drop the drag term (infinite bend radius)
    #[arg(long)]
    pub lift_only: bool,
    /// Drop the lift term
    #[arg(long)]
    pub drag_only: bool,
    /// Grid resolution NxM (field nodes, or Newton seeds)
    #[arg(long, value_name = "NxM")]
    pub grid: Option<Grid>,
    /// Integrator relative tolerance, or Newton residual tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file, or directory for simulate and sweep
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed point r,z (repeatable)
    #[arg(long = "seed", value_name = "R,Z", allow_hyphen_values = true)]
    pub seeds: Vec<Seed>,
    /// Number of uniformly random seed points
    #[arg(long)]
    pub random_seeds: Option<usize>,
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Integration end time
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Also extract zero-level contours of each field component
    #[arg(long)]
    pub contours: bool,
    /// Search for limit cycles around spiral equilibria
    #[arg(long)]
    pub limit_cycles: bool,
}

impl Sub {
    pub fn split(self) -> (Command, Flags) {
        match self {
            Sub::Field(f) => (Command::Field, f),
            Sub::Simulate(f) => (Command::Simulate, f),
            Sub::Equilibria(f) => (Command::Equilibria, f),
            Sub::Limits(f) => (Command::Limits, f),
            Sub::Sweep(f) => (Command::Sweep, f),
        }
    }
}

impl Flags {
    pub fn settings(&self) -> Settings {
        let on = |b: bool| b.then_some(true);
        Settings {
            cross_section: self.cross_section,
            a_tilde: self.a_tilde,
            r_tilde: self.r_tilde,
            schedule: self.r_schedule,
            lift_only: on(self.lift_only),
            drag_only: on(self.drag_only),
            grid: self.grid,
            tol: self.tol,
            format: self.format,
            out: self.out.clone(),
            seeds: (!self.seeds.is_empty()).then(|| self.seeds.clone()),
            random_seeds: self.random_seeds,
            rng_seed: self.rng_seed,
            t_end: self.t_end,
            contours: on(self.contours),
            limit_cycles: on(self.limit_cycles),
        }
    }
}
