//! The five subcommands as library functions.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zelf::analytics::{drag_invariant, drag_limit_report, lift_limit_report};
use zelf::continuation::{sweep, SweepOptions};
use zelf::contour::{zero_contours, ScalarGrid};
use zelf::equilibria::has_wall_continua;
use zelf::forcefield::{drag, lift};
use zelf::{
    find_equilibria, find_limit_cycle, integrate, IntegrateOptions, LimitCycleOptions, Regime, SeedGrid, SolverOptions,
};

use crate::config::{Command, ConfigError, Format, RunConfig, DEFAULT_DRAG_LIMIT_R_TILDE, DEFAULT_T_END};
use crate::export::{
    self, ComponentContours, CycleRecord, EquilibriumRecord, FieldGrid, SeedOutcome, FIELD_COMPONENTS,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] zelf::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    /// Some items failed; the rest of the output was written.
    #[error("{failed} of {total} items failed")]
    Partial { failed: usize, total: usize },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => 1,
            RunError::Model(e) if !e.is_numerical() && !matches!(e, zelf::Error::Io(_) | zelf::Error::Json(_)) => 1,
            _ => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

/// Writes to `out` or, when absent, to stdout.
fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), RunError> {
    match out {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w).map_err(io_err(p))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(io_err(Path::new("<stdout>")))
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<(), RunError> {
    match cfg.command {
        Command::Field => cmd_field(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Equilibria => cmd_equilibria(cfg),
        Command::Limits => cmd_limits(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    let mut opts = SolverOptions::for_cross_section(cfg.cross_section);
    if let Some(g) = cfg.grid {
        opts = opts.with_grid(SeedGrid { nr: g.nr, nz: g.nz });
    }
    if let Some(t) = cfg.tol {
        opts.newton_tol = t;
    }
    opts
}

fn node_coords(half: f64, n: usize) -> Vec<f64> {
    // exact endpoints; refining n -> 2n - 1 reproduces every node bit for bit
    (0..n).map(|i| -half + (2.0 * half * i as f64) / (n - 1) as f64).collect()
}

/// Samples both force fields on the configured node grid.
pub fn field_grid(cfg: &RunConfig) -> Result<FieldGrid, RunError> {
    let cs = cfg.cross_section;
    let (nr, nz) = match cfg.grid {
        Some(g) => (g.nr, g.nz),
        None => match cs {
            zelf::CrossSection::Rect2x1 => (201, 101),
            zelf::CrossSection::Rect1x2 => (101, 201),
        },
    };
    let r = node_coords(cs.half_width(), nr);
    let z = node_coords(cs.half_height(), nz);
    let mut g = FieldGrid {
        lift_r: Vec::with_capacity(nr * nz),
        lift_z: Vec::with_capacity(nr * nz),
        drag_r: Vec::with_capacity(nr * nz),
        drag_z: Vec::with_capacity(nr * nz),
        r,
        z,
    };
    for &ri in &g.r {
        for &zj in &g.z {
            let l = lift(cs, ri, zj)?;
            let d = drag(cs, ri, zj)?;
            g.lift_r.push(l.fr);
            g.lift_z.push(l.fz);
            g.drag_r.push(d.fr);
            g.drag_z.push(d.fz);
        }
    }
    Ok(g)
}

pub fn field_contours(grid: &FieldGrid) -> Result<Vec<ComponentContours>, RunError> {
    FIELD_COMPONENTS
        .iter()
        .map(|&name| {
            let lines = zero_contours(&ScalarGrid { xs: &grid.r, ys: &grid.z, values: grid.component(name) })?;
            Ok(ComponentContours { component: name, lines })
        })
        .collect()
}

fn contours_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "field".into());
    out.with_file_name(format!("{stem}.contours.csv"))
}

fn cmd_field(cfg: &RunConfig) -> Result<(), RunError> {
    let grid = field_grid(cfg)?;
    let contours = if cfg.contours { Some(field_contours(&grid)?) } else { None };
    match cfg.format {
        Format::Json => with_output(cfg.out.as_deref(), |w| export::write_field_json(cfg, &grid, contours.as_deref(), w)),
        Format::Csv => {
            if contours.is_some() && cfg.out.is_none() {
                return Err(RunError::Usage("contours in csv format need --out (they go to a sibling file)".into()));
            }
            with_output(cfg.out.as_deref(), |w| export::write_field_csv(cfg, &grid, w))?;
            if let (Some(c), Some(out)) = (&contours, &cfg.out) {
                let path = contours_path(out);
                let mut w = create(&path)?;
                export::write_contours_csv(cfg, c, &mut w).map_err(io_err(&path))?;
            }
            Ok(())
        }
    }
}

/// Explicit seeds followed by `random_seeds` uniform draws inside the duct.
pub fn seed_points(cfg: &RunConfig) -> Vec<[f64; 2]> {
    let cs = cfg.cross_section;
    let mut pts: Vec<[f64; 2]> = cfg.seeds.iter().map(|s| [s.r, s.z]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (hw, hh) = (cs.half_width(), cs.half_height());
    for _ in 0..cfg.random_seeds {
        pts.push([rng.random_range(-hw..hw), rng.random_range(-hh..hh)]);
    }
    pts
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), RunError> {
    let mp = cfg.model_params()?;
    let drag_only = mp.regime() == Regime::DragOnly;
    let mut opts = match cfg.tol {
        Some(t) => IntegrateOptions::with_tol(t),
        None => IntegrateOptions::default(),
    };
    opts.detect_closed_orbit = drag_only;
    let t_end = cfg.t_end.unwrap_or(DEFAULT_T_END);
    let equilibria = find_equilibria(&mp, &SolverOptions::for_cross_section(mp.cs))?;
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let header = vec![format!("config: {}", cfg.to_json())];
    let mut outcomes = Vec::new();
    for (index, seed) in seed_points(cfg).into_iter().enumerate() {
        let mut o = SeedOutcome {
            index,
            seed,
            file: None,
            terminal_reason: None,
            end: None,
            duration: None,
            samples: None,
            nearest_equilibrium: None,
            invariant_drift: None,
            error: None,
        };
        match integrate(&mp, seed, t_end, &opts) {
            Ok(traj) => {
                let last = traj.last();
                o.terminal_reason = Some(traj.terminal_reason);
                o.end = Some([last.r, last.z]);
                o.duration = Some(traj.duration());
                o.samples = Some(traj.samples.len());
                o.nearest_equilibrium =
                    equilibria.iter().map(|e| (e.r - last.r).hypot(e.z - last.z)).min_by(f64::total_cmp);
                if drag_only {
                    o.invariant_drift = Some(traj.max_relative_drift(|r, z| drag_invariant(mp.cs, r, z)));
                }
                if let Some(dir) = &cfg.out {
                    let name = format!("traj_{index:03}.csv");
                    let path = dir.join(&name);
                    let mut w = create(&path)?;
                    traj.write_csv(&mp, &header, &mut w).map_err(|e| match e {
                        zelf::Error::Io(source) => RunError::Io { path: path.display().to_string(), source },
                        other => RunError::Model(other),
                    })?;
                    w.flush().map_err(io_err(&path))?;
                    o.file = Some(name);
                }
            }
            Err(e) => {
                log::warn!("seed {index} ({}, {}): {e}", seed[0], seed[1]);
                o.error = Some(e.to_string());
            }
        }
        outcomes.push(o);
    }
    let summary = cfg.out.as_ref().map(|d| d.join("summary.json"));
    with_output(summary.as_deref(), |w| export::write_summary(cfg, &outcomes, w))?;
    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    if failed > 0 {
        return Err(RunError::Partial { failed, total: outcomes.len() });
    }
    Ok(())
}

fn cmd_equilibria(cfg: &RunConfig) -> Result<(), RunError> {
    let mp = cfg.model_params()?;
    let eqs = find_equilibria(&mp, &solver_options(cfg))?;
    let records: Vec<EquilibriumRecord> = eqs.iter().map(EquilibriumRecord::from).collect();
    let cycles: Option<Vec<CycleRecord>> = cfg.limit_cycles.then(|| {
        eqs.iter()
            .filter(|e| e.strict_kind(mp.regime()).is_spiral() || e.kind == zelf::Kind::Center)
            .map(|e| CycleRecord::new(e.location(), &find_limit_cycle(&mp, e, &LimitCycleOptions::default())))
            .collect()
    });
    with_output(cfg.out.as_deref(), |w| {
        export::write_equilibria(cfg, &records, has_wall_continua(&mp), cycles.as_deref(), w)
    })
}

fn cmd_limits(cfg: &RunConfig) -> Result<(), RunError> {
    let cs = cfg.cross_section;
    let mut reports = Vec::new();
    if !cfg.drag_only {
        reports.push(lift_limit_report(cs, cfg.a_tilde)?);
    }
    if !cfg.lift_only {
        reports.push(drag_limit_report(cs, cfg.r_tilde.unwrap_or(DEFAULT_DRAG_LIMIT_R_TILDE))?);
    }
    with_output(cfg.out.as_deref(), |w| export::write_limits(cfg, &reports, w))
}

fn cmd_sweep(cfg: &RunConfig) -> Result<(), RunError> {
    let mut opts = SweepOptions::for_cross_section(cfg.cross_section);
    opts.solver = solver_options(cfg);
    let result = sweep(cfg.cross_section, cfg.a_tilde, &cfg.schedule_values(), &opts)?;
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
            with_output(Some(&dir.join("diagram.csv")), |w| export::write_diagram(cfg, &result, w))?;
            with_output(Some(&dir.join("events.json")), |w| export::write_events(cfg, &result, w))
        }
        None => with_output(None, |w| export::write_events(cfg, &result, w)),
    }
}
