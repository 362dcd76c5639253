//! Output records and their CSV/JSON writers.
//!
//! Floats are written in shortest round-trip form. Every CSV file starts with
//! the `# config:` line of the run that produced it; every JSON document is an
//! object whose first key is `config`.

use std::io::{self, Write};

use serde::Serialize;
use zelf::continuation::{Branch, BranchLink, SweepResult};
use zelf::{Equilibrium, LimitCycle, NoCycle};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumRecord {
    pub r: f64,
    pub z: f64,
    pub kind: &'static str,
    /// `[re, im]` pairs.
    pub eigenvalues: [[f64; 2]; 2],
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    pub trace: f64,
    pub determinant: f64,
    pub residual: f64,
}

impl From<&Equilibrium> for EquilibriumRecord {
    fn from(e: &Equilibrium) -> Self {
        let ev = e.eigenvalues();
        EquilibriumRecord {
            r: e.r,
            z: e.z,
            kind: e.kind.label(),
            eigenvalues: [[ev[0].re, ev[0].im], [ev[1].re, ev[1].im]],
            eigenvectors: e.eigen.eigenvectors,
            trace: e.jac.trace(),
            determinant: e.jac.determinant(),
            residual: e.residual,
        }
    }
}

pub const EQUILIBRIA_COLUMNS: &str = "r,z,kind,re1,im1,re2,im2,v1r,v1z,v2r,v2z,trace,det,residual";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl EquilibriumRecord {
    fn csv_row(&self) -> String {
        let v = self.eigenvectors;
        let [[re1, im1], [re2, im2]] = self.eigenvalues;
        format!(
            "{},{},{},{re1},{im1},{re2},{im2},{},{},{},{},{},{},{}",
            self.r,
            self.z,
            self.kind,
            opt(v.map(|v| v[0][0])),
            opt(v.map(|v| v[0][1])),
            opt(v.map(|v| v[1][0])),
            opt(v.map(|v| v[1][1])),
            self.trace,
            self.determinant,
            self.residual
        )
    }
}

/// Outcome of a cycle search around one spiral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleRecord {
    pub equilibrium: [f64; 2],
    pub found: bool,
    pub crossing: Option<[f64; 2]>,
    pub period: Option<f64>,
    pub residual: Option<f64>,
    pub revolutions: Option<usize>,
    pub attracting: Option<bool>,
    pub diagnostic: Option<String>,
}

impl CycleRecord {
    pub fn new(equilibrium: [f64; 2], result: &Result<LimitCycle, NoCycle>) -> Self {
        match result {
            Ok(c) => CycleRecord {
                equilibrium,
                found: true,
                crossing: Some(c.crossing),
                period: Some(c.period),
                residual: Some(c.residual),
                revolutions: Some(c.revolutions),
                attracting: Some(c.attracting),
                diagnostic: None,
            },
            Err(n) => CycleRecord {
                equilibrium,
                found: false,
                crossing: None,
                period: None,
                residual: None,
                revolutions: None,
                attracting: None,
                diagnostic: Some(n.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct EquilibriaDoc<'a> {
    config: &'a RunConfig,
    wall_continua: bool,
    equilibria: &'a [EquilibriumRecord],
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_cycles: Option<&'a [CycleRecord]>,
}

pub fn write_equilibria<W: Write>(
    cfg: &RunConfig,
    records: &[EquilibriumRecord],
    wall_continua: bool,
    cycles: Option<&[CycleRecord]>,
    mut w: W,
) -> io::Result<()> {
    match cfg.format {
        crate::config::Format::Json => {
            let doc = EquilibriaDoc { config: cfg, wall_continua, equilibria: records, limit_cycles: cycles };
            serde_json::to_writer_pretty(&mut w, &doc)?;
            writeln!(w)?;
        }
        crate::config::Format::Csv => {
            writeln!(w, "{}", cfg.header())?;
            if wall_continua {
                writeln!(w, "# wall-continua: true")?;
            }
            for c in cycles.unwrap_or_default() {
                writeln!(w, "# limit-cycle: {}", serde_json::to_string(c)?)?;
            }
            writeln!(w, "{EQUILIBRIA_COLUMNS}")?;
            for r in records {
                writeln!(w, "{}", r.csv_row())?;
            }
        }
    }
    w.flush()
}

pub const DIAGRAM_COLUMNS: &str = "r_tilde,branch,r,z,re1,im1,re2,im2,kind";

/// One row per branch sample, ordered by descending bend radius then branch id.
pub fn write_diagram<W: Write>(cfg: &RunConfig, result: &SweepResult, mut w: W) -> io::Result<()> {
    let mut rows: Vec<(f64, usize, &Equilibrium)> = result
        .branches
        .iter()
        .flat_map(|b| b.samples.iter().map(move |s| (s.r_tilde, b.id, &s.equilibrium)))
        .collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    writeln!(w, "{}", cfg.header())?;
    writeln!(w, "{DIAGRAM_COLUMNS}")?;
    for (rt, id, e) in rows {
        let ev = e.eigenvalues();
        writeln!(
            w,
            "{rt},{id},{},{},{},{},{},{},{}",
            e.r,
            e.z,
            ev[0].re,
            ev[0].im,
            ev[1].re,
            ev[1].im,
            e.kind.label()
        )?;
    }
    w.flush()
}

#[derive(Serialize)]
struct BranchSummary {
    id: usize,
    kind: &'static str,
    r_tilde_start: f64,
    r_tilde_end: f64,
    start: [f64; 2],
    end: [f64; 2],
    birth: Option<BranchLink>,
    death: Option<BranchLink>,
}

impl From<&Branch> for BranchSummary {
    fn from(b: &Branch) -> Self {
        let first = b.samples.first().expect("branches are never empty");
        let last = b.samples.last().expect("branches are never empty");
        BranchSummary {
            id: b.id,
            kind: b.kind.label(),
            r_tilde_start: first.r_tilde,
            r_tilde_end: last.r_tilde,
            start: first.equilibrium.location(),
            end: last.equilibrium.location(),
            birth: b.birth,
            death: b.death,
        }
    }
}

#[derive(Serialize)]
struct FinalState {
    r_tilde: f64,
    equilibria: Vec<EquilibriumRecord>,
}

#[derive(Serialize)]
struct EventsDoc<'a> {
    config: &'a RunConfig,
    events: &'a [zelf::continuation::BifurcationEvent],
    transitions: &'a [zelf::continuation::KindTransition],
    unresolved: &'a [zelf::continuation::UnresolvedChange],
    branches: Vec<BranchSummary>,
    final_state: FinalState,
}

pub fn write_events<W: Write>(cfg: &RunConfig, result: &SweepResult, mut w: W) -> io::Result<()> {
    let last = result.final_state();
    let doc = EventsDoc {
        config: cfg,
        events: &result.events,
        transitions: &result.transitions,
        unresolved: &result.unresolved,
        branches: result.branches.iter().map(BranchSummary::from).collect(),
        final_state: FinalState {
            r_tilde: last.r_tilde,
            equilibria: last.equilibria.iter().map(EquilibriumRecord::from).collect(),
        },
    };
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()
}

/// Lift and drag sampled on a uniform node grid over the closed rectangle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    /// `r`-major: entry `i * z.len() + j` is at `(r[i], z[j])`.
    pub lift_r: Vec<f64>,
    pub lift_z: Vec<f64>,
    pub drag_r: Vec<f64>,
    pub drag_z: Vec<f64>,
}

pub const FIELD_COLUMNS: &str = "r,z,lift_r,lift_z,drag_r,drag_z";
pub const FIELD_COMPONENTS: [&str; 4] = ["lift_r", "lift_z", "drag_r", "drag_z"];

impl FieldGrid {
    pub fn component(&self, name: &str) -> &[f64] {
        match name {
            "lift_r" => &self.lift_r,
            "lift_z" => &self.lift_z,
            "drag_r" => &self.drag_r,
            "drag_z" => &self.drag_z,
            _ => panic!("unknown field component {name}"),
        }
    }
}

/// Zero-level polylines of one field component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentContours {
    pub component: &'static str,
    pub lines: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct FieldDoc<'a> {
    config: &'a RunConfig,
    #[serde(flatten)]
    grid: &'a FieldGrid,
    #[serde(skip_serializing_if = "Option::is_none")]
    contours: Option<&'a [ComponentContours]>,
}

pub fn write_field_json<W: Write>(
    cfg: &RunConfig,
    grid: &FieldGrid,
    contours: Option<&[ComponentContours]>,
    mut w: W,
) -> io::Result<()> {
    serde_json::to_writer(&mut w, &FieldDoc { config: cfg, grid, contours })?;
    writeln!(w)?;
    w.flush()
}

pub fn write_field_csv<W: Write>(cfg: &RunConfig, grid: &FieldGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", cfg.header())?;
    writeln!(w, "{FIELD_COLUMNS}")?;
    let nz = grid.z.len();
    for (i, r) in grid.r.iter().enumerate() {
        for (j, z) in grid.z.iter().enumerate() {
            let k = i * nz + j;
            writeln!(w, "{r},{z},{},{},{},{}", grid.lift_r[k], grid.lift_z[k], grid.drag_r[k], grid.drag_z[k])?;
        }
    }
    w.flush()
}

pub const CONTOUR_COLUMNS: &str = "component,line,r,z";

pub fn write_contours_csv<W: Write>(cfg: &RunConfig, contours: &[ComponentContours], mut w: W) -> io::Result<()> {
    writeln!(w, "{}", cfg.header())?;
    writeln!(w, "{CONTOUR_COLUMNS}")?;
    for c in contours {
        for (k, line) in c.lines.iter().enumerate() {
            for p in line {
                writeln!(w, "{},{k},{},{}", c.component, p[0], p[1])?;
            }
        }
    }
    w.flush()
}

/// Limit reports as CSV: one row per equilibrium.
pub const LIMITS_COLUMNS: &str =
    "limit,r,z,kind,re1,im1,re2,im2,location_delta,eigenvalue_delta,eigenvector_delta,passed";

#[derive(Serialize)]
struct LimitsDoc<'a> {
    config: &'a RunConfig,
    reports: &'a [zelf::analytics::LimitReport],
}

pub fn write_limits<W: Write>(cfg: &RunConfig, reports: &[zelf::analytics::LimitReport], mut w: W) -> io::Result<()> {
    match cfg.format {
        crate::config::Format::Json => {
            serde_json::to_writer_pretty(&mut w, &LimitsDoc { config: cfg, reports })?;
            writeln!(w)?;
        }
        crate::config::Format::Csv => {
            writeln!(w, "{}", cfg.header())?;
            for rep in reports {
                if let Some(d) = &rep.drag {
                    writeln!(w, "# drag-limit: {}", serde_json::to_string(d)?)?;
                }
            }
            writeln!(w, "{LIMITS_COLUMNS}")?;
            for rep in reports {
                let limit = match rep.limit {
                    zelf::analytics::LimitKind::LiftOnly => "lift-only",
                    zelf::analytics::LimitKind::DragOnly => "drag-only",
                };
                for e in &rep.equilibria {
                    let [[re1, im1], [re2, im2]] = e.eigenvalues;
                    writeln!(
                        w,
                        "{limit},{},{},{},{re1},{im1},{re2},{im2},{},{},{},{}",
                        e.r,
                        e.z,
                        e.kind.label(),
                        opt(e.location_delta),
                        opt(e.eigenvalue_delta),
                        opt(e.eigenvector_delta),
                        e.passed
                    )?;
                }
            }
        }
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub index: usize,
    pub seed: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub terminal_reason: Option<zelf::TerminalReason>,
    pub end: Option<[f64; 2]>,
    pub duration: Option<f64>,
    pub samples: Option<usize>,
    /// Distance from the end point to the nearest equilibrium.
    pub nearest_equilibrium: Option<f64>,
    /// Relative drift of the conserved quantity (drag-only runs).
    pub invariant_drift: Option<f64>,
    pub error: Option<String>,
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    config: &'a RunConfig,
    failures: usize,
    trajectories: &'a [SeedOutcome],
}

pub fn write_summary<W: Write>(cfg: &RunConfig, outcomes: &[SeedOutcome], mut w: W) -> io::Result<()> {
    let failures = outcomes.iter().filter(|o| o.error.is_some()).count();
    serde_json::to_writer_pretty(&mut w, &SummaryDoc { config: cfg, failures, trajectories: outcomes })?;
    writeln!(w)?;
    w.flush()
}
