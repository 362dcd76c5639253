//! Isolated periodic orbits around spiral equilibria.
//!
//! The Poincaré section is the half-line leaving the spiral in the `+r`
//! direction. Starting a small distance out, the first-return map is iterated
//! (with Aitken extrapolation once three iterates are available) until a fixed
//! point is certified by a fresh return at tight tolerance.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, Regime};
use crate::equilibria::{find_equilibria, Equilibrium, Kind, SolverOptions};
use crate::ode::{IntegrateOptions, Integrator, Section, SectionMode};
use crate::trajectory::{Sample, TerminalReason};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCycleOptions {
    /// Initial distance from the spiral along `+r`.
    pub offset: f64,
    pub max_revolutions: usize,
    /// Certification threshold for `|P(s) - s|`.
    pub residual_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// A single return may take at most this many linearised periods `2 pi / |Im lambda|`.
    pub max_periods_per_return: f64,
}

impl Default for LimitCycleOptions {
    fn default() -> Self {
        Self {
            offset: 1e-3,
            max_revolutions: 500,
            residual_tol: 1e-8,
            rtol: 1e-11,
            atol: 1e-14,
            max_periods_per_return: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub r_tilde: f64,
    /// The spiral the cycle surrounds.
    pub equilibrium: [f64; 2],
    pub period: f64,
    /// `|P(s) - s|` at the certified section point.
    pub residual: f64,
    /// Where the cycle crosses the section.
    pub crossing: [f64; 2],
    pub revolutions: usize,
    /// Found by forward integration, so it attracts nearby orbits.
    pub attracting: bool,
    /// One period of the orbit, starting and ending on the section.
    pub orbit: Vec<Sample>,
}

/// Why no cycle was reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoCycle {
    NotASpiral(Kind),
    /// Every nearby orbit is closed, so there is no isolated cycle.
    DegenerateCenter,
    HitBoundary { revolutions: usize },
    /// The orbit settled on a different equilibrium.
    ReachedOtherAttractor { location: [f64; 2], revolutions: usize },
    /// The orbit fell back onto the spiral itself.
    ReturnedToSpiral { revolutions: usize },
    /// No return to the section within the time allowed for one revolution.
    NoReturn { revolutions: usize },
    NotConverged { revolutions: usize, residual: f64 },
    /// The closed orbit winds around other equilibria as well, or not around the spiral.
    WrongEnclosure { enclosed: Vec<[f64; 2]> },
    Integration(String),
}

impl std::fmt::Display for NoCycle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoCycle::NotASpiral(k) => write!(f, "equilibrium is not a spiral (kind: {})", k.label()),
            NoCycle::DegenerateCenter => f.write_str("degenerate center: continuum of closed orbits, no isolated cycle"),
            NoCycle::HitBoundary { revolutions } => write!(f, "orbit reached the wall after {revolutions} revolutions"),
            NoCycle::ReachedOtherAttractor { location, revolutions } => write!(
                f,
                "orbit settled on the equilibrium at ({}, {}) after {revolutions} revolutions",
                location[0], location[1]
            ),
            NoCycle::ReturnedToSpiral { revolutions } => {
                write!(f, "orbit fell back onto the spiral after {revolutions} revolutions")
            }
            NoCycle::NoReturn { revolutions } => write!(f, "no return to the section after {revolutions} revolutions"),
            NoCycle::NotConverged { revolutions, residual } => {
                write!(f, "return map not converged after {revolutions} revolutions (residual {residual:e})")
            }
            NoCycle::WrongEnclosure { enclosed } => write!(f, "closed orbit encloses {enclosed:?}"),
            NoCycle::Integration(msg) => write!(f, "integration failed: {msg}"),
        }
    }
}

struct ReturnMap<'a> {
    mp: &'a ModelParams,
    opts: IntegrateOptions,
    section: Section,
    origin: [f64; 2],
    t_max: f64,
}

enum Return {
    Hit { s: f64, period: f64, orbit: Vec<Sample> },
    Stopped(TerminalReason, [f64; 2]),
}

impl ReturnMap<'_> {
    fn apply(&self, s: f64) -> Result<Return, NoCycle> {
        let start = [self.origin[0] + s, self.origin[1]];
        if !self.mp.cs.contains_strictly(start[0], start[1]) {
            return Ok(Return::Stopped(TerminalReason::HitBoundary, start));
        }
        let run = Integrator::new(self.mp, &self.opts)
            .run(start, self.t_max, Some(&self.section), SectionMode::FirstReturn)
            .map_err(|e| NoCycle::Integration(e.to_string()))?;
        let last = run.trajectory.last();
        match run.crossings.last() {
            Some(c) if run.returned => Ok(Return::Hit {
                s: c.x[0] - self.origin[0],
                period: c.t,
                orbit: run.trajectory.samples,
            }),
            _ => Ok(Return::Stopped(run.trajectory.terminal_reason, [last.r, last.z])),
        }
    }
}

/// Winding number of a closed polygon around `p`.
fn winding_number(orbit: &[Sample], p: [f64; 2]) -> i32 {
    let mut total = 0.0;
    let n = orbit.len();
    for k in 0..n {
        let a = orbit[k];
        let b = orbit[(k + 1) % n];
        let (ax, ay) = (a.r - p[0], a.z - p[1]);
        let (bx, by) = (b.r - p[0], b.z - p[1]);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    (total / std::f64::consts::TAU).round() as i32
}

/// Searches for an isolated periodic orbit around `spiral`.
///
/// Unstable spirals are followed forward in time, stable ones backward, so a
/// cycle found around an unstable spiral attracts and one around a stable
/// spiral repels.
pub fn find_limit_cycle(mp: &ModelParams, spiral: &Equilibrium, opts: &LimitCycleOptions) -> Result<LimitCycle, NoCycle> {
    if mp.regime() == Regime::DragOnly || spiral.kind == Kind::Center {
        return Err(NoCycle::DegenerateCenter);
    }
    let kind = spiral.strict_kind(mp.regime());
    if !kind.is_spiral() {
        return Err(NoCycle::NotASpiral(spiral.kind));
    }
    let forward = kind == Kind::UnstableSpiral;
    let sign = if forward { 1.0 } else { -1.0 };
    let omega = spiral.eigenvalues()[0].im.abs();
    let t_max = opts.max_periods_per_return * std::f64::consts::TAU / omega;
    let rotation = sign * spiral.jac.d_fz_dr.signum();
    let origin = spiral.location();
    let map = ReturnMap {
        mp,
        opts: IntegrateOptions {
            rtol: opts.rtol,
            atol: opts.atol,
            max_steps: 5_000_000,
            reverse_time: !forward,
            ..IntegrateOptions::default()
        },
        section: Section { origin, normal: [0.0, rotation], half_line: Some([1.0, 0.0]) },
        origin,
        t_max,
    };

    let stopped = |reason: TerminalReason, at: [f64; 2], revolutions: usize| match reason {
        TerminalReason::HitBoundary => NoCycle::HitBoundary { revolutions },
        TerminalReason::ConvergedToPoint if (at[0] - origin[0]).hypot(at[1] - origin[1]) < opts.offset * 1e-2 => {
            NoCycle::ReturnedToSpiral { revolutions }
        }
        TerminalReason::ConvergedToPoint => NoCycle::ReachedOtherAttractor { location: at, revolutions },
        _ => NoCycle::NoReturn { revolutions },
    };

    let mut s = opts.offset;
    let mut history: Vec<f64> = vec![s];
    let mut revolutions = 0usize;
    let mut residual = f64::INFINITY;
    while revolutions < opts.max_revolutions {
        let (next, period, orbit) = match map.apply(s)? {
            Return::Hit { s, period, orbit } => (s, period, orbit),
            Return::Stopped(reason, at) => return Err(stopped(reason, at, revolutions)),
        };
        revolutions += 1;
        if next <= opts.offset * 1e-3 {
            return Err(NoCycle::ReturnedToSpiral { revolutions });
        }
        residual = (next - s).abs();
        if residual < opts.residual_tol {
            let enclosed: Vec<[f64; 2]> = find_equilibria(mp, &SolverOptions::for_cross_section(mp.cs))
                .map_err(|e| NoCycle::Integration(e.to_string()))?
                .iter()
                .map(|e| e.location())
                .filter(|&p| winding_number(&orbit, p) != 0)
                .collect();
            let only_spiral =
                enclosed.len() == 1 && (enclosed[0][0] - origin[0]).hypot(enclosed[0][1] - origin[1]) < 1e-6;
            if !only_spiral {
                return Err(NoCycle::WrongEnclosure { enclosed });
            }
            return Ok(LimitCycle {
                r_tilde: mp.r_tilde,
                equilibrium: origin,
                period,
                residual,
                crossing: [origin[0] + s, origin[1]],
                revolutions,
                attracting: forward,
                orbit,
            });
        }
        history.push(next);
        s = next;
        // Aitken extrapolation once the return map is visibly contracting
        if history.len() >= 3 {
            let n = history.len();
            let (x0, x1, x2) = (history[n - 3], history[n - 2], history[n - 1]);
            let q = (x2 - x1) / (x1 - x0);
            if q.is_finite() && q.abs() < 0.95 {
                let acc = x2 + (x2 - x1) * q / (1.0 - q);
                if acc.is_finite() && acc > 0.5 * x2.min(x1) && (acc - x2).abs() < 10.0 * (x2 - x1).abs() {
                    s = acc;
                    history.clear();
                    history.push(s);
                }
            }
        }
    }
    Err(NoCycle::NotConverged { revolutions, residual })
}
