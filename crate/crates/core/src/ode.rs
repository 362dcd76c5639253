//! Trajectory integration.
//!
//! An embedded Dormand–Prince 5(4) pair with standard step-size control does
//! the work. If the step size collapses below `min_step` the remainder of the
//! run switches to a fixed-step implicit midpoint rule, which is A-stable and
//! takes the analytic Jacobian for its Newton iterations.
//!
//! Runs stop early when the particle reaches a wall, when the speed stays below
//! `converge_threshold` for `converge_steps` consecutive accepted steps, or
//! (optionally) when two consecutive returns to a Poincaré line coincide.

use serde::{Deserialize, Serialize};

use crate::dynamics::{velocity, velocity_jacobian, ModelParams};
use crate::error::{Error, Result};
use crate::trajectory::{Sample, TerminalReason, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Step-size floor for the explicit pair; `None` means `1e-13 * max(|t|, 1)`.
    pub min_step: Option<f64>,
    /// Fixed step of the implicit fallback; `None` means the larger of the last
    /// accepted explicit step and `1000 * min_step`.
    pub fallback_step: Option<f64>,
    pub converge_threshold: f64,
    pub converge_steps: usize,
    pub detect_closed_orbit: bool,
    /// Two successive section returns closer than this close the orbit.
    pub closed_orbit_tol: f64,
    /// Integrate the time-reversed flow.
    pub reverse_time: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 2_000_000,
            min_step: None,
            fallback_step: None,
            converge_threshold: 1e-12,
            converge_steps: 10,
            detect_closed_orbit: false,
            closed_orbit_tol: 1e-6,
            reverse_time: false,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { rtol: tol, atol: tol * 1e-2, ..Self::default() }
    }
}

/// Integrates a particle trajectory from `start` up to dimensionless time `t_end`.
pub fn integrate(mp: &ModelParams, start: [f64; 2], t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    mp.cs.check(start[0], start[1])?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::InvalidParameter(format!("t_end must be positive and finite, got {t_end}")));
    }
    let section = if opts.detect_closed_orbit {
        let v = velocity(mp, start[0], start[1]);
        let n = v.norm();
        (n > 0.0).then(|| Section::line(start, [v.fr / n, v.fz / n]))
    } else {
        None
    };
    let run = Integrator::new(mp, opts).run(start, t_end, section.as_ref(), SectionMode::CloseOrbit)?;
    Ok(run.trajectory)
}

/// A line (or half-line) in the plane crossed in the direction of `normal`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Section {
    pub origin: [f64; 2],
    pub normal: [f64; 2],
    /// When set, only crossings on the side of `origin` this vector points to count.
    pub half_line: Option<[f64; 2]>,
}

impl Section {
    pub fn line(origin: [f64; 2], normal: [f64; 2]) -> Self {
        Self { origin, normal, half_line: None }
    }

    fn value(&self, x: [f64; 2]) -> f64 {
        (x[0] - self.origin[0]) * self.normal[0] + (x[1] - self.origin[1]) * self.normal[1]
    }

    fn accepts(&self, x: [f64; 2]) -> bool {
        match self.half_line {
            None => true,
            Some(d) => (x[0] - self.origin[0]) * d[0] + (x[1] - self.origin[1]) * d[1] > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SectionMode {
    /// Stop when two successive crossings coincide.
    CloseOrbit,
    /// Stop at the first crossing.
    FirstReturn,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Crossing {
    pub t: f64,
    pub x: [f64; 2],
}

pub(crate) struct Run {
    pub trajectory: Trajectory,
    pub crossings: Vec<Crossing>,
    /// True when the run ended on a [`SectionMode::FirstReturn`] crossing.
    pub returned: bool,
}

// Dormand–Prince 5(4) tableau; the flow is autonomous so the nodes c_i are not needed
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type V2 = [f64; 2];

#[inline]
fn axpy(x: V2, terms: &[(f64, V2)]) -> V2 {
    let mut out = x;
    for (c, v) in terms {
        out[0] += c * v[0];
        out[1] += c * v[1];
    }
    out
}

pub(crate) struct Integrator<'a> {
    mp: &'a ModelParams,
    opts: &'a IntegrateOptions,
    sign: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(mp: &'a ModelParams, opts: &'a IntegrateOptions) -> Self {
        let sign = if opts.reverse_time { -1.0 } else { 1.0 };
        Self { mp, opts, sign }
    }

    fn f(&self, x: V2) -> V2 {
        let v = velocity(self.mp, x[0], x[1]);
        [self.sign * v.fr, self.sign * v.fz]
    }

    fn speed(v: V2) -> f64 {
        v[0].hypot(v[1])
    }

    /// One explicit step: new state, new slope (first-same-as-last) and error estimate.
    fn dp_step(&self, x: V2, k1: V2, h: f64) -> (V2, V2, V2) {
        let k2 = self.f(axpy(x, &[(h * A21, k1)]));
        let k3 = self.f(axpy(x, &[(h * A31, k1), (h * A32, k2)]));
        let k4 = self.f(axpy(x, &[(h * A41, k1), (h * A42, k2), (h * A43, k3)]));
        let k5 = self.f(axpy(x, &[(h * A51, k1), (h * A52, k2), (h * A53, k3), (h * A54, k4)]));
        let k6 = self.f(axpy(x, &[(h * A61, k1), (h * A62, k2), (h * A63, k3), (h * A64, k4), (h * A65, k5)]));
        let y = axpy(x, &[(h * B1, k1), (h * B3, k3), (h * B4, k4), (h * B5, k5), (h * B6, k6)]);
        let k7 = self.f(y);
        let err = axpy(
            [0.0, 0.0],
            &[(h * E1, k1), (h * E3, k3), (h * E4, k4), (h * E5, k5), (h * E6, k6), (h * E7, k7)],
        );
        (y, k7, err)
    }

    fn err_norm(&self, x: V2, y: V2, err: V2) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = self.opts.atol + self.opts.rtol * x[i].abs().max(y[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    }

    fn initial_step(&self, x: V2, f0: V2, t_end: f64) -> f64 {
        let sc = |i: usize, v: V2| self.opts.atol + self.opts.rtol * v[i].abs();
        let norm = |v: V2, s: V2| (((v[0] / sc(0, s)).powi(2) + (v[1] / sc(1, s)).powi(2)) / 2.0).sqrt();
        let d0 = norm(x, x);
        let d1 = norm(f0, x);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * t_end } else { 0.01 * d0 / d1 };
        let h0 = h0.min(t_end);
        let x1 = axpy(x, &[(h0, f0)]);
        let f1 = self.f(x1);
        let d2 = norm([f1[0] - f0[0], f1[1] - f0[1]], x) / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6 * h0) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(t_end)
    }

    pub fn run(&self, start: V2, t_end: f64, section: Option<&Section>, mode: SectionMode) -> Result<Run> {
        let opts = self.opts;
        let cs = self.mp.cs;
        let floor = |t: f64| opts.min_step.unwrap_or(1e-13 * t.abs().max(1.0));
        let mut samples = vec![Sample { t: 0.0, r: start[0], z: start[1] }];
        let mut crossings: Vec<Crossing> = Vec::new();
        let mut last_return = start;
        let traj = |samples: Vec<Sample>, reason, fallback_at| Trajectory {
            samples,
            terminal_reason: reason,
            reverse_time: opts.reverse_time,
            fallback_at,
        };

        let mut x = start;
        let mut k1 = self.f(x);
        if Self::speed(k1) <= opts.converge_threshold * 1e-3 {
            return Ok(Run {
                trajectory: traj(samples, TerminalReason::ConvergedToPoint, None),
                crossings,
                returned: false,
            });
        }
        let mut t = 0.0;
        let mut h = self.initial_step(x, k1, t_end);
        let mut slow_steps = 0usize;
        let mut steps = 0usize;
        let mut rejected_last = false;
        let mut fallback_at: Option<f64> = None;

        while t < t_end {
            if steps >= opts.max_steps {
                return Err(Error::StepLimit { steps, t, r: x[0], z: x[1] });
            }
            steps += 1;
            let (y, k_new, t_new);
            let mut explicit_step = None;
            if fallback_at.is_none() && h < floor(t) {
                log::debug!("explicit step underflow at t = {t}; switching to implicit midpoint");
                fallback_at = Some(t);
                h = opts.fallback_step.unwrap_or((1e3 * floor(t)).max(h));
            }
            if fallback_at.is_none() {
                let step = h.min(t_end - t);
                let (yy, kk, err) = self.dp_step(x, k1, step);
                let e = self.err_norm(x, yy, err);
                if !(e <= 1.0) {
                    let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).max(0.2) } else { 0.2 };
                    h = step * fac;
                    rejected_last = true;
                    continue;
                }
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let fac = if rejected_last { fac.min(1.0) } else { fac };
                rejected_last = false;
                y = yy;
                k_new = kk;
                t_new = t + step;
                let h_used = step;
                explicit_step = Some(h_used);
                h = h_used * fac;
                // wall contact
                if !cs.contains(y[0], y[1]) {
                    let (tb, xb) = self.locate_wall(x, k1, t, h_used);
                    samples.push(Sample { t: tb, r: xb[0], z: xb[1] });
                    return Ok(Run {
                        trajectory: traj(samples, TerminalReason::HitBoundary, fallback_at),
                        crossings,
                        returned: false,
                    });
                }
            } else {
                let step = h.min(t_end - t);
                let yy = self.midpoint_step(x, step, t)?;
                if !cs.contains(yy[0], yy[1]) {
                    let xb = clamp_to(cs, yy);
                    samples.push(Sample { t: t + step, r: xb[0], z: xb[1] });
                    return Ok(Run {
                        trajectory: traj(samples, TerminalReason::HitBoundary, fallback_at),
                        crossings,
                        returned: false,
                    });
                }
                y = yy;
                k_new = self.f(y);
                t_new = t + step;
            }

            if let Some(sec) = section {
                if sec.value(x) < 0.0 && sec.value(y) >= 0.0 {
                    let c = match explicit_step {
                        Some(h_used) => self.locate_crossing(sec, x, k1, t, h_used),
                        None => {
                            let (fx, fy) = (sec.value(x), sec.value(y));
                            let w = fx / (fx - fy);
                            Crossing { t: t + w * (t_new - t), x: [x[0] + w * (y[0] - x[0]), x[1] + w * (y[1] - x[1])] }
                        }
                    };
                    if sec.accepts(c.x) {
                        crossings.push(c);
                        match mode {
                            SectionMode::FirstReturn => {
                                samples.push(Sample { t: c.t, r: c.x[0], z: c.x[1] });
                                return Ok(Run {
                                    trajectory: traj(samples, TerminalReason::ClosedOrbitDetected, fallback_at),
                                    crossings,
                                    returned: true,
                                });
                            }
                            SectionMode::CloseOrbit => {
                                let gap = (c.x[0] - last_return[0]).hypot(c.x[1] - last_return[1]);
                                last_return = c.x;
                                if gap < opts.closed_orbit_tol {
                                    samples.push(Sample { t: c.t, r: c.x[0], z: c.x[1] });
                                    return Ok(Run {
                                        trajectory: traj(samples, TerminalReason::ClosedOrbitDetected, fallback_at),
                                        crossings,
                                        returned: false,
                                    });
                                }
                            }
                        }
                    }
                }
            }

            x = y;
            k1 = k_new;
            t = t_new;
            samples.push(Sample { t, r: x[0], z: x[1] });

            if Self::speed(k1) < opts.converge_threshold {
                slow_steps += 1;
                if slow_steps >= opts.converge_steps {
                    return Ok(Run {
                        trajectory: traj(samples, TerminalReason::ConvergedToPoint, fallback_at),
                        crossings,
                        returned: false,
                    });
                }
            } else {
                slow_steps = 0;
            }
        }
        Ok(Run { trajectory: traj(samples, TerminalReason::TimeExhausted, fallback_at), crossings, returned: false })
    }

    /// Finds the fraction of a step at which the state leaves the rectangle.
    fn locate_wall(&self, x: V2, k1: V2, t: f64, h: f64) -> (f64, V2) {
        let cs = self.mp.cs;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (y, _, _) = self.dp_step(x, k1, mid * h);
            if cs.contains(y[0], y[1]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (y, _, _) = self.dp_step(x, k1, hi * h);
        (t + hi * h, clamp_to(cs, y))
    }

    /// Locates a section crossing inside an accepted step with the Illinois method,
    /// re-integrating from the step start for each trial fraction.
    fn locate_crossing(&self, sec: &Section, x: V2, k1: V2, t: f64, h: f64) -> Crossing {
        let g = |theta: f64| {
            let (y, _, _) = self.dp_step(x, k1, theta * h);
            (sec.value(y), y)
        };
        let (mut lo, mut flo) = (0.0f64, sec.value(x));
        let (mut hi, (mut fhi, y1)) = (1.0f64, g(1.0));
        let (mut best, mut best_y) = (1.0, y1);
        let mut side = 0i8;
        for _ in 0..80 {
            if fhi == flo || hi - lo < 1e-15 {
                break;
            }
            let c = (lo - flo * (hi - lo) / (fhi - flo)).clamp(lo, hi);
            let (fc, yc) = g(c);
            best = c;
            best_y = yc;
            if fc.abs() < 1e-15 * (1.0 + yc[0].abs() + yc[1].abs()) {
                break;
            }
            if fc * fhi < 0.0 {
                lo = c;
                flo = fc;
                if side == 1 {
                    fhi *= 0.5;
                }
                side = 1;
            } else {
                hi = c;
                fhi = fc;
                if side == -1 {
                    flo *= 0.5;
                }
                side = -1;
            }
        }
        Crossing { t: t + best * h, x: best_y }
    }

    /// Implicit midpoint step `y = x + h f((x + y) / 2)` solved by Newton.
    fn midpoint_step(&self, x: V2, h: f64, t: f64) -> Result<V2> {
        let mut step = h;
        for _ in 0..12 {
            if let Some(y) = self.try_midpoint(x, step) {
                if step == h {
                    return Ok(y);
                }
                // finish the remaining interval with substeps of the reduced size
                let mut cur = y;
                let mut done = step;
                while done < h {
                    let s = step.min(h - done);
                    cur = self.try_midpoint(cur, s).ok_or(Error::Stiffness { t: t + done, r: cur[0], z: cur[1] })?;
                    done += s;
                }
                return Ok(cur);
            }
            step *= 0.5;
        }
        Err(Error::Stiffness { t, r: x[0], z: x[1] })
    }

    fn try_midpoint(&self, x: V2, h: f64) -> Option<V2> {
        let mut y = axpy(x, &[(h, self.f(x))]);
        for _ in 0..30 {
            let m = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            let fm = self.f(m);
            let g = [y[0] - x[0] - h * fm[0], y[1] - x[1] - h * fm[1]];
            let j = velocity_jacobian(self.mp, m[0], m[1]);
            let c = 0.5 * h * self.sign;
            let a11 = 1.0 - c * j.d_fr_dr;
            let a12 = -c * j.d_fr_dz;
            let a21 = -c * j.d_fz_dr;
            let a22 = 1.0 - c * j.d_fz_dz;
            let det = a11 * a22 - a12 * a21;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dy = [(a22 * g[0] - a12 * g[1]) / det, (a11 * g[1] - a21 * g[0]) / det];
            y[0] -= dy[0];
            y[1] -= dy[1];
            if !(y[0].is_finite() && y[1].is_finite()) {
                return None;
            }
            if dy[0].abs().max(dy[1].abs()) <= 1e-14 * (1.0 + y[0].abs().max(y[1].abs())) {
                return Some(y);
            }
        }
        None
    }
}

fn clamp_to(cs: crate::forcefield::CrossSection, y: V2) -> V2 {
    let (w, hh) = (cs.half_width(), cs.half_height());
    [y[0].clamp(-w, w), y[1].clamp(-hh, hh)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcefield::CrossSection;

    #[test]
    fn rejects_start_outside() {
        let mp = ModelParams::full(CrossSection::Rect2x1, 0.05, 100.0).unwrap();
        assert!(integrate(&mp, [2.5, 0.0], 1.0, &IntegrateOptions::default()).is_err());
        assert!(integrate(&mp, [0.0, 0.0], -1.0, &IntegrateOptions::default()).is_err());
    }

    #[test]
    fn exact_equilibrium_stays_put() {
        let mp = ModelParams::lift_only(CrossSection::Rect2x1, 0.05).unwrap();
        let tr = integrate(&mp, [0.0, 0.0], 1e9, &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::ConvergedToPoint);
        assert_eq!(tr.samples.len(), 1);
    }

    #[test]
    fn step_limit_is_reported() {
        let mp = ModelParams::full(CrossSection::Rect2x1, 0.05, 100.0).unwrap();
        let opts = IntegrateOptions { max_steps: 3, ..IntegrateOptions::default() };
        assert!(matches!(integrate(&mp, [0.5, 0.5], 1e9, &opts), Err(Error::StepLimit { .. })));
    }

    #[test]
    fn time_exhausted_when_short() {
        let mp = ModelParams::full(CrossSection::Rect2x1, 0.05, 100.0).unwrap();
        let tr = integrate(&mp, [0.5, 0.5], 10.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.terminal_reason, TerminalReason::TimeExhausted);
        assert_eq!(tr.samples.last().unwrap().t, 10.0);
        assert!(tr.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn long_horizons_do_not_force_the_fallback() {
        // tiny orbit with a slow period: the step floor must not scale with t_end
        let mp = ModelParams::drag_only(CrossSection::Rect1x2, 100.0).unwrap();
        let start = [1e-3, 2.0 / 5f64.sqrt()];
        let opts = IntegrateOptions { detect_closed_orbit: true, ..IntegrateOptions::with_tol(1e-12) };
        let tr = integrate(&mp, start, 1e12, &opts).unwrap();
        assert_eq!(tr.fallback_at, None);
        assert_eq!(tr.terminal_reason, TerminalReason::ClosedOrbitDetected);
    }

    #[test]
    fn closed_orbits_are_detected_under_the_fallback() {
        let mp = ModelParams::drag_only(CrossSection::Rect2x1, 100.0).unwrap();
        let opts = IntegrateOptions {
            min_step: Some(1e30),
            fallback_step: Some(50.0),
            detect_closed_orbit: true,
            closed_orbit_tol: 1e-4,
            ..IntegrateOptions::default()
        };
        let tr = integrate(&mp, [0.3, 0.2], 1e9, &opts).unwrap();
        assert_eq!(tr.fallback_at, Some(0.0));
        assert_eq!(tr.terminal_reason, TerminalReason::ClosedOrbitDetected);
    }

    #[test]
    fn forced_fallback_still_converges() {
        // a step floor above any sensible explicit step forces the implicit rule from the start
        let mp = ModelParams::lift_only(CrossSection::Rect2x1, 1.0).unwrap();
        let opts = IntegrateOptions {
            min_step: Some(1e30),
            fallback_step: Some(20.0),
            ..IntegrateOptions::default()
        };
        let tr = integrate(&mp, [1.2, 0.05], 1e6, &opts).unwrap();
        assert_eq!(tr.fallback_at, Some(0.0));
        assert_eq!(tr.terminal_reason, TerminalReason::ConvergedToPoint);
        let end = tr.samples.last().unwrap();
        assert!((end.r - 1.5799).abs() < 1e-3 && end.z.abs() < 1e-6, "{end:?}");
    }
}
