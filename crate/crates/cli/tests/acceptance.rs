//! End-to-end acceptance checks. Prints one `[PASS]` or `[FAIL]` line per
//! criterion and exits nonzero if any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zelf::analytics::{conic_fit, drag_invariant, eigenvalue_gap};
use zelf::continuation::{log_schedule, sweep, BifurcationEvent, Criticality, EventKind, SweepOptions, SweepResult};
use zelf::forcefield::{drag, drag_jacobian, lift, lift_jacobian};
use zelf::{
    find_equilibria, find_limit_cycle, integrate, CrossSection, Equilibrium, FieldJacobian, FieldVector,
    IntegrateOptions, Kind, LimitCycleOptions, ModelParams, SolverOptions, TerminalReason,
};

const A: f64 = 0.05;
const GOLDEN_TOL: f64 = 1e-3;
const CENTER_TOL: f64 = 1e-10;
const CENTER_EIG_REL_TOL: f64 = 1e-10;
const DRIFT_TOL: f64 = 1e-6;
const FIELD_TOL: f64 = 1e-12;
const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-5;
const CYCLE_RESIDUAL_TOL: f64 = 1e-8;
const CONIC_TOL: f64 = 1e-3;
const BOTH: [CrossSection; 2] = [CrossSection::Rect2x1, CrossSection::Rect1x2];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solve(mp: &ModelParams) -> Vec<Equilibrium> {
    find_equilibria(mp, &SolverOptions::for_cross_section(mp.cs)).expect("equilibrium solve")
}

struct Golden {
    at: [f64; 2],
    kind: Kind,
    lambda: [f64; 2],
    vectors: [[f64; 2]; 2],
}

/// Tabulated lift-only points for the wide duct, coefficients of a^3.
fn wide_goldens() -> Vec<Golden> {
    let axes = [[1.0, 0.0], [0.0, 1.0]];
    let mut g = vec![
        Golden { at: [0.0, 0.0], kind: Kind::UnstableNode, lambda: [0.0110, 0.1373], vectors: axes },
        Golden { at: [1.58, 0.0], kind: Kind::StableNode, lambda: [-0.1059, -0.0094], vectors: axes },
        Golden { at: [-1.58, 0.0], kind: Kind::StableNode, lambda: [-0.1059, -0.0094], vectors: axes },
        Golden { at: [0.0, 0.6], kind: Kind::StableNode, lambda: [-0.0092, -0.2762], vectors: axes },
        Golden { at: [0.0, -0.6], kind: Kind::StableNode, lambda: [-0.0092, -0.2762], vectors: axes },
    ];
    for (sr, sz) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        g.push(Golden {
            at: [sr * 1.5304, sz * 0.4092],
            kind: Kind::Saddle,
            lambda: [-0.0770, 0.0283],
            vectors: [[sr * 0.7380, sz * 0.6748], [sr * 0.5225, -sz * 0.8526]],
        });
    }
    g
}

fn swap(g: Golden) -> Golden {
    Golden {
        at: [g.at[1], g.at[0]],
        kind: g.kind,
        lambda: g.lambda,
        vectors: [[g.vectors[0][1], g.vectors[0][0]], [g.vectors[1][1], g.vectors[1][0]]],
    }
}

fn lift_only_against(cs: CrossSection, table: Vec<Golden>) -> Outcome {
    let start = Instant::now();
    let eqs = solve(&ModelParams::lift_only(cs, A).unwrap());
    let elapsed = start.elapsed();
    ensure(eqs.len() == 9, || format!("{} equilibria, expected 9", eqs.len()))?;
    let cube = A.powi(3);
    let (mut worst_loc, mut worst_eig, mut worst_vec) = (0.0f64, 0.0f64, 0.0f64);
    for g in &table {
        let e = eqs
            .iter()
            .find(|e| (e.r - g.at[0]).abs() < GOLDEN_TOL && (e.z - g.at[1]).abs() < GOLDEN_TOL)
            .ok_or_else(|| format!("no equilibrium within {GOLDEN_TOL} of {:?}", g.at))?;
        worst_loc = worst_loc.max((e.r - g.at[0]).abs()).max((e.z - g.at[1]).abs());
        ensure(e.kind == g.kind, || format!("{:?}: kind {:?}, expected {:?}", g.at, e.kind, g.kind))?;
        let lam = e.eigenvalues();
        let vecs = e.eigen.eigenvectors.ok_or_else(|| format!("{:?}: no real eigenvectors", g.at))?;
        for (gl, gv) in g.lambda.iter().zip(g.vectors) {
            let k = if (lam[0].re / cube - gl).abs() <= (lam[1].re / cube - gl).abs() { 0 } else { 1 };
            worst_eig = worst_eig.max((lam[k].re / cube - gl).abs());
            let v = vecs[k];
            let plus = (v[0] - gv[0]).abs().max((v[1] - gv[1]).abs());
            let minus = (v[0] + gv[0]).abs().max((v[1] + gv[1]).abs());
            worst_vec = worst_vec.max(plus.min(minus));
        }
    }
    ensure(worst_eig < GOLDEN_TOL, || format!("eigenvalue coefficient off by {worst_eig:.2e}"))?;
    ensure(worst_vec < GOLDEN_TOL, || format!("eigenvector off by {worst_vec:.2e}"))?;
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "9 points; max deltas: location {worst_loc:.1e}, eigenvalue {worst_eig:.1e}, eigenvector {worst_vec:.1e}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn c1() -> Outcome {
    lift_only_against(CrossSection::Rect2x1, wide_goldens())
}

fn c2() -> Outcome {
    lift_only_against(CrossSection::Rect1x2, wide_goldens().into_iter().map(swap).collect())
}

fn c3() -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for cs in BOTH {
        let (zc, coeff, c) = match cs {
            CrossSection::Rect2x1 => (1.0 / 5f64.sqrt(), 4.0, 0.02319),
            CrossSection::Rect1x2 => (2.0 / 5f64.sqrt(), 8.0, 0.018542),
        };
        for r_tilde in [10.0, 100.0, 1000.0] {
            let eqs = solve(&ModelParams::drag_only(cs, r_tilde).unwrap());
            ensure(eqs.len() == 2, || format!("{cs} R={r_tilde}: {} centres", eqs.len()))?;
            let quoted = coeff * c / r_tilde * 0.4f64.powf(1.5);
            for e in &eqs {
                let d = e.r.abs().max((e.z.abs() - zc).abs());
                ensure(d < CENTER_TOL, || format!("{cs} R={r_tilde}: centre off by {d:.1e}"))?;
                ensure(e.kind == Kind::Center, || format!("{cs}: kind {:?}", e.kind))?;
                let im = e.eigenvalues()[0].im.abs();
                let rel = (im - quoted).abs() / quoted;
                if rel >= CENTER_EIG_REL_TOL {
                    failures.push(format!("{cs} R={r_tilde}: |Im| {im:.6e} vs quoted {quoted:.6e} (ratio {:.6})", im / quoted));
                }
            }
        }
        notes.push(format!("{cs} centres at (0, +-{zc:.6})"));
    }
    failures.dedup();
    if failures.is_empty() {
        Ok(format!("{}; eigenvalues within {CENTER_EIG_REL_TOL:e} relative", notes.join(", ")))
    } else {
        Err(format!("centres within {CENTER_TOL:e}, but {}", failures.join("; ")))
    }
}

fn random_seeds(cs: CrossSection, n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (cs.half_width(), cs.half_height());
    (0..n)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            [rng.random_range(-0.8 * w..0.8 * w), sign * rng.random_range(0.1 * h..0.8 * h)]
        })
        .collect()
}

fn c4() -> Outcome {
    let opts = IntegrateOptions { detect_closed_orbit: true, ..IntegrateOptions::with_tol(1e-10) };
    let mut worst = 0.0f64;
    for cs in BOTH {
        let mp = ModelParams::drag_only(cs, 100.0).unwrap();
        for seed in random_seeds(cs, 10, 2024) {
            let traj = integrate(&mp, seed, 1e9, &opts).map_err(|e| format!("{cs} {seed:?}: {e}"))?;
            ensure(traj.terminal_reason == TerminalReason::ClosedOrbitDetected, || {
                format!("{cs} {seed:?}: ended with {:?} before a full orbit", traj.terminal_reason)
            })?;
            let drift = traj.max_relative_drift(|r, z| drag_invariant(cs, r, z));
            ensure(drift < DRIFT_TOL, || format!("{cs} {seed:?}: drift {drift:.2e}"))?;
            worst = worst.max(drift);
        }
    }
    Ok(format!("20 closed orbits at tol 1e-10, max drift {worst:.2e} < {DRIFT_TOL:e}"))
}

fn interior_points(cs: CrossSection, n: usize, margin: f64, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (cs.half_width() - margin, cs.half_height() - margin);
    (0..n).map(|_| [rng.random_range(-w..w), rng.random_range(-h..h)]).collect()
}

fn c5() -> Outcome {
    let mut worst_div = 0.0f64;
    let mut worst_parity = 0.0f64;
    for cs in BOTH {
        for [r, z] in interior_points(cs, 1000, 1e-9, 5) {
            let j = drag_jacobian(cs, r, z).unwrap();
            worst_div = worst_div.max((j.d_fr_dr + j.d_fz_dz).abs());
            let l = lift(cs, r, z).unwrap();
            let d = drag(cs, r, z).unwrap();
            let (lr, lz) = (lift(cs, -r, z).unwrap(), lift(cs, r, -z).unwrap());
            let (dr, dz) = (drag(cs, -r, z).unwrap(), drag(cs, r, -z).unwrap());
            for v in [
                l.fr + lr.fr,
                l.fz - lr.fz,
                l.fr - lz.fr,
                l.fz + lz.fz,
                d.fr - dr.fr,
                d.fz + dr.fz,
                d.fr - dz.fr,
                d.fz + dz.fz,
            ] {
                worst_parity = worst_parity.max(v.abs());
            }
        }
    }
    ensure(worst_div < FIELD_TOL, || format!("divergence {worst_div:.2e}"))?;
    ensure(worst_parity < FIELD_TOL, || format!("parity violation {worst_parity:.2e}"))?;
    Ok(format!("2000 points: max |div D| {worst_div:.1e}, max parity violation {worst_parity:.1e}"))
}

fn fd_error(f: impl Fn(f64, f64) -> FieldVector, j: &FieldJacobian, r: f64, z: f64) -> f64 {
    let h = FD_STEP;
    let (rp, rm, zp, zm) = (f(r + h, z), f(r - h, z), f(r, z + h), f(r, z - h));
    let fd = [
        (rp.fr - rm.fr) / (2.0 * h),
        (zp.fr - zm.fr) / (2.0 * h),
        (rp.fz - rm.fz) / (2.0 * h),
        (zp.fz - zm.fz) / (2.0 * h),
    ];
    let an = [j.d_fr_dr, j.d_fr_dz, j.d_fz_dr, j.d_fz_dz];
    let diff: f64 = an.iter().zip(fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = an.iter().map(|a| a * a).sum::<f64>().sqrt();
    diff / norm
}

fn c6() -> Outcome {
    let mut worst = 0.0f64;
    for cs in BOTH {
        for [r, z] in interior_points(cs, 100, 1e-3, 6) {
            let el = fd_error(|a, b| lift(cs, a, b).unwrap(), &lift_jacobian(cs, r, z).unwrap(), r, z);
            let ed = fd_error(|a, b| drag(cs, a, b).unwrap(), &drag_jacobian(cs, r, z).unwrap(), r, z);
            ensure(el < FD_REL_TOL, || format!("{cs} lift at ({r}, {z}): {el:.2e}"))?;
            ensure(ed < FD_REL_TOL, || format!("{cs} drag at ({r}, {z}): {ed:.2e}"))?;
            worst = worst.max(el).max(ed);
        }
    }
    Ok(format!("400 comparisons, max relative error {worst:.2e} < {FD_REL_TOL:e}"))
}

fn timed_sweep(cs: CrossSection, low: f64) -> Result<(SweepResult, Duration), String> {
    let start = Instant::now();
    let res = sweep(cs, A, &log_schedule(1e5, low, 400), &SweepOptions::for_cross_section(cs)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("sweep took {elapsed:?}"))?;
    Ok((res, elapsed))
}

fn describe(e: &BifurcationEvent) -> String {
    format!(
        "{:?} at ({:.3}, {:.3}) in ({:.2}, {:.2})",
        e.kind, e.location[0], e.location[1], e.r_tilde_low, e.r_tilde_high
    )
}

fn sequence(res: &SweepResult) -> Vec<&BifurcationEvent> {
    let mut v: Vec<&BifurcationEvent> = res.events.iter().collect();
    v.sort_by(|a, b| b.midpoint().total_cmp(&a.midpoint()));
    v
}

fn kinds_of(eqs: &[Equilibrium], kind: Kind) -> usize {
    eqs.iter().filter(|e| e.kind == kind).count()
}

fn c7() -> Outcome {
    use EventKind::*;
    let (res, elapsed) = timed_sweep(CrossSection::Rect2x1, 2.0)?;
    let seq = sequence(&res);
    let observed = seq.iter().map(|e| describe(e)).collect::<Vec<_>>().join(" > ");
    let mut problems = Vec::new();

    let first = seq.first().ok_or("no events")?;
    if !(first.kind == Pitchfork && first.location[0] > 0.0 && first.bracket_within(2200.0, 3500.0)) {
        problems.push("first event is not the right-edge pitchfork in (2200, 3500)".to_string());
    }
    let pair: Vec<_> = seq.iter().filter(|e| e.kind == SaddleNode && !e.is_on_axis()).collect();
    if pair.len() != 2 || !pair.iter().all(|e| e.bracket_within(2050.0, 2200.0)) {
        problems.push(format!(
            "top/bottom saddle-node pair not in (2050, 2200): {}",
            pair.iter().map(|e| describe(e)).collect::<Vec<_>>().join(", ")
        ));
    }
    let centre_left: Vec<_> = seq.iter().filter(|e| e.is_on_axis() && e.location[0] < 0.0).collect();
    let has = |k: EventKind| centre_left.iter().any(|e| e.kind == k && e.bracket_within(1900.0, 2050.0));
    if !(has(Pitchfork) && has(SaddleNode)) {
        problems.push(format!(
            "centre-left pitchfork + saddle-node not in (1900, 2050): {}",
            centre_left.iter().map(|e| describe(e)).collect::<Vec<_>>().join(", ")
        ));
    }
    if let (Some(p), Some(c)) = (pair.first(), centre_left.first()) {
        if p.midpoint() < c.midpoint() {
            problems.push("top/bottom saddle-node pair comes after the centre-left events".to_string());
        }
    }
    let hopf: Vec<_> = seq.iter().filter(|e| e.kind == Hopf).collect();
    if hopf.len() != 2 || !hopf.iter().all(|e| e.bracket_within(100.0, 1900.0)) {
        problems.push("Hopf pair not in (100, 1900)".to_string());
    }
    let last = res.final_state();
    if !(last.equilibria.len() == 3
        && kinds_of(&last.equilibria, Kind::StableSpiral) == 2
        && kinds_of(&last.equilibria, Kind::Saddle) == 1)
    {
        problems.push(format!("final state at R={} is not {{2 stable spirals, 1 saddle}}", last.r_tilde));
    }
    if problems.is_empty() {
        Ok(format!("{observed}; final {{2 stable spirals, 1 saddle}}; {:.1}s", elapsed.as_secs_f64()))
    } else {
        Err(format!("{}. Observed: {observed}", problems.join("; ")))
    }
}

fn c8() -> Outcome {
    use EventKind::*;
    let (res, elapsed) = timed_sweep(CrossSection::Rect1x2, 1000.0)?;
    let seq = sequence(&res);
    let observed = seq.iter().map(|e| describe(e)).collect::<Vec<_>>().join(" > ");
    let pf = seq
        .iter()
        .find(|e| e.kind == Pitchfork && e.bracket_within(6000.0, 35000.0))
        .ok_or_else(|| format!("no pitchfork in (6000, 35000). Observed: {observed}"))?;
    ensure(pf.criticality == Some(Criticality::Supercritical), || format!("{} is not supercritical", describe(pf)))?;
    let pairs_above = seq.iter().filter(|e| e.kind == SaddleNode && !e.is_on_axis() && e.r_tilde_low > pf.r_tilde_high);
    ensure(pairs_above.count() == 2, || format!("no saddle-node pair above the pitchfork. Observed: {observed}"))?;
    let pair_below: Vec<_> =
        seq.iter().filter(|e| e.kind == SaddleNode && !e.is_on_axis() && e.bracket_within(3500.0, 6000.0)).collect();
    ensure(pair_below.len() == 2, || format!("no saddle-node pair in (3500, 6000). Observed: {observed}"))?;
    let floor = pair_below[0].r_tilde_low;
    let centre = |k: EventKind| seq.iter().any(|e| e.kind == k && e.is_on_axis() && e.r_tilde_high < floor);
    ensure(centre(Pitchfork) && centre(SaddleNode), || format!("no centre pitchfork + saddle-node. Observed: {observed}"))?;
    ensure(res.transitions.iter().any(|t| t.to == Kind::UnstableSpiral), || "no unstable-spiral transition".into())?;

    let last = res.final_state();
    ensure(last.r_tilde == 1000.0, || format!("sweep ended at {}", last.r_tilde))?;
    let eqs = &last.equilibria;
    ensure(eqs.len() == 3 && kinds_of(eqs, Kind::UnstableSpiral) == 2 && kinds_of(eqs, Kind::Saddle) == 1, || {
        format!("state at 1000: {:?}", eqs.iter().map(|e| e.kind).collect::<Vec<_>>())
    })?;
    let mp = ModelParams::full(CrossSection::Rect1x2, A, 1000.0).unwrap();
    let mut worst = 0.0f64;
    for e in eqs.iter().filter(|e| e.kind == Kind::UnstableSpiral) {
        let c = find_limit_cycle(&mp, e, &LimitCycleOptions::default())
            .map_err(|n| format!("no cycle around ({:.4}, {:.4}): {n}", e.r, e.z))?;
        ensure(c.residual < CYCLE_RESIDUAL_TOL, || format!("return residual {:.2e}", c.residual))?;
        worst = worst.max(c.residual);
    }
    Ok(format!(
        "{observed}; 2 certified cycles at R=1000, max residual {worst:.1e}; {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn c9() -> Outcome {
    let mut notes = Vec::new();
    for cs in BOTH {
        let k = match cs {
            CrossSection::Rect2x1 => 25.0 / 2.0,
            CrossSection::Rect1x2 => 25.0 / 32.0,
        };
        let mp = ModelParams::drag_only(cs, 100.0).unwrap();
        let opts = IntegrateOptions { detect_closed_orbit: true, ..IntegrateOptions::with_tol(1e-12) };
        let mut worst = 0.0f64;
        for centre in solve(&mp).iter().map(|e| e.location()) {
            let traj = integrate(&mp, [centre[0] + 1e-3, centre[1]], 1e12, &opts).map_err(|e| e.to_string())?;
            ensure(traj.terminal_reason == TerminalReason::ClosedOrbitDetected, || {
                format!("{cs}: orbit ended with {:?}", traj.terminal_reason)
            })?;
            let pts: Vec<[f64; 2]> = traj.samples.iter().map(|s| [s.r, s.z]).collect();
            let (_, resid) = conic_fit(&pts, centre, k);
            worst = worst.max(resid);
        }
        ensure(worst < CONIC_TOL, || format!("{cs}: conic residual {worst:.2e} with k = {k}"))?;
        notes.push(format!("{cs} k={k} residual {worst:.1e}"));
    }
    Ok(notes.join(", "))
}

fn c10() -> Outcome {
    let eqs = solve(&ModelParams::lift_only(CrossSection::Rect2x1, A).unwrap());
    let top: Vec<f64> =
        eqs.iter().filter(|e| e.r.abs() < 1e-9 && (e.z.abs() - 0.6).abs() < GOLDEN_TOL).map(eigenvalue_gap).collect();
    let saddles: Vec<f64> = eqs.iter().filter(|e| e.kind == Kind::Saddle).map(eigenvalue_gap).collect();
    ensure(top.len() == 2 && saddles.len() == 4, || "missing equilibria".into())?;
    ensure(top.iter().all(|g| *g > 25.0), || format!("gaps at (0, +-0.6): {top:?}"))?;
    ensure(saddles.iter().all(|g| (2.5..=3.0).contains(g)), || format!("saddle gaps: {saddles:?}"))?;
    Ok(format!("(0, +-0.6): {:.2} > 25; saddles: {:.3} in [2.5, 3.0]", top[0], saddles[0]))
}

fn c11() -> Outcome {
    let base = std::env::temp_dir().join(format!("zelf-acceptance-{}", std::process::id()));
    let dirs = [base.join("a"), base.join("b")];
    for d in &dirs {
        let out = Command::new(env!("CARGO_BIN_EXE_zelf"))
            .args(["sweep", "--cross-section", "2x1", "--r-schedule", "2:100000:200", "--out"])
            .arg(d)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    }
    let mut sizes = Vec::new();
    for name in ["diagram.csv", "events.json"] {
        let a = std::fs::read(dirs[0].join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].join(name)).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name} differs between runs"))?;
        sizes.push(format!("{name} {} bytes", a.len()));
    }
    let _ = std::fs::remove_dir_all(&base);
    Ok(format!("two sweeps identical: {}", sizes.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("C1", "lift-only equilibria, 2x1", c1),
        ("C2", "lift-only equilibria, 1x2", c2),
        ("C3", "drag-only centres and eigenvalues", c3),
        ("C4", "conservation along drag-only orbits", c4),
        ("C5", "divergence-free drag and parity", c5),
        ("C6", "Jacobians vs finite differences", c6),
        ("C7", "bifurcation sequence, 2x1", c7),
        ("C8", "bifurcation sequence and limit cycles, 1x2", c8),
        ("C9", "local ellipses about the centres", c9),
        ("C10", "slow-manifold eigenvalue gaps", c10),
        ("C11", "sweep determinism", c11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title} ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {title} ({secs:.1}s): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
