use std::sync::OnceLock;

use zelf::continuation::{
    log_schedule, refine_event, sweep, BifurcationEvent, Criticality, Direction, EventKind, SweepOptions, SweepResult,
};
use zelf::{find_equilibria, find_limit_cycle, CrossSection, Kind, LimitCycleOptions, ModelParams, NoCycle, SolverOptions};

const A: f64 = 0.05;

fn run(cs: CrossSection, low: f64) -> SweepResult {
    sweep(cs, A, &log_schedule(1e5, low, 400), &SweepOptions::for_cross_section(cs)).unwrap()
}

fn wide() -> &'static SweepResult {
    static R: OnceLock<SweepResult> = OnceLock::new();
    R.get_or_init(|| run(CrossSection::Rect2x1, 2.0))
}

fn tall() -> &'static SweepResult {
    static R: OnceLock<SweepResult> = OnceLock::new();
    R.get_or_init(|| run(CrossSection::Rect1x2, 1000.0))
}

fn count_at(res: &SweepResult, r_tilde: f64) -> usize {
    res.states.iter().find(|s| s.r_tilde == r_tilde).expect("bracket ends are sampled states").equilibria.len()
}

fn check_invariants(res: &SweepResult) {
    assert!(res.unresolved.is_empty(), "{:?}", res.unresolved);
    assert!(res.states.windows(2).all(|w| w[1].r_tilde < w[0].r_tilde));
    for s in &res.states {
        for e in &s.equilibria {
            if e.z != 0.0 {
                assert!(s.equilibria.iter().any(|m| m.r == e.r && m.z == -e.z), "unpaired {e:?}");
            }
        }
    }
    // off-axis events come in mirror pairs sharing one bracket
    for e in res.events.iter().filter(|e| !e.is_on_axis()) {
        let twin = res.events.iter().find(|m| {
            m.id != e.id && m.kind == e.kind && m.location[1] == -e.location[1] && m.r_tilde_low == e.r_tilde_low
        });
        assert!(twin.is_some(), "{e:?} has no mirror");
    }
    // count changes by 2 per saddle-node or pitchfork in a bracket
    let mut brackets: Vec<(f64, f64)> = res.events.iter().map(|e| (e.r_tilde_low, e.r_tilde_high)).collect();
    brackets.dedup();
    for (lo, hi) in brackets {
        let inside: Vec<&BifurcationEvent> =
            res.events.iter().filter(|e| e.r_tilde_low == lo && e.r_tilde_high == hi).collect();
        let expected: i64 = inside
            .iter()
            .filter(|e| e.kind != EventKind::Hopf)
            .map(|e| match e.direction {
                Direction::Creation => 2,
                Direction::Annihilation => -2,
                Direction::Exchange => 0,
            })
            .sum();
        assert_eq!(count_at(res, lo) as i64 - count_at(res, hi) as i64, expected, "[{lo}, {hi}]");
    }
    for e in &res.events {
        assert!(e.width() / e.r_tilde_high <= 1e-6 * 1.0001, "{e:?}");
    }
}

#[test]
fn wide_sweep_invariants() {
    check_invariants(wide());
}

#[test]
fn tall_sweep_invariants() {
    check_invariants(tall());
}

fn order(res: &SweepResult) -> Vec<(EventKind, f64, [f64; 2])> {
    let mut v: Vec<_> = res.events.iter().map(|e| (e.kind, e.midpoint(), e.location)).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1));
    v
}

#[test]
fn wide_event_sequence() {
    let res = wide();
    let ev = order(res);
    let kinds: Vec<EventKind> = ev.iter().map(|e| e.0).collect();
    use EventKind::*;
    assert_eq!(kinds, [Pitchfork, Pitchfork, SaddleNode, SaddleNode, SaddleNode, Hopf, Hopf]);
    let right = &res.events.iter().find(|e| e.kind == Pitchfork && e.location[0] > 0.0).unwrap();
    assert!(right.bracket_within(2200.0, 3500.0));
    assert_eq!(right.criticality, Some(Criticality::Subcritical));
    let centre = &res.events.iter().find(|e| e.kind == Pitchfork && e.location[0] < 0.0).unwrap();
    assert!(centre.bracket_within(2050.0, 2100.0));
    assert_eq!(centre.criticality, Some(Criticality::Supercritical));
    // the on-axis fold sits just below the centre pitchfork
    let fold = res.events.iter().find(|e| e.kind == SaddleNode && e.is_on_axis()).unwrap();
    assert!(fold.r_tilde_high < centre.r_tilde_low && fold.bracket_within(2050.0, 2100.0));
    // the top/bottom fold pair follows, then the Hopf pair
    let pair: Vec<_> = res.events.iter().filter(|e| e.kind == SaddleNode && !e.is_on_axis()).collect();
    assert_eq!(pair.len(), 2);
    assert!(pair.iter().all(|e| e.bracket_within(1900.0, 2050.0)));
    assert!(res.events_of(Hopf).all(|e| e.bracket_within(100.0, 1900.0)));

    let last = res.final_state();
    let kinds: Vec<Kind> = last.equilibria.iter().map(|e| e.kind).collect();
    assert_eq!(kinds.iter().filter(|k| **k == Kind::StableSpiral).count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == Kind::Saddle).count(), 1);
    assert_eq!(kinds.len(), 3);
}

#[test]
fn hopf_midpoints_have_imaginary_eigenvalues() {
    for e in wide().events_of(EventKind::Hopf) {
        let mp = ModelParams::full(CrossSection::Rect2x1, A, e.midpoint()).unwrap();
        let eqs = find_equilibria(&mp, &SolverOptions::for_cross_section(CrossSection::Rect2x1)).unwrap();
        let spiral = eqs
            .iter()
            .min_by(|a, b| {
                let d = |q: &zelf::Equilibrium| (q.r - e.location[0]).hypot(q.z - e.location[1]);
                d(a).total_cmp(&d(b))
            })
            .unwrap();
        let l = spiral.eigenvalues()[0];
        assert!(l.re.abs() < 1e-8 && l.im.abs() > 0.0, "{l}");
    }
}

#[test]
fn tall_event_brackets() {
    let res = tall();
    use EventKind::*;
    let pf: Vec<_> = res.events_of(Pitchfork).collect();
    let big = pf.iter().find(|e| e.location[0] > 0.0).unwrap();
    assert!(big.bracket_within(6000.0, 35000.0));
    assert_eq!(big.criticality, Some(Criticality::Supercritical));
    let folds: Vec<_> = res.events_of(SaddleNode).filter(|e| !e.is_on_axis()).collect();
    assert!(folds.iter().filter(|e| e.r_tilde_low > big.r_tilde_high).count() == 2);
    assert!(folds.iter().filter(|e| e.bracket_within(3500.0, 6000.0)).count() == 2);
    assert!(res.events_of(SaddleNode).any(|e| e.is_on_axis()));
    assert!(res.transitions.iter().any(|t| t.to == Kind::UnstableSpiral));

    let last = res.final_state();
    assert_eq!(last.r_tilde, 1000.0);
    let kinds: Vec<Kind> = last.equilibria.iter().map(|e| e.kind).collect();
    assert_eq!(kinds.len(), 3);
    assert_eq!(kinds.iter().filter(|k| **k == Kind::UnstableSpiral).count(), 2);
    assert_eq!(kinds.iter().filter(|k| **k == Kind::Saddle).count(), 1);
}

#[test]
fn refining_a_pitchfork_narrows_its_bracket() {
    let ev = wide().events_of(EventKind::Pitchfork).next().unwrap();
    let solver = SolverOptions::for_cross_section(CrossSection::Rect2x1);
    let coarse = BifurcationEvent { r_tilde_low: ev.r_tilde_low - 5.0, r_tilde_high: ev.r_tilde_high + 5.0, ..ev.clone() };
    let refined = refine_event(CrossSection::Rect2x1, A, &coarse, 1e-4, 1e-8, &solver);
    assert!(refined.event.warning.is_none(), "{:?}", refined.event.warning);
    assert!(refined.event.width() <= 1e-4);
    assert!(refined.event.r_tilde_low >= coarse.r_tilde_low && refined.event.r_tilde_high <= coarse.r_tilde_high);
    assert!(refined.event.r_tilde_high > ev.r_tilde_low && refined.event.r_tilde_low < ev.r_tilde_high);
}

#[test]
fn refining_without_a_sign_change_keeps_the_bracket_and_warns() {
    let ev = wide().events_of(EventKind::Pitchfork).next().unwrap();
    let off = BifurcationEvent { r_tilde_low: 5000.0, r_tilde_high: 6000.0, ..ev.clone() };
    let refined = refine_event(
        CrossSection::Rect2x1,
        A,
        &off,
        1e-3,
        1e-8,
        &SolverOptions::for_cross_section(CrossSection::Rect2x1),
    );
    assert!(refined.event.warning.is_some());
    assert_eq!((refined.event.r_tilde_low, refined.event.r_tilde_high), (5000.0, 6000.0));
}

#[test]
fn sweeps_are_deterministic() {
    let a = run(CrossSection::Rect1x2, 5000.0);
    let b = run(CrossSection::Rect1x2, 5000.0);
    assert_eq!(a, b);
}

#[test]
fn tall_spirals_carry_attracting_cycles() {
    let mp = ModelParams::full(CrossSection::Rect1x2, A, 1000.0).unwrap();
    for e in &tall().final_state().equilibria {
        let res = find_limit_cycle(&mp, e, &LimitCycleOptions::default());
        match e.kind {
            Kind::UnstableSpiral => {
                let c = res.unwrap();
                assert!(c.residual < 1e-8 && c.attracting && c.period > 0.0);
                // the cycle winds once around its own spiral, clockwise or not
                assert!(c.crossing[0] > e.r && c.crossing[1] == e.z);
                assert!(c.orbit.iter().all(|s| mp.cs.contains_strictly(s.r, s.z)));
            }
            _ => assert!(matches!(res, Err(NoCycle::NotASpiral(_)))),
        }
    }
}

#[test]
fn wide_stable_spirals_have_no_cycle_at_small_radius() {
    let mp = ModelParams::full(CrossSection::Rect2x1, A, 100.0).unwrap();
    let eqs = find_equilibria(&mp, &SolverOptions::for_cross_section(CrossSection::Rect2x1)).unwrap();
    let spirals: Vec<_> = eqs.iter().filter(|e| e.kind == Kind::StableSpiral).collect();
    assert_eq!(spirals.len(), 2);
    for s in spirals {
        assert!(find_limit_cycle(&mp, s, &LimitCycleOptions::default()).is_err());
    }
}
