//! Natural-parameter continuation in the bend radius.
//!
//! Every point of a descending schedule gets a full multistart solve, warm
//! seeded from its neighbours. Whenever two consecutive states differ (count,
//! stability class, or an ambiguous nearest-neighbour match) the interval is
//! bisected until it is narrower than a relative tolerance. Each remaining
//! difference is then read off the bracket endpoints and labelled as a
//! saddle-node, pitchfork or Hopf event, or as a node/spiral transition.
//! Anything else is kept as an unresolved change rather than guessed at.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelParams, Regime};
use crate::equilibria::{
    classify_strict, find_equilibria_seeded, newton, solve_from, Equilibrium, Kind, SeedGrid, SolverOptions,
};
use crate::error::{Error, Result};
use crate::forcefield::CrossSection;

/// Largest bend radius a schedule may contain.
pub const MAX_BEND_RADIUS: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    /// Run the full seed grid on every n-th scheduled point; other points use warm seeds only.
    pub reseed_interval: usize,
    /// Bisection stops once `(high - low) / high` is below this.
    pub bracket_rel_tol: f64,
    /// Equilibria further apart than this are never matched between states.
    pub match_radius: f64,
    /// Equilibria taking part in one event lie within this distance of each other.
    pub event_radius: f64,
    /// A match is ambiguous when a rival candidate is closer than this multiple of the chosen distance.
    pub ambiguity_ratio: f64,
    /// Tighten Hopf brackets until the real part at the midpoint is below `hopf_tol`.
    pub refine_hopf: bool,
    pub hopf_tol: f64,
}

impl SweepOptions {
    pub fn for_cross_section(cs: CrossSection) -> Self {
        Self {
            solver: SolverOptions::for_cross_section(cs),
            reseed_interval: 1,
            bracket_rel_tol: 1e-6,
            match_radius: 0.05,
            event_radius: 0.1,
            ambiguity_ratio: 4.0,
            refine_hopf: true,
            hopf_tol: 1e-10,
        }
    }
}

/// `n` logarithmically spaced bend radii from `high` down to `low`.
pub fn log_schedule(high: f64, low: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![high];
    }
    let (lh, ll) = (high.ln(), low.ln());
    (0..n)
        .map(|i| match i {
            0 => high,
            _ if i == n - 1 => low,
            _ => (lh + (ll - lh) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

/// The default schedule: 400 logarithmically spaced radii from 1e5 to the minimum bend radius.
pub fn default_schedule(cs: CrossSection) -> Vec<f64> {
    log_schedule(1e5, cs.min_bend_radius(), 400)
}

pub fn validate_schedule(cs: CrossSection, schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty bend-radius schedule".into()));
    }
    for &r in schedule {
        if !(r.is_finite() && r >= cs.min_bend_radius() && r <= MAX_BEND_RADIUS) {
            return Err(Error::InvalidParameter(format!(
                "bend radius {r} outside [{}, {MAX_BEND_RADIUS:e}]",
                cs.min_bend_radius()
            )));
        }
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("bend-radius schedule must be strictly descending".into()));
    }
    Ok(())
}

/// All equilibria found at one bend radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepState {
    pub r_tilde: f64,
    pub equilibria: Vec<Equilibrium>,
    /// False for states inserted by bisection.
    pub scheduled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    SaddleNode,
    Pitchfork,
    Hopf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

/// What happens to the participating equilibria as the bend radius decreases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Creation,
    Annihilation,
    /// Count unchanged (Hopf).
    Exchange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub id: usize,
    pub kind: EventKind,
    pub r_tilde_low: f64,
    pub r_tilde_high: f64,
    pub branches: Vec<usize>,
    /// Pitchforks only: supercritical when the off-axis pair are not saddles.
    pub criticality: Option<Criticality>,
    /// On-axis point (pitchfork), midpoint of the colliding pair (saddle-node) or the spiral (Hopf).
    pub location: [f64; 2],
    pub direction: Direction,
    pub warning: Option<String>,
}

impl BifurcationEvent {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.r_tilde_low + self.r_tilde_high)
    }

    pub fn width(&self) -> f64 {
        self.r_tilde_high - self.r_tilde_low
    }

    pub fn is_on_axis(&self) -> bool {
        self.location[1] == 0.0
    }

    /// True when the bracket lies inside the open interval `(low, high)`.
    pub fn bracket_within(&self, low: f64, high: f64) -> bool {
        self.r_tilde_low > low && self.r_tilde_high < high
    }
}

/// A node turning into a spiral (or back) without a change in stability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindTransition {
    pub id: usize,
    pub r_tilde_low: f64,
    pub r_tilde_high: f64,
    pub from: Kind,
    pub to: Kind,
    pub location: [f64; 2],
    pub branches: [usize; 2],
}

/// A difference between adjacent states that fits none of the known patterns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedChange {
    pub id: usize,
    pub r_tilde_low: f64,
    pub r_tilde_high: f64,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "id")]
pub enum BranchLink {
    Event(usize),
    Transition(usize),
    Unresolved(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub r_tilde: f64,
    pub equilibrium: Equilibrium,
}

/// One equilibrium followed across bend radii. Its sign-based stability class is constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub kind: Kind,
    pub samples: Vec<BranchSample>,
    pub birth: Option<BranchLink>,
    pub death: Option<BranchLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cross_section: CrossSection,
    pub a_tilde: f64,
    pub states: Vec<SweepState>,
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
    pub transitions: Vec<KindTransition>,
    pub unresolved: Vec<UnresolvedChange>,
}

impl SweepResult {
    pub fn scheduled_states(&self) -> impl Iterator<Item = &SweepState> {
        self.states.iter().filter(|s| s.scheduled)
    }

    pub fn final_state(&self) -> &SweepState {
        self.states.last().expect("a sweep has at least one state")
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &BifurcationEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

fn strict(e: &Equilibrium) -> Kind {
    classify_strict(e.eigenvalues(), Regime::Full)
}

fn z_class(e: &Equilibrium) -> i8 {
    if e.z == 0.0 {
        0
    } else if e.z > 0.0 {
        1
    } else {
        -1
    }
}

fn is_saddle(e: &Equilibrium) -> bool {
    e.jac.determinant() < 0.0
}

fn mp_at(cs: CrossSection, a_tilde: f64, r_tilde: f64) -> ModelParams {
    ModelParams { cs, a_tilde, r_tilde, drag_only: false }
}

/// Seeds on small rings around each known equilibrium, so that pairs born
/// next to an existing point are found before they drift apart.
fn ring_seeds(cs: CrossSection, around: &[&Equilibrium]) -> Vec<[f64; 2]> {
    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;
    const RADII: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 5e-2];
    const DIRS: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [S, S],
        [S, -S],
        [-S, S],
        [-S, -S],
    ];
    let mut seeds = Vec::with_capacity(around.len() * (1 + RADII.len() * DIRS.len()));
    for e in around {
        seeds.push([e.r, e.z]);
        for rad in RADII {
            for d in DIRS {
                let p = [e.r + rad * d[0], e.z + rad * d[1]];
                if cs.contains_strictly(p[0], p[1]) {
                    seeds.push(p);
                }
            }
        }
    }
    seeds
}

fn solve_state(
    cs: CrossSection,
    a_tilde: f64,
    r_tilde: f64,
    opts: &SweepOptions,
    warm: &[&SweepState],
    full_grid: bool,
    scheduled: bool,
) -> Result<SweepState> {
    let mp = mp_at(cs, a_tilde, r_tilde);
    let near: Vec<&Equilibrium> = warm.iter().flat_map(|s| s.equilibria.iter()).collect();
    let seeds = ring_seeds(cs, &near);
    let equilibria = if full_grid || near.is_empty() {
        find_equilibria_seeded(&mp, &opts.solver, &seeds)?
    } else {
        solve_from(&mp, &opts.solver, &seeds)
    };
    Ok(SweepState { r_tilde, equilibria, scheduled })
}

/// Nearest-neighbour correspondence between two states.
#[derive(Debug, Clone, Default)]
struct Matching {
    pairs: Vec<(usize, usize)>,
    deaths: Vec<usize>,
    births: Vec<usize>,
    ambiguous: bool,
}

fn match_states(a: &[Equilibrium], b: &[Equilibrium], radius: f64, ratio: f64) -> Matching {
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for (i, ea) in a.iter().enumerate() {
        for (j, eb) in b.iter().enumerate() {
            if z_class(ea) != z_class(eb) {
                continue;
            }
            let d = ea.distance_to(eb);
            if d < radius {
                cands.push((d, i, j));
            }
        }
    }
    cands.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut m = Matching::default();
    for &(_, i, j) in &cands {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            m.pairs.push((i, j));
        }
    }
    for &(i, j) in &m.pairs {
        let d = a[i].distance_to(&b[j]);
        let limit = ratio * d.max(1e-12);
        let rival = cands.iter().any(|&(dc, ic, jc)| ((ic == i) != (jc == j)) && dc < limit);
        if rival {
            m.ambiguous = true;
        }
    }
    m.deaths = (0..a.len()).filter(|&i| !used_a[i]).collect();
    m.births = (0..b.len()).filter(|&j| !used_b[j]).collect();
    m
}

fn differs(a: &SweepState, b: &SweepState, opts: &SweepOptions) -> bool {
    if a.equilibria.len() != b.equilibria.len() {
        return true;
    }
    let m = match_states(&a.equilibria, &b.equilibria, opts.match_radius, opts.ambiguity_ratio);
    m.ambiguous
        || !m.deaths.is_empty()
        || !m.births.is_empty()
        || m.pairs.iter().any(|&(i, j)| strict(&a.equilibria[i]) != strict(&b.equilibria[j]))
}

struct Sweeper<'a> {
    cs: CrossSection,
    a_tilde: f64,
    opts: &'a SweepOptions,
    chain: Vec<SweepState>,
}

impl Sweeper<'_> {
    /// Appends `b` to the chain, inserting bisection states between the current tail and `b` as needed.
    fn advance(&mut self, b: SweepState) -> Result<()> {
        let mut pending = vec![b];
        while let Some(hi_side) = pending.pop() {
            let a = self.chain.last().expect("chain is seeded");
            let width = a.r_tilde - hi_side.r_tilde;
            if width > self.opts.bracket_rel_tol * a.r_tilde && differs(a, &hi_side, self.opts) {
                let mid = (a.r_tilde * hi_side.r_tilde).sqrt();
                if mid < a.r_tilde && mid > hi_side.r_tilde {
                    let m = solve_state(self.cs, self.a_tilde, mid, self.opts, &[a, &hi_side], true, false)?;
                    pending.push(hi_side);
                    pending.push(m);
                    continue;
                }
            }
            self.chain.push(hi_side);
        }
        Ok(())
    }
}

/// Follows the equilibria of the full model at particle size `a_tilde` down a descending bend-radius schedule.
pub fn sweep(cs: CrossSection, a_tilde: f64, schedule: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    validate_schedule(cs, schedule)?;
    ModelParams::full(cs, a_tilde, schedule[0])?;
    if opts.reseed_interval == 0 {
        return Err(Error::InvalidParameter("reseed interval must be at least 1".into()));
    }
    let first = solve_state(cs, a_tilde, schedule[0], opts, &[], true, true)?;
    let mut sw = Sweeper { cs, a_tilde, opts, chain: vec![first] };
    for (k, &r) in schedule.iter().enumerate().skip(1) {
        let prev = sw.chain.last().expect("chain is seeded");
        let full = k % opts.reseed_interval == 0;
        let s = solve_state(cs, a_tilde, r, opts, &[prev], full, true)?;
        sw.advance(s)?;
    }
    let mut result = assemble(cs, a_tilde, sw.chain, opts);
    if opts.refine_hopf {
        let solver = opts.solver;
        for ev in result.events.iter_mut().filter(|e| e.kind == EventKind::Hopf) {
            let refined = refine_event(cs, a_tilde, ev, ev.width(), opts.hopf_tol, &solver);
            *ev = refined.event;
        }
    }
    Ok(result)
}

/// What a single bracket shows once its endpoints are compared.
enum Change {
    Pitchfork { axis: (usize, usize), pair: [usize; 2], created: bool, criticality: Criticality },
    SaddleNode { pair: [usize; 2], created: bool },
    Hopf { pair: (usize, usize) },
    Transition { pair: (usize, usize) },
    Unresolved(String),
}

fn classify_bracket(a: &SweepState, b: &SweepState, m: &Matching, opts: &SweepOptions) -> Vec<Change> {
    let (ea, eb) = (&a.equilibria, &b.equilibria);
    let mut changes = Vec::new();
    let mut deaths: Vec<usize> = m.deaths.clone();
    let mut births: Vec<usize> = m.births.clone();
    let mut kind_changes: Vec<(usize, usize)> =
        m.pairs.iter().copied().filter(|&(i, j)| strict(&ea[i]) != strict(&eb[j])).collect();

    // pitchforks: an on-axis point changes index while a mirror pair appears or vanishes beside it
    let mut k = 0;
    while k < kind_changes.len() {
        let (i, j) = kind_changes[k];
        let index_flip = is_saddle(&ea[i]) != is_saddle(&eb[j]);
        if ea[i].z != 0.0 || !index_flip {
            k += 1;
            continue;
        }
        let find_pair = |pool: &[usize], eqs: &[Equilibrium], centre: &Equilibrium| -> Option<[usize; 2]> {
            for (x, &p) in pool.iter().enumerate() {
                for &q in &pool[x + 1..] {
                    let (ep, eq) = (&eqs[p], &eqs[q]);
                    let mirror = ep.z == -eq.z && ep.z != 0.0 && (ep.r - eq.r).abs() <= 1e-12 * (1.0 + ep.r.abs());
                    if mirror && ep.distance_to(centre) < opts.event_radius {
                        return Some(if ep.z > 0.0 { [p, q] } else { [q, p] });
                    }
                }
            }
            None
        };
        let found = find_pair(&deaths, ea, &ea[i])
            .map(|p| (p, false))
            .or_else(|| find_pair(&births, eb, &eb[j]).map(|p| (p, true)));
        if let Some((pair, created)) = found {
            let eqs = if created { eb } else { ea };
            let pool = if created { &mut births } else { &mut deaths };
            pool.retain(|x| !pair.contains(x));
            let criticality = if is_saddle(&eqs[pair[0]]) { Criticality::Subcritical } else { Criticality::Supercritical };
            changes.push(Change::Pitchfork { axis: (i, j), pair, created, criticality });
            kind_changes.remove(k);
        } else {
            k += 1;
        }
    }

    // saddle-nodes: a saddle and a non-saddle of the same class collide
    for (pool, eqs, created) in [(&mut deaths, ea, false), (&mut births, eb, true)] {
        loop {
            let mut best: Option<(f64, usize, usize)> = None;
            for (x, &p) in pool.iter().enumerate() {
                for &q in &pool[x + 1..] {
                    let (ep, eq) = (&eqs[p], &eqs[q]);
                    if z_class(ep) != z_class(eq) || is_saddle(ep) == is_saddle(eq) {
                        continue;
                    }
                    let d = ep.distance_to(eq);
                    if d < opts.event_radius && best.is_none_or(|b| d < b.0) {
                        best = Some((d, p, q));
                    }
                }
            }
            let Some((_, p, q)) = best else { break };
            pool.retain(|&x| x != p && x != q);
            changes.push(Change::SaddleNode { pair: [p, q], created });
        }
    }

    for (i, j) in kind_changes {
        let (ka, kb) = (strict(&ea[i]), strict(&eb[j]));
        let change = match (ka, kb) {
            (Kind::StableSpiral, Kind::UnstableSpiral) | (Kind::UnstableSpiral, Kind::StableSpiral) => {
                Change::Hopf { pair: (i, j) }
            }
            (Kind::StableNode, Kind::StableSpiral)
            | (Kind::StableSpiral, Kind::StableNode)
            | (Kind::UnstableNode, Kind::UnstableSpiral)
            | (Kind::UnstableSpiral, Kind::UnstableNode) => Change::Transition { pair: (i, j) },
            _ => Change::Unresolved(format!(
                "{} at ({:.6}, {:.6}) became {} without a matching birth or death",
                ka.label(),
                ea[i].r,
                ea[i].z,
                kb.label()
            )),
        };
        changes.push(change);
    }
    for &i in &deaths {
        changes.push(Change::Unresolved(format!(
            "unpaired {} at ({:.6}, {:.6}) vanished",
            strict(&ea[i]).label(),
            ea[i].r,
            ea[i].z
        )));
    }
    for &j in &births {
        changes.push(Change::Unresolved(format!(
            "unpaired {} at ({:.6}, {:.6}) appeared",
            strict(&eb[j]).label(),
            eb[j].r,
            eb[j].z
        )));
    }
    if m.ambiguous && changes.iter().any(|c| matches!(c, Change::Unresolved(_))) {
        changes.push(Change::Unresolved("ambiguous branch matching inside the bracket".into()));
    }
    changes
}

struct Builder {
    branches: Vec<Branch>,
    events: Vec<BifurcationEvent>,
    transitions: Vec<KindTransition>,
    unresolved: Vec<UnresolvedChange>,
}

impl Builder {
    fn open(&mut self, r_tilde: f64, e: &Equilibrium, birth: Option<BranchLink>) -> usize {
        let id = self.branches.len();
        self.branches.push(Branch {
            id,
            kind: strict(e),
            samples: vec![BranchSample { r_tilde, equilibrium: *e }],
            birth,
            death: None,
        });
        id
    }
}

fn midpoint(a: &Equilibrium, b: &Equilibrium) -> [f64; 2] {
    [0.5 * (a.r + b.r), 0.5 * (a.z + b.z)]
}

fn assemble(cs: CrossSection, a_tilde: f64, chain: Vec<SweepState>, opts: &SweepOptions) -> SweepResult {
    let mut bld = Builder { branches: Vec::new(), events: Vec::new(), transitions: Vec::new(), unresolved: Vec::new() };
    let mut owner: Vec<usize> =
        chain[0].equilibria.iter().map(|e| bld.open(chain[0].r_tilde, e, None)).collect();

    for w in chain.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (lo, hi) = (b.r_tilde, a.r_tilde);
        let m = match_states(&a.equilibria, &b.equilibria, opts.match_radius, opts.ambiguity_ratio);
        let mut next: Vec<Option<usize>> = vec![None; b.equilibria.len()];
        let mut link_b: Vec<Option<BranchLink>> = vec![None; b.equilibria.len()];
        let mut closed = vec![false; a.equilibria.len()];

        let any_change = !m.deaths.is_empty()
            || !m.births.is_empty()
            || m.pairs.iter().any(|&(i, j)| strict(&a.equilibria[i]) != strict(&b.equilibria[j]));
        if any_change {
            for change in classify_bracket(a, b, &m, opts) {
                match change {
                    Change::Pitchfork { axis, pair, created, criticality } => {
                        let id = bld.events.len();
                        let link = BranchLink::Event(id);
                        let mut branches = vec![owner[axis.0]];
                        closed[axis.0] = true;
                        bld.branches[owner[axis.0]].death = Some(link);
                        link_b[axis.1] = Some(link);
                        if created {
                            for &p in &pair {
                                link_b[p] = Some(link);
                            }
                        } else {
                            for &p in &pair {
                                closed[p] = true;
                                bld.branches[owner[p]].death = Some(link);
                                branches.push(owner[p]);
                            }
                        }
                        bld.events.push(BifurcationEvent {
                            id,
                            kind: EventKind::Pitchfork,
                            r_tilde_low: lo,
                            r_tilde_high: hi,
                            branches,
                            criticality: Some(criticality),
                            location: [a.equilibria[axis.0].r, 0.0],
                            direction: if created { Direction::Creation } else { Direction::Annihilation },
                            warning: None,
                        });
                    }
                    Change::SaddleNode { pair, created } => {
                        let id = bld.events.len();
                        let link = BranchLink::Event(id);
                        let mut branches = Vec::new();
                        let location = if created {
                            for &p in &pair {
                                link_b[p] = Some(link);
                            }
                            midpoint(&b.equilibria[pair[0]], &b.equilibria[pair[1]])
                        } else {
                            for &p in &pair {
                                closed[p] = true;
                                bld.branches[owner[p]].death = Some(link);
                                branches.push(owner[p]);
                            }
                            midpoint(&a.equilibria[pair[0]], &a.equilibria[pair[1]])
                        };
                        bld.events.push(BifurcationEvent {
                            id,
                            kind: EventKind::SaddleNode,
                            r_tilde_low: lo,
                            r_tilde_high: hi,
                            branches,
                            criticality: None,
                            location,
                            direction: if created { Direction::Creation } else { Direction::Annihilation },
                            warning: None,
                        });
                    }
                    Change::Hopf { pair: (i, j) } => {
                        let id = bld.events.len();
                        let link = BranchLink::Event(id);
                        closed[i] = true;
                        bld.branches[owner[i]].death = Some(link);
                        link_b[j] = Some(link);
                        bld.events.push(BifurcationEvent {
                            id,
                            kind: EventKind::Hopf,
                            r_tilde_low: lo,
                            r_tilde_high: hi,
                            branches: vec![owner[i]],
                            criticality: None,
                            location: a.equilibria[i].location(),
                            direction: Direction::Exchange,
                            warning: None,
                        });
                    }
                    Change::Transition { pair: (i, j) } => {
                        let id = bld.transitions.len();
                        let link = BranchLink::Transition(id);
                        closed[i] = true;
                        bld.branches[owner[i]].death = Some(link);
                        link_b[j] = Some(link);
                        bld.transitions.push(KindTransition {
                            id,
                            r_tilde_low: lo,
                            r_tilde_high: hi,
                            from: strict(&a.equilibria[i]),
                            to: strict(&b.equilibria[j]),
                            location: a.equilibria[i].location(),
                            branches: [owner[i], usize::MAX],
                        });
                    }
                    Change::Unresolved(description) => {
                        log::warn!("unresolved change between R = {hi} and {lo}: {description}");
                        let id = bld.unresolved.len();
                        bld.unresolved.push(UnresolvedChange { id, r_tilde_low: lo, r_tilde_high: hi, description });
                    }
                }
            }
        }

        let unresolved_here = bld.unresolved.last().filter(|u| u.r_tilde_high == hi).map(|u| BranchLink::Unresolved(u.id));
        for &(i, j) in &m.pairs {
            if !closed[i] && strict(&a.equilibria[i]) == strict(&b.equilibria[j]) {
                let id = owner[i];
                bld.branches[id].samples.push(BranchSample { r_tilde: b.r_tilde, equilibrium: b.equilibria[j] });
                next[j] = Some(id);
                closed[i] = true;
            }
        }
        for (i, done) in closed.iter().enumerate() {
            if !done {
                bld.branches[owner[i]].death = unresolved_here;
            }
        }
        for (j, slot) in next.iter_mut().enumerate() {
            if slot.is_none() {
                let link = link_b[j].or(unresolved_here);
                let id = bld.open(b.r_tilde, &b.equilibria[j], link);
                *slot = Some(id);
                match link {
                    Some(BranchLink::Transition(t)) => bld.transitions[t].branches[1] = id,
                    Some(BranchLink::Event(e)) => bld.events[e].branches.push(id),
                    _ => {}
                }
            }
        }
        owner = next.into_iter().map(|x| x.expect("every equilibrium has a branch")).collect();
    }

    SweepResult {
        cross_section: cs,
        a_tilde,
        states: chain,
        branches: bld.branches,
        events: bld.events,
        transitions: bld.transitions,
        unresolved: bld.unresolved,
    }
}

/// An event with a tightened bracket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedEvent {
    pub event: BifurcationEvent,
    /// Equilibria taking part in the event, evaluated at the bracket midpoint.
    pub at_midpoint: Vec<Equilibrium>,
}

/// Equilibrium of the same symmetry class closest to `near`, from Newton seeded there.
fn track(mp: &ModelParams, near: [f64; 2], solver: &SolverOptions) -> Option<Equilibrium> {
    let x = newton(mp, near, solver)?;
    let z = if near[1] == 0.0 { 0.0 } else { x[1] };
    if (near[1] > 0.0 && z <= 0.0) || (near[1] < 0.0 && z >= 0.0) {
        return None;
    }
    Some(Equilibrium::at_unchecked(mp, x[0], z))
}

/// Equilibria of the same symmetry class as `centre` within `radius` of it.
fn local_roots(mp: &ModelParams, centre: [f64; 2], radius: f64, extra: &[[f64; 2]], solver: &SolverOptions) -> Vec<Equilibrium> {
    let mut seeds: Vec<[f64; 2]> = extra.to_vec();
    let n = 9;
    for i in 0..n {
        for k in 0..n {
            let dr = radius * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
            let dz = if centre[1] == 0.0 { 0.0 } else { radius * (2.0 * k as f64 / (n - 1) as f64 - 1.0) };
            let p = [centre[0] + dr, centre[1] + dz];
            if mp.cs.contains_strictly(p[0], p[1]) {
                seeds.push(p);
            }
        }
    }
    let class = |z: f64| if z == 0.0 { 0 } else if z > 0.0 { 1 } else { -1 };
    let want = class(centre[1]);
    solve_from(mp, &SolverOptions { grid: SeedGrid::square(SeedGrid::MIN_PER_AXIS), ..*solver }, &seeds)
        .into_iter()
        .filter(|e| class(e.z) == want && (e.r - centre[0]).hypot(e.z - centre[1]) < radius)
        .collect()
}

/// Tightens an event bracket by bisection on a kind-specific test function.
///
/// * Pitchfork: determinant of the on-axis equilibrium.
/// * Hopf: trace of the spiral; bisection continues until the real part at the
///   midpoint is below `re_tol` as well as the bracket being narrower than `tol`.
/// * Saddle-node: whether a pair of equilibria exists near the event location.
///
/// When the test function has the same sign at both ends the original bracket
/// is returned with a warning.
pub fn refine_event(
    cs: CrossSection,
    a_tilde: f64,
    event: &BifurcationEvent,
    tol: f64,
    re_tol: f64,
    solver: &SolverOptions,
) -> RefinedEvent {
    let mp = |r: f64| mp_at(cs, a_tilde, r);
    let lost = |why: &str| {
        let mut ev = event.clone();
        let msg = format!("test function lost its sign change on [{}, {}]: {why}", event.r_tilde_low, event.r_tilde_high);
        log::warn!("{msg}");
        ev.warning = Some(msg);
        let mid = ev.midpoint();
        let at_midpoint = local_roots(&mp(mid), event.location, 0.1, &[event.location], solver);
        RefinedEvent { event: ev, at_midpoint }
    };
    let (mut lo, mut hi) = (event.r_tilde_low, event.r_tilde_high);
    if !(lo < hi) || !(tol > 0.0) {
        return lost("empty bracket or non-positive tolerance");
    }

    match event.kind {
        EventKind::Pitchfork | EventKind::Hopf => {
            let seed = if event.kind == EventKind::Pitchfork { [event.location[0], 0.0] } else { event.location };
            let test = |e: &Equilibrium| if event.kind == EventKind::Pitchfork { e.jac.determinant() } else { e.jac.trace() };
            let Some(e_hi) = track(&mp(hi), seed, solver) else { return lost("no equilibrium at the upper end") };
            let Some(e_lo) = track(&mp(lo), e_hi.location(), solver) else {
                return lost("no equilibrium at the lower end");
            };
            let (f_hi, f_lo) = (test(&e_hi), test(&e_lo));
            if f_hi.signum() == f_lo.signum() || f_hi == 0.0 || f_lo == 0.0 {
                return lost("same sign at both ends");
            }
            let mut last = e_hi;
            let mut mid_eq;
            let mut iterations = 0;
            loop {
                let mid = 0.5 * (lo + hi);
                mid_eq = match track(&mp(mid), last.location(), solver) {
                    Some(e) => e,
                    None => return lost("equilibrium lost inside the bracket"),
                };
                let f = test(&mid_eq);
                let done_width = hi - lo <= tol;
                let done_re = event.kind != EventKind::Hopf || (0.5 * f).abs() < re_tol;
                if (done_width && done_re) || iterations >= 200 || !(mid < hi && mid > lo) {
                    break;
                }
                if f.signum() == f_hi.signum() {
                    hi = mid;
                } else {
                    lo = mid;
                }
                last = mid_eq;
                iterations += 1;
            }
            let mut ev = event.clone();
            ev.r_tilde_low = lo;
            ev.r_tilde_high = hi;
            let mid = ev.midpoint();
            let mut at_midpoint = vec![track(&mp(mid), last.location(), solver).unwrap_or(mid_eq)];
            if event.kind == EventKind::Pitchfork {
                at_midpoint = local_roots(&mp(mid), at_midpoint[0].location(), 0.1, &[at_midpoint[0].location()], solver);
            }
            if event.kind == EventKind::Hopf {
                ev.location = at_midpoint[0].location();
            }
            RefinedEvent { event: ev, at_midpoint }
        }
        EventKind::SaddleNode => {
            let radius = 0.1;
            let exists = |r: f64, hint: &[[f64; 2]]| {
                let roots = local_roots(&mp(r), event.location, radius, hint, solver);
                (roots.len() >= 2, roots)
            };
            let (x_hi, roots_hi) = exists(hi, &[event.location]);
            let (x_lo, roots_lo) = exists(lo, &[event.location]);
            if x_hi == x_lo {
                return lost(if x_hi { "equilibrium pair present at both ends" } else { "no equilibrium pair at either end" });
            }
            let mut hint: Vec<[f64; 2]> =
                if x_hi { roots_hi.iter().map(|e| e.location()).collect() } else { roots_lo.iter().map(|e| e.location()).collect() };
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if !(mid < hi && mid > lo) {
                    break;
                }
                let (x_mid, roots) = exists(mid, &hint);
                if x_mid {
                    hint = roots.iter().map(|e| e.location()).collect();
                }
                if x_mid == x_hi {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let mut ev = event.clone();
            ev.r_tilde_low = lo;
            ev.r_tilde_high = hi;
            let at_midpoint = local_roots(&mp(ev.midpoint()), event.location, radius, &hint, solver);
            RefinedEvent { event: ev, at_midpoint }
        }
    }
}
