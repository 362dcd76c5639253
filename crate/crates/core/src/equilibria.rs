//! Fixed points of the cross-sectional flow and their linear stability.
//!
//! Roots are found by damped Newton iteration from a uniform grid of seeds,
//! deduplicated, and then symmetrised so that mirror images appear as exact
//! reflections. Stability follows from the eigenvalues of the velocity
//! Jacobian.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{velocity, velocity_jacobian, ModelParams, Regime};
use crate::error::{Error, Result};
use crate::forcefield::{CrossSection, FieldJacobian};

/// Eigenvalues with real parts smaller than this fraction of the largest
/// eigenvalue modulus are treated as zero by [`classify`].
pub const DEGENERACY_BAND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    StableNode,
    UnstableNode,
    Saddle,
    StableSpiral,
    UnstableSpiral,
    Center,
    Degenerate,
}

impl Kind {
    pub fn is_spiral(self) -> bool {
        matches!(self, Kind::StableSpiral | Kind::UnstableSpiral)
    }

    pub fn is_node(self) -> bool {
        matches!(self, Kind::StableNode | Kind::UnstableNode)
    }

    pub fn label(self) -> &'static str {
        match self {
            Kind::StableNode => "stable-node",
            Kind::UnstableNode => "unstable-node",
            Kind::Saddle => "saddle",
            Kind::StableSpiral => "stable-spiral",
            Kind::UnstableSpiral => "unstable-spiral",
            Kind::Center => "center",
            Kind::Degenerate => "degenerate",
        }
    }
}

/// Eigen-decomposition of a real 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigensystem {
    /// Real pairs ascending; complex pairs with the positive imaginary part first.
    pub eigenvalues: [Complex64; 2],
    /// Unit eigenvectors with the first nonzero component positive, for real spectra only.
    pub eigenvectors: Option<[[f64; 2]; 2]>,
    /// Repeated eigenvalue with a single eigenvector (stored twice).
    pub defective: bool,
}

impl Eigensystem {
    pub fn of(j: &FieldJacobian) -> Self {
        let (a, b, c, d) = (j.d_fr_dr, j.d_fr_dz, j.d_fz_dr, j.d_fz_dz);
        let half_tr = 0.5 * (a + d);
        let det = a * d - b * c;
        // discriminant written to avoid cancellation when the diagonal dominates
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc < 0.0 {
            let w = (-disc).sqrt();
            return Self {
                eigenvalues: [Complex64::new(half_tr, w), Complex64::new(half_tr, -w)],
                eigenvectors: None,
                defective: false,
            };
        }
        let s = disc.sqrt();
        let (l1, l2) = if half_tr == 0.0 && s == 0.0 {
            (0.0, 0.0)
        } else {
            let q = half_tr + s.copysign(half_tr);
            let other = if q != 0.0 { det / q } else { half_tr - s.copysign(half_tr) };
            if q <= other {
                (q, other)
            } else {
                (other, q)
            }
        };
        let scalar = b == 0.0 && c == 0.0 && a == d;
        let v1 = real_eigenvector(a, b, c, d, l1, [1.0, 0.0]);
        let v2 = real_eigenvector(a, b, c, d, l2, [0.0, 1.0]);
        let defective = !scalar && s == 0.0;
        let eigenvectors = if scalar {
            [[1.0, 0.0], [0.0, 1.0]]
        } else if defective {
            [v1, v1]
        } else {
            [v1, v2]
        };
        Self {
            eigenvalues: [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)],
            eigenvectors: Some(eigenvectors),
            defective,
        }
    }
}

/// Null vector of `A - lambda I`, picked from whichever row is better conditioned.
fn real_eigenvector(a: f64, b: f64, c: f64, d: f64, lambda: f64, fallback: [f64; 2]) -> [f64; 2] {
    let from_row1 = [b, lambda - a];
    let from_row2 = [lambda - d, c];
    let n1 = from_row1[0].hypot(from_row1[1]);
    let n2 = from_row2[0].hypot(from_row2[1]);
    let (v, n) = if n1 >= n2 { (from_row1, n1) } else { (from_row2, n2) };
    if n == 0.0 {
        return fallback;
    }
    normalise([v[0] / n, v[1] / n])
}

fn normalise(v: [f64; 2]) -> [f64; 2] {
    let first = if v[0] != 0.0 { v[0] } else { v[1] };
    let v = if first < 0.0 { [-v[0], -v[1]] } else { v };
    // adding +0.0 turns a negative zero into a positive one
    [v[0] + 0.0, v[1] + 0.0]
}

/// Stability class with the degeneracy band applied.
///
/// In the drag-only regime a pure-imaginary pair is a true centre, because the
/// flow there has a conserved quantity whose level sets are closed curves.
pub fn classify(eigenvalues: [Complex64; 2], regime: Regime) -> Kind {
    let scale = eigenvalues[0].norm().max(eigenvalues[1].norm());
    if scale == 0.0 {
        return Kind::Degenerate;
    }
    let band = DEGENERACY_BAND * scale;
    if eigenvalues[0].im != 0.0 {
        let re = eigenvalues[0].re;
        return if re.abs() < band {
            if regime == Regime::DragOnly {
                Kind::Center
            } else {
                Kind::Degenerate
            }
        } else if re < 0.0 {
            Kind::StableSpiral
        } else {
            Kind::UnstableSpiral
        };
    }
    if eigenvalues[0].re.abs() < band || eigenvalues[1].re.abs() < band {
        return Kind::Degenerate;
    }
    classify_strict(eigenvalues, regime)
}

/// Stability class from signs alone; only exact zeros are degenerate.
pub fn classify_strict(eigenvalues: [Complex64; 2], regime: Regime) -> Kind {
    let (l1, l2) = (eigenvalues[0], eigenvalues[1]);
    if l1.im != 0.0 {
        return match l1.re.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Less) => Kind::StableSpiral,
            Some(std::cmp::Ordering::Greater) => Kind::UnstableSpiral,
            _ if regime == Regime::DragOnly => Kind::Center,
            _ => Kind::Degenerate,
        };
    }
    let (a, b) = (l1.re, l2.re);
    if a == 0.0 || b == 0.0 || a.is_nan() || b.is_nan() {
        Kind::Degenerate
    } else if a < 0.0 && b < 0.0 {
        Kind::StableNode
    } else if a > 0.0 && b > 0.0 {
        Kind::UnstableNode
    } else {
        Kind::Saddle
    }
}

/// Eigen-decomposition of the stability matrix at `(r, z)`.
pub fn eigensystem(mp: &ModelParams, r: f64, z: f64) -> Result<Eigensystem> {
    let j = crate::dynamics::rhs_jacobian(mp, r, z)?;
    Ok(Eigensystem::of(&j))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub r: f64,
    pub z: f64,
    pub jac: FieldJacobian,
    pub eigen: Eigensystem,
    pub kind: Kind,
    /// Velocity magnitude at the location.
    pub residual: f64,
}

impl Equilibrium {
    /// Builds the record at a known root.
    pub fn at(mp: &ModelParams, r: f64, z: f64) -> Result<Self> {
        mp.cs.check_strict(r, z)?;
        Ok(Self::at_unchecked(mp, r, z))
    }

    pub(crate) fn at_unchecked(mp: &ModelParams, r: f64, z: f64) -> Self {
        let jac = velocity_jacobian(mp, r, z);
        let eigen = Eigensystem::of(&jac);
        Self { r, z, jac, eigen, kind: classify(eigen.eigenvalues, mp.regime()), residual: velocity(mp, r, z).norm() }
    }

    pub fn location(&self) -> [f64; 2] {
        [self.r, self.z]
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        self.eigen.eigenvalues
    }

    /// Sign-only stability class, used where the degeneracy band would hide a crossing.
    pub fn strict_kind(&self, regime: Regime) -> Kind {
        classify_strict(self.eigen.eigenvalues, regime)
    }

    pub fn distance_to(&self, other: &Equilibrium) -> f64 {
        (self.r - other.r).hypot(self.z - other.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedGrid {
    pub nr: usize,
    pub nz: usize,
}

impl SeedGrid {
    pub const MIN_PER_AXIS: usize = 8;

    pub fn default_for(cs: CrossSection) -> Self {
        match cs {
            CrossSection::Rect2x1 => Self { nr: 41, nz: 21 },
            CrossSection::Rect1x2 => Self { nr: 21, nz: 41 },
        }
    }

    pub fn square(n: usize) -> Self {
        Self { nr: n, nz: n }
    }

    /// Cell-centred points of an `nr x nz` lattice over the duct.
    pub fn points(&self, cs: CrossSection) -> Vec<[f64; 2]> {
        let (hw, hh) = (cs.half_width(), cs.half_height());
        let mut pts = Vec::with_capacity(self.nr * self.nz);
        for i in 0..self.nr {
            let r = -hw + 2.0 * hw * (i as f64 + 0.5) / self.nr as f64;
            for k in 0..self.nz {
                let z = -hh + 2.0 * hh * (k as f64 + 0.5) / self.nz as f64;
                pts.push([r, z]);
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub grid: SeedGrid,
    /// Velocity magnitude below which a point counts as a root.
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Roots closer than this are merged.
    pub dedup_radius: f64,
    /// Roots closer than this to a wall are discarded.
    pub wall_margin: f64,
}

impl SolverOptions {
    pub fn for_cross_section(cs: CrossSection) -> Self {
        Self { grid: SeedGrid::default_for(cs), newton_tol: 1e-12, max_iter: 50, dedup_radius: 1e-6, wall_margin: 1e-8 }
    }

    pub fn with_grid(self, grid: SeedGrid) -> Self {
        Self { grid, ..self }
    }
}

/// Equilibria of the lift-only flow at large bend radius, used as extra seeds.
pub fn known_lift_only_points(cs: CrossSection) -> Vec<[f64; 2]> {
    let base = [
        [0.0, 0.0],
        [0.0, 0.6],
        [0.0, -0.6],
        [1.58, 0.0],
        [-1.58, 0.0],
        [1.5303, 0.4094],
        [1.5303, -0.4094],
        [-1.5303, 0.4094],
        [-1.5303, -0.4094],
    ];
    match cs {
        CrossSection::Rect2x1 => base.to_vec(),
        CrossSection::Rect1x2 => base.iter().map(|p| [p[1], p[0]]).collect(),
    }
}

/// True when every wall point is a root, as in the drag-only limit. Those
/// continua are never returned as [`Equilibrium`] records.
pub fn has_wall_continua(mp: &ModelParams) -> bool {
    mp.regime() == Regime::DragOnly
}

/// All interior equilibria reachable from the default seeds.
pub fn find_equilibria(mp: &ModelParams, opts: &SolverOptions) -> Result<Vec<Equilibrium>> {
    find_equilibria_seeded(mp, opts, &[])
}

/// As [`find_equilibria`] with additional seeds tried alongside the grid.
pub fn find_equilibria_seeded(mp: &ModelParams, opts: &SolverOptions, extra: &[[f64; 2]]) -> Result<Vec<Equilibrium>> {
    if opts.grid.nr < SeedGrid::MIN_PER_AXIS || opts.grid.nz < SeedGrid::MIN_PER_AXIS {
        return Err(Error::InvalidParameter(format!(
            "seed grid {}x{} is below the minimum of {} per axis",
            opts.grid.nr,
            opts.grid.nz,
            SeedGrid::MIN_PER_AXIS
        )));
    }
    let mut seeds = opts.grid.points(mp.cs);
    seeds.extend(known_lift_only_points(mp.cs));
    seeds.extend_from_slice(extra);
    Ok(solve_from(mp, opts, &seeds))
}

/// Newton from each seed, then deduplicate and symmetrise.
pub fn solve_from(mp: &ModelParams, opts: &SolverOptions, seeds: &[[f64; 2]]) -> Vec<Equilibrium> {
    let roots: Vec<Option<[f64; 2]>> = seeds.par_iter().map(|&s| newton(mp, s, opts)).collect();
    let symmetric_r = mp.regime() != Regime::Full;
    let mut found: Vec<[f64; 2]> = Vec::new();
    for x in roots.into_iter().flatten() {
        // keep one representative per mirror class, then reflect exactly
        let x = [if symmetric_r { x[0].abs() } else { x[0] }, x[1].abs()];
        if mp.cs.wall_clearance(x[0], x[1]) < opts.wall_margin {
            continue;
        }
        if !found.iter().any(|y| (x[0] - y[0]).hypot(x[1] - y[1]) < opts.dedup_radius) {
            found.push(x);
        }
    }
    let mut all = Vec::with_capacity(found.len() * 4);
    for x in found {
        all.push(x);
        if x[1] != 0.0 {
            all.push([x[0], -x[1]]);
        }
        if symmetric_r && x[0] != 0.0 {
            all.push([-x[0], x[1]]);
            if x[1] != 0.0 {
                all.push([-x[0], -x[1]]);
            }
        }
    }
    all.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    all.into_iter().map(|x| Equilibrium::at_unchecked(mp, x[0], x[1])).collect()
}

/// Damped Newton iteration for a single root.
///
/// A point is accepted once the velocity magnitude is below `newton_tol` and
/// the iteration has stopped moving.
///
/// Points within `1e-9` of a symmetry axis are snapped onto it, which the
/// field parities make an invariant line for the iteration.
pub fn newton(mp: &ModelParams, seed: [f64; 2], opts: &SolverOptions) -> Option<[f64; 2]> {
    let cs = mp.cs;
    if !cs.contains_strictly(seed[0], seed[1]) {
        return None;
    }
    let snap_r = mp.regime() != Regime::Full;
    let snap = |x: [f64; 2]| {
        let z = if x[1].abs() < 1e-9 { 0.0 } else { x[1] };
        let r = if snap_r && x[0].abs() < 1e-9 { 0.0 } else { x[0] };
        [r, z]
    };
    let mut x = seed;
    let mut f = velocity(mp, x[0], x[1]);
    let mut fnorm = f.norm();
    let max_len = 0.25 * cs.half_width().min(cs.half_height());
    for _ in 0..opts.max_iter {
        let j = velocity_jacobian(mp, x[0], x[1]);
        let det = j.determinant();
        if !(det.is_finite() && det != 0.0) {
            break;
        }
        let mut dx = [
            -(j.d_fz_dz * f.fr - j.d_fr_dz * f.fz) / det,
            -(-j.d_fz_dr * f.fr + j.d_fr_dr * f.fz) / det,
        ];
        let len = dx[0].hypot(dx[1]);
        if !len.is_finite() {
            break;
        }
        if fnorm < opts.newton_tol && len <= 1e-13 * (1.0 + x[0].abs() + x[1].abs()) {
            return Some(snap(x));
        }
        if len > max_len {
            dx = [dx[0] * max_len / len, dx[1] * max_len / len];
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial = snap([x[0] + alpha * dx[0], x[1] + alpha * dx[1]]);
            if cs.contains_strictly(trial[0], trial[1]) {
                let ft = velocity(mp, trial[0], trial[1]);
                let nt = ft.norm();
                if nt * nt <= (1.0 - 1e-4 * alpha) * fnorm * fnorm || (nt == 0.0 && fnorm == 0.0) {
                    x = trial;
                    f = ft;
                    fnorm = nt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    // A small residual alone is not enough: where the field is weak the
    // velocity can dip below the tolerance without a root nearby. Require the
    // full Newton correction at the final point to be negligible as well.
    if fnorm == 0.0 {
        return Some(snap(x));
    }
    if !(fnorm < opts.newton_tol) {
        return None;
    }
    let j = velocity_jacobian(mp, x[0], x[1]);
    let det = j.determinant();
    let dx = [(j.d_fz_dz * f.fr - j.d_fr_dz * f.fz) / det, (-j.d_fz_dr * f.fr + j.d_fr_dr * f.fz) / det];
    (dx[0].hypot(dx[1]) <= 1e-9 * (1.0 + x[0].abs() + x[1].abs())).then_some(snap(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification_by_sign() {
        let r = Regime::Full;
        assert_eq!(classify([c(-0.2762, 0.0), c(-0.0092, 0.0)], r), Kind::StableNode);
        assert_eq!(classify([c(-0.0770, 0.0), c(0.0283, 0.0)], r), Kind::Saddle);
        assert_eq!(classify([c(0.0110, 0.0), c(0.1373, 0.0)], r), Kind::UnstableNode);
        assert_eq!(classify([c(-1.0, 2.0), c(-1.0, -2.0)], r), Kind::StableSpiral);
        assert_eq!(classify([c(1.0, 2.0), c(1.0, -2.0)], r), Kind::UnstableSpiral);
        assert_eq!(classify([c(1e-9, 2.0), c(1e-9, -2.0)], r), Kind::Degenerate);
        assert_eq!(classify([c(1e-9, 2.0), c(1e-9, -2.0)], Regime::DragOnly), Kind::Center);
        assert_eq!(classify([c(1e-9, 0.0), c(-1.0, 0.0)], r), Kind::Degenerate);
        assert_eq!(classify_strict([c(1e-9, 0.0), c(-1.0, 0.0)], r), Kind::Saddle);
        assert_eq!(classify([c(0.0, 0.0), c(0.0, 0.0)], r), Kind::Degenerate);
    }

    #[test]
    fn eigensystem_of_diagonal_matrix() {
        let j = FieldJacobian { d_fr_dr: -0.0094, d_fr_dz: 0.0, d_fz_dr: 0.0, d_fz_dz: -0.1059 };
        let e = Eigensystem::of(&j);
        assert!((e.eigenvalues[0].re + 0.1059).abs() < 1e-16);
        assert!((e.eigenvalues[1].re + 0.0094).abs() < 1e-16);
        assert_eq!(e.eigenvectors, Some([[0.0, 1.0], [1.0, 0.0]]));
        assert!(!e.defective);
    }

    #[test]
    fn eigensystem_of_rotation_and_jordan_block() {
        let rot = FieldJacobian { d_fr_dr: 0.5, d_fr_dz: -2.0, d_fz_dr: 2.0, d_fz_dz: 0.5 };
        let e = Eigensystem::of(&rot);
        assert_eq!(e.eigenvalues, [c(0.5, 2.0), c(0.5, -2.0)]);
        assert!(e.eigenvectors.is_none());

        let jordan = FieldJacobian { d_fr_dr: 3.0, d_fr_dz: 1.0, d_fz_dr: 0.0, d_fz_dz: 3.0 };
        let e = Eigensystem::of(&jordan);
        assert!(e.defective);
        assert_eq!(e.eigenvectors.unwrap()[0], [1.0, 0.0]);
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let j = FieldJacobian { d_fr_dr: 1.0, d_fr_dz: 2.0, d_fz_dr: 3.0, d_fz_dz: -4.0 };
        let e = Eigensystem::of(&j);
        for (lam, v) in e.eigenvalues.iter().zip(e.eigenvectors.unwrap()) {
            let res0 = j.d_fr_dr * v[0] + j.d_fr_dz * v[1] - lam.re * v[0];
            let res1 = j.d_fz_dr * v[0] + j.d_fz_dz * v[1] - lam.re * v[1];
            assert!(res0.abs() < 1e-14 && res1.abs() < 1e-14);
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-15);
            assert!(v[0] > 0.0 || (v[0] == 0.0 && v[1] > 0.0));
        }
        assert!((e.eigenvalues[0].re + e.eigenvalues[1].re - j.trace()).abs() < 1e-14);
        assert!((e.eigenvalues[0].re * e.eigenvalues[1].re - j.determinant()).abs() < 1e-13);
    }

    #[test]
    fn grid_below_minimum_is_rejected() {
        let mp = ModelParams::lift_only(CrossSection::Rect2x1, 0.05).unwrap();
        let opts = SolverOptions::for_cross_section(mp.cs).with_grid(SeedGrid::square(7));
        assert!(find_equilibria(&mp, &opts).is_err());
    }

    #[test]
    fn lift_only_wide_duct_has_nine_roots() {
        let mp = ModelParams::lift_only(CrossSection::Rect2x1, 1.0).unwrap();
        let eqs = find_equilibria(&mp, &SolverOptions::for_cross_section(mp.cs)).unwrap();
        assert_eq!(eqs.len(), 9, "{eqs:?}");
        assert!(eqs.iter().all(|e| e.residual < 1e-12));
    }

    #[test]
    fn drag_only_centres() {
        let mp = ModelParams::drag_only(CrossSection::Rect2x1, 100.0).unwrap();
        let eqs = find_equilibria(&mp, &SolverOptions::for_cross_section(mp.cs)).unwrap();
        assert_eq!(eqs.len(), 2, "{eqs:?}");
        assert!(eqs.iter().all(|e| e.kind == Kind::Center && e.r == 0.0));
        assert!((eqs[1].z - 1.0 / 5f64.sqrt()).abs() < 1e-10);
        assert!(has_wall_continua(&mp));
    }
}
