//! Zero-level-fit force fields for the two rectangular cross-sections.
//!
//! The inertial lift is a polynomial bracket multiplied by the exponential of
//! a polynomial; the secondary drag is a product of low-order polynomial
//! factors. Both are evaluated in the dimensionless cross-sectional
//! coordinates `(r, z)` with the origin at the centre of the rectangle.
//!
//! The `1x2` lift is the `2x1` lift rotated by a quarter turn:
//! `L1x2(r, z) = (L2x1_z(z, r), L2x1_r(z, r))`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Duct cross-section. The aspect ratio fixes the half extents and the drag fit constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CrossSection {
    /// Twice as wide as tall: `|r| <= 2`, `|z| <= 1`.
    #[serde(rename = "2x1")]
    Rect2x1,
    /// Twice as tall as wide: `|r| <= 1`, `|z| <= 2`.
    #[serde(rename = "1x2")]
    Rect1x2,
}

impl CrossSection {
    pub const ALL: [CrossSection; 2] = [CrossSection::Rect2x1, CrossSection::Rect1x2];

    pub fn half_width(self) -> f64 {
        match self {
            CrossSection::Rect2x1 => 2.0,
            CrossSection::Rect1x2 => 1.0,
        }
    }

    pub fn half_height(self) -> f64 {
        match self {
            CrossSection::Rect2x1 => 1.0,
            CrossSection::Rect1x2 => 2.0,
        }
    }

    /// Drag fit constant `C`.
    pub fn drag_constant(self) -> f64 {
        match self {
            CrossSection::Rect2x1 => 0.02319,
            CrossSection::Rect1x2 => 0.018542,
        }
    }

    /// Smallest physically meaningful dimensionless bend radius, `W / H` with the
    /// duct wall touching the axis of curvature.
    pub fn min_bend_radius(self) -> f64 {
        match self {
            CrossSection::Rect2x1 => 2.0,
            CrossSection::Rect1x2 => 1.0,
        }
    }

    /// Closed-rectangle membership.
    pub fn contains(self, r: f64, z: f64) -> bool {
        r.abs() <= self.half_width() && z.abs() <= self.half_height()
    }

    /// Open-rectangle membership.
    pub fn contains_strictly(self, r: f64, z: f64) -> bool {
        r.abs() < self.half_width() && z.abs() < self.half_height()
    }

    /// Distance from `(r, z)` to the nearest wall, negative outside.
    pub fn wall_clearance(self, r: f64, z: f64) -> f64 {
        (self.half_width() - r.abs()).min(self.half_height() - z.abs())
    }

    pub(crate) fn check(self, r: f64, z: f64) -> Result<()> {
        if self.contains(r, z) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { r, z, cross_section: self })
        }
    }

    pub(crate) fn check_strict(self, r: f64, z: f64) -> Result<()> {
        if self.contains_strictly(r, z) {
            Ok(())
        } else {
            Err(Error::OutsideDomain { r, z, cross_section: self })
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CrossSection::Rect2x1 => "2x1",
            CrossSection::Rect1x2 => "1x2",
        }
    }
}

impl fmt::Display for CrossSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CrossSection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "2x1" | "rect2x1" => Ok(CrossSection::Rect2x1),
            "1x2" | "rect1x2" => Ok(CrossSection::Rect1x2),
            other => Err(Error::Parse(format!("unknown cross-section `{other}` (expected 2x1 or 1x2)"))),
        }
    }
}

/// A sample of a planar vector field: force or velocity components along `r` and `z`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector {
    pub fr: f64,
    pub fz: f64,
}

impl FieldVector {
    pub const fn new(fr: f64, fz: f64) -> Self {
        Self { fr, fz }
    }

    pub fn norm(self) -> f64 {
        self.fr.hypot(self.fz)
    }

    pub fn swapped(self) -> Self {
        Self { fr: self.fz, fz: self.fr }
    }

    pub(crate) fn scaled_sum(self, a: f64, other: Self, b: f64) -> Self {
        Self { fr: a * self.fr + b * other.fr, fz: a * self.fz + b * other.fz }
    }
}

/// Partial derivatives of a [`FieldVector`] field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldJacobian {
    pub d_fr_dr: f64,
    pub d_fr_dz: f64,
    pub d_fz_dr: f64,
    pub d_fz_dz: f64,
}

impl FieldJacobian {
    pub fn trace(&self) -> f64 {
        self.d_fr_dr + self.d_fz_dz
    }

    pub fn determinant(&self) -> f64 {
        self.d_fr_dr * self.d_fz_dz - self.d_fr_dz * self.d_fz_dr
    }

    /// Jacobian of the field with both its arguments and its components exchanged.
    pub fn transposed_roles(self) -> Self {
        Self {
            d_fr_dr: self.d_fz_dz,
            d_fr_dz: self.d_fz_dr,
            d_fz_dr: self.d_fr_dz,
            d_fz_dz: self.d_fr_dr,
        }
    }

    pub(crate) fn scaled_sum(self, a: f64, other: Self, b: f64) -> Self {
        Self {
            d_fr_dr: a * self.d_fr_dr + b * other.d_fr_dr,
            d_fr_dz: a * self.d_fr_dz + b * other.d_fr_dz,
            d_fz_dr: a * self.d_fz_dr + b * other.d_fz_dr,
            d_fz_dz: a * self.d_fz_dz + b * other.d_fz_dz,
        }
    }

    pub fn as_rows(&self) -> [[f64; 2]; 2] {
        [[self.d_fr_dr, self.d_fr_dz], [self.d_fz_dr, self.d_fz_dz]]
    }
}

/// Inertial lift at `(r, z)`.
pub fn lift(cs: CrossSection, r: f64, z: f64) -> Result<FieldVector> {
    cs.check(r, z)?;
    Ok(lift_unchecked(cs, r, z))
}

/// Secondary drag at `(r, z)`.
pub fn drag(cs: CrossSection, r: f64, z: f64) -> Result<FieldVector> {
    cs.check(r, z)?;
    Ok(drag_unchecked(cs, r, z))
}

/// Analytic Jacobian of [`lift`]; the point must lie strictly inside the duct.
pub fn lift_jacobian(cs: CrossSection, r: f64, z: f64) -> Result<FieldJacobian> {
    cs.check_strict(r, z)?;
    Ok(lift_jacobian_unchecked(cs, r, z))
}

/// Analytic Jacobian of [`drag`]; the point must lie strictly inside the duct.
pub fn drag_jacobian(cs: CrossSection, r: f64, z: f64) -> Result<FieldJacobian> {
    cs.check_strict(r, z)?;
    Ok(drag_jacobian_unchecked(cs, r, z))
}

// The fits are polynomials and exponentials of polynomials, so they extend
// smoothly past the walls. Integrator stages may probe slightly outside.

pub(crate) fn lift_unchecked(cs: CrossSection, r: f64, z: f64) -> FieldVector {
    match cs {
        CrossSection::Rect2x1 => lift_2x1(r, z).0,
        CrossSection::Rect1x2 => lift_2x1(z, r).0.swapped(),
    }
}

pub(crate) fn lift_jacobian_unchecked(cs: CrossSection, r: f64, z: f64) -> FieldJacobian {
    match cs {
        CrossSection::Rect2x1 => lift_2x1(r, z).1,
        CrossSection::Rect1x2 => lift_2x1(z, r).1.transposed_roles(),
    }
}

pub(crate) fn drag_unchecked(cs: CrossSection, r: f64, z: f64) -> FieldVector {
    match cs {
        CrossSection::Rect2x1 => drag_2x1(r, z).0,
        CrossSection::Rect1x2 => drag_1x2(r, z).0,
    }
}

pub(crate) fn drag_jacobian_unchecked(cs: CrossSection, r: f64, z: f64) -> FieldJacobian {
    match cs {
        CrossSection::Rect2x1 => drag_2x1(r, z).1,
        CrossSection::Rect1x2 => drag_1x2(r, z).1,
    }
}

/// `2x1` lift and its Jacobian.
///
/// `L_r = r P(r, z) exp Q(r, z)` and `L_z = z S(r, z) exp T(r, z)` where
/// `P, Q, S, T` are even in both arguments; every power is built from
/// `r*r` and `z*z` so the parities hold bit for bit.
fn lift_2x1(r: f64, z: f64) -> (FieldVector, FieldJacobian) {
    let r2 = r * r;
    let z2 = z * z;
    let r4 = r2 * r2;
    let z4 = z2 * z2;
    let r6 = r4 * r2;
    let z6 = z4 * z2;
    let r8 = r4 * r4;

    // radial component
    let p = 1.0 - 0.0643 * r6 - 25.5128 * z6 - 31.1 * (1.0 - 0.4006 * r2) * z4;
    let q = 0.505 + 0.427 * r2 - 5.081 * z2 - 0.2 * r4 + 1.518 * r2 * z2 + 0.594 * z4 + 0.042 * r6
        + 0.007 * r4 * z2
        - 2.283 * r2 * z4
        + 2.8 * z6;
    // P_r / r, P_z / z, Q_r / r, Q_z / z
    let p_r = -6.0 * 0.0643 * r4 + 2.0 * 31.1 * 0.4006 * z4;
    let p_z = -6.0 * 25.5128 * z4 - 4.0 * 31.1 * (1.0 - 0.4006 * r2) * z2;
    let q_r = 2.0 * 0.427 - 4.0 * 0.2 * r2 + 2.0 * 1.518 * z2 + 6.0 * 0.042 * r4
        + 4.0 * 0.007 * r2 * z2
        - 2.0 * 2.283 * z4;
    let q_z = -2.0 * 5.081 + 2.0 * 1.518 * r2 + 4.0 * 0.594 * z2 + 2.0 * 0.007 * r4
        - 4.0 * 2.283 * r2 * z2
        + 6.0 * 2.8 * z4;
    let eq = q.exp();

    // vertical component
    let s = 1.0 - 9.0878 * z6 - 0.0316 * r8 - 1.6 * (1.0 - 0.1778 * r4) * z2;
    let t = 3.030 - 1.168 * z2 - 0.536 * r2 - 2.199 * z4 + 0.476 * z2 * r2 + 0.104 * r4 + 2.094 * z6
        + 0.051 * z4 * r2
        - 0.212 * z2 * r4
        - 0.033 * r6;
    // S_r / r, S_z / z, T_r / r, T_z / z
    let s_r = -8.0 * 0.0316 * r6 + 4.0 * 1.6 * 0.1778 * r2 * z2;
    let s_z = -6.0 * 9.0878 * z4 - 2.0 * 1.6 * (1.0 - 0.1778 * r4);
    let t_r = -2.0 * 0.536 + 2.0 * 0.476 * z2 + 4.0 * 0.104 * r2 + 2.0 * 0.051 * z4
        - 4.0 * 0.212 * z2 * r2
        - 6.0 * 0.033 * r4;
    let t_z = -2.0 * 1.168 - 4.0 * 2.199 * z2 + 2.0 * 0.476 * r2 + 6.0 * 2.094 * z4
        + 4.0 * 0.051 * z2 * r2
        - 2.0 * 0.212 * r4;
    let et = t.exp();

    let value = FieldVector::new(r * p * eq, z * s * et);
    let jac = FieldJacobian {
        d_fr_dr: (p + r2 * p_r + r2 * p * q_r) * eq,
        d_fr_dz: r * z * (p_z + p * q_z) * eq,
        d_fz_dr: z * r * (s_r + s * t_r) * et,
        d_fz_dz: (s + z2 * s_z + z2 * s * t_z) * et,
    };
    (value, jac)
}

fn drag_2x1(r: f64, z: f64) -> (FieldVector, FieldJacobian) {
    let k = 6.0 * PI * CrossSection::Rect2x1.drag_constant();
    let r2 = r * r;
    let z2 = z * z;
    let a = 1.0 - 0.25 * r2;
    let b = 1.0 - z2;
    let c = 1.0 - 5.0 * z2;
    // shared factor of d(D_r)/dr and d(D_z)/dz
    let stretch = k * r * a * b * c;
    let value = FieldVector::new(k * a * a * b * c, k * r * z * a * b * b);
    let jac = FieldJacobian {
        d_fr_dr: -stretch,
        d_fr_dz: k * a * a * z * (-12.0 + 20.0 * z2),
        d_fz_dr: k * z * b * b * (1.0 - 0.75 * r2),
        d_fz_dz: stretch,
    };
    (value, jac)
}

fn drag_1x2(r: f64, z: f64) -> (FieldVector, FieldJacobian) {
    let k = 6.0 * PI * CrossSection::Rect1x2.drag_constant();
    let r2 = r * r;
    let z2 = z * z;
    let a = 1.0 - r2;
    let b = 1.0 - 0.25 * z2;
    let c = 1.0 - 1.25 * z2;
    let stretch = 4.0 * k * r * a * b * c;
    let value = FieldVector::new(k * a * a * b * c, 4.0 * k * r * z * a * b * b);
    let jac = FieldJacobian {
        d_fr_dr: -stretch,
        d_fr_dz: k * a * a * z * (-3.0 + 1.25 * z2),
        d_fz_dr: 4.0 * k * z * b * b * (1.0 - 3.0 * r2),
        d_fz_dz: stretch,
    };
    (value, jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lift_vanishes_at_origin() {
        for cs in CrossSection::ALL {
            assert_eq!(lift(cs, 0.0, 0.0).unwrap(), FieldVector::new(0.0, 0.0));
        }
    }

    #[test]
    fn lift_vertical_root_near_point_six() {
        // The stable edge node of the lift-only flow sits at z = 0.6000 to four decimals.
        let below = lift(CrossSection::Rect2x1, 0.0, 0.5995).unwrap().fz;
        let above = lift(CrossSection::Rect2x1, 0.0, 0.6005).unwrap().fz;
        assert!(below * above < 0.0);
        assert!(lift(CrossSection::Rect2x1, 0.0, 0.6).unwrap().fr == 0.0);
    }

    #[test]
    fn rotated_lift_swaps_components() {
        let a = lift(CrossSection::Rect1x2, 0.3, 1.2).unwrap();
        let b = lift(CrossSection::Rect2x1, 1.2, 0.3).unwrap();
        assert_eq!(a, b.swapped());
    }

    #[test]
    fn drag_at_origin() {
        let d = drag(CrossSection::Rect2x1, 0.0, 0.0).unwrap();
        assert_eq!(d.fr, 6.0 * PI * 0.02319);
        assert_eq!(d.fz, 0.0);
    }

    #[test]
    fn drag_zero_on_center_line() {
        let d = drag(CrossSection::Rect2x1, 0.0, 1.0 / 5f64.sqrt()).unwrap();
        assert!(d.fr.abs() < 1e-15);
        assert_eq!(d.fz, 0.0);
    }

    #[test]
    fn drag_1x2_matches_retyped_formula() {
        // independent transcription of the printed 1x2 drag
        let (r, z) = (0.5f64, 0.5f64);
        let c = 0.018542;
        let dr = 6.0 * PI * c * (1.0 - r.powi(2)).powi(2) * (1.0 - 0.25 * z.powi(2)) * (1.0 - 1.25 * z.powi(2));
        let dz = 24.0 * PI * c * r * z * (1.0 - r.powi(2)) * (1.0 - 0.25 * z.powi(2)).powi(2);
        let d = drag(CrossSection::Rect1x2, r, z).unwrap();
        assert!((d.fr - dr).abs() < 1e-15 && (d.fz - dz).abs() < 1e-15);
        // evaluated separately: 6*pi*C * 0.5625 * 0.9375 * 0.6875 and 24*pi*C * 0.25 * 0.75 * 0.9375^2
        assert!((d.fr - 0.126_713_884_730_786_1).abs() < 1e-14, "{}", d.fr);
        assert!((d.fz - 0.230_388_881_328_702_03).abs() < 1e-14, "{}", d.fz);
    }

    #[test]
    fn drag_jacobian_radial_stretch_vanishes_on_axis() {
        let j = drag_jacobian(CrossSection::Rect2x1, 0.0, 0.0).unwrap();
        assert_eq!(j.d_fr_dr, 0.0);
    }

    #[test]
    fn outside_points_are_rejected() {
        assert!(matches!(lift(CrossSection::Rect2x1, 2.1, 0.0), Err(Error::OutsideDomain { .. })));
        assert!(matches!(drag(CrossSection::Rect1x2, 0.0, -2.5), Err(Error::OutsideDomain { .. })));
        assert!(drag(CrossSection::Rect1x2, 1.0, 2.0).is_ok());
        assert!(lift_jacobian(CrossSection::Rect1x2, 1.0, 0.0).is_err());
        assert!(lift(CrossSection::Rect2x1, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn cross_section_parses() {
        assert_eq!("2x1".parse::<CrossSection>().unwrap(), CrossSection::Rect2x1);
        assert_eq!(" 1X2".parse::<CrossSection>().unwrap(), CrossSection::Rect1x2);
        assert!("3x1".parse::<CrossSection>().is_err());
    }
}
