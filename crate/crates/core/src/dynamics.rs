//! Nondimensional equations of motion in the duct cross-section.
//!
//! The particle velocity is
//!
//! ```text
//! d(r, z)/dt = 1/(6 pi) * [ (a^3 / 8) L(r, z) + 1/(2 R) D(r, z) ]
//! ```
//!
//! with `a` the dimensionless particle size and `R` the dimensionless bend
//! radius. Sending `R` to infinity leaves the lift-only flow; dropping the lift
//! leaves the drag-only flow.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcefield::{self, CrossSection, FieldJacobian, FieldVector};

/// Particle sizes above this are outside the range the force fits describe well.
pub const MAX_ACCURATE_PARTICLE_SIZE: f64 = 0.05;

/// Which force terms enter the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Lift and drag with finite `a` and `R`.
    Full,
    /// `R -> infinity`: the drag term vanishes.
    LiftOnly,
    /// `a -> 0`: the lift term vanishes.
    DragOnly,
}

/// Dimensionless model parameters.
///
/// `r_tilde` is `f64::INFINITY` in the lift-only limit; `drag_only` drops the
/// lift term and ignores `a_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub cs: CrossSection,
    pub a_tilde: f64,
    #[serde(with = "finite_or_inf")]
    pub r_tilde: f64,
    pub drag_only: bool,
}

impl ModelParams {
    /// Lift and drag together. `r_tilde` must not be below the cross-section's minimum bend radius.
    pub fn full(cs: CrossSection, a_tilde: f64, r_tilde: f64) -> Result<Self> {
        let mp = Self { cs, a_tilde, r_tilde, drag_only: false };
        mp.validate(false)?;
        Ok(mp)
    }

    /// As [`ModelParams::full`] but accepting bend radii below the geometric minimum.
    pub fn full_any_bend(cs: CrossSection, a_tilde: f64, r_tilde: f64) -> Result<Self> {
        let mp = Self { cs, a_tilde, r_tilde, drag_only: false };
        mp.validate(true)?;
        Ok(mp)
    }

    pub fn lift_only(cs: CrossSection, a_tilde: f64) -> Result<Self> {
        let mp = Self { cs, a_tilde, r_tilde: f64::INFINITY, drag_only: false };
        mp.validate(false)?;
        Ok(mp)
    }

    pub fn drag_only(cs: CrossSection, r_tilde: f64) -> Result<Self> {
        let mp = Self { cs, a_tilde: 0.0, r_tilde, drag_only: true };
        mp.validate(true)?;
        Ok(mp)
    }

    pub fn regime(&self) -> Regime {
        if self.drag_only {
            Regime::DragOnly
        } else if self.r_tilde.is_infinite() {
            Regime::LiftOnly
        } else {
            Regime::Full
        }
    }

    /// Checks the parameter invariants. Large particles only log a warning.
    pub fn validate(&self, allow_tight_bend: bool) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.drag_only {
            if !(self.r_tilde.is_finite() && self.r_tilde > 0.0) {
                return bad(format!("drag-only flow needs a finite positive bend radius, got {}", self.r_tilde));
            }
            return Ok(());
        }
        if !(self.a_tilde.is_finite() && self.a_tilde > 0.0) {
            return bad(format!("particle size must be positive and finite, got {}", self.a_tilde));
        }
        if !(self.r_tilde > 0.0) || self.r_tilde.is_nan() {
            return bad(format!("bend radius must be positive, got {}", self.r_tilde));
        }
        if !allow_tight_bend && self.r_tilde < self.cs.min_bend_radius() {
            return bad(format!(
                "bend radius {} is below the minimum {} for the {} cross-section",
                self.r_tilde,
                self.cs.min_bend_radius(),
                self.cs
            ));
        }
        if self.a_tilde > MAX_ACCURATE_PARTICLE_SIZE {
            log::warn!(
                "particle size {} exceeds {}; the force fits lose accuracy for larger particles",
                self.a_tilde,
                MAX_ACCURATE_PARTICLE_SIZE
            );
        }
        Ok(())
    }

    /// Coefficient of the lift field in the velocity, `a^3 / (48 pi)`.
    pub fn lift_weight(&self) -> f64 {
        if self.drag_only {
            0.0
        } else {
            self.a_tilde.powi(3) / 8.0 / (6.0 * PI)
        }
    }

    /// Coefficient of the drag field in the velocity, `1 / (12 pi R)`.
    pub fn drag_weight(&self) -> f64 {
        if self.r_tilde.is_infinite() {
            0.0
        } else {
            1.0 / (2.0 * self.r_tilde) / (6.0 * PI)
        }
    }

    pub fn with_r_tilde(self, r_tilde: f64) -> Self {
        Self { r_tilde, ..self }
    }
}

/// Particle velocity at `(r, z)`.
pub fn rhs(mp: &ModelParams, r: f64, z: f64) -> Result<FieldVector> {
    mp.cs.check(r, z)?;
    Ok(velocity(mp, r, z))
}

/// Jacobian of [`rhs`], the linear stability matrix at `(r, z)`.
pub fn rhs_jacobian(mp: &ModelParams, r: f64, z: f64) -> Result<FieldJacobian> {
    mp.cs.check_strict(r, z)?;
    Ok(velocity_jacobian(mp, r, z))
}

pub(crate) fn velocity(mp: &ModelParams, r: f64, z: f64) -> FieldVector {
    let (wl, wd) = (mp.lift_weight(), mp.drag_weight());
    let l = if wl == 0.0 { FieldVector::default() } else { forcefield::lift_unchecked(mp.cs, r, z) };
    let d = if wd == 0.0 { FieldVector::default() } else { forcefield::drag_unchecked(mp.cs, r, z) };
    l.scaled_sum(wl, d, wd)
}

pub(crate) fn velocity_jacobian(mp: &ModelParams, r: f64, z: f64) -> FieldJacobian {
    let (wl, wd) = (mp.lift_weight(), mp.drag_weight());
    let l = if wl == 0.0 { FieldJacobian::default() } else { forcefield::lift_jacobian_unchecked(mp.cs, r, z) };
    let d = if wd == 0.0 { FieldJacobian::default() } else { forcefield::drag_jacobian_unchecked(mp.cs, r, z) };
    l.scaled_sum(wl, d, wd)
}

/// Dimensional description of a particle in a curved duct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub particle_radius: f64,
    pub bend_radius: f64,
    pub width: f64,
    pub height: f64,
    pub density: f64,
    pub viscosity: f64,
    pub max_axial_speed: f64,
}

/// Output of [`nondimensionalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondimensional {
    pub params: ModelParams,
    /// Multiply a dimensionless coordinate by this to get a length (`l / 2`).
    pub length_scale: f64,
    /// Multiply a dimensionless time by this to get a time (`mu / (2 rho U^2)`).
    pub time_scale: f64,
}

/// Scales a dimensional problem with `l = min(W, H)`: `a~ = 2a/l`, `R~ = 2R/l`.
pub fn nondimensionalize(p: &PhysicalParams) -> Result<Nondimensional> {
    let fields = [
        ("particle_radius", p.particle_radius),
        ("bend_radius", p.bend_radius),
        ("width", p.width),
        ("height", p.height),
        ("density", p.density),
        ("viscosity", p.viscosity),
        ("max_axial_speed", p.max_axial_speed),
    ];
    for (name, v) in fields {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let aspect = p.width / p.height;
    let cs = if (aspect - 2.0).abs() <= 1e-12 * 2.0 {
        CrossSection::Rect2x1
    } else if (aspect - 0.5).abs() <= 1e-12 * 0.5 {
        CrossSection::Rect1x2
    } else {
        return Err(Error::UnsupportedAspectRatio(aspect));
    };
    let l = p.width.min(p.height);
    let params = ModelParams {
        cs,
        a_tilde: 2.0 * p.particle_radius / l,
        r_tilde: 2.0 * p.bend_radius / l,
        drag_only: false,
    };
    if params.a_tilde > MAX_ACCURATE_PARTICLE_SIZE {
        log::warn!("particle size {} exceeds {}", params.a_tilde, MAX_ACCURATE_PARTICLE_SIZE);
    }
    Ok(Nondimensional {
        params,
        length_scale: l / 2.0,
        time_scale: p.viscosity / (2.0 * p.density * p.max_axial_speed * p.max_axial_speed),
    })
}

/// Serializes `f64::INFINITY` as the string `"inf"` so JSON can carry the lift-only limit.
pub(crate) mod finite_or_inf {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }
}
