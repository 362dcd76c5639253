use proptest::prelude::*;
use zelf::forcefield::{drag, drag_jacobian, lift, lift_jacobian};
use zelf::{CrossSection, FieldJacobian, FieldVector};

fn cross_section() -> impl Strategy<Value = CrossSection> {
    prop_oneof![Just(CrossSection::Rect2x1), Just(CrossSection::Rect1x2)]
}

/// Interior point at least `margin` from every wall.
fn interior(margin: f64) -> impl Strategy<Value = (CrossSection, f64, f64)> {
    cross_section().prop_flat_map(move |cs| {
        let (w, h) = (cs.half_width() - margin, cs.half_height() - margin);
        (Just(cs), -w..w, -h..h)
    })
}

fn central_difference(f: impl Fn(f64, f64) -> FieldVector, r: f64, z: f64, h: f64) -> FieldJacobian {
    let (rp, rm) = (f(r + h, z), f(r - h, z));
    let (zp, zm) = (f(r, z + h), f(r, z - h));
    FieldJacobian {
        d_fr_dr: (rp.fr - rm.fr) / (2.0 * h),
        d_fr_dz: (zp.fr - zm.fr) / (2.0 * h),
        d_fz_dr: (rp.fz - rm.fz) / (2.0 * h),
        d_fz_dz: (zp.fz - zm.fz) / (2.0 * h),
    }
}

fn relative_error(a: &FieldJacobian, b: &FieldJacobian) -> f64 {
    let (ra, rb) = (a.as_rows(), b.as_rows());
    let mut diff = 0.0f64;
    let mut norm = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            diff += (ra[i][j] - rb[i][j]).powi(2);
            norm += ra[i][j].powi(2);
        }
    }
    diff.sqrt() / norm.sqrt().max(1e-300)
}

proptest! {
    #[test]
    fn lift_parity_is_exact((cs, r, z) in interior(0.0)) {
        let l = lift(cs, r, z).unwrap();
        let lr = lift(cs, -r, z).unwrap();
        let lz = lift(cs, r, -z).unwrap();
        prop_assert_eq!(l.fr, -lr.fr);
        prop_assert_eq!(l.fr, lz.fr);
        prop_assert_eq!(l.fz, lr.fz);
        prop_assert_eq!(l.fz, -lz.fz);
    }

    #[test]
    fn drag_parity_is_exact((cs, r, z) in interior(0.0)) {
        let d = drag(cs, r, z).unwrap();
        for (sr, sz) in [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let m = drag(cs, sr * r, sz * z).unwrap();
            prop_assert_eq!(d.fr, m.fr);
            prop_assert_eq!(d.fz, sr * sz * m.fz);
        }
    }

    #[test]
    fn tall_lift_is_rotated_wide_lift(r in -1.0f64..1.0, z in -2.0f64..2.0) {
        let tall = lift(CrossSection::Rect1x2, r, z).unwrap();
        let wide = lift(CrossSection::Rect2x1, z, r).unwrap();
        prop_assert_eq!(tall.fr, wide.fz);
        prop_assert_eq!(tall.fz, wide.fr);
    }

    #[test]
    fn drag_is_divergence_free((cs, r, z) in interior(1e-9)) {
        let j = drag_jacobian(cs, r, z).unwrap();
        prop_assert!((j.d_fr_dr + j.d_fz_dz).abs() < 1e-12);
    }

    #[test]
    fn lift_jacobian_matches_central_differences((cs, r, z) in interior(1e-3)) {
        let j = lift_jacobian(cs, r, z).unwrap();
        let fd = central_difference(|a, b| lift(cs, a, b).unwrap(), r, z, 1e-5);
        prop_assert!(relative_error(&j, &fd) < 1e-5, "{:?} vs {:?}", j, fd);
    }

    #[test]
    fn drag_jacobian_matches_central_differences((cs, r, z) in interior(1e-3)) {
        let j = drag_jacobian(cs, r, z).unwrap();
        let fd = central_difference(|a, b| drag(cs, a, b).unwrap(), r, z, 1e-5);
        prop_assert!(relative_error(&j, &fd) < 1e-5, "{:?} vs {:?}", j, fd);
    }

    #[test]
    fn radial_drag_zero_levels(t in -1.0f64..1.0) {
        // wide duct: z = ±1/sqrt(5) and z = ±1; tall duct: z = ±2/sqrt(5) and r = ±1
        let wide = CrossSection::Rect2x1;
        for z in [1.0 / 5f64.sqrt(), -1.0 / 5f64.sqrt(), 1.0, -1.0] {
            prop_assert!(drag(wide, 2.0 * t, z).unwrap().fr.abs() < 1e-15);
        }
        let tall = CrossSection::Rect1x2;
        for z in [2.0 / 5f64.sqrt(), -2.0 / 5f64.sqrt()] {
            prop_assert!(drag(tall, t, z).unwrap().fr.abs() < 1e-15);
        }
        for r in [1.0, -1.0] {
            prop_assert_eq!(drag(tall, r, 2.0 * t).unwrap().fr, 0.0);
        }
    }
}

#[test]
fn fields_evaluate_on_walls_but_jacobians_do_not() {
    for cs in [CrossSection::Rect2x1, CrossSection::Rect1x2] {
        let (w, h) = (cs.half_width(), cs.half_height());
        assert!(lift(cs, w, h).is_ok());
        assert!(drag(cs, -w, 0.3).is_ok());
        assert!(lift_jacobian(cs, w, 0.0).is_err());
        assert!(drag_jacobian(cs, 0.0, -h).is_err());
        assert!(lift(cs, w + 1e-12, 0.0).is_err());
    }
}
