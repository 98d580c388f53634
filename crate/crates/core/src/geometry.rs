//! Azimuth angles, direction vectors, NAF conversion and the bistatic
//! angle/Cartesian transforms.
//!
//! Angles are measured from the owning array's boresight, positive for
//! clockwise rotation. The TX array sits at `(-c, 0)` with its boresight
//! along `+y`; the RX array sits at `(c, b)` with its boresight rotated by
//! `rx_boresight_rotation` relative to the TX boresight.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Azimuth angle in radians relative to an array boresight.
///
/// Accepted values lie in the closed front half-plane `[-pi/2, pi/2]`; the
/// endfire directions are kept because the radian-uniform sampling set
/// includes them.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AngleRad(f64);

impl AngleRad {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value.abs() <= FRAC_PI_2 {
            Ok(Self(value))
        } else {
            Err(Error::AngleOutOfRange(value))
        }
    }

    pub const fn zero() -> Self {
        Self(0.0)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AngleRad {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AngleRad> for f64 {
    fn from(a: AngleRad) -> f64 {
        a.0
    }
}

/// Unit vector `[sin theta, cos theta]` in the array's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionVector {
    pub x: f64,
    pub y: f64,
}

/// A pair of normalized angular frequencies, one per array.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NafPoint {
    pub f_tx: f64,
    pub f_rx: f64,
}

impl NafPoint {
    pub const fn new(f_tx: f64, f_rx: f64) -> Self {
        Self { f_tx, f_rx }
    }

    /// Euclidean distance in the 2D NAF plane.
    pub fn distance(&self, other: &NafPoint) -> f64 {
        (self.f_tx - other.f_tx).hypot(self.f_rx - other.f_rx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
}

impl CartesianPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Placement of the two arrays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BistaticGeometry {
    /// TX at `(-c, 0)`, RX at `(c, b)`.
    pub half_baseline_c: f64,
    pub rx_offset_b: f64,
    /// Rotation of the RX boresight relative to the TX boresight.
    pub rx_boresight_rotation: AngleRad,
}

impl Default for BistaticGeometry {
    fn default() -> Self {
        Self {
            half_baseline_c: 6.0,
            rx_offset_b: 0.0,
            rx_boresight_rotation: AngleRad::zero(),
        }
    }
}

impl BistaticGeometry {
    pub fn new(half_baseline_c: f64, rx_offset_b: f64, rx_boresight_rotation: AngleRad) -> Result<Self> {
        let geom = Self {
            half_baseline_c,
            rx_offset_b,
            rx_boresight_rotation,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_baseline_c.is_finite() && self.half_baseline_c > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "half baseline must be positive, got {}",
                self.half_baseline_c
            )));
        }
        if !self.rx_offset_b.is_finite() {
            return Err(Error::InvalidConfig("rx offset must be finite".into()));
        }
        Ok(())
    }

    pub fn tx_position(&self) -> CartesianPoint {
        CartesianPoint::new(-self.half_baseline_c, 0.0)
    }

    pub fn rx_position(&self) -> CartesianPoint {
        CartesianPoint::new(self.half_baseline_c, self.rx_offset_b)
    }
}

/// `[sin theta, cos theta]`.
pub fn direction_vector(theta: AngleRad) -> DirectionVector {
    let (s, c) = theta.value().sin_cos();
    DirectionVector { x: s, y: c }
}

/// `(d / lambda) * sin(theta)`.
pub fn naf_from_angle(theta: AngleRad, spacing_over_lambda: f64) -> f64 {
    spacing_over_lambda * theta.value().sin()
}

/// Inverse of [`naf_from_angle`]; fails outside the visible region.
pub fn angle_from_naf(f: f64, spacing_over_lambda: f64) -> Result<AngleRad> {
    if !f.is_finite() || f.abs() > spacing_over_lambda {
        return Err(Error::NonPhysicalNaf {
            naf: f,
            limit: spacing_over_lambda,
        });
    }
    AngleRad::new((f / spacing_over_lambda).asin())
}

/// Intersection of the TX ray and the (rotated) RX ray.
///
/// Solves `tx + t * v(theta_tx) = rx + s * v(theta_rx + rotation)` for
/// `t, s > 0`.
///
/// The tangent closed form of the same intersection is often printed with
/// its components in `(y, x)` order:
///
/// ```text
/// y = (2c - b tan(r)) / (tan(t) - tan(r))
/// x = (c (tan(t) + tan(r)) - b tan(t) tan(r)) / (tan(t) - tan(r))
/// ```
///
/// See [`point_from_angles_closed_form`]; this function returns `(x, y)`.
pub fn point_from_angles(
    geom: &BistaticGeometry,
    theta_tx: AngleRad,
    theta_rx: AngleRad,
) -> Result<CartesianPoint> {
    let global_rx = theta_rx.value() + geom.rx_boresight_rotation.value();
    let (st, ct) = theta_tx.value().sin_cos();
    let (sr, cr) = global_rx.sin_cos();
    let c = geom.half_baseline_c;
    let b = geom.rx_offset_b;

    // [st -sr; ct -cr] [t; s] = [2c; b]
    let det = sr * ct - st * cr;
    if det.abs() < 1e-12 {
        return Err(Error::ParallelRays);
    }
    let t = (b * sr - 2.0 * c * cr) / det;
    let s = (b * st - 2.0 * c * ct) / det;
    if t <= 0.0 || s <= 0.0 {
        return Err(Error::NoForwardIntersection);
    }
    Ok(CartesianPoint::new(-c + t * st, t * ct))
}

/// Tangent closed form of [`point_from_angles`], returned as `(x, y)`.
///
/// Does not check that the intersection lies in front of both arrays.
/// Undefined where either tangent diverges (endfire).
pub fn point_from_angles_closed_form(
    geom: &BistaticGeometry,
    theta_tx: AngleRad,
    theta_rx: AngleRad,
) -> Result<CartesianPoint> {
    let tt = theta_tx.value().tan();
    let tr = (theta_rx.value() + geom.rx_boresight_rotation.value()).tan();
    let c = geom.half_baseline_c;
    let b = geom.rx_offset_b;
    let den = tt - tr;
    if den.abs() < 1e-12 {
        return Err(Error::ParallelRays);
    }
    let y = (2.0 * c - b * tr) / den;
    let x = (c * (tt + tr) - b * tt * tr) / den;
    Ok(CartesianPoint::new(x, y))
}

/// TX and RX azimuths (each relative to its own boresight) of a point.
pub fn angles_from_point(geom: &BistaticGeometry, p: CartesianPoint) -> Result<(AngleRad, AngleRad)> {
    let outside = || Error::OutsideForwardHalfPlane { x: p.x, y: p.y };
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(outside());
    }
    let c = geom.half_baseline_c;
    let b = geom.rx_offset_b;
    let rot = geom.rx_boresight_rotation.value();

    let (tx_dx, tx_dy) = (p.x + c, p.y);
    let (rx_dx, rx_dy) = (p.x - c, p.y - b);
    let (sr, cr) = rot.sin_cos();
    if tx_dy <= 0.0 || rx_dx * sr + rx_dy * cr <= 0.0 {
        return Err(outside());
    }

    let theta_tx = tx_dx.atan2(tx_dy);
    let theta_rx = rx_dx.atan2(rx_dy) - rot;
    Ok((
        AngleRad::new(theta_tx).map_err(|_| outside())?,
        AngleRad::new(theta_rx).map_err(|_| outside())?,
    ))
}

/// Cartesian point to its `(f_tx, f_rx)` NAF pair.
pub fn naf_from_point(
    geom: &BistaticGeometry,
    p: CartesianPoint,
    tx_spacing_over_lambda: f64,
    rx_spacing_over_lambda: f64,
) -> Result<NafPoint> {
    let (t, r) = angles_from_point(geom, p)?;
    Ok(NafPoint::new(
        naf_from_angle(t, tx_spacing_over_lambda),
        naf_from_angle(r, rx_spacing_over_lambda),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    fn geom(c: f64, b: f64, rot: f64) -> BistaticGeometry {
        BistaticGeometry::new(c, b, AngleRad::new(rot).unwrap()).unwrap()
    }

    fn ang(v: f64) -> AngleRad {
        AngleRad::new(v).unwrap()
    }

    /// Independent ray-intersection oracle: Cramer's rule on the raw ray
    /// equations, written out without reusing the implementation.
    fn ray_oracle(c: f64, b: f64, rot: f64, tt: f64, tr: f64) -> (f64, f64) {
        let (a11, a12, a21, a22) = (tt.sin(), -(tr + rot).sin(), tt.cos(), -(tr + rot).cos());
        let (r1, r2) = (2.0 * c, b);
        let d = a11 * a22 - a12 * a21;
        let t = (r1 * a22 - a12 * r2) / d;
        (-c + t * tt.sin(), t * tt.cos())
    }

    #[test]
    fn direction_vector_examples() {
        let v = direction_vector(ang(0.0));
        assert_eq!((v.x, v.y), (0.0, 1.0));
        let v = direction_vector(ang(FRAC_PI_2));
        assert_abs_diff_eq!(v.x, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.y, 0.0, epsilon = 1e-15);
        let v = direction_vector(ang(FRAC_PI_6));
        assert_abs_diff_eq!(v.x, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v.y, 0.8660254037844386, epsilon = 1e-12);
    }

    #[test]
    fn naf_examples() {
        assert_eq!(naf_from_angle(ang(0.0), 0.5), 0.0);
        assert_abs_diff_eq!(naf_from_angle(ang(FRAC_PI_2), 0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(naf_from_angle(ang(FRAC_PI_6), 0.5), 0.25, epsilon = 1e-15);

        assert_abs_diff_eq!(angle_from_naf(0.25, 0.5).unwrap().value(), FRAC_PI_6, epsilon = 1e-12);
        assert_abs_diff_eq!(angle_from_naf(0.5, 0.5).unwrap().value(), FRAC_PI_2, epsilon = 1e-12);
        assert!(matches!(angle_from_naf(0.6, 0.5), Err(Error::NonPhysicalNaf { .. })));
    }

    #[test]
    fn angle_range_is_enforced() {
        assert!(AngleRad::new(FRAC_PI_2 + 1e-9).is_err());
        assert!(AngleRad::new(-FRAC_PI_2).is_ok());
        assert!(AngleRad::new(f64::NAN).is_err());
        assert!(serde_json::from_str::<AngleRad>("3.0").is_err());
    }

    #[test]
    fn point_from_angles_anchor_cases() {
        let g = geom(6.0, 0.0, 0.0);
        let p = point_from_angles(&g, ang(0.5f64.atan()), ang(-(0.5f64.atan()))).unwrap();
        let (ox, oy) = ray_oracle(6.0, 0.0, 0.0, 0.5f64.atan(), -(0.5f64.atan()));
        assert_abs_diff_eq!(ox, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(oy, 12.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 12.0, epsilon = 1e-12);

        let p = point_from_angles(&g, ang(FRAC_PI_4), ang(-FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(p.x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.y, 6.0, epsilon = 1e-12);

        assert!(matches!(
            point_from_angles(&g, ang(0.0), ang(0.0)),
            Err(Error::ParallelRays)
        ));
    }

    #[test]
    fn intersection_behind_an_array_is_rejected() {
        let g = geom(6.0, 0.0, 0.0);
        // Diverging rays meet behind both arrays.
        assert!(matches!(
            point_from_angles(&g, ang(-FRAC_PI_4), ang(FRAC_PI_4)),
            Err(Error::NoForwardIntersection)
        ));
    }

    #[test]
    fn angles_from_point_examples() {
        let g = geom(6.0, 0.0, 0.0);
        let (t, r) = angles_from_point(&g, CartesianPoint::new(0.0, 12.0)).unwrap();
        assert_abs_diff_eq!(t.value(), 0.5f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.value(), -(0.5f64.atan()), epsilon = 1e-15);

        let (t, r) = angles_from_point(&g, CartesianPoint::new(-6.0, 10.0)).unwrap();
        assert_eq!(t.value(), 0.0);
        assert_abs_diff_eq!(r.value(), -(1.2f64.atan()), epsilon = 1e-15);

        let g = geom(6.0, 0.0, 0.1);
        let (t, r) = angles_from_point(&g, CartesianPoint::new(6.0, 10.0)).unwrap();
        assert_abs_diff_eq!(t.value(), 1.2f64.atan(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.value(), -0.1, epsilon = 1e-15);
    }

    #[test]
    fn points_behind_arrays_are_rejected() {
        let g = geom(6.0, 0.0, 0.0);
        assert!(angles_from_point(&g, CartesianPoint::new(0.0, -1.0)).is_err());
        assert!(angles_from_point(&g, CartesianPoint::new(-6.0, 0.0)).is_err());
        let g = geom(6.0, 2.0, 0.0);
        assert!(angles_from_point(&g, CartesianPoint::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn closed_form_agrees_with_rays_in_xy_order() {
        for &(c, b, rot, tt, tr) in &[
            (6.0, 0.0, 0.0, 0.3, -0.4),
            (6.0, 1.5, 0.0, 0.2, -0.6),
            (4.0, -2.0, 0.2, 0.7, -0.9),
            (6.0, 3.0, -0.3, -0.1, -0.5),
        ] {
            let g = geom(c, b, rot);
            let rays = point_from_angles(&g, ang(tt), ang(tr)).unwrap();
            let closed = point_from_angles_closed_form(&g, ang(tt), ang(tr)).unwrap();
            let (ox, oy) = ray_oracle(c, b, rot, tt, tr);
            assert_abs_diff_eq!(rays.x, ox, epsilon = 1e-9);
            assert_abs_diff_eq!(rays.y, oy, epsilon = 1e-9);
            assert_abs_diff_eq!(closed.x, rays.x, epsilon = 1e-9);
            assert_abs_diff_eq!(closed.y, rays.y, epsilon = 1e-9);
        }
    }

    proptest! {
        #[test]
        fn cartesian_round_trip(x in -50.0f64..50.0, y in 1.0f64..100.0, b in -0.5f64..0.5, rot in -0.3f64..0.3) {
            let g = geom(6.0, b, rot);
            let p = CartesianPoint::new(x, y);
            if let Ok((t, r)) = angles_from_point(&g, p) {
                let q = point_from_angles(&g, t, r).unwrap();
                prop_assert!(p.distance(&q) < 1e-6);
            }
        }

        #[test]
        fn rotation_is_applied_to_rx_angle(tt in -1.2f64..1.2, tr in -0.9f64..0.9, rho in -0.5f64..0.5) {
            let rotated = geom(6.0, 1.0, rho);
            let plain = geom(6.0, 1.0, 0.0);
            let a = point_from_angles(&rotated, ang(tt), ang(tr));
            let b = point_from_angles(&plain, ang(tt), ang(tr + rho));
            match (a, b) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "rotation changed feasibility"),
            }
        }

        #[test]
        fn naf_round_trip(theta in -(PI / 2.0 - 1e-6)..(PI / 2.0 - 1e-6), dl in 0.1f64..1.0) {
            let a = ang(theta);
            let back = angle_from_naf(naf_from_angle(a, dl), dl).unwrap();
            prop_assert!((back.value() - theta).abs() < 1e-12 * (1.0 + 1.0 / theta.cos()));
        }

        #[test]
        fn direction_vectors_are_unit(theta in -PI / 2.0..PI / 2.0) {
            let v = direction_vector(ang(theta));
            prop_assert!((v.x * v.x + v.y * v.y - 1.0).abs() < 1e-12);
        }
    }
}
