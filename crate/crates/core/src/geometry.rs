//! Vector math and the three parametrizations the texture is built on:
//! position on the proxy sphere (u, v), the per-point tangent frame, and the
//! outgoing direction in that frame (s, t).

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for "point lies on the sphere" checks.
pub const ON_SURFACE_TOL: f64 = 1e-6;
/// Minimum accepted ray parameter for intersections.
pub const RAY_EPSILON: f64 = 1e-6;
/// Below this |ŷ × N| the tangent frame falls back to the x axis.
const POLE_EPS: f64 = 1e-6;

pub const GLOBAL_UP: Vec3 = Vec3::new(0.0, 1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.length_squared().sqrt()
    }

    /// Unit vector in the same direction. Zero stays zero.
    #[inline]
    pub fn normalize(self) -> Vec3 {
        let len = self.length();
        if len > 0.0 {
            self / len
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, k: f64) -> Vec3 {
        Vec3::new(self.x / k, self.y / k, self.z / k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit length.
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Self {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Position on the proxy surface, both coordinates in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCoord {
    pub u: f64,
    pub v: f64,
}

impl SurfaceCoord {
    pub fn new(u: f64, v: f64) -> Self {
        SurfaceCoord { u, v }
    }

    /// Azimuth in radians, in [-π, π].
    pub fn azimuth(&self) -> f64 {
        2.0 * PI * self.u - PI
    }

    /// Elevation in radians, in [-π/2, π/2].
    pub fn elevation(&self) -> f64 {
        PI * self.v - FRAC_PI_2
    }
}

/// Outgoing direction relative to a [`SurfaceFrame`], both coordinates in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularCoord {
    pub s: f64,
    pub t: f64,
}

impl AngularCoord {
    pub fn new(s: f64, t: f64) -> Self {
        AngularCoord { s, t }
    }

    /// Horizontal angle within the e_x/e_z plane, radians.
    pub fn alpha(&self) -> f64 {
        PI * self.s - FRAC_PI_2
    }

    /// Elevation toward e_y, radians.
    pub fn beta(&self) -> f64 {
        PI * self.t - FRAC_PI_2
    }
}

/// Orthonormal right-handed basis at a surface point; `e_z` is the outward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFrame {
    pub e_x: Vec3,
    pub e_y: Vec3,
    pub e_z: Vec3,
}

/// The enclosing sphere that carries the texture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyModel {
    pub center: Vec3,
    pub radius: f64,
}

impl ProxyModel {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !center.is_finite() {
            return Err(Error::Precondition(format!(
                "proxy radius must be positive and finite, got {radius}"
            )));
        }
        Ok(ProxyModel { center, radius })
    }

    pub fn from_diameter(center: Vec3, diameter: f64) -> Result<Self> {
        Self::new(center, diameter * 0.5)
    }

    pub fn contains_strictly(&self, p: Vec3) -> bool {
        (p - self.center).length() < self.radius
    }

    /// Outward unit normal at a surface point.
    #[inline]
    pub fn normal_at(&self, p: Vec3) -> Vec3 {
        (p - self.center) / self.radius
    }
}

#[inline]
fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Maps a point on the proxy sphere to (u, v).
///
/// u follows `atan2(x, z)` so that +z is u = 0.5 and +x is u = 0.75; at the
/// poles, where the azimuth is undefined, u is pinned to 0.5.
pub fn sphere_param(p: Vec3, model: &ProxyModel) -> Result<SurfaceCoord> {
    let local = p - model.center;
    let dist = local.length();
    if (dist - model.radius).abs() > ON_SURFACE_TOL * model.radius {
        return Err(Error::Domain(format!(
            "point {:?} is {} from the proxy center, radius is {}",
            p.to_array(),
            dist,
            model.radius
        )));
    }
    Ok(sphere_param_unchecked(local, dist))
}

#[inline]
pub(crate) fn sphere_param_unchecked(local: Vec3, dist: f64) -> SurfaceCoord {
    let horizontal = local.x.hypot(local.z);
    let u = if horizontal <= 1e-12 * dist {
        0.5
    } else {
        clamp_unit((local.x.atan2(local.z) + PI) / (2.0 * PI))
    };
    let v = clamp_unit(((local.y / dist).clamp(-1.0, 1.0).asin() + FRAC_PI_2) / PI);
    SurfaceCoord { u, v }
}

/// Inverse of [`sphere_param`]. The poles are returned exactly.
pub fn sphere_point(c: SurfaceCoord, model: &ProxyModel) -> Vec3 {
    sphere_point_unit(c) * model.radius + model.center
}

/// Unit-sphere version of [`sphere_point`], which also equals the outward normal.
#[inline]
pub(crate) fn sphere_point_unit(c: SurfaceCoord) -> Vec3 {
    if c.v <= 0.0 {
        return -Vec3::Y;
    }
    if c.v >= 1.0 {
        return Vec3::Y;
    }
    let (sin_theta, cos_theta) = c.azimuth().sin_cos();
    let (sin_phi, cos_phi) = c.elevation().sin_cos();
    Vec3::new(cos_phi * sin_theta, sin_phi, cos_phi * cos_theta)
}

/// Tangent frame from a unit normal and the global up vector.
///
/// When the normal is (anti)parallel to up the cross product vanishes; e_x is
/// then the part of the world x axis orthogonal to the normal.
pub fn local_frame(n: Vec3) -> SurfaceFrame {
    let e_z = n;
    let side = GLOBAL_UP.cross(e_z);
    let side_len = side.length();
    let e_x = if side_len < POLE_EPS {
        (Vec3::X - e_z * e_z.x).normalize()
    } else {
        side / side_len
    };
    let e_y = e_z.cross(e_x);
    SurfaceFrame { e_x, e_y, e_z }
}

/// Angular coordinates of an outgoing direction `d` in `frame`.
///
/// `d` must lie in the external hemisphere (d · e_z ≥ -1e-6).
pub fn angular_param(frame: &SurfaceFrame, d: Vec3) -> Result<AngularCoord> {
    if d.dot(frame.e_z) < -ON_SURFACE_TOL {
        return Err(Error::Domain(format!(
            "direction {:?} points into the proxy (d·e_z = {})",
            d.to_array(),
            d.dot(frame.e_z)
        )));
    }
    Ok(angular_param_unchecked(frame, d))
}

#[inline]
pub(crate) fn angular_param_unchecked(frame: &SurfaceFrame, d: Vec3) -> AngularCoord {
    let dy = d.dot(frame.e_y);
    let t = clamp_unit((dy.clamp(-1.0, 1.0).asin() + FRAC_PI_2) / PI);
    let planar = d - frame.e_y * dy;
    let planar_len = planar.length();
    let s = if planar_len < 1e-9 {
        0.5
    } else {
        let sx = (planar.dot(frame.e_x) / planar_len).clamp(-1.0, 1.0);
        clamp_unit((sx.asin() + FRAC_PI_2) / PI)
    };
    AngularCoord { s, t }
}

/// Like [`angular_param`] but directions behind the surface are first pushed
/// onto the hemisphere boundary instead of being rejected.
#[inline]
pub fn angular_param_clamped(frame: &SurfaceFrame, d: Vec3) -> AngularCoord {
    let dz = d.dot(frame.e_z);
    if dz >= 0.0 {
        return angular_param_unchecked(frame, d);
    }
    let rim = d - frame.e_z * dz;
    if rim.length_squared() < 1e-18 {
        // straight through the center; nothing better than head-on
        return AngularCoord { s: 0.5, t: 0.5 };
    }
    angular_param_unchecked(frame, rim.normalize())
}

/// Inverse of [`angular_param`]; the result always satisfies d · e_z ≥ 0.
pub fn angular_dir(frame: &SurfaceFrame, a: AngularCoord) -> Vec3 {
    let (sin_a, cos_a) = a.alpha().sin_cos();
    let (sin_b, cos_b) = a.beta().sin_cos();
    let d = frame.e_x * (cos_b * sin_a) + frame.e_y * sin_b + frame.e_z * (cos_b * cos_a.max(0.0));
    d.normalize()
}

/// Nearest intersection with the proxy sphere at t ≥ 1e-6, with the outward normal.
///
/// Grazing rays (discriminant within 1e-12 of zero) count as hits.
pub fn ray_sphere_hit(ray: &Ray, model: &ProxyModel) -> Option<(Vec3, Vec3)> {
    let oc = ray.origin - model.center;
    let b = oc.dot(ray.direction);
    let c = oc.length_squared() - model.radius * model.radius;
    let mut disc = b * b - c;
    if disc < 0.0 {
        if disc >= -1e-12 * model.radius * model.radius {
            disc = 0.0;
        } else {
            return None;
        }
    }
    let root = disc.sqrt();
    let t = if -b - root >= RAY_EPSILON {
        -b - root
    } else if -b + root >= RAY_EPSILON {
        -b + root
    } else {
        return None;
    };
    let p = ray.at(t);
    Some((p, model.normal_at(p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_model() -> ProxyModel {
        ProxyModel::new(Vec3::ZERO, 3.5).unwrap()
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).length() <= tol
    }

    #[test]
    fn sphere_param_examples() {
        let m = unit_model();
        let c = sphere_param(Vec3::new(0.0, 0.0, 3.5), &m).unwrap();
        assert_eq!((c.u, c.v), (0.5, 0.5));
        let c = sphere_param(Vec3::new(3.5, 0.0, 0.0), &m).unwrap();
        assert!((c.u - 0.75).abs() < 1e-15 && (c.v - 0.5).abs() < 1e-15);
        let c = sphere_param(Vec3::new(0.0, 3.5, 0.0), &m).unwrap();
        assert_eq!((c.u, c.v), (0.5, 1.0));
        let c = sphere_param(Vec3::new(0.0, -3.5, 0.0), &m).unwrap();
        assert_eq!((c.u, c.v), (0.5, 0.0));
    }

    #[test]
    fn sphere_param_rejects_off_surface() {
        let m = unit_model();
        assert!(matches!(
            sphere_param(Vec3::new(0.0, 0.0, 3.6), &m),
            Err(Error::Domain(_))
        ));
        // within relative tolerance
        assert!(sphere_param(Vec3::new(0.0, 0.0, 3.5 * (1.0 + 5e-7)), &m).is_ok());
    }

    #[test]
    fn sphere_point_examples() {
        let m = unit_model();
        assert!(close(sphere_point(SurfaceCoord::new(0.5, 0.5), &m), Vec3::new(0.0, 0.0, 3.5), 1e-12));
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(sphere_point(SurfaceCoord::new(u, 1.0), &m), Vec3::new(0.0, 3.5, 0.0));
        }
        let off = ProxyModel::new(Vec3::new(1.0, -2.0, 3.0), 2.0).unwrap();
        let p = sphere_point(SurfaceCoord::new(0.75, 0.5), &off);
        assert!(close(p, Vec3::new(3.0, -2.0, 3.0), 1e-12));
    }

    #[test]
    fn frame_examples() {
        let f = local_frame(Vec3::Z);
        assert!(close(f.e_x, Vec3::X, 1e-15));
        assert!(close(f.e_y, Vec3::Y, 1e-15));
        assert!(close(f.e_z, Vec3::Z, 1e-15));

        let f = local_frame(Vec3::X);
        assert!(close(f.e_x, Vec3::new(0.0, 0.0, -1.0), 1e-15));
        assert!(close(f.e_y, Vec3::Y, 1e-15));

        let f = local_frame(Vec3::Y);
        assert!(close(f.e_x, Vec3::X, 1e-15));
        assert!(close(f.e_y, Vec3::new(0.0, 0.0, -1.0), 1e-15));

        let f = local_frame(-Vec3::Y);
        assert!(close(f.e_x, Vec3::X, 1e-15));
        assert!(close(f.e_x.cross(f.e_y), f.e_z, 1e-15));
    }

    #[test]
    fn angular_param_examples() {
        let f = local_frame(Vec3::new(0.3, -0.2, 0.9).normalize());
        let a = angular_param(&f, f.e_z).unwrap();
        assert!((a.s - 0.5).abs() < 1e-12 && (a.t - 0.5).abs() < 1e-12);
        let a = angular_param(&f, (f.e_x + f.e_z).normalize()).unwrap();
        assert!((a.s - 0.75).abs() < 1e-12 && (a.t - 0.5).abs() < 1e-12);
        let a = angular_param(&f, f.e_y).unwrap();
        assert_eq!(a.s, 0.5);
        assert!((a.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn angular_param_rejects_inward() {
        let f = local_frame(Vec3::Z);
        assert!(angular_param(&f, -Vec3::Z).is_err());
        assert!(angular_param(&f, Vec3::new(1.0, 0.0, -1e-7).normalize()).is_ok());
    }

    #[test]
    fn angular_param_clamped_pushes_to_rim() {
        let f = local_frame(Vec3::Z);
        let a = angular_param_clamped(&f, Vec3::new(1.0, 0.0, -0.5).normalize());
        assert!((a.s - 1.0).abs() < 1e-12 && (a.t - 0.5).abs() < 1e-12);
        let a = angular_param_clamped(&f, -Vec3::Z);
        assert_eq!((a.s, a.t), (0.5, 0.5));
    }

    #[test]
    fn angular_dir_examples() {
        let f = local_frame(Vec3::new(-0.4, 0.5, 0.2).normalize());
        assert!(close(angular_dir(&f, AngularCoord::new(0.5, 0.5)), f.e_z, 1e-12));
        assert!(close(
            angular_dir(&f, AngularCoord::new(0.75, 0.5)),
            (f.e_x + f.e_z).normalize(),
            1e-12
        ));
        assert!(close(angular_dir(&f, AngularCoord::new(0.5, 1.0)), f.e_y, 1e-12));
        assert!(angular_dir(&f, AngularCoord::new(0.0, 0.5)).dot(f.e_z) >= 0.0);
    }

    #[test]
    fn ray_sphere_examples() {
        let m = unit_model();
        let (p, n) = ray_sphere_hit(&Ray::new(Vec3::new(10.0, 0.0, 0.0), -Vec3::X), &m).unwrap();
        assert!(close(p, Vec3::new(3.5, 0.0, 0.0), 1e-12));
        assert!(close(n, Vec3::X, 1e-12));
        assert!(ray_sphere_hit(&Ray::new(Vec3::new(10.0, 0.0, 0.0), Vec3::X), &m).is_none());

        // tangent line y = r: discriminant is exactly zero
        let graze = Ray::new(Vec3::new(10.0, 3.5, 0.0), -Vec3::X);
        let (p, n) = ray_sphere_hit(&graze, &m).unwrap();
        assert!(close(p, Vec3::new(0.0, 3.5, 0.0), 1e-9));
        assert!(close(n, Vec3::Y, 1e-9));
        assert!(ray_sphere_hit(&Ray::new(Vec3::new(10.0, 3.5001, 0.0), -Vec3::X), &m).is_none());

        // from inside the far wall is returned
        let (p, _) = ray_sphere_hit(&Ray::new(Vec3::ZERO, Vec3::Z), &m).unwrap();
        assert!(close(p, Vec3::new(0.0, 0.0, 3.5), 1e-12));
    }

    #[test]
    fn proxy_model_rejects_bad_radius() {
        assert!(ProxyModel::new(Vec3::ZERO, 0.0).is_err());
        assert!(ProxyModel::new(Vec3::ZERO, f64::NAN).is_err());
        assert_eq!(ProxyModel::from_diameter(Vec3::ZERO, 7.0).unwrap().radius, 3.5);
    }
}
