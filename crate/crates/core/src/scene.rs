//! Primitive scenes, the direct ray tracer, and the placement check that tells
//! which objects the proxy sphere can represent for any outside observer.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::color::Color;
use crate::error::{Error, Result};
use crate::geometry::{ProxyModel, Ray, Vec3, RAY_EPSILON};

const SHADOW_BIAS: f64 = 1e-4;

/// Row-major 3x3 rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    m: [[f64; 3]; 3],
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    fn about_x(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation { m: [[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]] }
    }

    fn about_y(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation { m: [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]] }
    }

    fn about_z(a: f64) -> Self {
        let (s, c) = a.sin_cos();
        Rotation { m: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]] }
    }

    /// Extrinsic X, then Y, then Z rotation (R = Rz · Ry · Rx), angles in degrees.
    pub fn from_euler_xyz_deg(deg: [f64; 3]) -> Self {
        let [x, y, z] = deg.map(f64::to_radians);
        Self::about_z(z).then_after(&Self::about_y(y)).then_after(&Self::about_x(x))
    }

    /// Rotation by `angle` radians about unit `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let a = axis.normalize();
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Rotation {
            m: [
                [t * a.x * a.x + c, t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y],
                [t * a.x * a.y + s * a.z, t * a.y * a.y + c, t * a.y * a.z - s * a.x],
                [t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c],
            ],
        }
    }

    /// Matrix product `self · rhs`.
    pub fn then_after(&self, rhs: &Rotation) -> Rotation {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.m[i][k] * rhs.m[k][j]).sum();
            }
        }
        Rotation { m }
    }

    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    #[inline]
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Sphere { diameter: f64 },
    Cube { side: f64 },
    /// Axis along local y.
    Cylinder { diameter: f64, height: f64 },
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Shape::Sphere { diameter } => diameter > 0.0,
            Shape::Cube { side } => side > 0.0,
            Shape::Cylinder { diameter, height } => diameter > 0.0 && height > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("non-positive dimensions in {self:?}")))
        }
    }

    /// Radius of the tightest sphere about the local origin enclosing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Shape::Sphere { diameter } => diameter / 2.0,
            Shape::Cube { side } => 3f64.sqrt() / 2.0 * side,
            Shape::Cylinder { diameter, height } => (diameter / 2.0).hypot(height / 2.0),
        }
    }

    /// Nearest local-space hit with t ≥ `RAY_EPSILON`, and its outward local normal.
    fn intersect_local(&self, o: Vec3, d: Vec3) -> Option<(f64, Vec3)> {
        match *self {
            Shape::Sphere { diameter } => {
                let r = diameter / 2.0;
                let b = o.dot(d);
                let c = o.length_squared() - r * r;
                let disc = b * b - c;
                if disc < 0.0 {
                    return None;
                }
                let root = disc.sqrt();
                let t = [-b - root, -b + root].into_iter().find(|&t| t >= RAY_EPSILON)?;
                Some((t, (o + d * t) / r))
            }
            Shape::Cube { side } => {
                let h = side / 2.0;
                let (o, d) = (o.to_array(), d.to_array());
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                let mut near_axis = (0, 0.0);
                let mut far_axis = (0, 0.0);
                for k in 0..3 {
                    if d[k].abs() < 1e-300 {
                        if o[k] < -h || o[k] > h {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / d[k];
                    let (mut t0, mut t1) = ((-h - o[k]) * inv, (h - o[k]) * inv);
                    // sign of the face normal entered at t0 / left at t1
                    let (mut s0, mut s1) = (-1.0, 1.0);
                    if t0 > t1 {
                        std::mem::swap(&mut t0, &mut t1);
                        std::mem::swap(&mut s0, &mut s1);
                    }
                    if t0 > t_near {
                        t_near = t0;
                        near_axis = (k, s0);
                    }
                    if t1 < t_far {
                        t_far = t1;
                        far_axis = (k, s1);
                    }
                    if t_near > t_far {
                        return None;
                    }
                }
                let (t, (axis, sign)) = if t_near >= RAY_EPSILON {
                    (t_near, near_axis)
                } else if t_far >= RAY_EPSILON {
                    (t_far, far_axis)
                } else {
                    return None;
                };
                let mut n = [0.0; 3];
                n[axis] = sign;
                Some((t, Vec3::from(n)))
            }
            Shape::Cylinder { diameter, height } => {
                let r = diameter / 2.0;
                let hh = height / 2.0;
                let mut best: Option<(f64, Vec3)> = None;
                let mut consider = |t: f64, n: Vec3| {
                    if t >= RAY_EPSILON && best.map_or(true, |(bt, _)| t < bt) {
                        best = Some((t, n));
                    }
                };
                let a = d.x * d.x + d.z * d.z;
                if a > 1e-300 {
                    let b = o.x * d.x + o.z * d.z;
                    let c = o.x * o.x + o.z * o.z - r * r;
                    let disc = b * b - a * c;
                    if disc >= 0.0 {
                        let root = disc.sqrt();
                        for t in [(-b - root) / a, (-b + root) / a] {
                            let p = o + d * t;
                            if p.y.abs() <= hh {
                                consider(t, Vec3::new(p.x / r, 0.0, p.z / r));
                            }
                        }
                    }
                }
                if d.y.abs() > 1e-300 {
                    for (cap, n) in [(hh, Vec3::Y), (-hh, -Vec3::Y)] {
                        let t = (cap - o.y) / d.y;
                        let p = o + d * t;
                        if p.x * p.x + p.z * p.z <= r * r {
                            consider(t, n);
                        }
                    }
                }
                best
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub albedo: Color,
    pub ambient: f64,
    pub diffuse: f64,
    pub specular: f64,
    pub shininess: f64,
}

impl Material {
    pub const DEFAULT_AMBIENT: f64 = 0.1;
    pub const DEFAULT_DIFFUSE: f64 = 0.7;
    pub const DEFAULT_SPECULAR: f64 = 0.2;
    pub const DEFAULT_SHININESS: f64 = 32.0;

    pub fn with_albedo(albedo: Color) -> Self {
        Material {
            albedo,
            ambient: Self::DEFAULT_AMBIENT,
            diffuse: Self::DEFAULT_DIFFUSE,
            specular: Self::DEFAULT_SPECULAR,
            shininess: Self::DEFAULT_SHININESS,
        }
    }

    fn validate(&self) -> Result<()> {
        let coeffs = [self.ambient, self.diffuse, self.specular];
        if coeffs.iter().any(|k| !(0.0..=1.0).contains(k)) || !(self.shininess > 0.0) {
            return Err(Error::Precondition(format!("material coefficients out of range: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionalLight {
    /// Direction the light travels, unit length.
    pub direction: Vec3,
    pub intensity: Color,
    pub shadows: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub name: String,
    pub shape: Shape,
    pub position: Vec3,
    pub rotation: Rotation,
    pub material: Material,
}

impl Primitive {
    pub fn new(shape: Shape, position: Vec3, rotation_deg: [f64; 3], material: Material) -> Self {
        Primitive {
            name: String::new(),
            shape,
            position,
            rotation: Rotation::from_euler_xyz_deg(rotation_deg),
            material,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Hit distance along `ray` and the outward world-space normal.
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, Vec3)> {
        let rel = ray.origin - self.position;
        let r = self.shape.bounding_radius();
        let b = rel.dot(ray.direction);
        let c = rel.length_squared() - r * r;
        // misses the bounding sphere, or it lies entirely behind the origin
        if (c > 0.0 && b > 0.0) || b * b - c < 0.0 {
            return None;
        }
        let o = self.rotation.apply_inverse(rel);
        let d = self.rotation.apply_inverse(ray.direction);
        self.shape
            .intersect_local(o, d)
            .map(|(t, n)| (t, self.rotation.apply(n).normalize()))
    }

    pub fn bounding_radius(&self) -> f64 {
        self.shape.bounding_radius()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit<'a> {
    pub t: f64,
    pub point: Vec3,
    pub normal: Vec3,
    pub material: &'a Material,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub primitives: Vec<Primitive>,
    pub light: DirectionalLight,
    pub model: ProxyModel,
    pub background: Color,
}

impl Scene {
    /// Empty scene with the conventional light (traveling toward -x), a black
    /// background, and the given proxy.
    pub fn empty(model: ProxyModel) -> Self {
        Scene {
            primitives: Vec::new(),
            light: DirectionalLight {
                direction: -Vec3::X,
                intensity: Color::WHITE,
                shadows: true,
            },
            model,
            background: Color::BLACK,
        }
    }

    pub fn intersect(&self, ray: &Ray) -> Option<Hit<'_>> {
        let mut best: Option<(f64, Vec3, &Primitive)> = None;
        for prim in &self.primitives {
            if let Some((t, n)) = prim.intersect(ray) {
                if best.map_or(true, |(bt, _, _)| t < bt) {
                    best = Some((t, n, prim));
                }
            }
        }
        best.map(|(t, normal, prim)| Hit {
            t,
            point: ray.at(t),
            normal,
            material: &prim.material,
        })
    }

    fn occluded(&self, ray: &Ray) -> bool {
        self.primitives.iter().any(|p| p.intersect(ray).is_some())
    }

    /// Blinn-Phong with a hard shadow toward the light. `view` points from the
    /// hit toward the viewer.
    pub fn shade(&self, hit: &Hit<'_>, view: Vec3) -> Color {
        let m = hit.material;
        let to_light = -self.light.direction;
        let mut c = m.albedo * m.ambient;
        let n_dot_l = hit.normal.dot(to_light);
        // a surface facing away from the light is in its own shadow
        let lit = n_dot_l > 0.0
            && !(self.light.shadows
                && self.occluded(&Ray::new(hit.point + hit.normal * SHADOW_BIAS, to_light)));
        if lit {
            c += m.albedo.modulate(self.light.intensity) * (m.diffuse * n_dot_l);
            let half = (to_light + view).normalize();
            let n_dot_h = hit.normal.dot(half).max(0.0);
            c += self.light.intensity * (m.specular * n_dot_h.powf(m.shininess));
        }
        c.clamped()
    }

    pub fn trace(&self, ray: &Ray) -> Color {
        match self.intersect(ray) {
            Some(hit) => self.shade(&hit, -ray.direction),
            None => self.background,
        }
    }

    /// The same scene rotated rigidly about the proxy center.
    pub fn rotated(&self, rot: &Rotation) -> Scene {
        let c = self.model.center;
        let mut out = self.clone();
        for p in &mut out.primitives {
            p.position = c + rot.apply(p.position - c);
            p.rotation = rot.then_after(&p.rotation);
        }
        out.light.direction = rot.apply(self.light.direction);
        out
    }

    pub fn from_json_str(text: &str) -> Result<Scene> {
        let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::SceneParse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.into_scene()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Scene> {
        Scene::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self, observers: Option<&[Vec3]>) -> Vec<PlacementReport> {
        validate_scene(self, observers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Bounding sphere inside the proxy: correct for every outside observer.
    Unrestricted,
    /// Correct only where the object's projection from the observer lands on the proxy.
    ViewDependent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementReport {
    pub index: usize,
    pub name: String,
    pub placement: Placement,
    /// Proxy radius minus the farthest bounding-sphere extent from the proxy
    /// center. Negative when the bound pokes out of the proxy.
    pub margin: f64,
    pub bounding_radius: f64,
    /// For view-dependent objects and each supplied observer: whether the
    /// object's projection from that observer falls entirely on the proxy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observer_ok: Option<Vec<bool>>,
}

/// Classifies every primitive against the proxy sphere.
pub fn validate_scene(scene: &Scene, observers: Option<&[Vec3]>) -> Vec<PlacementReport> {
    let model = &scene.model;
    scene
        .primitives
        .iter()
        .enumerate()
        .map(|(index, prim)| {
            let radius = prim.bounding_radius();
            let extent = (prim.position - model.center).length() + radius;
            let margin = model.radius - extent;
            let placement = if margin > 0.0 {
                Placement::Unrestricted
            } else {
                Placement::ViewDependent
            };
            let observer_ok = match (placement, observers) {
                (Placement::ViewDependent, Some(obs)) => Some(
                    obs.iter()
                        .map(|&o| projection_on_model(o, prim.position, radius, model))
                        .collect(),
                ),
                _ => None,
            };
            PlacementReport {
                index,
                name: prim.name.clone(),
                placement,
                margin,
                bounding_radius: radius,
                observer_ok,
            }
        })
        .collect()
}

/// Whether the cone from `observer` around a bounding sphere lies inside the
/// cone the proxy subtends, with the object beyond the proxy's near side.
fn projection_on_model(observer: Vec3, center: Vec3, radius: f64, model: &ProxyModel) -> bool {
    let to_obj = center - observer;
    let to_model = model.center - observer;
    let (d_obj, d_model) = (to_obj.length(), to_model.length());
    if d_model <= model.radius || d_obj <= radius {
        return false;
    }
    let half_model = (model.radius / d_model).asin();
    let half_obj = (radius / d_obj).asin();
    let between = (to_obj.dot(to_model) / (d_obj * d_model)).clamp(-1.0, 1.0).acos();
    // the near tangent plane of the proxy as seen along the center line
    let near = d_model - model.radius;
    between + half_obj <= half_model && to_obj.dot(to_model) / d_model - radius >= near
}

// ---- scene file ----

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    model: ModelSpec,
    #[serde(default)]
    background: Option<Color>,
    #[serde(default)]
    light: Option<LightSpec>,
    /// Defaults applied to every object before its own overrides.
    #[serde(default)]
    material: MaterialSpec,
    #[serde(default)]
    objects: Vec<ObjectSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    #[serde(default)]
    center: Vec3,
    diameter: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LightSpec {
    direction: Vec3,
    #[serde(default)]
    intensity: Option<Color>,
    #[serde(default)]
    shadows: Option<bool>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialSpec {
    ka: Option<f64>,
    kd: Option<f64>,
    ks: Option<f64>,
    shininess: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ShapeKind {
    Sphere,
    Cube,
    Cylinder,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectSpec {
    #[serde(default)]
    name: Option<String>,
    shape: ShapeKind,
    dims: Vec<f64>,
    position: Vec3,
    #[serde(default)]
    rotation_deg: [f64; 3],
    #[serde(default)]
    color: Option<String>,
    #[serde(default)]
    albedo: Option<Color>,
    #[serde(default)]
    material: MaterialSpec,
}

impl MaterialSpec {
    fn apply(&self, m: &mut Material) {
        if let Some(v) = self.ka {
            m.ambient = v;
        }
        if let Some(v) = self.kd {
            m.diffuse = v;
        }
        if let Some(v) = self.ks {
            m.specular = v;
        }
        if let Some(v) = self.shininess {
            m.shininess = v;
        }
    }
}

impl SceneFile {
    fn into_scene(self) -> Result<Scene> {
        let model = ProxyModel::from_diameter(self.model.center, self.model.diameter)?;
        let mut scene = Scene::empty(model);
        if let Some(bg) = self.background {
            scene.background = bg;
        }
        if let Some(light) = self.light {
            if light.direction.length() == 0.0 || !light.direction.is_finite() {
                return Err(Error::Precondition("light direction must be non-zero".into()));
            }
            scene.light.direction = light.direction.normalize();
            if let Some(i) = light.intensity {
                scene.light.intensity = i;
            }
            if let Some(s) = light.shadows {
                scene.light.shadows = s;
            }
        }
        for (k, obj) in self.objects.into_iter().enumerate() {
            let shape = match (obj.shape, obj.dims.as_slice()) {
                (ShapeKind::Sphere, &[d]) => Shape::Sphere { diameter: d },
                (ShapeKind::Cube, &[s]) => Shape::Cube { side: s },
                (ShapeKind::Cylinder, &[d, h]) => Shape::Cylinder { diameter: d, height: h },
                (kind, dims) => {
                    return Err(Error::Precondition(format!(
                        "object {k}: {kind:?} does not take dims {dims:?}"
                    )))
                }
            };
            shape.validate()?;
            if obj.rotation_deg.iter().any(|a| !a.is_finite()) || !obj.position.is_finite() {
                return Err(Error::Precondition(format!("object {k}: non-finite transform")));
            }
            let albedo = match (obj.albedo, obj.color.as_deref()) {
                (Some(a), _) => a,
                (None, Some(name)) => Color::named(name).ok_or_else(|| {
                    Error::Precondition(format!("object {k}: unknown color name '{name}'"))
                })?,
                (None, None) => Color::WHITE,
            };
            let mut material = Material::with_albedo(albedo);
            self.material.apply(&mut material);
            obj.material.apply(&mut material);
            material.validate()?;
            let name = obj
                .name
                .or(obj.color)
                .unwrap_or_else(|| format!("object-{k}"));
            scene
                .primitives
                .push(Primitive::new(shape, obj.position, obj.rotation_deg, material).named(name));
        }
        Ok(scene)
    }
}
