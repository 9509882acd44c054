//! Pinhole camera, the texture-based view renderer, and the direct ray-traced
//! reference render.

use rayon::prelude::*;

use crate::color::Color;
use crate::error::{Error, Result};
use crate::geometry::{ray_sphere_hit, sphere_param, ProxyModel, Ray, Vec3};
use crate::image::{Image, ToneMap};
use crate::lightfield::{FetchStats, LightFieldTexture, SampleOptions, SamplePlan};
use crate::scene::Scene;

pub const DEFAULT_FOV_DEG: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec3,
    /// Unit view direction.
    pub direction: Vec3,
    /// Horizontal field of view, degrees.
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
    pub up: Vec3,
}

impl Camera {
    pub fn new(position: Vec3, direction: Vec3, fov_deg: f64, width: usize, height: usize) -> Result<Self> {
        Self::with_up(position, direction, fov_deg, width, height, Vec3::Y)
    }

    pub fn with_up(
        position: Vec3,
        direction: Vec3,
        fov_deg: f64,
        width: usize,
        height: usize,
        up: Vec3,
    ) -> Result<Self> {
        if !position.is_finite() || !direction.is_finite() || direction.length() < 1e-12 {
            return Err(Error::Precondition(format!(
                "camera direction must be finite and non-zero, got {:?}",
                direction.to_array()
            )));
        }
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::Precondition(format!("fov must be in (0, 180) degrees, got {fov_deg}")));
        }
        if width == 0 || height == 0 {
            return Err(Error::Precondition("image size must be at least 1x1".into()));
        }
        if up.length() < 1e-12 {
            return Err(Error::Precondition("up hint must be non-zero".into()));
        }
        Ok(Camera {
            position,
            direction: direction.normalize(),
            fov_deg,
            width,
            height,
            up: up.normalize(),
        })
    }

    /// (right, up, forward). Falls back to the world x axis for "right" when
    /// the view direction is parallel to the up hint.
    pub fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let f = self.direction;
        let side = f.cross(self.up);
        let right = if side.length() < 1e-6 {
            let r = Vec3::X - f * f.x;
            if r.length() < 1e-6 {
                Vec3::Z
            } else {
                r.normalize()
            }
        } else {
            side.normalize()
        };
        (right, right.cross(f), f)
    }

    /// Ray through the center of pixel (px, py); py = 0 is the top row.
    pub fn primary_ray(&self, px: usize, py: usize) -> Ray {
        debug_assert!(px < self.width && py < self.height);
        let (right, up, fwd) = self.basis();
        self.ray_in_basis(px, py, right, up, fwd)
    }

    #[inline]
    fn ray_in_basis(&self, px: usize, py: usize, right: Vec3, up: Vec3, fwd: Vec3) -> Ray {
        let half = (self.fov_deg.to_radians() * 0.5).tan();
        let aspect = self.height as f64 / self.width as f64;
        let x = ((px as f64 + 0.5) / self.width as f64 * 2.0 - 1.0) * half;
        let y = (1.0 - (py as f64 + 0.5) / self.height as f64 * 2.0) * half * aspect;
        Ray::new(self.position, fwd + right * x + up * y)
    }

    pub fn with_size(mut self, width: usize, height: usize) -> Self {
        self.width = width;
        self.height = height;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderSettings {
    pub tone: ToneMap,
    pub sample: SampleOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderOutput {
    pub image: Image,
    /// Pixels whose ray met the proxy sphere.
    pub covered_pixels: u64,
    pub fetches: u64,
}

/// Per-row tally used while rendering in parallel.
#[derive(Default, Clone, Copy)]
struct RowStats {
    covered: u64,
    fetches: u64,
}

/// Reconstructs the view seen by `cam` from the texture alone.
pub fn render_view(
    tex: &LightFieldTexture,
    model: &ProxyModel,
    cam: &Camera,
    settings: &RenderSettings,
) -> Result<RenderOutput> {
    if (cam.position - model.center).length() <= model.radius {
        return Err(Error::Precondition(format!(
            "observer at {:?} must be strictly outside the proxy sphere (radius {})",
            cam.position.to_array(),
            model.radius
        )));
    }
    let (right, up, fwd) = cam.basis();
    let mut pixels = vec![[0u8; 3]; cam.width * cam.height];
    let rows: Vec<RowStats> = pixels
        .par_chunks_mut(cam.width)
        .enumerate()
        .map(|(py, row)| {
            let mut stats = RowStats::default();
            let mut fetch = FetchStats::default();
            // texel reads for a pixel happen one pixel later, after its
            // prefetch has had the next pixel's arithmetic to complete
            let mut pending: Option<(usize, SamplePlan)> = None;
            for px in 0..row.len() {
                let ray = cam.ray_in_basis(px, py, right, up, fwd);
                let next = match ray_sphere_hit(&ray, model) {
                    Some((p, _)) => {
                        stats.covered += 1;
                        // the hit is on the sphere up to rounding
                        let coord = sphere_param(p, model).expect("ray hit lies on the proxy");
                        let plan = tex.plan(model, coord, p, cam.position, settings.sample);
                        tex.prefetch(&plan);
                        Some((px, plan))
                    }
                    None => {
                        row[px] = settings.tone.encode(Color::BLACK);
                        None
                    }
                };
                if let Some((qx, plan)) = pending.take() {
                    row[qx] = settings.tone.encode(tex.resolve(&plan, &mut fetch));
                }
                pending = next;
            }
            if let Some((qx, plan)) = pending {
                row[qx] = settings.tone.encode(tex.resolve(&plan, &mut fetch));
            }
            stats.fetches = fetch.fetches;
            stats
        })
        .collect();
    let (covered_pixels, fetches) = rows
        .iter()
        .fold((0, 0), |(c, f), r| (c + r.covered, f + r.fetches));
    Ok(RenderOutput {
        image: Image::from_pixels(cam.width, cam.height, pixels)?,
        covered_pixels,
        fetches,
    })
}

/// Ray-traces the scene objects directly; the proxy sphere plays no part.
pub fn render_direct(scene: &Scene, cam: &Camera, settings: &RenderSettings) -> Image {
    let (right, up, fwd) = cam.basis();
    let mut pixels = vec![[0u8; 3]; cam.width * cam.height];
    pixels
        .par_chunks_mut(cam.width)
        .enumerate()
        .for_each(|(py, row)| {
            for (px, out) in row.iter_mut().enumerate() {
                let ray = cam.ray_in_basis(px, py, right, up, fwd);
                *out = settings.tone.encode(scene.trace(&ray));
            }
        });
    Image::from_pixels(cam.width, cam.height, pixels).expect("pixel count matches")
}

/// `count` cameras evenly spaced on the horizontal circle through the
/// template position around the proxy center, each aimed at the center.
/// Frame 0 is the template position.
pub fn orbit_frames(template: &Camera, model: &ProxyModel, count: usize) -> Vec<Camera> {
    let rel = template.position - model.center;
    (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / count as f64;
            let (s, c) = a.sin_cos();
            let p = Vec3::new(rel.x * c - rel.z * s, rel.y, rel.x * s + rel.z * c);
            let mut cam = *template;
            cam.position = model.center + p;
            if p.length() > 0.0 {
                cam.direction = (-p).normalize();
            }
            cam
        })
        .collect()
}
