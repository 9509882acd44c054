//! Reproducible experiment runs over the bundled scenes: blur of an object
//! moved away from the proxy surface, and view quality against texture
//! resolution.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::image::Image;
use crate::lightfield::{ChannelFormat, Dims};
use crate::metrics::{gradient_energy, psnr, Region};
use crate::render::{render_direct, render_view, Camera, RenderSettings, DEFAULT_FOV_DEG};
use crate::scene::Scene;
use crate::synthesis::{synthesize_with_report, SupersampleMode, SynthesisConfig};

pub const COMPOSED_SCENE: &str = include_str!("../scenes/composed.json");
pub const ALIASING_NEAR_SCENE: &str = include_str!("../scenes/aliasing_near.json");
pub const ALIASING_FAR_SCENE: &str = include_str!("../scenes/aliasing_far.json");

/// Loads a bundled scene by name: `composed`, `aliasing_near`, `aliasing_far`.
pub fn bundled_scene(name: &str) -> Result<Scene> {
    let text = match name {
        "composed" => COMPOSED_SCENE,
        "aliasing_near" => ALIASING_NEAR_SCENE,
        "aliasing_far" => ALIASING_FAR_SCENE,
        _ => return Err(Error::Precondition(format!("no bundled scene named '{name}'"))),
    };
    Scene::from_json_str(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pose {
    pub name: &'static str,
    pub position: Vec3,
    pub direction: Vec3,
}

impl Pose {
    pub fn camera(&self, fov_deg: f64, size: usize) -> Result<Camera> {
        Camera::new(self.position, self.direction, fov_deg, size, size)
    }
}

/// The five viewpoints of the resolution comparison.
pub fn resolution_poses() -> Vec<Pose> {
    let p = |name, pos: [f64; 3], dir: [f64; 3]| Pose {
        name,
        position: Vec3::from(pos),
        direction: Vec3::from(dir),
    };
    vec![
        p("front", [10.0, 0.0, 0.0], [-3.0, 0.0, 0.0]),
        p("front-left", [10.0, 0.0, -3.0], [-3.0, 0.0, 0.0]),
        p("front-right", [10.0, 0.0, 3.0], [-3.0, 0.0, 0.0]),
        p("side", [0.0, 0.0, 10.0], [0.0, 0.0, -3.0]),
        p("top", [0.0, 10.0, 0.0], [0.0, -3.0, 0.0]),
    ]
}

/// Viewpoint for the near/far blur comparison.
pub fn aliasing_pose() -> Pose {
    Pose {
        name: "aliasing",
        position: Vec3::new(5.0, 0.0, 0.0),
        direction: Vec3::new(-2.0, 0.0, 0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BakeSettings {
    pub supersample: usize,
    #[serde(serialize_with = "ser_display")]
    pub mode: SupersampleMode,
    pub seed: u64,
    #[serde(serialize_with = "ser_debug")]
    pub format: ChannelFormat,
}

impl Default for BakeSettings {
    fn default() -> Self {
        BakeSettings {
            supersample: 3,
            mode: SupersampleMode::Latin,
            seed: 1,
            format: ChannelFormat::Rgb8,
        }
    }
}

impl BakeSettings {
    pub fn describe(&self) -> String {
        if self.supersample <= 1 || self.mode == SupersampleMode::None {
            "no supersampling".to_string()
        } else {
            format!("{} ss={}", self.mode, self.supersample)
        }
    }

    fn config(&self, dims: Dims) -> SynthesisConfig {
        SynthesisConfig::new(dims)
            .with_supersample(self.supersample, self.mode)
            .with_seed(self.seed)
            .with_format(self.format)
    }
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_debug<S: serde::Serializer, T: std::fmt::Debug>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{v:?}"))
}

fn ser_dims<S: serde::Serializer>(d: &Dims, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(d)
}

// ---- resolution sweep ----

/// The paper-scale texture configurations of the resolution comparison.
pub fn paper_sweep_dims() -> Vec<Dims> {
    [[1024, 512, 128, 128], [512, 256, 32, 32], [64, 32, 256, 256], [512, 256, 64, 64]]
        .iter()
        .map(|d| Dims::new(d[0], d[1], d[2], d[3]).unwrap())
        .collect()
}

/// [`paper_sweep_dims`] with every dimension halved.
pub fn desk_sweep_dims() -> Vec<Dims> {
    paper_sweep_dims()
        .into_iter()
        .map(|d| Dims::new(d.u / 2, d.v / 2, d.s / 2, d.t / 2).unwrap())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSettings {
    pub image_size: usize,
    pub fov_deg: f64,
    pub bake: BakeSettings,
    pub gamma: bool,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            image_size: 256,
            fov_deg: DEFAULT_FOV_DEG,
            bake: BakeSettings::default(),
            gamma: false,
        }
    }
}

impl SweepSettings {
    fn render_settings(&self) -> RenderSettings {
        RenderSettings {
            tone: if self.gamma {
                crate::image::ToneMap::Gamma22
            } else {
                crate::image::ToneMap::Clamp
            },
            ..RenderSettings::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "ser_dims")]
    pub dims: Dims,
    /// PSNR against the direct render, one entry per pose.
    pub psnr: Vec<f64>,
    pub mean_psnr: f64,
    pub synth_seconds: f64,
    pub texels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub settings: SweepSettings,
    pub poses: Vec<Pose>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:<22}", "dims");
        for p in &self.poses {
            out.push_str(&format!("{:>13}", p.name));
        }
        out.push_str(&format!("{:>13}\n", "mean"));
        for row in &self.rows {
            out.push_str(&format!("{:<22}", row.dims.to_string()));
            for v in &row.psnr {
                out.push_str(&format!("{v:>13.3}"));
            }
            out.push_str(&format!("{:>13.3}\n", row.mean_psnr));
        }
        out
    }
}

/// Bakes `scene` at each of `dims`, renders every pose from the texture and
/// directly, and tabulates PSNR. Images go to `out_dir` when given.
pub fn resolution_sweep(
    scene: &Scene,
    dims: &[Dims],
    poses: &[Pose],
    settings: &SweepSettings,
    out_dir: Option<&Path>,
) -> Result<SweepReport> {
    let rs = settings.render_settings();
    let cams = poses
        .iter()
        .map(|p| p.camera(settings.fov_deg, settings.image_size))
        .collect::<Result<Vec<_>>>()?;
    let direct: Vec<Image> = cams.iter().map(|c| render_direct(scene, c, &rs)).collect();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for (p, img) in poses.iter().zip(&direct) {
            img.save_ppm(dir.join(format!("direct_{}.ppm", p.name)))?;
        }
    }

    let mut rows = Vec::with_capacity(dims.len());
    for &d in dims {
        let (tex, report) = synthesize_with_report(scene, &settings.bake.config(d))?;
        let mut values = Vec::with_capacity(poses.len());
        for ((p, cam), reference) in poses.iter().zip(&cams).zip(&direct) {
            let view = render_view(&tex, &scene.model, cam, &rs)?;
            values.push(psnr(&view.image, reference)?);
            if let Some(dir) = out_dir {
                view.image.save_ppm(dir.join(format!("view_{d}_{}.ppm", p.name)))?;
            }
        }
        let mean_psnr = values.iter().sum::<f64>() / values.len() as f64;
        rows.push(SweepRow {
            dims: d,
            psnr: values,
            mean_psnr,
            synth_seconds: report.elapsed.as_secs_f64(),
            texels: report.texels,
        });
    }
    let report = SweepReport {
        settings: settings.clone(),
        poses: poses.to_vec(),
        rows,
    };
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report).unwrap())?;
        std::fs::write(dir.join("report.txt"), report.table())?;
    }
    Ok(report)
}

// ---- aliasing ----

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliasingSettings {
    #[serde(serialize_with = "ser_dims")]
    pub dims: Dims,
    pub bake: BakeSettings,
    pub image_size: usize,
    pub fov_deg: f64,
    pub pose: Pose,
    /// Pixels added around the object's footprint in the direct render.
    pub region_pad: usize,
    /// Smallest far-vs-near drop in gradient energy that counts as blurrier.
    pub min_reduction: f64,
}

impl AliasingSettings {
    /// Half-scale (512x256x32x32) with the default 7-ray latin supersampling.
    pub fn desk() -> Self {
        AliasingSettings {
            dims: Dims::new(512, 256, 32, 32).unwrap(),
            bake: BakeSettings {
                supersample: 7,
                ..BakeSettings::default()
            },
            image_size: 256,
            fov_deg: DEFAULT_FOV_DEG,
            pose: aliasing_pose(),
            region_pad: 2,
            min_reduction: 0.20,
        }
    }

    /// Full 1024x512x32x32.
    pub fn full() -> Self {
        AliasingSettings {
            dims: Dims::new(1024, 512, 32, 32).unwrap(),
            ..Self::desk()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliasingCase {
    pub placement: &'static str,
    pub region: Region,
    /// Gradient energy of the texture-based view inside `region`.
    pub gradient_view: f64,
    /// Gradient energy of the direct render inside `region`.
    pub gradient_direct: f64,
    pub psnr: f64,
    pub synth_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliasingReport {
    pub settings: AliasingSettings,
    pub near: AliasingCase,
    pub far: AliasingCase,
    /// `1 - far.gradient_view / near.gradient_view`.
    pub reduction: f64,
}

impl AliasingReport {
    pub fn summary(&self) -> String {
        format!(
            "near: grad_view={:.5} grad_direct={:.5} psnr={:.2}\nfar:  grad_view={:.5} grad_direct={:.5} psnr={:.2}\nfar-vs-near gradient reduction: {:.1}%\n",
            self.near.gradient_view,
            self.near.gradient_direct,
            self.near.psnr,
            self.far.gradient_view,
            self.far.gradient_direct,
            self.far.psnr,
            self.reduction * 100.0
        )
    }
}

fn aliasing_case(
    placement: &'static str,
    scene: &Scene,
    settings: &AliasingSettings,
    out_dir: Option<&Path>,
) -> Result<AliasingCase> {
    let rs = RenderSettings::default();
    let cam = settings.pose.camera(settings.fov_deg, settings.image_size)?;
    let direct = render_direct(scene, &cam, &rs);
    let region = Region::bounding(&direct, |p| p != [0, 0, 0])
        .ok_or_else(|| Error::Precondition(format!("{placement} object not visible from the aliasing pose")))?
        .padded(settings.region_pad, &direct);

    let (tex, report) = synthesize_with_report(scene, &settings.bake.config(settings.dims))?;
    let view = render_view(&tex, &scene.model, &cam, &rs)?.image;
    drop(tex);
    if let Some(dir) = out_dir {
        direct.save_ppm(dir.join(format!("direct_{placement}.ppm")))?;
        view.save_ppm(dir.join(format!("view_{placement}.ppm")))?;
    }
    Ok(AliasingCase {
        placement,
        region,
        gradient_view: gradient_energy(&view, Some(region))?,
        gradient_direct: gradient_energy(&direct, Some(region))?,
        psnr: psnr(&view, &direct)?,
        synth_seconds: report.elapsed.as_secs_f64(),
    })
}

/// Bakes and views the single cylinder near the proxy surface and far behind it.
pub fn aliasing(settings: &AliasingSettings, out_dir: Option<&Path>) -> Result<AliasingReport> {
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let near = aliasing_case("near", &bundled_scene("aliasing_near")?, settings, out_dir)?;
    let far = aliasing_case("far", &bundled_scene("aliasing_far")?, settings, out_dir)?;
    let report = AliasingReport {
        settings: settings.clone(),
        reduction: 1.0 - far.gradient_view / near.gradient_view,
        near,
        far,
    };
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report).unwrap())?;
        std::fs::write(dir.join("report.txt"), report.summary())?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{validate_scene, Placement};

    #[test]
    fn bundled_scenes_parse() {
        let s = bundled_scene("composed").unwrap();
        assert_eq!(s.primitives.len(), 7);
        assert_eq!(s.model.radius, 3.5);
        assert_eq!(bundled_scene("aliasing_near").unwrap().primitives[0].position, Vec3::new(2.0, 0.0, 0.0));
        assert_eq!(bundled_scene("aliasing_far").unwrap().primitives[0].position, Vec3::new(-5.0, 0.0, 0.0));
        assert!(bundled_scene("nope").is_err());
    }

    #[test]
    fn aliasing_placements() {
        let near = validate_scene(&bundled_scene("aliasing_near").unwrap(), None);
        assert_eq!(near[0].placement, Placement::Unrestricted);
        let far = validate_scene(&bundled_scene("aliasing_far").unwrap(), None);
        assert_eq!(far[0].placement, Placement::ViewDependent);
    }

    #[test]
    fn desk_dims_are_halved() {
        let d = desk_sweep_dims();
        assert_eq!(d[0], Dims::new(512, 256, 64, 64).unwrap());
        assert_eq!(d[2], Dims::new(32, 16, 128, 128).unwrap());
    }

    #[test]
    fn tiny_sweep_runs() {
        let scene = bundled_scene("composed").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let settings = SweepSettings {
            image_size: 24,
            bake: BakeSettings { supersample: 1, mode: SupersampleMode::None, ..Default::default() },
            ..Default::default()
        };
        let dims = [Dims::new(16, 8, 4, 4).unwrap()];
        let poses = resolution_poses();
        let r = resolution_sweep(&scene, &dims, &poses[..2], &settings, Some(dir.path())).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].psnr.len(), 2);
        assert!(dir.path().join("report.json").exists());
        assert!(dir.path().join("view_16x8x4x4_front.ppm").exists());
        assert!(r.table().contains("16x8x4x4"));
    }
}
