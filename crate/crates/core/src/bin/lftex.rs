use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lftex::experiment::{self, AliasingSettings, BakeSettings, SweepSettings};
use lftex::geometry::{ProxyModel, Vec3};
use lftex::metrics::{MetricReport, Region};
use lftex::parallel::{current_threads, threads_from_env, with_threads};
use lftex::render::{orbit_frames, render_direct, render_view, DEFAULT_FOV_DEG};
use lftex::scene::Placement;
use lftex::synthesis::synthesize_with_report;
use lftex::{
    Camera, ChannelFormat, Dims, Error, Image, LightFieldTexture, RenderSettings, Scene, SupersampleMode,
    SynthesisConfig, ToneMap,
};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;
const EXIT_THRESHOLD: u8 = 5;

#[derive(Parser)]
#[command(name = "lftex", version, about = "Bake, view and measure 4D light-field textures")]
struct Cli {
    /// Worker threads (falls back to LF_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print a machine-readable JSON summary instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bake a scene into an LF4D texture.
    Synth(SynthArgs),
    /// Render a view from an LF4D texture.
    Render(RenderArgs),
    /// Ray trace a scene directly (reference image).
    Direct(DirectArgs),
    /// PSNR, MSE and gradient energy of two PPM images.
    Compare(CompareArgs),
    /// Check object placement against the proxy sphere.
    Validate(ValidateArgs),
    /// Time texture-based rendering over an orbit.
    Bench(BenchArgs),
    /// Run a bundled experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    scene: PathBuf,
    /// UxVxSxT
    #[arg(long)]
    dims: Dims,
    /// Supersample factor.
    #[arg(long, default_value_t = 7)]
    ss: usize,
    /// none, latin or tensor.
    #[arg(long, default_value_t = SupersampleMode::Latin)]
    mode: SupersampleMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// rgb8 or rgbf32.
    #[arg(long, default_value = "rgb8")]
    format: ChannelFormat,
    #[arg(long, short)]
    out: PathBuf,
    /// Suppress progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Clone)]
struct CameraArgs {
    /// Observer position x,y,z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    pos: Vec3,
    /// View direction x,y,z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    dir: Vec3,
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    fov: f64,
    /// WxH, or N for a square image.
    #[arg(long, value_parser = parse_size, default_value = "512")]
    size: (usize, usize),
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "0,1,0")]
    up: Vec3,
    /// Encode with gamma 2.2 instead of a plain clamp.
    #[arg(long)]
    gamma: bool,
}

impl CameraArgs {
    fn camera(&self) -> lftex::Result<Camera> {
        Camera::with_up(self.pos, self.dir, self.fov, self.size.0, self.size.1, self.up)
    }

    fn settings(&self) -> RenderSettings {
        RenderSettings {
            tone: if self.gamma { ToneMap::Gamma22 } else { ToneMap::Clamp },
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Take the proxy sphere from this scene file.
    #[arg(long, conflicts_with_all = ["diameter", "center"])]
    scene: Option<PathBuf>,
    /// Proxy sphere diameter.
    #[arg(long)]
    diameter: Option<f64>,
    /// Proxy sphere center x,y,z.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    center: Option<Vec3>,
}

impl ModelArgs {
    fn model(&self) -> lftex::Result<ProxyModel> {
        match &self.scene {
            Some(p) => Ok(Scene::load(p)?.model),
            None => ProxyModel::new(self.center.unwrap_or(Vec3::ZERO), self.diameter.unwrap_or(7.0) / 2.0),
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    texture: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    camera: CameraArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct DirectArgs {
    #[arg(long)]
    scene: PathBuf,
    #[command(flatten)]
    camera: CameraArgs,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    /// x,y,width,height
    #[arg(long)]
    region: Option<Region>,
    /// Exit nonzero when PSNR falls below this many dB.
    #[arg(long)]
    min_psnr: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    scene: PathBuf,
    /// Observer positions to check view-dependent objects against (repeatable).
    #[arg(long = "observer", value_parser = parse_vec3, allow_hyphen_values = true)]
    observers: Vec<Vec3>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    texture: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 30)]
    frames: usize,
    /// WxH, or N for a square image.
    #[arg(long, value_parser = parse_size, default_value = "256")]
    size: (usize, usize),
    /// Orbit start position.
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true, default_value = "10,0,0")]
    pos: Vec3,
    #[arg(long, default_value_t = DEFAULT_FOV_DEG)]
    fov: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Aliasing,
    ResolutionSweep,
}

#[derive(Args)]
struct ExperimentArgs {
    name: ExperimentName,
    /// Paper-scale texture dimensions instead of the halved defaults.
    #[arg(long)]
    full: bool,
    #[arg(long, short, default_value = "experiment-out")]
    out: PathBuf,
    /// Rendered image edge in pixels.
    #[arg(long, default_value_t = 256)]
    size: usize,
    /// Supersample factor (latin) for the bakes.
    #[arg(long)]
    ss: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| format!("expected x,y,z: {e}"))?;
    match parts[..] {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected three finite numbers x,y,z, got '{s}'")),
    }
}

fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected WxH or N, got '{s}'");
    let (w, h) = match s.split_once(['x', 'X']) {
        Some((w, h)) => (w.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?),
        None => {
            let n = s.parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) | Error::Format(_) | Error::SceneParse { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

fn with_path<T>(path: &Path, r: lftex::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    })
}

fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).unwrap());
    } else {
        print!("{}", text());
    }
}

fn tone_name(gamma: bool) -> &'static str {
    if gamma {
        "gamma2.2"
    } else {
        "clamp"
    }
}

fn camera_json(c: &CameraArgs, cam: &Camera) -> serde_json::Value {
    json!({
        "position": cam.position,
        "direction": cam.direction,
        "fov_deg": cam.fov_deg,
        "width": cam.width,
        "height": cam.height,
        "up": c.up,
        "tone": tone_name(c.gamma),
    })
}

fn camera_line(c: &CameraArgs, cam: &Camera) -> String {
    let v = |v: Vec3| format!("{},{},{}", v.x, v.y, v.z);
    format!(
        "camera pos={} dir={} fov={} size={}x{} up={} tone={}\n",
        v(cam.position),
        v(cam.direction),
        cam.fov_deg,
        cam.width,
        cam.height,
        v(c.up),
        tone_name(c.gamma)
    )
}

fn cmd_synth(a: &SynthArgs, json: bool) -> Result<(), Failure> {
    let scene = with_path(&a.scene, Scene::load(&a.scene))?;
    let mut config = SynthesisConfig::new(a.dims)
        .with_supersample(a.ss, a.mode)
        .with_seed(a.seed)
        .with_format(a.format);
    config.progress = !a.quiet && !json;
    let (tex, report) = synthesize_with_report(&scene, &config)?;
    with_path(&a.out, tex.save(&a.out))?;
    let secs = report.elapsed.as_secs_f64();
    emit(
        json,
        json!({
            "command": "synth",
            "dims": a.dims.to_string(),
            "texels": report.texels,
            "rays": report.rays,
            "supersample": a.ss,
            "mode": a.mode.to_string(),
            "seed": a.seed,
            "format": format!("{:?}", a.format),
            "elapsed_s": secs,
            "out": a.out,
        }),
        || {
            format!(
                "dims={} texels={} rays={} ss={} mode={} seed={} elapsed={secs:.3}s out={}\n",
                a.dims,
                report.texels,
                report.rays,
                a.ss,
                a.mode,
                a.seed,
                a.out.display()
            )
        },
    );
    Ok(())
}

fn cmd_render(a: &RenderArgs, json: bool) -> Result<(), Failure> {
    let cam = a.camera.camera()?;
    let model = a.model.model()?;
    let tex = with_path(&a.texture, LightFieldTexture::load(&a.texture))?;
    let out = render_view(&tex, &model, &cam, &a.camera.settings())?;
    with_path(&a.out, out.image.save_ppm(&a.out))?;
    emit(
        json,
        json!({
            "command": "render",
            "camera": camera_json(&a.camera, &cam),
            "texture": a.texture,
            "dims": tex.dims().to_string(),
            "covered_pixels": out.covered_pixels,
            "fetches": out.fetches,
            "out": a.out,
        }),
        || {
            format!(
                "{}covered={} fetches={} out={}\n",
                camera_line(&a.camera, &cam),
                out.covered_pixels,
                out.fetches,
                a.out.display()
            )
        },
    );
    Ok(())
}

fn cmd_direct(a: &DirectArgs, json: bool) -> Result<(), Failure> {
    let cam = a.camera.camera()?;
    let scene = with_path(&a.scene, Scene::load(&a.scene))?;
    let img = render_direct(&scene, &cam, &a.camera.settings());
    with_path(&a.out, img.save_ppm(&a.out))?;
    emit(
        json,
        json!({"command": "direct", "camera": camera_json(&a.camera, &cam), "out": a.out}),
        || format!("{}out={}\n", camera_line(&a.camera, &cam), a.out.display()),
    );
    Ok(())
}

fn cmd_compare(a: &CompareArgs, json: bool) -> Result<(), Failure> {
    let ia = with_path(&a.a, Image::load_ppm(&a.a))?;
    let ib = with_path(&a.b, Image::load_ppm(&a.b))?;
    let report = MetricReport::compute(&ia, &ib, a.region)?;
    emit(json, serde_json::to_value(&report).unwrap(), || format!("{}\n", report.to_line()));
    if let Some(min) = a.min_psnr {
        if report.psnr < min {
            return Err(Failure::new(
                EXIT_THRESHOLD,
                format!("psnr {:.4} dB below threshold {min} dB", report.psnr),
            ));
        }
    }
    Ok(())
}

fn cmd_validate(a: &ValidateArgs, json: bool) -> Result<(), Failure> {
    let scene = with_path(&a.scene, Scene::load(&a.scene))?;
    let observers = (!a.observers.is_empty()).then_some(a.observers.as_slice());
    for o in &a.observers {
        if (*o - scene.model.center).length() <= scene.model.radius {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("observer {:?} is not strictly outside the proxy sphere", o.to_array()),
            ));
        }
    }
    let reports = scene.validate(observers);
    let failed = reports.iter().any(|r| match &r.observer_ok {
        Some(ok) => ok.iter().any(|&b| !b),
        None => observers.is_none() && r.placement == Placement::ViewDependent,
    });
    emit(json, json!({"command": "validate", "objects": reports, "ok": !failed}), || {
        let mut s = String::new();
        for r in &reports {
            let verdict = match r.placement {
                Placement::Unrestricted => "unrestricted",
                Placement::ViewDependent => "view-dependent",
            };
            s.push_str(&format!(
                "{:<3} {:<12} {:<15} margin={:+.4} bound={:.4}",
                r.index, r.name, verdict, r.margin, r.bounding_radius
            ));
            if let Some(ok) = &r.observer_ok {
                let marks: Vec<&str> = ok.iter().map(|&b| if b { "ok" } else { "FAIL" }).collect();
                s.push_str(&format!(" observers=[{}]", marks.join(",")));
            }
            s.push('\n');
        }
        s
    });
    if failed {
        return Err(Failure::new(EXIT_VALIDATION, "scene has objects that the texture cannot represent correctly"));
    }
    Ok(())
}

fn machine_description() -> String {
    let cpu = std::fs::read_to_string("/proc/cpuinfo")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        })
        .unwrap_or_else(|| "unknown cpu".into());
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    format!("{cpu}, {cores} logical cores, {}-{}", std::env::consts::OS, std::env::consts::ARCH)
}

fn cmd_bench(a: &BenchArgs, json: bool) -> Result<(), Failure> {
    if a.frames == 0 {
        return Err(Failure::new(EXIT_USAGE, "frames must be at least 1"));
    }
    let model = a.model.model()?;
    let tex = with_path(&a.texture, LightFieldTexture::load(&a.texture))?;
    let template = Camera::new(a.pos, model.center - a.pos, a.fov, a.size.0, a.size.1)?;
    let settings = RenderSettings::default();
    let mut times = Vec::with_capacity(a.frames);
    let (mut covered, mut fetches) = (0u64, 0u64);
    for cam in orbit_frames(&template, &model, a.frames) {
        let t0 = Instant::now();
        let out = render_view(&tex, &model, &cam, &settings)?;
        times.push(t0.elapsed().as_secs_f64());
        covered += out.covered_pixels;
        fetches += out.fetches;
    }
    let total: f64 = times.iter().sum();
    let mean_fps = a.frames as f64 / total;
    let min_fps = 1.0 / times.iter().cloned().fold(0.0, f64::max);
    let threads = current_threads();
    let machine = machine_description();
    emit(
        json,
        json!({
            "command": "bench",
            "dims": tex.dims().to_string(),
            "frames": a.frames,
            "width": a.size.0,
            "height": a.size.1,
            "mean_fps": mean_fps,
            "min_fps": min_fps,
            "covered_pixels": covered,
            "fetches": fetches,
            "fetches_per_covered_pixel": fetches as f64 / covered.max(1) as f64,
            "threads": threads,
            "machine": machine,
        }),
        || {
            format!(
                "dims={} frames={} size={}x{} mean_fps={mean_fps:.2} min_fps={min_fps:.2} covered={covered} fetches={fetches} fetches_per_covered={:.1} threads={threads}\nmachine: {machine}\n",
                tex.dims(),
                a.frames,
                a.size.0,
                a.size.1,
                fetches as f64 / covered.max(1) as f64
            )
        },
    );
    Ok(())
}

fn cmd_experiment(a: &ExperimentArgs, json: bool) -> Result<(), Failure> {
    match a.name {
        ExperimentName::Aliasing => {
            let mut settings = if a.full { AliasingSettings::full() } else { AliasingSettings::desk() };
            settings.image_size = a.size;
            settings.bake.seed = a.seed;
            if let Some(n) = a.ss {
                settings.bake.supersample = n;
                settings.bake.mode = if n > 1 { SupersampleMode::Latin } else { SupersampleMode::None };
            }
            let report = experiment::aliasing(&settings, Some(&a.out))?;
            emit(json, serde_json::to_value(&report).unwrap(), || {
                format!("{}report: {}\n", report.summary(), a.out.join("report.json").display())
            });
        }
        ExperimentName::ResolutionSweep => {
            let scene = experiment::bundled_scene("composed")?;
            let dims = if a.full {
                experiment::paper_sweep_dims()
            } else {
                experiment::desk_sweep_dims()
            };
            let settings = SweepSettings {
                image_size: a.size,
                bake: BakeSettings {
                    supersample: a.ss.unwrap_or(BakeSettings::default().supersample),
                    seed: a.seed,
                    ..Default::default()
                },
                ..Default::default()
            };
            let report = experiment::resolution_sweep(
                &scene,
                &dims,
                &experiment::resolution_poses(),
                &settings,
                Some(&a.out),
            )?;
            emit(json, serde_json::to_value(&report).unwrap(), || {
                format!("{}report: {}\n", report.table(), a.out.join("report.json").display())
            });
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a, cli.json),
        Command::Render(a) => cmd_render(a, cli.json),
        Command::Direct(a) => cmd_direct(a, cli.json),
        Command::Compare(a) => cmd_compare(a, cli.json),
        Command::Validate(a) => cmd_validate(a, cli.json),
        Command::Bench(a) => cmd_bench(a, cli.json),
        Command::Experiment(a) => cmd_experiment(a, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(threads_from_env);
    let result = with_threads(threads, || run(&cli)).map_err(Failure::from).and_then(|r| r);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lftex: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
