//! C ABI over `lftex`.
//!
//! Objects cross the boundary as opaque handles (`LfScene`, `LfTexture`,
//! `LfImage`) created by `lf_*_load` / `lf_*_synthesize` / `lf_render_*` and
//! released with the matching `lf_*_free`. Every fallible call returns an
//! `LfStatus`; on failure `lf_last_error()` describes the problem.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lftex::geometry::{ProxyModel, Vec3};
use lftex::render::{render_direct, render_view};
use lftex::synthesis::synthesize;
use lftex::{
    Camera, ChannelFormat, Dims, Error, Image, LightFieldTexture, RenderSettings, Scene, SupersampleMode,
    SynthesisConfig, ToneMap,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    SceneParse = 5,
    Domain = 6,
    Precondition = 7,
    OutOfBounds = 8,
    SizeMismatch = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfModel {
    pub center: LfVec3,
    pub radius: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LfCamera {
    pub position: LfVec3,
    pub direction: LfVec3,
    /// Zero vector selects +y.
    pub up: LfVec3,
    /// Horizontal field of view in degrees.
    pub fov_deg: f64,
    pub width: u32,
    pub height: u32,
    /// Nonzero for gamma 2.2 output, zero for a plain clamp.
    pub gamma: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfSupersample {
    None = 0,
    Latin = 1,
    Tensor = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfFormat {
    Rgb8 = 0,
    RgbF32 = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LfSynthOptions {
    pub dims: [u32; 4],
    pub supersample: u32,
    pub mode: LfSupersample,
    pub seed: u64,
    pub format: LfFormat,
}

pub struct LfScene(Scene);
pub struct LfTexture(LightFieldTexture);
pub struct LfImage(Image);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LfStatus {
    match e {
        Error::Domain(_) => LfStatus::Domain,
        Error::Index { .. } => LfStatus::OutOfBounds,
        Error::Precondition(_) => LfStatus::Precondition,
        Error::Format(_) => LfStatus::Format,
        Error::SceneParse { .. } => LfStatus::SceneParse,
        Error::SizeMismatch(..) => LfStatus::SizeMismatch,
        Error::Io(_) => LfStatus::Io,
    }
}

struct Fail(LfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LfStatus::NullArgument, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LfStatus::Panic
        }
    }
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(LfStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

fn vec3(v: LfVec3) -> Vec3 {
    Vec3::new(v.x, v.y, v.z)
}

fn lf_vec3(v: Vec3) -> LfVec3 {
    LfVec3 { x: v.x, y: v.y, z: v.z }
}

fn model(m: &LfModel) -> Result<ProxyModel, Fail> {
    Ok(ProxyModel::new(vec3(m.center), m.radius)?)
}

fn camera(c: &LfCamera) -> Result<(Camera, RenderSettings), Fail> {
    let up = vec3(c.up);
    let up = if up.length() == 0.0 { Vec3::Y } else { up };
    let cam = Camera::with_up(
        vec3(c.position),
        vec3(c.direction),
        c.fov_deg,
        c.width as usize,
        c.height as usize,
        up,
    )?;
    let settings = RenderSettings {
        tone: if c.gamma != 0 { ToneMap::Gamma22 } else { ToneMap::Clamp },
        ..Default::default()
    };
    Ok((cam, settings))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next `lf_*` call on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a NUL-terminated string.
#[no_mangle]
pub extern "C" fn lf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- scenes ----

#[no_mangle]
pub unsafe extern "C" fn lf_scene_load(file: *const c_char, out: *mut *mut LfScene) -> LfStatus {
    guard(|| put(out, LfScene(Scene::load(path(file)?)?)))
}

#[no_mangle]
pub unsafe extern "C" fn lf_scene_from_json(json: *const c_char, out: *mut *mut LfScene) -> LfStatus {
    guard(|| {
        let text = path(json)?;
        put(out, LfScene(Scene::from_json_str(text)?))
    })
}

/// The scene's proxy sphere.
#[no_mangle]
pub unsafe extern "C" fn lf_scene_model(scene: *const LfScene, out: *mut LfModel) -> LfStatus {
    guard(|| {
        let s = get(scene, "scene")?;
        let out = out.as_mut().ok_or_else(|| null("output model"))?;
        *out = LfModel {
            center: lf_vec3(s.0.model.center),
            radius: s.0.model.radius,
        };
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lf_scene_free(scene: *mut LfScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

// ---- textures ----

#[no_mangle]
pub unsafe extern "C" fn lf_texture_synthesize(
    scene: *const LfScene,
    options: *const LfSynthOptions,
    out: *mut *mut LfTexture,
) -> LfStatus {
    guard(|| {
        let s = get(scene, "scene")?;
        let o = get(options, "options")?;
        let [u, v, sd, t] = o.dims.map(|d| d as usize);
        let mode = match o.mode {
            LfSupersample::None => SupersampleMode::None,
            LfSupersample::Latin => SupersampleMode::Latin,
            LfSupersample::Tensor => SupersampleMode::Tensor,
        };
        let format = match o.format {
            LfFormat::Rgb8 => ChannelFormat::Rgb8,
            LfFormat::RgbF32 => ChannelFormat::RgbF32,
        };
        let config = SynthesisConfig::new(Dims::new(u, v, sd, t)?)
            .with_supersample(o.supersample as usize, mode)
            .with_seed(o.seed)
            .with_format(format);
        put(out, LfTexture(synthesize(&s.0, &config)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lf_texture_load(file: *const c_char, out: *mut *mut LfTexture) -> LfStatus {
    guard(|| put(out, LfTexture(LightFieldTexture::load(path(file)?)?)))
}

#[no_mangle]
pub unsafe extern "C" fn lf_texture_save(tex: *const LfTexture, file: *const c_char) -> LfStatus {
    guard(|| Ok(get(tex, "texture")?.0.save(path(file)?)?))
}

/// Writes U, V, S, T into `out[0..4]`.
#[no_mangle]
pub unsafe extern "C" fn lf_texture_dims(tex: *const LfTexture, out: *mut u32) -> LfStatus {
    guard(|| {
        let t = get(tex, "texture")?;
        if out.is_null() {
            return Err(null("output dims"));
        }
        for (k, d) in t.0.dims().as_array().into_iter().enumerate() {
            *out.add(k) = d as u32;
        }
        Ok(())
    })
}

/// Reconstructs the color seen at surface point `p` from observer `o`.
#[no_mangle]
pub unsafe extern "C" fn lf_texture_sample(
    tex: *const LfTexture,
    proxy: *const LfModel,
    p: LfVec3,
    o: LfVec3,
    out_rgb: *mut f64,
) -> LfStatus {
    guard(|| {
        let t = get(tex, "texture")?;
        let m = model(get(proxy, "model")?)?;
        if out_rgb.is_null() {
            return Err(null("output color"));
        }
        let c = t.0.sample(&m, vec3(p), vec3(o))?;
        for (k, v) in c.channels().into_iter().enumerate() {
            *out_rgb.add(k) = v;
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn lf_texture_free(tex: *mut LfTexture) {
    if !tex.is_null() {
        drop(Box::from_raw(tex));
    }
}

// ---- rendering ----

#[no_mangle]
pub unsafe extern "C" fn lf_render_view(
    tex: *const LfTexture,
    proxy: *const LfModel,
    cam: *const LfCamera,
    out: *mut *mut LfImage,
) -> LfStatus {
    guard(|| {
        let t = get(tex, "texture")?;
        let m = model(get(proxy, "model")?)?;
        let (c, settings) = camera(get(cam, "camera")?)?;
        put(out, LfImage(render_view(&t.0, &m, &c, &settings)?.image))
    })
}

#[no_mangle]
pub unsafe extern "C" fn lf_render_direct(
    scene: *const LfScene,
    cam: *const LfCamera,
    out: *mut *mut LfImage,
) -> LfStatus {
    guard(|| {
        let s = get(scene, "scene")?;
        let (c, settings) = camera(get(cam, "camera")?)?;
        put(out, LfImage(render_direct(&s.0, &c, &settings)))
    })
}

// ---- images ----

#[no_mangle]
pub unsafe extern "C" fn lf_image_load_ppm(file: *const c_char, out: *mut *mut LfImage) -> LfStatus {
    guard(|| put(out, LfImage(Image::load_ppm(path(file)?)?)))
}

#[no_mangle]
pub unsafe extern "C" fn lf_image_save_ppm(img: *const LfImage, file: *const c_char) -> LfStatus {
    guard(|| Ok(get(img, "image")?.0.save_ppm(path(file)?)?))
}

/// Width in pixels; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lf_image_width(img: *const LfImage) -> u32 {
    img.as_ref().map_or(0, |i| i.0.width() as u32)
}

/// Height in pixels; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn lf_image_height(img: *const LfImage) -> u32 {
    img.as_ref().map_or(0, |i| i.0.height() as u32)
}

/// Row-major RGB bytes, `3 * width * height` of them, owned by the image.
#[no_mangle]
pub unsafe extern "C" fn lf_image_pixels(img: *const LfImage) -> *const u8 {
    img.as_ref().map_or(ptr::null(), |i| i.0.pixels().as_ptr().cast())
}

#[no_mangle]
pub unsafe extern "C" fn lf_image_free(img: *mut LfImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// PSNR in dB over all channels; +infinity for identical images.
#[no_mangle]
pub unsafe extern "C" fn lf_psnr(a: *const LfImage, b: *const LfImage, out: *mut f64) -> LfStatus {
    guard(|| {
        let (a, b) = (get(a, "image a")?, get(b, "image b")?);
        let out = out.as_mut().ok_or_else(|| null("output"))?;
        *out = lftex::metrics::psnr(&a.0, &b.0)?;
        Ok(())
    })
}
