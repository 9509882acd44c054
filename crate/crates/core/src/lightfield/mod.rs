//! The 4D light-field texture: storage, grid registration, and texel access.
//!
//! Texels are addressed by `(iu, iv, is, it)` and stored row-major with the
//! angular indices innermost, so the 2x2 angular block read at one spatial
//! node is two contiguous pairs.
//!
//! Grid registration is node-centered. The azimuthal `u` axis is periodic
//! (node `U` is node `0`); `v`, `s` and `t` include both endpoints.

mod format;
mod sampler;

pub use format::{read_lf4d, write_lf4d, LF4D_MAGIC, LF4D_VERSION};
pub use sampler::{FetchStats, SampleOptions, ViewDirection};
pub(crate) use sampler::SamplePlan;

use rayon::prelude::*;

use crate::color::Color;
use crate::error::{Error, Result};

/// Texture extents along (u, v, s, t).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub u: usize,
    pub v: usize,
    pub s: usize,
    pub t: usize,
}

impl Dims {
    pub fn new(u: usize, v: usize, s: usize, t: usize) -> Result<Self> {
        let d = Dims { u, v, s, t };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().any(|&n| n < 2) {
            return Err(Error::Precondition(format!(
                "every texture dimension must be at least 2, got {self}"
            )));
        }
        if self.checked_count().is_none() {
            return Err(Error::Precondition(format!("texture dims {self} overflow")));
        }
        Ok(())
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.u, self.v, self.s, self.t]
    }

    fn checked_count(&self) -> Option<usize> {
        self.u
            .checked_mul(self.v)?
            .checked_mul(self.s)?
            .checked_mul(self.t)
    }

    pub fn texel_count(&self) -> usize {
        self.u * self.v * self.s * self.t
    }

    #[inline]
    pub fn offset(&self, idx: TexelIndex) -> usize {
        ((idx.iu * self.v + idx.iv) * self.s + idx.is) * self.t + idx.it
    }

    pub fn index_of(&self, offset: usize) -> TexelIndex {
        let it = offset % self.t;
        let rest = offset / self.t;
        let is = rest % self.s;
        let rest = rest / self.s;
        let iv = rest % self.v;
        let iu = rest / self.v;
        TexelIndex { iu, iv, is, it }
    }

    pub fn contains(&self, idx: TexelIndex) -> bool {
        idx.iu < self.u && idx.iv < self.v && idx.is < self.s && idx.it < self.t
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}x{}", self.u, self.v, self.s, self.t)
    }
}

impl std::str::FromStr for Dims {
    type Err = Error;

    /// Parses `UxVxSxT`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        if parts.len() != 4 {
            return Err(Error::Precondition(format!("expected UxVxSxT, got '{s}'")));
        }
        let mut n = [0usize; 4];
        for (slot, part) in n.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| Error::Precondition(format!("bad dimension '{part}' in '{s}'")))?;
        }
        Dims::new(n[0], n[1], n[2], n[3])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TexelIndex {
    pub iu: usize,
    pub iv: usize,
    pub is: usize,
    pub it: usize,
}

impl TexelIndex {
    pub const fn new(iu: usize, iv: usize, is: usize, it: usize) -> Self {
        TexelIndex { iu, iv, is, it }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelFormat {
    Rgb8,
    RgbF32,
}

impl ChannelFormat {
    pub fn code(self) -> u16 {
        match self {
            ChannelFormat::Rgb8 => 0,
            ChannelFormat::RgbF32 => 1,
        }
    }

    pub fn from_code(code: u16) -> Option<Self> {
        match code {
            0 => Some(ChannelFormat::Rgb8),
            1 => Some(ChannelFormat::RgbF32),
            _ => None,
        }
    }

    pub fn bytes_per_texel(self) -> usize {
        match self {
            ChannelFormat::Rgb8 => 3,
            ChannelFormat::RgbF32 => 12,
        }
    }
}

impl std::str::FromStr for ChannelFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rgb8" => Ok(ChannelFormat::Rgb8),
            "rgbf32" => Ok(ChannelFormat::RgbF32),
            _ => Err(Error::Precondition(format!("unknown channel format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Texels {
    Rgb8(Vec<[u8; 3]>),
    RgbF32(Vec<[f32; 3]>),
}

#[inline]
fn quantize(x: f64) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
fn encode_rgb8(c: Color) -> [u8; 3] {
    [quantize(c.r), quantize(c.g), quantize(c.b)]
}

#[inline]
fn encode_f32(c: Color) -> [f32; 3] {
    let c = c.clamped();
    [c.r as f32, c.g as f32, c.b as f32]
}

/// Dense U·V·S·T texture of colors.
#[derive(Debug, Clone, PartialEq)]
pub struct LightFieldTexture {
    dims: Dims,
    texels: Texels,
}

impl LightFieldTexture {
    /// An all-black texture.
    pub fn new(dims: Dims, format: ChannelFormat) -> Result<Self> {
        dims.validate()?;
        let n = dims.texel_count();
        let texels = match format {
            ChannelFormat::Rgb8 => Texels::Rgb8(vec![[0; 3]; n]),
            ChannelFormat::RgbF32 => Texels::RgbF32(vec![[0.0; 3]; n]),
        };
        Ok(LightFieldTexture { dims, texels })
    }

    /// Fills every texel from `f` in parallel. Colors are clamped to [0, 1]
    /// and quantized for the chosen format. The result does not depend on
    /// the number of worker threads.
    pub fn from_par_fn<F>(dims: Dims, format: ChannelFormat, f: F) -> Result<Self>
    where
        F: Fn(TexelIndex) -> Color + Sync,
    {
        dims.validate()?;
        let n = dims.texel_count();
        // one chunk per (iu, iv) spatial node
        let chunk = dims.s * dims.t;
        let texels = match format {
            ChannelFormat::Rgb8 => {
                let mut data = vec![[0u8; 3]; n];
                data.par_chunks_mut(chunk).enumerate().for_each(|(node, out)| {
                    for (k, texel) in out.iter_mut().enumerate() {
                        *texel = encode_rgb8(f(dims.index_of(node * chunk + k)));
                    }
                });
                Texels::Rgb8(data)
            }
            ChannelFormat::RgbF32 => {
                let mut data = vec![[0f32; 3]; n];
                data.par_chunks_mut(chunk).enumerate().for_each(|(node, out)| {
                    for (k, texel) in out.iter_mut().enumerate() {
                        *texel = encode_f32(f(dims.index_of(node * chunk + k)));
                    }
                });
                Texels::RgbF32(data)
            }
        };
        Ok(LightFieldTexture { dims, texels })
    }

    pub(crate) fn from_rgb8(dims: Dims, data: Vec<[u8; 3]>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.texel_count() {
            return Err(Error::Format(format!(
                "expected {} texels, got {}",
                dims.texel_count(),
                data.len()
            )));
        }
        Ok(LightFieldTexture {
            dims,
            texels: Texels::Rgb8(data),
        })
    }

    pub(crate) fn from_f32(dims: Dims, data: Vec<[f32; 3]>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.texel_count() {
            return Err(Error::Format(format!(
                "expected {} texels, got {}",
                dims.texel_count(),
                data.len()
            )));
        }
        Ok(LightFieldTexture {
            dims,
            texels: Texels::RgbF32(data),
        })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn format(&self) -> ChannelFormat {
        match self.texels {
            Texels::Rgb8(_) => ChannelFormat::Rgb8,
            Texels::RgbF32(_) => ChannelFormat::RgbF32,
        }
    }

    pub fn texel_count(&self) -> usize {
        self.dims.texel_count()
    }

    pub fn fetch(&self, idx: TexelIndex) -> Result<Color> {
        if !self.dims.contains(idx) {
            return Err(self.out_of_bounds(idx));
        }
        Ok(self.fetch_offset(self.dims.offset(idx)))
    }

    pub fn store(&mut self, idx: TexelIndex, c: Color) -> Result<()> {
        if !self.dims.contains(idx) {
            return Err(self.out_of_bounds(idx));
        }
        let off = self.dims.offset(idx);
        match &mut self.texels {
            Texels::Rgb8(d) => d[off] = encode_rgb8(c),
            Texels::RgbF32(d) => d[off] = encode_f32(c),
        }
        Ok(())
    }

    fn out_of_bounds(&self, idx: TexelIndex) -> Error {
        Error::Index {
            index: [idx.iu, idx.iv, idx.is, idx.it],
            dims: self.dims.as_array(),
        }
    }

    #[inline]
    pub(crate) fn fetch_offset(&self, off: usize) -> Color {
        match &self.texels {
            Texels::Rgb8(d) => {
                let [r, g, b] = d[off];
                Color::new(r as f64 / 255.0, g as f64 / 255.0, b as f64 / 255.0)
            }
            Texels::RgbF32(d) => {
                let [r, g, b] = d[off];
                Color::new(r as f64, g as f64, b as f64)
            }
        }
    }

    /// Hints the cache to load the texel at `off`; never reads or faults.
    #[inline]
    pub(crate) fn prefetch_offset(&self, off: usize) {
        #[cfg(target_arch = "x86_64")]
        {
            use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
            let ptr = match &self.texels {
                Texels::Rgb8(d) => d.as_ptr().wrapping_add(off) as *const i8,
                Texels::RgbF32(d) => d.as_ptr().wrapping_add(off) as *const i8,
            };
            // SAFETY: prefetch is a hint and does not dereference the pointer
            unsafe { _mm_prefetch(ptr, _MM_HINT_T0) };
        }
        #[cfg(not(target_arch = "x86_64"))]
        let _ = off;
    }

    /// Raw storage bytes in file order (little-endian floats for RGBF32).
    pub(crate) fn for_each_texel_bytes(&self, mut f: impl FnMut(&[u8])) {
        match &self.texels {
            Texels::Rgb8(d) => d.iter().for_each(|t| f(t)),
            Texels::RgbF32(d) => d.iter().for_each(|t| {
                let mut b = [0u8; 12];
                for (k, ch) in t.iter().enumerate() {
                    b[k * 4..k * 4 + 4].copy_from_slice(&ch.to_le_bytes());
                }
                f(&b)
            }),
        }
    }

    /// Bilinear blend over the angular grid at spatial node `(iu, iv)`.
    ///
    /// `s` and `t` are clamped to the grid; exactly four texels are read.
    pub fn angular_lerp(&self, iu: usize, iv: usize, a: crate::geometry::AngularCoord) -> Color {
        let mut stats = FetchStats::default();
        self.angular_lerp_counted(iu, iv, a, &mut stats)
    }

    /// Offset of the lower texel of the angular cell holding `a` at node
    /// `(iu, iv)`.
    #[inline]
    pub(crate) fn angular_base(&self, iu: usize, iv: usize, a: crate::geometry::AngularCoord) -> usize {
        let (is0, _) = clamped_cell(a.s, self.dims.s);
        let (it0, _) = clamped_cell(a.t, self.dims.t);
        ((iu * self.dims.v + iv) * self.dims.s + is0) * self.dims.t + it0
    }

    #[inline]
    pub(crate) fn angular_lerp_counted(
        &self,
        iu: usize,
        iv: usize,
        a: crate::geometry::AngularCoord,
        stats: &mut FetchStats,
    ) -> Color {
        let (is0, ws) = clamped_cell(a.s, self.dims.s);
        let (it0, wt) = clamped_cell(a.t, self.dims.t);
        let base = ((iu * self.dims.v + iv) * self.dims.s + is0) * self.dims.t + it0;
        let row = self.dims.t;
        let c00 = self.fetch_offset(base);
        let c01 = self.fetch_offset(base + 1);
        let c10 = self.fetch_offset(base + row);
        let c11 = self.fetch_offset(base + row + 1);
        stats.fetches += 4;
        bilerp(c00, c01, c10, c11, ws, wt)
    }
}

/// Node coordinate in [0, 1] of grid index `index` along an axis of `size`
/// nodes. Periodic axes space nodes 1/size apart; clamped axes include both
/// endpoints.
pub fn grid_coord(index: usize, size: usize, periodic: bool) -> f64 {
    debug_assert!(index < size);
    if periodic {
        index as f64 / size as f64
    } else {
        index as f64 / (size - 1) as f64
    }
}

/// Lower node and fractional weight of the cell containing `x` on a clamped
/// axis of `size` nodes.
#[inline]
pub(crate) fn clamped_cell(x: f64, size: usize) -> (usize, f64) {
    let pos = x.clamp(0.0, 1.0) * (size - 1) as f64;
    let i0 = (pos.floor() as usize).min(size - 2);
    (i0, (pos - i0 as f64).clamp(0.0, 1.0))
}

/// Lower node, upper node and weight on the periodic axis of `size` nodes.
#[inline]
pub(crate) fn periodic_cell(x: f64, size: usize) -> (usize, usize, f64) {
    let pos = x * size as f64;
    let fl = pos.floor();
    let i0 = (fl as i64).rem_euclid(size as i64) as usize;
    (i0, (i0 + 1) % size, (pos - fl).clamp(0.0, 1.0))
}

/// `c00` is at (0,0), `c01` at (0,1) along the second weight.
#[inline]
pub(crate) fn bilerp(c00: Color, c01: Color, c10: Color, c11: Color, w0: f64, w1: f64) -> Color {
    let a = c00 * (1.0 - w1) + c01 * w1;
    let b = c10 * (1.0 - w1) + c11 * w1;
    a * (1.0 - w0) + b * w0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AngularCoord;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_texture(dims: Dims, format: ChannelFormat, seed: u64) -> LightFieldTexture {
        let mut tex = LightFieldTexture::new(dims, format).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for off in 0..dims.texel_count() {
            let c = Color::new(rng.gen(), rng.gen(), rng.gen());
            tex.store(dims.index_of(off), c).unwrap();
        }
        tex
    }

    #[test]
    fn grid_coord_examples() {
        assert_eq!(grid_coord(0, 32, false), 0.0);
        assert_eq!(grid_coord(31, 32, false), 1.0);
        assert_eq!(grid_coord(512, 1024, true), 0.5);
        assert_eq!(grid_coord(0, 1024, true), 0.0);
    }

    #[test]
    fn dims_validation_and_parse() {
        assert!(Dims::new(1, 4, 4, 4).is_err());
        assert!(Dims::new(2, 2, 2, 2).is_ok());
        let d: Dims = "512x256x32x32".parse().unwrap();
        assert_eq!(d.as_array(), [512, 256, 32, 32]);
        assert!("512x256x32".parse::<Dims>().is_err());
        assert!("512x256xax32".parse::<Dims>().is_err());
    }

    #[test]
    fn layout_is_angular_innermost() {
        let d = Dims::new(3, 4, 5, 6).unwrap();
        assert_eq!(d.offset(TexelIndex::new(0, 0, 0, 1)), 1);
        assert_eq!(d.offset(TexelIndex::new(0, 0, 1, 0)), 6);
        assert_eq!(d.offset(TexelIndex::new(0, 1, 0, 0)), 30);
        assert_eq!(d.offset(TexelIndex::new(1, 0, 0, 0)), 120);
        for off in [0, 17, 359] {
            assert_eq!(d.offset(d.index_of(off)), off);
        }
    }

    #[test]
    fn fetch_first_and_last() {
        let d = Dims::new(3, 4, 5, 6).unwrap();
        let tex = random_texture(d, ChannelFormat::RgbF32, 1);
        let first = tex.fetch(TexelIndex::new(0, 0, 0, 0)).unwrap();
        assert_eq!(first, tex.fetch_offset(0));
        let last = tex.fetch(TexelIndex::new(2, 3, 4, 5)).unwrap();
        assert_eq!(last, tex.fetch_offset(d.texel_count() - 1));
    }

    #[test]
    fn fetch_out_of_bounds() {
        let tex = LightFieldTexture::new(Dims::new(2, 2, 2, 2).unwrap(), ChannelFormat::Rgb8).unwrap();
        assert!(matches!(
            tex.fetch(TexelIndex::new(0, 0, 2, 0)),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn store_clamps() {
        let mut tex = LightFieldTexture::new(Dims::new(2, 2, 2, 2).unwrap(), ChannelFormat::RgbF32).unwrap();
        let idx = TexelIndex::new(1, 1, 1, 1);
        tex.store(idx, Color::new(-0.5, 0.25, 7.0)).unwrap();
        assert_eq!(tex.fetch(idx).unwrap(), Color::new(0.0, 0.25, 1.0));
    }

    #[test]
    fn angular_lerp_on_node_and_midpoint() {
        let d = Dims::new(2, 2, 5, 5).unwrap();
        let tex = random_texture(d, ChannelFormat::RgbF32, 9);
        let exact = tex.angular_lerp(1, 0, AngularCoord::new(0.5, 0.75));
        assert_eq!(exact, tex.fetch(TexelIndex::new(1, 0, 2, 3)).unwrap());

        let mid = tex.angular_lerp(0, 1, AngularCoord::new(0.125, 0.625));
        let mut mean = Color::BLACK;
        for (is, it) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            mean += tex.fetch(TexelIndex::new(0, 1, is, it)).unwrap() * 0.25;
        }
        assert!(mid.max_abs_diff(mean) < 1e-12);

        // the upper boundary lands on the last node
        let top = tex.angular_lerp(1, 1, AngularCoord::new(1.0, 1.0));
        assert_eq!(top, tex.fetch(TexelIndex::new(1, 1, 4, 4)).unwrap());
    }

    #[test]
    fn angular_lerp_matches_naive() {
        let d = Dims::new(3, 3, 7, 9).unwrap();
        let tex = random_texture(d, ChannelFormat::RgbF32, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let (s, t) = (rng.gen::<f64>(), rng.gen::<f64>());
            let (iu, iv) = (rng.gen_range(0..3), rng.gen_range(0..3));
            // naive: weight every node by its tent function
            let mut want = Color::BLACK;
            for is in 0..d.s {
                for it in 0..d.t {
                    let ws = (1.0 - (s * (d.s - 1) as f64 - is as f64).abs()).max(0.0);
                    let wt = (1.0 - (t * (d.t - 1) as f64 - it as f64).abs()).max(0.0);
                    want += tex.fetch(TexelIndex::new(iu, iv, is, it)).unwrap() * (ws * wt);
                }
            }
            let got = tex.angular_lerp(iu, iv, AngularCoord::new(s, t));
            assert!(got.max_abs_diff(want) < 1e-6);
        }
    }

    #[test]
    fn cells() {
        assert_eq!(clamped_cell(1.0, 32), (30, 1.0));
        assert_eq!(clamped_cell(0.0, 32), (0, 0.0));
        assert_eq!(periodic_cell(1.0, 8), (0, 1, 0.0));
        let (a, b, w) = periodic_cell(0.99, 10);
        assert_eq!((a, b), (9, 0));
        assert!((w - 0.9).abs() < 1e-9);
    }

    #[test]
    fn from_par_fn_matches_store() {
        let d = Dims::new(4, 3, 2, 5).unwrap();
        let f = |i: TexelIndex| Color::new(i.iu as f64 / 4.0, i.iv as f64 / 3.0, (i.is * 5 + i.it) as f64 / 10.0);
        let par = LightFieldTexture::from_par_fn(d, ChannelFormat::Rgb8, f).unwrap();
        let mut seq = LightFieldTexture::new(d, ChannelFormat::Rgb8).unwrap();
        for off in 0..d.texel_count() {
            let i = d.index_of(off);
            seq.store(i, f(i)).unwrap();
        }
        assert_eq!(par, seq);
    }

    proptest! {
        #[test]
        fn store_then_fetch(iu in 0usize..5, iv in 0usize..4, is in 0usize..3, it in 0usize..6,
                            r in 0.0f64..=1.0, g in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let d = Dims::new(5, 4, 3, 6).unwrap();
            let idx = TexelIndex::new(iu, iv, is, it);
            let c = Color::new(r, g, b);

            let mut f = LightFieldTexture::new(d, ChannelFormat::RgbF32).unwrap();
            f.store(idx, c).unwrap();
            prop_assert!(f.fetch(idx).unwrap().max_abs_diff(c) < 1e-7);

            let mut q = LightFieldTexture::new(d, ChannelFormat::Rgb8).unwrap();
            q.store(idx, c).unwrap();
            prop_assert!(q.fetch(idx).unwrap().max_abs_diff(c) <= 0.5 / 255.0 + 1e-12);
        }
    }
}
