//! LF4D container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "LF4D"
//! 4       2     version (u16 LE) = 1
//! 6       2     channel code (u16 LE): 0 = RGB8, 1 = RGBF32
//! 8       16    U, V, S, T (u32 LE each)
//! 24      ...   texels in (u, v, s, t) row-major order, no padding
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ChannelFormat, Dims, LightFieldTexture};
use crate::error::{Error, Result};

pub const LF4D_MAGIC: [u8; 4] = *b"LF4D";
pub const LF4D_VERSION: u16 = 1;

pub fn write_lf4d<W: Write>(tex: &LightFieldTexture, mut w: W) -> Result<()> {
    let dims = tex.dims();
    let mut header = Vec::with_capacity(24);
    header.extend_from_slice(&LF4D_MAGIC);
    header.extend_from_slice(&LF4D_VERSION.to_le_bytes());
    header.extend_from_slice(&tex.format().code().to_le_bytes());
    for n in dims.as_array() {
        let n = u32::try_from(n)
            .map_err(|_| Error::Format(format!("dimension {n} does not fit in u32")))?;
        header.extend_from_slice(&n.to_le_bytes());
    }
    w.write_all(&header)?;

    let mut buf = Vec::with_capacity(1 << 16);
    let mut err = None;
    tex.for_each_texel_bytes(|b| {
        if err.is_some() {
            return;
        }
        buf.extend_from_slice(b);
        if buf.len() >= 1 << 16 {
            if let Err(e) = w.write_all(&buf) {
                err = Some(e);
            }
            buf.clear();
        }
    });
    if let Some(e) = err {
        return Err(e.into());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_lf4d<R: Read>(mut r: R) -> Result<LightFieldTexture> {
    let mut header = [0u8; 24];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated LF4D header: {e}")))?;
    if header[0..4] != LF4D_MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &header[0..4])));
    }
    let version = u16::from_le_bytes([header[4], header[5]]);
    if version != LF4D_VERSION {
        return Err(Error::Format(format!("unsupported LF4D version {version}")));
    }
    let code = u16::from_le_bytes([header[6], header[7]]);
    let format = ChannelFormat::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown channel code {code}")))?;
    let mut n = [0usize; 4];
    for (k, slot) in n.iter_mut().enumerate() {
        let at = 8 + 4 * k;
        *slot = u32::from_le_bytes(header[at..at + 4].try_into().unwrap()) as usize;
    }
    let dims = Dims::new(n[0], n[1], n[2], n[3]).map_err(|e| Error::Format(e.to_string()))?;
    let count = dims.texel_count();

    let bpt = format.bytes_per_texel();
    let mut remaining = count;
    let mut block = vec![0u8; bpt * 8192];
    // the header alone does not prove the data exists; cap the up-front reservation
    let reserve = count.min(1 << 27);
    let (mut rgb8, mut f32s) = match format {
        ChannelFormat::Rgb8 => (Vec::with_capacity(reserve), Vec::new()),
        ChannelFormat::RgbF32 => (Vec::new(), Vec::with_capacity(reserve)),
    };
    while remaining > 0 {
        let n = remaining.min(8192);
        let bytes = &mut block[..n * bpt];
        r.read_exact(bytes)
            .map_err(|e| Error::Format(format!("truncated LF4D texel data: {e}")))?;
        match format {
            ChannelFormat::Rgb8 => rgb8.extend(bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]])),
            ChannelFormat::RgbF32 => f32s.extend(bytes.chunks_exact(12).map(|c| {
                let f = |k: usize| f32::from_le_bytes(c[4 * k..4 * k + 4].try_into().unwrap());
                [f(0), f(1), f(2)]
            })),
        }
        remaining -= n;
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after texel data".into()));
    }

    match format {
        ChannelFormat::Rgb8 => LightFieldTexture::from_rgb8(dims, rgb8),
        ChannelFormat::RgbF32 => LightFieldTexture::from_f32(dims, f32s),
    }
}

impl LightFieldTexture {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_lf4d(self, BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_lf4d(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::color::Color;
    use crate::lightfield::TexelIndex;

    fn sample_texture(format: ChannelFormat) -> LightFieldTexture {
        let dims = Dims::new(3, 2, 2, 2).unwrap();
        LightFieldTexture::from_par_fn(dims, format, |i| {
            Color::new(i.iu as f64 / 2.0, i.iv as f64, (i.is + i.it) as f64 / 3.0)
        })
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let tex = sample_texture(ChannelFormat::Rgb8);
        let mut bytes = Vec::new();
        write_lf4d(&tex, &mut bytes).unwrap();
        assert_eq!(&bytes[0..4], b"LF4D");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..8], &[0, 0]);
        assert_eq!(&bytes[8..12], &[3, 0, 0, 0]);
        assert_eq!(&bytes[12..16], &[2, 0, 0, 0]);
        assert_eq!(bytes.len(), 24 + 24 * 3);
        // texel (0,0,0,1): r=0, g=0, b=1/3
        assert_eq!(&bytes[27..30], &[0, 0, 85]);
    }

    #[test]
    fn f32_payload_is_little_endian() {
        let tex = sample_texture(ChannelFormat::RgbF32);
        let mut bytes = Vec::new();
        write_lf4d(&tex, &mut bytes).unwrap();
        assert_eq!(&bytes[6..8], &[1, 0]);
        assert_eq!(bytes.len(), 24 + 24 * 12);
        // last texel (2,1,1,1) = (1, 1, 2/3)
        let last = &bytes[bytes.len() - 12..];
        assert_eq!(&last[0..4], &1.0f32.to_le_bytes());
        assert_eq!(&last[8..12], &((2.0f64 / 3.0) as f32).to_le_bytes());
    }

    #[test]
    fn round_trip_both_formats() {
        for format in [ChannelFormat::Rgb8, ChannelFormat::RgbF32] {
            let tex = sample_texture(format);
            let mut bytes = Vec::new();
            write_lf4d(&tex, &mut bytes).unwrap();
            let back = read_lf4d(bytes.as_slice()).unwrap();
            assert_eq!(back, tex);
            assert_eq!(
                back.fetch(TexelIndex::new(2, 1, 1, 1)).unwrap(),
                tex.fetch(TexelIndex::new(2, 1, 1, 1)).unwrap()
            );
        }
    }

    #[test]
    fn rejects_bad_input() {
        let tex = sample_texture(ChannelFormat::Rgb8);
        let mut good = Vec::new();
        write_lf4d(&tex, &mut good).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(read_lf4d(bad.as_slice()), Err(Error::Format(_))));

        let mut bad = good.clone();
        bad[4] = 2;
        assert!(matches!(read_lf4d(bad.as_slice()), Err(Error::Format(_))));

        let mut bad = good.clone();
        bad[6] = 7;
        assert!(matches!(read_lf4d(bad.as_slice()), Err(Error::Format(_))));

        assert!(matches!(read_lf4d(&good[..good.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(read_lf4d(&good[..10]), Err(Error::Format(_))));

        let mut bad = good.clone();
        bad.push(0);
        assert!(matches!(read_lf4d(bad.as_slice()), Err(Error::Format(_))));

        let mut bad = good;
        bad[8] = 1; // U = 1
        assert!(matches!(read_lf4d(bad.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn save_and_load_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.lf4d");
        let tex = sample_texture(ChannelFormat::RgbF32);
        tex.save(&path).unwrap();
        assert_eq!(LightFieldTexture::load(&path).unwrap(), tex);
    }
}
