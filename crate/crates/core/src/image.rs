//! 8-bit RGB raster and binary PPM (P6) I/O.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::color::Color;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ToneMap {
    /// Linear value clamped to [0, 1].
    #[default]
    Clamp,
    /// Clamp, then encode with a 1/2.2 power.
    Gamma22,
}

impl ToneMap {
    #[inline]
    pub fn encode(self, c: Color) -> [u8; 3] {
        let f = |x: f64| {
            let x = x.clamp(0.0, 1.0);
            let x = match self {
                ToneMap::Clamp => x,
                ToneMap::Gamma22 => x.powf(1.0 / 2.2),
            };
            (x * 255.0).round() as u8
        };
        [f(c.r), f(c.g), f(c.b)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Image {
            width,
            height,
            pixels: vec![[0; 3]; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::Precondition(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Image { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, px: [u8; 3]) -> Self {
        Image {
            width,
            height,
            pixels: vec![px; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, px: [u8; 3]) {
        self.pixels[y * self.width + x] = px;
    }

    pub fn as_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flatten().copied().collect()
    }

    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.as_bytes())?;
        w.flush()?;
        Ok(())
    }

    pub fn read_ppm<R: BufRead>(mut r: R) -> Result<Self> {
        let magic = next_token(&mut r)?;
        if magic != "P6" {
            return Err(Error::Format(format!("not a binary PPM (magic '{magic}')")));
        }
        let mut nums = [0usize; 3];
        for n in nums.iter_mut() {
            let tok = next_token(&mut r)?;
            *n = tok
                .parse()
                .map_err(|_| Error::Format(format!("bad PPM header field '{tok}'")))?;
        }
        let [width, height, maxval] = nums;
        if maxval != 255 {
            return Err(Error::Format(format!("unsupported PPM maxval {maxval}")));
        }
        let mut raw = vec![0u8; width * height * 3];
        r.read_exact(&mut raw)
            .map_err(|e| Error::Format(format!("truncated PPM data: {e}")))?;
        let pixels = raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Image { width, height, pixels })
    }

    pub fn save_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_ppm(BufWriter::new(File::create(path)?))
    }

    pub fn load_ppm(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_ppm(BufReader::new(File::open(path)?))
    }
}

/// Reads one whitespace-delimited header token, skipping `#` comments. Consumes
/// exactly one trailing whitespace byte.
fn next_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Format("truncated PPM header".into()));
            }
            break;
        }
        match byte[0] {
            b'#' if tok.is_empty() => {
                let mut line = Vec::new();
                r.read_until(b'\n', &mut line)?;
            }
            b if b.is_ascii_whitespace() => {
                if !tok.is_empty() {
                    break;
                }
            }
            b => tok.push(b),
        }
    }
    String::from_utf8(tok).map_err(|_| Error::Format("non-ASCII PPM header".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tone_map() {
        assert_eq!(ToneMap::Clamp.encode(Color::new(-1.0, 0.5, 2.0)), [0, 128, 255]);
        assert_eq!(ToneMap::Gamma22.encode(Color::new(0.0, 0.5, 1.0)), [0, 186, 255]);
    }

    #[test]
    fn ppm_header_bytes() {
        let mut img = Image::new(2, 1);
        img.set(1, 0, [1, 2, 3]);
        let mut out = Vec::new();
        img.write_ppm(&mut out).unwrap();
        assert_eq!(out, b"P6\n2 1\n255\n\0\0\0\x01\x02\x03");
    }

    #[test]
    fn ppm_reader_handles_comments() {
        let data = b"P6\n# made by hand\n1 2\n255\n\x0a\x0b\x0c\x0d\x0e\x0f";
        let img = Image::read_ppm(&data[..]).unwrap();
        assert_eq!((img.width(), img.height()), (1, 2));
        // first pixel bytes include 0x0a, which must not be eaten as whitespace
        assert_eq!(img.get(0, 0), [0x0a, 0x0b, 0x0c]);
        assert_eq!(img.get(0, 1), [0x0d, 0x0e, 0x0f]);
    }

    #[test]
    fn ppm_rejects() {
        assert!(Image::read_ppm(&b"P3\n1 1\n255\n000"[..]).is_err());
        assert!(Image::read_ppm(&b"P6\n1 1\n65535\n000000"[..]).is_err());
        assert!(Image::read_ppm(&b"P6\n2 2\n255\n000"[..]).is_err());
        assert!(Image::read_ppm(&b"P6\n2"[..]).is_err());
    }

    proptest! {
        #[test]
        fn ppm_round_trip(w in 1usize..8, h in 1usize..8, seed in any::<u64>()) {
            let pixels = (0..w * h)
                .map(|k| {
                    let x = seed.wrapping_mul(k as u64 + 1).to_le_bytes();
                    [x[0], x[3], x[6]]
                })
                .collect();
            let img = Image::from_pixels(w, h, pixels).unwrap();
            let mut buf = Vec::new();
            img.write_ppm(&mut buf).unwrap();
            prop_assert_eq!(Image::read_ppm(buf.as_slice()).unwrap(), img);
        }
    }
}
