//! Image comparison: PSNR against a reference, and mean luminance-gradient
//! magnitude as a sharpness measure.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;

/// Inclusive-exclusive pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Region {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Region { x, y, width, height }
    }

    pub fn full(img: &Image) -> Self {
        Region::new(0, 0, img.width(), img.height())
    }

    fn check(&self, img: &Image) -> Result<()> {
        if self.width == 0
            || self.height == 0
            || self.x + self.width > img.width()
            || self.y + self.height > img.height()
        {
            return Err(Error::Precondition(format!(
                "region {self:?} outside {}x{} image",
                img.width(),
                img.height()
            )));
        }
        Ok(())
    }

    /// Smallest region containing every pixel where `pred` holds.
    pub fn bounding(img: &Image, pred: impl Fn([u8; 3]) -> bool) -> Option<Region> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..img.height() {
            for x in 0..img.width() {
                if pred(img.get(x, y)) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != usize::MAX).then(|| Region::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// Grown by `pad` pixels on each side, clipped to the image.
    pub fn padded(&self, pad: usize, img: &Image) -> Region {
        let x = self.x.saturating_sub(pad);
        let y = self.y.saturating_sub(pad);
        let x1 = (self.x + self.width + pad).min(img.width());
        let y1 = (self.y + self.height + pad).min(img.height());
        Region::new(x, y, x1 - x, y1 - y)
    }
}

impl std::str::FromStr for Region {
    type Err = Error;

    /// `x,y,width,height`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Precondition(format!("bad region '{s}', want x,y,w,h")))?;
        match parts.as_slice() {
            &[x, y, w, h] => Ok(Region::new(x, y, w, h)),
            _ => Err(Error::Precondition(format!("bad region '{s}', want x,y,w,h"))),
        }
    }
}

fn check_sizes(a: &Image, b: &Image) -> Result<()> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::SizeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    Ok(())
}

/// Mean squared error over all channels in 8-bit units.
pub fn mse_in(a: &Image, b: &Image, region: Region) -> Result<f64> {
    check_sizes(a, b)?;
    region.check(a)?;
    let mut sum = 0u64;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            let (p, q) = (a.get(x, y), b.get(x, y));
            for k in 0..3 {
                let d = p[k] as i64 - q[k] as i64;
                sum += (d * d) as u64;
            }
        }
    }
    Ok(sum as f64 / (region.width * region.height * 3) as f64)
}

pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    mse_in(a, b, Region::full(a))
}

/// PSNR in dB with peak 255. Identical inputs give `f64::INFINITY`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    }
}

pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    mse(a, b).map(psnr_from_mse)
}

pub fn psnr_in(a: &Image, b: &Image, region: Region) -> Result<f64> {
    mse_in(a, b, region).map(psnr_from_mse)
}

#[inline]
fn luminance(p: [u8; 3]) -> f64 {
    (0.2126 * p[0] as f64 + 0.7152 * p[1] as f64 + 0.0722 * p[2] as f64) / 255.0
}

/// Mean central-difference luminance gradient magnitude over `region`
/// (whole image when `None`). Luminance is in [0, 1]; samples beyond the image
/// border repeat the edge pixel.
pub fn gradient_energy(img: &Image, region: Option<Region>) -> Result<f64> {
    let region = region.unwrap_or_else(|| Region::full(img));
    region.check(img)?;
    let (w, h) = (img.width(), img.height());
    let lum = |x: usize, y: usize| luminance(img.get(x, y));
    let mut total = 0.0;
    for y in region.y..region.y + region.height {
        for x in region.x..region.x + region.width {
            let gx = (lum((x + 1).min(w - 1), y) - lum(x.saturating_sub(1), y)) * 0.5;
            let gy = (lum(x, (y + 1).min(h - 1)) - lum(x, y.saturating_sub(1))) * 0.5;
            total += gx.hypot(gy);
        }
    }
    Ok(total / (region.width * region.height) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    /// +∞ for identical images; serialized as the string "inf".
    #[serde(serialize_with = "ser_psnr")]
    pub psnr: f64,
    pub mse: f64,
    /// Gradient energy of the first and second image.
    pub gradient_a: f64,
    pub gradient_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
}

fn ser_psnr<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

impl MetricReport {
    pub fn compute(a: &Image, b: &Image, region: Option<Region>) -> Result<Self> {
        check_sizes(a, b)?;
        let r = region.unwrap_or_else(|| Region::full(a));
        let mse = mse_in(a, b, r)?;
        Ok(MetricReport {
            psnr: psnr_from_mse(mse),
            mse,
            gradient_a: gradient_energy(a, Some(r))?,
            gradient_b: gradient_energy(b, Some(r))?,
            region,
        })
    }

    /// `psnr=... mse=... grad_a=... grad_b=...`
    pub fn to_line(&self) -> String {
        let psnr = if self.psnr.is_finite() {
            format!("{:.4}", self.psnr)
        } else {
            "inf".to_string()
        };
        let mut line = format!(
            "psnr={psnr} mse={:.6} grad_a={:.6} grad_b={:.6}",
            self.mse, self.gradient_a, self.gradient_b
        );
        if let Some(r) = self.region {
            line.push_str(&format!(" region={},{},{},{}", r.x, r.y, r.width, r.height));
        }
        line
    }
}
