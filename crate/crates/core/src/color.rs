use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// Linear RGB radiance, nominally in [0, 1] per channel.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Color {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Color {
    pub const BLACK: Color = Color::new(0.0, 0.0, 0.0);
    pub const WHITE: Color = Color::new(1.0, 1.0, 1.0);

    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        Color { r, g, b }
    }

    pub const fn gray(v: f64) -> Self {
        Color::new(v, v, v)
    }

    pub fn clamped(self) -> Color {
        Color::new(
            self.r.clamp(0.0, 1.0),
            self.g.clamp(0.0, 1.0),
            self.b.clamp(0.0, 1.0),
        )
    }

    /// Channel-wise product.
    pub fn modulate(self, o: Color) -> Color {
        Color::new(self.r * o.r, self.g * o.g, self.b * o.b)
    }

    pub fn channels(self) -> [f64; 3] {
        [self.r, self.g, self.b]
    }

    pub fn max_abs_diff(self, o: Color) -> f64 {
        (self.r - o.r)
            .abs()
            .max((self.g - o.g).abs())
            .max((self.b - o.b).abs())
    }

    pub fn is_finite(self) -> bool {
        self.r.is_finite() && self.g.is_finite() && self.b.is_finite()
    }

    /// Color for the names used by the bundled scene files.
    pub fn named(name: &str) -> Option<Color> {
        let c = match name.to_ascii_lowercase().as_str() {
            "white" => Color::new(1.0, 1.0, 1.0),
            "red" => Color::new(1.0, 0.0, 0.0),
            "purple" => Color::new(0.5, 0.0, 0.5),
            "blue" => Color::new(0.0, 0.0, 1.0),
            // slightly lifted so shading stays visible
            "black" => Color::new(0.05, 0.05, 0.05),
            "green" => Color::new(0.0, 1.0, 0.0),
            "yellow" => Color::new(1.0, 1.0, 0.0),
            _ => return None,
        };
        Some(c)
    }
}

impl From<[f64; 3]> for Color {
    fn from(a: [f64; 3]) -> Self {
        Color::new(a[0], a[1], a[2])
    }
}

impl From<Color> for [f64; 3] {
    fn from(c: Color) -> Self {
        c.channels()
    }
}

impl Add for Color {
    type Output = Color;
    #[inline]
    fn add(self, o: Color) -> Color {
        Color::new(self.r + o.r, self.g + o.g, self.b + o.b)
    }
}

impl AddAssign for Color {
    #[inline]
    fn add_assign(&mut self, o: Color) {
        self.r += o.r;
        self.g += o.g;
        self.b += o.b;
    }
}

impl Mul<f64> for Color {
    type Output = Color;
    #[inline]
    fn mul(self, k: f64) -> Color {
        Color::new(self.r * k, self.g * k, self.b * k)
    }
}
