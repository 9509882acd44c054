//! Four-dimensional light-field textures over a spherical proxy.
//!
//! A scene of primitives is baked into a texture `T(u, v, s, t)`: for every
//! point `(u, v)` on an enclosing sphere and every outgoing direction `(s, t)`
//! in that point's tangent frame, the radiance leaving the sphere. Views are
//! then reconstructed from the texture alone, with correct parallax for
//! objects inside the sphere, by blending 16 texels per pixel.

pub mod color;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod image;
pub mod lightfield;
pub mod metrics;
pub mod parallel;
pub mod render;
pub mod scene;
pub mod synthesis;

pub use color::Color;
pub use error::{Error, Result};
pub use geometry::{AngularCoord, ProxyModel, Ray, SurfaceCoord, SurfaceFrame, Vec3};
pub use image::{Image, ToneMap};
pub use lightfield::{ChannelFormat, Dims, LightFieldTexture, TexelIndex};
pub use render::{Camera, RenderSettings};
pub use scene::Scene;
pub use synthesis::{SupersampleMode, SynthesisConfig};
