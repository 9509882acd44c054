//! View reconstruction from the 4D texture.
//!
//! A surface point seen from an observer is reconstructed from the four
//! spatial grid nodes around it. Each node gets its own local frame and its
//! own view direction toward the observer, an angular bilinear blend (four
//! texels) at that node, and the four node colors are then blended by the
//! spatial fractions: 16 texel reads per sample.

use super::{bilerp, clamped_cell, grid_coord, periodic_cell, LightFieldTexture};
use crate::color::Color;
use crate::error::{Error, Result};
use crate::geometry::{
    angular_param_clamped, AngularCoord, local_frame, sphere_param, sphere_point_unit, ProxyModel,
    SurfaceCoord, Vec3,
};

/// How the view direction is chosen at the four spatial corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViewDirection {
    /// Recompute `normalize(O - P_corner)` at every corner.
    #[default]
    PerCorner,
    /// Use `normalize(O - P)` from the sampled point at all four corners.
    Shared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SampleOptions {
    pub view_direction: ViewDirection,
}

/// Texel read counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FetchStats {
    pub fetches: u64,
}

impl LightFieldTexture {
    /// Color leaving surface point `p` toward `observer`.
    pub fn sample(&self, model: &ProxyModel, p: Vec3, observer: Vec3) -> Result<Color> {
        let mut stats = FetchStats::default();
        self.sample_with(model, p, observer, SampleOptions::default(), &mut stats)
    }

    /// [`sample`](Self::sample) with explicit options, accumulating texel
    /// reads into `stats`.
    pub fn sample_with(
        &self,
        model: &ProxyModel,
        p: Vec3,
        observer: Vec3,
        opts: SampleOptions,
        stats: &mut FetchStats,
    ) -> Result<Color> {
        let coord = sphere_param(p, model)?;
        if (observer - model.center).length() <= model.radius {
            return Err(Error::Precondition(format!(
                "observer {:?} is not outside the proxy sphere",
                observer.to_array()
            )));
        }
        Ok(self.sample_coord(model, coord, p, observer, opts, stats))
    }

    /// Core of the reconstruction; `coord` must be `sphere_param(p)`.
    #[inline]
    pub(crate) fn sample_coord(
        &self,
        model: &ProxyModel,
        coord: SurfaceCoord,
        p: Vec3,
        observer: Vec3,
        opts: SampleOptions,
        stats: &mut FetchStats,
    ) -> Color {
        let plan = self.plan(model, coord, p, observer, opts);
        self.resolve(&plan, stats)
    }

    /// Everything about a sample except the texel reads.
    #[inline]
    pub(crate) fn plan(
        &self,
        model: &ProxyModel,
        coord: SurfaceCoord,
        p: Vec3,
        observer: Vec3,
        opts: SampleOptions,
    ) -> SamplePlan {
        let dims = self.dims;
        let (iu0, iu1, wu) = periodic_cell(coord.u, dims.u);
        let (iv0, wv) = clamped_cell(coord.v, dims.v);
        let iv1 = iv0 + 1;
        let shared = (observer - p).normalize();

        let angular = |iu: usize, iv: usize| -> AngularCoord {
            let node = SurfaceCoord::new(grid_coord(iu, dims.u, true), grid_coord(iv, dims.v, false));
            let normal = sphere_point_unit(node);
            let frame = local_frame(normal);
            let d = match opts.view_direction {
                ViewDirection::PerCorner => {
                    let corner_point = model.center + normal * model.radius;
                    (observer - corner_point).normalize()
                }
                ViewDirection::Shared => shared,
            };
            angular_param_clamped(&frame, d)
        };
        let corners = [(iu0, iv0), (iu0, iv1), (iu1, iv0), (iu1, iv1)];
        let coords = corners.map(|(iu, iv)| angular(iu, iv));
        SamplePlan { corners, coords, wu, wv }
    }

    /// Starts loading the 16 texels of `plan` into cache.
    #[inline]
    pub(crate) fn prefetch(&self, plan: &SamplePlan) {
        for k in 0..4 {
            let (iu, iv) = plan.corners[k];
            let base = self.angular_base(iu, iv, plan.coords[k]);
            self.prefetch_offset(base);
            self.prefetch_offset(base + 1);
            self.prefetch_offset(base + self.dims.t);
            self.prefetch_offset(base + self.dims.t + 1);
        }
    }

    #[inline]
    pub(crate) fn resolve(&self, plan: &SamplePlan, stats: &mut FetchStats) -> Color {
        let [c00, c01, c10, c11] = [0, 1, 2, 3]
            .map(|k| self.angular_lerp_counted(plan.corners[k].0, plan.corners[k].1, plan.coords[k], stats));
        bilerp(c00, c01, c10, c11, plan.wu, plan.wv)
    }
}

/// Grid corners, angular coordinates and spatial weights of one sample.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SamplePlan {
    corners: [(usize, usize); 4],
    coords: [AngularCoord; 4],
    wu: f64,
    wv: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angular_dir, sphere_point, AngularCoord};
    use crate::lightfield::{ChannelFormat, Dims, TexelIndex};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> ProxyModel {
        ProxyModel::new(Vec3::ZERO, 3.5).unwrap()
    }

    fn random_texture(dims: Dims, seed: u64) -> LightFieldTexture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let colors: Vec<Color> = (0..dims.texel_count())
            .map(|_| Color::new(rng.gen(), rng.gen(), rng.gen()))
            .collect();
        LightFieldTexture::from_par_fn(dims, ChannelFormat::RgbF32, |i| colors[dims.offset(i)]).unwrap()
    }

    fn random_query(rng: &mut ChaCha8Rng, m: &ProxyModel) -> (Vec3, Vec3) {
        let p = sphere_point(SurfaceCoord::new(rng.gen(), rng.gen_range(0.02..0.98)), m);
        let n = m.normal_at(p);
        // observer somewhere in front of p, well outside the sphere
        let dir = (n + Vec3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6))).normalize();
        let o = p + dir * rng.gen_range(4.0..20.0);
        (p, o)
    }

    #[test]
    fn constant_texture_is_reproduced() {
        let dims = Dims::new(8, 6, 4, 4).unwrap();
        let c = Color::new(0.2, 0.4, 0.6);
        let tex = LightFieldTexture::from_par_fn(dims, ChannelFormat::RgbF32, |_| c).unwrap();
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (p, o) = random_query(&mut rng, &m);
            if (o - m.center).length() <= m.radius {
                continue;
            }
            let got = tex.sample(&m, p, o).unwrap();
            assert!(got.max_abs_diff(c) < 1e-6, "{got:?}");
        }
    }

    #[test]
    fn node_aligned_query_returns_stored_texel() {
        let dims = Dims::new(8, 5, 5, 5).unwrap();
        let tex = random_texture(dims, 11);
        let m = model();
        let (iu, iv, is, it) = (3, 2, 1, 3);
        let node = SurfaceCoord::new(grid_coord(iu, 8, true), grid_coord(iv, 5, false));
        let p = sphere_point(node, &m);
        let frame = local_frame(m.normal_at(p));
        let a = AngularCoord::new(grid_coord(is, 5, false), grid_coord(it, 5, false));
        let o = p + angular_dir(&frame, a) * 10.0;
        let got = tex.sample(&m, p, o).unwrap();
        let want = tex.fetch(TexelIndex::new(iu, iv, is, it)).unwrap();
        assert!(got.max_abs_diff(want) < 1e-9, "{got:?} vs {want:?}");
    }

    #[test]
    fn sixteen_fetches_and_bounded_blend() {
        let dims = Dims::new(16, 8, 8, 8).unwrap();
        let tex = random_texture(dims, 5);
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let (p, o) = random_query(&mut rng, &m);
            let mut stats = FetchStats::default();
            let c = tex.sample_with(&m, p, o, SampleOptions::default(), &mut stats).unwrap();
            assert_eq!(stats.fetches, 16);
            for ch in c.channels() {
                assert!((0.0..=1.0).contains(&ch));
            }
        }
    }

    #[test]
    fn shared_direction_variant_also_reads_sixteen() {
        let dims = Dims::new(16, 8, 8, 8).unwrap();
        let tex = random_texture(dims, 7);
        let m = model();
        let opts = SampleOptions { view_direction: ViewDirection::Shared };
        let mut stats = FetchStats::default();
        let p = Vec3::new(0.0, 0.0, 3.5);
        tex.sample_with(&m, p, Vec3::new(1.0, 2.0, 12.0), opts, &mut stats).unwrap();
        assert_eq!(stats.fetches, 16);
    }

    #[test]
    fn errors() {
        let tex = random_texture(Dims::new(4, 4, 4, 4).unwrap(), 1);
        let m = model();
        assert!(matches!(
            tex.sample(&m, Vec3::new(0.0, 0.0, 3.0), Vec3::new(0.0, 0.0, 10.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            tex.sample(&m, Vec3::new(0.0, 0.0, 3.5), Vec3::new(0.0, 0.0, 1.0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn seam_is_continuous() {
        // points just either side of u = 0/1 must blend the same two columns
        let dims = Dims::new(16, 8, 8, 8).unwrap();
        let tex = random_texture(dims, 21);
        let m = model();
        let o = Vec3::new(0.0, 0.0, -12.0);
        let eps = 1e-9;
        let a = tex.sample(&m, sphere_point(SurfaceCoord::new(eps, 0.5), &m), o).unwrap();
        let b = tex.sample(&m, sphere_point(SurfaceCoord::new(1.0 - eps, 0.5), &m), o).unwrap();
        assert!(a.max_abs_diff(b) < 1e-6);
    }
}
