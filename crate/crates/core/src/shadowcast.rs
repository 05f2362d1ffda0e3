//! Sweep-based shadow casting over a DSM.
//!
//! The grid is partitioned into straight ray paths that march away from the
//! sun. Each path steps one pixel along its major axis (the axis with the
//! larger march component) while the minor-axis position is tracked at
//! subpixel precision. Along a path the most recent illuminated sample is
//! the occluder; a later sample at horizontal distance `d` (pixels) is in
//! shadow iff
//!
//! ```text
//! d < (z_occluder - z_current) / pixel_size / tan(elevation)
//! ```
//!
//! otherwise it is lit and becomes the new occluder.
//!
//! Path `k` visits, at major step `t`, minor index `k + floor(m·t + 0.5)`
//! with `m` the minor advance per step. For a fixed `t` that map is a
//! bijection over `k`, which is what makes the paths partition the grid.

use std::sync::atomic::{AtomicU8, Ordering};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::raster::Raster;
use crate::solar::SunGeometry;

/// Default DSM upscaling applied before casting.
pub const DEFAULT_UPSCALE: usize = 4;

const FLAG_SHADOW: u8 = 1;
const FLAG_VALID: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

/// One straight march through the grid.
///
/// Stored implicitly; pixels and subpixel coordinates are generated on
/// demand so a full decomposition costs O(width + height) memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    major: Axis,
    /// Major-axis index at `t = 0`.
    major_origin: usize,
    major_step: isize,
    /// Minor-axis intercept at `t = 0`.
    key: isize,
    /// Minor-axis advance per major step, `|m| <= 1`.
    slope: f64,
    t_start: usize,
    t_end: usize,
}

/// A pixel visited by a path together with its position on the continuous line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathStep {
    pub col: usize,
    pub row: usize,
    pub x: f64,
    pub y: f64,
}

#[inline]
fn minor_offset(slope: f64, t: usize) -> isize {
    (slope * t as f64 + 0.5).floor() as isize
}

/// First `t` in `0..n` for which `pred` is false, `pred` monotone (true then false).
fn partition_point(n: usize, pred: impl Fn(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

impl RayPath {
    /// Partition a `width x height` grid into paths marching along `(p, q)`.
    pub fn decompose(width: usize, height: usize, p: f64, q: f64) -> Result<Vec<RayPath>> {
        if !(p.is_finite() && q.is_finite()) || (p == 0.0 && q == 0.0) {
            return Err(Error::DegenerateDirection);
        }
        if width == 0 || height == 0 {
            return Err(Error::Argument("grid dimensions must be positive".into()));
        }
        let (major, major_len, minor_len, dmaj, dmin) = if p.abs() >= q.abs() {
            (Axis::X, width, height, p, q)
        } else {
            (Axis::Y, height, width, q, p)
        };
        let slope = dmin / dmaj.abs();
        let (major_origin, major_step) = if dmaj > 0.0 { (0, 1) } else { (major_len - 1, -1) };

        let last = minor_offset(slope, major_len - 1);
        let (min_off, max_off) = (last.min(0), last.max(0));
        let minor_max = minor_len as isize - 1;

        let mut paths = Vec::with_capacity(minor_len + (max_off - min_off) as usize);
        for key in -max_off..=(minor_max - min_off) {
            // offsets are monotone in t, so the in-grid steps are contiguous
            let (t_start, t_end) = if slope >= 0.0 {
                (
                    partition_point(major_len, |t| key + minor_offset(slope, t) < 0),
                    partition_point(major_len, |t| key + minor_offset(slope, t) <= minor_max),
                )
            } else {
                (
                    partition_point(major_len, |t| key + minor_offset(slope, t) > minor_max),
                    partition_point(major_len, |t| key + minor_offset(slope, t) >= 0),
                )
            };
            if t_start < t_end {
                paths.push(RayPath {
                    major,
                    major_origin,
                    major_step,
                    key,
                    slope,
                    t_start,
                    t_end,
                });
            }
        }
        Ok(paths)
    }

    pub fn len(&self) -> usize {
        self.t_end - self.t_start
    }

    pub fn is_empty(&self) -> bool {
        self.t_end == self.t_start
    }

    /// The `i`-th step from the path seed.
    #[inline]
    pub fn step(&self, i: usize) -> PathStep {
        let t = self.t_start + i;
        let major = (self.major_origin as isize + self.major_step * t as isize) as usize;
        let minor = (self.key + minor_offset(self.slope, t)) as usize;
        let minor_f = self.key as f64 + self.slope * t as f64;
        match self.major {
            Axis::X => PathStep {
                col: major,
                row: minor,
                x: major as f64,
                y: minor_f,
            },
            Axis::Y => PathStep {
                col: minor,
                row: major,
                x: minor_f,
                y: major as f64,
            },
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = PathStep> + '_ {
        (0..self.len()).map(move |i| self.step(i))
    }

    /// Pixel indices `(col, row)` in march order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.steps().map(|s| (s.col, s.row))
    }
}

/// Ray paths for the sun's march direction.
pub fn compute_paths(width: usize, height: usize, sun: &SunGeometry) -> Result<Vec<RayPath>> {
    RayPath::decompose(width, height, sun.p, sun.q)
}

/// Output of [`cast_shadows`], all on the (upsampled) DSM grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowCast {
    /// 1 = shadow, 0 = lit or invalid.
    pub shadow: Raster,
    /// 1 where the DSM sample was usable, 0 where it was nodata.
    pub valid: Raster,
    /// The DSM the sweep ran on (the input upsampled by `upscale`).
    pub dsm: Raster,
}

/// Elevation along a path; the lookup position is clamped onto the grid
/// because the continuous line may run up to half a pixel outside it.
#[inline]
fn sample_on_path(dsm: &Raster, step: &PathStep) -> Option<f64> {
    let x = step.x.clamp(0.0, (dsm.width() - 1) as f64);
    let y = step.y.clamp(0.0, (dsm.height() - 1) as f64);
    dsm.bilinear_unchecked(x, y)
}

fn check_inputs(dsm: &Raster) -> Result<f64> {
    if dsm.valid_count() == 0 {
        return Err(Error::NoValidData);
    }
    let gt = dsm.geotransform;
    let (sx, sy) = (gt.pixel_size_x.abs(), gt.pixel_size_y.abs());
    if (sx - sy).abs() > 1e-9 * sx.max(sy) {
        return Err(Error::AnisotropicPixels { x: sx, y: sy });
    }
    Ok(sx)
}

/// Cast shadows over `dsm` after upsampling it by `upscale`.
pub fn cast_shadows(dsm: &Raster, sun: &SunGeometry, upscale: usize) -> Result<ShadowCast> {
    cast_shadows_with(dsm, sun, upscale, Execution::default())
}

pub fn cast_shadows_with(dsm: &Raster, sun: &SunGeometry, upscale: usize, exec: Execution) -> Result<ShadowCast> {
    if upscale == 0 {
        return Err(Error::Argument("upscale must be >= 1".into()));
    }
    check_inputs(dsm)?;
    let dsm = dsm.upsample(upscale)?;
    let pixel_size = dsm.geotransform.pixel_size_x.abs();
    let n = dsm.len();

    if sun.is_zenith() {
        let valid: Vec<f64> = dsm.data().iter().map(|&v| if dsm.is_nodata(v) { 0.0 } else { 1.0 }).collect();
        return Ok(ShadowCast {
            shadow: dsm.with_data(vec![0.0; n], None)?,
            valid: dsm.with_data(valid, None)?,
            dsm,
        });
    }

    let paths = compute_paths(dsm.width(), dsm.height(), sun)?;
    let flags: Vec<AtomicU8> = (0..n).map(|_| AtomicU8::new(0)).collect();
    let width = dsm.width();
    exec::for_each(exec, &paths, |path| {
        // paths partition the grid, so writes never overlap
        sweep_path(&dsm, path, pixel_size, sun.slope, |col, row, f| {
            flags[row * width + col].store(f, Ordering::Relaxed);
        });
    });

    let flags: Vec<u8> = flags.into_iter().map(AtomicU8::into_inner).collect();
    let shadow = flags.iter().map(|f| f64::from(f & FLAG_SHADOW)).collect();
    let valid = flags.iter().map(|f| if f & FLAG_VALID != 0 { 1.0 } else { 0.0 }).collect();
    Ok(ShadowCast {
        shadow: dsm.with_data(shadow, None)?,
        valid: dsm.with_data(valid, None)?,
        dsm,
    })
}

fn sweep_path(dsm: &Raster, path: &RayPath, pixel_size: f64, slope: f64, mut emit: impl FnMut(usize, usize, u8)) {
    // (x, y, z) of the current occluder
    let mut occluder: Option<(f64, f64, f64)> = None;
    for step in path.steps() {
        let Some(z) = sample_on_path(dsm, &step) else {
            emit(step.col, step.row, 0);
            continue;
        };
        let shadowed = match occluder {
            None => false,
            Some((ox, oy, oz)) => {
                let (dx, dy) = (step.x - ox, step.y - oy);
                let d = (dx * dx + dy * dy).sqrt();
                let length = (oz - z) / pixel_size / slope;
                d < length
            }
        };
        if shadowed {
            emit(step.col, step.row, FLAG_SHADOW | FLAG_VALID);
        } else {
            occluder = Some((step.x, step.y, z));
            emit(step.col, step.row, FLAG_VALID);
        }
    }
}

/// Exhaustive reference: a sample is in shadow iff *any* earlier valid
/// sample on its path occludes it. Quadratic per path; no upscaling.
pub fn cast_shadows_oracle(dsm: &Raster, sun: &SunGeometry) -> Result<Raster> {
    let pixel_size = check_inputs(dsm)?;
    let mut mask = vec![0.0; dsm.len()];
    if sun.is_zenith() {
        return dsm.with_data(mask, None);
    }
    for path in compute_paths(dsm.width(), dsm.height(), sun)? {
        let samples: Vec<(PathStep, Option<f64>)> = path.steps().map(|s| (s, sample_on_path(dsm, &s))).collect();
        for (j, (cur, zj)) in samples.iter().enumerate() {
            let Some(zj) = *zj else { continue };
            let occluded = samples[..j].iter().any(|(s, zs)| match zs {
                Some(zs) => {
                    let (dx, dy) = (cur.x - s.x, cur.y - s.y);
                    let d = (dx * dx + dy * dy).sqrt();
                    d < (zs - zj) / pixel_size / sun.slope
                }
                None => false,
            });
            if occluded {
                mask[dsm.index(cur.col, cur.row)] = 1.0;
            }
        }
    }
    dsm.with_data(mask, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Crs, GeoTransform};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coverage(width: usize, height: usize, p: f64, q: f64) -> Vec<u32> {
        let mut hist = vec![0u32; width * height];
        for path in RayPath::decompose(width, height, p, q).unwrap() {
            for (c, r) in path.pixels() {
                hist[r * width + c] += 1;
            }
        }
        hist
    }

    fn strip(values: &[f64]) -> Raster {
        Raster::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn axis_aligned_paths() {
        let cols = RayPath::decompose(4, 4, 0.0, 1.0).unwrap();
        assert_eq!(cols.len(), 4);
        for (i, path) in cols.iter().enumerate() {
            let px: Vec<_> = path.pixels().collect();
            assert_eq!(px, (0..4).map(|r| (i, r)).collect::<Vec<_>>());
        }
        let rows = RayPath::decompose(4, 4, 1.0, 0.0).unwrap();
        assert_eq!(rows.len(), 4);
        for (i, path) in rows.iter().enumerate() {
            let px: Vec<_> = path.pixels().collect();
            assert_eq!(px, (0..4).map(|c| (c, i)).collect::<Vec<_>>());
        }
        let west = RayPath::decompose(3, 2, -1.0, 0.0).unwrap();
        assert_eq!(west[0].pixels().collect::<Vec<_>>(), vec![(2, 0), (1, 0), (0, 0)]);
    }

    #[test]
    fn oblique_coverage_is_exact() {
        assert!(coverage(16, 16, 0.6, 0.8).iter().all(|&c| c == 1));
        assert!(coverage(7, 23, -0.3, 0.1).iter().all(|&c| c == 1));
        assert!(coverage(1, 9, 0.5, -0.5).iter().all(|&c| c == 1));
    }

    #[test]
    fn path_geometry_invariants() {
        let (p, q) = (-0.37, 0.81);
        for path in RayPath::decompose(20, 13, p, q).unwrap() {
            let steps: Vec<_> = path.steps().collect();
            let seed = steps[0];
            for w in steps.windows(2) {
                assert!((w[0].col as isize - w[1].col as isize).abs() <= 1);
                assert!((w[0].row as isize - w[1].row as isize).abs() <= 1);
            }
            for s in &steps {
                assert!((s.x - s.col as f64).abs() <= 0.5 && (s.y - s.row as f64).abs() <= 0.5);
                // collinear with the seed along (p, q)
                let cross = (s.x - seed.x) * q - (s.y - seed.y) * p;
                assert!(cross.abs() < 1e-9);
                assert!((s.x - seed.x) * p + (s.y - seed.y) * q >= 0.0);
            }
        }
    }

    #[test]
    fn degenerate_direction_rejected() {
        assert!(matches!(RayPath::decompose(4, 4, 0.0, 0.0), Err(Error::DegenerateDirection)));
    }

    #[test]
    fn flat_terrain_is_lit() {
        let dsm = Raster::filled(12, 9, 42.0).unwrap();
        for (az, el) in [(10.0, 5.0), (135.0, 30.0), (270.0, 60.0)] {
            let sun = SunGeometry::new(az, el).unwrap();
            let out = cast_shadows(&dsm, &sun, 4).unwrap();
            assert!(out.shadow.data().iter().all(|&v| v == 0.0));
            assert!(out.valid.data().iter().all(|&v| v == 1.0));
            assert_eq!(out.shadow.dims(), (48, 36));
        }
    }

    #[test]
    fn pillar_shadow_length_45() {
        let mut z = vec![0.0; 64];
        z[0] = 10.0;
        let dsm = strip(&z);
        let sun = SunGeometry::new(270.0, 45.0).unwrap();
        let out = cast_shadows(&dsm, &sun, 1).unwrap();
        let mask = out.shadow.data();
        assert_eq!(mask[0], 0.0);
        assert!(mask[1..10].iter().all(|&v| v == 1.0));
        // d = l = 10 is lit
        assert_eq!(mask[10], 0.0);
        assert!(mask[11..].iter().all(|&v| v == 0.0));
        assert_eq!(cast_shadows_oracle(&dsm, &sun).unwrap().data(), mask);
    }

    #[test]
    fn pillar_shadow_length_30() {
        let mut z = vec![0.0; 64];
        z[0] = 10.0;
        let dsm = strip(&z);
        let sun = SunGeometry::new(270.0, 30.0).unwrap();
        let mask = cast_shadows(&dsm, &sun, 1).unwrap().shadow.into_data();
        let l = 10.0 / 30f64.to_radians().tan();
        let first_lit = l.ceil() as usize;
        assert_eq!(first_lit, 18);
        for (d, &v) in mask.iter().enumerate().skip(1) {
            assert_eq!(v == 1.0, (d as f64) < l, "d = {d}");
        }
    }

    #[test]
    fn pixel_size_converts_elevation() {
        // 0.5 m pixels: a 10 m pillar at 45 degrees shades 20 pixels
        let mut z = vec![0.0; 64];
        z[0] = 10.0;
        let gt = GeoTransform::new(0.0, 0.0, 0.5, -0.5);
        let dsm = Raster::new(64, 1, z, gt, None, Crs::PixelOnly).unwrap();
        let sun = SunGeometry::new(270.0, 45.0).unwrap();
        let mask = cast_shadows(&dsm, &sun, 1).unwrap().shadow.into_data();
        assert_eq!(mask.iter().filter(|&&v| v == 1.0).count(), 19);
        assert_eq!(mask[20], 0.0);
    }

    #[test]
    fn zenith_and_errors() {
        let mut z = vec![0.0; 16];
        z[5] = 100.0;
        let dsm = Raster::from_vec(4, 4, z).unwrap();
        let sun = SunGeometry::new(0.0, 90.0).unwrap();
        let out = cast_shadows(&dsm, &sun, 2).unwrap();
        assert!(out.shadow.data().iter().all(|&v| v == 0.0));

        let mut empty = Raster::filled(3, 3, -1.0).unwrap();
        empty.nodata = Some(-1.0);
        let sun = SunGeometry::new(0.0, 30.0).unwrap();
        assert!(matches!(cast_shadows(&empty, &sun, 1), Err(Error::NoValidData)));

        let gt = GeoTransform::new(0.0, 0.0, 1.0, -2.0);
        let aniso = Raster::new(3, 3, vec![0.0; 9], gt, None, Crs::PixelOnly).unwrap();
        assert!(matches!(cast_shadows(&aniso, &sun, 1), Err(Error::AnisotropicPixels { .. })));
        assert!(cast_shadows(&dsm, &sun, 0).is_err());
    }

    #[test]
    fn nodata_is_invalid_and_never_occludes() {
        let mut z = vec![0.0; 8];
        z[0] = 50.0;
        z[1] = -9999.0;
        let mut dsm = strip(&z);
        dsm.nodata = Some(-9999.0);
        let sun = SunGeometry::new(270.0, 45.0).unwrap();
        let out = cast_shadows(&dsm, &sun, 1).unwrap();
        assert_eq!(out.valid.data()[1], 0.0);
        assert_eq!(out.shadow.data()[1], 0.0);
        // the pillar still occludes across the hole
        assert_eq!(out.shadow.data()[2], 1.0);

        let mut z = vec![0.0; 8];
        z[0] = -9999.0;
        z[1] = 5.0;
        let mut dsm = strip(&z);
        dsm.nodata = Some(-9999.0);
        let out = cast_shadows(&dsm, &sun, 1).unwrap();
        assert_eq!(out.shadow.data()[1], 0.0);
        assert_eq!(out.shadow.data()[2..6], [1.0; 4]);
        assert_eq!(out.shadow.data(), cast_shadows_oracle(&dsm, &sun).unwrap().data());
    }

    #[test]
    fn sweep_matches_oracle_on_random_dsms() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let z: Vec<f64> = (0..32 * 32).map(|_| rng.gen_range(0.0..30.0)).collect();
            let dsm = Raster::from_vec(32, 32, z).unwrap();
            let sun = SunGeometry::new(rng.gen_range(0.0..360.0), rng.gen_range(10.0..80.0)).unwrap();
            let fast = cast_shadows(&dsm, &sun, 1).unwrap();
            let slow = cast_shadows_oracle(&dsm, &sun).unwrap();
            assert_eq!(fast.shadow.data(), slow.data());
        }
    }

    #[test]
    fn sequential_equals_parallel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<f64> = (0..40 * 30).map(|_| rng.gen_range(0.0..20.0)).collect();
        let dsm = Raster::from_vec(40, 30, z).unwrap();
        let sun = SunGeometry::new(213.0, 33.0).unwrap();
        let a = cast_shadows_with(&dsm, &sun, 2, Execution::Sequential).unwrap();
        let b = cast_shadows_with(&dsm, &sun, 2, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn dsm_strategy() -> impl Strategy<Value = Raster> {
            (4usize..20, 4usize..20).prop_flat_map(|(w, h)| {
                proptest::collection::vec(0.0f64..25.0, w * h).prop_map(move |z| Raster::from_vec(w, h, z).unwrap())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn coverage_exactly_once(w in 1usize..40, h in 1usize..40, angle in 0.0f64..std::f64::consts::TAU) {
                let hist = coverage(w, h, angle.cos(), angle.sin());
                prop_assert!(hist.iter().all(|&c| c == 1));
            }

            #[test]
            fn vertical_translation_invariance_exact(z in proptest::collection::vec(0i32..40, 12 * 10),
                                                     quadrant in 0u8..4, el in 10.0f64..80.0, dz in -100i32..100) {
                // cardinal sun and integer elevations: every sample is an exact grid value
                let dsm = Raster::from_vec(12, 10, z.iter().map(|&v| f64::from(v)).collect()).unwrap();
                let shifted = dsm.with_data(dsm.data().iter().map(|v| v + f64::from(dz)).collect(), None).unwrap();
                let sun = SunGeometry::new(f64::from(quadrant) * 90.0, el).unwrap();
                prop_assert_eq!(cast_shadows(&dsm, &sun, 1).unwrap().shadow, cast_shadows(&shifted, &sun, 1).unwrap().shadow);
            }

            #[test]
            fn vertical_translation_invariance(dsm in dsm_strategy(), az in 0.0f64..360.0, el in 10.0f64..80.0, dz in -50.0f64..50.0) {
                let sun = SunGeometry::new(az, el).unwrap();
                let shifted = dsm.with_data(dsm.data().iter().map(|v| v + dz).collect(), None).unwrap();
                let a = cast_shadows(&dsm, &sun, 1).unwrap().shadow;
                let b = cast_shadows(&shifted, &sun, 1).unwrap().shadow;
                // off-grid bilinear samples round differently after a shift; only exact ties may flip
                let flips = a.data().iter().zip(b.data()).filter(|(x, y)| x != y).count();
                prop_assert!(flips <= 1, "{} flips", flips);
            }

            #[test]
            fn seeds_are_lit(dsm in dsm_strategy(), az in 0.0f64..360.0, el in 5.0f64..85.0) {
                let sun = SunGeometry::new(az, el).unwrap();
                let mask = cast_shadows(&dsm, &sun, 1).unwrap().shadow;
                for path in compute_paths(dsm.width(), dsm.height(), &sun).unwrap() {
                    let (c, r) = path.pixels().next().unwrap();
                    prop_assert_eq!(mask.get(c, r), 0.0);
                }
            }

            #[test]
            fn raising_a_lit_pixel_never_removes_later_shadow(dsm in dsm_strategy(), az in 0.0f64..360.0,
                                                              el in 10.0f64..80.0, pick in 0usize..10_000, bump in 0.0f64..20.0) {
                let sun = SunGeometry::new(az, el).unwrap();
                let before = cast_shadows_oracle(&dsm, &sun).unwrap();
                let lit: Vec<usize> = (0..dsm.len()).filter(|&i| before.data()[i] == 0.0).collect();
                let target = lit[pick % lit.len()];
                let mut z = dsm.data().to_vec();
                z[target] += bump;
                let after = cast_shadows_oracle(&dsm.with_data(z, None).unwrap(), &sun).unwrap();
                for path in compute_paths(dsm.width(), dsm.height(), &sun).unwrap() {
                    let idx: Vec<usize> = path.pixels().map(|(c, r)| dsm.index(c, r)).collect();
                    if let Some(pos) = idx.iter().position(|&i| i == target) {
                        // skip the immediate neighbours whose bilinear samples share the bumped pixel
                        for &i in &idx[pos + 1..] {
                            if before.data()[i] == 1.0 && after.data()[i] == 0.0 {
                                let (ci, ri) = (i % dsm.width(), i / dsm.width());
                                let (ct, rt) = (target % dsm.width(), target / dsm.width());
                                let touches = ci.abs_diff(ct) <= 1 && ri.abs_diff(rt) <= 1;
                                prop_assert!(touches, "shadow removed at {} after raising {}", i, target);
                            }
                        }
                    }
                }
            }
        }
    }
}
