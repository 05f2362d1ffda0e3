//! Georeferenced single-band grids.
//!
//! Samples are stored row-major as `f64`. The geotransform maps pixel
//! *centers* to world coordinates: pixel `(col, row)` sits at
//! `(origin_x + col * pixel_size_x, origin_y + row * pixel_size_y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodata sentinel used for rasters produced by this crate.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// Largest raster (in pixels) any operation will allocate.
pub const MAX_PIXELS: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size_x: f64,
    pub pixel_size_y: f64,
}

impl GeoTransform {
    /// Unit pixels anchored at the origin; world coordinates equal (col, row).
    pub const IDENTITY: GeoTransform = GeoTransform {
        origin_x: 0.0,
        origin_y: 0.0,
        pixel_size_x: 1.0,
        pixel_size_y: 1.0,
    };

    pub fn new(origin_x: f64, origin_y: f64, pixel_size_x: f64, pixel_size_y: f64) -> Self {
        GeoTransform {
            origin_x,
            origin_y,
            pixel_size_x,
            pixel_size_y,
        }
    }

    /// World coordinates of a (possibly fractional) pixel position.
    #[inline]
    pub fn pixel_to_world(&self, col: f64, row: f64) -> (f64, f64) {
        (
            self.origin_x + col * self.pixel_size_x,
            self.origin_y + row * self.pixel_size_y,
        )
    }

    #[inline]
    pub fn world_to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x) / self.pixel_size_x,
            (y - self.origin_y) / self.pixel_size_y,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hemisphere {
    North,
    South,
}

/// Coordinate reference of a raster's world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crs {
    /// Longitude / latitude in degrees (x = lon, y = lat).
    Geographic,
    /// WGS84 UTM easting / northing in meters.
    Utm { zone: u8, hemisphere: Hemisphere },
    /// No world frame; pixel coordinates only.
    PixelOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }
}

/// Axis-aligned world rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        BBox {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }
}

/// Per-cell reduction used when gridding point clouds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<f64>,
    pub geotransform: GeoTransform,
    pub nodata: Option<f64>,
    pub crs: Crs,
}

impl Raster {
    pub fn new(
        width: usize,
        height: usize,
        data: Vec<f64>,
        geotransform: GeoTransform,
        nodata: Option<f64>,
        crs: Crs,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Argument(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Argument(format!(
                "sample count {} does not match {width}x{height}",
                data.len()
            )));
        }
        if !(geotransform.pixel_size_x > 0.0) {
            return Err(Error::Argument(format!(
                "pixel_size_x must be positive, got {}",
                geotransform.pixel_size_x
            )));
        }
        if geotransform.pixel_size_y == 0.0 || !geotransform.pixel_size_y.is_finite() {
            return Err(Error::Argument("pixel_size_y must be finite and non-zero".into()));
        }
        Ok(Raster {
            width,
            height,
            data,
            geotransform,
            nodata,
            crs,
        })
    }

    /// Pixel-grid raster with an identity geotransform and no nodata.
    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        Raster::new(width, height, data, GeoTransform::IDENTITY, None, Crs::PixelOnly)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Raster::from_vec(width, height, vec![value; width * height])
    }

    /// A raster on the same grid as `self` holding `data`.
    pub fn with_data(&self, data: Vec<f64>, nodata: Option<f64>) -> Result<Self> {
        Raster::new(self.width, self.height, data, self.geotransform, nodata, self.crs)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        row * self.width + col
    }

    #[inline]
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn is_nodata(&self, v: f64) -> bool {
        match self.nodata {
            Some(nd) => v == nd || (nd.is_nan() && v.is_nan()),
            None => false,
        }
    }

    /// Stored value at a pixel, `None` for nodata.
    #[inline]
    pub fn value(&self, col: usize, row: usize) -> Option<f64> {
        let v = self.get(col, row);
        if self.is_nodata(v) {
            None
        } else {
            Some(v)
        }
    }

    pub fn valid_count(&self) -> usize {
        self.data.iter().filter(|v| !self.is_nodata(**v)).count()
    }

    pub fn same_shape(&self, other: &Raster) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }

    /// Bilinear interpolation at a fractional pixel position.
    ///
    /// Returns `Ok(None)` when any neighbor carrying non-zero weight is
    /// nodata. Exact pixel-center queries return the stored value.
    pub fn bilinear_sample(&self, x: f64, y: f64) -> Result<Option<f64>> {
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        if !(x >= 0.0 && x <= max_x && y >= 0.0 && y <= max_y) {
            return Err(Error::OutOfBounds {
                x,
                y,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.bilinear_unchecked(x, y))
    }

    /// Same as [`Raster::bilinear_sample`] for coordinates known to be in range.
    #[inline]
    pub(crate) fn bilinear_unchecked(&self, x: f64, y: f64) -> Option<f64> {
        let x0 = (x.floor() as usize).min(self.width.saturating_sub(2));
        let y0 = (y.floor() as usize).min(self.height.saturating_sub(2));
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);

        let mut acc = 0.0;
        for (col, row, w) in [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x1, y0, fx * (1.0 - fy)),
            (x0, y1, (1.0 - fx) * fy),
            (x1, y1, fx * fy),
        ] {
            if w == 0.0 {
                continue;
            }
            let v = self.get(col, row);
            if self.is_nodata(v) {
                return None;
            }
            acc += w * v;
        }
        if fx == 0.0 && fy == 0.0 {
            // exact center: skip the arithmetic entirely
            return self.value(x0, y0);
        }
        Some(acc)
    }

    /// Bilinear upsampling by an integer factor.
    ///
    /// Output pixel `i` samples input coordinate `i / factor` (clamped to the
    /// last input pixel), so the output geotransform keeps the origin and
    /// divides the pixel sizes by `factor`.
    pub fn upsample(&self, factor: usize) -> Result<Raster> {
        if factor == 0 {
            return Err(Error::Argument("upsample factor must be >= 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let (w, h) = (self.width.saturating_mul(factor), self.height.saturating_mul(factor));
        if w.checked_mul(h).is_none_or(|n| n > MAX_PIXELS) {
            return Err(Error::Argument(format!(
                "upsampling {}x{} by {factor} exceeds {MAX_PIXELS} pixels",
                self.width, self.height
            )));
        }
        let f = factor as f64;
        let max_x = (self.width - 1) as f64;
        let max_y = (self.height - 1) as f64;
        let nodata = self.nodata.unwrap_or(DEFAULT_NODATA);
        let mut data = Vec::with_capacity(w * h);
        for row in 0..h {
            let y = (row as f64 / f).min(max_y);
            for col in 0..w {
                let x = (col as f64 / f).min(max_x);
                data.push(self.bilinear_unchecked(x, y).unwrap_or(nodata));
            }
        }
        let gt = GeoTransform {
            origin_x: self.geotransform.origin_x,
            origin_y: self.geotransform.origin_y,
            pixel_size_x: self.geotransform.pixel_size_x / f,
            pixel_size_y: self.geotransform.pixel_size_y / f,
        };
        let has_nodata = self.nodata.is_some();
        Raster::new(w, h, data, gt, has_nodata.then_some(nodata), self.crs)
    }
}

/// Grid a point cloud into a north-up raster, keeping the min or max
/// elevation per cell.
///
/// Cells are half-open: column `c` covers `[min_x + c·res, min_x + (c+1)·res)`
/// and likewise in y counted up from `min_y`. Empty cells hold
/// [`DEFAULT_NODATA`].
pub fn grid_points(points: &[Point3], bbox: BBox, resolution: f64, agg: Aggregation, crs: Crs) -> Result<Raster> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Argument(format!("resolution must be positive, got {resolution}")));
    }
    if !(bbox.max_x > bbox.min_x && bbox.max_y > bbox.min_y) {
        return Err(Error::Argument("degenerate bounding box".into()));
    }
    let width = ((bbox.max_x - bbox.min_x) / resolution).ceil() as usize;
    let height = ((bbox.max_y - bbox.min_y) / resolution).ceil() as usize;
    let mut data = vec![DEFAULT_NODATA; width * height];
    let mut filled = vec![false; width * height];

    for pt in points {
        if !(pt.x >= bbox.min_x && pt.x < bbox.max_x && pt.y >= bbox.min_y && pt.y < bbox.max_y) {
            continue;
        }
        if !pt.z.is_finite() {
            continue;
        }
        let col = ((pt.x - bbox.min_x) / resolution).floor() as usize;
        let up = ((pt.y - bbox.min_y) / resolution).floor() as usize;
        if col >= width || up >= height {
            continue;
        }
        let idx = (height - 1 - up) * width + col;
        let cell = &mut data[idx];
        if !filled[idx] {
            *cell = pt.z;
            filled[idx] = true;
        } else {
            *cell = match agg {
                Aggregation::Min => cell.min(pt.z),
                Aggregation::Max => cell.max(pt.z),
            };
        }
    }

    let gt = GeoTransform {
        origin_x: bbox.min_x + 0.5 * resolution,
        origin_y: bbox.min_y + (height as f64 - 0.5) * resolution,
        pixel_size_x: resolution,
        pixel_size_y: -resolution,
    };
    Raster::new(width, height, data, gt, Some(DEFAULT_NODATA), crs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lerp(a: f64, b: f64, t: f64) -> f64 {
        a + (b - a) * t
    }

    #[test]
    fn bilinear_center_of_2x2_is_mean() {
        let r = Raster::from_vec(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.bilinear_sample(0.5, 0.5).unwrap(), Some(1.5));
        assert_eq!(r.bilinear_sample(0.0, 0.0).unwrap(), Some(0.0));
        assert_eq!(r.bilinear_sample(1.0, 1.0).unwrap(), Some(3.0));
    }

    #[test]
    fn bilinear_matches_two_stage_linear_interpolation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..9).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let r = Raster::from_vec(3, 3, vals.clone()).unwrap();
        let (x, y) = (1.25, 0.75);
        // rows 0 and 1, columns 1 and 2
        let top = lerp(vals[1], vals[2], 0.25);
        let bottom = lerp(vals[4], vals[5], 0.25);
        let expected = lerp(top, bottom, 0.75);
        let got = r.bilinear_sample(x, y).unwrap().unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }

    #[test]
    fn bilinear_exact_centers_are_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let vals: Vec<f64> = (0..20).map(|_| rng.gen::<f64>() * 1e3).collect();
        let r = Raster::from_vec(5, 4, vals.clone()).unwrap();
        for row in 0..4 {
            for col in 0..5 {
                let v = r.bilinear_sample(col as f64, row as f64).unwrap().unwrap();
                assert_eq!(v.to_bits(), vals[row * 5 + col].to_bits());
            }
        }
    }

    #[test]
    fn bilinear_out_of_bounds() {
        let r = Raster::filled(3, 3, 1.0).unwrap();
        assert!(matches!(r.bilinear_sample(-0.1, 0.0), Err(Error::OutOfBounds { .. })));
        assert!(matches!(r.bilinear_sample(0.0, 2.01), Err(Error::OutOfBounds { .. })));
        assert!(r.bilinear_sample(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn bilinear_nodata_poisons() {
        let mut r = Raster::from_vec(2, 2, vec![0.0, -1.0, 2.0, 3.0]).unwrap();
        r.nodata = Some(-1.0);
        assert_eq!(r.bilinear_sample(0.5, 0.5).unwrap(), None);
        assert_eq!(r.bilinear_sample(0.0, 0.5).unwrap(), Some(1.0));
        assert_eq!(r.bilinear_sample(1.0, 0.0).unwrap(), None);
    }

    #[test]
    fn single_pixel_raster_samples() {
        let r = Raster::filled(1, 1, 4.0).unwrap();
        assert_eq!(r.bilinear_sample(0.0, 0.0).unwrap(), Some(4.0));
        assert_eq!(r.upsample(3).unwrap().data(), &[4.0; 9]);
    }

    #[test]
    fn upsample_identity_and_constant() {
        let r = Raster::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.upsample(1).unwrap(), r);
        let c = Raster::filled(3, 2, 7.0).unwrap().upsample(4).unwrap();
        assert_eq!(c.dims(), (12, 8));
        assert!(c.data().iter().all(|&v| v == 7.0));
        assert_eq!(c.geotransform.pixel_size_x, 0.25);
        assert!(matches!(r.upsample(0), Err(Error::Argument(_))));
    }

    #[test]
    fn upsample_matches_bilinear_sample_oracle() {
        let r = Raster::from_vec(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let up = r.upsample(2).unwrap();
        for row in 0..4 {
            for col in 0..4 {
                let x = (col as f64 / 2.0).min(1.0);
                let y = (row as f64 / 2.0).min(1.0);
                let expected = r.bilinear_sample(x, y).unwrap().unwrap();
                assert_eq!(up.get(col, row), expected);
            }
        }
    }

    #[test]
    fn upsample_keeps_georeferencing_of_centers() {
        let gt = GeoTransform::new(100.0, 200.0, 2.0, -2.0);
        let r = Raster::new(4, 4, (0..16).map(f64::from).collect(), gt, None, Crs::PixelOnly).unwrap();
        let up = r.upsample(4).unwrap();
        // output pixel (4, 8) sits on input pixel (1, 2)
        assert_eq!(up.geotransform.pixel_to_world(4.0, 8.0), gt.pixel_to_world(1.0, 2.0));
        assert_eq!(up.get(4, 8), r.get(1, 2));
    }

    #[test]
    fn upsample_composes_on_ramps() {
        let ramp: Vec<f64> = (0..15).map(|i| 0.5 * (i % 5) as f64 - 1.25 * (i / 5) as f64).collect();
        let r = Raster::from_vec(5, 3, ramp).unwrap();
        let direct = r.upsample(6).unwrap();
        let staged = r.upsample(2).unwrap().upsample(3).unwrap();
        for (a, b) in direct.data().iter().zip(staged.data()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_points_min_max() {
        let pts = [Point3::new(0.2, 0.2, 3.0), Point3::new(0.7, 0.6, 9.0)];
        let bbox = BBox::new(0.0, 0.0, 2.0, 2.0);
        let mn = grid_points(&pts, bbox, 1.0, Aggregation::Min, Crs::PixelOnly).unwrap();
        let mx = grid_points(&pts, bbox, 1.0, Aggregation::Max, Crs::PixelOnly).unwrap();
        // lower-left cell is row 1 in a north-up grid
        assert_eq!(mn.get(0, 1), 3.0);
        assert_eq!(mx.get(0, 1), 9.0);
        assert_eq!(mn.value(0, 0), None);
        assert_eq!(mn.geotransform.pixel_to_world(0.0, 1.0), (0.5, 0.5));
    }

    #[test]
    fn grid_points_empty_is_all_nodata() {
        let r = grid_points(&[], BBox::new(0.0, 0.0, 3.0, 3.0), 1.0, Aggregation::Min, Crs::PixelOnly).unwrap();
        assert_eq!(r.valid_count(), 0);
        assert!(grid_points(&[], BBox::new(0.0, 0.0, 0.0, 3.0), 1.0, Aggregation::Min, Crs::PixelOnly).is_err());
        assert!(grid_points(&[], BBox::new(0.0, 0.0, 1.0, 3.0), 0.0, Aggregation::Min, Crs::PixelOnly).is_err());
    }

    #[test]
    fn grid_points_half_open_cells() {
        let pts = [Point3::new(1.0, 0.5, 4.0), Point3::new(2.0, 0.5, 5.0)];
        let r = grid_points(&pts, BBox::new(0.0, 0.0, 2.0, 1.0), 1.0, Aggregation::Max, Crs::PixelOnly).unwrap();
        assert_eq!(r.value(0, 0), None);
        assert_eq!(r.value(1, 0), Some(4.0));
    }

    #[test]
    fn grid_points_matches_brute_force_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Point3> = (0..1000)
            .map(|_| Point3::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..50.0)))
            .collect();
        let bbox = BBox::new(0.0, 0.0, 10.0, 10.0);
        for agg in [Aggregation::Min, Aggregation::Max] {
            let r = grid_points(&pts, bbox, 1.0, agg, Crs::PixelOnly).unwrap();
            for row in 0..10 {
                for col in 0..10 {
                    let (lo_x, lo_y) = (col as f64, (9 - row) as f64);
                    let members = pts
                        .iter()
                        .filter(|p| p.x >= lo_x && p.x < lo_x + 1.0 && p.y >= lo_y && p.y < lo_y + 1.0)
                        .map(|p| p.z);
                    let expected = match agg {
                        Aggregation::Min => members.fold(f64::INFINITY, f64::min),
                        Aggregation::Max => members.fold(f64::NEG_INFINITY, f64::max),
                    };
                    if expected.is_finite() {
                        assert_eq!(r.value(col, row), Some(expected));
                    } else {
                        assert_eq!(r.value(col, row), None);
                    }
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bilinear_is_continuous(vals in proptest::collection::vec(-100.0f64..100.0, 16),
                                      x in 0.0f64..3.0, y in 0.0f64..3.0, eps in 0.0f64..1e-3) {
                let r = Raster::from_vec(4, 4, vals.clone()).unwrap();
                let max_grad = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())) * 2.0;
                let a = r.bilinear_sample(x, y).unwrap().unwrap();
                let b = r.bilinear_sample((x + eps).min(3.0), y).unwrap().unwrap();
                prop_assert!((a - b).abs() <= eps * max_grad * 2.0 + 1e-12);
            }

            #[test]
            fn min_never_exceeds_max(pts in proptest::collection::vec((0.0f64..5.0, 0.0f64..5.0, -10.0f64..10.0), 0..200)) {
                let pts: Vec<Point3> = pts.into_iter().map(|(x, y, z)| Point3::new(x, y, z)).collect();
                let bbox = BBox::new(0.0, 0.0, 5.0, 5.0);
                let mn = grid_points(&pts, bbox, 0.5, Aggregation::Min, Crs::PixelOnly).unwrap();
                let mx = grid_points(&pts, bbox, 0.5, Aggregation::Max, Crs::PixelOnly).unwrap();
                for i in 0..mn.len() {
                    let (a, b) = (mn.data()[i], mx.data()[i]);
                    if !mn.is_nodata(a) && !mx.is_nodata(b) {
                        prop_assert!(a <= b);
                    }
                }
            }
        }
    }
}
