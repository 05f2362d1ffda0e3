//! DSM-space shadows to image space through an RPC camera, with a z-buffer
//! resolving many-to-one mappings.
//!
//! Every valid DSM cell is localized to `(lon, lat, z)`, projected, and
//! rounded to the nearest image pixel. The highest cell landing on a pixel
//! wins; exactly equal heights go to the lowest row-major DSM index, so the
//! result does not depend on visitation order. Pixels nothing lands on stay
//! non-shadow and are flagged in the uncertainty mask.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::masks::{fill_small_holes, remove_small_regions};
use crate::raster::{Crs, GeoTransform, Raster, MAX_PIXELS};
use crate::rpc::RpcModel;
pub use crate::utm::{geographic_to_utm, utm_to_geographic};

/// Minimum shadow component area kept by [`finalize`] by default.
pub const DEFAULT_MIN_REGION_PX: usize = 50;

/// Shadow and uncertainty masks in image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowProduct {
    /// 1 = shadow.
    pub shadow: Raster,
    /// 1 = no DSM cell projected here.
    pub uncertainty: Raster,
}

/// Geographic `(lon, lat)` of a DSM pixel center.
pub fn cell_to_geographic(dsm: &Raster, col: usize, row: usize) -> Result<(f64, f64)> {
    let (x, y) = dsm.geotransform.pixel_to_world(col as f64, row as f64);
    match dsm.crs {
        Crs::Geographic => Ok((x, y)),
        Crs::Utm { zone, hemisphere } => utm_to_geographic(x, y, zone, hemisphere),
        Crs::PixelOnly => Err(Error::Argument(
            "DSM has no coordinate reference; declare Geographic or UTM".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    pixel: usize,
    z: f64,
    cell: usize,
    shadow: f64,
}

/// Projection of one DSM cell, `None` for nodata or off-image cells.
fn project_cell(
    dsm: &Raster,
    s_dsm: &Raster,
    rpc: &RpcModel,
    image_height: usize,
    image_width: usize,
    cell: usize,
) -> Result<Option<Hit>> {
    let (col, row) = (cell % dsm.width(), cell / dsm.width());
    let z = dsm.get(col, row);
    let s = s_dsm.get(col, row);
    if dsm.is_nodata(z) || !z.is_finite() || s_dsm.is_nodata(s) {
        return Ok(None);
    }
    let (lon, lat) = cell_to_geographic(dsm, col, row)?;
    let (sample, line) = rpc.eval_rational(lon, lat, z)?;
    let (px, py) = ((sample + 0.5).floor(), (line + 0.5).floor());
    if !(px >= 0.0 && py >= 0.0 && px < image_width as f64 && py < image_height as f64) {
        return Ok(None);
    }
    Ok(Some(Hit {
        pixel: py as usize * image_width + px as usize,
        z,
        cell,
        shadow: s,
    }))
}

struct ZBuffer {
    z: Vec<f64>,
    cell: Vec<usize>,
    shadow: Vec<f64>,
}

impl ZBuffer {
    fn new(n: usize) -> Self {
        ZBuffer {
            z: vec![f64::NEG_INFINITY; n],
            cell: vec![usize::MAX; n],
            shadow: vec![0.0; n],
        }
    }

    #[inline]
    fn offer(&mut self, hit: Hit) {
        let i = hit.pixel;
        if hit.z > self.z[i] || (hit.z == self.z[i] && hit.cell < self.cell[i]) {
            self.z[i] = hit.z;
            self.cell[i] = hit.cell;
            self.shadow[i] = hit.shadow;
        }
    }

    fn into_product(self, image_width: usize, image_height: usize) -> Result<ShadowProduct> {
        let uncertainty = self.cell.iter().map(|&c| if c == usize::MAX { 1.0 } else { 0.0 }).collect();
        let image = |data| Raster::new(image_width, image_height, data, GeoTransform::IDENTITY, None, Crs::PixelOnly);
        Ok(ShadowProduct {
            shadow: image(self.shadow)?,
            uncertainty: image(uncertainty)?,
        })
    }
}

fn check_args(dsm: &Raster, s_dsm: &Raster, rpc: &RpcModel, image_height: usize, image_width: usize) -> Result<()> {
    if image_height == 0 || image_width == 0 {
        return Err(Error::Argument(format!(
            "image size must be positive, got {image_width}x{image_height}"
        )));
    }
    if image_width.checked_mul(image_height).is_none_or(|n| n > MAX_PIXELS) {
        return Err(Error::Argument(format!(
            "image size {image_width}x{image_height} exceeds {MAX_PIXELS} pixels"
        )));
    }
    dsm.same_shape(s_dsm)?;
    if dsm.crs == Crs::PixelOnly {
        return Err(Error::Argument(
            "DSM has no coordinate reference; declare Geographic or UTM".into(),
        ));
    }
    rpc.validate()
}

/// Project a DSM-space shadow mask into an image of the given size.
pub fn project_shadows(
    dsm: &Raster,
    s_dsm: &Raster,
    rpc: &RpcModel,
    image_height: usize,
    image_width: usize,
) -> Result<ShadowProduct> {
    project_shadows_with(dsm, s_dsm, rpc, image_height, image_width, Execution::default())
}

pub fn project_shadows_with(
    dsm: &Raster,
    s_dsm: &Raster,
    rpc: &RpcModel,
    image_height: usize,
    image_width: usize,
    exec: Execution,
) -> Result<ShadowProduct> {
    check_args(dsm, s_dsm, rpc, image_height, image_width)?;
    let width = dsm.width();
    // projection is the expensive part; the z-buffer merge is cheap and serial
    let rows = exec::map_range(exec, dsm.height(), |row| -> Result<Vec<Hit>> {
        let mut hits = Vec::new();
        for cell in row * width..(row + 1) * width {
            if let Some(hit) = project_cell(dsm, s_dsm, rpc, image_height, image_width, cell)? {
                hits.push(hit);
            }
        }
        Ok(hits)
    });
    let mut zbuf = ZBuffer::new(image_width * image_height);
    for hits in rows {
        for hit in hits? {
            zbuf.offer(hit);
        }
    }
    zbuf.into_product(image_width, image_height)
}

/// Sequential projection visiting DSM cells in the given row-major order.
/// Output is identical to [`project_shadows`] for any permutation.
pub fn project_shadows_in_order(
    dsm: &Raster,
    s_dsm: &Raster,
    rpc: &RpcModel,
    image_height: usize,
    image_width: usize,
    order: &[usize],
) -> Result<ShadowProduct> {
    check_args(dsm, s_dsm, rpc, image_height, image_width)?;
    let mut zbuf = ZBuffer::new(image_width * image_height);
    for &cell in order {
        if cell >= dsm.len() {
            return Err(Error::Argument(format!("cell index {cell} out of range")));
        }
        if let Some(hit) = project_cell(dsm, s_dsm, rpc, image_height, image_width, cell)? {
            zbuf.offer(hit);
        }
    }
    zbuf.into_product(image_width, image_height)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinalizeOptions {
    pub min_region_px: usize,
    /// Fill enclosed non-shadow holes smaller than this; 0 disables.
    pub fill_holes_px: usize,
}

impl Default for FinalizeOptions {
    fn default() -> Self {
        FinalizeOptions {
            min_region_px: DEFAULT_MIN_REGION_PX,
            fill_holes_px: 0,
        }
    }
}

/// Remove shadow components smaller than `min_region_px`.
pub fn finalize(product: &ShadowProduct, min_region_px: usize) -> ShadowProduct {
    ShadowProduct {
        shadow: remove_small_regions(&product.shadow, min_region_px),
        uncertainty: product.uncertainty.clone(),
    }
}

pub fn finalize_with(product: &ShadowProduct, opts: FinalizeOptions) -> Result<ShadowProduct> {
    let mut out = finalize(product, opts.min_region_px);
    if opts.fill_holes_px > 0 {
        out.shadow = fill_small_holes(&out.shadow, opts.fill_holes_px, Some(&out.uncertainty))?;
    }
    Ok(out)
}
