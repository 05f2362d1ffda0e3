//! One tile through cast → project → finalize → agreement → vegetation.

use std::path::Path;

use geoshadow::io::{read_geotiff, read_rpc, write_geotiff, BitDepth, RunConfig};
use geoshadow::masks::{dilate, ndvi, vegetation_mask};
use geoshadow::projection::{finalize_with, FinalizeOptions};
use geoshadow::{agreement_masks, cast_shadows, project_shadows, Error, Raster, Result, RpcModel, ShadowProduct};
use serde::Serialize;

/// Pixel counts of the products written for a tile.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TileReport {
    pub shadow_dsm_px: usize,
    pub shadow_img_px: usize,
    pub uncertain_px: usize,
    pub supervision_px: Option<usize>,
    pub ignore_px: Option<usize>,
    pub vegetation_px: Option<usize>,
}

fn count(mask: &Raster) -> usize {
    mask.data().iter().filter(|&&v| v != 0.0).count()
}

pub fn write_mask(mask: &Raster, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    write_geotiff(mask, path, BitDepth::U8)
}

fn load_dsm(path: &Path, cfg: &RunConfig) -> Result<Raster> {
    let mut dsm = read_geotiff(path)?;
    dsm.crs = cfg.processing.crs.0;
    Ok(dsm)
}

struct Branch {
    shadow_dsm: Raster,
    product: ShadowProduct,
}

fn shadows_for(dsm: &Raster, rpc: &RpcModel, cfg: &RunConfig) -> Result<Branch> {
    let cast = cast_shadows(dsm, &cfg.sun()?, cfg.processing.upscale)?;
    let raw = project_shadows(
        &cast.dsm,
        &cast.shadow,
        rpc,
        cfg.inputs.image_height,
        cfg.inputs.image_width,
    )?;
    let product = finalize_with(
        &raw,
        FinalizeOptions {
            min_region_px: cfg.processing.min_region_px,
            fill_holes_px: cfg.processing.fill_holes_px,
        },
    )?;
    Ok(Branch {
        shadow_dsm: cast.shadow,
        product,
    })
}

/// Run one tile and write every configured output.
pub fn run_tile(cfg: &RunConfig) -> Result<TileReport> {
    let rpc = read_rpc(&cfg.inputs.rpc)?;
    let dsm = load_dsm(&cfg.inputs.dsm, cfg)?;
    // load every input before writing anything
    let dsm_max = cfg.inputs.dsm_max.as_deref().map(|p| load_dsm(p, cfg)).transpose()?;
    let bands = match (&cfg.inputs.ndvi_nir, &cfg.inputs.ndvi_red) {
        (Some(nir), Some(red)) => Some((read_geotiff(nir)?, read_geotiff(red)?)),
        _ => None,
    };

    let min = shadows_for(&dsm, &rpc, cfg)?;
    let out = &cfg.outputs;
    write_mask(&min.shadow_dsm, &out.shadow_dsm)?;
    write_mask(&min.product.shadow, &out.shadow_img)?;
    write_mask(&min.product.uncertainty, &out.uncertainty)?;
    let mut report = TileReport {
        shadow_dsm_px: count(&min.shadow_dsm),
        shadow_img_px: count(&min.product.shadow),
        uncertain_px: count(&min.product.uncertainty),
        ..TileReport::default()
    };

    if let Some(dsm_max) = dsm_max {
        let max = shadows_for(&dsm_max, &rpc, cfg)?;
        for (mask, path) in [
            (&max.shadow_dsm, &out.shadow_dsm_max),
            (&max.product.shadow, &out.shadow_img_max),
            (&max.product.uncertainty, &out.uncertainty_max),
        ] {
            if let Some(path) = path {
                write_mask(mask, path)?;
            }
        }
        let bundle = agreement_masks(
            &min.product.shadow,
            &max.product.shadow,
            &min.product.uncertainty,
            &max.product.uncertainty,
        )?;
        if let Some(path) = &out.supervision {
            write_mask(&bundle.supervision, path)?;
        }
        if let Some(path) = &out.ignore {
            write_mask(&bundle.ignore, path)?;
        }
        report.supervision_px = Some(count(&bundle.supervision));
        report.ignore_px = Some(count(&bundle.ignore));
    }

    if let Some((nir, red)) = bands {
        let veg = vegetation_mask(&ndvi(&nir, &red)?, cfg.processing.ndvi_threshold);
        let veg = dilate(&veg, cfg.processing.vegetation_dilation_px);
        if let Some(path) = &out.vegetation {
            write_mask(&veg, path)?;
        }
        report.vegetation_px = Some(count(&veg));
    }
    Ok(report)
}
