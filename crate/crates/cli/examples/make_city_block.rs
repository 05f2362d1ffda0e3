//! Generates the synthetic "city block" tile used by the end-to-end tests.
//!
//! ```text
//! cargo run -p geoshadow-cli --example make_city_block [-- <out dir>]
//! ```
//!
//! The default output directory is `crates/cli/tests/fixtures/city_block`.
//! Everything is analytic, so reruns reproduce the committed files exactly.

use std::path::PathBuf;

use geoshadow::io::{write_geotiff, write_rpc, BitDepth};
use geoshadow::utm::utm_to_geographic;
use geoshadow::{Crs, GeoTransform, Hemisphere, Raster, RpcModel};

const SIZE: usize = 64;
const GROUND: f64 = 12.0;
const NODATA: f64 = -9999.0;
// UTM 17N, pixel-center origin of the DSM's top-left cell
const ORIGIN_E: f64 = 435_200.5;
const ORIGIN_N: f64 = 3_352_463.5;
const IMAGE: usize = 150;

fn dsm_min() -> Vec<f64> {
    let mut z = vec![0.0; SIZE * SIZE];
    for row in 0..SIZE {
        for col in 0..SIZE {
            // gentle slope towards the south-east
            z[row * SIZE + col] = GROUND + 0.02 * (col + row) as f64;
        }
    }
    let mut raise = |cols: std::ops::Range<usize>, rows: std::ops::Range<usize>, h: f64| {
        for row in rows {
            for col in cols.clone() {
                z[row * SIZE + col] = GROUND + h;
            }
        }
    };
    raise(8..22, 8..20, 15.0);
    // L-shaped block
    raise(34..54, 10..18, 22.0);
    raise(34..42, 18..34, 22.0);
    // low block with a rooftop unit
    raise(12..26, 36..52, 9.0);
    raise(16..19, 40..43, 12.0);
    raise(44..50, 42..48, 35.0);
    // lamp post: casts a sliver that cleanup removes
    raise(30..31, 30..31, 6.0);
    for row in 2..4 {
        for col in 60..62 {
            z[row * SIZE + col] = NODATA;
        }
    }
    z
}

/// 3x3 max filter: the max-aggregated DSM grows every structure by a cell.
fn dsm_max(min: &[f64]) -> Vec<f64> {
    let mut out = min.to_vec();
    for row in 0..SIZE {
        for col in 0..SIZE {
            if min[row * SIZE + col] == NODATA {
                continue;
            }
            let mut best = f64::NEG_INFINITY;
            for r in row.saturating_sub(1)..(row + 2).min(SIZE) {
                for c in col.saturating_sub(1)..(col + 2).min(SIZE) {
                    let v = min[r * SIZE + c];
                    if v != NODATA {
                        best = best.max(v);
                    }
                }
            }
            out[row * SIZE + col] = best;
        }
    }
    out
}

/// A mildly off-nadir camera looking at the block center.
fn camera() -> RpcModel {
    let center = (SIZE as f64 - 1.0) / 2.0;
    let (lon, lat) = utm_to_geographic(ORIGIN_E + center, ORIGIN_N - center, 17, Hemisphere::North)
        .expect("fixture lies inside zone 17");
    let mut m = RpcModel::identity_like();
    m.lon_off = lon;
    m.lat_off = lat;
    m.lon_scale = 5e-4;
    m.lat_scale = 5e-4;
    m.height_off = 20.0;
    m.height_scale = 40.0;
    m.samp_off = IMAGE as f64 / 2.0;
    m.line_off = IMAGE as f64 / 2.0;
    // 0.5 m ground sampling distance
    m.samp_scale = 96.0;
    m.line_scale = 111.0;
    m.samp_num[1] = 1.0;
    m.samp_num[3] = 0.12;
    m.samp_num[4] = 0.004;
    m.line_num[2] = -1.0;
    m.line_num[3] = 0.05;
    m.line_num[7] = 0.003;
    m.samp_den[1] = 0.002;
    m.samp_den[2] = -0.001;
    m.line_den[1] = -0.001;
    m.line_den[2] = 0.002;
    m
}

/// NIR / red bands on the image grid with two tree crowns.
fn bands() -> (Vec<f64>, Vec<f64>) {
    let trees = [(30.0, 110.0, 8.0), (110.0, 30.0, 6.0)];
    let mut nir = Vec::with_capacity(IMAGE * IMAGE);
    let mut red = Vec::with_capacity(IMAGE * IMAGE);
    for row in 0..IMAGE {
        for col in 0..IMAGE {
            let (x, y) = (col as f64, row as f64);
            let tree = trees.iter().any(|&(cx, cy, r)| (x - cx).hypot(y - cy) <= r);
            if tree {
                nir.push(0.5);
                red.push(0.125);
            } else {
                nir.push(0.25);
                red.push(0.3125);
            }
        }
    }
    (nir, red)
}

const RUN_TOML: &str = r#"[inputs]
dsm = "dsm.tif"
dsm_max = "dsm_max.tif"
rpc = "image.rpb"
image_width = 150
image_height = 150
sun_azimuth = 135.0
sun_elevation = 40.0
ndvi_nir = "nir.tif"
ndvi_red = "red.tif"

[processing]
crs = "utm:17N"
upscale = 4
min_region_px = 50

[outputs]
shadow_dsm = "out/shadow_dsm.tif"
shadow_img = "out/shadow_img.tif"
uncertainty = "out/uncertainty.tif"
shadow_img_max = "out/shadow_img_max.tif"
uncertainty_max = "out/uncertainty_max.tif"
supervision = "out/supervision.tif"
ignore = "out/ignore.tif"
vegetation = "out/vegetation.tif"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/city_block")
    });
    std::fs::create_dir_all(&dir)?;
    let utm = Crs::Utm {
        zone: 17,
        hemisphere: Hemisphere::North,
    };
    let gt = GeoTransform::new(ORIGIN_E, ORIGIN_N, 1.0, -1.0);
    let min = dsm_min();
    let max = dsm_max(&min);
    let dsm = |z: Vec<f64>| Raster::new(SIZE, SIZE, z, gt, Some(NODATA), utm);
    write_geotiff(&dsm(max)?, dir.join("dsm_max.tif"), BitDepth::F32)?;
    write_geotiff(&dsm(min)?, dir.join("dsm.tif"), BitDepth::F32)?;
    write_rpc(&camera(), dir.join("image.rpb"))?;
    let (nir, red) = bands();
    write_geotiff(&Raster::from_vec(IMAGE, IMAGE, nir)?, dir.join("nir.tif"), BitDepth::F32)?;
    write_geotiff(&Raster::from_vec(IMAGE, IMAGE, red)?, dir.join("red.tif"), BitDepth::F32)?;
    std::fs::write(dir.join("run.toml"), RUN_TOML)?;
    std::fs::write(dir.join("manifest.txt"), "city_block run.toml\n")?;
    println!("wrote city block fixture to {}", dir.display());
    Ok(())
}
