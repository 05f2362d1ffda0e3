#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geoshadow::rpc::NUM_TERMS;
use geoshadow::{Crs, GeoTransform, Raster, RpcModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const BLESS_ENV: &str = "GEOSHADOW_BLESS";

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/city_block")
}

pub fn golden_dir() -> PathBuf {
    fixture_dir().join("golden")
}

/// Output files of the city-block run, relative to its `out/` directory.
pub const CITY_BLOCK_OUTPUTS: [&str; 8] = [
    "shadow_dsm.tif",
    "shadow_img.tif",
    "uncertainty.tif",
    "shadow_img_max.tif",
    "uncertainty_max.tif",
    "supervision.tif",
    "ignore.tif",
    "vegetation.tif",
];

/// Copy the city-block inputs (not goldens or stray outputs) into `dest`.
pub fn copy_city_block(dest: &Path) {
    std::fs::create_dir_all(dest).unwrap();
    for name in ["dsm.tif", "dsm_max.tif", "image.rpb", "nir.tif", "red.tif", "run.toml", "manifest.txt"] {
        std::fs::copy(fixture_dir().join(name), dest.join(name)).unwrap();
    }
}

pub fn geoshadow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geoshadow"))
        .args(args)
        .env_remove("GEOSHADOW_JOBS")
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally, not by signal")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Off-nadir-ish RPC00B model with dominant linear terms.
pub fn random_rpc(rng: &mut ChaCha8Rng, cross: f64) -> RpcModel {
    let mut m = RpcModel::identity_like();
    m.lon_off = rng.gen_range(-120.0..-70.0);
    m.lat_off = rng.gen_range(25.0..45.0);
    m.height_off = rng.gen_range(0.0..300.0);
    m.lon_scale = rng.gen_range(0.02..0.08);
    m.lat_scale = rng.gen_range(0.02..0.08);
    m.height_scale = rng.gen_range(200.0..600.0);
    m.samp_off = rng.gen_range(5000.0..20000.0);
    m.line_off = rng.gen_range(5000.0..20000.0);
    m.samp_scale = rng.gen_range(5000.0..20000.0);
    m.line_scale = rng.gen_range(5000.0..20000.0);
    for k in 1..NUM_TERMS {
        m.samp_num[k] = rng.gen_range(-cross..cross);
        m.line_num[k] = rng.gen_range(-cross..cross);
        m.samp_den[k] = rng.gen_range(-cross..cross) * 0.2;
        m.line_den[k] = rng.gen_range(-cross..cross) * 0.2;
    }
    m.samp_num[1] = 1.0 + rng.gen_range(-cross..cross);
    m.line_num[2] = -1.0 + rng.gen_range(-cross..cross);
    m.samp_num[3] = rng.gen_range(-0.1..0.1);
    m
}

/// Terrain with random boxes and, sometimes, nodata specks.
pub fn random_dsm(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Raster {
    let (gx, gy) = (rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
    let mut z: Vec<f64> = (0..w * h)
        .map(|i| {
            let (c, r) = ((i % w) as f64, (i / w) as f64);
            50.0 + gx * c + gy * r + rng.gen_range(0.0..0.5)
        })
        .collect();
    for _ in 0..rng.gen_range(0..8) {
        let (bw, bh) = (rng.gen_range(1..w / 3), rng.gen_range(1..h / 3));
        let (c0, r0) = (rng.gen_range(0..w - bw), rng.gen_range(0..h - bh));
        let top = rng.gen_range(2.0..30.0);
        for r in r0..r0 + bh {
            for c in c0..c0 + bw {
                z[r * w + c] += top;
            }
        }
    }
    let nodata = rng.gen_bool(0.2);
    if nodata {
        for _ in 0..(w * h / 100).max(1) {
            let i = rng.gen_range(0..w * h);
            z[i] = -9999.0;
        }
    }
    let ps = rng.gen_range(0.3..2.0);
    let gt = GeoTransform::new(0.0, 0.0, ps, -ps);
    Raster::new(w, h, z, gt, nodata.then_some(-9999.0), Crs::PixelOnly).unwrap()
}
