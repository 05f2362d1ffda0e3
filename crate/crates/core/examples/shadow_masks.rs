//! cast → project → clean up, on files produced by
//! `cargo run -p geoshadow-cli --example make_city_block`.
//!
//! cargo run -p geoshadow --example shadow_masks -- crates/cli/tests/fixtures/city_block

use std::path::PathBuf;

use geoshadow::io::{read_geotiff, read_rpc, write_geotiff, BitDepth};
use geoshadow::{cast_shadows, finalize, project_shadows, Crs, Hemisphere, SunGeometry};

fn main() -> geoshadow::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/tests/fixtures/city_block".into()));

    let mut dsm = read_geotiff(dir.join("dsm.tif"))?;
    // GeoTIFF GeoKeys are not interpreted; say what the coordinates are
    dsm.crs = Crs::Utm {
        zone: 17,
        hemisphere: Hemisphere::North,
    };
    let rpc = read_rpc(dir.join("image.rpb"))?;
    let sun = SunGeometry::new(135.0, 40.0)?;

    let cast = cast_shadows(&dsm, &sun, 4)?;
    let raw = project_shadows(&cast.dsm, &cast.shadow, &rpc, 150, 150)?;
    let clean = finalize(&raw, 50);

    let ones = |r: &geoshadow::Raster| r.data().iter().filter(|&&v| v == 1.0).count();
    println!(
        "shadow_dsm {}  shadow_img {}  uncertain {}",
        ones(&cast.shadow),
        ones(&clean.shadow),
        ones(&clean.uncertainty)
    );
    let out = std::env::temp_dir().join("shadow_img.tif");
    write_geotiff(&clean.shadow, &out, BitDepth::U8)?;
    println!("wrote {}", out.display());
    Ok(())
}
