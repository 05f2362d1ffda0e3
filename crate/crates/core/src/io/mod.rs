//! File formats: single-band GeoTIFF rasters, RPC coefficient files and
//! per-tile run configuration.

mod config;
mod geotiff;
mod rpc_text;

pub use config::{CrsSpec, Inputs, Outputs, Processing, RunConfig};
pub use geotiff::{decode_geotiff, read_geotiff, write_geotiff, Compression, GeoTiffWriter, BitDepth};
pub use rpc_text::{format_rpc_json, format_rpc_text, parse_rpc_json, parse_rpc_text, read_rpc, write_rpc, RpcFormat};
