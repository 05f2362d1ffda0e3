//! Geometric shadow masks for satellite imagery.
//!
//! The pipeline casts shadows over a digital surface model (DSM) from the sun
//! position, projects the DSM-space mask into image space through an RPC
//! camera with a z-buffer, and derives the auxiliary label products
//! (uncertainty, vegetation, min/max agreement) used for supervision.
//!
//! ```text
//! DSM ──upsample──▶ cast_shadows ──▶ S_dsm ──project_shadows(RPC)──▶ S_img, U
//!                                                     │
//!                        remove_small_regions ◀───────┘
//! ```
//!
//! Data-parallel loops (per ray path, per DSM cell) run on rayon when the
//! `parallel` feature is enabled (the default). Every parallel entry point
//! has an `Execution` argument so both routes can be compared directly.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod io;
pub mod masks;
pub mod projection;
pub mod raster;
pub mod rpc;
pub mod shadowcast;
pub mod solar;
pub mod utm;

pub use error::{Error, Result};
pub use exec::Execution;
pub use masks::{agreement_masks, ndvi, remove_small_regions, shadow_loss, vegetation_mask, SupervisionBundle};
pub use projection::{finalize, project_shadows, ShadowProduct};
pub use raster::{BBox, Crs, GeoTransform, Hemisphere, Point3, Raster};
pub use rpc::RpcModel;
pub use shadowcast::{cast_shadows, cast_shadows_oracle, compute_paths, RayPath, ShadowCast};
pub use solar::SunGeometry;
