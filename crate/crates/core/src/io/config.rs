//! Per-tile run configuration (TOML).
//!
//! ```toml
//! [inputs]
//! dsm = "dsm.tif"
//! rpc = "image.rpb"
//! image_width = 2048
//! image_height = 2048
//! sun_azimuth = 135.0
//! sun_elevation = 42.5
//!
//! [processing]
//! crs = "utm:17N"
//!
//! [outputs]
//! shadow_dsm = "out/shadow_dsm.tif"
//! shadow_img = "out/shadow_img.tif"
//! uncertainty = "out/uncertainty.tif"
//! ```
//!
//! Relative paths are resolved against the directory holding the config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::DEFAULT_MIN_REGION_PX;
use crate::raster::{Crs, Hemisphere};
use crate::shadowcast::DEFAULT_UPSCALE;
use crate::solar::SunGeometry;

/// World frame of a DSM: `geographic`, `utm:<zone><N|S>`, or `pixel`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CrsSpec(pub Crs);

impl FromStr for CrsSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let crs = match lower.as_str() {
            "geographic" | "wgs84" | "epsg:4326" => Crs::Geographic,
            "pixel" => Crs::PixelOnly,
            other => {
                let rest = other
                    .strip_prefix("utm:")
                    .ok_or_else(|| Error::Argument(format!("unknown CRS {s:?}; expected geographic or utm:<zone><N|S>")))?;
                let (zone, hemi) = rest.split_at(rest.len().saturating_sub(1));
                let hemisphere = match hemi {
                    "n" => Hemisphere::North,
                    "s" => Hemisphere::South,
                    _ => return Err(Error::Argument(format!("UTM CRS {s:?} must end in N or S"))),
                };
                let zone: u8 = zone
                    .parse()
                    .ok()
                    .filter(|z| (1..=60).contains(z))
                    .ok_or_else(|| Error::Argument(format!("UTM zone in {s:?} must be 1..=60")))?;
                Crs::Utm { zone, hemisphere }
            }
        };
        Ok(CrsSpec(crs))
    }
}

impl fmt::Display for CrsSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Crs::Geographic => write!(f, "geographic"),
            Crs::PixelOnly => write!(f, "pixel"),
            Crs::Utm { zone, hemisphere } => {
                let h = if hemisphere == Hemisphere::North { 'N' } else { 'S' };
                write!(f, "utm:{zone}{h}")
            }
        }
    }
}

impl TryFrom<String> for CrsSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CrsSpec> for String {
    fn from(c: CrsSpec) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub dsm: PathBuf,
    pub rpc: PathBuf,
    pub image_width: usize,
    pub image_height: usize,
    pub sun_azimuth: f64,
    pub sun_elevation: f64,
    /// Second DSM (max-height aggregation) for the agreement masks.
    #[serde(default)]
    pub dsm_max: Option<PathBuf>,
    #[serde(default)]
    pub ndvi_nir: Option<PathBuf>,
    #[serde(default)]
    pub ndvi_red: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Processing {
    #[serde(default = "default_upscale")]
    pub upscale: usize,
    #[serde(default = "default_min_region")]
    pub min_region_px: usize,
    #[serde(default)]
    pub fill_holes_px: usize,
    pub crs: CrsSpec,
    #[serde(default)]
    pub ndvi_threshold: f64,
    #[serde(default)]
    pub vegetation_dilation_px: usize,
}

fn default_upscale() -> usize {
    DEFAULT_UPSCALE
}

fn default_min_region() -> usize {
    DEFAULT_MIN_REGION_PX
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub shadow_dsm: PathBuf,
    pub shadow_img: PathBuf,
    pub uncertainty: PathBuf,
    #[serde(default)]
    pub shadow_dsm_max: Option<PathBuf>,
    #[serde(default)]
    pub shadow_img_max: Option<PathBuf>,
    #[serde(default)]
    pub uncertainty_max: Option<PathBuf>,
    #[serde(default)]
    pub supervision: Option<PathBuf>,
    #[serde(default)]
    pub ignore: Option<PathBuf>,
    #[serde(default)]
    pub vegetation: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Inputs,
    pub processing: Processing,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Format {
            tag: "config".into(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and resolve relative paths against the config file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_toml(&text).map_err(|e| match e {
            Error::Format { tag, msg } => Error::Format {
                tag,
                msg: format!("{}: {msg}", path.display()),
            },
            other => other,
        })?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn sun(&self) -> Result<SunGeometry> {
        SunGeometry::new(self.inputs.sun_azimuth, self.inputs.sun_elevation)
    }

    pub fn validate(&self) -> Result<()> {
        let i = &self.inputs;
        if i.image_width == 0 || i.image_height == 0 {
            return Err(Error::Argument("image_width and image_height must be positive".into()));
        }
        self.sun().map_err(|e| Error::Argument(format!("invalid sun position: {e}")))?;
        if self.processing.upscale == 0 {
            return Err(Error::Argument("upscale must be at least 1".into()));
        }
        if i.ndvi_nir.is_some() != i.ndvi_red.is_some() {
            return Err(Error::Argument("ndvi_nir and ndvi_red must be given together".into()));
        }
        if !self.processing.ndvi_threshold.is_finite() {
            return Err(Error::Argument("ndvi_threshold must be finite".into()));
        }
        if self.processing.crs.0 == Crs::PixelOnly {
            return Err(Error::Argument("projection needs a geographic or UTM crs".into()));
        }
        let o = &self.outputs;
        if i.dsm_max.is_none()
            && (o.shadow_dsm_max.is_some() || o.shadow_img_max.is_some() || o.supervision.is_some() || o.ignore.is_some())
        {
            return Err(Error::Argument("max-DSM and agreement outputs require inputs.dsm_max".into()));
        }
        if o.vegetation.is_some() && i.ndvi_nir.is_none() {
            return Err(Error::Argument("outputs.vegetation requires ndvi_nir and ndvi_red".into()));
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let i = &mut self.inputs;
        fix(&mut i.dsm);
        fix(&mut i.rpc);
        for p in [&mut i.dsm_max, &mut i.ndvi_nir, &mut i.ndvi_red].into_iter().flatten() {
            fix(p);
        }
        let o = &mut self.outputs;
        fix(&mut o.shadow_dsm);
        fix(&mut o.shadow_img);
        fix(&mut o.uncertainty);
        for p in [
            &mut o.shadow_dsm_max,
            &mut o.shadow_img_max,
            &mut o.uncertainty_max,
            &mut o.supervision,
            &mut o.ignore,
            &mut o.vegetation,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}
