//! Sun position to shadow-march geometry.
//!
//! Array axes: x = column (east), y = row (south). Azimuth is measured
//! clockwise from grid north. `(p, q)` is the horizontal direction in which
//! shadows extend, i.e. pointing away from the sun.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SunGeometry {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Column-axis march component, `-sin(az)·cos(el)`.
    pub p: f64,
    /// Row-axis march component, `cos(az)·cos(el)`.
    pub q: f64,
    /// Ray slope `tan(el)`; `+inf` at zenith.
    pub slope: f64,
}

impl SunGeometry {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        sun_direction(azimuth_deg, elevation_deg)
    }

    /// Sun straight overhead: nothing casts a shadow.
    pub fn is_zenith(&self) -> bool {
        self.p == 0.0 && self.q == 0.0
    }
}

/// Derive the march vector and ray slope from sun angles in degrees.
pub fn sun_direction(azimuth_deg: f64, elevation_deg: f64) -> Result<SunGeometry> {
    if !elevation_deg.is_finite() || elevation_deg <= 0.0 {
        return Err(Error::Domain(format!(
            "sun elevation {elevation_deg}° is at or below the horizon"
        )));
    }
    if elevation_deg > 90.0 {
        return Err(Error::Domain(format!("sun elevation {elevation_deg}° exceeds 90°")));
    }
    if !azimuth_deg.is_finite() {
        return Err(Error::Domain(format!("sun azimuth {azimuth_deg} is not finite")));
    }
    if elevation_deg == 90.0 {
        return Ok(SunGeometry {
            azimuth_deg,
            elevation_deg,
            p: 0.0,
            q: 0.0,
            slope: f64::INFINITY,
        });
    }
    let (sin_az, cos_az) = sin_cos_deg(azimuth_deg);
    let (sin_el, cos_el) = sin_cos_deg(elevation_deg);
    Ok(SunGeometry {
        azimuth_deg,
        elevation_deg,
        p: -sin_az * cos_el,
        q: cos_az * cos_el,
        slope: sin_el / cos_el,
    })
}

/// `(sin, cos)` of an angle in degrees, exact at multiples of 45°.
///
/// The argument is reduced in degrees before conversion to radians, so
/// cardinal directions give exact zeros and `tan(45°)` is exactly 1.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let d = deg.rem_euclid(360.0);
    let quadrant = (d / 90.0).round();
    let r = d - quadrant * 90.0; // in [-45, 45]
    let (s, c) = if r == 45.0 {
        (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
    } else if r == -45.0 {
        (-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2)
    } else {
        r.to_radians().sin_cos()
    };
    match quadrant as i64 % 4 {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}
