//! WGS84 UTM <-> geographic conversion.
//!
//! Krüger's series to sixth order in the third flattening `n`. The inverse
//! recovers geodetic latitude from conformal latitude by Newton iteration,
//! which is exact to machine precision.

use crate::error::{Error, Result};
use crate::raster::Hemisphere;

const A: f64 = 6_378_137.0;
const F: f64 = 1.0 / 298.257_223_563;
const K0: f64 = 0.9996;
const FALSE_EASTING: f64 = 500_000.0;
const FALSE_NORTHING_SOUTH: f64 = 10_000_000.0;

struct Series {
    e: f64,
    e2: f64,
    /// Rectifying radius.
    big_a: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

fn series() -> Series {
    let n = F / (2.0 - F);
    let n2 = n * n;
    let n3 = n2 * n;
    let n4 = n3 * n;
    let n5 = n4 * n;
    let n6 = n5 * n;
    let e2 = F * (2.0 - F);
    Series {
        e: e2.sqrt(),
        e2,
        big_a: A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0),
        alpha: [
            n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 - 127.0 / 288.0 * n5
                + 7891.0 / 37800.0 * n6,
            13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 + 281.0 / 630.0 * n5
                - 1983433.0 / 1935360.0 * n6,
            61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5 + 167603.0 / 181440.0 * n6,
            49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 + 6601661.0 / 7257600.0 * n6,
            34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6,
            212378941.0 / 319334400.0 * n6,
        ],
        beta: [
            n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4 - 81.0 / 512.0 * n5
                + 96199.0 / 604800.0 * n6,
            n2 / 48.0 + n3 / 15.0 - 437.0 / 1440.0 * n4 + 46.0 / 105.0 * n5 - 1118711.0 / 3870720.0 * n6,
            17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5 + 5569.0 / 90720.0 * n6,
            4397.0 / 161280.0 * n4 - 11.0 / 504.0 * n5 - 830251.0 / 7257600.0 * n6,
            4583.0 / 161280.0 * n5 - 108847.0 / 3991680.0 * n6,
            20648693.0 / 638668800.0 * n6,
        ],
    }
}

/// Central meridian of a UTM zone, degrees.
pub fn central_meridian(zone: u8) -> f64 {
    -183.0 + 6.0 * f64::from(zone)
}

fn check_zone(zone: u8) -> Result<()> {
    if !(1..=60).contains(&zone) {
        return Err(Error::Domain(format!("UTM zone {zone} outside 1..=60")));
    }
    Ok(())
}

/// Conformal `tan χ` from geodetic `tan φ`.
fn conformal_tan(tau: f64, e: f64) -> f64 {
    let sigma = (e * (e * tau / tau.hypot(1.0)).atanh()).sinh();
    tau * sigma.hypot(1.0) - sigma * tau.hypot(1.0)
}

/// UTM easting/northing (meters) to `(lon, lat)` in degrees.
pub fn utm_to_geographic(easting: f64, northing: f64, zone: u8, hemisphere: Hemisphere) -> Result<(f64, f64)> {
    check_zone(zone)?;
    if !(100_000.0..=900_000.0).contains(&easting) {
        return Err(Error::Domain(format!("easting {easting} outside [100000, 900000]")));
    }
    if !(0.0..=10_000_000.0).contains(&northing) {
        return Err(Error::Domain(format!("northing {northing} outside [0, 10000000]")));
    }
    let s = series();
    let y = match hemisphere {
        Hemisphere::North => northing,
        Hemisphere::South => northing - FALSE_NORTHING_SOUTH,
    };
    let xi = y / (K0 * s.big_a);
    let eta = (easting - FALSE_EASTING) / (K0 * s.big_a);

    let mut xi_p = xi;
    let mut eta_p = eta;
    for (j, b) in s.beta.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi_p -= b * (k * xi).sin() * (k * eta).cosh();
        eta_p -= b * (k * xi).cos() * (k * eta).sinh();
    }

    let tau_p = xi_p.sin() / eta_p.sinh().hypot(xi_p.cos());
    let lam = eta_p.sinh().atan2(xi_p.cos());

    let one_e2 = 1.0 - s.e2;
    let mut tau = tau_p / one_e2;
    for _ in 0..10 {
        let tp = conformal_tan(tau, s.e);
        let dtau = (tau_p - tp) * (1.0 + one_e2 * tau * tau) / (one_e2 * tp.hypot(1.0) * tau.hypot(1.0));
        tau += dtau;
        if dtau.abs() <= 1e-15 * tau.abs().max(1.0) {
            break;
        }
    }
    let lat = tau.atan().to_degrees();
    let lon = central_meridian(zone) + lam.to_degrees();
    Ok((lon, lat))
}

/// `(lon, lat)` degrees to UTM `(easting, northing)` meters in the given zone.
pub fn geographic_to_utm(lon: f64, lat: f64, zone: u8, hemisphere: Hemisphere) -> Result<(f64, f64)> {
    check_zone(zone)?;
    if !(-80.0..=84.0).contains(&lat) {
        return Err(Error::Domain(format!("latitude {lat} outside the UTM band")));
    }
    let dlon = lon - central_meridian(zone);
    if !(dlon.abs() <= 60.0) {
        return Err(Error::Domain(format!("longitude {lon} too far from zone {zone}")));
    }
    let s = series();
    let phi = lat.to_radians();
    let lam = dlon.to_radians();
    let tau_p = conformal_tan(phi.tan(), s.e);
    let xi_p = tau_p.atan2(lam.cos());
    let eta_p = (lam.sin() / tau_p.hypot(lam.cos())).asinh();

    let mut xi = xi_p;
    let mut eta = eta_p;
    for (j, a) in s.alpha.iter().enumerate() {
        let k = 2.0 * (j + 1) as f64;
        xi += a * (k * xi_p).sin() * (k * eta_p).cosh();
        eta += a * (k * xi_p).cos() * (k * eta_p).sinh();
    }
    let easting = FALSE_EASTING + K0 * s.big_a * eta;
    let northing = K0 * s.big_a * xi
        + match hemisphere {
            Hemisphere::North => 0.0,
            Hemisphere::South => FALSE_NORTHING_SOUTH,
        };
    Ok((easting, northing))
}
