//! Rational polynomial (RPC00B) camera model.
//!
//! Ground `(lon, lat, height)` is normalized as
//! `L = (lon - lon_off) / lon_scale`, `P = (lat - lat_off) / lat_scale`,
//! `H = (height - height_off) / height_scale`, then
//!
//! ```text
//! line   = line_off + line_scale * line_num(L, P, H) / line_den(L, P, H)
//! sample = samp_off + samp_scale * samp_num(L, P, H) / samp_den(L, P, H)
//! ```
//!
//! Each polynomial has 20 cubic terms in RPC00B order:
//! `1, L, P, H, LP, LH, PH, L², P², H², PLH, L³, LP², LH², L²P, P³, PH², L²H, P²H, H³`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NUM_TERMS: usize = 20;

/// Denominators smaller than this in magnitude are treated as singular.
pub const SINGULAR_DENOMINATOR: f64 = 1e-10;

const LOCALIZE_TOLERANCE_PX: f64 = 1e-9;
const LOCALIZE_MAX_ITERATIONS: usize = 50;
const JACOBIAN_STEP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcModel {
    pub line_off: f64,
    pub samp_off: f64,
    pub lat_off: f64,
    pub lon_off: f64,
    pub height_off: f64,
    pub line_scale: f64,
    pub samp_scale: f64,
    pub lat_scale: f64,
    pub lon_scale: f64,
    pub height_scale: f64,
    pub line_num: [f64; NUM_TERMS],
    pub line_den: [f64; NUM_TERMS],
    pub samp_num: [f64; NUM_TERMS],
    pub samp_den: [f64; NUM_TERMS],
}

/// Result of [`RpcModel::localize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub lon: f64,
    pub lat: f64,
    pub iterations: usize,
    pub residual_px: f64,
}

/// The 20 RPC00B basis terms at a normalized point.
#[inline]
fn basis(l: f64, p: f64, h: f64) -> [f64; NUM_TERMS] {
    let (ll, pp, hh) = (l * l, p * p, h * h);
    [
        1.0,
        l,
        p,
        h,
        l * p,
        l * h,
        p * h,
        ll,
        pp,
        hh,
        p * l * h,
        ll * l,
        l * pp,
        l * hh,
        ll * p,
        pp * p,
        p * hh,
        ll * h,
        pp * h,
        hh * h,
    ]
}

#[inline]
fn dot(coeffs: &[f64; NUM_TERMS], terms: &[f64; NUM_TERMS]) -> f64 {
    coeffs.iter().zip(terms).map(|(c, t)| c * t).sum()
}

impl RpcModel {
    /// Model whose sample is the normalized longitude and line the normalized
    /// latitude, with unit scales and zero offsets.
    pub fn identity_like() -> Self {
        let mut samp_num = [0.0; NUM_TERMS];
        let mut line_num = [0.0; NUM_TERMS];
        let mut den = [0.0; NUM_TERMS];
        samp_num[1] = 1.0;
        line_num[2] = 1.0;
        den[0] = 1.0;
        RpcModel {
            line_off: 0.0,
            samp_off: 0.0,
            lat_off: 0.0,
            lon_off: 0.0,
            height_off: 0.0,
            line_scale: 1.0,
            samp_scale: 1.0,
            lat_scale: 1.0,
            lon_scale: 1.0,
            height_scale: 1.0,
            line_num,
            line_den: den,
            samp_num,
            samp_den: den,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scales = [
            ("LINE_SCALE", self.line_scale),
            ("SAMP_SCALE", self.samp_scale),
            ("LAT_SCALE", self.lat_scale),
            ("LONG_SCALE", self.lon_scale),
            ("HEIGHT_SCALE", self.height_scale),
        ];
        for (name, v) in scales {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, den) in [("LINE_DEN_COEFF_1", &self.line_den), ("SAMP_DEN_COEFF_1", &self.samp_den)] {
            if den[0] == 0.0 {
                return Err(Error::Argument(format!("{name} must be non-zero")));
            }
        }
        let all_finite = [&self.line_num, &self.line_den, &self.samp_num, &self.samp_den]
            .iter()
            .all(|c| c.iter().all(|v| v.is_finite()))
            && [self.line_off, self.samp_off, self.lat_off, self.lon_off, self.height_off]
                .iter()
                .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Argument("RPC coefficients and offsets must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn normalize(&self, lon: f64, lat: f64, height: f64) -> (f64, f64, f64) {
        (
            (lon - self.lon_off) / self.lon_scale,
            (lat - self.lat_off) / self.lat_scale,
            (height - self.height_off) / self.height_scale,
        )
    }

    /// Project normalized ground coordinates to `(sample, line)` pixels.
    #[inline]
    fn project_normalized(&self, l: f64, p: f64, h: f64) -> Result<(f64, f64)> {
        let terms = basis(l, p, h);
        let line_den = dot(&self.line_den, &terms);
        let samp_den = dot(&self.samp_den, &terms);
        for den in [line_den, samp_den] {
            if !(den.abs() >= SINGULAR_DENOMINATOR) {
                return Err(Error::SingularCamera { value: den, l, p, h });
            }
        }
        let line = self.line_off + self.line_scale * dot(&self.line_num, &terms) / line_den;
        let sample = self.samp_off + self.samp_scale * dot(&self.samp_num, &terms) / samp_den;
        Ok((sample, line))
    }

    /// Ground to image: returns `(sample, line)` in pixels.
    pub fn eval_rational(&self, lon: f64, lat: f64, height: f64) -> Result<(f64, f64)> {
        let (l, p, h) = self.normalize(lon, lat, height);
        if l.abs() > 1.5 || p.abs() > 1.5 || h.abs() > 1.5 {
            log::debug!("RPC evaluated outside its normalized validity box at ({l:.3}, {p:.3}, {h:.3})");
        }
        self.project_normalized(l, p, h)
    }

    /// Image to ground at a known height, by Newton iteration on normalized
    /// `(lon, lat)` with a central-difference Jacobian.
    pub fn localize(&self, sample: f64, line: f64, height: f64) -> Result<Localization> {
        let h = (height - self.height_off) / self.height_scale;
        let residual = |l: f64, p: f64| -> Result<(f64, f64)> {
            let (s, ln) = self.project_normalized(l, p, h)?;
            Ok((s - sample, ln - line))
        };

        let (mut l, mut p) = (0.0, 0.0);
        let mut iterations = 0;
        loop {
            let (rs, rl) = residual(l, p)?;
            let norm = rs.hypot(rl);
            if norm < LOCALIZE_TOLERANCE_PX {
                return Ok(Localization {
                    lon: self.lon_off + l * self.lon_scale,
                    lat: self.lat_off + p * self.lat_scale,
                    iterations,
                    residual_px: norm,
                });
            }
            if iterations == LOCALIZE_MAX_ITERATIONS || !norm.is_finite() {
                return Err(Error::Localization {
                    iterations,
                    residual_px: norm,
                });
            }

            let e = JACOBIAN_STEP;
            let (s_lp, l_lp) = residual(l + e, p)?;
            let (s_lm, l_lm) = residual(l - e, p)?;
            let (s_pp, l_pp) = residual(l, p + e)?;
            let (s_pm, l_pm) = residual(l, p - e)?;
            let (ds_dl, dl_dl) = ((s_lp - s_lm) / (2.0 * e), (l_lp - l_lm) / (2.0 * e));
            let (ds_dp, dl_dp) = ((s_pp - s_pm) / (2.0 * e), (l_pp - l_pm) / (2.0 * e));

            let det = ds_dl * dl_dp - ds_dp * dl_dl;
            let scale = (ds_dl.abs() + ds_dp.abs()) * (dl_dl.abs() + dl_dp.abs());
            if !(det.abs() > 1e-14 * scale) || !det.is_finite() {
                return Err(Error::SingularJacobian);
            }
            l -= (dl_dp * rs - ds_dp * rl) / det;
            p -= (-dl_dl * rs + ds_dl * rl) / det;
            iterations += 1;
        }
    }
}
