//! RPC00B coefficients as `KEY: value` text (.RPB / _RPC.TXT style) or JSON.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rpc::{RpcModel, NUM_TERMS};

const SCALARS: [&str; 10] = [
    "LINE_OFF",
    "SAMP_OFF",
    "LAT_OFF",
    "LONG_OFF",
    "HEIGHT_OFF",
    "LINE_SCALE",
    "SAMP_SCALE",
    "LAT_SCALE",
    "LONG_SCALE",
    "HEIGHT_SCALE",
];
const POLYS: [&str; 4] = ["LINE_NUM_COEFF", "LINE_DEN_COEFF", "SAMP_NUM_COEFF", "SAMP_DEN_COEFF"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpcFormat {
    Text,
    Json,
}

impl RpcFormat {
    /// `.json` files are JSON; anything else is key/value text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => RpcFormat::Json,
            _ => RpcFormat::Text,
        }
    }
}

fn all_keys() -> Vec<String> {
    let mut keys: Vec<String> = SCALARS.iter().map(|s| s.to_string()).collect();
    for p in POLYS {
        keys.extend((1..=NUM_TERMS).map(|i| format!("{p}_{i}")));
    }
    keys
}

/// Parse key/value RPC text. Both `KEY: value [unit]` and `KEY = value;`
/// are accepted; unknown keys (ERR_BIAS, satellite ids, ...) are ignored.
pub fn parse_rpc_text(text: &str) -> Result<RpcModel> {
    let mut seen: HashMap<String, (usize, f64)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some(split) = line.find([':', '=']) else {
            continue;
        };
        let key = line[..split].trim().trim_matches('"').to_ascii_uppercase();
        let coeff = POLYS
            .iter()
            .find_map(|p| key.strip_prefix(p).and_then(|rest| rest.strip_prefix('_')).map(|idx| (*p, idx)));
        let known = match coeff {
            Some((poly, idx)) => match idx.parse::<usize>() {
                Ok(n) if (1..=NUM_TERMS).contains(&n) => true,
                _ => {
                    return Err(Error::RpcParse {
                        line: lineno,
                        msg: format!("{key}: {poly} index must be 1..={NUM_TERMS}"),
                    })
                }
            },
            None => SCALARS.contains(&key.as_str()),
        };
        if !known {
            continue;
        }
        let token = line[split + 1..]
            .split_whitespace()
            .next()
            .map(|t| t.trim_end_matches([';', ',']).trim_matches('"'))
            .unwrap_or("");
        let value: f64 = token.parse().map_err(|_| Error::RpcParse {
            line: lineno,
            msg: format!("{key}: cannot parse {token:?} as a number"),
        })?;
        if let Some((first, _)) = seen.insert(key.clone(), (lineno, value)) {
            return Err(Error::RpcParse {
                line: lineno,
                msg: format!("{key} already given on line {first}"),
            });
        }
    }

    let missing: Vec<String> = all_keys().into_iter().filter(|k| !seen.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(Error::MissingKeys(missing));
    }
    let get = |k: &str| seen[k].1;
    let poly = |p: &str| -> [f64; NUM_TERMS] { std::array::from_fn(|i| get(&format!("{p}_{}", i + 1))) };
    let model = RpcModel {
        line_off: get("LINE_OFF"),
        samp_off: get("SAMP_OFF"),
        lat_off: get("LAT_OFF"),
        lon_off: get("LONG_OFF"),
        height_off: get("HEIGHT_OFF"),
        line_scale: get("LINE_SCALE"),
        samp_scale: get("SAMP_SCALE"),
        lat_scale: get("LAT_SCALE"),
        lon_scale: get("LONG_SCALE"),
        height_scale: get("HEIGHT_SCALE"),
        line_num: poly("LINE_NUM_COEFF"),
        line_den: poly("LINE_DEN_COEFF"),
        samp_num: poly("SAMP_NUM_COEFF"),
        samp_den: poly("SAMP_DEN_COEFF"),
    };
    model.validate()?;
    Ok(model)
}

/// Render as `KEY: value` lines; values use shortest round-trip formatting.
pub fn format_rpc_text(m: &RpcModel) -> String {
    let mut s = String::new();
    let scalars = [
        m.line_off,
        m.samp_off,
        m.lat_off,
        m.lon_off,
        m.height_off,
        m.line_scale,
        m.samp_scale,
        m.lat_scale,
        m.lon_scale,
        m.height_scale,
    ];
    for (k, v) in SCALARS.iter().zip(scalars) {
        let _ = writeln!(s, "{k}: {v:e}");
    }
    for (p, c) in POLYS.iter().zip([&m.line_num, &m.line_den, &m.samp_num, &m.samp_den]) {
        for (i, v) in c.iter().enumerate() {
            let _ = writeln!(s, "{p}_{}: {v:e}", i + 1);
        }
    }
    s
}

pub fn parse_rpc_json(text: &str) -> Result<RpcModel> {
    let model: RpcModel = serde_json::from_str(text).map_err(|e| Error::RpcParse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    model.validate()?;
    Ok(model)
}

pub fn format_rpc_json(m: &RpcModel) -> String {
    serde_json::to_string_pretty(m).expect("RPC model serializes")
}

pub fn read_rpc(path: impl AsRef<Path>) -> Result<RpcModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match RpcFormat::from_path(path) {
        RpcFormat::Json => parse_rpc_json(&text),
        RpcFormat::Text => parse_rpc_text(&text),
    }
}

pub fn write_rpc(model: &RpcModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match RpcFormat::from_path(path) {
        RpcFormat::Json => format_rpc_json(model),
        RpcFormat::Text => format_rpc_text(model),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> RpcModel {
        let mut m = RpcModel::identity_like();
        m.line_num[7] = 1.25e-3;
        m.samp_den[19] = -3.0e-7;
        m.lat_off = 30.3;
        m.lon_off = -81.6;
        m
    }

    #[test]
    fn text_round_trip() {
        let m = sample_model();
        assert_eq!(parse_rpc_text(&format_rpc_text(&m)).unwrap(), m);
    }

    #[test]
    fn json_round_trip_matches_text() {
        let m = sample_model();
        let from_json = parse_rpc_json(&format_rpc_json(&m)).unwrap();
        let from_text = parse_rpc_text(&format_rpc_text(&m)).unwrap();
        assert_eq!(from_json, from_text);
    }

    #[test]
    fn accepts_units_equals_and_signs() {
        let mut text = format_rpc_text(&sample_model());
        text = text.replace("LINE_OFF: 0e0", "LINE_OFF = +000000.00 pixels;");
        text.insert_str(0, "# comment\nSATID: WV03\nERR_BIAS: 1.0 meters\n");
        let m = parse_rpc_text(&text).unwrap();
        assert_eq!(m.line_off, 0.0);
    }

    #[test]
    fn missing_keys_are_all_listed() {
        let text: String = format_rpc_text(&sample_model())
            .lines()
            .filter(|l| !l.starts_with("LINE_NUM_COEFF_13:") && !l.starts_with("HEIGHT_SCALE:"))
            .map(|l| format!("{l}\n"))
            .collect();
        match parse_rpc_text(&text) {
            Err(Error::MissingKeys(keys)) => assert_eq!(keys, vec!["HEIGHT_SCALE", "LINE_NUM_COEFF_13"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_index_and_duplicates_report_line() {
        let base = format_rpc_text(&sample_model());
        let extra = format!("{base}SAMP_NUM_COEFF_21: 1.0\n");
        assert!(matches!(parse_rpc_text(&extra), Err(Error::RpcParse { line: 91, .. })));
        let dup = format!("{base}LAT_OFF: 2.0\n");
        assert!(matches!(parse_rpc_text(&dup), Err(Error::RpcParse { line: 91, .. })));
        let junk = base.replace("LAT_SCALE: 1e0", "LAT_SCALE: abc");
        assert!(matches!(parse_rpc_text(&junk), Err(Error::RpcParse { .. })));
    }

    #[test]
    fn json_rejects_short_arrays() {
        let mut v: serde_json::Value = serde_json::from_str(&format_rpc_json(&sample_model())).unwrap();
        v["line_num"].as_array_mut().unwrap().pop();
        assert!(parse_rpc_json(&v.to_string()).is_err());
    }
}
