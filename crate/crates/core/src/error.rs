use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("query ({x}, {y}) outside raster bounds {width}x{height}")]
    OutOfBounds {
        x: f64,
        y: f64,
        width: usize,
        height: usize,
    },

    #[error("raster shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("march direction is degenerate (p = q = 0)")]
    DegenerateDirection,

    #[error("raster has no valid samples")]
    NoValidData,

    #[error("anisotropic pixels ({x} x {y}) are not supported")]
    AnisotropicPixels { x: f64, y: f64 },

    #[error("singular RPC denominator ({value:e}) at normalized ({l}, {p}, {h})")]
    SingularCamera { value: f64, l: f64, p: f64, h: f64 },

    #[error("singular Jacobian during localization")]
    SingularJacobian,

    #[error("localization did not converge after {iterations} iterations (residual {residual_px:e} px)")]
    Localization { iterations: usize, residual_px: f64 },

    #[error("GeoTIFF format error ({tag}): {msg}")]
    Format { tag: String, msg: String },

    #[error("RPC parse error at line {line}: {msg}")]
    RpcParse { line: usize, msg: String },

    #[error("RPC is missing keys: {}", .0.join(", "))]
    MissingKeys(Vec<String>),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn format(tag: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format {
            tag: tag.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad inputs (files, flags, arguments) rather
    /// than by the computation itself.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Argument(_)
                | Error::ShapeMismatch { .. }
                | Error::Format { .. }
                | Error::RpcParse { .. }
                | Error::MissingKeys(_)
                | Error::Io { .. }
        )
    }
}
