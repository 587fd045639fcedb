use std::fmt;
use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error class, printed by the CLI as a machine-parsable tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Io,
    Format,
    Domain,
    Numeric,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Io => "IO",
            Category::Format => "FORMAT",
            Category::Domain => "DOMAIN",
            Category::Numeric => "NUMERIC",
        })
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("band limit mismatch: {left} vs {right}")]
    BandLimitMismatch { left: usize, right: usize },

    #[error("band limit {got} exceeds grid band limit {max}")]
    BandLimitOverflow { got: usize, max: usize },

    #[error("{name} must be {expected}, got {value}")]
    InvalidParameter {
        name: &'static str,
        expected: &'static str,
        value: f64,
    },

    #[error("invalid spherical harmonic index (ell={ell}, m={m})")]
    InvalidIndex { ell: i64, m: i64 },

    #[error("scaling undefined: regularized field is identically zero")]
    UndefinedScaling,

    #[error("regularized coefficients are not blockwise collinear with the observed ones (degree {ell})")]
    NotCollinear { ell: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{0}")]
    Domain(String),

    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn category(&self) -> Category {
        match self {
            Error::Io(_) => Category::Io,
            Error::Format { .. } => Category::Format,
            Error::UndefinedScaling | Error::Numeric(_) => Category::Numeric,
            Error::BandLimitMismatch { .. }
            | Error::BandLimitOverflow { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidIndex { .. }
            | Error::NotCollinear { .. }
            | Error::GridMismatch(_)
            | Error::Domain(_) => Category::Domain,
        }
    }

    pub(crate) fn format(line: usize, msg: impl Into<String>) -> Self {
        Error::Format { line, msg: msg.into() }
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            expected: "finite and non-negative",
            value,
        })
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            expected: "finite and positive",
            value,
        })
    }
}

pub(crate) fn ensure_same_band_limit(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::BandLimitMismatch { left, right })
    }
}
