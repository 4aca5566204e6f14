//! Error types shared by the whole library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector is not unit length (norm {0})")]
    NotUnit(f64),

    #[error("zero-length rotation axis")]
    ZeroAxis,

    #[error("rotation between antipodal points is ambiguous; supply a tie-break axis")]
    AmbiguousAxis,

    #[error(
        "reference SOPs lie on the same Poincar\u{e9} axis (|s1\u{b7}s3| = {0:.6}); \
         rotations about that axis are invisible to the control loop"
    )]
    DegenerateReferences(f64),

    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("retardance {0:.4} rad exceeds the \u{b1}{1:.4} rad plate bound")]
    RetardanceOutOfBounds(f64, f64),

    #[error("insertion loss must be non-negative, got {0} dB")]
    NegativeLoss(f64),

    #[error("wavelength offset {0} nm outside table domain [{1}, {2}] nm")]
    TableDomain(f64, f64, f64),

    #[error("dark slot ({0} ns) must be shorter than the pulse period ({1} ns)")]
    SlotExceedsPeriod(f64, f64),

    #[error("no sifted events; error rate undefined")]
    EmptySift,

    #[error("invalid table: {0}")]
    TableParse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
