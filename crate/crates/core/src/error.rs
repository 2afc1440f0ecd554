use thiserror::Error;

/// Errors raised by the library. Report-style checks never error; they carry
/// their failures inside the report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported spatial dimension {0} (expected 2 or 3)")]
    Dimension(usize),

    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("deformation field is not a gradient (relative curl {relative_curl:.3e})")]
    NotAGradient { relative_curl: f64 },

    #[error(
        "temperature recovery failed at cell {cell}: target internal energy {target:.6e} \
         outside [{low:.6e}, {high:.6e}]"
    )]
    ThetaRecovery {
        cell: usize,
        target: f64,
        low: f64,
        high: f64,
    },

    #[error("time step {dt:.3e} exceeds the stability limit {limit:.3e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("smoothness monitor tripped at t = {t:.4}: gradient norm grew by {growth:.1}x")]
    Smoothness { t: f64, growth: f64 },

    #[error("temperature floor violated at t = {t:.4}: min theta {min:.4e} < floor {floor:.4e}")]
    ThetaFloor { t: f64, min: f64, floor: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
