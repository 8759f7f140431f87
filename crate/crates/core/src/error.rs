use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("null state")]
    NullState,

    #[error("photon not separable")]
    PhotonNotSeparable,

    #[error("photon escaped cavity")]
    PhotonEscaped,

    #[error("no support at detector (probability {0:e})")]
    NoSupport(f64),

    #[error("entry is not an input port of the interferometer")]
    InvalidEntry,

    /// An input that must be normalized was not.
    #[error("{what} is not normalized (squared norm {norm_sqr})")]
    NotNormalized { what: &'static str, norm_sqr: f64 },

    #[error("ion state contains a level outside {{m+, m-}}")]
    NotAnIonPair,

    #[error("{name} must lie in {range}, got {value}")]
    OutOfRange {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("{0} must be positive")]
    NonPositive(&'static str),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("mixed state weights {0}")]
    BadWeights(String),
}
