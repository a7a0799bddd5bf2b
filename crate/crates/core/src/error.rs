use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("point ({x:.6}, {y:.6}, {z:.6}) lies below the reflecting plane")]
    BelowPlane { x: f64, y: f64, z: f64 },

    #[error("evaluation point coincides with a transducer")]
    Singular,

    #[error("field grid has no nonzero value")]
    NoPeak,

    #[error("no detectable period: {0}")]
    NoPeriod(String),

    #[error("sample time {got} precedes previous time {prev}")]
    TimeRegression { prev: f64, got: f64 },

    #[error("run contains no events")]
    NoData,

    #[error("image source count {count} exceeds cap {cap}")]
    TooManyImages { count: usize, cap: usize },

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    TomlDe(#[from] toml::de::Error),

    #[error("config write error: {0}")]
    TomlSer(#[from] toml::ser::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
