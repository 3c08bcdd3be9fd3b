use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("frequency {frequency} Hz is not an integer multiple of the {bin_step} Hz grid")]
    NonCommensurate { frequency: f64, bin_step: f64 },

    #[error("content at {frequency} Hz is not representable at {sample_rate} S/s")]
    Undersampled { frequency: f64, sample_rate: f64 },

    #[error("sample rate {sample_rate} S/s is not an integer multiple of the {bandwidth} Hz baseband rate")]
    RateNotMultiple { sample_rate: f64, bandwidth: f64 },

    #[error("signal has zero average power")]
    ZeroPower,

    #[error("record length mismatch: {0} vs {1} samples")]
    LengthMismatch(usize, usize),

    #[error("sample rate mismatch: {0} vs {1} S/s")]
    RateMismatch(f64, f64),

    #[error("polynomial order {0} is even; only odd orders are modeled")]
    EvenOrder(usize),

    #[error("no phase polynomial stored for fundamental bin {0}")]
    MissingPhasePolynomial(usize),

    #[error("document schema version {found} does not match supported version {expected}")]
    SchemaMismatch { found: u32, expected: u32 },

    #[error("{block}[{index}] = {value} lies outside its bounds [{lower}, {upper}]")]
    BoundViolation {
        block: String,
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("misaligned dataset: {0}")]
    Alignment(String),

    #[error("product at {0} Hz does not fall on a spectrum bin")]
    OffGridProduct(f64),

    #[error("spectra are defined on different bin grids")]
    GridMismatch,

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("band selection impossible: {0}")]
    BandOverlap(String),

    #[error("transmitted symbol at subcarrier {subcarrier}, symbol {symbol} is zero")]
    ZeroTxSymbol { subcarrier: usize, symbol: usize },

    #[error("masks cover the entire range-Doppler map")]
    MaskCoversMap,

    #[error("{step}: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Wrap an error with the algorithm step it came from.
    pub fn in_step(self, step: &'static str) -> Error {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad inputs rather than runtime failures.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Step { source, .. } => source.is_validation(),
            Error::Io(_) => false,
            _ => true,
        }
    }
}
