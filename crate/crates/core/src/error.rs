use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown filter `{0}`")]
    UnknownFilter(String),
    #[error("filter `{name}` fails invariant: {reason}")]
    InvalidFilter { name: String, reason: String },
    #[error("filter has no nonzero taps")]
    EmptyFilter,
    #[error("polyphase grid size {0} must be odd and at least 3")]
    InvalidGrid(usize),
    #[error("filter with {taps} taps is longer than a level block of length {block}")]
    FilterLongerThanBlock { taps: usize, block: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid level count {levels} for length {n}")]
    InvalidLevels { levels: usize, n: usize },
    #[error("decimation vector has {got} bits, expected {expected}")]
    EpsLength { expected: usize, got: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("operator size {n} exceeds the dense ceiling {max}")]
    SizeOverflow { n: usize, max: usize },
    #[error("composite needs at least {min} parts, got {got}")]
    TooFewParts { min: usize, got: usize },
    #[error("noise estimate is zero (all selected coefficients vanish)")]
    DegenerateEstimate,
    #[error("layout has no finest detail band")]
    NoDetailBand,
    #[error("coefficient vector has zero energy")]
    ZeroEnergy,
    #[error("complexity index is undefined for a single coefficient")]
    UndefinedForN1,
    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("signal is constant; cannot rescale to a target SNR")]
    ConstantSignal,
    #[error("bad length: {0}")]
    BadLength(String),
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM pixel data truncated")]
    TruncatedData,
    #[error("unsupported image magic `{0}`")]
    UnsupportedMagic(String),
    #[error("image is {width}x{height}; a square image is required")]
    NonSquare { width: usize, height: usize },
    #[error("line {line}: cannot parse `{text}` as a sample")]
    BadSample { line: usize, text: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
