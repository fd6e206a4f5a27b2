use core::fmt;

/// Errors surfaced by curve math, retargeting, makers, and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter or balance was outside its admissible range.
    InvalidInput(&'static str),
    /// A pool state violated the curve trichotomy (both tokens short, or
    /// anchors met on one side only).
    CorruptedState,
    /// A square-root argument or discriminant left its proven domain;
    /// indicates a numerical degeneracy rather than a caller bug.
    NumericalDomain(&'static str),
    /// The retarget constraint has no admissible domain for the selected
    /// branch; callers fall back to plain recovery.
    RetargetInfeasible,
    /// The swap would leave the output balance under the dust floor.
    DustFloor,
    /// The maker cannot serve the requested output from its balance.
    SwapRefused,
    /// A token symbol is not part of the pool universe.
    UnknownToken,
    /// Input and output token of a swap must differ.
    SameToken,
    /// The feed is missing data for a requested timestep.
    FeedGap { hour: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(what) => write!(f, "invalid input: {what}"),
            Error::CorruptedState => write!(f, "pool state violates curve trichotomy"),
            Error::NumericalDomain(what) => write!(f, "numerical domain error: {what}"),
            Error::RetargetInfeasible => write!(f, "retarget constraint domain is empty"),
            Error::DustFloor => write!(f, "swap would breach the dust floor"),
            Error::SwapRefused => write!(f, "swap refused: insufficient output balance"),
            Error::UnknownToken => write!(f, "token not in pool universe"),
            Error::SameToken => write!(f, "input and output token must differ"),
            Error::FeedGap { hour } => write!(f, "feed has no data for hour {hour}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
