use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The input does not describe a valid distribution, channel or matrix.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A marginal entry is zero; the alphabet has to be reduced first.
    #[error(
        "marginal p_{axis}({index}) is zero; drop that symbol from the support before analysis"
    )]
    ZeroMarginal { axis: char, index: usize },

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative routine hit its iteration cap.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Vertex enumeration would visit too many column subsets.
    #[error(
        "|Y| = {size} exceeds the enumeration cap of {cap}; raise the cap explicitly (--max-y) to accept the combinatorial cost"
    )]
    SizeCap { size: usize, cap: usize },

    /// A ratio was requested at the point where it is 0/0.
    #[error("ratio undefined: {0}")]
    UndefinedRatio(String),

    /// X and Y are independent, so the slope question is degenerate.
    #[error("X and Y are independent (I(X;Y) = 0); the trade-off slope is not defined")]
    IndependentPair,

    /// The operation does not apply to this input.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A parameter is outside its admissible range.
    #[error("{name} = {value} is out of range; admissible maximum is {max}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        max: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
