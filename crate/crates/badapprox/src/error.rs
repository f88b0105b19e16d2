use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision exhausted at {0} bits without a decided comparison")]
    PrecisionExhausted(u32),
    #[error("lattice dimension {0} exceeds the supported bound {1}")]
    DimensionTooLarge(usize, usize),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("search budget exceeded: enumeration box radius {0} over cap {1}")]
    SearchBudgetExceeded(u64, u64),
    #[error("ledger inconsistent: {0}")]
    LedgerInconsistent(String),
    #[error("beta too large: {0}")]
    BetaTooLarge(String),
    #[error("unsupported support kind: {0}")]
    UnsupportedKind(String),
    #[error("malformed move: {0}")]
    MalformedMove(String),
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("uniqueness violated: more than one rational survives at level {0}")]
    UniquenessViolated(usize),
    #[error("cell budget violated at level {0}: {1} nonempty cells")]
    CellBudgetViolated(usize, usize),
    #[error("rectangle hit: outcome meets dangerous rectangle of v=({v}) at level {level}")]
    RectangleHit { v: String, level: usize },
    #[error("sandwich violated at q={0}")]
    SandwichViolated(i64),
    #[error("zero fiber coordinate")]
    ZeroFiberCoordinate,
    #[error("fiber inverse needs an exact power: {0}")]
    InexactRoot(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default starting precision for certified comparisons, in bits.
pub const PREC_START: u32 = 128;
/// Hard cap: widening past this raises `PrecisionExhausted`.
pub const PREC_CAP: u32 = 1024;

/// Runs `f` at doubling precision until it returns a decided value.
pub fn with_widening<T>(mut f: impl FnMut(u32) -> Result<Option<T>>) -> Result<T> {
    let mut prec = PREC_START;
    loop {
        if let Some(v) = f(prec)? {
            return Ok(v);
        }
        if prec >= PREC_CAP {
            return Err(Error::PrecisionExhausted(prec));
        }
        prec *= 2;
    }
}
