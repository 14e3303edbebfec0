use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid clamp bounds: lower {lo} exceeds upper {hi}")]
    ClampBounds { lo: f32, hi: f32 },

    #[error("invalid pattern: {0}")]
    Pattern(String),

    #[error("dimension mismatch: {what} expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown cluster `{0}`")]
    UnknownCluster(String),

    #[error("unknown control target {0}")]
    UnknownControl(usize),

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("coverage infeasible: {0}")]
    Coverage(String),

    #[error("could not draw {count} distinct patterns after {retries} retries")]
    DuplicatePatterns { count: usize, retries: usize },

    #[error("training did not converge after {epochs} epochs ({violations} violations left)")]
    NonConvergence { epochs: usize, violations: usize },

    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),

    #[error("unknown register `{0}`")]
    UnknownRegister(String),

    #[error("symbol budget exhausted: need {need}, have {have}")]
    SymbolBudget { need: usize, have: usize },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("machine fault: {0}")]
    Machine(String),

    #[error("cycle limit of {0} exceeded")]
    CycleLimit(u64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
