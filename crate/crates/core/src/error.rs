use thiserror::Error;

#[derive(Debug, Error)]
pub enum QnsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("frame mismatch between operands")]
    FrameMismatch,
    #[error("density fell to {value:e} at node {node} (floor {floor:e})")]
    Positivity { node: usize, value: f64, floor: f64 },
    #[error("mass operator is not positive definite")]
    MassSingular,
    #[error("step failure at t = {t}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("too few samples: need {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("config error{}: {message}", location(*line, field))]
    Config {
        line: usize,
        field: String,
        message: String,
    },
    #[error("malformed coefficient file at line {line}: {message}")]
    CoeffFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(line: usize, field: &str) -> String {
    match (line, field.is_empty()) {
        (0, true) => String::new(),
        (0, false) => format!(" in `{field}`"),
        (l, true) => format!(" at line {l}"),
        (l, false) => format!(" at line {l}, `{field}`"),
    }
}

pub type Result<T> = std::result::Result<T, QnsError>;
