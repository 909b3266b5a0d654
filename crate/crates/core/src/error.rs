use thiserror::Error;

/// A single clip invariant violation. Violations are data, not errors: a
/// validation pass collects all of them instead of bailing on the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Sentence index within the clip, when the rule is per-sentence.
    pub sentence: Option<usize>,
    /// Short rule name, e.g. "breakpoint-pause" or "sentence-order".
    pub rule: &'static str,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.sentence {
            Some(i) => write!(f, "sentence {}: [{}] {}", i, self.rule, self.detail),
            None => write!(f, "[{}] {}", self.rule, self.detail),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("validation failed for clip '{clip}': {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Validation { clip: String, violations: Vec<Violation> },

    #[error("infeasible segmentation{}: {words} target words cannot form {segments} nonempty segments", sentence.map(|i| format!(" (sentence {i})")).unwrap_or_default())]
    InfeasibleSegmentation { words: usize, segments: usize, sentence: Option<usize> },

    #[error("degenerate interval: zero or negative duration")]
    DegenerateInterval,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("degenerate denominator: baseline WER is 1")]
    DegenerateDenominator,

    #[error("oracle search space too large: {size} > {limit}")]
    OracleTooLarge { size: u128, limit: u128 },

    #[error("plug-in protocol failure: {0}")]
    Plugin(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 0 success, 2 validation, 3 infeasible alignment,
    /// 4 plug-in protocol failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Validation { .. } | Error::Parse { .. } => 2,
            Error::InfeasibleSegmentation { .. } => 3,
            Error::Plugin(_) => 4,
            _ => 1,
        }
    }
}
