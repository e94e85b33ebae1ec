use thiserror::Error;
use threewave::Error as CoreError;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("{0}")]
    Validation(String),

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type LabResult<T> = std::result::Result<T, LabError>;

impl LabError {
    /// 2 for bad input, 3 for numerical failure, 1 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            LabError::Validation(_) => 2,
            LabError::Numerical(_) => 3,
            LabError::Core(e) => match e {
                CoreError::NonConvergence { .. }
                | CoreError::Collapse
                | CoreError::NegativeExcess(_)
                | CoreError::BracketFailure(_)
                | CoreError::BlowUp(_)
                | CoreError::NormalizationCheck(_)
                | CoreError::OutsideXi(_) => 3,
                CoreError::Io(_) => 1,
                _ => 2,
            },
            LabError::Io(_) | LabError::Csv(_) | LabError::Json(_) => 1,
        }
    }
}
