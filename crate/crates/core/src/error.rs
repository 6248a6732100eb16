use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("phenomenon is not admissible in space `{0}`")]
    InadmissibleInput(String),
    #[error("principle `{0}` needs the phenomenon but none was supplied")]
    MissingContext(String),
    #[error("duplicate principle id `{0}`")]
    DuplicatePrinciple(String),
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
}
