use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WgsError {
    #[error("operator is not representable in Schmidt form")]
    NotRepresentable,
    #[error("family index {0} out of range 0..4")]
    IndexOutOfRange(u8),
    #[error("singular angle: |theta| = {theta} coincides with |phi_+| = {phi_plus} or |phi_-| = {phi_minus}")]
    SingularAngle { theta: f64, phi_plus: f64, phi_minus: f64 },
    #[error("closed form requires CP-type operands (theta = pi/2), got theta = {0}")]
    UnsupportedPhase(f64),
    #[error("weight must be nonzero")]
    ZeroWeight,
    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("graph cannot be scheduled: {0}")]
    UnscheduledGraph(String),
}

pub type Result<T> = std::result::Result<T, WgsError>;
