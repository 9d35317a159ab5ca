use num_complex::Complex64;
use thiserror::Error;

use crate::hartree::TrajectoryRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine did not converge. `estimate` carries the best
    /// value reached when one exists.
    #[error("numeric failure: {context}")]
    NumericFailure {
        context: String,
        estimate: Option<Complex64>,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Non-finite values appeared during time stepping.
    #[error("evolution diverged at t = {at_time}")]
    Diverged {
        at_time: f64,
        partial: Box<TrajectoryRecord>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure {
            context: msg.into(),
            estimate: None,
        }
    }
}
