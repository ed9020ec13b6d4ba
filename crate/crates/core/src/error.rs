use thiserror::Error;

use crate::colony::ColonyError;
use crate::genetic::GaError;
use crate::instance::tsplib::ParseError;
use crate::instance::InstanceError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Invalid tunable. `name` is the parameter as it appears on the command line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid parameter {name}: {reason}")]
pub struct ParamError {
    pub name: &'static str,
    pub reason: String,
}

impl ParamError {
    pub fn new(name: &'static str, reason: impl Into<String>) -> Self {
        Self {
            name,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Colony(#[from] ColonyError),
    #[error(transparent)]
    Genetic(#[from] GaError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("ant {ant}: {source}")]
    Ant {
        ant: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("results differ across thread counts: {0}")]
    Nondeterministic(String),
    #[error("failed to start worker pool: {0}")]
    Pool(String),
}

impl Error {
    pub(crate) fn at_ant(self, ant: usize) -> Self {
        Error::Ant {
            ant,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Iteration {
            iteration,
            source: Box::new(self),
        }
    }
}
