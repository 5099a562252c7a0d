//! Error classification into process exit codes.

use std::fmt;
use std::process::ExitCode;

/// A command failure: bad input from the user or a failed run.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Failure {
        Failure::Usage(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Run(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Run(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<graphsim::Error> for Failure {
    fn from(e: graphsim::Error) -> Failure {
        use graphsim::Error as E;
        match e {
            E::Unsupported(_) | E::VertexOutOfRange { .. } | E::DramConfig(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Run(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::Run(e)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;
