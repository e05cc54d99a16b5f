use crate::formation::FeasibilityReport;
use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("{0}")]
    Domain(String),

    #[error("infeasible: {}", .0.reason.as_deref().unwrap_or("no feasible coalition structure"))]
    Infeasible(FeasibilityReport),

    #[error("invalid coalition structure: {}", join_violations(.0))]
    InvalidStructure(Vec<Violation>),

    /// An exhaustive search was asked to run above its size guard.
    #[error("{what} with N={n} exceeds the guard N<={cap}; raise the cap explicitly to proceed")]
    GuardExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
