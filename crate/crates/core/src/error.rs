use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "pilot overhead K'+1 = {pilot_symbols} leaves no data symbols in a coherence block of \
         T_c = {tc}; increase T_c or the group size"
    )]
    Infeasible { pilot_symbols: usize, tc: usize },

    #[error("dimension mismatch for {what}: expected {expected}, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("channel realization has not been grouped")]
    Ungrouped,

    #[error("no group size in 1..={k} has a positive rate prefactor at T_c = {tc}")]
    EmptyFeasibleSet { k: usize, tc: usize },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
