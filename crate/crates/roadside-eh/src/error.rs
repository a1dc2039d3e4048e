//! Crate-wide error type.

/// Errors produced by validation, numerical routines and the simulator.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A scenario or configuration field failed validation.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The harvest distance quantizes to zero harvest slots.
    #[error("empty harvest phase: harvest distance {ell} m covers no whole slot (slot length {slot_len} m)")]
    EmptyHarvestPhase { ell: f64, slot_len: f64 },

    /// A numerical routine failed to converge or produced an inconsistent result.
    #[error("numerical failure in {context}: {detail}")]
    Numerical { context: &'static str, detail: String },

    /// An argument lies outside the domain where a formula is valid.
    #[error("out of domain in {context}: {detail}")]
    Domain { context: &'static str, detail: String },

    /// The requested combination of models is not supported by the analysis.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn numerical(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Numerical { context, detail: detail.into() }
    }

    pub(crate) fn domain(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { context, detail: detail.into() }
    }

    /// Whether the error indicates bad input rather than a numerical failure.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::EmptyHarvestPhase { .. }
                | Error::Unsupported(_)
                | Error::Domain { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
