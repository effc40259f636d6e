//! Process exit codes. Every library error kind gets its own code so
//! scripts can tell an unreadable file from a bad flag.

use rto_core::RtoError;

pub const SUCCESS: u8 = 0;
/// A check command ran cleanly but at least one check failed.
pub const CHECK_FAILED: u8 = 1;
/// Bad command line or config file (clap also uses 2).
pub const USAGE: u8 = 2;

pub fn for_rto_error(err: &RtoError) -> u8 {
    match err {
        RtoError::InvalidParameter(_) => 10,
        RtoError::UnknownGroup { .. } => 11,
        RtoError::MissingField(_) => 12,
        RtoError::EmptyGroup(_) => 13,
        RtoError::EmptyDataset => 14,
        RtoError::Data(_) => 15,
        RtoError::Parse { .. } => 16,
        RtoError::Validation { .. } => 17,
        RtoError::DegenerateConstraint(_) => 18,
        RtoError::UnsupportedCriterion(_) => 19,
        RtoError::DegenerateStatistics(_) => 20,
        RtoError::Version(_) => 21,
        RtoError::Serialization(_) => 22,
        RtoError::Mismatch(_) => 23,
        RtoError::Disjointness(_) => 24,
        RtoError::Io(_) => 25,
    }
}

/// Library errors keep their code; anything else is a usage problem.
pub fn for_error(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<RtoError>() {
        Some(e) => for_rto_error(e),
        None => match err.downcast_ref::<std::io::Error>() {
            Some(_) => 25,
            None => USAGE,
        },
    }
}
