//! Structure theory of so(3,1), length-holonomy spectra of loxodromic classes,
//! truncated Selberg-type zeta products for SO(3,1)° and the peeling
//! algorithms that recover lengths and holonomy ratios from zero data.

pub mod cli;
pub mod geodesic;
pub mod io;
pub mod lie;
pub mod multiset;
pub mod recovery;
pub mod zeros;
pub mod zeta;

pub use geodesic::{classify, PrimitiveClass, Spectrum};
pub use multiset::{multiset_equal, RealMultiset};
pub use recovery::{recover_lengths, recover_ratios, smo_check, RecoveryReport, Status};
pub use zeros::{strip_k0, zero_line, zero_multiset, ZeroMultiset, ZeroWindow};
pub use zeta::{log_derivative, zeta_ratio, zeta_tau, LatticePoint, TauIndex, Truncation};

use thiserror::Error;

/// Any error surfaced by the library, tagged with a stable code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Lie(#[from] lie::LieError),
    #[error(transparent)]
    Geodesic(#[from] geodesic::GeodesicError),
    #[error(transparent)]
    Zeta(#[from] zeta::ZetaError),
    #[error(transparent)]
    Zero(#[from] zeros::ZeroError),
    #[error(transparent)]
    Recovery(#[from] recovery::RecoveryError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Machine-readable code used in CLI error objects.
    pub fn code(&self) -> &'static str {
        use geodesic::GeodesicError as G;
        use recovery::RecoveryError as R;
        match self {
            Error::Lie(lie::LieError::NotInAlgebra { .. }) => "NotInAlgebra",
            Error::Lie(lie::LieError::NonFinite { .. }) => "DomainError",
            Error::Geodesic(G::NotInGroup { .. }) => "NotInGroup",
            Error::Geodesic(G::NotLoxodromic { .. }) => "NotLoxodromic",
            Error::Geodesic(G::Domain(_)) => "DomainError",
            Error::Zeta(zeta::ZetaError::Domain(_)) => "DomainError",
            Error::Zeta(zeta::ZetaError::FactorZero { .. }) => "FactorZero",
            Error::Zeta(zeta::ZetaError::DivisionByZero { .. }) => "DivisionByZero",
            Error::Zero(e) | Error::Recovery(R::Zero(e)) => match e {
                zeros::ZeroError::Domain(_) => "DomainError",
                zeros::ZeroError::Underflow { .. } => "UnderflowError",
            },
            Error::Recovery(R::IncompleteWindow { .. }) => "IncompleteWindow",
            Error::Recovery(R::NegativeMultiplicity { .. }) => "NegativeMultiplicity",
            Error::Recovery(R::AmbiguousTrace { .. }) => "AmbiguousTrace",
            Error::Recovery(R::Residual { .. }) => "ResidualTrace",
            Error::Recovery(R::SearchLimit) => "SearchLimit",
            Error::Recovery(R::Domain(_)) => "DomainError",
            Error::Io(io::IoError::Parse { .. }) => "ParseError",
            Error::Io(io::IoError::Domain { .. }) => "DomainError",
            Error::Io(io::IoError::Io(_)) => "IoError",
            Error::Usage(_) => "UsageError",
        }
    }

    /// 2 for parse, usage and I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "ParseError" | "UsageError" | "IoError" => 2,
            _ => 1,
        }
    }
}
