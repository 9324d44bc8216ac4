use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by model construction and the numerical routines.
///
/// The transformation failures (`ImaginaryAxisEigenvalue`, `SingularX1`,
/// `SingularX`, `NonRealT`) double as the reason the third design reports
/// when it falls back to the first one.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} has imaginary residue {residue:e} above tolerance")]
    NonRealResult { what: &'static str, residue: f64 },

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(&'static str),

    #[error("matrix is not Hurwitz (max real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("eigenvalue on the imaginary axis (|re| = {real_part:e})")]
    ImaginaryAxisEigenvalue { real_part: f64 },

    #[error("stable subspace has dimension {found}, expected {expected}")]
    WrongSplitCount { expected: usize, found: usize },

    #[error("X1 block of the stable subspace is singular")]
    SingularX1,

    #[error("skew Riccati solution X is singular")]
    SingularX,

    #[error("transformation T has imaginary residue {residue:e}")]
    NonRealT { residue: f64 },

    #[error("B_v2 has imaginary residue {residue:e}")]
    NonRealBv2 { residue: f64 },

    #[error("resolvent is singular at a sample point")]
    SingularResolvent,

    #[error("no rho candidate produced an observer")]
    NoCandidate,
}

impl Error {
    /// Short machine-friendly tag, used in sweep tables and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonRealResult { .. } => "non_real_result",
            Error::NoStabilizingSolution(_) => "no_stabilizing_solution",
            Error::NotHurwitz { .. } => "not_hurwitz",
            Error::ImaginaryAxisEigenvalue { .. } => "imaginary_axis_eigenvalue",
            Error::WrongSplitCount { .. } => "wrong_split_count",
            Error::SingularX1 => "singular_x1",
            Error::SingularX => "singular_x",
            Error::NonRealT { .. } => "non_real_t",
            Error::NonRealBv2 { .. } => "non_real_b_v2",
            Error::SingularResolvent => "singular_resolvent",
            Error::NoCandidate => "no_candidate",
        }
    }
}
