use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A divisor, logarithm or root argument left the regular domain.
    SingularPoint(&'static str),
    BadParams(String),
    /// The gauge functions violate the `L`/`M` constraint.
    BadGauge { residual: f64 },
    NotTwistFree,
    UnsupportedFamily(&'static str),
    NotApplicable(&'static str),
    CertificateFailed(String),
    /// An ODE solution ran away to a pole.
    SingularityReached { at: f64 },
    DomainExit { at: f64 },
    PoleInRange { at: f64 },
    StepSizeUnderflow { at: f64 },
    UnboundVariable(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SingularPoint(what) => write!(f, "singular point: {what}"),
            Error::BadParams(msg) => write!(f, "bad parameters: {msg}"),
            Error::BadGauge { residual } => {
                write!(f, "gauge constraint violated (residual {residual:e})")
            }
            Error::NotTwistFree => f.write_str("key function is not of the form W = A x + C"),
            Error::UnsupportedFamily(what) => write!(f, "unsupported family: {what}"),
            Error::NotApplicable(what) => write!(f, "not applicable: {what}"),
            Error::CertificateFailed(msg) => write!(f, "algebra certificate failed: {msg}"),
            Error::SingularityReached { at } => write!(f, "solution reached a singularity near {at}"),
            Error::DomainExit { at } => write!(f, "integration left its domain at {at}"),
            Error::PoleInRange { at } => write!(f, "integrand has a pole near {at}"),
            Error::StepSizeUnderflow { at } => write!(f, "step size underflow at {at}"),
            Error::UnboundVariable(name) => write!(f, "unbound variable `{name}`"),
        }
    }
}

impl core::error::Error for Error {}
