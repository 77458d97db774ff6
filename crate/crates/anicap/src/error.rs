use alloc::string::String;
use core::fmt;

/// Every failure the library can report. Variants carry enough context to be
/// surfaced verbatim by the command line front end.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    NonConvexNorm { min_eigenvalue: f64 },
    SymmetryViolated(String),
    InvalidNorm(String),
    DegeneratePoint,
    InvalidContactAngle { omega0: f64, lower: f64, upper: f64 },
    PointOffCap { deviation: f64 },
    NotBoundaryPoint,
    FormMismatch { deviation: f64 },
    ChartFailure(String),
    SingularMetric { node: usize },
    InvalidResolution(String),
    NotAdmissible { node: usize, min_eigenvalue: f64 },
    NotPositive { min_value: f64 },
    NotSymmetricNorm,
    ProjectionBreaksPositivity { min_value: f64 },
    ConditionFailed { margin: f64 },
    NotEven { defect: f64 },
    InvalidSpec(String),
    AdmissibilityLost { t: f64 },
    NoConvergence { t: f64, residual: f64 },
    SingularSystem,
}

impl Error {
    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::NonConvexNorm { .. } => "NonConvexNorm",
            Error::SymmetryViolated(_) => "SymmetryViolated",
            Error::InvalidNorm(_) => "InvalidNorm",
            Error::DegeneratePoint => "DegeneratePoint",
            Error::InvalidContactAngle { .. } => "InvalidContactAngle",
            Error::PointOffCap { .. } => "PointOffCap",
            Error::NotBoundaryPoint => "NotBoundaryPoint",
            Error::FormMismatch { .. } => "FormMismatch",
            Error::ChartFailure(_) => "ChartFailure",
            Error::SingularMetric { .. } => "SingularMetric",
            Error::InvalidResolution(_) => "InvalidResolution",
            Error::NotAdmissible { .. } => "NotAdmissible",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotSymmetricNorm => "NotSymmetricNorm",
            Error::ProjectionBreaksPositivity { .. } => "ProjectionBreaksPositivity",
            Error::ConditionFailed { .. } => "ConditionFailed",
            Error::NotEven { .. } => "NotEven",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::AdmissibilityLost { .. } => "AdmissibilityLost",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularSystem => "SingularSystem",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonConvexNorm { min_eigenvalue } => {
                write!(f, "A_F is not positive definite (min eigenvalue {min_eigenvalue:e})")
            }
            Error::SymmetryViolated(s) => write!(f, "declared symmetry does not hold: {s}"),
            Error::InvalidNorm(s) => write!(f, "invalid norm specification: {s}"),
            Error::DegeneratePoint => write!(f, "point too close to the origin"),
            Error::InvalidContactAngle { omega0, lower, upper } => write!(
                f,
                "omega0 = {omega0} outside the admissible interval ({lower}, {upper})"
            ),
            Error::PointOffCap { deviation } => {
                write!(f, "point is off the cap (dual norm deviation {deviation:e})")
            }
            Error::NotBoundaryPoint => write!(f, "point is not on the cap boundary"),
            Error::FormMismatch { deviation } => write!(
                f,
                "the two forms of the boundary convexity condition disagree ({deviation:e})"
            ),
            Error::ChartFailure(s) => write!(f, "chart construction failed: {s}"),
            Error::SingularMetric { node } => write!(f, "metric is singular at node {node}"),
            Error::InvalidResolution(s) => write!(f, "invalid resolution: {s}"),
            Error::NotAdmissible { node, min_eigenvalue } => write!(
                f,
                "tau is not positive definite at node {node} (min eigenvalue {min_eigenvalue:e})"
            ),
            Error::NotPositive { min_value } => {
                write!(f, "support function is not positive (min {min_value:e})")
            }
            Error::NotSymmetricNorm => write!(f, "operation requires a symmetric norm"),
            Error::ProjectionBreaksPositivity { min_value } => write!(
                f,
                "compatibility projection makes the data non-positive (min {min_value:e})"
            ),
            Error::ConditionFailed { margin } => write!(
                f,
                "boundary anisotropic convexity condition fails (margin {margin:e}); the a priori estimates do not apply"
            ),
            Error::NotEven { defect } => write!(f, "data is not even (defect {defect:e})"),
            Error::InvalidSpec(s) => write!(f, "invalid solve specification: {s}"),
            Error::AdmissibilityLost { t } => {
                write!(f, "admissibility lost at homotopy parameter t = {t}")
            }
            Error::NoConvergence { t, residual } => write!(
                f,
                "Newton iteration did not converge at t = {t} (residual {residual:e})"
            ),
            Error::SingularSystem => write!(f, "linear system is singular"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
