use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("duplicate slit position k = {0}")]
    DuplicateK(f64),
    #[error("slit at k = {k} has non-positive weight b = {b}")]
    NonPositiveWeight { k: f64, b: f64 },
    #[error("slit positions have zero gap")]
    ZeroGap,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parametric rule `{0}` needs a user-supplied tail bound")]
    MissingTailBound(String),
    #[error("unknown parametric rule `{0}`")]
    UnknownRule(String),
    #[error("evaluation point {z} lies within {dist:e} of the pole k = {k}")]
    PoleProximity { z: Complex64, k: f64, dist: f64 },
    #[error("point {0} is not in the open upper half-plane")]
    NotInUpperHalfPlane(Complex64),
    #[error("root search failed: {0}")]
    RootSearch(String),
    #[error("classification is near-degenerate: {0}")]
    NearDegenerate(String),
    #[error("continuation failed at t = {t}: {reason}")]
    Continuation { t: f64, reason: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("angle fit did not converge: {0}")]
    NonConvergentAngle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
