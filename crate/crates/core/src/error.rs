use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the ensemble is empty: odd N = {0} with zero fugacity has no configurations")]
    EmptyEnsemble(usize),

    #[error("odd-N kernels unsupported (N = {0})")]
    OddN(usize),

    #[error(
        "configuration has {l} charge-one and {m} charge-two particles, total charge {total} != {expected}"
    )]
    ChargeMismatch { l: usize, m: usize, total: usize, expected: usize },

    #[error("two particles share the angle {0}")]
    CoincidentParticles(f64),

    #[error("matrix dimension {0} is odd")]
    OddDimension(usize),

    #[error("matrix is not antisymmetric (max |A + A^T| = {0:e})")]
    NotAntisymmetric(f64),

    #[error("intensity has imaginary residue {im:e} (real part {re:e})")]
    ComplexIntensity { re: f64, im: f64 },

    #[error("oracle limited to N <= {max} (got {n})")]
    OracleTooLarge { n: usize, max: usize },

    #[error("not enough samples: {have} < {need}")]
    TooFewSamples { have: u64, need: u64 },
}
