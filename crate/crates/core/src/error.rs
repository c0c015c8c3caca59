use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state {norm:.6e} outside admissible ball of radius {radius}")]
    OutOfDomain { norm: f64, radius: f64 },
    #[error("wave curve of family {family} left the admissible ball")]
    CurveOutOfDomain { family: usize },
    #[error("eigenvalues not separated (gap {gap:.3e}) or too close to zero")]
    NonHyperbolic { gap: f64 },
    #[error("Jacobian of the conserved quantity is singular")]
    SingularDH,
    #[error("family {family} lost genuine nonlinearity (grad lambda . r = {value:.3e})")]
    DegenerateFamily { family: usize, value: f64 },
    #[error("Newton iteration failed in {context} (residual {residual:.3e})")]
    NoConvergence { context: &'static str, residual: f64 },
    #[error("data too large: Lambda = {lambda:.4e} exceeds delta = {delta:.4e}")]
    DataTooLarge { lambda: f64, delta: f64 },
    #[error("functional growth diagnostic exceeded: {value:.4e} > {bound:.4e}")]
    BlowUp { value: f64, bound: f64 },
    #[error("front speed {speed:.3e} cannot be swapped")]
    SwapUndefined { speed: f64 },
    #[error("horizon {t:.4} does not exceed the controllability threshold {threshold:.4}")]
    ThresholdViolated { t: f64, threshold: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0} is an event time")]
    EventTime(f64),
    #[error("event cap {cap} reached at t = {t:.6}")]
    EventCap { cap: usize, t: f64 },
    #[error("at t = {t:.6}, x = {x:.6}: {source}")]
    AtEvent { t: f64, x: f64, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn at(self, t: f64, x: f64) -> Error {
        match self {
            e @ Error::AtEvent { .. } => e,
            e => Error::AtEvent { t, x, source: Box::new(e) },
        }
    }

    /// Strips event context.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtEvent { source, .. } => source.root(),
            e => e,
        }
    }
}
