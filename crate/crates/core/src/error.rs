use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure mode of the library. Messages name the violated precondition.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible evolution spec: {0}")]
    InadmissibleSpec(String),
    #[error("time {t} is below the smallest admissible time t_eps = {t_eps} (t = 0 is a Dirac measure)")]
    TimeTooSmall { t: f64, t_eps: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too narrow: tail mass bound {tail:e} exceeds {threshold:e}")]
    GridTooNarrow { tail: f64, threshold: f64 },
    #[error("resolution limit: transform length {requested} exceeds the supported maximum {max}")]
    ResolutionLimit { requested: usize, max: usize },
    #[error("kernel is not absolutely integrable: {0}")]
    NotIntegrable(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("negative total variation {value} at index {index}")]
    NegativeVariation { index: usize, value: f64 },
    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("time grid {0} is not a refinement of the cylinder function's grid")]
    NotARefinement(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("representations do not define the same cylinder function: {0}")]
    InconsistentRepresentations(String),
    #[error("quadrature evaluation is limited to {max} times, got {n}")]
    QuadratureCostGate { n: usize, max: usize },
    #[error("slice length {dt} is below t_eps = {t_eps}")]
    SliceTooSmall { dt: f64, t_eps: f64 },
    #[error("frequency {y} is not representable on a periodic grid of length {period} with {n_points} points")]
    FrequencyOffGrid { y: f64, period: f64, n_points: usize },
    #[error("reference solver did not converge after {halvings} step halvings (last difference {last_diff:e})")]
    NoConvergence { halvings: usize, last_diff: f64 },
    #[error("invalid slice ladder: {0}")]
    InvalidLadder(String),
    #[error("operator I - B is singular: eigenvalue {eigenvalue} is within 1e-12 of 1")]
    SingularOperator { eigenvalue: f64 },
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("dimension {d} exceeds the direct-quadrature limit {max}")]
    DimensionTooLarge { d: usize, max: usize },
    #[error("ladder did not settle: {0}")]
    LadderDivergence(String),
    #[error("projection chain {chain} is not nested at level {level}")]
    NonNested { chain: usize, level: usize },
    #[error("invalid projection chain: {0}")]
    InvalidChain(String),
}
