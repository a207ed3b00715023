use thiserror::Error;

/// Errors raised by model construction, the analytic families and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmiError {
    /// Invalid parameters, geometry or grid settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// A family precondition (equal conductivities, admissible initial data, ...) does not hold.
    #[error("family violation: {0}")]
    FamilyViolation(String),

    /// A point or variable that lies outside the domain it was requested on.
    #[error("domain error: {0}")]
    Domain(String),

    /// Quadrature did not reach its tolerance within the evaluation budget.
    #[error("quadrature did not converge: achieved {achieved:e} after {evaluations} evaluations")]
    Quadrature { achieved: f64, evaluations: usize },

    /// The assembled linear system is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// An iterative or direct linear solve left a residual above tolerance.
    #[error("linear solve failed: relative residual {residual:e} after {iterations} iterations")]
    LinearSolve { residual: f64, iterations: usize },

    /// A failure inside a time step, with the step context attached.
    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<EmiError>,
    },
}

impl EmiError {
    /// True for errors caused by user input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            EmiError::Config(_) | EmiError::FamilyViolation(_) | EmiError::Domain(_) => true,
            EmiError::Step { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = EmiError> = std::result::Result<T, E>;
