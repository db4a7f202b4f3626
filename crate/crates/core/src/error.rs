use thiserror::Error;

/// Failures surfaced by the numerical pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum HopfError {
    #[error("invalid function: {0}")]
    InvalidFunction(String),
    #[error("evaluation point within {dist:e} of a pole")]
    PoleHit { dist: f64 },
    #[error("evaluation point within {dist:e} of a root")]
    RootHit { dist: f64 },
    #[error("a root lies within {dist:e} of the integration contour")]
    RootOnContour { dist: f64 },
    #[error("argument-principle quadrature gave {value}, not an integer")]
    NonIntegerWinding { value: f64 },
    #[error("no non-intersecting cut system found after {attempts} rotations")]
    CutSearchFailed { attempts: usize },
    #[error("target {x}+{y}i is not reachable inside the slit disk")]
    Unreachable { x: f64, y: f64 },
    #[error("square-root continuation collapsed: the path passes through a root")]
    StepCollapse,
    #[error("quadrature tolerance {requested:e} not met (estimate {achieved:e})")]
    ToleranceNotMet { requested: f64, achieved: f64 },
    #[error("function is not admissible at the chosen base (max residual {max_residual:e})")]
    NotAdmissible { max_residual: f64 },
    #[error("point is not on the nodal set (U = {value:e})")]
    NotOnNodalSet { value: f64 },
    #[error("{samples} angular samples cannot resolve the local maximum")]
    GridTooCoarse { samples: usize },
    #[error("nodal arc continuation stalled near {x}+{y}i")]
    TraceStall { x: f64, y: f64 },
    #[error("a root is mapped within the boundary margin of the unit circle")]
    RootTooCloseToBoundary,
    #[error("general-position search exhausted after {candidates} candidates")]
    SearchExhausted { candidates: usize },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("row-normalised determinant stays below the floor for every R up to 64")]
    DeterminantFloor,
    #[error("weight system is singular")]
    SingularSolve,
    #[error("angle continuation left the basin of branch {branch}")]
    BranchLost { branch: usize },
    #[error("perturbed state is not within the requested distance ({achieved:e} > {target:e})")]
    ClosenessFailed { achieved: f64, target: f64 },
    #[error("diffusion solver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = HopfError> = std::result::Result<T, E>;
