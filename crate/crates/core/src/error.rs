use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the subsystem that raises them.
#[derive(Debug, Clone, Error)]
pub enum Error {
    // -- projective line / Möbius algebra --
    #[error("homogeneous coordinates must not both vanish")]
    ZeroVector,
    #[error("matrix is singular (|det| = {det:.3e})")]
    SingularMatrix { det: f64 },
    #[error("matrix has negative determinant, not orientation-preserving")]
    OppositeOrientation,
    #[error("two points of a triple coincide")]
    DegenerateTriple,
    #[error("two points of a cross-ratio tuple coincide")]
    DegenerateTuple,
    #[error("map is not hyperbolic (|trace| = {trace_abs})")]
    NotHyperbolic { trace_abs: f64 },
    #[error("points are separated by the fixed points of the flow")]
    IncomparableUnderFlow,

    // -- de-Sitter geometry --
    #[error("angle parameter must be positive, got {theta}")]
    NonPositiveAngle { theta: f64 },
    #[error("degenerate rectangle: {reason}")]
    DegenerateRectangle { reason: String },
    #[error("no affine chart contains the polygon after normalization")]
    ChartFailure,
    #[error("point lies on the diagonal of dS")]
    OnDiagonal,

    // -- interval exchange --
    #[error("invalid HIET data: {reason}")]
    InvalidHiet { reason: String },
    #[error("point is outside the exchange interval")]
    OutOfInterval,
    #[error("parameter outside the family domain: {reason}")]
    DomainError { reason: String },
    #[error("(x, y) outside the parameter domain D")]
    OutsideDomain,
    #[error("(x, y) lies on the boundary of D; use the boundary constructor")]
    BoundaryCase,
    #[error("(x, y) is not on the boundary edges handled by this constructor")]
    NotBoundary,

    // -- rotation numbers --
    #[error("iteration budget exhausted; best estimate {best} with bound {bound}")]
    BudgetExceeded { best: f64, bound: f64 },
    #[error("orbit contains duplicate points")]
    DuplicatePoints,

    // -- gluing --
    #[error("invalid polygon spec: {reason}")]
    InvalidSpec { reason: String },
    #[error("edge pairings are inconsistent: {reason}")]
    InconsistentPairing { reason: String },
    #[error("quadrant identification around vertex orbit {orbit} is not standard")]
    NonStandardQuadrants { orbit: usize },
    #[error("holonomy is elliptic, angle undefined for standard singularities")]
    EllipticHolonomy,
    #[error("holonomy does not fix the base corner")]
    NotFixingBase,
    #[error("leaf did not return to the section within the jump budget")]
    NoReturn,

    // -- solvers --
    #[error("no root found for the word equation")]
    NoRoot,
    #[error("solver result failed its combinatorial verification")]
    VerificationFailed,
    #[error("solver budget exhausted; best (x, y) = ({x}, {y}), residuals ({res_a}, {res_b})")]
    SolverBudget { x: f64, y: f64, res_a: f64, res_b: f64 },
    #[error("circle map does not carry the given affine structure")]
    IncompatibleCircle,
}

pub type Result<T> = std::result::Result<T, Error>;
