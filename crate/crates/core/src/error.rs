use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("distance table is not square (row {row} has {len} entries, expected {expected})")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("negative distance between points {x} and {y}")]
    NegativeDistance { x: usize, y: usize },
    #[error("nonzero diagonal entry at point {0}")]
    NonzeroDiagonal(usize),
    #[error("asymmetric distance between points {x} and {y}")]
    AsymmetricDistance { x: usize, y: usize },
    #[error("triangle inequality fails: d({x},{z}) > d({x},{y}) + d({y},{z})")]
    TriangleViolation { x: usize, y: usize, z: usize },
    #[error("distinct points {x} and {y} are at distance zero")]
    ZeroDistanceDistinctPoints { x: usize, y: usize },
    #[error("graph is disconnected: point {0} is unreachable")]
    Disconnected(usize),
    #[error("point id {0} is out of range")]
    InvalidPoint(usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{count} candidate balls exceed the exact-search cap of {cap}")]
    CandidateCapExceeded { count: usize, cap: usize },
    #[error("maps do not share source and target")]
    SpaceMismatch,
    #[error("nerve of the ball covering differs from the Rips complex at the same scale")]
    NerveRipsMismatch,
    #[error("cochain does not live on this complex (degree {degree}: {got} values for {expected} simplices)")]
    HostMismatch { degree: usize, got: usize, expected: usize },
    #[error("simplices have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degree {degree} outside the supported range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("cochain is not closed")]
    NotClosed,
    #[error("cochain is not exact on the inner complex")]
    NoPrimitive,
    #[error("ell^{q} minimization did not converge (residual {residual:e})")]
    ConvergenceFailure { q: f64, residual: f64 },
    #[error("restriction does not vanish in cohomology; Poincare inequality infeasible")]
    Infeasible,
    #[error("uniform vanishing fails at level {level}, center {center}, degree {degree}")]
    VanishingFailure { level: usize, center: usize, degree: usize },
    #[error("vertex {0} is not covered by the shrunken partition-of-unity supports")]
    UncoveredVertex(usize),
    #[error("the partition-of-unity operator needs covering degree at least 1")]
    DegreeUnderflow,
    #[error("restriction below level 0")]
    LevelUnderflow,
    #[error("degree {degree} exceeds the validated range of the coverings (max {max})")]
    DegreeOverflow { degree: usize, max: usize },
    #[error("no local primitive on the covering piece indexed by {piece:?} at level {level}")]
    PrimitiveFailure { level: usize, piece: Vec<usize> },
    #[error("transferred piece {piece:?} is not constant")]
    NonConstantPiece { piece: Vec<usize> },
    #[error("local components disagree on simplex {simplex:?}")]
    GluingFailure { simplex: Vec<usize> },
    #[error("simplex {simplex:?} is not present in the target complex")]
    ScaleViolation { simplex: Vec<usize> },
    #[error("complex is not a subcomplex: simplex {simplex:?} missing")]
    NotASubcomplex { simplex: Vec<usize> },
    #[error("witness replay diverged at step {0}")]
    ReplayMismatch(usize),
}
