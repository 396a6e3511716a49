use thiserror::Error;

/// Errors raised by the symbolic kernel.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("chart mismatch: left operand has (n={0}, N={1}), right operand has (n={2}, N={3})")]
    ChartMismatch(usize, usize, usize, usize),
    #[error("axis index {axis} out of range for chart dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("chart dimension {0} not supported (1..={max})", max = crate::coeff::MAX_DIM)]
    UnsupportedDimension(usize),
    #[error("input is not homogeneous of bidegree ({p},{q})")]
    NotHomogeneous { p: usize, q: usize },
    #[error("expected antiholomorphic degree at least 1, found a term of degree 0")]
    ZeroAntiholomorphicDegree,
    #[error("form is not dbar-closed; dbar of it is {witness}")]
    NotClosed { witness: String },
    #[error("matrix is not the identity at t = 0")]
    NotUnipotent,
    #[error("fiber word {word} has no connection data for factor {factor}")]
    MissingConnection { word: String, factor: String },
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("Beltrami field of degree {found} given where degree {expected} is required")]
    WrongBeltramiDegree { expected: usize, found: usize },
    #[error("Maurer-Cartan equation fails; residual is {residual}")]
    OffShell { residual: String },
    #[error("connection is not (2,0)-flat; d'theta - theta^theta = {residual}")]
    NotFlat { residual: String },
    #[error("extension obstructed at order {order}: right side not dbar-closed, dbar(rhs) = {witness}")]
    Obstructed { order: usize, witness: String },
    #[error("initial form must not depend on t")]
    SeedDependsOnT,
    #[error("family must vanish at t = 0")]
    FamilyNotCentered,
    #[error("exponent overflow in monomial product (max exponent {max})", max = crate::coeff::MAX_EXPONENT)]
    ExponentOverflow,
}

pub type Result<T> = std::result::Result<T, KernelError>;
