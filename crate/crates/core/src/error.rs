use thiserror::Error;

use crate::tensor::Chart;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chart mismatch: expected {expected:?}, got {found:?}")]
    ChartMismatch { expected: Chart, found: Chart },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("non-real point: {0}")]
    NonRealPoint(String),

    #[error("degenerate point: {0}")]
    DegeneratePoint(String),

    #[error("degenerate constant eigenvalue: mu1 + mu2 = {0}")]
    DegenerateConstantEigenvalue(f64),

    #[error("eigenvalue collision: |lambda2 - lambda1| = {0:e}")]
    EigenvalueCollision(f64),

    #[error("separation chart degenerate: {0}")]
    SeparationChartDegenerate(String),

    #[error("theta degenerate: |theta1| = {0:e}")]
    ThetaDegenerate(f64),

    #[error("deformation did not terminate within {0} Lie derivatives")]
    DeformationDidNotTerminate(usize),

    #[error("sampler starved after {0} consecutive guard failures")]
    SamplerStarved(usize),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
