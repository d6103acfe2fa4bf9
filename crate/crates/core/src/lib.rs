//! Truncated convolution operators of random walks on free groups and free
//! abelian groups.
//!
//! The crate builds the Markov operator `M` of a symmetric generating measure
//! on word-metric balls and measures the two sides of the contrast between
//! `l2` and `l-inf` invertibility of `I - M`: the spectral gap of `M_R` (and
//! the matching exact return probabilities of the walk), and Lipschitz
//! witness functions whose Laplacian stays bounded while they grow.
//!
//! Linear-algebra code is generic over [`Scalar`]; the aliases below fix the
//! common instantiations.

pub mod ball;
pub mod cli;
pub mod error;
pub mod group;
pub mod linalg;
pub mod measure;
pub mod operator;
pub mod output;
pub mod scalar;
pub mod spectral;
pub mod walk;
pub mod witness;

pub use ball::{ball, ball_size, BallIndex, DEFAULT_NODE_BUDGET};
pub use error::{Error, MeasureError, Result};
pub use group::{GroupDescriptor, GroupElement, GroupKind, Letter};
pub use measure::ProbabilityMeasure;
pub use operator::{build_operator, SchurAudit, TruncatedConvolutionOperator};
pub use scalar::{FloatScalar, Scalar};
pub use spectral::{
    greens_partial, inverse_lp_norms, solve_shifted, top_eigenvalue, CgOptions, InverseNormReport, InverseOptions,
    PowerOptions, SpectralReport,
};
pub use walk::{
    convolution_power, monte_carlo_return, return_probabilities, spectral_radius_estimate, ConvolutionPower,
    PowerRoute, WalkEstimate,
};
pub use witness::{build_witness, witness_ratio, WitnessFunction, WitnessReport};

pub use num_rational::BigRational;

/// Double-precision operator, the default for spectral work.
pub type Operator = TruncatedConvolutionOperator<f64>;
pub type OperatorF32 = TruncatedConvolutionOperator<f32>;
/// Operator with exact rational entries.
pub type ExactOperator = TruncatedConvolutionOperator<BigRational>;
pub type Witness = WitnessFunction<f64>;
pub type ExactWitness = WitnessFunction<BigRational>;
pub type ExactWitnessReport = WitnessReport<BigRational>;
