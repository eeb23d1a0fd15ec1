//! Eigenvalue and eigenfunction sequences for fully nonlinear, positively
//! 1-homogeneous, radially symmetric elliptic operators.
//!
//! The library computes, for an operator from a small catalog (Pucci
//! extremal, linear, Bellman max/min of linear forms), the complete
//! sequences of eigenvalues and sign-changing eigenfunctions
//! `(lambda_n^+, u_n^+)`, `(lambda_n^-, u_n^-)` on intervals, annuli and
//! balls, under the convention `F(u'', u', u, t) = -lambda * u`.
//!
//! The pipeline is: isolate the second derivative through the operator
//! inversion ([`operator`]), integrate the resulting first-order system
//! with dense output ([`ivp`]), solve shifted Dirichlet and mixed problems
//! by shooting ([`bvp`]), compute one-signed semi-eigenvalues by lambda
//! shooting with a Krein-Rutman inverse-iteration cross-check
//! ([`semi_eigen`]), glue sign-alternating pieces over interior nodes where
//! adjacent semi-eigenvalues agree ([`nehari`]), extend everything to the
//! ball with origin regularization ([`radial`]), and audit the results
//! against quantitative maximum-principle bounds ([`diagnostics`]).
//!
//! All solvers are pure functions of immutable inputs, generic over the
//! scalar type through [`Real`]; concrete `f64` aliases are exported below.

pub mod bvp;
pub mod diagnostics;
pub mod error;
pub mod ivp;
pub mod nehari;
pub mod operator;
pub mod opfile;
pub mod radial;
pub mod real;
pub mod sampled;
mod scalar_root;
pub mod semi_eigen;

pub use error::{Error, Result};
pub use real::Real;
pub use semi_eigen::{Method, Sign};

/// Concrete `f64` aliases for the main types.
pub type OperatorSpec64 = operator::OperatorSpec<f64>;
pub type EvalPoint64 = operator::EvalPoint<f64>;
pub type SampledFn64 = sampled::SampledFn<f64>;
pub type IvpConfig64 = ivp::IvpConfig<f64>;
pub type Trajectory64 = ivp::Trajectory<f64>;
pub type BvpProblem64 = bvp::BvpProblem<f64>;
pub type SemiEigenResult64 = semi_eigen::SemiEigenResult<f64>;
pub type NodeVector64 = nehari::NodeVector<f64>;
pub type EigenPair64 = nehari::EigenPair<f64>;
pub type RadialProblem64 = radial::RadialProblem<f64>;
pub type AbpReport64 = diagnostics::AbpReport<f64>;
