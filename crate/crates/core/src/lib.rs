//! Exact Haar-unitary word integrals, Weingarten calculus and Monte Carlo
//! strong-convergence experiments.

pub mod bounds;
pub mod error;
pub mod freegroup;
pub mod montecarlo;
pub mod poly;
pub mod rng;
pub mod rwalk;
pub mod symgroup;
pub mod weingarten;
pub mod wordint;

pub use bounds::BumpProfile;
pub use error::{Error, Result};
pub use freegroup::{Letter, Word};
pub use montecarlo::experiments::{McEstimate, WordPoly};
pub use montecarlo::haar::{Group, UnitaryTuple};
pub use montecarlo::tensor::ImplicitTensorOperator;
pub use montecarlo::weyl::HighestWeight;
pub use poly::{Poly, RationalFunction};
pub use rwalk::WalkMeasure;
pub use symgroup::{Partition, Perm};
pub use weingarten::SymAlgebraElement;
pub use wordint::{Dimension, ExactValue, TraceMonomial};
