//! Prophet-inequality machinery: distributions, the Kertz curve, exact
//! benchmarks, stopping policies and the optimal-ordering scheme.

pub mod benchmarks;
pub mod dist;
pub mod error;
pub mod generators;
pub mod kertz;
pub mod ordering;
pub mod policies;
pub mod quad;
pub mod sim;

pub use benchmarks::StatelessPolicy;
pub use dist::{Distribution, Instance, Parametric};
pub use error::{Error, Result};
pub use kertz::{KertzSolution, WorstCaseParams};
pub use ordering::{GeneralOrdering, ThresholdGrid};
pub use policies::{DecompositionResult, SmallnessMode};
pub use sim::SimResult;
