//! Simulation and numerical verification for fragmentation with erasure on
//! (0,1].
//!
//! Each step splits every interval of the current partition in two and erases
//! the previous break points, leaving n points after n steps. The crate
//! evolves that recursion exactly (linear and log domain), computes the
//! auxiliary walk whose CDF reproduces the break points, and checks the
//! limit theory quantitatively: endpoint mass concentration, bulk
//! normal-quantile scaling, and endpoint large-deviation rates with a
//! computable rate function.
//!
//! ```
//! use frag_core::proportions::{Environment, SplittingRule};
//! use frag_core::fragmenter::evolve;
//!
//! let env = Environment::new(SplittingRule::Constant(0.5), 10, 0).unwrap();
//! let part = evolve(&env, 2).unwrap();
//! assert_eq!(part.points(), &[0.25, 0.75]);
//! ```

pub mod error;
pub mod fragmenter;
pub mod limits;
pub mod proportions;
pub mod report;
pub mod rng;
pub mod rulespec;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
