//! Greedy maximization of monotone set functions under multiple monotone
//! set-function constraints.
//!
//! The problem is `max f(A)` subject to `h_i(A ∩ S_i) <= H_i` for every
//! constraint `i`, where the ground set is covered by blocks `S_i`.
//!
//! * [`parallel_greedy`] runs an independent cost-benefit greedy on every
//!   block (blocks must be disjoint) and falls back to the best feasible
//!   singleton per block.
//! * [`general_greedy`] runs one greedy over all items and constraints.
//! * [`ratios`] computes the submodularity ratio, DR ratio and curvatures by
//!   exhaustive scan, plus the guarantee formulas that consume them.
//! * [`oracle`] finds exact optima on small instances.
//! * [`kalman`] and [`latency`] provide the sensor-scheduling objective and
//!   the sequential-transmission latency constraint.
//! * [`experiment`] and [`plot`] reproduce the random sensor-scheduling
//!   benchmarks and render them.

pub mod error;
pub mod exec;
pub mod experiment;
pub mod ext;
pub mod function;
pub mod greedy;
pub mod io;
pub mod kalman;
pub mod latency;
pub mod oracle;
pub mod plot;
pub mod problem;
pub mod ratios;
pub mod set;

pub use error::{Error, Result};
pub use exec::Exec;
pub use function::{CachedFn, Cardinality, Coverage, Modular, RatioBounds, SetFunction, Table};
pub use greedy::{general_greedy, parallel_greedy, truncation_points, BlockTrace, GeneralTrace};
pub use kalman::{KalmanInstance, KalmanObjective};
pub use latency::LatencyProfile;
pub use oracle::{brute_force_opt, exhaustive_feasible, OracleResult};
pub use problem::{ConstraintSpec, Element, GroundSet, ProblemInstance, ValidationReport};
pub use ratios::{exact_ratios, GuaranteeInputs, RatioReport};
pub use set::ItemSet;
