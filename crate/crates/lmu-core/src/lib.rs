//! Storage engine that memorizes relational tables inside trained neural
//! classifiers.
//!
//! A table is stored as a *memory unit*: per-attribute hierarchies of small
//! softmax classifiers (one hierarchy refines an attribute's value interval
//! down to unit width) plus plain auxiliary indexes holding group aggregates
//! and the live identifier set. All relational operators and maintenance
//! operations run directly over this representation and are checked against
//! brute-force relational oracles in the test suite.
//!
//! Module map:
//! - [`nn`]: dense network, softmax training, backprop
//! - [`encode`]: identifier seed expansion, interval partitioning, classifier trees
//! - [`table`]: schema / table / group-index types
//! - [`store`]: memory unit construction, scan, existence checks, stats
//! - [`persist`]: the `LMU1` container file format
//! - [`relops`]: relational operators and insert/delete/update
//! - [`secure`]: deterministic 64-bit cipher and encrypted-mode storage
//! - [`harness`]: synthetic data generation, trial and capacity experiments

pub mod encode;
pub mod error;
pub mod harness;
pub mod nn;
pub mod persist;
pub mod relops;
pub mod rng;
pub mod secure;
pub mod store;
pub mod table;

pub use encode::{DnnTree, Interval, TreeConfig};
pub use error::Error;
pub use nn::{Mlp, MlpConfig, TrainConfig, TrainReport};
pub use relops::{Predicate, PredicateKind, ResultSet, SetOpKind};
pub use store::{build_lmu, build_lmu_logged, BuildLog, Lmu, LmuConfig, LmuStats, StorageMode};
pub use table::{GroupIndex, Schema, Table, Tuple, Value};

pub type Result<T> = std::result::Result<T, Error>;
