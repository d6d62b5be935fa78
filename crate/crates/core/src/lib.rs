//! Truncating floating-point approximation schemes for counting and sampling
//! labeled DAGs, counting 0/1 knapsack solutions, and counting weight-bounded
//! paths in arc-weighted DAGs, with exact big-integer oracles.

pub mod arith;
pub mod cli;
pub mod counting;
pub mod exact;
pub mod float;
pub mod generation;
pub mod graph;
pub mod knapsack;
pub mod paths;
pub mod rng;
pub mod table;
pub mod verify;

pub use counting::{approx_count, approx_table, ApproxCount, CountError};
pub use float::{mantissa_length, ApproxFloat, Epsilon, FloatError, Problem};
pub use generation::{dag_probability, generate_dag, generate_essdag, generate_extdag, Generator, Sample};
pub use graph::LabeledDag;
pub use knapsack::{advance_list, approx_count_knapsack, CapacityList, KnapsackInstance};
pub use paths::{approx_count_paths, binarize, prune, DepthBudget, WeightedMultiDag};
pub use table::{CountTable, Family};
