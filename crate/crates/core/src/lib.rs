//! Piecewise-polyhedral regression: points are clustered, clusters are
//! assigned to regression groups (or discarded as outliers) by mixed-integer
//! optimization, groups are separated by hyperplanes into polyhedral regions,
//! and each region carries its own L1 regression.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
pub mod assign;
pub mod bench;
pub mod clustering;
pub mod config;
pub mod data;
pub mod dataset;
pub mod error;
pub mod fuzzy;
pub mod lp;
pub mod model;
pub mod separation;
pub mod transforms;

pub use assign::{Assignment, Groups, Optimality};
pub use bench::{llsr_fit, run_experiment, BenchOptions, MetricsRow, TableFormat};
pub use clustering::{cluster, Clustering};
pub use config::Config;
pub use data::{friedman_generate, load_csv, split, SplitSpec};
pub use dataset::Dataset;
pub use error::{Error, Result, TransformKind};
pub use fuzzy::FuzzyNumber;
pub use lp::{l1_fit, solve_lp, LinearProgram, LpSolution, LpStatus, Relation};
pub use model::{fit, fit_with_spec, FittedModel, Route};
pub use separation::{Halfspace, Hyperplane, Polyhedron, Side};
pub use transforms::{select_transforms, TransformSpec};
