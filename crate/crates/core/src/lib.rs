//! Coded distributed matrix multiplication on a hierarchical cluster.
//!
//! The product `A^T B` (`A` is `s x k`, `B` is `s x b`) decomposes into
//! `k*b` dot products. A master hands those dot products to a cluster of
//! `n` nodes, each with `b` processor units, and waits only for the
//! fastest `k` nodes — the remaining `n - k` may straggle:
//!
//! ```text
//!                 master (p local processors, rate c*mu each)
//!                /   |   \
//!           node 1  ...  node n          <- any k of n suffice
//!           [b units]    [b units]       <- unit rate mu, scaled by load
//! ```
//!
//! Redundancy comes from array codes whose cells are XOR-style sums of
//! at most `sigma` dot products and which decode by belief-propagation
//! peeling, or from the polynomial-evaluation baselines (polynomial
//! codes and MatDot) that decode by interpolation. The crate provides:
//!
//! - exact matrix arithmetic over the integers or a prime field
//!   ([`ring`], [`matrix`]) and operand partitioning ([`partition`]);
//! - array BP-XOR codes: construction, validation, peeling decode and a
//!   text catalog format ([`arraycode`], [`asymcode`], [`peel`],
//!   [`cluster`], [`catalog`]);
//! - polynomial-code / MatDot / uncoded baselines ([`schemes`]);
//! - closed-form latency expressions and a Monte Carlo simulator with
//!   per-trial random substreams ([`latency`], [`sim`]);
//! - communication-cost accounting ([`comm`]);
//! - experiment scenarios, presets and CSV/plot-data emission
//!   ([`scenario`]).

// Negated float comparisons (`!(x > 0.0)`) in precondition checks are
// deliberate: unlike `x <= 0.0`, they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arraycode;
pub mod asymcode;
pub mod catalog;
pub mod cluster;
pub mod comm;
pub mod error;
pub mod latency;
pub mod matrix;
pub mod partition;
pub mod peel;
pub mod ring;
pub mod scenario;
pub mod schemes;
pub mod sim;

pub use arraycode::{builtin_5222, max_blocklength, recovery_threshold, search_code, validate_mds, ArrayCode, CellEquation};
pub use asymcode::{build_asym_code, coding_overhead, max_blocklength_asym, sample_validate, AsymArrayCode};
pub use catalog::{parse_catalog, serialize_array, serialize_asym, serialize_catalog, Catalog};
pub use cluster::{encode_tasks, encode_tasks_asym, ClusterPlan};
pub use comm::{comm_symbols, extra_symbols_asym, normalized_overhead_asym, CommCost, SymbolCount};
pub use error::Error;
pub use latency::{
    closed_form, epsilon_for_stragglers, exp_order_stat_mean, harmonic, harmonic_real, phi_inv_approx, DispersionVariant,
    LatencyParams, LogMode, NodeProfile, PhaseBreakdown, SchemeKind,
};
pub use matrix::{matmul_oracle, DenseMatrix};
pub use partition::{
    assemble, compute_blocks, grid_plan, partition, PartitionPlan, PartitionScheme, SourceBlock, TaskDescriptor,
};
pub use peel::{peel_decode, peel_solvable, PeelOutcome};
pub use ring::Ring;
pub use scenario::{
    emit_plotdata, parse_config, preset, rows_to_csv, run_config, run_scenario, selftest, RunRow, Scenario, SelfTestReport,
    StragglerRule, SweepVar,
};
pub use schemes::{
    matdot_decode, matdot_encode, poly_decode, poly_encode, uncoded_plan, MatDotCode, MatDotTask, PolyCode, PolyTask,
};
pub use sim::{mc_simulate, SimOutcome};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
