//! Hadamard "pipeline" coding for computational ghost imaging.
//!
//! Two-dimensional Hadamard-derived illumination patterns are grown directly
//! from a 1×1 seed by four fixed block-extension rules ([`pipeline`]), instead
//! of building a large Hadamard matrix and reshaping its rows
//! ([`hadamard`]). The crate also provides the optimized MPCGI and
//! Russian-Dolls orderings with independent cross-checks ([`ordering`]), a
//! memory cost model with instrumented counters ([`memory`]), a ghost
//! imaging simulator ([`sim`]), file formats ([`io`]) and a self-check
//! suite ([`verify`]).

pub mod error;
pub mod hadamard;
pub mod io;
pub mod memory;
pub mod ordering;
pub mod pipeline;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use hadamard::{
    build_hadamard, kron, reshape_row, stretch_columns, upscale, verify_hadamard, Convention, HadamardMatrix,
    Lineage, Pattern, ReshapeOrder, RuleIndex, SignMatrix,
};
pub use memory::{nhpc_cost, thdc_cost, AllocationCounter, CostBreakdown};
pub use ordering::{OrderingScheme, PatternSequence, Provenance, RowPermutation};
pub use pipeline::{
    apply_rule, count_level, count_total, emission_counts, expand_level, generate, generate_levelwise, seed, LevelBatch,
    Traversal,
};
pub use sim::{MeasurementRecord, NoiseModel, ObjectImage, Reconstruction};
