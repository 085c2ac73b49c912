//! Finite gate sets in SU(d): ε-nets, word compilation, and spectral-gap
//! analysis of the mixing operator.
//!
//! The matrix core ([`su`], [`gates`], [`words`]) is generic over the real
//! scalar; the aliases below fix it to `f64` (or `f32`). Net search, the
//! spectral blocks and the samplers' reports run in double precision.

// Range checks are written `!(x > 0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod error;
pub mod gates;
pub mod haar_ds;
pub mod net;
pub mod rng;
pub mod scalar;
pub mod specgap;
pub mod stats;
pub mod su;
pub mod volume;
pub mod words;

mod vptree;

pub use compiler::{
    compile, covering_stats, covering_stats_with, lower_bound_length, scaling_fit,
    subgroup_experiment, theorem1_envelope, theorem1_length, BoundInputs, CompilationResult,
    Compiler, CoverReport, CoverRow, ScalingFit, Strategy,
};
pub use error::{Error, Result};
pub use gates::{
    beta_embed, diagonal_generators, gd_generators, lps_generators, parse_gateset, parse_unitary,
    perturb, serialize_gateset,
};
pub use haar_ds::{ds_product_sample, moment_report, MomentReport, MomentRow, Sampler};
pub use net::{enumerate_net, enumerate_net_budgeted, nearest, Nearest, Net};
pub use scalar::Real;
pub use specgap::{
    block_norm, irrep_lift, lambda_estimate, minimal_m, mixing_block, prop4_bound, GapEstimate,
    MixingBlock, Prop4Bound,
};
pub use stats::SampleStats;
pub use su::{dist, haar_sample, hybrid_gap, su2_from_angles, MetricKind};
pub use volume::{ball_volume_su2, volume_constants_fit, VolumeConstants, VolumeMethod};
pub use words::{evaluate, Letter, Word};

pub type Unitary = su::Unitary<f64>;
pub type Unitary32 = su::Unitary<f32>;
pub type GateSet = gates::GateSet<f64>;
pub type GateSet32 = gates::GateSet<f32>;
pub type CMatrix = su::CMatrix<f64>;
