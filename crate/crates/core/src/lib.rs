//! Overlap-stitching error correction for bit strings estimated piecewise by
//! independent nodes, and a distributed phase-estimation simulator built on it.
//!
//! - [`bitstring`]: fixed-length binary words, cyclic distance, modular add.
//! - [`stitch`]: overlapping segmentation, right-to-left correction, and
//!   counterexample miners for weaker schemes.
//! - [`phase_sim`]: one phase-estimation node, closed-form and statevector.
//! - [`orchestrator`]: `k` nodes end to end, Monte Carlo campaigns, resources.
//! - [`verify`]: exhaustive property sweeps.

pub mod bitstring;
pub mod error;
pub mod orchestrator;
pub mod phase_sim;
pub mod rng;
pub mod stitch;
pub mod verify;

pub use bitstring::{BitString, Offset};
pub use error::{Error, Result};
pub use orchestrator::{
    plan_distributed, resource_report, run_campaign, run_distributed, run_trials, Backend,
    CampaignConfig, CampaignReport, DistributedPlan, PhaseSource, ResourceReport, TrialRecord,
};
pub use phase_sim::{
    exact_distribution, qft_inverse, run_node_sampled, run_node_statevector, t_for,
    MeasurementDistribution, NodeConfig, PhaseSpec, Statevector,
};
pub use stitch::{
    demonstrate_scheme1_failure, mine_k0_counterexample, segment, select_correction, stitch,
    verify_theorem1, MinerOutcome, SegmentSet, SegmentationPlan, WitnessRecord,
};
