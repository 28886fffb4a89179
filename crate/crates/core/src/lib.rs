//! Split-computing offload planner, simulator, and edge/cloud runtime.
//!
//! An edge device runs the *head* of a profiled DNN pipeline up to a
//! designated bottleneck layer, then either finishes the *tail* locally or
//! ships the (optionally quantized) bottleneck tensor to a cloud server that
//! runs a replicated tail and returns the control outputs. Every control
//! timestep (100 ms by default) the runtime measures the network, computes a
//! data-rate threshold, and takes the cheaper path, with a fail-safe timer
//! that rolls back to local tail execution when the cloud response is late.
//!
//! The crate is organized around that loop:
//!
//! - [`profiles`] — device/server/radio/model descriptions loaded from TOML
//! - [`cost`] — communication and computation latency/energy estimates
//! - [`policy`] — partition objective, rate threshold, and offload decision
//! - [`quant`] — 8/16/32-bit bottleneck tensor quantization
//! - [`netsim`] — deterministic trace generation and zero-order-hold sampling
//! - [`runtime`] — the per-timestep control loop and episode simulator
//! - [`transport`] — binary wire protocol plus edge client and cloud server
//! - [`sweep`] — rate sweeps and savings summaries for offline evaluation

pub mod cost;
pub mod netsim;
pub mod policy;
pub mod profiles;
pub mod quant;
pub mod rng;
pub mod runtime;
pub mod sweep;
pub mod transport;

pub use cost::{CommEstimate, CompEstimate, NetworkSample, RadioModel};
pub use policy::{Deployment, OffloadDecision, PartitionPlan, PolicyWeights, Verdict};
pub use profiles::{
    DeviceProfile, ModelProfile, ProfileBundle, QuantBits, ServerProfile, SubTaskCost, TaskSpec,
};
pub use quant::{BottleneckTensor, QuantizedTensor};
pub use runtime::{ControlOutput, EpisodeSummary, RuntimeConfig, TimestepReport};
