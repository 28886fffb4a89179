//! Device, server, radio, and model profiles.
//!
//! Profiles parameterize every cost computation in the crate. They are loaded
//! from a versioned TOML file with four sections (`[device]`, `[server]`,
//! `[radio]`, `[model]`) and are immutable after load, so they can be shared
//! freely across threads.
//!
//! A model is described as an ordered list of sub-tasks. Each sub-task either
//! carries a CPU cycle count (converted to latency/energy through the device
//! frequency and per-cycle energy coefficient) or directly measured
//! latency/energy values; when both are present the measured values win.
//! One sub-task is designated as the bottleneck: its output is the payload
//! shipped to the cloud when execution is split there.
//!
//! Units are SI throughout: bytes, bits/s, seconds, joules, watts, with
//! MB = 10^6 bytes and Mbps = 10^6 bits/s.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{RadioModel, RadioSection};

/// Version tag expected at the top of every profile file.
pub const SCHEMA_VERSION: u32 = 1;

/// Bytes of dequantization metadata (scale and zero point, two 32-bit
/// values) carried per tensor when the payload is quantized below 32 bits.
pub const QUANT_HEADER_BYTES: u64 = 8;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("profile parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("profile serialize error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("unsupported schema_version {0}, expected {SCHEMA_VERSION}")]
    SchemaVersion(u32),
    #[error("invalid `{field}`: {reason}")]
    Invariant { field: String, reason: String },
}

fn invariant(field: &str, reason: impl Into<String>) -> ProfileError {
    ProfileError::Invariant {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Errors from per-partition task derivation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("partition index {k_p} out of range 1..={k}")]
    PartitionOutOfRange { k_p: usize, k: usize },
    #[error(
        "{bits}-bit quantization is only permitted at the bottleneck \
         (index {bottleneck}), requested split {k_p}"
    )]
    QuantOffBottleneck {
        bits: u32,
        k_p: usize,
        bottleneck: usize,
    },
}

/// Payload precision for the bottleneck tensor on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum QuantBits {
    B8,
    B16,
    B32,
}

impl QuantBits {
    pub fn bits(self) -> u32 {
        match self {
            QuantBits::B8 => 8,
            QuantBits::B16 => 16,
            QuantBits::B32 => 32,
        }
    }

    pub fn bytes_per_element(self) -> u64 {
        (self.bits() / 8) as u64
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            8 => Some(QuantBits::B8),
            16 => Some(QuantBits::B16),
            32 => Some(QuantBits::B32),
            _ => None,
        }
    }
}

impl TryFrom<u8> for QuantBits {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        QuantBits::from_bits(v).ok_or_else(|| format!("quant bits must be 8, 16, or 32, got {v}"))
    }
}

impl From<QuantBits> for u8 {
    fn from(q: QuantBits) -> u8 {
        q.bits() as u8
    }
}

impl std::fmt::Display for QuantBits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.bits())
    }
}

/// Cost description of one sub-task (one pipeline stage or layer group).
///
/// At least one of `cycles` or `edge_latency_s` must be present. Measured
/// values take precedence over cycle-derived ones wherever both exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubTaskCost {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// CPU cycles required by this sub-task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<f64>,
    /// Measured execution latency on the edge device, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_latency_s: Option<f64>,
    /// Measured execution latency on the cloud server, seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud_latency_s: Option<f64>,
    /// Measured execution energy on the edge device, joules.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_energy_j: Option<f64>,
    /// Bytes of data produced by this sub-task.
    pub output_bytes: u64,
}

impl SubTaskCost {
    fn validate(&self, index: usize) -> Result<(), ProfileError> {
        let field = |suffix: &str| format!("model.subtasks[{index}].{suffix}");
        if self.cycles.is_none() && self.edge_latency_s.is_none() {
            return Err(invariant(
                &field("cycles"),
                "sub-task needs at least one of `cycles` or `edge_latency_s`",
            ));
        }
        for (suffix, value) in [
            ("cycles", self.cycles),
            ("edge_latency_s", self.edge_latency_s),
            ("cloud_latency_s", self.cloud_latency_s),
            ("edge_energy_j", self.edge_energy_j),
        ] {
            if let Some(v) = value {
                if !v.is_finite() || v < 0.0 {
                    return Err(invariant(&field(suffix), format!("must be >= 0, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Profiled DNN pipeline with a designated bottleneck split point.
///
/// Sub-task indices are 1-based throughout (`k_p` ranges over `1..=K`), so
/// `k_p = K` means everything executes locally. Multi-camera models are one
/// profile whose bottleneck payload is the concatenation of the per-camera
/// bottleneck tensors; `bottleneck_dims` gives the per-camera tensor shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelProfile {
    pub name: String,
    /// Identifier used on the wire (`model_id` in the request frame).
    #[serde(default)]
    pub wire_id: u16,
    pub num_cameras: u8,
    /// 1-based index of the bottleneck sub-task.
    pub bottleneck_index: usize,
    /// Per-camera bottleneck tensor shape: channels, height, width.
    pub bottleneck_dims: [u16; 3],
    /// Total scalar elements across all cameras at the bottleneck.
    pub bottleneck_elements: u64,
    /// Bytes returned by the cloud (the control result).
    pub result_bytes: u64,
    pub subtasks: Vec<SubTaskCost>,
}

impl ModelProfile {
    /// Number of sub-tasks K.
    pub fn num_subtasks(&self) -> usize {
        self.subtasks.len()
    }

    /// Sub-task by 1-based index.
    pub fn subtask(&self, k: usize) -> &SubTaskCost {
        &self.subtasks[k - 1]
    }

    /// Scalar elements per camera at the bottleneck.
    pub fn elements_per_camera(&self) -> u64 {
        let [c, h, w] = self.bottleneck_dims;
        c as u64 * h as u64 * w as u64
    }

    pub fn validate(&self) -> Result<(), ProfileError> {
        let k = self.subtasks.len();
        if k == 0 {
            return Err(invariant("model.subtasks", "need at least one sub-task"));
        }
        if self.bottleneck_index < 1 || self.bottleneck_index > k {
            return Err(invariant(
                "model.bottleneck_index",
                format!("must be in 1..={k}, got {}", self.bottleneck_index),
            ));
        }
        if self.num_cameras == 0 {
            return Err(invariant("model.num_cameras", "must be >= 1"));
        }
        for (i, sub) in self.subtasks.iter().enumerate() {
            sub.validate(i)?;
        }
        let expected_bytes = self.bottleneck_elements * 4;
        let actual = self.subtask(self.bottleneck_index).output_bytes;
        if actual != expected_bytes {
            return Err(invariant(
                "model.bottleneck_elements",
                format!(
                    "bottleneck output is {actual} B but {} elements require {expected_bytes} B \
                     at 32-bit precision",
                    self.bottleneck_elements
                ),
            ));
        }
        let dims_total = self.elements_per_camera() * self.num_cameras as u64;
        if dims_total != self.bottleneck_elements {
            return Err(invariant(
                "model.bottleneck_dims",
                format!(
                    "{} cameras x {:?} give {dims_total} elements, expected {}",
                    self.num_cameras, self.bottleneck_dims, self.bottleneck_elements
                ),
            ));
        }
        Ok(())
    }
}

/// Edge device description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProfile {
    pub name: String,
    /// Operational frequency, Hz. Required only for cycle-based sub-tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    /// Energy per CPU cycle, joules. Required only for cycle-based energy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_per_cycle_j: Option<f64>,
    /// Power drawn while idle-waiting for the cloud, watts.
    pub idle_power_w: f64,
    /// Power drawn while executing, watts (informational).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_power_w: Option<f64>,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if let Some(f) = self.frequency_hz {
            if !f.is_finite() || f <= 0.0 {
                return Err(invariant("device.frequency_hz", "must be > 0 when present"));
            }
        }
        if let Some(e) = self.energy_per_cycle_j {
            if !e.is_finite() || e < 0.0 {
                return Err(invariant("device.energy_per_cycle_j", "must be >= 0"));
            }
        }
        if !self.idle_power_w.is_finite() || self.idle_power_w < 0.0 {
            return Err(invariant("device.idle_power_w", "must be >= 0"));
        }
        Ok(())
    }
}

/// Cloud server description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerProfile {
    pub name: String,
    /// Operational frequency, Hz. Required only for cycle-based sub-tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<f64>,
    /// Measured whole-tail latency on the server, seconds. When present it
    /// is used for the remote span of a bottleneck split in preference to
    /// per-sub-task values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_tail_latency_s: Option<f64>,
}

impl ServerProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        if let Some(f) = self.frequency_hz {
            if !f.is_finite() || f <= 0.0 {
                return Err(invariant("server.frequency_hz", "must be > 0 when present"));
            }
        }
        if let Some(t) = self.fixed_tail_latency_s {
            if !t.is_finite() || t < 0.0 {
                return Err(invariant("server.fixed_tail_latency_s", "must be >= 0"));
            }
        }
        Ok(())
    }
}

/// Remaining work assigned to the server after a partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RemoteWork {
    /// `k_p = K`: nothing executes remotely.
    Empty,
    /// Total CPU cycles across the remote sub-tasks.
    Cycles(f64),
    /// Summed measured cloud latency across the remote sub-tasks, seconds.
    MeasuredLatency(f64),
    /// Remote cost is only resolvable with server context (for example a
    /// whole-tail measurement in [`ServerProfile::fixed_tail_latency_s`]);
    /// use [`crate::cost::estimate_comp`].
    External,
}

impl RemoteWork {
    pub fn is_empty(&self) -> bool {
        matches!(self, RemoteWork::Empty)
    }
}

/// Transfer sizes and remote work for one choice of partition point.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    /// Bytes uploaded to the server (bottleneck payload plus quantization
    /// headers when quantized below 32 bits).
    pub upload_bytes: u64,
    /// Bytes returned by the server.
    pub download_bytes: u64,
    pub remote_work: RemoteWork,
}

/// Computes transfer sizes and remote work for splitting `model` after
/// sub-task `k_p` (1-based) with the given payload precision.
///
/// `k_p = K` yields zero upload bytes and empty remote work (pure local
/// execution). Quantization below 32 bits is only permitted at the
/// bottleneck, where the payload shrinks to exactly 1/2 or 1/4 of the
/// 32-bit size plus [`QUANT_HEADER_BYTES`] per camera tensor.
pub fn derive_task_spec(
    model: &ModelProfile,
    k_p: usize,
    quant_bits: QuantBits,
) -> Result<TaskSpec, TaskError> {
    let k = model.num_subtasks();
    if k_p < 1 || k_p > k {
        return Err(TaskError::PartitionOutOfRange { k_p, k });
    }
    if quant_bits != QuantBits::B32 && k_p != model.bottleneck_index {
        return Err(TaskError::QuantOffBottleneck {
            bits: quant_bits.bits(),
            k_p,
            bottleneck: model.bottleneck_index,
        });
    }
    if k_p == k {
        return Ok(TaskSpec {
            upload_bytes: 0,
            download_bytes: model.result_bytes,
            remote_work: RemoteWork::Empty,
        });
    }

    let full_bytes = model.subtask(k_p).output_bytes;
    let upload_bytes = match quant_bits {
        QuantBits::B32 => full_bytes,
        QuantBits::B16 => full_bytes / 2 + QUANT_HEADER_BYTES * model.num_cameras as u64,
        QuantBits::B8 => full_bytes / 4 + QUANT_HEADER_BYTES * model.num_cameras as u64,
    };

    let remote = &model.subtasks[k_p..];
    let remote_work = if remote.iter().all(|s| s.cycles.is_some()) {
        RemoteWork::Cycles(remote.iter().map(|s| s.cycles.unwrap()).sum())
    } else if remote.iter().all(|s| s.cloud_latency_s.is_some()) {
        RemoteWork::MeasuredLatency(remote.iter().map(|s| s.cloud_latency_s.unwrap()).sum())
    } else {
        RemoteWork::External
    };

    Ok(TaskSpec {
        upload_bytes,
        download_bytes: model.result_bytes,
        remote_work,
    })
}

/// One loaded profile file: the device/server pair, the radio power model,
/// and the model description.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileBundle {
    pub device: DeviceProfile,
    pub server: ServerProfile,
    pub radio: RadioModel,
    pub model: ModelProfile,
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    schema_version: u32,
    device: DeviceProfile,
    server: ServerProfile,
    radio: RadioSection,
    model: ModelProfile,
}

/// Parses and validates a profile from TOML text.
pub fn parse_profile(text: &str) -> Result<ProfileBundle, ProfileError> {
    let file: ProfileFile = toml::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(ProfileError::SchemaVersion(file.schema_version));
    }
    let radio = file.radio.into_model()?;
    file.device.validate()?;
    file.server.validate()?;
    file.model.validate()?;
    Ok(ProfileBundle {
        device: file.device,
        server: file.server,
        radio,
        model: file.model,
    })
}

/// Loads and validates a profile file.
pub fn load_profile(path: impl AsRef<Path>) -> Result<ProfileBundle, ProfileError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_profile(&text)
}

/// Loads a profile file and returns just the model section.
pub fn load_model_profile(path: impl AsRef<Path>) -> Result<ModelProfile, ProfileError> {
    Ok(load_profile(path)?.model)
}

/// Serializes a bundle back to TOML (all fields explicit, so a load of the
/// output reproduces the bundle exactly).
pub fn profile_to_string(bundle: &ProfileBundle) -> Result<String, ProfileError> {
    let file = ProfileFile {
        schema_version: SCHEMA_VERSION,
        device: bundle.device.clone(),
        server: bundle.server.clone(),
        radio: RadioSection::from_model(&bundle.radio),
        model: bundle.model.clone(),
    };
    Ok(toml::to_string_pretty(&file)?)
}

pub fn save_profile(path: impl AsRef<Path>, bundle: &ProfileBundle) -> Result<(), ProfileError> {
    let path = path.as_ref();
    let text = profile_to_string(bundle)?;
    fs::write(path, text).map_err(|source| ProfileError::Io {
        path: path.display().to_string(),
        source,
    })
}
