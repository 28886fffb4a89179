//! Communication and computation cost models.
//!
//! Everything here is a pure function over immutable inputs. Upload and
//! download latencies divide payload bits by the *effective* data rates the
//! edge device currently experiences; no physical-layer modeling is
//! attempted. Computation costs resolve per sub-task, preferring measured
//! latencies/energies over cycle-derived ones.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiles::{DeviceProfile, ModelProfile, ProfileError, ServerProfile, TaskSpec};

#[derive(Debug, Error)]
pub enum CostError {
    #[error("partition index {k_p} out of range 1..={k}")]
    PartitionOutOfRange { k_p: usize, k: usize },
    #[error("sub-task {index} has no measured {side} latency and no cycle count")]
    MissingCost { index: usize, side: &'static str },
    #[error("sub-task {index} uses cycles but the {side} profile has no frequency")]
    MissingFrequency { index: usize, side: &'static str },
    #[error("sub-task {index} has no measured energy and the device has no energy_per_cycle_j")]
    MissingEnergyCoefficient { index: usize },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Effective network conditions at an instant: upload/download rates in
/// bits/s and the round-trip time in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSample {
    pub rate_up_bps: f64,
    pub rate_down_bps: f64,
    pub rtt_s: f64,
}

impl NetworkSample {
    pub fn new(rate_up_bps: f64, rate_down_bps: f64, rtt_s: f64) -> Self {
        debug_assert!(rate_up_bps > 0.0 && rate_down_bps > 0.0 && rtt_s >= 0.0);
        Self {
            rate_up_bps,
            rate_down_bps,
            rtt_s,
        }
    }

    /// Symmetric sample: the download rate defaults to the upload rate.
    pub fn symmetric(rate_bps: f64, rtt_s: f64) -> Self {
        Self::new(rate_bps, rate_bps, rtt_s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadioTechnology {
    #[serde(rename = "3g")]
    ThreeG,
    Lte,
    Wifi,
    Custom,
}

impl std::fmt::Display for RadioTechnology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RadioTechnology::ThreeG => "3g",
            RadioTechnology::Lte => "lte",
            RadioTechnology::Wifi => "wifi",
            RadioTechnology::Custom => "custom",
        };
        write!(f, "{s}")
    }
}

/// Radio transmit/receive power as an affine function of throughput:
/// `P(r) = base_w + per_bps_w * r`.
///
/// The shipped per-technology defaults are configurable placeholders taken
/// from the device-level regression models in Huang et al., "A Close
/// Examination of Performance and Power Characteristics of 4G LTE Networks"
/// (MobiSys 2012), Table 3; substitute coefficients measured on the target
/// radio for absolute energy numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub technology: RadioTechnology,
    pub tx_base_w: f64,
    pub tx_per_bps_w: f64,
    pub rx_base_w: f64,
    pub rx_per_bps_w: f64,
}

impl RadioModel {
    /// 3G: 817.88 mW base, 868.98 mW/Mbps uplink, 122.12 mW/Mbps downlink.
    pub fn threeg() -> Self {
        Self {
            technology: RadioTechnology::ThreeG,
            tx_base_w: 0.81788,
            tx_per_bps_w: 868.98e-9,
            rx_base_w: 0.81788,
            rx_per_bps_w: 122.12e-9,
        }
    }

    /// LTE: 1288.04 mW base, 438.39 mW/Mbps uplink, 51.97 mW/Mbps downlink.
    pub fn lte() -> Self {
        Self {
            technology: RadioTechnology::Lte,
            tx_base_w: 1.28804,
            tx_per_bps_w: 438.39e-9,
            rx_base_w: 1.28804,
            rx_per_bps_w: 51.97e-9,
        }
    }

    /// WiFi: 132.86 mW base, 283.17 mW/Mbps uplink, 137.01 mW/Mbps downlink.
    pub fn wifi() -> Self {
        Self {
            technology: RadioTechnology::Wifi,
            tx_base_w: 0.13286,
            tx_per_bps_w: 283.17e-9,
            rx_base_w: 0.13286,
            rx_per_bps_w: 137.01e-9,
        }
    }

    pub fn custom(tx_base_w: f64, tx_per_bps_w: f64, rx_base_w: f64, rx_per_bps_w: f64) -> Self {
        Self {
            technology: RadioTechnology::Custom,
            tx_base_w,
            tx_per_bps_w,
            rx_base_w,
            rx_per_bps_w,
        }
    }

    /// Constant transmit/receive powers, independent of rate.
    pub fn constant(tx_w: f64, rx_w: f64) -> Self {
        Self::custom(tx_w, 0.0, rx_w, 0.0)
    }

    pub fn by_technology(tech: RadioTechnology) -> Self {
        match tech {
            RadioTechnology::ThreeG => Self::threeg(),
            RadioTechnology::Lte => Self::lte(),
            RadioTechnology::Wifi => Self::wifi(),
            RadioTechnology::Custom => Self::constant(0.0, 0.0),
        }
    }

    /// Transmit power at the given upload rate, watts.
    pub fn tx_power_w(&self, rate_bps: f64) -> f64 {
        self.tx_base_w + self.tx_per_bps_w * rate_bps
    }

    /// Receive power at the given download rate, watts.
    pub fn rx_power_w(&self, rate_bps: f64) -> f64 {
        self.rx_base_w + self.rx_per_bps_w * rate_bps
    }
}

/// `[radio]` section of the profile file. Coefficients are optional on load
/// (the technology defaults fill the gaps) but always written explicitly.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RadioSection {
    technology: RadioTechnology,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tx_base_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tx_per_bps_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rx_base_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rx_per_bps_w: Option<f64>,
}

impl RadioSection {
    pub(crate) fn from_model(model: &RadioModel) -> Self {
        Self {
            technology: model.technology,
            tx_base_w: Some(model.tx_base_w),
            tx_per_bps_w: Some(model.tx_per_bps_w),
            rx_base_w: Some(model.rx_base_w),
            rx_per_bps_w: Some(model.rx_per_bps_w),
        }
    }

    pub(crate) fn into_model(self) -> Result<RadioModel, ProfileError> {
        let defaults = RadioModel::by_technology(self.technology);
        let model = RadioModel {
            technology: self.technology,
            tx_base_w: self.tx_base_w.unwrap_or(defaults.tx_base_w),
            tx_per_bps_w: self.tx_per_bps_w.unwrap_or(defaults.tx_per_bps_w),
            rx_base_w: self.rx_base_w.unwrap_or(defaults.rx_base_w),
            rx_per_bps_w: self.rx_per_bps_w.unwrap_or(defaults.rx_per_bps_w),
        };
        for (field, v) in [
            ("radio.tx_base_w", model.tx_base_w),
            ("radio.tx_per_bps_w", model.tx_per_bps_w),
            ("radio.rx_base_w", model.rx_base_w),
            ("radio.rx_per_bps_w", model.rx_per_bps_w),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(ProfileError::Invariant {
                    field: field.to_string(),
                    reason: format!("must be >= 0, got {v}"),
                });
            }
        }
        Ok(model)
    }
}

/// Communication overhead for one offloaded task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommEstimate {
    pub t_upload_s: f64,
    pub t_download_s: f64,
    /// Total: upload + download + round trip.
    pub t_comm_s: f64,
    /// Radio energy: tx power x upload time + rx power x download time.
    pub e_comm_j: f64,
}

/// Communication latency and energy for transferring `task` under `net`.
pub fn estimate_comm(task: &TaskSpec, net: &NetworkSample, radio: &RadioModel) -> CommEstimate {
    let t_upload_s = task.upload_bytes as f64 * 8.0 / net.rate_up_bps;
    let t_download_s = task.download_bytes as f64 * 8.0 / net.rate_down_bps;
    let t_comm_s = t_upload_s + t_download_s + net.rtt_s;
    let e_comm_j = radio.tx_power_w(net.rate_up_bps) * t_upload_s
        + radio.rx_power_w(net.rate_down_bps) * t_download_s;
    CommEstimate {
        t_upload_s,
        t_download_s,
        t_comm_s,
        e_comm_j,
    }
}

/// Computation latency and energy split across edge and server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompEstimate {
    /// Summed latency of the local sub-tasks 1..=k_p, seconds.
    pub t_local_s: f64,
    /// Summed latency of the remote sub-tasks k_p+1..=K, seconds.
    pub t_remote_s: f64,
    /// Edge energy for the local sub-tasks, joules.
    pub e_local_j: f64,
    /// Edge energy spent idle-waiting for the server, joules.
    pub e_idle_j: f64,
}

fn subtask_local_latency(
    model: &ModelProfile,
    device: &DeviceProfile,
    k: usize,
) -> Result<f64, CostError> {
    let sub = model.subtask(k);
    if let Some(t) = sub.edge_latency_s {
        return Ok(t);
    }
    let cycles = sub.cycles.ok_or(CostError::MissingCost {
        index: k,
        side: "edge",
    })?;
    match device.frequency_hz {
        Some(f) if f > 0.0 => Ok(cycles / f),
        _ => Err(CostError::MissingFrequency {
            index: k,
            side: "device",
        }),
    }
}

fn subtask_local_energy(
    model: &ModelProfile,
    device: &DeviceProfile,
    k: usize,
) -> Result<f64, CostError> {
    let sub = model.subtask(k);
    if let Some(e) = sub.edge_energy_j {
        return Ok(e);
    }
    let cycles = sub.cycles.ok_or(CostError::MissingEnergyCoefficient { index: k })?;
    match device.energy_per_cycle_j {
        Some(theta) => Ok(theta * cycles),
        None => Err(CostError::MissingEnergyCoefficient { index: k }),
    }
}

fn subtask_remote_latency(
    model: &ModelProfile,
    server: &ServerProfile,
    k: usize,
) -> Result<f64, CostError> {
    let sub = model.subtask(k);
    if let Some(t) = sub.cloud_latency_s {
        return Ok(t);
    }
    let cycles = sub.cycles.ok_or(CostError::MissingCost {
        index: k,
        side: "cloud",
    })?;
    match server.frequency_hz {
        Some(f) if f > 0.0 => Ok(cycles / f),
        _ => Err(CostError::MissingFrequency {
            index: k,
            side: "server",
        }),
    }
}

/// Summed local latency of sub-tasks 1..=k_p.
pub fn local_span_latency(
    model: &ModelProfile,
    device: &DeviceProfile,
    k_p: usize,
) -> Result<f64, CostError> {
    let mut total = 0.0;
    for k in 1..=k_p {
        total += subtask_local_latency(model, device, k)?;
    }
    Ok(total)
}

/// Summed local energy of sub-tasks 1..=k_p.
pub fn local_span_energy(
    model: &ModelProfile,
    device: &DeviceProfile,
    k_p: usize,
) -> Result<f64, CostError> {
    let mut total = 0.0;
    for k in 1..=k_p {
        total += subtask_local_energy(model, device, k)?;
    }
    Ok(total)
}

/// Summed server latency of the remote span k_p+1..=K.
///
/// A split at the bottleneck prefers the measured whole-tail value in
/// [`ServerProfile::fixed_tail_latency_s`] when present; otherwise each
/// remote sub-task resolves individually.
pub fn remote_span_latency(
    model: &ModelProfile,
    server: &ServerProfile,
    k_p: usize,
) -> Result<f64, CostError> {
    if k_p >= model.num_subtasks() {
        return Ok(0.0);
    }
    if k_p == model.bottleneck_index {
        if let Some(t) = server.fixed_tail_latency_s {
            return Ok(t);
        }
    }
    let mut total = 0.0;
    for k in k_p + 1..=model.num_subtasks() {
        total += subtask_remote_latency(model, server, k)?;
    }
    Ok(total)
}

/// Edge latency of the head: sub-tasks up to and including the bottleneck.
pub fn edge_head_latency(model: &ModelProfile, device: &DeviceProfile) -> Result<f64, CostError> {
    local_span_latency(model, device, model.bottleneck_index)
}

/// Edge energy of the head.
pub fn edge_head_energy(model: &ModelProfile, device: &DeviceProfile) -> Result<f64, CostError> {
    local_span_energy(model, device, model.bottleneck_index)
}

/// Edge latency of the tail: sub-tasks after the bottleneck.
pub fn edge_tail_latency(model: &ModelProfile, device: &DeviceProfile) -> Result<f64, CostError> {
    let mut total = 0.0;
    for k in model.bottleneck_index + 1..=model.num_subtasks() {
        total += subtask_local_latency(model, device, k)?;
    }
    Ok(total)
}

/// Edge energy of the tail (the energy the device avoids by offloading).
pub fn edge_tail_energy(model: &ModelProfile, device: &DeviceProfile) -> Result<f64, CostError> {
    let mut total = 0.0;
    for k in model.bottleneck_index + 1..=model.num_subtasks() {
        total += subtask_local_energy(model, device, k)?;
    }
    Ok(total)
}

/// Server latency of the tail after a bottleneck split.
pub fn cloud_tail_latency(model: &ModelProfile, server: &ServerProfile) -> Result<f64, CostError> {
    remote_span_latency(model, server, model.bottleneck_index)
}

/// Computation costs for splitting after sub-task `k_p` (1-based).
///
/// `wait_s` is the idle interval the edge spends waiting for the server; for
/// planning purposes callers derive it as remote latency + download time +
/// round trip, and at runtime the measured wait replaces it. It must be 0
/// when `k_p = K`.
pub fn estimate_comp(
    model: &ModelProfile,
    k_p: usize,
    device: &DeviceProfile,
    server: &ServerProfile,
    wait_s: f64,
) -> Result<CompEstimate, CostError> {
    let k = model.num_subtasks();
    if k_p < 1 || k_p > k {
        return Err(CostError::PartitionOutOfRange { k_p, k });
    }
    debug_assert!(wait_s >= 0.0);
    debug_assert!(k_p < k || wait_s == 0.0);
    let t_local_s = local_span_latency(model, device, k_p)?;
    let e_local_j = local_span_energy(model, device, k_p)?;
    let t_remote_s = remote_span_latency(model, server, k_p)?;
    let e_idle_j = device.idle_power_w * wait_s;
    Ok(CompEstimate {
        t_local_s,
        t_remote_s,
        e_local_j,
        e_idle_j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{RemoteWork, SubTaskCost};

    fn cycle_model(cycles: &[f64]) -> ModelProfile {
        ModelProfile {
            name: "cycles".into(),
            wire_id: 0,
            num_cameras: 1,
            bottleneck_index: 1,
            bottleneck_dims: [1, 1, 25],
            bottleneck_elements: 25,
            result_bytes: 26,
            subtasks: cycles
                .iter()
                .map(|&c| SubTaskCost {
                    name: None,
                    cycles: Some(c),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 100,
                })
                .collect(),
        }
    }

    fn device(freq: f64, theta: f64, idle: f64) -> DeviceProfile {
        DeviceProfile {
            name: "dev".into(),
            frequency_hz: Some(freq),
            energy_per_cycle_j: Some(theta),
            idle_power_w: idle,
            active_power_w: None,
        }
    }

    fn server(freq: f64) -> ServerProfile {
        ServerProfile {
            name: "srv".into(),
            frequency_hz: Some(freq),
            fixed_tail_latency_s: None,
        }
    }

    fn task(upload: u64, download: u64) -> TaskSpec {
        TaskSpec {
            upload_bytes: upload,
            download_bytes: download,
            remote_work: RemoteWork::External,
        }
    }

    #[test]
    fn zero_data_comm_is_rtt_only() {
        let net = NetworkSample::symmetric(10e6, 0.010);
        let est = estimate_comm(&task(0, 0), &net, &RadioModel::lte());
        assert_eq!(est.t_comm_s, 0.010);
        assert_eq!(est.e_comm_j, 0.0);
    }

    #[test]
    fn comm_hand_arithmetic() {
        // 50,000 B up and 12 B down at 10 Mbps each, 10 ms RTT, constant
        // 1.2 W tx / 0.8 W rx. Expected: 40 ms up, 9.6 us down,
        // 50.0096 ms total, 0.04800768 J.
        let net = NetworkSample::symmetric(10e6, 0.010);
        let radio = RadioModel::constant(1.2, 0.8);
        let est = estimate_comm(&task(50_000, 12), &net, &radio);
        assert!((est.t_upload_s - 0.040).abs() < 1e-15);
        assert!((est.t_download_s - 9.6e-6).abs() < 1e-18);
        assert!((est.t_comm_s - 0.0500096).abs() < 1e-12);
        assert!((est.e_comm_j - 0.04800768).abs() < 1e-12);
    }

    #[test]
    fn all_cloud_720p_upload_just_meets_deadline() {
        // Three raw 720p frames are 8,294,400 B; at 664 Mbps the upload
        // takes 99.93 ms.
        let net = NetworkSample::symmetric(664e6, 0.0);
        let est = estimate_comm(&task(8_294_400, 0), &net, &RadioModel::wifi());
        assert!((est.t_upload_s - 0.09993).abs() < 1e-5);
        assert!(est.t_upload_s < 0.100);
    }

    #[test]
    fn doubling_rate_exactly_halves_upload_time() {
        let radio = RadioModel::wifi();
        let mut bytes = 13u64;
        for i in 1..40 {
            bytes = bytes.wrapping_mul(2654435761).wrapping_add(i) % 10_000_000 + 1;
            let rate = 1e5 + (i as f64) * 7.3e5;
            let t1 = estimate_comm(&task(bytes, 0), &NetworkSample::symmetric(rate, 0.0), &radio);
            let t2 = estimate_comm(
                &task(bytes, 0),
                &NetworkSample::new(2.0 * rate, rate, 0.0),
                &radio,
            );
            assert_eq!(t2.t_upload_s, t1.t_upload_s / 2.0);
        }
    }

    #[test]
    fn comm_energy_linear_in_upload_bytes_at_constant_power() {
        let radio = RadioModel::constant(1.5, 0.7);
        let net = NetworkSample::symmetric(20e6, 0.003);
        let e1 = estimate_comm(&task(10_000, 0), &net, &radio).e_comm_j;
        let e3 = estimate_comm(&task(30_000, 0), &net, &radio).e_comm_j;
        assert!((e3 - 3.0 * e1).abs() < 1e-15);
    }

    #[test]
    fn cycle_latency_and_energy() {
        // 1e9 cycles at 2 GHz -> 0.5 s; theta 1e-9 J/cycle -> 1 J.
        let model = cycle_model(&[1e9]);
        let dev = device(2e9, 1e-9, 0.0);
        let comp = estimate_comp(&model, 1, &dev, &server(4e9), 0.0).unwrap();
        assert_eq!(comp.t_local_s, 0.5);
        assert_eq!(comp.e_local_j, 1.0);
    }

    #[test]
    fn measured_values_win_over_cycles() {
        let mut model = cycle_model(&[1e9]);
        model.subtasks[0].edge_latency_s = Some(0.123);
        model.subtasks[0].edge_energy_j = Some(0.456);
        let comp = estimate_comp(&model, 1, &device(2e9, 1e-9, 0.0), &server(4e9), 0.0).unwrap();
        assert_eq!(comp.t_local_s, 0.123);
        assert_eq!(comp.e_local_j, 0.456);
    }

    #[test]
    fn full_local_has_no_remote_and_no_idle() {
        let model = cycle_model(&[1e8, 2e8, 3e8]);
        let comp = estimate_comp(&model, 3, &device(1e9, 1e-9, 5.0), &server(4e9), 0.0).unwrap();
        assert_eq!(comp.t_remote_s, 0.0);
        assert_eq!(comp.e_idle_j, 0.0);
        assert!((comp.t_local_s - 0.6).abs() < 1e-15);
    }

    #[test]
    fn full_local_ignores_server() {
        let model = cycle_model(&[1e8, 2e8]);
        let dev = device(1e9, 1e-9, 5.0);
        let a = estimate_comp(&model, 2, &dev, &server(1.0), 0.0).unwrap();
        let b = estimate_comp(&model, 2, &dev, &server(9e12), 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_cost_with_missing_frequency_errors() {
        let model = cycle_model(&[1e8]);
        let dev = DeviceProfile {
            name: "nofreq".into(),
            frequency_hz: None,
            energy_per_cycle_j: Some(1e-9),
            idle_power_w: 0.0,
            active_power_w: None,
        };
        let err = estimate_comp(&model, 1, &dev, &server(4e9), 0.0).unwrap_err();
        assert!(matches!(
            err,
            CostError::MissingFrequency {
                index: 1,
                side: "device"
            }
        ));
    }

    #[test]
    fn fixed_tail_latency_used_at_bottleneck_split() {
        // Measured head/tail profile without per-sub-task cloud latencies:
        // the server's whole-tail measurement covers the remote span.
        let mut model = cycle_model(&[1e8, 2e8]);
        model.subtasks[0].edge_latency_s = Some(0.008);
        model.subtasks[1].edge_latency_s = Some(0.2);
        model.subtasks[0].edge_energy_j = Some(0.04);
        model.subtasks[1].edge_energy_j = Some(1.1);
        model.subtasks[0].cycles = None;
        model.subtasks[1].cycles = None;
        let srv = ServerProfile {
            name: "srv".into(),
            frequency_hz: None,
            fixed_tail_latency_s: Some(0.002238),
        };
        let comp = estimate_comp(&model, 1, &device(1e9, 1e-9, 1.0), &srv, 0.0).unwrap();
        assert_eq!(comp.t_remote_s, 0.002238);

        // Off-bottleneck splits cannot resolve the remote span.
        let err = remote_span_latency(&model, &srv, 0).unwrap_err();
        assert!(matches!(err, CostError::MissingCost { side: "cloud", .. }));
    }

    #[test]
    fn idle_energy_scales_with_wait() {
        let model = cycle_model(&[1e8, 2e8]);
        let dev = device(1e9, 1e-9, 4.0);
        let comp = estimate_comp(&model, 1, &dev, &server(4e9), 0.025).unwrap();
        assert!((comp.e_idle_j - 0.1).abs() < 1e-15);
    }
}
