//! Partition objective, rate threshold, and the binary offload decision.
//!
//! The general problem weighs total latency against edge energy over all
//! candidate partition points under a hard deadline. With a dominant
//! bottleneck it collapses to a binary choice per timestep: offload at the
//! bottleneck when the measured upload rate clears a threshold derived from
//! the residual deadline budget, and only when offloading is also predicted
//! to save edge energy.

use crate::cost::{
    cloud_tail_latency, edge_head_energy, edge_head_latency, edge_tail_energy, estimate_comm,
    estimate_comp, CostError, NetworkSample, RadioModel,
};
use crate::profiles::{
    derive_task_spec, DeviceProfile, ModelProfile, QuantBits, ServerProfile, TaskError,
};

/// Control-cycle deadline: the window within which each input must produce a
/// control output.
pub const DEFAULT_DEADLINE_S: f64 = 0.100;

impl From<TaskError> for CostError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::PartitionOutOfRange { k_p, k } => CostError::PartitionOutOfRange { k_p, k },
            TaskError::QuantOffBottleneck { k_p, .. } => CostError::PartitionOutOfRange {
                k_p,
                k: usize::MAX,
            },
        }
    }
}

/// Everything fixed about one edge/cloud pairing: the model and the hardware
/// and radio it runs on. Network conditions vary per call.
#[derive(Debug, Clone, Copy)]
pub struct Deployment<'a> {
    pub model: &'a ModelProfile,
    pub device: &'a DeviceProfile,
    pub server: &'a ServerProfile,
    pub radio: &'a RadioModel,
}

impl<'a> Deployment<'a> {
    pub fn from_bundle(bundle: &'a crate::profiles::ProfileBundle) -> Self {
        Self {
            model: &bundle.model,
            device: &bundle.device,
            server: &bundle.server,
            radio: &bundle.radio,
        }
    }
}

/// Relative weights for the latency and energy terms of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyWeights {
    pub w_t: f64,
    pub w_e: f64,
}

impl PolicyWeights {
    /// Weights must lie in [0, 1].
    pub fn new(w_t: f64, w_e: f64) -> Option<Self> {
        if (0.0..=1.0).contains(&w_t) && (0.0..=1.0).contains(&w_e) {
            Some(Self { w_t, w_e })
        } else {
            None
        }
    }

    pub fn latency_only() -> Self {
        Self { w_t: 1.0, w_e: 0.0 }
    }
}

impl Default for PolicyWeights {
    fn default() -> Self {
        Self { w_t: 0.5, w_e: 0.5 }
    }
}

/// Evaluated objective for one candidate partition point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionPlan {
    /// Chosen partition index, 1-based; `k_p = K` is full local execution.
    pub k_p: usize,
    /// Weighted objective value.
    pub cost: f64,
    /// Predicted end-to-end latency, seconds.
    pub latency_s: f64,
    /// Predicted edge energy, joules.
    pub energy_j: f64,
    /// Whether the predicted latency meets the deadline.
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Local,
    Offload,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Local => write!(f, "local"),
            Verdict::Offload => write!(f, "offload"),
        }
    }
}

/// Per-timestep offload verdict with the threshold that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffloadDecision {
    pub verdict: Verdict,
    /// Upload-rate threshold, bits/s; `f64::INFINITY` when the deadline
    /// cannot be met by offloading at any rate.
    pub r_th_bps: f64,
    /// Plan for the chosen path. Its `cost` field uses default weights; the
    /// threshold decision itself is weight-free.
    pub predicted: PartitionPlan,
}

/// Objective value for splitting after sub-task `k_p` at full precision.
///
/// Communication terms are gated out entirely when `k_p = K`: latency is
/// `t_comm + (t_local + t_remote)` for a real split and `t_local` otherwise,
/// energy is `e_comm + (e_local + e_idle)` and `e_local` respectively, with
/// the planning idle wait taken as remote latency + download time + RTT.
pub fn objective_cost(
    dep: &Deployment,
    k_p: usize,
    net: &NetworkSample,
    weights: &PolicyWeights,
    deadline_s: f64,
) -> Result<PartitionPlan, CostError> {
    let k = dep.model.num_subtasks();
    let task = derive_task_spec(dep.model, k_p, QuantBits::B32)?;
    let (latency_s, energy_j) = if k_p == k {
        let comp = estimate_comp(dep.model, k_p, dep.device, dep.server, 0.0)?;
        (comp.t_local_s, comp.e_local_j)
    } else {
        let comm = estimate_comm(&task, net, dep.radio);
        let remote_s = estimate_comp(dep.model, k_p, dep.device, dep.server, 0.0)?.t_remote_s;
        let wait_s = remote_s + comm.t_download_s + net.rtt_s;
        let comp = estimate_comp(dep.model, k_p, dep.device, dep.server, wait_s)?;
        let t_comp = comp.t_local_s + comp.t_remote_s;
        let e_comp = comp.e_local_j + comp.e_idle_j;
        (comm.t_comm_s + t_comp, comm.e_comm_j + e_comp)
    };
    let cost = weights.w_t * latency_s + weights.w_e * energy_j;
    Ok(PartitionPlan {
        k_p,
        cost,
        latency_s,
        energy_j,
        feasible: latency_s <= deadline_s,
    })
}

/// Exhaustive minimization of [`objective_cost`] over all partition points.
///
/// Deadline-feasible plans are preferred; if none exists the minimum-latency
/// plan is returned flagged infeasible. Ties break toward larger `k_p`
/// (keeping work local).
pub fn optimize_partition(
    dep: &Deployment,
    net: &NetworkSample,
    weights: &PolicyWeights,
    deadline_s: f64,
) -> Result<PartitionPlan, CostError> {
    let k = dep.model.num_subtasks();
    let mut best: Option<PartitionPlan> = None;
    for k_p in 1..=k {
        let plan = objective_cost(dep, k_p, net, weights, deadline_s)?;
        best = Some(match best {
            None => plan,
            Some(cur) => {
                let replace = match (plan.feasible, cur.feasible) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => plan.cost <= cur.cost,
                    (false, false) => plan.latency_s <= cur.latency_s,
                };
                if replace {
                    plan
                } else {
                    cur
                }
            }
        });
    }
    Ok(best.expect("model has at least one sub-task"))
}

/// The threshold formula itself: upload bits over the residual deadline
/// budget `deadline - (t_head + t_tail_cloud + t_download + rtt)`.
///
/// Returns `f64::INFINITY` when the budget is non-positive, i.e. the
/// non-transmission terms already exceed the deadline. Homogeneous of
/// degree 1 in `upload_bits` at a fixed budget.
pub fn rate_threshold(
    upload_bits: f64,
    deadline_s: f64,
    t_head_s: f64,
    t_tail_cloud_s: f64,
    t_download_s: f64,
    rtt_s: f64,
) -> f64 {
    let budget = deadline_s - (t_head_s + t_tail_cloud_s + t_download_s + rtt_s);
    if budget <= 0.0 {
        f64::INFINITY
    } else {
        upload_bits / budget
    }
}

/// Upload-rate threshold for offloading at the bottleneck under the current
/// RTT and download rate. Infeasibility is the `INFINITY` sentinel, not an
/// error, so rate sweeps can plot it.
pub fn compute_r_th(
    dep: &Deployment,
    net: &NetworkSample,
    quant_bits: QuantBits,
    deadline_s: f64,
) -> Result<f64, CostError> {
    let task = derive_task_spec(dep.model, dep.model.bottleneck_index, quant_bits)?;
    let t_head = edge_head_latency(dep.model, dep.device)?;
    let t_tail_cloud = cloud_tail_latency(dep.model, dep.server)?;
    let t_download = task.download_bytes as f64 * 8.0 / net.rate_down_bps;
    Ok(rate_threshold(
        task.upload_bytes as f64 * 8.0,
        deadline_s,
        t_head,
        t_tail_cloud,
        t_download,
        net.rtt_s,
    ))
}

/// The per-timestep binary decision.
///
/// Offloads at the bottleneck iff the measured upload rate exceeds a finite,
/// positive threshold *and* the predicted offload-side energy (radio plus
/// idle wait) undercuts the edge tail energy it replaces. Otherwise the tail
/// runs locally.
pub fn decide_offload(
    dep: &Deployment,
    net: &NetworkSample,
    quant_bits: QuantBits,
    deadline_s: f64,
) -> Result<OffloadDecision, CostError> {
    let model = dep.model;
    let r_th = compute_r_th(dep, net, quant_bits, deadline_s)?;

    let task = derive_task_spec(model, model.bottleneck_index, quant_bits)?;
    let comm = estimate_comm(&task, net, dep.radio);
    let t_head = edge_head_latency(model, dep.device)?;
    let e_head = edge_head_energy(model, dep.device)?;
    let t_tail_cloud = cloud_tail_latency(model, dep.server)?;
    let e_tail_edge = edge_tail_energy(model, dep.device)?;
    let wait_s = t_tail_cloud + comm.t_download_s + net.rtt_s;
    let e_idle = dep.device.idle_power_w * wait_s;

    let offload = net.rate_up_bps > r_th
        && r_th.is_finite()
        && r_th > 0.0
        && comm.e_comm_j + e_idle < e_tail_edge;

    let weights = PolicyWeights::default();
    let predicted = if offload {
        let latency_s = comm.t_comm_s + (t_head + t_tail_cloud);
        let energy_j = comm.e_comm_j + (e_head + e_idle);
        PartitionPlan {
            k_p: model.bottleneck_index,
            cost: weights.w_t * latency_s + weights.w_e * energy_j,
            latency_s,
            energy_j,
            feasible: latency_s <= deadline_s,
        }
    } else {
        let k = model.num_subtasks();
        let comp = estimate_comp(model, k, dep.device, dep.server, 0.0)?;
        PartitionPlan {
            k_p: k,
            cost: weights.w_t * comp.t_local_s + weights.w_e * comp.e_local_j,
            latency_s: comp.t_local_s,
            energy_j: comp.e_local_j,
            feasible: comp.t_local_s <= deadline_s,
        }
    };

    Ok(OffloadDecision {
        verdict: if offload {
            Verdict::Offload
        } else {
            Verdict::Local
        },
        r_th_bps: r_th,
        predicted,
    })
}

/// One row of a split-point comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPoint {
    pub k_p: usize,
    /// End-to-end latency of splitting here, seconds.
    pub latency_s: f64,
    /// Bytes this split would ship to the server.
    pub payload_bytes: u64,
}

/// End-to-end latency and payload for every candidate split point at full
/// precision, ordered by `k_p`.
pub fn scan_split_points(dep: &Deployment, net: &NetworkSample) -> Result<Vec<SplitPoint>, CostError> {
    let k = dep.model.num_subtasks();
    let mut points = Vec::with_capacity(k);
    for k_p in 1..=k {
        let plan = objective_cost(dep, k_p, net, &PolicyWeights::latency_only(), DEFAULT_DEADLINE_S)?;
        let task = derive_task_spec(dep.model, k_p, QuantBits::B32)?;
        points.push(SplitPoint {
            k_p,
            latency_s: plan.latency_s,
            payload_bytes: task.upload_bytes,
        });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::SubTaskCost;
    use crate::rng::SplitMix64;

    fn table_style_model() -> ModelProfile {
        // Measured head/tail rows in the shape of the shipped profiles:
        // head 8.043 ms / 0.0437 J, tail 207.5 ms / 1.1303 J, cloud tail
        // 2.238 ms, payload 3,300 B.
        ModelProfile {
            name: "measured".into(),
            wire_id: 1,
            num_cameras: 1,
            bottleneck_index: 1,
            bottleneck_dims: [3, 11, 25],
            bottleneck_elements: 825,
            result_bytes: 26,
            subtasks: vec![
                SubTaskCost {
                    name: Some("head".into()),
                    cycles: None,
                    edge_latency_s: Some(0.008043),
                    cloud_latency_s: None,
                    edge_energy_j: Some(0.0437),
                    output_bytes: 3300,
                },
                SubTaskCost {
                    name: Some("tail".into()),
                    cycles: None,
                    edge_latency_s: Some(0.2075),
                    cloud_latency_s: Some(0.002238),
                    edge_energy_j: Some(1.1303),
                    output_bytes: 26,
                },
            ],
        }
    }

    fn tx2() -> DeviceProfile {
        DeviceProfile {
            name: "tx2".into(),
            frequency_hz: None,
            energy_per_cycle_j: None,
            idle_power_w: 1.659,
            active_power_w: Some(5.446),
        }
    }

    fn plain_server() -> ServerProfile {
        ServerProfile {
            name: "srv".into(),
            frequency_hz: None,
            fixed_tail_latency_s: None,
        }
    }

    fn cycle_server(freq: f64) -> ServerProfile {
        ServerProfile {
            name: "srv".into(),
            frequency_hz: Some(freq),
            fixed_tail_latency_s: None,
        }
    }

    /// Random cycle-based profile with K <= 8 sub-tasks. Idle power is drawn
    /// below the active compute power (theta x frequency), as on real boards.
    fn random_cycle_model(rng: &mut SplitMix64) -> (ModelProfile, DeviceProfile, ServerProfile) {
        let k = 1 + (rng.next_below(8)) as usize;
        let bottleneck = 1 + rng.next_below(k as u64) as usize;
        let subtasks: Vec<SubTaskCost> = (0..k)
            .map(|_| SubTaskCost {
                name: None,
                cycles: Some(1e6 + rng.next_f64() * 5e7),
                edge_latency_s: None,
                cloud_latency_s: None,
                edge_energy_j: None,
                output_bytes: 4 * (1024 + rng.next_below(49_152)),
            })
            .collect();
        let payload = subtasks[bottleneck - 1].output_bytes;
        let model = ModelProfile {
            name: "rand".into(),
            wire_id: 0,
            num_cameras: 1,
            bottleneck_index: bottleneck,
            bottleneck_dims: [1, 1, 1],
            bottleneck_elements: payload / 4,
            result_bytes: rng.next_below(64),
            subtasks,
        };
        let frequency_hz = 5e8 + rng.next_f64() * 3e9;
        let energy_per_cycle_j = 1e-10 + rng.next_f64() * 3e-9;
        let active_w = energy_per_cycle_j * frequency_hz;
        let device = DeviceProfile {
            name: "dev".into(),
            frequency_hz: Some(frequency_hz),
            energy_per_cycle_j: Some(energy_per_cycle_j),
            idle_power_w: (0.05 + 0.85 * rng.next_f64()) * active_w,
            active_power_w: Some(active_w),
        };
        let server = cycle_server(5e9 + rng.next_f64() * 2e10);
        (model, device, server)
    }

    #[test]
    fn local_cost_has_no_communication_terms() {
        let model = table_style_model();
        let device = tx2();
        let server = plain_server();
        let radio = RadioModel::lte();
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let weights = PolicyWeights::default();
        let slow = NetworkSample::symmetric(1e3, 5.0);
        let fast = NetworkSample::symmetric(1e9, 0.0);
        let a = objective_cost(&dep, 2, &slow, &weights, DEFAULT_DEADLINE_S).unwrap();
        let b = objective_cost(&dep, 2, &fast, &weights, DEFAULT_DEADLINE_S).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn latency_only_local_cost_is_e2e_latency() {
        let model = table_style_model();
        let device = tx2();
        let server = plain_server();
        let radio = RadioModel::lte();
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let plan = objective_cost(
            &dep,
            2,
            &NetworkSample::symmetric(10e6, 0.010),
            &PolicyWeights::latency_only(),
            DEFAULT_DEADLINE_S,
        )
        .unwrap();
        assert!((plan.cost - 0.215543).abs() < 1e-9);
        assert!(!plan.feasible);
    }

    #[test]
    fn toy_objective_matches_hand_computation() {
        // K=2, cycles [1e7, 2e7] at 1 GHz edge / 10 GHz server, theta 1e-9,
        // idle 2 W, payload 1000 B up / 26 B down at 10 Mbps, rtt 10 ms,
        // constant 1 W / 1 W radio, equal weights 0.5/0.5.
        let model = ModelProfile {
            name: "toy".into(),
            wire_id: 0,
            num_cameras: 1,
            bottleneck_index: 1,
            bottleneck_dims: [1, 1, 250],
            bottleneck_elements: 250,
            result_bytes: 26,
            subtasks: vec![
                SubTaskCost {
                    name: None,
                    cycles: Some(1e7),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 1000,
                },
                SubTaskCost {
                    name: None,
                    cycles: Some(2e7),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 26,
                },
            ],
        };
        let device = DeviceProfile {
            name: "dev".into(),
            frequency_hz: Some(1e9),
            energy_per_cycle_j: Some(1e-9),
            idle_power_w: 2.0,
            active_power_w: None,
        };
        let server = cycle_server(1e10);
        let radio = RadioModel::constant(1.0, 1.0);
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let net = NetworkSample::symmetric(10e6, 0.010);
        let weights = PolicyWeights::default();
        let plan = objective_cost(&dep, 1, &net, &weights, DEFAULT_DEADLINE_S).unwrap();

        // By hand: t_up = 8000/1e7 = 0.8 ms, t_down = 208/1e7 = 20.8 us,
        // t_comm = 10.8208 ms; t_local = 10 ms, t_remote = 2 ms;
        // e_comm = 1*(t_up + t_down); wait = 2 ms + 20.8 us + 10 ms;
        // e_local = 0.01 J; e_idle = 2 * wait.
        let t_up = 8000.0 / 1e7;
        let t_down = 208.0 / 1e7;
        let latency = (t_up + t_down + 0.010) + (0.010 + 0.002);
        let wait = 0.002 + t_down + 0.010;
        let energy = (1.0 * t_up + 1.0 * t_down) + (0.01 + 2.0 * wait);
        let cost = 0.5 * latency + 0.5 * energy;
        assert!((plan.latency_s - latency).abs() < 1e-15);
        assert!((plan.energy_j - energy).abs() < 1e-15);
        assert!((plan.cost - cost).abs() / cost < 1e-12);
        assert!(plan.feasible);
    }

    #[test]
    fn tiny_rate_drives_optimum_to_full_local() {
        let mut rng = SplitMix64::new(41);
        let radio = RadioModel::lte();
        for _ in 0..50 {
            let (mut model, mut device, server) = random_cycle_model(&mut rng);
            // Keep the all-edge path within the deadline.
            device.frequency_hz = Some(1e9);
            for sub in &mut model.subtasks {
                sub.cycles = Some(1e6 + rng.next_f64() * 5e6);
            }
            let dep = Deployment {
                model: &model,
                device: &device,
                server: &server,
                radio: &radio,
            };
            let net = NetworkSample::symmetric(1e3, 0.010);
            let plan =
                optimize_partition(&dep, &net, &PolicyWeights::default(), DEFAULT_DEADLINE_S)
                    .unwrap();
            assert_eq!(plan.k_p, model.num_subtasks());
        }
    }

    #[test]
    fn crafted_k3_prefers_first_split() {
        // Heavy local sub-tasks, tiny first output, fast server: only the
        // k_p = 1 split stays under the deadline.
        let model = ModelProfile {
            name: "k3".into(),
            wire_id: 0,
            num_cameras: 1,
            bottleneck_index: 1,
            bottleneck_dims: [1, 10, 25],
            bottleneck_elements: 250,
            result_bytes: 26,
            subtasks: vec![
                SubTaskCost {
                    name: None,
                    cycles: Some(5e7),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 1000,
                },
                SubTaskCost {
                    name: None,
                    cycles: Some(5e7),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 500_000,
                },
                SubTaskCost {
                    name: None,
                    cycles: Some(5e7),
                    edge_latency_s: None,
                    cloud_latency_s: None,
                    edge_energy_j: None,
                    output_bytes: 100,
                },
            ],
        };
        let device = DeviceProfile {
            name: "dev".into(),
            frequency_hz: Some(1e9),
            energy_per_cycle_j: Some(1e-9),
            idle_power_w: 0.5,
            active_power_w: None,
        };
        let server = cycle_server(1e11);
        let radio = RadioModel::constant(1.0, 1.0);
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let net = NetworkSample::symmetric(100e6, 0.001);
        let plan =
            optimize_partition(&dep, &net, &PolicyWeights::default(), DEFAULT_DEADLINE_S).unwrap();
        assert_eq!(plan.k_p, 1);
        assert!(plan.feasible);
    }

    #[test]
    fn optimizer_never_exceeds_any_candidate() {
        let mut rng = SplitMix64::new(4242);
        let radio = RadioModel::wifi();
        for _ in 0..100 {
            let (model, device, server) = random_cycle_model(&mut rng);
            let dep = Deployment {
                model: &model,
                device: &device,
                server: &server,
                radio: &radio,
            };
            let net = NetworkSample::symmetric(1e5 + rng.next_f64() * 1e8, rng.next_f64() * 0.05);
            let weights = PolicyWeights::default();
            let best = optimize_partition(&dep, &net, &weights, DEFAULT_DEADLINE_S).unwrap();
            if !best.feasible {
                continue;
            }
            for k_p in 1..=model.num_subtasks() {
                let plan = objective_cost(&dep, k_p, &net, &weights, DEFAULT_DEADLINE_S).unwrap();
                if plan.feasible {
                    assert!(best.cost <= plan.cost);
                }
            }
        }
    }

    #[test]
    fn weight_scaling_preserves_argmin() {
        // Power-of-two scale factors multiply both weights exactly, so the
        // ordering of costs cannot change.
        let mut rng = SplitMix64::new(9001);
        let radio = RadioModel::lte();
        for _ in 0..40 {
            let (model, device, server) = random_cycle_model(&mut rng);
            let dep = Deployment {
                model: &model,
                device: &device,
                server: &server,
                radio: &radio,
            };
            let net = NetworkSample::symmetric(1e6 + rng.next_f64() * 5e7, 0.008);
            let base = PolicyWeights { w_t: 0.5, w_e: 0.25 };
            let baseline =
                optimize_partition(&dep, &net, &base, DEFAULT_DEADLINE_S).unwrap();
            for scale in [0.5, 2.0] {
                let scaled = PolicyWeights {
                    w_t: base.w_t * scale,
                    w_e: base.w_e * scale,
                };
                let plan = optimize_partition(&dep, &net, &scaled, DEFAULT_DEADLINE_S).unwrap();
                assert_eq!(plan.k_p, baseline.k_p);
            }
        }
    }

    #[test]
    fn free_communication_never_picks_full_local() {
        let mut rng = SplitMix64::new(777);
        let radio = RadioModel::constant(0.0, 0.0);
        for _ in 0..50 {
            let (model, device, mut server) = random_cycle_model(&mut rng);
            if model.num_subtasks() < 2 {
                continue;
            }
            // Strictly faster server.
            server.frequency_hz = Some(device.frequency_hz.unwrap() * 4.0);
            let dep = Deployment {
                model: &model,
                device: &device,
                server: &server,
                radio: &radio,
            };
            let net = NetworkSample::symmetric(1e30, 0.0);
            let plan =
                optimize_partition(&dep, &net, &PolicyWeights::default(), DEFAULT_DEADLINE_S)
                    .unwrap();
            assert_ne!(plan.k_p, model.num_subtasks());
        }
    }

    #[test]
    fn r_th_hand_example() {
        // 50,000 B upload, 10 ms head, 5 ms cloud tail, 0.01 ms download,
        // 10 ms RTT: budget 74.99 ms, threshold ~5.334 Mbps.
        let r = rate_threshold(400_000.0, 0.100, 0.010, 0.005, 1e-5, 0.010);
        assert!((r - 400_000.0 / 0.07499).abs() < 1e-6);
        assert!((r - 5.334e6).abs() / 5.334e6 < 1e-3);
    }

    #[test]
    fn blown_budget_is_infeasible_sentinel() {
        let r = rate_threshold(400_000.0, 0.100, 0.120, 0.005, 0.0, 0.010);
        assert!(r.is_infinite());
    }

    #[test]
    fn r_th_halves_exactly_with_payload() {
        let mut rng = SplitMix64::new(50);
        for _ in 0..200 {
            let bits = (8 + rng.next_below(1 << 24)) as f64 * 2.0;
            let head = rng.next_f64() * 0.03;
            let tail = rng.next_f64() * 0.02;
            let rtt = rng.next_f64() * 0.03;
            let full = rate_threshold(bits, 0.100, head, tail, 0.0, rtt);
            let half = rate_threshold(bits / 2.0, 0.100, head, tail, 0.0, rtt);
            assert_eq!(full, half * 2.0);
        }
    }

    #[test]
    fn decision_threshold_and_energy_conditions() {
        let model = table_style_model();
        let device = tx2();
        let server = plain_server();
        let radio = RadioModel::constant(1.2, 0.8);
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };

        // Below threshold: local.
        let slow = NetworkSample::symmetric(0.2e6, 0.010);
        let d = decide_offload(&dep, &slow, QuantBits::B32, DEFAULT_DEADLINE_S).unwrap();
        assert!(slow.rate_up_bps < d.r_th_bps);
        assert_eq!(d.verdict, Verdict::Local);

        // Above threshold with the energy condition holding: offload.
        let fast = NetworkSample::symmetric(10e6, 0.010);
        let d = decide_offload(&dep, &fast, QuantBits::B32, DEFAULT_DEADLINE_S).unwrap();
        assert!(fast.rate_up_bps > d.r_th_bps);
        assert_eq!(d.verdict, Verdict::Offload);
        assert!(d.predicted.feasible);
    }

    #[test]
    fn energy_condition_blocks_offload() {
        // Huge idle power makes waiting for the cloud cost more than the
        // tail it replaces, whatever the rate.
        let model = table_style_model();
        let device = DeviceProfile {
            name: "hungry".into(),
            frequency_hz: None,
            energy_per_cycle_j: None,
            idle_power_w: 500.0,
            active_power_w: None,
        };
        let server = plain_server();
        let radio = RadioModel::constant(1.2, 0.8);
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let fast = NetworkSample::symmetric(50e6, 0.010);
        let d = decide_offload(&dep, &fast, QuantBits::B32, DEFAULT_DEADLINE_S).unwrap();
        assert!(fast.rate_up_bps > d.r_th_bps);
        assert_eq!(d.verdict, Verdict::Local);
    }

    #[test]
    fn offload_verdict_never_misses_deadline() {
        let mut rng = SplitMix64::new(31337);
        let radio = RadioModel::lte();
        for _ in 0..200 {
            let (model, device, server) = random_cycle_model(&mut rng);
            let dep = Deployment {
                model: &model,
                device: &device,
                server: &server,
                radio: &radio,
            };
            let net = NetworkSample::symmetric(
                1e4 + rng.next_f64() * 2e8,
                rng.next_f64() * 0.08,
            );
            let d = decide_offload(&dep, &net, QuantBits::B32, DEFAULT_DEADLINE_S).unwrap();
            if d.verdict == Verdict::Offload {
                assert!(d.predicted.latency_s <= DEFAULT_DEADLINE_S);
            }
        }
    }

    #[test]
    fn scan_local_entry_has_zero_payload() {
        let model = table_style_model();
        let device = tx2();
        let server = plain_server();
        let radio = RadioModel::lte();
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let points = scan_split_points(&dep, &NetworkSample::symmetric(10e6, 0.010)).unwrap();
        let last = points.last().unwrap();
        assert_eq!(last.k_p, 2);
        assert_eq!(last.payload_bytes, 0);
        assert!((last.latency_s - 0.215543).abs() < 1e-9);
    }

    #[test]
    fn transmission_term_decreases_with_monotone_payloads() {
        // Strictly decreasing output sizes at a fixed rate: the upload time
        // component strictly decreases with k_p.
        let outputs = [40_000u64, 20_000, 8_000, 1_000, 26];
        let subtasks: Vec<SubTaskCost> = outputs
            .iter()
            .map(|&b| SubTaskCost {
                name: None,
                cycles: Some(1e6),
                edge_latency_s: None,
                cloud_latency_s: None,
                edge_energy_j: None,
                output_bytes: b,
            })
            .collect();
        let model = ModelProfile {
            name: "monotone".into(),
            wire_id: 0,
            num_cameras: 1,
            bottleneck_index: 1,
            bottleneck_dims: [1, 100, 100],
            bottleneck_elements: 10_000,
            result_bytes: 26,
            subtasks,
        };
        let device = DeviceProfile {
            name: "dev".into(),
            frequency_hz: Some(1e9),
            energy_per_cycle_j: Some(1e-9),
            idle_power_w: 1.0,
            active_power_w: None,
        };
        let server = cycle_server(1e10);
        let radio = RadioModel::wifi();
        let dep = Deployment {
            model: &model,
            device: &device,
            server: &server,
            radio: &radio,
        };
        let net = NetworkSample::symmetric(10e6, 0.010);
        let points = scan_split_points(&dep, &net).unwrap();
        for pair in points.windows(2) {
            let t0 = pair[0].payload_bytes as f64 * 8.0 / net.rate_up_bps;
            let t1 = pair[1].payload_bytes as f64 * 8.0 / net.rate_up_bps;
            assert!(t1 < t0 || pair[1].payload_bytes == 0);
        }
    }
}
