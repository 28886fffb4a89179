//! Per-timestep runtime loop and episode simulator.
//!
//! Each control window the runtime measures the network, computes the rate
//! threshold and communication energy, executes the head locally, and then
//! either runs the tail locally or ships the quantized bottleneck to the
//! cloud. An offload is guarded by a fail-safe timer: if the response has
//! not arrived by `deadline - (t_tail_edge + epsilon)` the edge wakes and
//! runs the tail itself, so every step ends with exactly one control output
//! regardless of what the network does. A response arriving after the timer
//! fired is discarded; the local result already fed the controller.
//!
//! Episodes run on a simulated clock by default (deterministic tests and
//! sweeps); the same loop drives real sockets through [`SocketCloud`], where
//! wall-clock time replaces the simulated transfer model.

use std::net::{TcpStream, ToSocketAddrs};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cost::{
    cloud_tail_latency, edge_head_energy, edge_head_latency, edge_tail_energy, edge_tail_latency,
    CostError, NetworkSample,
};
use crate::netsim::{Direction, NetworkTrace, TraceError};
use crate::policy::{decide_offload, Deployment, Verdict};
use crate::profiles::QuantBits;
use crate::quant::{dequantize, quantize, BottleneckTensor, QuantError, TensorDims};
use crate::rng::{mix_seed, SplitMix64};
use crate::transport::{
    recv_control, send_request, ClientReply, FrameReader, RequestFrame, RESPONSE_LEN,
};

/// Number of command branches in the tail stub.
pub const NUM_COMMANDS: u8 = 4;

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("command {0} out of range 0..={}", NUM_COMMANDS - 1)]
    CommandOutOfRange(u8),
    #[error("invalid runtime config: {0}")]
    Config(String),
    #[error("socket endpoint error: {0}")]
    Socket(#[from] std::io::Error),
}

/// Steering, accelerator, and brake values applied to the vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub steer: f32,
    pub accelerator: f32,
    pub brake: f32,
}

impl ControlOutput {
    pub fn is_finite(&self) -> bool {
        self.steer.is_finite() && self.accelerator.is_finite() && self.brake.is_finite()
    }
}

#[derive(Debug, Clone)]
pub struct RuntimeConfig {
    /// Control window, seconds.
    pub deadline_s: f64,
    /// Fail-safe margin added to the edge tail latency when arming the
    /// rollback timer, seconds.
    pub epsilon_s: f64,
    /// Payload precision for offloaded bottleneck tensors.
    pub quant_bits: QuantBits,
    /// Optional EMA factor in (0, 1] applied to measured rates before the
    /// decision; `None` uses the latest sample as-is.
    pub rate_smoothing: Option<f64>,
    /// Seed for the tail stub weights (must match the server's).
    pub stub_seed: u64,
}

impl Default for RuntimeConfig {
    fn default() -> Self {
        Self {
            deadline_s: 0.100,
            epsilon_s: 0.002,
            quant_bits: QuantBits::B32,
            rate_smoothing: None,
            stub_seed: 42,
        }
    }
}

impl RuntimeConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        if !(self.epsilon_s > 0.0 && self.epsilon_s < self.deadline_s) {
            return Err(RuntimeError::Config(format!(
                "epsilon_s must satisfy 0 < {} < deadline {}",
                self.epsilon_s, self.deadline_s
            )));
        }
        if let Some(a) = self.rate_smoothing {
            if !(a > 0.0 && a <= 1.0) {
                return Err(RuntimeError::Config(format!(
                    "rate_smoothing must be in (0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Exponential smoothing of measured rates. RTT passes through unsmoothed.
#[derive(Debug, Clone, Default)]
pub struct RateSmoother {
    alpha: Option<f64>,
    up: Option<f64>,
    down: Option<f64>,
}

impl RateSmoother {
    pub fn new(alpha: Option<f64>) -> Self {
        Self {
            alpha,
            up: None,
            down: None,
        }
    }

    pub fn observe(&mut self, raw: &NetworkSample) -> NetworkSample {
        let Some(a) = self.alpha else {
            return *raw;
        };
        let up = match self.up {
            None => raw.rate_up_bps,
            Some(prev) => a * raw.rate_up_bps + (1.0 - a) * prev,
        };
        let down = match self.down {
            None => raw.rate_down_bps,
            Some(prev) => a * raw.rate_down_bps + (1.0 - a) * prev,
        };
        self.up = Some(up);
        self.down = Some(down);
        NetworkSample::new(up, down, raw.rtt_s)
    }
}

/// Which way the step finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionPath {
    LocalFull,
    OffloadSuccess,
    OffloadTimeoutRollback,
}

impl std::fmt::Display for ExecutionPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExecutionPath::LocalFull => write!(f, "local"),
            ExecutionPath::OffloadSuccess => write!(f, "offload"),
            ExecutionPath::OffloadTimeoutRollback => write!(f, "rollback"),
        }
    }
}

/// Per-phase latency breakdown, seconds. The phases sum to the step total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseLatency {
    pub head_s: f64,
    pub tx_s: f64,
    pub wait_s: f64,
    pub rx_s: f64,
    pub tail_s: f64,
}

impl PhaseLatency {
    pub fn total(&self) -> f64 {
        self.head_s + self.tx_s + self.wait_s + self.rx_s + self.tail_s
    }
}

/// Per-phase energy breakdown, joules.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseEnergy {
    pub head_j: f64,
    pub comm_j: f64,
    pub idle_j: f64,
    pub tail_j: f64,
}

impl PhaseEnergy {
    pub fn total(&self) -> f64 {
        self.head_j + self.comm_j + self.idle_j + self.tail_j
    }
}

/// Everything measured in one control window.
#[derive(Debug, Clone, PartialEq)]
pub struct TimestepReport {
    pub timestep: u64,
    pub t_start_s: f64,
    pub path: ExecutionPath,
    /// Threshold the decision used, bits/s (`inf` when offloading cannot
    /// meet the deadline).
    pub r_th_bps: f64,
    /// Rates the decision used (after optional smoothing).
    pub rate_up_bps: f64,
    pub rate_down_bps: f64,
    pub rtt_s: f64,
    pub latency: PhaseLatency,
    pub latency_s: f64,
    pub energy: PhaseEnergy,
    pub energy_j: f64,
    pub deadline_met: bool,
    pub control: ControlOutput,
}

/// Synthesized per-step sensor state.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInputs {
    pub tensors: Vec<BottleneckTensor>,
    pub speed_mps: f32,
    pub command: u8,
}

/// Deterministic per-step inputs: bottleneck tensors for every camera plus
/// speed and command, all derived from `(episode_seed, step)`.
pub fn synthesize_inputs(
    model: &crate::profiles::ModelProfile,
    episode_seed: u64,
    step: u64,
) -> StepInputs {
    let mut rng = SplitMix64::new(mix_seed(episode_seed, step));
    let [c, h, w] = model.bottleneck_dims;
    let dims = TensorDims::new(c, h, w);
    let per_camera = dims.element_count();
    let mut tensors = Vec::with_capacity(model.num_cameras as usize);
    for camera in 0..model.num_cameras {
        let values: Vec<f32> = (0..per_camera).map(|_| rng.next_f32_signed()).collect();
        tensors.push(BottleneckTensor {
            dims,
            camera_index: camera,
            values,
        });
    }
    let speed_mps = (rng.next_f64() * 30.0) as f32;
    let command = rng.next_below(NUM_COMMANDS as u64) as u8;
    StepInputs {
        tensors,
        speed_mps,
        command,
    }
}

fn softsign(x: f32) -> f32 {
    x / (1.0 + x.abs())
}

/// Deterministic stand-in for the tail model: a fixed-topology
/// affine-plus-softsign cascade over tensor summary features, with one
/// weight set per command branch derived from the portable PRNG.
///
/// Identical inputs give bit-identical outputs wherever it runs: the
/// arithmetic uses only IEEE add/mul/div/abs in a fixed order.
pub fn stub_tail(
    tensors: &[BottleneckTensor],
    speed_mps: f32,
    command: u8,
    model_seed: u64,
) -> Result<ControlOutput, RuntimeError> {
    if command >= NUM_COMMANDS {
        return Err(RuntimeError::CommandOutOfRange(command));
    }

    // 5 features per camera slot (up to 3 cameras), plus normalized speed.
    let mut x = [0.0f32; 16];
    for (slot, tensor) in tensors.iter().take(3).enumerate() {
        let v = &tensor.values;
        if v.is_empty() {
            continue;
        }
        let mut sum = 0.0f32;
        let mut sum_abs = 0.0f32;
        for value in v {
            sum += *value;
            sum_abs += value.abs();
        }
        let n = v.len() as f32;
        x[slot * 5] = sum / n;
        x[slot * 5 + 1] = sum_abs / n;
        x[slot * 5 + 2] = v[0];
        x[slot * 5 + 3] = v[v.len() / 2];
        x[slot * 5 + 4] = v[v.len() - 1];
    }
    x[15] = speed_mps / 30.0;

    // Weight stream per (seed, command) branch: w1 row-major, b1, w2, b2.
    let mut rng = SplitMix64::new(mix_seed(model_seed, command as u64 + 1));
    let mut w1 = [[0.0f32; 16]; 8];
    for row in &mut w1 {
        for w in row.iter_mut() {
            *w = rng.next_f32_signed();
        }
    }
    let mut b1 = [0.0f32; 8];
    for b in &mut b1 {
        *b = rng.next_f32_signed();
    }
    let mut w2 = [[0.0f32; 8]; 3];
    for row in &mut w2 {
        for w in row.iter_mut() {
            *w = rng.next_f32_signed();
        }
    }
    let mut b2 = [0.0f32; 3];
    for b in &mut b2 {
        *b = rng.next_f32_signed();
    }

    let mut h = [0.0f32; 8];
    for i in 0..8 {
        let mut acc = b1[i];
        for j in 0..16 {
            acc += w1[i][j] * x[j];
        }
        h[i] = softsign(acc);
    }
    let mut o = [0.0f32; 3];
    for k in 0..3 {
        let mut acc = b2[k];
        for i in 0..8 {
            acc += w2[k][i] * h[i];
        }
        o[k] = acc;
    }

    Ok(ControlOutput {
        steer: softsign(o[0]),
        accelerator: 0.5 + 0.5 * softsign(o[1]),
        brake: 0.5 + 0.5 * softsign(o[2]),
    })
}

/// Result of one offload attempt, on the episode clock.
#[derive(Debug, Clone, PartialEq)]
pub enum OffloadOutcome {
    /// The response arrived at or before the fail-safe instant.
    Response {
        control: ControlOutput,
        tx_end_abs: f64,
        rx_start_abs: f64,
        arrival_abs: f64,
    },
    /// No response by the fail-safe instant. `tx_end_abs` is the upload
    /// completion time when the upload itself finished (None when nothing
    /// went out).
    Timeout { tx_end_abs: Option<f64> },
}

/// A destination for offloaded tails: either the trace-driven simulator or a
/// live socket. `tx_start_abs_s` is when the upload begins on the episode
/// clock and `failsafe_abs_s` is the rollback instant; exactly one of
/// {response consumed, timeout} is reported per call.
pub trait CloudTail {
    fn offload(
        &mut self,
        frame: &RequestFrame,
        tx_start_abs_s: f64,
        failsafe_abs_s: f64,
    ) -> Result<OffloadOutcome, RuntimeError>;
}

/// Trace-driven cloud: transfers integrate the trace's piecewise-constant
/// rates, the server "computes" for the profiled cloud tail latency, and the
/// response value is the same tail stub the edge runs, applied to the
/// dequantized payload.
pub struct SimulatedCloud<'a> {
    trace: &'a NetworkTrace,
    tail_latency_s: f64,
    stub_seed: u64,
    stall: bool,
}

impl<'a> SimulatedCloud<'a> {
    pub fn new(
        trace: &'a NetworkTrace,
        dep: &Deployment,
        cfg: &RuntimeConfig,
    ) -> Result<Self, CostError> {
        Ok(Self {
            trace,
            tail_latency_s: cloud_tail_latency(dep.model, dep.server)?,
            stub_seed: cfg.stub_seed,
            stall: false,
        })
    }

    /// Server that never replies; every offload rolls back.
    pub fn stalled(mut self) -> Self {
        self.stall = true;
        self
    }
}

impl CloudTail for SimulatedCloud<'_> {
    fn offload(
        &mut self,
        frame: &RequestFrame,
        tx_start_abs_s: f64,
        failsafe_abs_s: f64,
    ) -> Result<OffloadOutcome, RuntimeError> {
        let wire_bytes = frame.wire_len() as u64;
        let tx_end = self
            .trace
            .transfer_end_time(tx_start_abs_s, wire_bytes, Direction::Up)?;
        let governing = self.trace.full_sample_at(tx_start_abs_s)?;
        if self.stall || !governing.delivered {
            return Ok(OffloadOutcome::Timeout {
                tx_end_abs: Some(tx_end),
            });
        }
        let rx_start = tx_end + governing.rtt_s + self.tail_latency_s;
        let arrival = self
            .trace
            .transfer_end_time(rx_start, RESPONSE_LEN as u64, Direction::Down)?;
        if arrival > failsafe_abs_s {
            return Ok(OffloadOutcome::Timeout {
                tx_end_abs: Some(tx_end),
            });
        }
        let mut tensors = Vec::with_capacity(frame.tensors.len());
        for (i, q) in frame.tensors.iter().enumerate() {
            let mut t = dequantize(q)?;
            t.camera_index = i as u8;
            tensors.push(t);
        }
        let control = stub_tail(&tensors, frame.speed, frame.command, self.stub_seed)?;
        Ok(OffloadOutcome::Response {
            control,
            tx_end_abs: tx_end,
            rx_start_abs: rx_start,
            arrival_abs: arrival,
        })
    }
}

/// Socket-backed cloud. Each call anchors the episode clock to the wall
/// clock at transmit time, so the fail-safe budget is exactly
/// `failsafe_abs - tx_start_abs` of real time. All transport failures map to
/// the timeout path; the downlink read time is folded into the wait phase.
pub struct SocketCloud {
    stream: TcpStream,
    reader: FrameReader,
}

impl SocketCloud {
    pub fn connect(addr: impl ToSocketAddrs) -> std::io::Result<Self> {
        let stream = crate::transport::connect(addr)?;
        Ok(Self {
            stream,
            reader: FrameReader::new(),
        })
    }
}

impl CloudTail for SocketCloud {
    fn offload(
        &mut self,
        frame: &RequestFrame,
        tx_start_abs_s: f64,
        failsafe_abs_s: f64,
    ) -> Result<OffloadOutcome, RuntimeError> {
        let budget = failsafe_abs_s - tx_start_abs_s;
        if budget <= 0.0 {
            return Ok(OffloadOutcome::Timeout { tx_end_abs: None });
        }
        let t0 = Instant::now();
        let deadline = t0 + Duration::from_secs_f64(budget);
        if send_request(&mut self.stream, frame).is_err() {
            return Ok(OffloadOutcome::Timeout { tx_end_abs: None });
        }
        let tx_end_abs = tx_start_abs_s + t0.elapsed().as_secs_f64();
        match recv_control(&mut self.stream, &mut self.reader, frame.timestep, deadline) {
            Ok(ClientReply::Control(control)) => {
                let arrival_abs = tx_start_abs_s + t0.elapsed().as_secs_f64();
                Ok(OffloadOutcome::Response {
                    control,
                    tx_end_abs,
                    rx_start_abs: arrival_abs,
                    arrival_abs,
                })
            }
            Ok(ClientReply::Timeout) | Err(_) => Ok(OffloadOutcome::Timeout {
                tx_end_abs: Some(tx_end_abs),
            }),
        }
    }
}

/// Executes one control window starting at `t_start_s` on the episode clock.
pub fn run_timestep(
    timestep: u64,
    t_start_s: f64,
    trace: &NetworkTrace,
    dep: &Deployment,
    cfg: &RuntimeConfig,
    inputs: &StepInputs,
    smoother: &mut RateSmoother,
    endpoint: &mut dyn CloudTail,
) -> Result<TimestepReport, RuntimeError> {
    cfg.validate()?;
    // Measure the network, then derive T_D, r_th, and E_comm inside the
    // decision. Decision compute itself is accounted as zero time.
    let raw = trace.sample_at(t_start_s)?;
    let net = smoother.observe(&raw);
    let decision = decide_offload(dep, &net, cfg.quant_bits, cfg.deadline_s)?;

    let t_head = edge_head_latency(dep.model, dep.device)?;
    let e_head = edge_head_energy(dep.model, dep.device)?;
    let t_tail_edge = edge_tail_latency(dep.model, dep.device)?;
    let e_tail_edge = edge_tail_energy(dep.model, dep.device)?;
    let head_end = t_start_s + t_head;

    let (path, latency, energy, control) = match decision.verdict {
        Verdict::Local => {
            let control = stub_tail(&inputs.tensors, inputs.speed_mps, inputs.command, cfg.stub_seed)?;
            let latency = PhaseLatency {
                head_s: t_head,
                tail_s: t_tail_edge,
                ..Default::default()
            };
            let energy = PhaseEnergy {
                head_j: e_head,
                tail_j: e_tail_edge,
                ..Default::default()
            };
            (ExecutionPath::LocalFull, latency, energy, control)
        }
        Verdict::Offload => {
            let quantized = inputs
                .tensors
                .iter()
                .map(|t| quantize(t, cfg.quant_bits))
                .collect::<Result<Vec<_>, _>>()?;
            let frame = RequestFrame {
                timestep,
                model_id: dep.model.wire_id,
                command: inputs.command,
                speed: inputs.speed_mps,
                quant_bits: cfg.quant_bits,
                tensors: quantized,
            };
            let failsafe_abs = t_start_s + cfg.deadline_s - (t_tail_edge + cfg.epsilon_s);
            let outcome = endpoint.offload(&frame, head_end, failsafe_abs)?;
            match outcome {
                OffloadOutcome::Response {
                    control,
                    tx_end_abs,
                    rx_start_abs,
                    arrival_abs,
                } => {
                    debug_assert!(arrival_abs <= failsafe_abs + 1e-9);
                    let latency = PhaseLatency {
                        head_s: t_head,
                        tx_s: tx_end_abs - head_end,
                        wait_s: rx_start_abs - tx_end_abs,
                        rx_s: arrival_abs - rx_start_abs,
                        tail_s: 0.0,
                    };
                    let energy = PhaseEnergy {
                        head_j: e_head,
                        comm_j: dep.radio.tx_power_w(net.rate_up_bps) * latency.tx_s
                            + dep.radio.rx_power_w(net.rate_down_bps) * latency.rx_s,
                        idle_j: dep.device.idle_power_w * latency.wait_s,
                        tail_j: 0.0,
                    };
                    (ExecutionPath::OffloadSuccess, latency, energy, control)
                }
                OffloadOutcome::Timeout { tx_end_abs } => {
                    // The timer fires at the fail-safe instant, but never
                    // before the head is done.
                    let wake = failsafe_abs.max(head_end);
                    let (tx_s, idle_s) = match tx_end_abs {
                        None => (0.0, wake - head_end),
                        Some(e) if e <= wake => (e - head_end, wake - e),
                        // Still transmitting when the timer fired.
                        Some(_) => (wake - head_end, 0.0),
                    };
                    let control = stub_tail(
                        &inputs.tensors,
                        inputs.speed_mps,
                        inputs.command,
                        cfg.stub_seed,
                    )?;
                    let latency = PhaseLatency {
                        head_s: t_head,
                        tx_s,
                        wait_s: idle_s,
                        rx_s: 0.0,
                        tail_s: t_tail_edge,
                    };
                    let energy = PhaseEnergy {
                        head_j: e_head,
                        comm_j: dep.radio.tx_power_w(net.rate_up_bps) * tx_s,
                        idle_j: dep.device.idle_power_w * idle_s,
                        tail_j: e_tail_edge,
                    };
                    (ExecutionPath::OffloadTimeoutRollback, latency, energy, control)
                }
            }
        }
    };

    let latency_s = latency.total();
    Ok(TimestepReport {
        timestep,
        t_start_s,
        path,
        r_th_bps: decision.r_th_bps,
        rate_up_bps: net.rate_up_bps,
        rate_down_bps: net.rate_down_bps,
        rtt_s: net.rtt_s,
        latency,
        latency_s,
        energy,
        energy_j: energy.total(),
        deadline_met: latency_s <= cfg.deadline_s,
        control,
    })
}

/// Aggregates over one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub steps: usize,
    pub local_steps: usize,
    pub offload_steps: usize,
    pub rollback_steps: usize,
    pub deadline_misses: usize,
    pub total_energy_j: f64,
    /// Energy of running every step entirely on the edge.
    pub baseline_energy_j: f64,
    pub energy_saved_pct: f64,
    pub mean_latency_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub reports: Vec<TimestepReport>,
    pub summary: EpisodeSummary,
}

/// Runs one control step per deadline window across the trace span.
pub fn run_episode(
    trace: &NetworkTrace,
    dep: &Deployment,
    cfg: &RuntimeConfig,
    episode_seed: u64,
    endpoint: &mut dyn CloudTail,
) -> Result<Episode, RuntimeError> {
    cfg.validate()?;
    let span = trace.end_time() - trace.start_time();
    let steps = (span / cfg.deadline_s).floor() as u64 + 1;
    let e_head = edge_head_energy(dep.model, dep.device)?;
    let e_tail = edge_tail_energy(dep.model, dep.device)?;

    let mut smoother = RateSmoother::new(cfg.rate_smoothing);
    let mut reports = Vec::with_capacity(steps as usize);
    let mut total_energy = 0.0;
    let mut baseline = 0.0;
    let mut total_latency = 0.0;
    for step in 0..steps {
        let t_start = trace.start_time() + step as f64 * cfg.deadline_s;
        let inputs = synthesize_inputs(dep.model, episode_seed, step);
        let report = run_timestep(
            step, t_start, trace, dep, cfg, &inputs, &mut smoother, endpoint,
        )?;
        total_energy += report.energy_j;
        baseline += e_head + e_tail;
        total_latency += report.latency_s;
        reports.push(report);
    }

    let count = |p: ExecutionPath| reports.iter().filter(|r| r.path == p).count();
    let summary = EpisodeSummary {
        steps: reports.len(),
        local_steps: count(ExecutionPath::LocalFull),
        offload_steps: count(ExecutionPath::OffloadSuccess),
        rollback_steps: count(ExecutionPath::OffloadTimeoutRollback),
        deadline_misses: reports.iter().filter(|r| !r.deadline_met).count(),
        total_energy_j: total_energy,
        baseline_energy_j: baseline,
        energy_saved_pct: if baseline > 0.0 {
            (baseline - total_energy) / baseline * 100.0
        } else {
            0.0
        },
        mean_latency_s: if reports.is_empty() {
            0.0
        } else {
            total_latency / reports.len() as f64
        },
    };
    Ok(Episode { reports, summary })
}

/// Column order of the episode report rows.
pub const REPORT_CSV_HEADER: &str = "timestep,t_start_s,path,rate_up_bps,rate_down_bps,rtt_s,\
r_th_bps,latency_s,head_s,tx_s,wait_s,rx_s,tail_s,energy_j,e_head_j,e_comm_j,e_idle_j,e_tail_j,\
deadline_met,steer,accelerator,brake";

/// Serializes an episode as delimited rows plus a `#`-prefixed summary block.
pub fn episode_to_csv(episode: &Episode) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in &episode.reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.timestep,
            r.t_start_s,
            r.path,
            r.rate_up_bps,
            r.rate_down_bps,
            r.rtt_s,
            r.r_th_bps,
            r.latency_s,
            r.latency.head_s,
            r.latency.tx_s,
            r.latency.wait_s,
            r.latency.rx_s,
            r.latency.tail_s,
            r.energy_j,
            r.energy.head_j,
            r.energy.comm_j,
            r.energy.idle_j,
            r.energy.tail_j,
            u8::from(r.deadline_met),
            r.control.steer,
            r.control.accelerator,
            r.control.brake,
        ));
    }
    let s = &episode.summary;
    out.push_str(&format!("# steps = {}\n", s.steps));
    out.push_str(&format!("# local_steps = {}\n", s.local_steps));
    out.push_str(&format!("# offload_steps = {}\n", s.offload_steps));
    out.push_str(&format!("# rollback_steps = {}\n", s.rollback_steps));
    out.push_str(&format!("# deadline_misses = {}\n", s.deadline_misses));
    out.push_str(&format!("# total_energy_j = {}\n", s.total_energy_j));
    out.push_str(&format!("# baseline_energy_j = {}\n", s.baseline_energy_j));
    out.push_str(&format!("# energy_saved_pct = {}\n", s.energy_saved_pct));
    out.push_str(&format!("# mean_latency_s = {}\n", s.mean_latency_s));
    out
}

pub fn write_episode_csv(
    path: impl AsRef<std::path::Path>,
    episode: &Episode,
) -> std::io::Result<()> {
    std::fs::write(path, episode_to_csv(episode))
}
