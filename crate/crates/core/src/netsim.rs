//! Deterministic trace-driven network conditions.
//!
//! A trace is an ordered list of (time, upload rate, download rate, RTT)
//! samples with an optional per-sample delivery flag. Sampling uses a
//! zero-order hold: the last sample at or before the query time applies, and
//! the final sample holds forever. Generated traces are reproducible from a
//! seed via the crate's portable PRNG.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::NetworkSample;
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("trace parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid trace: {0}")]
    Invalid(String),
    #[error("invalid trace generator config: {0}")]
    Config(String),
    #[error("query time {t} precedes the first sample at {first}")]
    BeforeStart { t: f64, first: f64 },
}

/// One row of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time_s: f64,
    pub rate_up_bps: f64,
    pub rate_down_bps: f64,
    pub rtt_s: f64,
    /// When false, a transfer governed by this sample is lost: the server
    /// response never arrives and the runtime's fail-safe fires.
    pub delivered: bool,
}

/// Immutable ordered network trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTrace {
    samples: Vec<TraceSample>,
}

/// Which rate column governs a transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Down,
}

impl NetworkTrace {
    pub fn new(samples: Vec<TraceSample>) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::Invalid("trace has no samples".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.time_s.is_finite() {
                return Err(TraceError::Invalid(format!("sample {i} time is not finite")));
            }
            if !(s.rate_up_bps > 0.0) || !(s.rate_down_bps > 0.0) {
                return Err(TraceError::Invalid(format!(
                    "sample {i} rates must be positive"
                )));
            }
            if !(s.rtt_s >= 0.0) {
                return Err(TraceError::Invalid(format!("sample {i} rtt must be >= 0")));
            }
            if i > 0 && s.time_s <= samples[i - 1].time_s {
                return Err(TraceError::Invalid(format!(
                    "sample times must be strictly increasing at index {i}"
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].time_s
    }

    pub fn end_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].time_s
    }

    /// Index of the zero-order-hold sample governing time `t`.
    fn index_at(&self, t: f64) -> Result<usize, TraceError> {
        if t < self.start_time() {
            return Err(TraceError::BeforeStart {
                t,
                first: self.start_time(),
            });
        }
        let idx = self.samples.partition_point(|s| s.time_s <= t);
        Ok(idx - 1)
    }

    /// Full sample (including the delivery flag) governing time `t`.
    pub fn full_sample_at(&self, t: f64) -> Result<&TraceSample, TraceError> {
        Ok(&self.samples[self.index_at(t)?])
    }

    /// Network conditions at time `t` under the zero-order-hold rule.
    pub fn sample_at(&self, t: f64) -> Result<NetworkSample, TraceError> {
        let s = self.full_sample_at(t)?;
        Ok(NetworkSample::new(s.rate_up_bps, s.rate_down_bps, s.rtt_s))
    }

    /// Completion time of a transfer of `bytes` starting at `start_s`,
    /// integrating the piecewise-constant rate across sample boundaries.
    pub fn transfer_end_time(
        &self,
        start_s: f64,
        bytes: u64,
        dir: Direction,
    ) -> Result<f64, TraceError> {
        let mut idx = self.index_at(start_s)?;
        let mut now = start_s;
        let mut bits_left = bytes as f64 * 8.0;
        loop {
            let rate = match dir {
                Direction::Up => self.samples[idx].rate_up_bps,
                Direction::Down => self.samples[idx].rate_down_bps,
            };
            let boundary = self.samples.get(idx + 1).map(|s| s.time_s);
            match boundary {
                Some(b) => {
                    let capacity = rate * (b - now);
                    if capacity >= bits_left {
                        return Ok(now + bits_left / rate);
                    }
                    bits_left -= capacity;
                    now = b;
                    idx += 1;
                }
                // Final sample holds forever.
                None => return Ok(now + bits_left / rate),
            }
        }
    }

    /// Serializes to the trace file format: a required header line, then
    /// `time_s,rate_up_bps,rate_down_bps,rtt_s,delivered` rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("time_s,rate_up_bps,rate_down_bps,rtt_s,delivered\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                s.time_s,
                s.rate_up_bps,
                s.rate_down_bps,
                s.rtt_s,
                if s.delivered { 1 } else { 0 }
            ));
        }
        out
    }

    /// Parses the trace file format. The `delivered` column is optional and
    /// defaults to delivered.
    pub fn from_csv_str(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| TraceError::Parse {
            line: 1,
            reason: "missing header line".into(),
        })?;
        if !header.trim_start().starts_with("time_s") {
            return Err(TraceError::Parse {
                line: 1,
                reason: format!("expected header starting with `time_s`, got `{header}`"),
            });
        }
        let mut samples = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 && fields.len() != 5 {
                return Err(TraceError::Parse {
                    line: i + 1,
                    reason: format!("expected 4 or 5 fields, got {}", fields.len()),
                });
            }
            let num = |j: usize| -> Result<f64, TraceError> {
                fields[j].parse::<f64>().map_err(|e| TraceError::Parse {
                    line: i + 1,
                    reason: format!("field {}: {e}", j + 1),
                })
            };
            let delivered = if fields.len() == 5 {
                match fields[4] {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => {
                        return Err(TraceError::Parse {
                            line: i + 1,
                            reason: format!("delivered flag must be 0/1/true/false, got `{other}`"),
                        })
                    }
                }
            } else {
                true
            };
            samples.push(TraceSample {
                time_s: num(0)?,
                rate_up_bps: num(1)?,
                rate_down_bps: num(2)?,
                rtt_s: num(3)?,
                delivered,
            });
        }
        Self::new(samples)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), TraceError> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|source| TraceError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, TraceError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| TraceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_csv_str(&text)
    }
}

/// Trace shape. Download rates default to the upload rate unless the kind
/// carries an explicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceKind {
    Constant {
        rate_up_bps: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rate_down_bps: Option<f64>,
        rtt_s: f64,
    },
    /// Upload rate switches from one level to another at `step_time_s`.
    Step {
        rate_before_bps: f64,
        rate_after_bps: f64,
        step_time_s: f64,
        rtt_s: f64,
    },
    /// Multiplicative random walk: each step scales the rate by
    /// `exp(volatility * z)` with standard-normal `z`, clamped to
    /// `[min_bps, max_bps]`.
    RandomWalk {
        start_bps: f64,
        volatility: f64,
        min_bps: f64,
        max_bps: f64,
        rtt_s: f64,
    },
    /// Finite-state rate process: one rate per state, row-stochastic
    /// transition matrix applied every sample period.
    Markov {
        state_rates_bps: Vec<f64>,
        transitions: Vec<Vec<f64>>,
        initial_state: usize,
        rtt_s: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceGeneratorConfig {
    #[serde(flatten)]
    pub kind: TraceKind,
    pub seed: u64,
    pub duration_s: f64,
    pub sample_period_s: f64,
}

impl TraceGeneratorConfig {
    fn validate(&self) -> Result<(), TraceError> {
        if !(self.sample_period_s > 0.0) {
            return Err(TraceError::Config("sample_period_s must be > 0".into()));
        }
        if !(self.duration_s > 0.0) {
            return Err(TraceError::Config("duration_s must be > 0".into()));
        }
        match &self.kind {
            TraceKind::Constant { rate_up_bps, rate_down_bps, .. } => {
                if !(*rate_up_bps > 0.0) || rate_down_bps.is_some_and(|r| !(r > 0.0)) {
                    return Err(TraceError::Config("constant rates must be positive".into()));
                }
            }
            TraceKind::Step {
                rate_before_bps,
                rate_after_bps,
                ..
            } => {
                if !(*rate_before_bps > 0.0) || !(*rate_after_bps > 0.0) {
                    return Err(TraceError::Config("step rates must be positive".into()));
                }
            }
            TraceKind::RandomWalk {
                start_bps,
                volatility,
                min_bps,
                max_bps,
                ..
            } => {
                if !(*min_bps > 0.0) || !(*max_bps >= *min_bps) {
                    return Err(TraceError::Config("walk bounds must satisfy 0 < min <= max".into()));
                }
                if !(*start_bps >= *min_bps) || !(*start_bps <= *max_bps) {
                    return Err(TraceError::Config("walk start must lie within bounds".into()));
                }
                if !volatility.is_finite() || *volatility < 0.0 {
                    return Err(TraceError::Config("volatility must be >= 0".into()));
                }
            }
            TraceKind::Markov {
                state_rates_bps,
                transitions,
                initial_state,
                ..
            } => {
                let n = state_rates_bps.len();
                if n == 0 {
                    return Err(TraceError::Config("markov needs at least one state".into()));
                }
                if state_rates_bps.iter().any(|r| !(*r > 0.0)) {
                    return Err(TraceError::Config("markov state rates must be positive".into()));
                }
                if transitions.len() != n {
                    return Err(TraceError::Config(format!(
                        "transition matrix must have {n} rows"
                    )));
                }
                for (i, row) in transitions.iter().enumerate() {
                    if row.len() != n {
                        return Err(TraceError::Config(format!("transition row {i} must have {n} entries")));
                    }
                    if row.iter().any(|p| !(*p >= 0.0)) {
                        return Err(TraceError::Config(format!("transition row {i} has negative entries")));
                    }
                    let sum: f64 = row.iter().sum();
                    if (sum - 1.0).abs() > 1e-9 {
                        return Err(TraceError::Config(format!(
                            "transition row {i} sums to {sum}, expected 1"
                        )));
                    }
                }
                if *initial_state >= n {
                    return Err(TraceError::Config("initial_state out of range".into()));
                }
            }
        }
        Ok(())
    }
}

/// Generates a trace from the config; identical configs (including the seed)
/// produce identical traces.
pub fn generate_trace(cfg: &TraceGeneratorConfig) -> Result<NetworkTrace, TraceError> {
    cfg.validate()?;
    let steps = (cfg.duration_s / cfg.sample_period_s).round().max(1.0) as usize;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut samples = Vec::with_capacity(steps);

    let mut walk_rate = match &cfg.kind {
        TraceKind::RandomWalk { start_bps, .. } => *start_bps,
        _ => 0.0,
    };
    let mut markov_state = match &cfg.kind {
        TraceKind::Markov { initial_state, .. } => *initial_state,
        _ => 0,
    };

    for i in 0..steps {
        let time_s = i as f64 * cfg.sample_period_s;
        let (up, down, rtt) = match &cfg.kind {
            TraceKind::Constant {
                rate_up_bps,
                rate_down_bps,
                rtt_s,
            } => (*rate_up_bps, rate_down_bps.unwrap_or(*rate_up_bps), *rtt_s),
            TraceKind::Step {
                rate_before_bps,
                rate_after_bps,
                step_time_s,
                rtt_s,
            } => {
                let r = if time_s < *step_time_s {
                    *rate_before_bps
                } else {
                    *rate_after_bps
                };
                (r, r, *rtt_s)
            }
            TraceKind::RandomWalk {
                volatility,
                min_bps,
                max_bps,
                rtt_s,
                ..
            } => {
                let r = walk_rate;
                walk_rate = (walk_rate * (volatility * rng.next_gaussian()).exp())
                    .clamp(*min_bps, *max_bps);
                (r, r, *rtt_s)
            }
            TraceKind::Markov {
                state_rates_bps,
                transitions,
                rtt_s,
                ..
            } => {
                let r = state_rates_bps[markov_state];
                let u = rng.next_f64();
                let row = &transitions[markov_state];
                let mut acc = 0.0;
                let mut next = row.len() - 1;
                for (j, p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next = j;
                        break;
                    }
                }
                markov_state = next;
                (r, r, *rtt_s)
            }
        };
        samples.push(TraceSample {
            time_s,
            rate_up_bps: up,
            rate_down_bps: down,
            rtt_s: rtt,
            delivered: true,
        });
    }
    NetworkTrace::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_cfg(rate: f64) -> TraceGeneratorConfig {
        TraceGeneratorConfig {
            kind: TraceKind::Constant {
                rate_up_bps: rate,
                rate_down_bps: None,
                rtt_s: 0.010,
            },
            seed: 1,
            duration_s: 1.0,
            sample_period_s: 0.1,
        }
    }

    #[test]
    fn constant_trace_has_identical_samples() {
        let trace = generate_trace(&constant_cfg(10e6)).unwrap();
        assert_eq!(trace.samples().len(), 10);
        assert!(trace
            .samples()
            .iter()
            .all(|s| s.rate_up_bps == 10e6 && s.rate_down_bps == 10e6 && s.rtt_s == 0.010));
    }

    #[test]
    fn same_seed_gives_identical_traces() {
        let cfg = TraceGeneratorConfig {
            kind: TraceKind::RandomWalk {
                start_bps: 10e6,
                volatility: 0.3,
                min_bps: 1e5,
                max_bps: 1e9,
                rtt_s: 0.010,
            },
            seed: 4242,
            duration_s: 10.0,
            sample_period_s: 0.1,
        };
        let a = generate_trace(&cfg).unwrap();
        let b = generate_trace(&cfg).unwrap();
        assert_eq!(a, b);

        let other_seed = TraceGeneratorConfig { seed: 4243, ..cfg };
        let c = generate_trace(&other_seed).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn step_switches_level_at_configured_time() {
        let cfg = TraceGeneratorConfig {
            kind: TraceKind::Step {
                rate_before_bps: 50e6,
                rate_after_bps: 0.1e6,
                step_time_s: 0.35,
                rtt_s: 0.005,
            },
            seed: 1,
            duration_s: 1.0,
            sample_period_s: 0.1,
        };
        let trace = generate_trace(&cfg).unwrap();
        assert_eq!(trace.sample_at(0.3).unwrap().rate_up_bps, 50e6);
        assert_eq!(trace.sample_at(0.4).unwrap().rate_up_bps, 0.1e6);
    }

    #[test]
    fn zero_order_hold_rules() {
        let trace = generate_trace(&constant_cfg(5e6)).unwrap();
        // Exactly on a sample time.
        assert_eq!(trace.sample_at(0.2).unwrap().rate_up_bps, 5e6);
        // Between samples holds the earlier one.
        assert_eq!(trace.sample_at(0.25).unwrap().rate_up_bps, 5e6);
        // Beyond the final sample holds it forever.
        assert_eq!(trace.sample_at(99.0).unwrap().rate_up_bps, 5e6);
        // Before the first sample is an error.
        assert!(matches!(
            trace.sample_at(-0.01),
            Err(TraceError::BeforeStart { .. })
        ));
    }

    #[test]
    fn markov_is_deterministic_and_valid() {
        let cfg = TraceGeneratorConfig {
            kind: TraceKind::Markov {
                state_rates_bps: vec![1e6, 20e6],
                transitions: vec![vec![0.9, 0.1], vec![0.2, 0.8]],
                initial_state: 0,
                rtt_s: 0.010,
            },
            seed: 7,
            duration_s: 50.0,
            sample_period_s: 0.1,
        };
        let a = generate_trace(&cfg).unwrap();
        let b = generate_trace(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a
            .samples()
            .iter()
            .all(|s| s.rate_up_bps == 1e6 || s.rate_up_bps == 20e6));
        // Both states visited over 500 steps.
        assert!(a.samples().iter().any(|s| s.rate_up_bps == 1e6));
        assert!(a.samples().iter().any(|s| s.rate_up_bps == 20e6));
    }

    #[test]
    fn bad_markov_rows_rejected() {
        let cfg = TraceGeneratorConfig {
            kind: TraceKind::Markov {
                state_rates_bps: vec![1e6, 2e6],
                transitions: vec![vec![0.9, 0.2], vec![0.2, 0.8]],
                initial_state: 0,
                rtt_s: 0.0,
            },
            seed: 7,
            duration_s: 1.0,
            sample_period_s: 0.1,
        };
        assert!(matches!(generate_trace(&cfg), Err(TraceError::Config(_))));
    }

    #[test]
    fn csv_round_trip() {
        let mut trace = generate_trace(&constant_cfg(3e6)).unwrap();
        trace.samples[3].delivered = false;
        let text = trace.to_csv_string();
        let back = NetworkTrace::from_csv_str(&text).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn csv_without_delivered_column_defaults_true() {
        let text = "time_s,rate_up_bps,rate_down_bps,rtt_s\n0.0,1e6,1e6,0.01\n0.1,2e6,2e6,0.01\n";
        let trace = NetworkTrace::from_csv_str(text).unwrap();
        assert!(trace.samples().iter().all(|s| s.delivered));
    }

    #[test]
    fn csv_missing_header_rejected() {
        let text = "0.0,1e6,1e6,0.01\n";
        assert!(matches!(
            NetworkTrace::from_csv_str(text),
            Err(TraceError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn transfer_integrates_across_a_rate_step() {
        // 1 Mbps for the first 0.5 s, then 8 Mbps. 100,000 B = 800,000 bits:
        // 500,000 bits go out in the first half second, the remaining
        // 300,000 take 37.5 ms at the higher rate.
        let samples = vec![
            TraceSample {
                time_s: 0.0,
                rate_up_bps: 1e6,
                rate_down_bps: 1e6,
                rtt_s: 0.0,
                delivered: true,
            },
            TraceSample {
                time_s: 0.5,
                rate_up_bps: 8e6,
                rate_down_bps: 8e6,
                rtt_s: 0.0,
                delivered: true,
            },
        ];
        let trace = NetworkTrace::new(samples).unwrap();
        let end = trace.transfer_end_time(0.0, 100_000, Direction::Up).unwrap();
        assert!((end - 0.5375).abs() < 1e-12);
    }
}
