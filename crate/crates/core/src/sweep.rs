//! Rate sweeps and savings summaries.
//!
//! A sweep evaluates the offload decision over a grid of upload rates at a
//! fixed RTT and download rate, reporting the chosen path's predicted
//! latency and energy per point. Below the threshold the energy column is
//! the edge-only end-to-end energy; above it, head + communication + idle.
//! Rows are ordered by rate.

use thiserror::Error;

use crate::cost::{CostError, NetworkSample};
use crate::policy::{decide_offload, Deployment, Verdict};
use crate::profiles::QuantBits;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("rate grid invalid: {0}")]
    Grid(String),
    #[error("summarize needs a non-empty sweep")]
    Empty,
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Upload-rate grid, linear or logarithmic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGrid {
    pub start_bps: f64,
    pub stop_bps: f64,
    pub points: usize,
    pub log: bool,
}

impl RateGrid {
    pub fn validate(&self) -> Result<(), SweepError> {
        if !(self.start_bps > 0.0) || !(self.stop_bps > self.start_bps) {
            return Err(SweepError::Grid(format!(
                "need 0 < start < stop, got {}..{}",
                self.start_bps, self.stop_bps
            )));
        }
        if self.points < 2 {
            return Err(SweepError::Grid("need at least 2 points".into()));
        }
        Ok(())
    }

    pub fn rates(&self) -> Vec<f64> {
        let n = self.points;
        let mut rates = Vec::with_capacity(n);
        for i in 0..n {
            let f = i as f64 / (n - 1) as f64;
            let r = if self.log {
                (self.start_bps.ln() + f * (self.stop_bps.ln() - self.start_bps.ln())).exp()
            } else {
                self.start_bps + f * (self.stop_bps - self.start_bps)
            };
            rates.push(r);
        }
        rates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: RateGrid,
    pub quant: Vec<QuantBits>,
    /// Round-trip time held fixed across the grid, seconds.
    pub rtt_s: f64,
    /// Download rate held fixed across the grid so the threshold column is
    /// constant, bits/s.
    pub down_bps: f64,
    pub deadline_s: f64,
}

impl SweepConfig {
    pub fn new(grid: RateGrid, quant: Vec<QuantBits>, rtt_s: f64) -> Self {
        Self {
            grid,
            quant,
            rtt_s,
            down_bps: 100e6,
            deadline_s: crate::policy::DEFAULT_DEADLINE_S,
        }
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub rate_bps: f64,
    pub quant_bits: QuantBits,
    pub verdict: Verdict,
    pub r_th_bps: f64,
    pub latency_s: f64,
    pub energy_j: f64,
    pub deadline_met: bool,
}

/// Runs the decision at every grid rate for every requested precision.
/// Rows are grouped by precision, then ordered by rate.
pub fn sweep_rates(dep: &Deployment, cfg: &SweepConfig) -> Result<Vec<SweepRow>, SweepError> {
    cfg.grid.validate()?;
    let mut rows = Vec::with_capacity(cfg.grid.points * cfg.quant.len());
    for &quant in &cfg.quant {
        for rate in cfg.grid.rates() {
            let net = NetworkSample::new(rate, cfg.down_bps, cfg.rtt_s);
            let decision = decide_offload(dep, &net, quant, cfg.deadline_s)?;
            rows.push(SweepRow {
                rate_bps: rate,
                quant_bits: quant,
                verdict: decision.verdict,
                r_th_bps: decision.r_th_bps,
                latency_s: decision.predicted.latency_s,
                energy_j: decision.predicted.energy_j,
                deadline_met: decision.predicted.latency_s <= cfg.deadline_s,
            });
        }
    }
    Ok(rows)
}

/// Summary of one sweep (call per precision/configuration slice).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: usize,
    pub r_th_bps: f64,
    /// Edge-only energy from the local rows, when any rate stayed local.
    pub edge_only_energy_j: Option<f64>,
    /// First grid rate that offloaded; `None` means no feasible threshold
    /// on this grid (offloading never pays off).
    pub first_offload_rate_bps: Option<f64>,
    /// Savings at the first offloading rate vs. edge-only, percent.
    pub savings_pct_at_first_offload: Option<f64>,
    pub deadline_misses: usize,
}

/// Reduces a sweep slice to the transition point and the savings there.
pub fn summarize(rows: &[SweepRow]) -> Result<SweepSummary, SweepError> {
    if rows.is_empty() {
        return Err(SweepError::Empty);
    }
    let edge_only = rows
        .iter()
        .find(|r| r.verdict == Verdict::Local)
        .map(|r| r.energy_j);
    let first = rows.iter().find(|r| r.verdict == Verdict::Offload);
    let savings = match (edge_only, first) {
        (Some(edge), Some(f)) if edge > 0.0 => Some((edge - f.energy_j) / edge * 100.0),
        _ => None,
    };
    Ok(SweepSummary {
        rows: rows.len(),
        r_th_bps: rows[0].r_th_bps,
        edge_only_energy_j: edge_only,
        first_offload_rate_bps: first.map(|r| r.rate_bps),
        savings_pct_at_first_offload: savings,
        deadline_misses: rows.iter().filter(|r| !r.deadline_met).count(),
    })
}

/// Column order of sweep output rows.
pub const SWEEP_CSV_HEADER: &str =
    "rate_bps,quant_bits,path,r_th_bps,latency_s,energy_j,deadline_met";

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.rate_bps,
            r.quant_bits,
            r.verdict,
            r.r_th_bps,
            r.latency_s,
            r.energy_j,
            u8::from(r.deadline_met),
        ));
    }
    out
}

pub fn write_sweep_csv(
    path: impl AsRef<std::path::Path>,
    rows: &[SweepRow],
) -> std::io::Result<()> {
    std::fs::write(path, rows_to_csv(rows))
}

/// One row of the split-point scan output.
pub const SCAN_CSV_HEADER: &str = "k_p,latency_s,payload_bytes";

pub fn scan_to_csv(points: &[crate::policy::SplitPoint]) -> String {
    let mut out = String::from(SCAN_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!("{},{},{}\n", p.k_p, p.latency_s, p.payload_bytes));
    }
    out
}
