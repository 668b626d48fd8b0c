use serde::Serialize;

use super::{simulate_ntt, BankConfig, PortModel, Reorder};
use crate::error::Result;
use crate::modarith::find_context;
use crate::ntt::NttPlan;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortModelRow {
    pub port_model: PortModel,
    pub reorder: Reorder,
    /// Conflicts with a one-word write buffer per bank.
    pub conflicts: u64,
    pub stalls: u64,
    /// Deepest write buffer needed when buffers are unbounded.
    pub required_buffer_depth: usize,
    pub total_cycles: u64,
    /// Port-weighted storage bits plus write-buffer register bits.
    pub area_proxy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortModelReport {
    pub n: usize,
    pub bfus: usize,
    pub word_bits: u32,
    pub rows: Vec<PortModelRow>,
}

impl PortModelReport {
    pub fn row(&self, port_model: PortModel, reorder: Reorder) -> Option<&PortModelRow> {
        self.rows.iter().find(|r| r.port_model == port_model && r.reorder == reorder)
    }
}

/// Runs one transform under each port model / reordering pairing.
pub fn compare_port_models<W: Word>(plan: &NttPlan<W>) -> Result<PortModelReport> {
    let base = BankConfig::for_plan(plan);
    let pairings = [
        (PortModel::TwoReadTwoWrite, Reorder::None),
        (PortModel::OneReadOneWrite, Reorder::Swap2),
        (PortModel::OneRw, Reorder::None),
        (PortModel::OneRw, Reorder::Swap2),
        (PortModel::OneRw, Reorder::Swap4),
    ];
    let mut rows = Vec::with_capacity(pairings.len());
    for (port_model, reorder) in pairings {
        let cfg = base.clone().with_port_model(port_model).with_reorder(reorder);
        let bounded = simulate_ntt(plan, &cfg)?;
        let unbounded = simulate_ntt(plan, &cfg.clone().with_write_buffer_depth(usize::MAX))?;
        let depth = unbounded.peak_wb_occupancy;
        let storage = (cfg.n as f64) * cfg.word_bits as f64 * port_model.area_weight();
        let buffers = (cfg.banks_per_group * depth) as f64 * cfg.word_bits as f64;
        rows.push(PortModelRow {
            port_model,
            reorder,
            conflicts: bounded.conflict_count,
            stalls: bounded.stall_count,
            required_buffer_depth: depth,
            total_cycles: bounded.total_cycles,
            area_proxy: storage + buffers,
        });
    }
    Ok(PortModelReport { n: base.n, bfus: base.bfus, word_bits: base.word_bits, rows })
}

/// A reference latency set against the simulated one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub n: usize,
    pub log_q: u32,
    pub reference_cycles: u64,
    pub bfus: usize,
    pub simulated_cycles: u64,
    pub ideal_issue_cycles: u64,
    pub ratio: f64,
    pub pipeline_depth: u64,
    pub stage_drain: u64,
    pub read_latency: u64,
}

/// Reference hardware latencies for one transform, `(N, log q, cycles)`.
pub const REFERENCE_LATENCIES: [(usize, u32, u64); 5] =
    [(256, 30, 103), (512, 30, 215), (1024, 30, 447), (4096, 30, 1918), (16384, 60, 34814)];

/// Simulated transform latency for each reference row and every BFU count
/// the bank layout admits. Informational only.
pub fn calibration_report() -> Result<Vec<CalibrationRow>> {
    let mut rows = Vec::new();
    for (n, log_q, reference) in REFERENCE_LATENCIES {
        let ctx = find_context::<u64>(n, log_q)?;
        for bfus in [1usize, 2, 4, 8, 16, 32].into_iter().filter(|&b| b == 1 || n >= 32 * b) {
            let plan = NttPlan::new(ctx, bfus)?;
            let cfg = BankConfig::for_plan(&plan);
            let trace = simulate_ntt(&plan, &cfg)?;
            rows.push(CalibrationRow {
                n,
                log_q,
                reference_cycles: reference,
                bfus,
                simulated_cycles: trace.total_cycles,
                ideal_issue_cycles: (n as u64 / 2) * n.trailing_zeros() as u64 / bfus as u64,
                ratio: trace.total_cycles as f64 / reference as f64,
                pipeline_depth: cfg.pipeline_depth,
                stage_drain: cfg.stage_drain,
                read_latency: cfg.read_latency,
            });
        }
    }
    Ok(rows)
}
