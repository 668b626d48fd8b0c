use serde::Serialize;

use super::{run_transform, BankConfig, BankTrace};
use crate::ckks::datapath::{DatapathOp, DatapathSchedule, Operand};
use crate::error::{Error, Result};
use crate::ntt::AccessSchedule;

/// When one datapath step ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OpTiming {
    pub limb: usize,
    pub op: DatapathOp,
    pub start: u64,
    /// First cycle after the step.
    pub end: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Unit {
    Bfu,
    Dma,
    Sampler,
}

/// Times a datapath schedule on two bank groups.
///
/// Transforms are replayed through the bank model (BG1's banks are numbered
/// after BG0's in the trace). Element-wise steps stream `B` elements per
/// cycle through the BFU pipeline; loads and stores move
/// `dma_words_per_cycle` words per cycle; sampled polynomials arrive at the
/// configured sampler rates. A step starts when its unit is free and the bank
/// groups it touches are done with earlier steps, so a load into one group
/// overlaps a transform in the other.
pub fn simulate_pipeline(schedule: &DatapathSchedule, cfg: &BankConfig) -> Result<BankTrace> {
    if schedule.n != cfg.n {
        return Err(Error::ConfigMismatch(format!(
            "schedule has N={}, config has N={}",
            schedule.n, cfg.n
        )));
    }
    cfg.validate()?;
    schedule.check_occupancy()?;

    let mut trace = BankTrace::default();
    if schedule.steps.is_empty() {
        return Ok(trace);
    }
    let transform = run_transform(cfg, &AccessSchedule::build(cfg.n, cfg.access_order())?);
    let n = cfg.n as u64;
    let elementwise = n.div_ceil(cfg.bfus as u64) + cfg.read_latency + cfg.pipeline_depth + 1;
    let transfer = n.div_ceil(cfg.dma_words_per_cycle as u64);

    let mut unit_free = [0u64; 3];
    // Cycle at which each bank group finishes its latest step.
    let mut bg_ready = [0u64; 2];
    // Occupancy intervals [fill start, release end) per bank group.
    let mut fill_start: [Option<u64>; 2] = [None, None];
    let mut intervals: Vec<(u64, u64)> = Vec::new();

    for step in &schedule.steps {
        let (unit, groups, duration): (Unit, &[usize], u64) = match step.op {
            DatapathOp::Load { dst, .. } => (Unit::Dma, groups_of(dst.index()), transfer),
            DatapathOp::Sample { dst, operand } => {
                let rate = if operand == Operand::Mu { cfg.uniform_samplers } else { cfg.binomial_samplers };
                (Unit::Sampler, groups_of(dst.index()), n.div_ceil(rate as u64))
            }
            DatapathOp::Ntt { bg } | DatapathOp::Intt { bg } => (Unit::Bfu, groups_of(bg.index()), transform.total_cycles),
            DatapathOp::Mul | DatapathOp::Add => (Unit::Bfu, &[0, 1], elementwise),
            DatapathOp::Store { .. } => (Unit::Dma, &[1], transfer),
        };
        let u = unit as usize;
        let start = groups.iter().map(|&g| bg_ready[g]).fold(unit_free[u], u64::max);
        let end = start + duration;
        unit_free[u] = end;
        for &g in groups {
            bg_ready[g] = end;
        }
        match step.op {
            DatapathOp::Load { dst, .. } | DatapathOp::Sample { dst, .. } => fill_start[dst.index()] = Some(start),
            DatapathOp::Ntt { bg } | DatapathOp::Intt { bg } => {
                let offset = (bg.index() * cfg.banks_per_group) as u32;
                trace.absorb(&transform, start, offset);
            }
            DatapathOp::Mul | DatapathOp::Add => {
                if let Some(s) = fill_start[0].take() {
                    intervals.push((s, end));
                }
            }
            DatapathOp::Store { .. } => {
                if let Some(s) = fill_start[1].take() {
                    intervals.push((s, end));
                }
            }
        }
        trace.timeline.push(OpTiming { limb: step.limb, op: step.op, start, end });
    }
    for s in fill_start.into_iter().flatten() {
        intervals.push((s, u64::MAX));
    }

    let mut events: Vec<(u64, i32)> = intervals.iter().flat_map(|&(s, e)| [(s, 1), (e, -1)]).collect();
    events.sort_unstable();
    let mut live = 0i32;
    for (_, d) in events {
        live += d;
        trace.peak_resident_polys = trace.peak_resident_polys.max(live as usize);
    }
    trace.conflict_count = trace.read_conflicts + trace.buffer_overflows;
    trace.total_cycles = trace.timeline.iter().map(|t| t.end).max().unwrap_or(0);
    if cfg.record_trace {
        trace.records.sort_by_key(|r| (r.cycle, r.bank, r.op as u8));
    }
    Ok(trace)
}

fn groups_of(index: usize) -> &'static [usize] {
    if index == 0 {
        &[0]
    } else {
        &[1]
    }
}
