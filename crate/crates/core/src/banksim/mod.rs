//! Cycle-approximate model of the coefficient memory.
//!
//! A bank group holds one polynomial in `4B` banks; address `a` lives in bank
//! `a mod 4B` at row `a / 4B`. Every cycle the BFUs issue `B` butterflies
//! (`2B` reads). Reads have priority: a write first lands in its bank's write
//! buffer and is committed on a later cycle in which the bank has a free
//! write port. The reordering unit collects the outputs of one butterfly
//! group and then emits `B` output pairs per cycle in address order.
//!
//! A conflict is either a cycle that needs more reads from one bank than it
//! has read ports (the bundle is split over extra stall cycles) or a write
//! arriving at a full write buffer. Stage `s + 1` starts only after every
//! write of stage `s` has been committed.

mod pipeline;
mod report;

pub use pipeline::{simulate_pipeline, OpTiming};
pub use report::{calibration_report, compare_port_models, CalibrationRow, PortModelReport, PortModelRow};

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ntt::{AccessOrder, AccessSchedule, NttPlan};
use crate::word::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PortModel {
    /// One shared read/write port per bank.
    #[serde(rename = "1rw")]
    OneRw,
    /// One read port and one independent write port.
    #[serde(rename = "1r1w")]
    OneReadOneWrite,
    /// Two read ports and two write ports.
    #[serde(rename = "2r2w")]
    TwoReadTwoWrite,
}

impl PortModel {
    pub fn read_ports(self) -> usize {
        match self {
            PortModel::OneRw | PortModel::OneReadOneWrite => 1,
            PortModel::TwoReadTwoWrite => 2,
        }
    }

    pub fn write_ports(self) -> usize {
        match self {
            PortModel::OneRw | PortModel::OneReadOneWrite => 1,
            PortModel::TwoReadTwoWrite => 2,
        }
    }

    /// Reads and writes compete for the same port.
    pub fn shared(self) -> bool {
        self == PortModel::OneRw
    }

    /// Relative cell area per stored bit, with one read plus one write port
    /// as the unit.
    pub fn area_weight(self) -> f64 {
        match self {
            PortModel::OneRw => 0.5,
            PortModel::OneReadOneWrite => 1.0,
            PortModel::TwoReadTwoWrite => 2.0,
        }
    }
}

impl fmt::Display for PortModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PortModel::OneRw => "1rw",
            PortModel::OneReadOneWrite => "1r1w",
            PortModel::TwoReadTwoWrite => "2r2w",
        })
    }
}

impl FromStr for PortModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1rw" => Ok(PortModel::OneRw),
            "1r1w" => Ok(PortModel::OneReadOneWrite),
            "2r2w" => Ok(PortModel::TwoReadTwoWrite),
            other => Err(Error::ConfigMismatch(format!("unknown port model {other:?}"))),
        }
    }
}

/// Output reordering applied by the reordering unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reorder {
    /// In-place butterflies on `(x, x + h)`; outputs written straight back.
    None,
    /// Two-butterfly swap.
    Swap2,
    /// Four-butterfly swap, generalized to `4B` butterflies.
    Swap4,
}

impl fmt::Display for Reorder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reorder::None => "none",
            Reorder::Swap2 => "swap2",
            Reorder::Swap4 => "swap4",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankConfig {
    pub n: usize,
    pub bfus: usize,
    pub banks_per_group: usize,
    pub bank_depth: usize,
    pub word_bits: u32,
    /// Write-buffer words per bank write port.
    pub write_buffer_depth: usize,
    pub port_model: PortModel,
    pub reorder: Reorder,
    /// BFU multiplier pipeline depth in cycles.
    pub pipeline_depth: u64,
    /// Minimum idle cycles between the last issue of a stage and the first
    /// issue of the next.
    pub stage_drain: u64,
    pub read_latency: u64,
    /// Words per cycle moved by the host interface for loads and stores.
    pub dma_words_per_cycle: usize,
    /// Ternary/uniform samplers, one coefficient per cycle each.
    pub uniform_samplers: usize,
    /// Binomial samplers, one coefficient per cycle each.
    pub binomial_samplers: usize,
    pub record_trace: bool,
}

impl BankConfig {
    /// 1RW banks, swap4 reordering and a one-word write buffer.
    pub fn new(n: usize, bfus: usize, word_bits: u32) -> Self {
        let banks = 4 * bfus;
        Self {
            n,
            bfus,
            banks_per_group: banks,
            bank_depth: n / banks,
            word_bits,
            write_buffer_depth: 1,
            port_model: PortModel::OneRw,
            reorder: Reorder::Swap4,
            pipeline_depth: 3,
            stage_drain: 3,
            read_latency: 1,
            dma_words_per_cycle: banks,
            uniform_samplers: 4 * bfus,
            binomial_samplers: 1,
            record_trace: false,
        }
    }

    pub fn for_plan<W: Word>(plan: &NttPlan<W>) -> Self {
        Self::new(plan.n(), plan.bfus(), plan.ctx().bits())
    }

    pub fn with_port_model(mut self, port_model: PortModel) -> Self {
        self.port_model = port_model;
        self
    }

    pub fn with_reorder(mut self, reorder: Reorder) -> Self {
        self.reorder = reorder;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn with_write_buffer_depth(mut self, depth: usize) -> Self {
        self.write_buffer_depth = depth;
        self
    }

    pub fn access_order(&self) -> AccessOrder {
        match self.reorder {
            Reorder::None => AccessOrder::InPlace,
            Reorder::Swap2 => AccessOrder::swap2(),
            Reorder::Swap4 => AccessOrder::swap4(self.bfus),
        }
    }

    #[inline]
    pub fn bank_of(&self, addr: u32) -> u32 {
        addr % self.banks_per_group as u32
    }

    #[inline]
    pub fn row_of(&self, addr: u32) -> u32 {
        addr / self.banks_per_group as u32
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigMismatch(msg));
        if self.n < 8 || !self.n.is_power_of_two() {
            return bad(format!("degree {} is not a power of two >= 8", self.n));
        }
        if self.bfus == 0 || !self.bfus.is_power_of_two() {
            return bad(format!("BFU count {} is not a power of two", self.bfus));
        }
        if self.banks_per_group * self.bank_depth != self.n {
            return bad(format!(
                "{} banks of depth {} do not hold {} words",
                self.banks_per_group, self.bank_depth, self.n
            ));
        }
        if self.write_buffer_depth == 0 {
            return bad("write buffer depth must be at least 1".into());
        }
        if self.dma_words_per_cycle == 0 || self.uniform_samplers == 0 || self.binomial_samplers == 0 {
            return bad("transfer and sampler rates must be positive".into());
        }
        let group_words = 2 * self.access_order().group_size();
        if self.reorder == Reorder::Swap4 && self.n < group_words {
            return bad(format!("swap4 with {} BFUs needs N >= {}", self.bfus, group_words));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Read,
    Write,
    Stall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Source {
    Bfu(u32),
    WriteBuffer,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Bfu(i) => write!(f, "bfu_{i}"),
            Source::WriteBuffer => f.write_str("write_buffer"),
        }
    }
}

impl Serialize for Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One bank event. Field order matches the CSV columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TraceRecord {
    pub cycle: u64,
    pub bank: u32,
    pub op: Op,
    pub addr: u32,
    pub source: Source,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StageTiming {
    pub stage: usize,
    pub start: u64,
    pub last_issue: u64,
    /// Cycle of the stage's last write commit.
    pub end: u64,
    pub butterflies: u64,
    /// Cycles spent issuing, including stall cycles.
    pub issue_cycles: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BankTrace {
    #[serde(skip)]
    pub records: Vec<TraceRecord>,
    pub conflict_count: u64,
    pub read_conflicts: u64,
    pub buffer_overflows: u64,
    pub stall_count: u64,
    pub total_cycles: u64,
    /// Deepest write buffer seen, in words per write port.
    pub peak_wb_occupancy: usize,
    /// Output pairs held by the reordering unit at its fullest.
    pub peak_ru_pairs: usize,
    pub butterflies: u64,
    pub peak_resident_polys: usize,
    pub stages: Vec<StageTiming>,
    pub timeline: Vec<OpTiming>,
}

/// The summary fields exported as JSON.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub total_cycles: u64,
    pub conflicts: u64,
    pub stalls: u64,
    pub peak_wb_occupancy: usize,
    pub peak_resident_polys: usize,
}

impl BankTrace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            total_cycles: self.total_cycles,
            conflicts: self.conflict_count,
            stalls: self.stall_count,
            peak_wb_occupancy: self.peak_wb_occupancy,
            peak_resident_polys: self.peak_resident_polys,
        }
    }

    /// Largest number of operations any bank sees in one cycle.
    pub fn max_ops_per_bank_cycle(&self) -> usize {
        let mut sorted: Vec<(u64, u32)> = self
            .records
            .iter()
            .filter(|r| r.op != Op::Stall)
            .map(|r| (r.cycle, r.bank))
            .collect();
        sorted.sort_unstable();
        sorted.chunk_by(|a, b| a == b).map(|c| c.len()).max().unwrap_or(0)
    }

    fn absorb(&mut self, other: &BankTrace, cycle_offset: u64, bank_offset: u32) {
        self.conflict_count += other.conflict_count;
        self.read_conflicts += other.read_conflicts;
        self.buffer_overflows += other.buffer_overflows;
        self.stall_count += other.stall_count;
        self.butterflies += other.butterflies;
        self.peak_wb_occupancy = self.peak_wb_occupancy.max(other.peak_wb_occupancy);
        self.peak_ru_pairs = self.peak_ru_pairs.max(other.peak_ru_pairs);
        self.records.extend(other.records.iter().map(|r| TraceRecord {
            cycle: r.cycle + cycle_offset,
            bank: r.bank + bank_offset,
            ..*r
        }));
    }
}

/// Replays the address stream of `plan` (with `cfg.reorder` reordering)
/// against the bank model.
pub fn simulate_ntt<W: Word>(plan: &NttPlan<W>, cfg: &BankConfig) -> Result<BankTrace> {
    if cfg.n != plan.n() || cfg.bfus != plan.bfus() {
        return Err(Error::ConfigMismatch(format!(
            "plan has N={} B={}, config has N={} B={}",
            plan.n(),
            plan.bfus(),
            cfg.n,
            cfg.bfus
        )));
    }
    cfg.validate()?;
    let schedule = AccessSchedule::build(cfg.n, cfg.access_order())?;
    Ok(run_transform(cfg, &schedule))
}

/// Runs one transform starting at cycle 0.
pub(crate) fn run_transform(cfg: &BankConfig, schedule: &AccessSchedule) -> BankTrace {
    let banks = cfg.banks_per_group;
    let lanes = cfg.bfus;
    let read_ports = cfg.port_model.read_ports();
    let mut trace = BankTrace::default();
    let mut buffers: Vec<VecDeque<(u32, u64)>> = vec![VecDeque::new(); banks];
    let mut cycle = 0u64;
    let mut last_commit = 0u64;

    for (stage, groups) in schedule.stages.iter().enumerate() {
        let start = cycle;

        // Issue: bundles of `lanes` butterflies, split when a bank is over-read.
        let mut reads: Vec<Vec<(u32, u32, u32)>> = Vec::new(); // per cycle: (bank, addr, lane)
        let mut done: Vec<u64> = Vec::with_capacity(cfg.n / 2);
        let flat: Vec<[u32; 2]> = groups.iter().flat_map(|g| g.reads.iter().copied()).collect();
        let mut per_bank = vec![0usize; banks];
        for bundle in flat.chunks(lanes) {
            per_bank.iter_mut().for_each(|c| *c = 0);
            let base = reads.len();
            for (lane, pair) in bundle.iter().enumerate() {
                for &addr in pair {
                    let bank = cfg.bank_of(addr) as usize;
                    let slot = per_bank[bank] / read_ports;
                    per_bank[bank] += 1;
                    if reads.len() <= base + slot {
                        reads.resize_with(base + slot + 1, Vec::new);
                    }
                    reads[base + slot].push((bank as u32, addr, lane as u32));
                }
            }
            for (bank, &count) in per_bank.iter().enumerate() {
                if count > read_ports {
                    trace.read_conflicts += (count - read_ports) as u64;
                    if cfg.record_trace {
                        for extra in 1..count.div_ceil(read_ports) {
                            trace.records.push(TraceRecord {
                                cycle: start + (base + extra) as u64,
                                bank: bank as u32,
                                op: Op::Stall,
                                addr: 0,
                                source: Source::Bfu(0),
                            });
                        }
                    }
                }
            }
            let span = (reads.len() - base) as u64;
            trace.stall_count += span - 1;
            let finish = start + reads.len() as u64 - 1 + cfg.read_latency + cfg.pipeline_depth;
            done.extend(std::iter::repeat_n(finish, bundle.len()));
        }
        let last_issue = start + reads.len() as u64 - 1;

        // Reordering unit: a group's words become available once its last
        // butterfly completes; at most `2B` words leave per cycle.
        let mut arrivals: Vec<Vec<u32>> = Vec::new();
        let mut ru_events: Vec<(u64, i64)> = Vec::with_capacity(2 * flat.len());
        let mut first = 0usize;
        let (mut cur, mut used) = (0u64, 0usize);
        for g in groups {
            let ready = done[first..first + g.reads.len()].iter().copied().max().unwrap_or(start);
            for &d in &done[first..first + g.reads.len()] {
                ru_events.push((d, 2));
            }
            first += g.reads.len();
            for w in &g.writes {
                if ready + 1 > cur {
                    cur = ready + 1;
                    used = 0;
                }
                if used == 2 * lanes {
                    cur += 1;
                    used = 0;
                }
                used += 1;
                let rel = (cur - start) as usize;
                if arrivals.len() <= rel {
                    arrivals.resize_with(rel + 1, Vec::new);
                }
                arrivals[rel].push(w.addr);
                ru_events.push((cur, -1));
            }
        }
        ru_events.sort_unstable();
        let mut held = 0i64;
        for (_, delta) in &ru_events {
            held += delta;
            trace.peak_ru_pairs = trace.peak_ru_pairs.max((held as usize).div_ceil(2));
        }

        // Banks: commit buffered writes on free ports, then accept arrivals.
        let mut read_count = vec![0usize; banks];
        let mut pending = 0usize;
        let mut t = start;
        loop {
            let rel = (t - start) as usize;
            read_count.iter_mut().for_each(|c| *c = 0);
            if let Some(rs) = reads.get(rel) {
                for &(bank, addr, lane) in rs {
                    read_count[bank as usize] += 1;
                    if cfg.record_trace {
                        trace.records.push(TraceRecord {
                            cycle: t,
                            bank,
                            op: Op::Read,
                            addr,
                            source: Source::Bfu(lane),
                        });
                    }
                }
            }
            if pending > 0 {
                for (bank, buf) in buffers.iter_mut().enumerate() {
                    let ports = if cfg.port_model.shared() {
                        usize::from(read_count[bank] == 0)
                    } else {
                        cfg.port_model.write_ports()
                    };
                    for _ in 0..ports {
                        match buf.front() {
                            Some(&(addr, arrived)) if arrived < t => {
                                buf.pop_front();
                                pending -= 1;
                                last_commit = t;
                                if cfg.record_trace {
                                    trace.records.push(TraceRecord {
                                        cycle: t,
                                        bank: bank as u32,
                                        op: Op::Write,
                                        addr,
                                        source: Source::WriteBuffer,
                                    });
                                }
                            }
                            _ => break,
                        }
                    }
                }
            }
            if let Some(ws) = arrivals.get(rel) {
                for &addr in ws {
                    let bank = cfg.bank_of(addr) as usize;
                    buffers[bank].push_back((addr, t));
                    pending += 1;
                    let occ = buffers[bank].len().div_ceil(cfg.port_model.write_ports());
                    if occ > cfg.write_buffer_depth {
                        trace.buffer_overflows += 1;
                    }
                    trace.peak_wb_occupancy = trace.peak_wb_occupancy.max(occ);
                }
            }
            if pending == 0 && rel + 1 >= arrivals.len() && rel + 1 >= reads.len() {
                break;
            }
            t += 1;
        }

        trace.butterflies += flat.len() as u64;
        trace.stages.push(StageTiming {
            stage,
            start,
            last_issue,
            end: last_commit,
            butterflies: flat.len() as u64,
            issue_cycles: reads.len() as u64,
        });
        cycle = (last_commit + 1).max(last_issue + 1 + cfg.stage_drain);
    }

    trace.conflict_count = trace.read_conflicts + trace.buffer_overflows;
    trace.total_cycles = last_commit + 1;
    if cfg.record_trace {
        trace.records.sort_by_key(|r| (r.cycle, r.bank, r.op as u8));
    }
    trace
}
