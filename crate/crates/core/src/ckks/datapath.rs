//! The shared encryption/decryption datapath.
//!
//! Two bank groups hold at most two polynomials. Element-wise operations read
//! BG0 and BG1, write BG1 and release BG0; transforms run in place. The same
//! op sequence drives both the functional sequencer and the cycle model.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BankGroup {
    Bg0,
    Bg1,
}

impl BankGroup {
    pub fn index(self) -> usize {
        match self {
            BankGroup::Bg0 => 0,
            BankGroup::Bg1 => 1,
        }
    }
}

/// Polynomials moving through the datapath.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Message,
    Mu,
    E0,
    E1,
    Pk0,
    Pk1,
    C0,
    C1,
    Secret,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum DatapathOp {
    /// Host-to-bank transfer.
    Load { dst: BankGroup, operand: Operand },
    /// Filled by the on-chip samplers.
    Sample { dst: BankGroup, operand: Operand },
    Ntt { bg: BankGroup },
    Intt { bg: BankGroup },
    /// `BG1 <- BG0 * BG1`, releasing BG0.
    Mul,
    /// `BG1 <- BG0 + BG1`, releasing BG0.
    Add,
    /// Bank-to-host transfer of BG1, releasing it.
    Store { operand: Operand },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub limb: usize,
    pub op: DatapathOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Encrypt,
    Decrypt,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DatapathSchedule {
    pub kind: ScheduleKind,
    pub n: usize,
    pub steps: Vec<Step>,
}

impl DatapathSchedule {
    pub fn empty(n: usize) -> Self {
        Self { kind: ScheduleKind::Empty, n, steps: Vec::new() }
    }

    /// Two datapath passes per limb: `c1 = mu*pk1 + e1`, then
    /// `c0 = mu*pk0 + e0 + m`.
    pub fn encryption(n: usize, limbs: usize) -> Self {
        use BankGroup::*;
        use DatapathOp::*;
        let mut steps = Vec::with_capacity(limbs * 19);
        for limb in 0..limbs {
            let mut push = |op| steps.push(Step { limb, op });
            for (pk, e, out, with_message) in
                [(Operand::Pk1, Operand::E1, Operand::C1, false), (Operand::Pk0, Operand::E0, Operand::C0, true)]
            {
                push(Sample { dst: Bg0, operand: Operand::Mu });
                push(Ntt { bg: Bg0 });
                push(Load { dst: Bg1, operand: pk });
                push(Mul);
                push(Sample { dst: Bg0, operand: e });
                push(Ntt { bg: Bg0 });
                push(Add);
                if with_message {
                    push(Load { dst: Bg0, operand: Operand::Message });
                    push(Ntt { bg: Bg0 });
                    push(Add);
                }
                push(Store { operand: out });
            }
        }
        Self { kind: ScheduleKind::Encrypt, n, steps }
    }

    /// One pass per listed limb: `m = iNTT(c0 + c1*s)`.
    pub fn decryption(n: usize, limbs: &[usize]) -> Self {
        use BankGroup::*;
        use DatapathOp::*;
        let mut steps = Vec::with_capacity(limbs.len() * 7);
        for &limb in limbs {
            for op in [
                Load { dst: Bg0, operand: Operand::C1 },
                Load { dst: Bg1, operand: Operand::Secret },
                Mul,
                Load { dst: Bg0, operand: Operand::C0 },
                Add,
                Intt { bg: Bg1 },
                Store { operand: Operand::Plain },
            ] {
                steps.push(Step { limb, op });
            }
        }
        Self { kind: ScheduleKind::Decrypt, n, steps }
    }

    /// Number of full datapath passes (one per stored polynomial).
    pub fn passes(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.op, DatapathOp::Store { .. })).count()
    }

    /// Checks bank-group discipline and returns the peak number of resident
    /// polynomials.
    pub fn check_occupancy(&self) -> Result<usize> {
        let mut occupied = [false; 2];
        let mut peak = 0;
        for (step, s) in self.steps.iter().enumerate() {
            let violation = |reason: &str| Error::ScheduleViolation { step, reason: reason.to_string() };
            match s.op {
                DatapathOp::Load { dst, .. } | DatapathOp::Sample { dst, .. } => {
                    if occupied[dst.index()] {
                        return Err(violation("fill of an occupied bank group"));
                    }
                    occupied[dst.index()] = true;
                }
                DatapathOp::Ntt { bg } | DatapathOp::Intt { bg } => {
                    if !occupied[bg.index()] {
                        return Err(violation("transform of an empty bank group"));
                    }
                }
                DatapathOp::Mul | DatapathOp::Add => {
                    if !(occupied[0] && occupied[1]) {
                        return Err(violation("element-wise op needs both bank groups"));
                    }
                    occupied[0] = false;
                }
                DatapathOp::Store { .. } => {
                    if !occupied[1] {
                        return Err(violation("store from an empty bank group"));
                    }
                    occupied[1] = false;
                }
            }
            peak = peak.max(occupied.iter().filter(|&&o| o).count());
        }
        Ok(peak)
    }
}
