//! Negacyclic NTT with swap-based output reordering for single-port banks.
//!
//! The forward transform takes its input in bit-reversed order and returns
//! `NTT(a)[k] = sum_i a_i * psi^((2k+1) i)` in normal order. Every butterfly
//! reads two *adjacent* physical words `(idx, idx + 1)`. Butterflies are
//! issued in groups of `2 * half` (four for one BFU, `4B` for `B` parallel
//! BFUs); each group is read at
//!
//! ```text
//! idx = j + k + 2t          for t in 0..half
//! idx = j + k + 2m + 2t     for t in 0..half
//! j in (0..2m).step_by(2 * half),  k in (0..N).step_by(4m)
//! ```
//!
//! and its outputs are written back into the same words with all first
//! outputs ahead of all second outputs, which makes the next stage's pairs
//! adjacent again. `m` starts at `half`, doubles per stage and wraps back to
//! `half` after reaching `N/4`. The loop runs `log2 N` stages. After the last
//! stage the physical layout differs from normal order by a rotation of the
//! address bits above `log2(2 * half)`; for one BFU this is the gather
//! `phy = {i[L-3:2], i[L-1:L-2], i[1:0]}`.
//!
//! Twiddles are generated on the fly: within a stage the twiddle advances by
//! `omega_m = psi^(N/h)` every `N/(2h)` butterflies (`h = 2^stage`). The
//! forward transform folds `psi` in by starting each stage at `psi^(N/2h)`.
//!
//! The inverse reuses the forward access stream exactly: cyclic twiddles
//! starting at 1 with `omega_m^-1`, then one pass multiplying by
//! `n^-1 * psi^-i`. It consumes the normal-order NTT vector and returns the
//! coefficients in the bit-reversed order the forward transform consumes, so
//! `intt_swap4(ntt_swap4(a)) == a`.

use crate::error::{Error, Result};
use crate::modarith::ModulusContext;
use crate::word::Word;

/// Supported parallel butterfly counts.
pub const SUPPORTED_BFUS: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// How butterflies are grouped and where their outputs are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AccessOrder {
    /// Textbook in-place DIT: pairs `(x, x + h)`, results written back to the
    /// words they were read from. No reordering unit.
    InPlace,
    /// Swap reordering over groups of `2 * half` butterflies. `half = 1` is
    /// the two-butterfly swap, `half = 2B` the generalized four-way swap.
    Swap { half: usize },
}

impl AccessOrder {
    pub fn swap2() -> Self {
        AccessOrder::Swap { half: 1 }
    }

    /// Four-butterfly swap generalized to `4 * bfus` butterflies.
    pub fn swap4(bfus: usize) -> Self {
        AccessOrder::Swap { half: 2 * bfus }
    }

    pub fn group_size(&self) -> usize {
        match *self {
            AccessOrder::InPlace => 1,
            AccessOrder::Swap { half } => 2 * half,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidDegree(n));
        }
        if let AccessOrder::Swap { half } = *self {
            if half == 0 || !half.is_power_of_two() || n < 4 * half {
                return Err(Error::InvalidPlan(format!(
                    "swap groups of {} butterflies need N >= {}",
                    2 * half,
                    4 * half
                )));
            }
        }
        Ok(())
    }
}

/// One butterfly group as seen by the memory system.
pub struct GroupRef<'a> {
    /// Operand addresses of each butterfly in issue order.
    pub reads: &'a [[usize; 2]],
    /// Destination address of each output slot; slot `2t` is the sum output
    /// of butterfly `t`, slot `2t + 1` the difference output.
    pub dest: &'a [usize],
    /// Output slots in the order the reordering unit emits them.
    pub emit: &'a [usize],
}

/// Calls `f(stage, group)` for every butterfly group in issue order.
pub fn visit_groups(n: usize, order: AccessOrder, mut f: impl FnMut(usize, &GroupRef<'_>)) {
    order.validate(n).expect("access order valid for degree");
    let log_n = n.trailing_zeros() as usize;
    match order {
        AccessOrder::InPlace => {
            let emit = [0usize, 1];
            for stage in 0..log_n {
                let h = 1 << stage;
                for j in 0..h {
                    for x in (j..n).step_by(2 * h) {
                        let reads = [[x, x + h]];
                        let dest = [x, x + h];
                        f(stage, &GroupRef { reads: &reads, dest: &dest, emit: &emit });
                    }
                }
            }
        }
        AccessOrder::Swap { half } => {
            let g = 2 * half;
            let mut idx = vec![0usize; g];
            let mut reads = vec![[0usize; 2]; g];
            let mut dest = vec![0usize; 2 * g];
            // Emission walks the group's words in address order: word 2u gets
            // the first output of butterfly u' and so on.
            let emit: Vec<usize> =
                (0..2 * g).map(|p| if p < g { 2 * p } else { 2 * (p - g) + 1 }).collect();
            let mut m = half;
            for stage in 0..log_n {
                for j in (0..2 * m).step_by(2 * half) {
                    for k in (0..n).step_by(4 * m) {
                        for t in 0..half {
                            idx[t] = j + k + 2 * t;
                            idx[half + t] = j + k + 2 * m + 2 * t;
                        }
                        for (t, &i) in idx.iter().enumerate() {
                            reads[t] = [i, i + 1];
                        }
                        // Word p of the group receives first outputs for p < g,
                        // second outputs otherwise.
                        for (p, &slot) in emit.iter().enumerate() {
                            let word = idx[p / 2] + (p & 1);
                            dest[slot] = word;
                        }
                        f(stage, &GroupRef { reads: &reads, dest: &dest, emit: &emit });
                    }
                }
                m = if m == n / 4 { half } else { 2 * m };
            }
        }
    }
}

/// Physical address holding output index `i` after the last stage.
pub fn final_gather(n: usize, order: AccessOrder) -> Vec<u32> {
    order.validate(n).expect("access order valid for degree");
    let log_n = n.trailing_zeros();
    match order {
        AccessOrder::InPlace => (0..n as u32).collect(),
        AccessOrder::Swap { half } => {
            let fixed = (2 * half).trailing_zeros();
            let width = log_n - fixed;
            let low_mask = (1usize << fixed) - 1;
            (0..n)
                .map(|i| {
                    let mut phy = i & low_mask;
                    for p in 0..width {
                        let logical = fixed + (p + width - log_n % width) % width;
                        phy |= ((i >> logical) & 1) << (fixed + p);
                    }
                    phy as u32
                })
                .collect()
        }
    }
}

/// A materialized address stream, as replayed by the bank simulator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessSchedule {
    pub n: usize,
    pub order: AccessOrder,
    pub stages: Vec<Vec<ButterflyGroup>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ButterflyGroup {
    pub reads: Vec<[u32; 2]>,
    /// Writes in emission order.
    pub writes: Vec<WriteSlot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WriteSlot {
    pub addr: u32,
    /// Index within the group of the butterfly producing this word.
    pub butterfly: u32,
}

impl AccessSchedule {
    pub fn build(n: usize, order: AccessOrder) -> Result<Self> {
        order.validate(n)?;
        let log_n = n.trailing_zeros() as usize;
        let mut stages: Vec<Vec<ButterflyGroup>> = (0..log_n).map(|_| Vec::new()).collect();
        visit_groups(n, order, |stage, g| {
            stages[stage].push(ButterflyGroup {
                reads: g.reads.iter().map(|&[x, y]| [x as u32, y as u32]).collect(),
                writes: g
                    .emit
                    .iter()
                    .map(|&slot| WriteSlot { addr: g.dest[slot] as u32, butterfly: (slot / 2) as u32 })
                    .collect(),
            });
        });
        Ok(Self { n, order, stages })
    }

    pub fn butterfly_count(&self) -> usize {
        self.stages.iter().flatten().map(|g| g.reads.len()).sum()
    }
}

/// Per-stage twiddle generator setup for `B` lanes.
#[derive(Clone, Debug)]
struct LaneSetup<W: Word> {
    init: Vec<W>,
    stride: W,
    /// Cycles between stride multiplications.
    period: usize,
}

impl<W: Word> LaneSetup<W> {
    /// Butterfly `g` of the stage uses `start * step^(g / run)`; lane `b`
    /// handles butterflies `g = c * lanes + b`.
    fn new(ctx: &ModulusContext<W>, start: W, step: W, run: usize, lanes: usize) -> Self {
        if run >= lanes {
            Self { init: vec![start; lanes], stride: step, period: run / lanes }
        } else {
            let init = (0..lanes)
                .map(|b| ctx.barrett_mul(start, ctx.pow(step, (b / run) as u64)))
                .collect();
            Self { init, stride: ctx.pow(step, (lanes / run) as u64), period: 1 }
        }
    }
}

/// Transform plan for one modulus, degree and BFU count.
#[derive(Clone, Debug)]
pub struct NttPlan<W: Word> {
    ctx: ModulusContext<W>,
    bfus: usize,
    order: AccessOrder,
    forward: Vec<LaneSetup<W>>,
    inverse: Vec<LaneSetup<W>>,
    gather: Vec<u32>,
}

impl<W: Word> NttPlan<W> {
    pub fn new(ctx: ModulusContext<W>, bfus: usize) -> Result<Self> {
        let n = ctx.n();
        if !SUPPORTED_BFUS.contains(&bfus) {
            return Err(Error::InvalidPlan(format!("unsupported BFU count {bfus}")));
        }
        if bfus > 1 && n < 32 * bfus {
            return Err(Error::InvalidPlan(format!("{bfus} BFUs need N >= {}", 32 * bfus)));
        }
        // Sizes below 8 cannot form a four-butterfly group.
        let order = if n >= 8 { AccessOrder::swap4(bfus) } else { AccessOrder::InPlace };
        let log_n = n.trailing_zeros();
        let psi = ctx.psi();
        let psi_inv = ctx.psi_inv();
        let mut forward = Vec::with_capacity(log_n as usize);
        let mut inverse = Vec::with_capacity(log_n as usize);
        for stage in 0..log_n {
            let h = 1usize << stage;
            let run = n / (2 * h);
            let omega_m = ctx.pow(psi, (n / h) as u64);
            let omega_m_inv = ctx.pow(psi_inv, (n / h) as u64);
            let start = ctx.pow(psi, run as u64);
            forward.push(LaneSetup::new(&ctx, start, omega_m, run, bfus));
            inverse.push(LaneSetup::new(&ctx, W::one(), omega_m_inv, run, bfus));
        }
        let gather = final_gather(n, order);
        Ok(Self { ctx, bfus, order, forward, inverse, gather })
    }

    pub fn ctx(&self) -> &ModulusContext<W> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn bfus(&self) -> usize {
        self.bfus
    }

    pub fn order(&self) -> AccessOrder {
        self.order
    }

    /// The address stream this plan's transforms follow.
    pub fn access_schedule(&self) -> AccessSchedule {
        AccessSchedule::build(self.n(), self.order).expect("plan order is valid")
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DegreeMismatch { expected: self.n(), got: len });
        }
        Ok(())
    }

    fn run_stages(&self, a: &mut [W], setup: &[LaneSetup<W>], mut observe: impl FnMut(usize, W)) {
        let ctx = &self.ctx;
        let lanes = self.bfus;
        let mut scratch = vec![W::zero(); 2 * self.order.group_size()];
        let mut current = usize::MAX;
        let mut omega: Vec<W> = Vec::new();
        let mut lane = 0;
        let mut cycles = 0;
        visit_groups(self.n(), self.order, |stage, g| {
            if stage != current {
                current = stage;
                omega.clone_from(&setup[stage].init);
                lane = 0;
                cycles = 0;
            }
            let lanes_setup = &setup[stage];
            for (t, &[x, y]) in g.reads.iter().enumerate() {
                let w = omega[lane];
                observe(stage, w);
                let v = ctx.barrett_mul(a[y], w);
                let (s, d) = ctx.mod_add_sub(a[x], v);
                scratch[2 * t] = s;
                scratch[2 * t + 1] = d;
                lane += 1;
                if lane == lanes {
                    lane = 0;
                    cycles += 1;
                    if cycles == lanes_setup.period {
                        cycles = 0;
                        for w in omega.iter_mut() {
                            *w = ctx.barrett_mul(*w, lanes_setup.stride);
                        }
                    }
                }
            }
            for (slot, &addr) in g.dest.iter().enumerate() {
                a[addr] = scratch[slot];
            }
        });
    }

    /// Forward transform of a bit-reversed input, in place; normal-order output.
    pub fn ntt_swap4_in_place(&self, a: &mut [W]) -> Result<()> {
        self.check_len(a.len())?;
        self.run_stages(a, &self.forward, |_, _| {});
        let physical = a.to_vec();
        for (out, &phy) in a.iter_mut().zip(&self.gather) {
            *out = physical[phy as usize];
        }
        Ok(())
    }

    pub fn ntt_swap4(&self, a: &[W]) -> Result<Vec<W>> {
        let mut out = a.to_vec();
        self.ntt_swap4_in_place(&mut out)?;
        Ok(out)
    }

    /// Inverse of [`ntt_swap4`](Self::ntt_swap4): normal-order NTT values in,
    /// bit-reversed coefficients out.
    pub fn intt_swap4(&self, a_hat: &[W]) -> Result<Vec<W>> {
        self.check_len(a_hat.len())?;
        let n = self.n();
        let log_n = n.trailing_zeros();
        let mut z: Vec<W> = (0..n).map(|p| a_hat[reverse_bits(p, log_n)]).collect();
        self.run_stages(&mut z, &self.inverse, |_, _| {});
        let ctx = &self.ctx;
        let mut out = vec![W::zero(); n];
        let mut twist = ctx.n_inv();
        for (i, &phy) in self.gather.iter().enumerate() {
            out[reverse_bits(i, log_n)] = ctx.barrett_mul(z[phy as usize], twist);
            twist = ctx.barrett_mul(twist, ctx.psi_inv());
        }
        Ok(out)
    }

    /// Normal-order coefficients to normal-order NTT values.
    pub fn forward(&self, coeffs: &[W]) -> Result<Vec<W>> {
        self.check_len(coeffs.len())?;
        let mut a = bit_reverse(coeffs);
        self.ntt_swap4_in_place(&mut a)?;
        Ok(a)
    }

    /// Normal-order NTT values to normal-order coefficients.
    pub fn inverse(&self, values: &[W]) -> Result<Vec<W>> {
        Ok(bit_reverse(&self.intt_swap4(values)?))
    }

    /// `a * b mod (X^N + 1, q)` for normal-order coefficient vectors.
    pub fn poly_mul_negacyclic(&self, a: &[W], b: &[W]) -> Result<Vec<W>> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        let fa = self.forward(a)?;
        let fb = self.forward(b)?;
        let prod: Vec<W> = fa.iter().zip(&fb).map(|(&x, &y)| self.ctx.barrett_mul(x, y)).collect();
        self.inverse(&prod)
    }

    /// Twiddle factors in issue order, per stage, as generated on the fly.
    pub fn twiddle_trace(&self, inverse: bool) -> Vec<Vec<W>> {
        let log_n = self.n().trailing_zeros() as usize;
        let mut trace = vec![Vec::with_capacity(self.n() / 2); log_n];
        let mut scratch = vec![W::zero(); self.n()];
        let setup = if inverse { &self.inverse } else { &self.forward };
        self.run_stages(&mut scratch, setup, |stage, w| trace[stage].push(w));
        trace
    }
}

#[inline]
pub fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Moves element `i` to `reverse_bits(i, log2 N)`. The length must be a
/// power of two.
pub fn bit_reverse<T: Copy>(a: &[T]) -> Vec<T> {
    assert!(a.len().is_power_of_two(), "bit reversal needs a power-of-two length");
    let bits = a.len().trailing_zeros();
    (0..a.len()).map(|i| a[reverse_bits(i, bits)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modarith::find_context;

    #[test]
    fn bit_reverse_examples() {
        assert_eq!(bit_reverse(&[5, 9]), vec![5, 9]);
        let v: Vec<u32> = (0..8).collect();
        let r = bit_reverse(&v);
        assert_eq!(r, vec![0, 4, 2, 6, 1, 5, 3, 7]);
        assert_eq!(bit_reverse(&r), v);
    }

    #[test]
    fn stage_access_order_single_bfu() {
        let sched = AccessSchedule::build(32, AccessOrder::swap4(1)).unwrap();
        let pairs = |g: &ButterflyGroup| g.reads.iter().map(|r| (r[0], r[1])).collect::<Vec<_>>();
        assert_eq!(pairs(&sched.stages[0][0]), vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
        // After the swap, words 0..8 hold a0, a2, a4, a6, a1, a3, a5, a7.
        let w: Vec<u32> = sched.stages[0][0].writes.iter().map(|w| w.addr).collect();
        assert_eq!(w, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        let src: Vec<u32> = sched.stages[0][0].writes.iter().map(|w| w.butterfly).collect();
        assert_eq!(src, vec![0, 1, 2, 3, 0, 1, 2, 3]);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn final_gather_matches_single_bfu_bit_manipulation() {
        for log_n in 5..=14u32 {
            let n = 1usize << log_n;
            let gather = final_gather(n, AccessOrder::swap4(1));
            for i in 0..n {
                let lo = i & 3;
                let top = (i >> (log_n - 2)) & 3;
                let mid = (i >> 2) & ((1 << (log_n - 4)) - 1);
                let phy = (mid << 4) | (top << 2) | lo;
                assert_eq!(gather[i] as usize, phy, "N={n} i={i}");
            }
        }
    }

    #[test]
    fn degree_mismatch_is_reported() {
        let plan = NttPlan::new(find_context::<u32>(16, 20).unwrap(), 1).unwrap();
        assert_eq!(
            plan.ntt_swap4(&[0; 8]),
            Err(Error::DegreeMismatch { expected: 16, got: 8 })
        );
        assert!(plan.intt_swap4(&[0; 32]).is_err());
    }

    #[test]
    fn rejects_bad_bfu_counts() {
        let ctx = find_context::<u32>(64, 30).unwrap();
        assert!(NttPlan::new(ctx, 3).is_err());
        assert!(NttPlan::new(ctx, 4).is_err());
        assert!(NttPlan::new(ctx, 2).is_ok());
    }

    #[test]
    fn zero_maps_to_zero() {
        let plan = NttPlan::new(find_context::<u64>(64, 60).unwrap(), 2).unwrap();
        assert_eq!(plan.ntt_swap4(&[0; 64]).unwrap(), vec![0; 64]);
        assert_eq!(plan.intt_swap4(&[0; 64]).unwrap(), vec![0; 64]);
    }
}
