//! Error and uniform samplers driven by the Keccak stream.
//!
//! Bits are consumed least-significant first from each squeezed byte. A
//! polynomial draw always starts on a byte boundary; any bits left over in
//! the final byte of a draw are discarded.

use serde::{Deserialize, Serialize};

use crate::keccak::KeccakSponge;
use crate::modarith::ModulusContext;
use crate::word::Word;

/// Bits per Hamming-weight operand of the binomial sampler (`sigma^2 = k/2`).
pub const BINOMIAL_K: u32 = 21;

/// Ternary rejection: 8-bit chunks, values `>= TERNARY_THRESHOLD` are redrawn.
/// The accepted range 0..=254 holds 255 = 3 * 85 values, so residues 0, 1, 2
/// are equally likely.
pub const TERNARY_CHUNK_BITS: u32 = 8;
pub const TERNARY_THRESHOLD: u32 = 255;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    BinomialK21,
    TernaryUniform,
    UniformModQ,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledPolynomial {
    pub coeffs: Vec<i64>,
    pub distribution: Distribution,
    pub n: usize,
}

impl SampledPolynomial {
    /// Lifts into `Z_q`; negative values become `q - |c|`.
    pub fn to_residues<W: Word>(&self, ctx: &ModulusContext<W>) -> Vec<W> {
        self.coeffs.iter().map(|&c| ctx.from_i64(c)).collect()
    }

    pub fn infinity_norm(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

/// Pulls an exact number of bits from a sponge.
pub struct BitReader<'a> {
    sponge: &'a mut KeccakSponge,
    buf: u128,
    avail: u32,
    consumed: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(sponge: &'a mut KeccakSponge) -> Self {
        sponge.finalize();
        Self { sponge, buf: 0, avail: 0, consumed: 0 }
    }

    /// Next `width` bits (`width <= 64`) as an integer, first bit in bit 0.
    #[inline]
    pub fn read(&mut self, width: u32) -> u64 {
        debug_assert!(width <= 64);
        while self.avail < width {
            let mut byte = [0u8; 1];
            self.sponge.squeeze_into(&mut byte);
            self.buf |= (byte[0] as u128) << self.avail;
            self.avail += 8;
        }
        let out = (self.buf & ((1u128 << width) - 1)) as u64;
        self.buf >>= width;
        self.avail -= width;
        self.consumed += width as u64;
        out
    }

    /// Bits handed out so far (excluding discarded padding).
    pub fn bits_consumed(&self) -> u64 {
        self.consumed
    }
}

/// `HW(x) - HW(y)` over the low 21 bits of each operand.
#[inline]
pub fn binomial_coefficient(x: u32, y: u32) -> i64 {
    let mask = (1u32 << BINOMIAL_K) - 1;
    (x & mask).count_ones() as i64 - (y & mask).count_ones() as i64
}

/// Maps an 8-bit chunk to `{-1, 0, 1}`, or `None` when it must be redrawn.
#[inline]
pub fn ternary_from_chunk(chunk: u32) -> Option<i64> {
    if chunk >= TERNARY_THRESHOLD {
        return None;
    }
    Some(mod3_branchless(chunk) as i64 - 1)
}

/// `v mod 3` for `v < 256` by multiply-shift (171 / 512 ≈ 1/3).
#[inline(always)]
fn mod3_branchless(v: u32) -> u32 {
    v - 3 * ((v * 171) >> 9)
}

#[inline]
pub fn uniform_from_chunk(chunk: u64, q: u64) -> Option<u64> {
    (chunk < q).then_some(chunk)
}

/// Centered binomial samples with `k = 21`; consumes exactly `42 * n` bits.
pub fn sample_binomial(stream: &mut KeccakSponge, n: usize) -> SampledPolynomial {
    let mut reader = BitReader::new(stream);
    let coeffs = (0..n)
        .map(|_| {
            let x = reader.read(BINOMIAL_K) as u32;
            let y = reader.read(BINOMIAL_K) as u32;
            binomial_coefficient(x, y)
        })
        .collect();
    SampledPolynomial { coeffs, distribution: Distribution::BinomialK21, n }
}

/// Uniform ternary samples by rejection on 8-bit chunks; the expected number
/// of chunks per coefficient is 256/255.
pub fn sample_ternary(stream: &mut KeccakSponge, n: usize) -> SampledPolynomial {
    let mut reader = BitReader::new(stream);
    let coeffs = (0..n)
        .map(|_| loop {
            if let Some(c) = ternary_from_chunk(reader.read(TERNARY_CHUNK_BITS) as u32) {
                break c;
            }
        })
        .collect();
    SampledPolynomial { coeffs, distribution: Distribution::TernaryUniform, n }
}

/// Uniform residues by rejection on `ceil(log2 q)`-bit chunks (expected
/// fewer than two chunks per coefficient).
pub fn sample_uniform_mod_q<W: Word>(
    stream: &mut KeccakSponge,
    n: usize,
    ctx: &ModulusContext<W>,
) -> SampledPolynomial {
    let q = ctx.q().to_u64();
    let width = ctx.bits();
    let mut reader = BitReader::new(stream);
    let coeffs = (0..n)
        .map(|_| loop {
            if let Some(v) = uniform_from_chunk(reader.read(width), q) {
                break v as i64;
            }
        })
        .collect();
    SampledPolynomial { coeffs, distribution: Distribution::UniformModQ, n }
}
