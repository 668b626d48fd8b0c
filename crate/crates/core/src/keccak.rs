//! Keccak-f[1600] and the extendable-output sponge feeding the samplers.
//!
//! The sponge runs at a 1088-bit rate (512-bit capacity) with the standard
//! XOF domain-separation byte, so the output stream equals SHAKE256 of the
//! absorbed seed.

use crate::error::{Error, Result};

/// Rate in bits.
pub const RATE_BITS: usize = 1088;
/// Rate in bytes.
pub const RATE_BYTES: usize = RATE_BITS / 8;
/// Capacity in bits.
pub const CAPACITY_BITS: usize = 1600 - RATE_BITS;

const XOF_DOMAIN: u8 = 0x1f;

const ROUND_CONSTANTS: [u64; 24] = [
    0x0000000000000001,
    0x0000000000008082,
    0x800000000000808a,
    0x8000000080008000,
    0x000000000000808b,
    0x0000000080000001,
    0x8000000080008081,
    0x8000000000008009,
    0x000000000000008a,
    0x0000000000000088,
    0x0000000080008009,
    0x000000008000000a,
    0x000000008000808b,
    0x800000000000008b,
    0x8000000000008089,
    0x8000000000008003,
    0x8000000000008002,
    0x8000000000000080,
    0x000000000000800a,
    0x800000008000000a,
    0x8000000080008081,
    0x8000000000008080,
    0x0000000080000001,
    0x8000000080008008,
];

// Rotation offsets and lane order of the combined rho/pi step.
const RHO: [u32; 24] = [
    1, 3, 6, 10, 15, 21, 28, 36, 45, 55, 2, 14, 27, 41, 56, 8, 25, 43, 62, 18, 39, 61, 20, 44,
];
const PI: [usize; 24] = [
    10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1,
];

/// One Keccak round on a 5x5 lane array indexed `x + 5*y`.
#[inline]
fn round(a: &mut [u64; 25], rc: u64) {
    // theta
    let mut c = [0u64; 5];
    for x in 0..5 {
        c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    }
    for x in 0..5 {
        let d = c[(x + 4) % 5] ^ c[(x + 1) % 5].rotate_left(1);
        for y in 0..5 {
            a[x + 5 * y] ^= d;
        }
    }
    // rho + pi
    let mut last = a[1];
    for i in 0..24 {
        let j = PI[i];
        let tmp = a[j];
        a[j] = last.rotate_left(RHO[i]);
        last = tmp;
    }
    // chi
    for y in 0..5 {
        let row = [a[5 * y], a[5 * y + 1], a[5 * y + 2], a[5 * y + 3], a[5 * y + 4]];
        for x in 0..5 {
            a[x + 5 * y] = row[x] ^ (!row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
    }
    // iota
    a[0] ^= rc;
}

/// The 24-round Keccak-f[1600] permutation.
pub fn keccak_f1600(state: &mut [u64; 25]) {
    for &rc in &ROUND_CONSTANTS {
        round(state, rc);
    }
}

/// Applies only the first `rounds` rounds; used for round-level test vectors.
pub fn keccak_f1600_rounds(state: &mut [u64; 25], rounds: usize) {
    for &rc in ROUND_CONSTANTS.iter().take(rounds) {
        round(state, rc);
    }
}

/// Keccak sponge in extendable-output mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeccakSponge {
    state: [u64; 25],
    /// Byte position within the current rate block, for absorbing or squeezing.
    offset: usize,
    absorbed: usize,
    squeezing: bool,
}

impl Default for KeccakSponge {
    fn default() -> Self {
        Self::new()
    }
}

impl KeccakSponge {
    pub fn new() -> Self {
        Self { state: [0; 25], offset: 0, absorbed: 0, squeezing: false }
    }

    /// A sponge with `seed` absorbed, ready to squeeze once finalized.
    pub fn from_seed(seed: &[u8]) -> Self {
        let mut sponge = Self::new();
        sponge.absorb_seed(seed).expect("fresh sponge accepts input");
        sponge
    }

    /// XORs seed material into the rate, permuting after each full block.
    ///
    /// Seeds longer than one rate block (such as a 200-byte / 1600-bit seed)
    /// span two blocks with a permutation in between.
    pub fn absorb_seed(&mut self, seed: &[u8]) -> Result<()> {
        if self.squeezing {
            return Err(Error::SpongeFinalized);
        }
        for &byte in seed {
            self.xor_byte(self.offset, byte);
            self.offset += 1;
            if self.offset == RATE_BYTES {
                keccak_f1600(&mut self.state);
                self.offset = 0;
            }
        }
        self.absorbed += seed.len();
        Ok(())
    }

    /// Applies the XOF padding and switches to squeezing. Idempotent.
    pub fn finalize(&mut self) {
        if self.squeezing {
            return;
        }
        self.xor_byte(self.offset, XOF_DOMAIN);
        self.xor_byte(RATE_BYTES - 1, 0x80);
        keccak_f1600(&mut self.state);
        self.offset = 0;
        self.squeezing = true;
    }

    pub fn is_finalized(&self) -> bool {
        self.squeezing
    }

    /// Number of seed bytes absorbed so far.
    pub fn absorbed(&self) -> usize {
        self.absorbed
    }

    /// Position within the current rate block (always `< RATE_BYTES`).
    pub fn squeeze_offset(&self) -> usize {
        self.offset
    }

    pub fn state(&self) -> &[u64; 25] {
        &self.state
    }

    /// Fills `out` with the next stream bytes, finalizing first if needed.
    pub fn squeeze_into(&mut self, out: &mut [u8]) {
        self.finalize();
        let mut written = 0;
        while written < out.len() {
            if self.offset == RATE_BYTES {
                keccak_f1600(&mut self.state);
                self.offset = 0;
            }
            let take = (RATE_BYTES - self.offset).min(out.len() - written);
            for i in 0..take {
                out[written + i] = self.byte(self.offset + i);
            }
            self.offset += take;
            written += take;
        }
        // Keep the offset inside the block once a block is exhausted.
        if self.offset == RATE_BYTES {
            keccak_f1600(&mut self.state);
            self.offset = 0;
        }
    }

    pub fn squeeze(&mut self, nbytes: usize) -> Vec<u8> {
        let mut out = vec![0u8; nbytes];
        self.squeeze_into(&mut out);
        out
    }

    #[inline]
    fn byte(&self, pos: usize) -> u8 {
        (self.state[pos / 8] >> (8 * (pos % 8))) as u8
    }

    #[inline]
    fn xor_byte(&mut self, pos: usize, byte: u8) {
        self.state[pos / 8] ^= (byte as u64) << (8 * (pos % 8));
    }
}
