//! Modular arithmetic over word-sized NTT-friendly primes.
//!
//! A [`ModulusContext`] pins a prime `q ≡ 1 (mod 2n)` together with its
//! Barrett constant and a primitive `2n`-th root of unity `psi`. Reduction
//! follows the hardware multiplier: one wide product, a multiplication by the
//! precomputed factor, shifts, one subtraction and a single conditional
//! subtraction. No division is used on the multiply path.

use crate::error::{Error, Result};
use crate::word::Word;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 1 << 16;

/// An NTT-friendly prime modulus with its precomputed constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModulusContext<W: Word> {
    q: W,
    n: usize,
    bits: u32,
    barrett_factor: W,
    pre_shift: u32,
    post_shift: u32,
    psi: W,
    psi_inv: W,
    n_inv: W,
}

impl<W: Word> ModulusContext<W> {
    /// Builds a context for a given prime and degree.
    ///
    /// `psi` is the smallest primitive `2n`-th root of unity, so twiddle
    /// sequences are reproducible across runs.
    pub fn new(q: u64, n: usize) -> Result<Self> {
        check_degree(n)?;
        let bits = 64 - q.leading_zeros();
        if q < 3 {
            return Err(Error::InvalidModulus { q, reason: "modulus must be an odd prime" });
        }
        if bits > W::MAX_MODULUS_BITS {
            return Err(Error::InvalidModulus { q, reason: "modulus too wide for the residue word" });
        }
        if !is_prime(q) {
            return Err(Error::InvalidModulus { q, reason: "modulus is not prime" });
        }
        if !(q - 1).is_multiple_of(2 * n as u64) {
            return Err(Error::InvalidModulus { q, reason: "modulus is not 1 mod 2n" });
        }

        // k = 2*bits + 1; the product is pre-shifted by bits-2 so the
        // estimated quotient is off by at most one.
        let shift = 2 * bits + 1;
        let barrett_factor = ((1u128 << shift) / q as u128) as u64;
        let pre_shift = bits.saturating_sub(2);
        let post_shift = shift - pre_shift;

        let psi = minimal_primitive_root(q, 2 * n as u64);
        let psi_inv = pow_u64(psi, q - 2, q);
        let n_inv = pow_u64(n as u64 % q, q - 2, q);

        let ctx = Self {
            q: W::from_u64(q),
            n,
            bits,
            barrett_factor: W::from_u64(barrett_factor),
            pre_shift,
            post_shift,
            psi: W::from_u64(psi),
            psi_inv: W::from_u64(psi_inv),
            n_inv: W::from_u64(n_inv),
        };
        debug_assert!(ctx.check_invariants());
        Ok(ctx)
    }

    /// The same prime re-targeted at another degree dividing `(q-1)/2`.
    pub fn with_degree(&self, n: usize) -> Result<Self> {
        Self::new(self.q.to_u64(), n)
    }

    #[inline(always)]
    pub fn q(&self) -> W {
        self.q
    }

    #[inline(always)]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Bit width of `q`, which equals `ceil(log2 q)` for a prime `q > 2`.
    #[inline(always)]
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `floor(2^k / q)` with `k = barrett_shift()`.
    pub fn barrett_factor(&self) -> W {
        self.barrett_factor
    }

    pub fn barrett_shift(&self) -> u32 {
        self.pre_shift + self.post_shift
    }

    pub fn psi(&self) -> W {
        self.psi
    }

    pub fn psi_inv(&self) -> W {
        self.psi_inv
    }

    pub fn n_inv(&self) -> W {
        self.n_inv
    }

    /// Reduces a double-width value `x < q^2`.
    #[inline(always)]
    pub fn barrett_reduce(&self, x: W::Wide) -> W {
        let q = self.q.widen();
        let estimate = ((x >> self.pre_shift as usize) * self.barrett_factor.widen())
            >> self.post_shift as usize;
        let r = W::narrow(x - estimate * q);
        if r >= self.q {
            r - self.q
        } else {
            r
        }
    }

    /// `(a * b) mod q` for `a, b < q`.
    #[inline(always)]
    pub fn barrett_mul(&self, a: W, b: W) -> W {
        self.barrett_reduce(a.widen() * b.widen())
    }

    /// `((a + b) mod q, (a - b) mod q)` for `a, b < q`.
    #[inline(always)]
    pub fn mod_add_sub(&self, a: W, b: W) -> (W, W) {
        (self.add(a, b), self.sub(a, b))
    }

    #[inline(always)]
    pub fn add(&self, a: W, b: W) -> W {
        let s = a + b;
        if s >= self.q {
            s - self.q
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: W, b: W) -> W {
        if a >= b {
            a - b
        } else {
            a + self.q - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: W) -> W {
        if a == W::zero() {
            a
        } else {
            self.q - a
        }
    }

    pub fn pow(&self, base: W, mut exp: u64) -> W {
        let mut acc = W::one();
        let mut b = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.barrett_mul(acc, b);
            }
            b = self.barrett_mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Modular inverse via Fermat; `a` must be non-zero.
    pub fn inv(&self, a: W) -> W {
        self.pow(a, self.q.to_u64() - 2)
    }

    /// Maps a signed integer into `[0, q)`.
    pub fn from_i64(&self, v: i64) -> W {
        let q = self.q.to_u64() as i128;
        W::from_u64((v as i128).rem_euclid(q) as u64)
    }

    /// Centered representative in `(-q/2, q/2]`.
    pub fn to_centered(&self, a: W) -> i64 {
        let q = self.q.to_u64();
        let a = a.to_u64();
        if a > q / 2 {
            -((q - a) as i64)
        } else {
            a as i64
        }
    }

    fn check_invariants(&self) -> bool {
        let one = W::one();
        let minus_one = self.q - one;
        let n = self.n as u64;
        self.pow(self.psi, 2 * n) == one
            && self.pow(self.psi, n) == minus_one
            && self.barrett_mul(self.psi, self.psi_inv) == one
            && self.barrett_mul(W::from_u64(n % self.q.to_u64()), self.n_inv) == one
    }
}

fn check_degree(n: usize) -> Result<()> {
    if !(2..=MAX_DEGREE).contains(&n) || !n.is_power_of_two() {
        return Err(Error::InvalidDegree(n));
    }
    Ok(())
}

/// The largest prime `q < 2^bits` with `q ≡ 1 (mod 2n)`.
pub fn find_context<W: Word>(n: usize, bits: u32) -> Result<ModulusContext<W>> {
    find_moduli(n, bits, 1).map(|mut v| v.remove(0))
}

/// The `count` largest primes below `2^bits` that are `1 (mod 2n)`, in
/// descending order.
pub fn find_moduli<W: Word>(n: usize, bits: u32, count: usize) -> Result<Vec<ModulusContext<W>>> {
    check_degree(n)?;
    if !(2..=W::MAX_MODULUS_BITS).contains(&bits) {
        return Err(Error::NoPrimeFound { n, bits });
    }
    let step = 2 * n as u64;
    let top = (1u64 << bits) - 1;
    let mut candidate = ((top - 1) / step) * step + 1;
    let mut found = Vec::with_capacity(count);
    while found.len() < count {
        if candidate <= step {
            return Err(Error::NoPrimeFound { n, bits });
        }
        if is_prime(candidate) {
            found.push(ModulusContext::new(candidate, n)?);
        }
        candidate -= step;
    }
    Ok(found)
}

#[inline]
fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_u64(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod_u64(acc, base, m);
        }
        base = mul_mod_u64(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest primitive `order`-th root of unity mod prime `q`, for a power of
/// two `order` dividing `q - 1`.
fn minimal_primitive_root(q: u64, order: u64) -> u64 {
    let half = order / 2;
    let cofactor = (q - 1) / order;
    let mut any = 0;
    for x in 2..q {
        let c = pow_u64(x, cofactor, q);
        if pow_u64(c, half, q) == q - 1 {
            any = c;
            break;
        }
    }
    // Every primitive root is any^k for odd k.
    let sq = mul_mod_u64(any, any, q);
    let mut cur = any;
    let mut best = any;
    for _ in 0..half {
        best = best.min(cur);
        cur = mul_mod_u64(cur, sq, q);
    }
    best
}
