//! Residue word types.
//!
//! Everything above the modular-arithmetic layer is generic over the machine
//! word that stores one residue. `u32` carries limbs of up to 30 bits and
//! `u64` carries limbs of up to 62 bits; each word has a double-width partner
//! used for the exact products inside Barrett reduction.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_traits::{PrimInt, Unsigned};

/// An unsigned machine word holding residues modulo an NTT-friendly prime.
pub trait Word:
    PrimInt + Unsigned + Debug + Display + Hash + Default + Send + Sync + 'static
{
    /// Double-width integer able to hold the product of two residues times
    /// the Barrett factor after pre-shifting.
    type Wide: PrimInt + Unsigned + Debug;

    /// Width of the storage word in bits.
    const BITS: u32;

    /// Largest modulus bit width supported by this word.
    const MAX_MODULUS_BITS: u32;

    fn widen(self) -> Self::Wide;

    /// Truncating conversion back from the wide type.
    fn narrow(wide: Self::Wide) -> Self;

    fn to_u64(self) -> u64;

    /// Truncating conversion from `u64`.
    fn from_u64(value: u64) -> Self;

    fn to_le_bytes_vec(self) -> Vec<u8>;
}

impl Word for u32 {
    type Wide = u64;
    const BITS: u32 = 32;
    const MAX_MODULUS_BITS: u32 = 30;

    #[inline(always)]
    fn widen(self) -> u64 {
        self as u64
    }

    #[inline(always)]
    fn narrow(wide: u64) -> u32 {
        wide as u32
    }

    #[inline(always)]
    fn to_u64(self) -> u64 {
        self as u64
    }

    #[inline(always)]
    fn from_u64(value: u64) -> u32 {
        value as u32
    }

    fn to_le_bytes_vec(self) -> Vec<u8> {
        self.to_le_bytes().to_vec()
    }
}

impl Word for u64 {
    type Wide = u128;
    const BITS: u32 = 64;
    const MAX_MODULUS_BITS: u32 = 62;

    #[inline(always)]
    fn widen(self) -> u128 {
        self as u128
    }

    #[inline(always)]
    fn narrow(wide: u128) -> u64 {
        wide as u64
    }

    #[inline(always)]
    fn to_u64(self) -> u64 {
        self
    }

    #[inline(always)]
    fn from_u64(value: u64) -> u64 {
        value
    }

    fn to_le_bytes_vec(self) -> Vec<u8> {
        self.to_le_bytes().to_vec()
    }
}
