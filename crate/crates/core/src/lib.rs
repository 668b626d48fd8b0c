//! Edge-side CKKS encryption datapath: modular arithmetic, Keccak-driven
//! samplers, a conflict-free NTT, a cycle-level bank model and RNS-CKKS
//! encrypt/decrypt.

pub mod banksim;
pub mod ckks;
pub mod error;
pub mod keccak;
pub mod modarith;
pub mod ntt;
pub mod samplers;
pub mod throughput;
pub mod word;

pub use error::{Error, Result};
pub use word::Word;

pub type Modulus32 = modarith::ModulusContext<u32>;
pub type Modulus64 = modarith::ModulusContext<u64>;
pub type Plan32 = ntt::NttPlan<u32>;
pub type Plan64 = ntt::NttPlan<u64>;
pub type Params32 = ckks::SchemeParams<u32>;
pub type Params64 = ckks::SchemeParams<u64>;
pub type Poly32 = ckks::RnsPolynomial<u32>;
pub type Poly64 = ckks::RnsPolynomial<u64>;
pub type Ciphertext32 = ckks::Ciphertext<u32>;
pub type Ciphertext64 = ckks::Ciphertext<u64>;
