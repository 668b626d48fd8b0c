//! Binary layouts. All integers are little-endian.
//!
//! ```text
//! magic[5] | n: u32 | limbs: u8 | q_i: u64 * limbs | scale_bits: u8 | polys
//! ```
//!
//! Each polynomial is written limb by limb; a limb's words take 4 bytes when
//! its modulus fits in 32 bits and 8 bytes otherwise. Ciphertexts (`RISE1`)
//! carry `c0` then `c1`; key files (`RISK1`) carry `s`, `pk0`, `pk1`. All
//! polynomials are in the NTT domain.

use super::{Domain, RnsPolynomial, SchemeParams};
use crate::error::{Error, Result};
use crate::word::Word;

pub(super) const CIPHERTEXT_MAGIC: &[u8; 5] = b"RISE1";
pub(super) const KEY_MAGIC: &[u8; 5] = b"RISK1";

/// Parameters recorded in a ciphertext or key file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CiphertextHeader {
    pub n: usize,
    pub moduli: Vec<u64>,
    pub scale_bits: u32,
}

fn word_bytes(q: u64) -> usize {
    if 64 - q.leading_zeros() <= 32 {
        4
    } else {
        8
    }
}

pub(super) fn write_header<W: Word>(magic: &[u8; 5], params: &SchemeParams<W>) -> Vec<u8> {
    let mut out = magic.to_vec();
    out.extend((params.n() as u32).to_le_bytes());
    out.push(params.limb_count() as u8);
    for q in params.moduli() {
        out.extend(q.to_le_bytes());
    }
    out.push(params.scale_bits() as u8);
    out
}

pub(super) fn write_poly<W: Word>(out: &mut Vec<u8>, params: &SchemeParams<W>, p: &RnsPolynomial<W>) {
    for (&b, limb) in p.basis().iter().zip(p.limbs()) {
        let width = word_bytes(params.limb(b).q().to_u64());
        for &v in limb {
            out.extend_from_slice(&v.to_u64().to_le_bytes()[..width]);
        }
    }
}

pub(super) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(super) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn uint(&mut self, len: usize) -> Result<u64> {
        let mut buf = [0u8; 8];
        buf[..len].copy_from_slice(self.take(len)?);
        Ok(u64::from_le_bytes(buf))
    }

    pub(super) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

fn parse_header(r: &mut Reader<'_>, magic: &[u8; 5]) -> Result<CiphertextHeader> {
    if r.take(5)? != magic {
        return Err(Error::Format(format!("bad magic, expected {}", String::from_utf8_lossy(magic))));
    }
    let n = r.uint(4)? as usize;
    let limbs = r.uint(1)? as usize;
    let moduli = (0..limbs).map(|_| r.uint(8)).collect::<Result<Vec<_>>>()?;
    let scale_bits = r.uint(1)? as u32;
    Ok(CiphertextHeader { n, moduli, scale_bits })
}

/// Reads the parameter header of a ciphertext file.
pub fn read_header(bytes: &[u8]) -> Result<CiphertextHeader> {
    parse_header(&mut Reader::new(bytes), CIPHERTEXT_MAGIC)
}

/// Reads the parameter header of a key file.
pub fn read_key_header(bytes: &[u8]) -> Result<CiphertextHeader> {
    parse_header(&mut Reader::new(bytes), KEY_MAGIC)
}

pub(super) fn read_and_match_header<W: Word>(
    r: &mut Reader<'_>,
    magic: &[u8; 5],
    params: &SchemeParams<W>,
) -> Result<()> {
    let h = parse_header(r, magic)?;
    if h.n != params.n() || h.moduli != params.moduli() || h.scale_bits != params.scale_bits() {
        return Err(Error::ParamsMismatch(format!(
            "file has N={} moduli={:?} scale={}, expected N={} moduli={:?} scale={}",
            h.n,
            h.moduli,
            h.scale_bits,
            params.n(),
            params.moduli(),
            params.scale_bits()
        )));
    }
    Ok(())
}

pub(super) fn read_poly<W: Word>(r: &mut Reader<'_>, params: &SchemeParams<W>) -> Result<RnsPolynomial<W>> {
    let mut limbs = Vec::with_capacity(params.limb_count());
    for ctx in params.limbs() {
        let q = ctx.q().to_u64();
        let width = word_bytes(q);
        let limb = (0..params.n())
            .map(|_| {
                let v = r.uint(width)?;
                if v >= q {
                    return Err(Error::Format(format!("word {v} not reduced mod {q}")));
                }
                Ok(W::from_u64(v))
            })
            .collect::<Result<Vec<W>>>()?;
        limbs.push(limb);
    }
    RnsPolynomial::from_limbs(params, (0..params.limb_count()).collect(), limbs, Domain::Ntt)
}
