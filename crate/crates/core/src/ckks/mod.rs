//! RNS-CKKS key generation, encryption and decryption on the shared
//! datapath, with a coefficient-wise fixed-point encoder.
//!
//! Encryption computes, per limb and in the NTT domain,
//! `c0 = mu*pk0 + m + e0` and `c1 = mu*pk1 + e1`, where `mu` is ternary and
//! `e0`, `e1` are binomial. `mu`, `e0` and `e1` are drawn once per ciphertext
//! and reduced into every limb. Decryption computes `iNTT(c0 + c1*s)`.

pub mod datapath;
mod format;

pub use format::{read_header, read_key_header, CiphertextHeader};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::keccak::KeccakSponge;
use crate::modarith::{find_moduli, ModulusContext};
use crate::ntt::NttPlan;
use crate::samplers::{sample_binomial, sample_ternary, sample_uniform_mod_q, SampledPolynomial, BINOMIAL_K};
use crate::word::Word;
use datapath::{DatapathOp, DatapathSchedule, Operand};

/// Default fixed-point scale exponent.
pub const DEFAULT_SCALE_BITS: u32 = 20;

const KEYGEN_TAG: u8 = 0x01;
const ENCRYPT_TAG: u8 = 0x02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Coeff,
    Ntt,
}

impl Domain {
    fn name(self) -> &'static str {
        match self {
            Domain::Coeff => "coefficient",
            Domain::Ntt => "ntt",
        }
    }
}

/// Degree, RNS basis and fixed-point scale.
#[derive(Clone, Debug)]
pub struct SchemeParams<W: Word> {
    n: usize,
    limbs: Vec<ModulusContext<W>>,
    plans: Vec<NttPlan<W>>,
    scale_bits: u32,
    bfus: usize,
}

impl<W: Word> PartialEq for SchemeParams<W> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.limbs == other.limbs && self.scale_bits == other.scale_bits
    }
}

impl<W: Word> SchemeParams<W> {
    /// Validates the moduli; any failure is reported as `InvalidParams`.
    pub fn new(n: usize, moduli: &[u64], scale_bits: u32) -> Result<Self> {
        let limbs = moduli
            .iter()
            .map(|&q| ModulusContext::new(q, n))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidParams(e.to_string()))?;
        Self::from_contexts(limbs, scale_bits)
    }

    /// `count` limbs of `limb_bits` bits each: the largest suitable primes.
    pub fn generate(n: usize, limb_bits: u32, count: usize, scale_bits: u32) -> Result<Self> {
        let limbs = find_moduli(n, limb_bits, count).map_err(|e| Error::InvalidParams(e.to_string()))?;
        Self::from_contexts(limbs, scale_bits)
    }

    pub fn from_contexts(limbs: Vec<ModulusContext<W>>, scale_bits: u32) -> Result<Self> {
        let Some(first) = limbs.first() else {
            return Err(Error::InvalidParams("at least one limb is required".into()));
        };
        let n = first.n();
        if n < 8 {
            return Err(Error::InvalidParams(format!("degree {n} is below 8")));
        }
        for (i, ctx) in limbs.iter().enumerate() {
            if ctx.n() != n {
                return Err(Error::InvalidParams(format!("limb {i} has degree {}, expected {n}", ctx.n())));
            }
            if limbs[..i].iter().any(|c| c.q() == ctx.q()) {
                return Err(Error::InvalidParams(format!("modulus {} repeated", ctx.q())));
            }
        }
        let min_bits = limbs.iter().map(|c| c.bits()).min().unwrap_or(0);
        if scale_bits == 0 || scale_bits + 2 > min_bits {
            return Err(Error::InvalidParams(format!(
                "scale 2^{scale_bits} leaves no headroom below a {min_bits}-bit modulus"
            )));
        }
        let plans = limbs.iter().map(|&c| NttPlan::new(c, 1)).collect::<Result<Vec<_>>>()?;
        Ok(Self { n, limbs, plans, scale_bits, bfus: 1 })
    }

    /// Rebuilds the transform plans for `bfus` parallel butterflies.
    pub fn with_bfus(mut self, bfus: usize) -> Result<Self> {
        self.plans = self.limbs.iter().map(|&c| NttPlan::new(c, bfus)).collect::<Result<Vec<_>>>()?;
        self.bfus = bfus;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn limb_count(&self) -> usize {
        self.limbs.len()
    }

    pub fn limbs(&self) -> &[ModulusContext<W>] {
        &self.limbs
    }

    pub fn limb(&self, i: usize) -> &ModulusContext<W> {
        &self.limbs[i]
    }

    pub fn plan(&self, i: usize) -> &NttPlan<W> {
        &self.plans[i]
    }

    pub fn moduli(&self) -> Vec<u64> {
        self.limbs.iter().map(|c| c.q().to_u64()).collect()
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }

    pub fn bfus(&self) -> usize {
        self.bfus
    }

    /// Total modulus width `sum_i bits(q_i)`.
    pub fn log_q(&self) -> u32 {
        self.limbs.iter().map(|c| c.bits()).sum()
    }

    /// SHA-256 of the degree, moduli and scale.
    pub fn params_id(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"rise-params");
        h.update((self.n as u32).to_le_bytes());
        h.update([self.limbs.len() as u8]);
        for q in self.moduli() {
            h.update(q.to_le_bytes());
        }
        h.update([self.scale_bits as u8]);
        h.finalize().into()
    }

    fn full_basis(&self) -> Vec<usize> {
        (0..self.limbs.len()).collect()
    }
}

/// A polynomial as residue vectors over a subset of the RNS basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RnsPolynomial<W: Word> {
    limbs: Vec<Vec<W>>,
    basis: Vec<usize>,
    domain: Domain,
}

impl<W: Word> RnsPolynomial<W> {
    pub fn zero(params: &SchemeParams<W>, domain: Domain) -> Self {
        Self {
            limbs: vec![vec![W::zero(); params.n()]; params.limb_count()],
            basis: params.full_basis(),
            domain,
        }
    }

    /// Lifts signed integer coefficients into every limb.
    pub fn from_signed(params: &SchemeParams<W>, coeffs: &[i64]) -> Result<Self> {
        if coeffs.len() != params.n() {
            return Err(Error::DegreeMismatch { expected: params.n(), got: coeffs.len() });
        }
        let limbs = params.limbs().iter().map(|ctx| coeffs.iter().map(|&c| ctx.from_i64(c)).collect()).collect();
        Ok(Self { limbs, basis: params.full_basis(), domain: Domain::Coeff })
    }

    /// Wraps residue vectors; `basis[i]` names the limb of `limbs[i]`.
    pub fn from_limbs(
        params: &SchemeParams<W>,
        basis: Vec<usize>,
        limbs: Vec<Vec<W>>,
        domain: Domain,
    ) -> Result<Self> {
        if basis.len() != limbs.len() || basis.is_empty() {
            return Err(Error::ParamsMismatch("basis and limb counts differ".into()));
        }
        for (&b, limb) in basis.iter().zip(&limbs) {
            let ctx = params
                .limbs()
                .get(b)
                .ok_or_else(|| Error::ParamsMismatch(format!("limb index {b} out of range")))?;
            if limb.len() != params.n() {
                return Err(Error::DegreeMismatch { expected: params.n(), got: limb.len() });
            }
            if limb.iter().any(|&v| v >= ctx.q()) {
                return Err(Error::ParamsMismatch(format!("residue not reduced mod {}", ctx.q())));
            }
        }
        Ok(Self { limbs, basis, domain })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn limbs(&self) -> &[Vec<W>] {
        &self.limbs
    }

    pub fn limb(&self, i: usize) -> &[W] {
        &self.limbs[i]
    }

    pub fn n(&self) -> usize {
        self.limbs.first().map_or(0, Vec::len)
    }

    fn expect_domain(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainMismatch { expected: domain.name() });
        }
        Ok(())
    }

    fn check_params(&self, params: &SchemeParams<W>) -> Result<()> {
        if self.n() != params.n() || self.basis.iter().any(|&b| b >= params.limb_count()) {
            return Err(Error::ParamsMismatch("polynomial does not belong to these parameters".into()));
        }
        Ok(())
    }

    pub fn to_ntt(&self, params: &SchemeParams<W>) -> Result<Self> {
        self.expect_domain(Domain::Coeff)?;
        self.check_params(params)?;
        let limbs = self
            .basis
            .iter()
            .zip(&self.limbs)
            .map(|(&b, l)| params.plan(b).forward(l))
            .collect::<Result<_>>()?;
        Ok(Self { limbs, basis: self.basis.clone(), domain: Domain::Ntt })
    }

    pub fn to_coeff(&self, params: &SchemeParams<W>) -> Result<Self> {
        self.expect_domain(Domain::Ntt)?;
        self.check_params(params)?;
        let limbs = self
            .basis
            .iter()
            .zip(&self.limbs)
            .map(|(&b, l)| params.plan(b).inverse(l))
            .collect::<Result<_>>()?;
        Ok(Self { limbs, basis: self.basis.clone(), domain: Domain::Coeff })
    }

    fn zip_with(
        &self,
        other: &Self,
        params: &SchemeParams<W>,
        f: impl Fn(&ModulusContext<W>, W, W) -> W,
    ) -> Result<Self> {
        self.check_params(params)?;
        if self.basis != other.basis || self.n() != other.n() {
            return Err(Error::ParamsMismatch("operands use different RNS bases".into()));
        }
        let limbs = self
            .basis
            .iter()
            .zip(self.limbs.iter().zip(&other.limbs))
            .map(|(&b, (x, y))| {
                let ctx = params.limb(b);
                x.iter().zip(y).map(|(&u, &v)| f(ctx, u, v)).collect()
            })
            .collect();
        Ok(Self { limbs, basis: self.basis.clone(), domain: self.domain })
    }

    /// Limb-wise sum; both operands must share a domain.
    pub fn add(&self, other: &Self, params: &SchemeParams<W>) -> Result<Self> {
        other.expect_domain(self.domain)?;
        self.zip_with(other, params, |c, a, b| c.add(a, b))
    }

    /// Pointwise product of two NTT-domain polynomials.
    pub fn mul(&self, other: &Self, params: &SchemeParams<W>) -> Result<Self> {
        self.expect_domain(Domain::Ntt)?;
        other.expect_domain(Domain::Ntt)?;
        self.zip_with(other, params, |c, a, b| c.barrett_mul(a, b))
    }

    pub fn neg(&self, params: &SchemeParams<W>) -> Result<Self> {
        self.zip_with(self, params, |c, a, _| c.neg(a))
    }

    /// Centered representatives of limb `i`.
    pub fn centered(&self, params: &SchemeParams<W>, i: usize) -> Vec<i64> {
        let ctx = params.limb(self.basis[i]);
        self.limbs[i].iter().map(|&v| ctx.to_centered(v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext<W: Word> {
    pub c0: RnsPolynomial<W>,
    pub c1: RnsPolynomial<W>,
    pub params_id: [u8; 32],
}

impl<W: Word> Ciphertext<W> {
    fn check(&self, params: &SchemeParams<W>) -> Result<()> {
        if self.params_id != params.params_id() {
            return Err(Error::ParamsMismatch("ciphertext was made under other parameters".into()));
        }
        self.c0.expect_domain(Domain::Ntt)?;
        self.c1.expect_domain(Domain::Ntt)?;
        Ok(())
    }

    /// Component-wise sum; decrypts to the sum of the plaintexts.
    pub fn add(&self, other: &Self, params: &SchemeParams<W>) -> Result<Self> {
        self.check(params)?;
        other.check(params)?;
        Ok(Self { c0: self.c0.add(&other.c0, params)?, c1: self.c1.add(&other.c1, params)?, params_id: self.params_id })
    }

    pub fn to_bytes(&self, params: &SchemeParams<W>) -> Result<Vec<u8>> {
        self.check(params)?;
        let mut out = format::write_header(format::CIPHERTEXT_MAGIC, params);
        format::write_poly(&mut out, params, &self.c0);
        format::write_poly(&mut out, params, &self.c1);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams<W>) -> Result<Self> {
        let mut r = format::Reader::new(bytes);
        format::read_and_match_header(&mut r, format::CIPHERTEXT_MAGIC, params)?;
        let c0 = format::read_poly(&mut r, params)?;
        let c1 = format::read_poly(&mut r, params)?;
        r.finish()?;
        Ok(Self { c0, c1, params_id: params.params_id() })
    }
}

/// Ternary secret and RLWE public key, all in the NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair<W: Word> {
    pub s: RnsPolynomial<W>,
    pub pk0: RnsPolynomial<W>,
    pub pk1: RnsPolynomial<W>,
}

impl<W: Word> KeyPair<W> {
    pub fn to_bytes(&self, params: &SchemeParams<W>) -> Vec<u8> {
        let mut out = format::write_header(format::KEY_MAGIC, params);
        for p in [&self.s, &self.pk0, &self.pk1] {
            format::write_poly(&mut out, params, p);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &SchemeParams<W>) -> Result<Self> {
        let mut r = format::Reader::new(bytes);
        format::read_and_match_header(&mut r, format::KEY_MAGIC, params)?;
        let s = format::read_poly(&mut r, params)?;
        let pk0 = format::read_poly(&mut r, params)?;
        let pk1 = format::read_poly(&mut r, params)?;
        r.finish()?;
        Ok(Self { s, pk0, pk1 })
    }
}

fn tagged_sponge(tag: u8, seed: &[u8]) -> KeccakSponge {
    let mut sponge = KeccakSponge::new();
    sponge.absorb_seed(&[tag]).expect("fresh sponge");
    sponge.absorb_seed(seed).expect("fresh sponge");
    sponge
}

/// `s` ternary, `a` uniform per limb, `pk1 = a`, `pk0 = -(a*s + e_pk)`.
pub fn keygen<W: Word>(params: &SchemeParams<W>, seed: &[u8]) -> Result<KeyPair<W>> {
    let n = params.n();
    let mut sponge = tagged_sponge(KEYGEN_TAG, seed);
    let s = sample_ternary(&mut sponge, n);
    let a: Vec<Vec<W>> = params
        .limbs()
        .iter()
        .map(|ctx| sample_uniform_mod_q(&mut sponge, n, ctx).to_residues(ctx))
        .collect();
    let e_pk = sample_binomial(&mut sponge, n);

    let s_hat = RnsPolynomial::from_signed(params, &s.coeffs)?.to_ntt(params)?;
    let pk1 = RnsPolynomial::from_limbs(params, params.full_basis(), a, Domain::Coeff)?.to_ntt(params)?;
    let e_hat = RnsPolynomial::from_signed(params, &e_pk.coeffs)?.to_ntt(params)?;
    let pk0 = pk1.mul(&s_hat, params)?.add(&e_hat, params)?.neg(params)?;

    let identity = pk0.add(&pk1.mul(&s_hat, params)?, params)?.add(&e_hat, params)?;
    if identity.limbs.iter().flatten().any(|v| !v.is_zero()) {
        return Err(Error::InvalidParams("public key identity does not hold".into()));
    }
    Ok(KeyPair { s: s_hat, pk0, pk1 })
}

/// The per-ciphertext randomness: `mu` ternary, `e0` and `e1` binomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptionNoise {
    pub mu: SampledPolynomial,
    pub e0: SampledPolynomial,
    pub e1: SampledPolynomial,
}

impl EncryptionNoise {
    pub fn sample(n: usize, seed: &[u8]) -> Self {
        let mut sponge = tagged_sponge(ENCRYPT_TAG, seed);
        let mu = sample_ternary(&mut sponge, n);
        let e0 = sample_binomial(&mut sponge, n);
        let e1 = sample_binomial(&mut sponge, n);
        Self { mu, e0, e1 }
    }

    /// All-zero randomness, so that `c0 = m` and `c1 = 0`.
    #[cfg(any(test, feature = "test-hooks"))]
    pub fn zero(n: usize) -> Self {
        let mut noise = Self::sample(n, b"");
        for p in [&mut noise.mu, &mut noise.e0, &mut noise.e1] {
            p.coeffs.iter_mut().for_each(|c| *c = 0);
        }
        noise
    }
}

/// Worst-case decryption noise `||m' - m||_inf` for degree `n`.
///
/// Noise is `e0 - mu*e_pk + e1*s`. `|e0| <= 21` always. Each coefficient of a
/// product of a ternary and a binomial polynomial sums `n` terms of variance
/// `(2/3) * 21/2 = 7`; a 6-sigma tail on each gives `6 * sqrt(7n)`.
pub fn noise_bound(n: usize) -> f64 {
    let variance_per_term = (2.0 / 3.0) * (BINOMIAL_K as f64 / 2.0);
    BINOMIAL_K as f64 + 2.0 * 6.0 * (variance_per_term * n as f64).sqrt()
}

/// The schedule `encrypt` runs: two datapath passes per limb.
pub fn encryption_schedule<W: Word>(params: &SchemeParams<W>) -> DatapathSchedule {
    DatapathSchedule::encryption(params.n(), params.limb_count())
}

/// Residue vectors in flight on the datapath.
struct Slot<W> {
    data: Vec<W>,
    domain: Domain,
}

/// Executes `schedule` and returns the stored polynomials in order.
fn run_schedule<W: Word>(
    params: &SchemeParams<W>,
    schedule: &DatapathSchedule,
    mut fetch: impl FnMut(Operand, usize) -> Result<Slot<W>>,
) -> Result<Vec<(Operand, usize, Slot<W>)>> {
    schedule.check_occupancy()?;
    let mut bg: [Option<Slot<W>>; 2] = [None, None];
    let mut stored = Vec::new();
    let taken = |s: Option<Slot<W>>| s.expect("occupancy checked");
    for step in &schedule.steps {
        let ctx = params.limb(step.limb);
        let plan = params.plan(step.limb);
        match step.op {
            DatapathOp::Load { dst, operand } | DatapathOp::Sample { dst, operand } => {
                bg[dst.index()] = Some(fetch(operand, step.limb)?);
            }
            DatapathOp::Ntt { bg: g } => {
                let slot = bg[g.index()].as_mut().expect("occupancy checked");
                if slot.domain != Domain::Coeff {
                    return Err(Error::DomainMismatch { expected: Domain::Coeff.name() });
                }
                slot.data = plan.forward(&slot.data)?;
                slot.domain = Domain::Ntt;
            }
            DatapathOp::Intt { bg: g } => {
                let slot = bg[g.index()].as_mut().expect("occupancy checked");
                if slot.domain != Domain::Ntt {
                    return Err(Error::DomainMismatch { expected: Domain::Ntt.name() });
                }
                slot.data = plan.inverse(&slot.data)?;
                slot.domain = Domain::Coeff;
            }
            op @ (DatapathOp::Mul | DatapathOp::Add) => {
                let a = taken(bg[0].take());
                let b = bg[1].as_mut().expect("occupancy checked");
                if a.domain != Domain::Ntt || b.domain != Domain::Ntt {
                    return Err(Error::DomainMismatch { expected: Domain::Ntt.name() });
                }
                let f = |x: W, y: W| if op == DatapathOp::Mul { ctx.barrett_mul(x, y) } else { ctx.add(x, y) };
                for (y, &x) in b.data.iter_mut().zip(&a.data) {
                    *y = f(x, *y);
                }
            }
            DatapathOp::Store { operand } => stored.push((operand, step.limb, taken(bg[1].take()))),
        }
    }
    Ok(stored)
}

fn check_message<W: Word>(m: &RnsPolynomial<W>, params: &SchemeParams<W>) -> Result<()> {
    m.expect_domain(Domain::Coeff)?;
    if m.n() != params.n() || m.basis != params.full_basis() {
        return Err(Error::ParamsMismatch("message must cover the full RNS basis".into()));
    }
    Ok(())
}

fn check_keys<W: Word>(keys: &KeyPair<W>, params: &SchemeParams<W>) -> Result<()> {
    for p in [&keys.s, &keys.pk0, &keys.pk1] {
        p.expect_domain(Domain::Ntt)?;
        if p.n() != params.n() || p.basis != params.full_basis() {
            return Err(Error::ParamsMismatch("keys do not match the parameters".into()));
        }
    }
    Ok(())
}

pub fn encrypt<W: Word>(
    m: &RnsPolynomial<W>,
    keys: &KeyPair<W>,
    params: &SchemeParams<W>,
    seed: &[u8],
) -> Result<Ciphertext<W>> {
    encrypt_with_noise(m, keys, params, &EncryptionNoise::sample(params.n(), seed))
}

/// Encryption on the shared datapath with caller-supplied randomness.
pub fn encrypt_with_noise<W: Word>(
    m: &RnsPolynomial<W>,
    keys: &KeyPair<W>,
    params: &SchemeParams<W>,
    noise: &EncryptionNoise,
) -> Result<Ciphertext<W>> {
    check_message(m, params)?;
    check_keys(keys, params)?;
    for p in [&noise.mu, &noise.e0, &noise.e1] {
        if p.n != params.n() {
            return Err(Error::DegreeMismatch { expected: params.n(), got: p.n });
        }
    }
    let stored = run_schedule(params, &encryption_schedule(params), |operand, limb| {
        let ctx = params.limb(limb);
        let (data, domain) = match operand {
            Operand::Message => (m.limbs[limb].clone(), Domain::Coeff),
            Operand::Mu => (noise.mu.to_residues(ctx), Domain::Coeff),
            Operand::E0 => (noise.e0.to_residues(ctx), Domain::Coeff),
            Operand::E1 => (noise.e1.to_residues(ctx), Domain::Coeff),
            Operand::Pk0 => (keys.pk0.limbs[limb].clone(), Domain::Ntt),
            Operand::Pk1 => (keys.pk1.limbs[limb].clone(), Domain::Ntt),
            other => unreachable!("encryption never loads {other:?}"),
        };
        Ok(Slot { data, domain })
    })?;
    let mut c0 = RnsPolynomial::zero(params, Domain::Ntt);
    let mut c1 = RnsPolynomial::zero(params, Domain::Ntt);
    for (operand, limb, slot) in stored {
        let target = if operand == Operand::C0 { &mut c0 } else { &mut c1 };
        target.limbs[limb] = slot.data;
    }
    Ok(Ciphertext { c0, c1, params_id: params.params_id() })
}

/// Encryption evaluated directly on whole polynomials, bypassing the
/// datapath sequencer.
pub fn encrypt_direct<W: Word>(
    m: &RnsPolynomial<W>,
    keys: &KeyPair<W>,
    params: &SchemeParams<W>,
    noise: &EncryptionNoise,
) -> Result<Ciphertext<W>> {
    check_message(m, params)?;
    check_keys(keys, params)?;
    let lift = |p: &SampledPolynomial| RnsPolynomial::from_signed(params, &p.coeffs)?.to_ntt(params);
    let mu = lift(&noise.mu)?;
    let c1 = mu.mul(&keys.pk1, params)?.add(&lift(&noise.e1)?, params)?;
    let c0 = mu.mul(&keys.pk0, params)?.add(&lift(&noise.e0)?, params)?.add(&m.to_ntt(params)?, params)?;
    Ok(Ciphertext { c0, c1, params_id: params.params_id() })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecryptMode {
    /// Only the last limb `q_l`.
    #[default]
    LastLimb,
    AllLimbs,
}

/// Decrypts over the last limb.
pub fn decrypt<W: Word>(
    ct: &Ciphertext<W>,
    s: &RnsPolynomial<W>,
    params: &SchemeParams<W>,
) -> Result<RnsPolynomial<W>> {
    decrypt_with_mode(ct, s, params, DecryptMode::LastLimb)
}

pub fn decrypt_with_mode<W: Word>(
    ct: &Ciphertext<W>,
    s: &RnsPolynomial<W>,
    params: &SchemeParams<W>,
    mode: DecryptMode,
) -> Result<RnsPolynomial<W>> {
    ct.check(params)?;
    s.expect_domain(Domain::Ntt)?;
    if s.n() != params.n() || s.basis != params.full_basis() {
        return Err(Error::ParamsMismatch("secret key does not match the parameters".into()));
    }
    let basis: Vec<usize> = match mode {
        DecryptMode::LastLimb => vec![params.limb_count() - 1],
        DecryptMode::AllLimbs => params.full_basis(),
    };
    let schedule = DatapathSchedule::decryption(params.n(), &basis);
    let stored = run_schedule(params, &schedule, |operand, limb| {
        let data = match operand {
            Operand::C0 => ct.c0.limbs[limb].clone(),
            Operand::C1 => ct.c1.limbs[limb].clone(),
            Operand::Secret => s.limbs[limb].clone(),
            other => unreachable!("decryption never loads {other:?}"),
        };
        Ok(Slot { data, domain: Domain::Ntt })
    })?;
    let limbs = stored.into_iter().map(|(_, _, slot)| slot.data).collect();
    Ok(RnsPolynomial { limbs, basis, domain: Domain::Coeff })
}

/// `round(v * 2^scale_bits)` per coefficient, lifted into every limb;
/// missing coefficients are zero.
pub fn encode_fixed<W: Word>(values: &[f64], params: &SchemeParams<W>) -> Result<RnsPolynomial<W>> {
    if values.len() > params.n() {
        return Err(Error::DegreeMismatch { expected: params.n(), got: values.len() });
    }
    let scale = (params.scale_bits() as f64).exp2();
    let q_min = params.moduli().into_iter().min().unwrap_or(0) as f64;
    let mut coeffs = vec![0i64; params.n()];
    for (c, &v) in coeffs.iter_mut().zip(values) {
        let scaled = (v * scale).round();
        if !scaled.is_finite() || scaled.abs() >= q_min / 2.0 {
            return Err(Error::ScaleOverflow { value: v, scale_bits: params.scale_bits() });
        }
        *c = scaled as i64;
    }
    RnsPolynomial::from_signed(params, &coeffs)
}

/// Centered first limb divided by `2^scale_bits`.
pub fn decode_fixed<W: Word>(poly: &RnsPolynomial<W>, params: &SchemeParams<W>) -> Result<Vec<f64>> {
    poly.expect_domain(Domain::Coeff)?;
    poly.check_params(params)?;
    let scale = (params.scale_bits() as f64).exp2();
    Ok(poly.centered(params, 0).into_iter().map(|c| c as f64 / scale).collect())
}
