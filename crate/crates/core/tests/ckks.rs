use num_bigint::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rise_core::ckks::{
    decode_fixed, decrypt, decrypt_with_mode, encode_fixed, encrypt, encrypt_direct, encrypt_with_noise,
    encryption_schedule, keygen, noise_bound, read_header, Ciphertext, DecryptMode, Domain, EncryptionNoise, KeyPair,
    RnsPolynomial, SchemeParams,
};
use rise_core::Error;

fn schoolbook(a: &[i64], b: &[i64]) -> Vec<i128> {
    let n = a.len();
    let mut out = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            let p = a[i] as i128 * b[j] as i128;
            if i + j < n {
                out[i + j] += p;
            } else {
                out[i + j - n] -= p;
            }
        }
    }
    out
}

fn crt(residues: &[u64], moduli: &[u64]) -> BigInt {
    let q: BigInt = moduli.iter().map(|&m| BigInt::from(m)).product();
    let mut x = BigInt::from(0);
    for (&r, &m) in residues.iter().zip(moduli) {
        let mi = BigInt::from(m);
        let rest = &q / &mi;
        let inv = rest.modpow(&(&mi - 2), &mi);
        x += BigInt::from(r) * &rest * inv;
    }
    ((x % &q) + &q) % &q
}

fn coeff_limbs(p: &RnsPolynomial<u64>, params: &SchemeParams<u64>) -> Vec<Vec<u64>> {
    p.to_coeff(params).unwrap().limbs().to_vec()
}

/// `c0 = mu*pk0 + e0 + m` and `c1 = mu*pk1 + e1` over Z_Q[x]/(x^N + 1),
/// checked with whole-Q integers reconstructed by CRT.
#[test]
fn ciphertext_matches_big_integer_oracle() {
    for n in [8usize, 16, 32, 64] {
        let params = SchemeParams::<u64>::generate(n, 40, 2, 20).unwrap();
        let moduli = params.moduli();
        let q: BigInt = moduli.iter().map(|&m| BigInt::from(m)).product();
        let keys = keygen(&params, b"oracle-keys").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let m_coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-1000..1000)).collect();
        let m = RnsPolynomial::from_signed(&params, &m_coeffs).unwrap();
        let noise = EncryptionNoise::sample(n, b"oracle-noise");
        let ct = encrypt_with_noise(&m, &keys, &params, &noise).unwrap();

        let lift = |p: &RnsPolynomial<u64>| -> Vec<BigInt> {
            let limbs = coeff_limbs(p, &params);
            (0..n).map(|i| crt(&[limbs[0][i], limbs[1][i]], &moduli)).collect()
        };
        let (pk0, pk1, c0, c1) = (lift(&keys.pk0), lift(&keys.pk1), lift(&ct.c0), lift(&ct.c1));
        let negacyclic = |a: &[i64], b: &[BigInt]| -> Vec<BigInt> {
            let mut out = vec![BigInt::from(0); n];
            for i in 0..n {
                for j in 0..n {
                    let p = BigInt::from(a[i]) * &b[j];
                    if i + j < n {
                        out[i + j] += p;
                    } else {
                        out[i + j - n] -= p;
                    }
                }
            }
            out
        };
        let reduce = |x: BigInt| ((x % &q) + &q) % &q;
        let mu_pk0 = negacyclic(&noise.mu.coeffs, &pk0);
        let mu_pk1 = negacyclic(&noise.mu.coeffs, &pk1);
        for i in 0..n {
            let want0 = reduce(&mu_pk0[i] + noise.e0.coeffs[i] + m_coeffs[i]);
            let want1 = reduce(&mu_pk1[i] + noise.e1.coeffs[i]);
            assert_eq!(c0[i], want0, "N={n} c0[{i}]");
            assert_eq!(c1[i], want1, "N={n} c1[{i}]");
        }
    }
}

/// Decryption returns exactly `m + e0 - mu*e_pk + e1*s`.
#[test]
fn decryption_noise_identity() {
    let n = 64;
    let params = SchemeParams::<u64>::generate(n, 50, 2, 20).unwrap();
    let keys = keygen(&params, b"identity").unwrap();
    let s: Vec<i64> = keys.s.to_coeff(&params).unwrap().centered(&params, 0);
    let pk_sum = keys.pk1.mul(&keys.s, &params).unwrap().add(&keys.pk0, &params).unwrap();
    let e_pk: Vec<i64> = pk_sum.neg(&params).unwrap().to_coeff(&params).unwrap().centered(&params, 0);
    assert!(s.iter().all(|c| c.abs() <= 1));
    assert!(e_pk.iter().all(|c| c.abs() <= 21));

    let m_coeffs: Vec<i64> = (0..n as i64).map(|i| 7 * i - 200).collect();
    let m = RnsPolynomial::from_signed(&params, &m_coeffs).unwrap();
    let noise = EncryptionNoise::sample(n, b"identity-noise");
    let ct = encrypt_with_noise(&m, &keys, &params, &noise).unwrap();
    let mu_epk = schoolbook(&noise.mu.coeffs, &e_pk);
    let e1_s = schoolbook(&noise.e1.coeffs, &s);
    let bound = noise_bound(n);
    for mode in [DecryptMode::LastLimb, DecryptMode::AllLimbs] {
        let out = decrypt_with_mode(&ct, &keys.s, &params, mode).unwrap();
        for limb in 0..out.basis().len() {
            let got = out.centered(&params, limb);
            for i in 0..n {
                let e = noise.e0.coeffs[i] as i128 - mu_epk[i] + e1_s[i];
                assert_eq!(got[i] as i128, m_coeffs[i] as i128 + e);
                assert!((e.abs() as f64) <= bound);
            }
        }
    }
}

#[test]
fn decrypt_defaults_to_last_limb() {
    let params = SchemeParams::<u32>::generate(256, 30, 3, 20).unwrap();
    let keys = keygen(&params, b"k").unwrap();
    let ct = encrypt(&encode_fixed(&[1.5], &params).unwrap(), &keys, &params, b"e").unwrap();
    let last = decrypt(&ct, &keys.s, &params).unwrap();
    assert_eq!(last.basis(), &[2]);
    assert_eq!(last.domain(), Domain::Coeff);
    let all = decrypt_with_mode(&ct, &keys.s, &params, DecryptMode::AllLimbs).unwrap();
    assert_eq!(all.basis(), &[0, 1, 2]);
    assert_eq!(all.limb(2), last.limb(0));
}

#[test]
fn datapath_matches_direct_evaluation() {
    for (n, limbs) in [(32usize, 1usize), (256, 2), (2048, 3)] {
        let params = SchemeParams::<u32>::generate(n, 30, limbs, 20).unwrap();
        let keys = keygen(&params, b"seq").unwrap();
        let m = RnsPolynomial::from_signed(&params, &(0..n as i64).collect::<Vec<_>>()).unwrap();
        let noise = EncryptionNoise::sample(n, b"seq-noise");
        assert_eq!(
            encrypt_with_noise(&m, &keys, &params, &noise).unwrap(),
            encrypt_direct(&m, &keys, &params, &noise).unwrap()
        );
        assert_eq!(encryption_schedule(&params).passes(), 2 * limbs);
    }
}

#[test]
fn zero_noise_gives_plain_message() {
    let params = SchemeParams::<u32>::generate(128, 30, 2, 20).unwrap();
    let keys = keygen(&params, b"z").unwrap();
    let m = encode_fixed(&[3.25, -1.0, 0.5], &params).unwrap();
    let ct = encrypt_with_noise(&m, &keys, &params, &EncryptionNoise::zero(128)).unwrap();
    assert_eq!(ct.c0.to_coeff(&params).unwrap(), m);
    assert_eq!(ct.c1, RnsPolynomial::zero(&params, Domain::Ntt));
}

#[test]
fn seeds_are_deterministic() {
    let params = SchemeParams::<u32>::generate(64, 30, 1, 20).unwrap();
    assert_eq!(keygen(&params, b"a").unwrap(), keygen(&params, b"a").unwrap());
    assert_ne!(keygen(&params, b"a").unwrap(), keygen(&params, b"b").unwrap());
    assert_eq!(EncryptionNoise::sample(64, b"x"), EncryptionNoise::sample(64, b"x"));
}

#[test]
fn homomorphic_addition() {
    let params = SchemeParams::<u32>::generate(1024, 30, 2, 20).unwrap();
    let keys = keygen(&params, b"add").unwrap();
    let a: Vec<f64> = (0..1024).map(|i| i as f64 / 100.0 - 5.0).collect();
    let b: Vec<f64> = (0..1024).map(|i| (i % 7) as f64 * 0.3).collect();
    let ca = encrypt(&encode_fixed(&a, &params).unwrap(), &keys, &params, b"1").unwrap();
    let cb = encrypt(&encode_fixed(&b, &params).unwrap(), &keys, &params, b"2").unwrap();
    let sum = decode_fixed(&decrypt(&ca.add(&cb, &params).unwrap(), &keys.s, &params).unwrap(), &params).unwrap();
    let tol = (2.0 * noise_bound(1024) + 1.0) / (1u64 << 20) as f64;
    for i in 0..1024 {
        assert!((sum[i] - (a[i] + b[i])).abs() <= tol);
    }
}

#[test]
fn serialization_roundtrip_and_errors() {
    let p30 = SchemeParams::<u64>::generate(64, 30, 2, 20).unwrap();
    let p60 = SchemeParams::<u64>::generate(64, 60, 2, 20).unwrap();
    for params in [&p30, &p60] {
        let keys = keygen(params, b"ser").unwrap();
        let ct = encrypt(&encode_fixed(&[1.0, 2.0], params).unwrap(), &keys, params, b"e").unwrap();
        let bytes = ct.to_bytes(params).unwrap();
        let width = if params.limb(0).bits() <= 32 { 4 } else { 8 };
        assert_eq!(bytes.len(), 5 + 4 + 1 + 8 * 2 + 1 + 2 * 2 * 64 * width);
        assert_eq!(&bytes[..5], b"RISE1");
        assert_eq!(Ciphertext::from_bytes(&bytes, params).unwrap(), ct);
        assert_eq!(Ciphertext::from_bytes(&bytes, params).unwrap().to_bytes(params).unwrap(), bytes);
        let header = read_header(&bytes).unwrap();
        assert_eq!((header.n, header.moduli.clone(), header.scale_bits), (64, params.moduli(), 20));

        let key_bytes = keys.to_bytes(params);
        assert_eq!(&key_bytes[..5], b"RISK1");
        assert_eq!(KeyPair::from_bytes(&key_bytes, params).unwrap(), keys);

        assert!(matches!(Ciphertext::from_bytes(&bytes[..bytes.len() - 1], params), Err(Error::Format(_))));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(Ciphertext::from_bytes(&extra, params), Err(Error::Format(_))));
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(Ciphertext::from_bytes(&bad_magic, params), Err(Error::Format(_))));
        let mut unreduced = bytes.clone();
        let off = 5 + 4 + 1 + 16 + 1;
        unreduced[off..off + width].fill(0xff);
        assert!(matches!(Ciphertext::from_bytes(&unreduced, params), Err(Error::Format(_))));
        assert!(matches!(Ciphertext::from_bytes(&key_bytes, params), Err(Error::Format(_))));
    }
    let bytes = encrypt(&RnsPolynomial::zero(&p30, Domain::Coeff), &keygen(&p30, b"k").unwrap(), &p30, b"e")
        .unwrap()
        .to_bytes(&p30)
        .unwrap();
    assert!(matches!(Ciphertext::from_bytes(&bytes, &p60), Err(Error::ParamsMismatch(_))));
}

#[test]
fn parameter_and_domain_errors() {
    let a = SchemeParams::<u32>::generate(64, 30, 2, 20).unwrap();
    let b = SchemeParams::<u32>::generate(64, 29, 2, 20).unwrap();
    let keys_a = keygen(&a, b"a").unwrap();
    let keys_b = keygen(&b, b"b").unwrap();
    let ct = encrypt(&RnsPolynomial::zero(&a, Domain::Coeff), &keys_a, &a, b"e").unwrap();
    assert!(matches!(decrypt(&ct, &keys_b.s, &b), Err(Error::ParamsMismatch(_))));
    let s_coeff = keys_a.s.to_coeff(&a).unwrap();
    assert!(matches!(decrypt(&ct, &s_coeff, &a), Err(Error::DomainMismatch { expected: "ntt" })));
    let m_ntt = RnsPolynomial::zero(&a, Domain::Ntt);
    assert!(matches!(encrypt(&m_ntt, &keys_a, &a, b"e"), Err(Error::DomainMismatch { expected: "coefficient" })));
    assert!(matches!(decode_fixed(&m_ntt, &a), Err(Error::DomainMismatch { .. })));
    assert!(matches!(encode_fixed(&[1e9], &a), Err(Error::ScaleOverflow { .. })));
    assert!(matches!(encode_fixed(&[f64::NAN], &a), Err(Error::ScaleOverflow { .. })));
    assert!(matches!(encode_fixed(&[0.0; 65], &a), Err(Error::DegreeMismatch { .. })));
    assert!(matches!(SchemeParams::<u32>::new(64, &[1 << 20], 10), Err(Error::InvalidParams(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn roundtrip_within_noise_bound(
        values in prop::collection::vec(-500.0f64..500.0, 1..=256),
        seed in any::<[u8; 8]>(),
    ) {
        let params = SchemeParams::<u32>::generate(256, 30, 2, 20).unwrap();
        let keys = keygen(&params, &seed).unwrap();
        let ct = encrypt(&encode_fixed(&values, &params).unwrap(), &keys, &params, &seed).unwrap();
        let out = decode_fixed(&decrypt(&ct, &keys.s, &params).unwrap(), &params).unwrap();
        let tol = (noise_bound(256) + 0.5) / (1u64 << 20) as f64;
        for (i, &v) in values.iter().enumerate() {
            prop_assert!((out[i] - v).abs() <= tol);
        }
        for &x in &out[values.len()..] {
            prop_assert!(x.abs() <= tol);
        }
    }
}
