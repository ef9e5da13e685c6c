//! Prover side: registration and authentication-proof generation.
//!
//! An authentication proof Γ is produced in four steps:
//!
//! 1. commitments `c1`, `c00`, `c11`, `c01` to `f1`, `f0²`, `f1²`, `f0·f1`
//!    under fresh blindings;
//! 2. the challenge `e` from the transcript over all commitments, `id` and
//!    the nonce;
//! 3. the batched product-consistency proof;
//! 4. the distance `d`, its blinding `r_d = Σ(r00 + r11 − 2·r01)`, the
//!    distance commitment `c_d = g^d h^(r_d)` and the range proof for `d < ε`.
//!
//! `c_d` is not part of Γ: the verifier rebuilds it homomorphically.

use std::time::{Duration, Instant};

use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::group::PrimeGroup;
use crate::meter::OpMeter;
use crate::mulproof::{relation_challenge, AuthRelationProof, RelationMode, RelationProver, RelationWitness};
use crate::pedersen::{commit, Commitment, Opening};
use crate::rangeproof::{prove_range, prove_range_unchecked_for_testing, RangeKeys, RangeProof};
use crate::transcript::{Transcript, TranscriptLayout};

pub const DEFAULT_FEATURE_BITS: u32 = 8;
pub const DEFAULT_FEATURE_LEN: usize = 128;

/// Widest supported feature, keeping every squared distance inside `u64`
/// for any realistic `N`.
pub const MAX_FEATURE_BITS: u32 = 16;

const PROOF_MAGIC: &[u8; 4] = b"BZAP";
const PROOF_VERSION: u8 = 1;
const RECORD_MAGIC: &[u8; 4] = b"BZRR";
const RECORD_VERSION: u8 = 1;

/// Quantized feature vector with entries in `[0, 2^m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BiometricVector {
    values: Vec<u64>,
    bits: u32,
}

impl BiometricVector {
    pub fn new(values: Vec<u64>, bits: u32) -> Result<Self> {
        if bits == 0 || bits > MAX_FEATURE_BITS {
            return Err(Error::InvalidFeatureWidth(bits));
        }
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v >> bits != 0) {
            return Err(Error::FeatureOutOfRange { index, value, bits });
        }
        Ok(BiometricVector { values, bits })
    }

    /// One decimal integer per line; blank lines are skipped.
    pub fn parse(text: &str, bits: u32) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v = line
                .parse::<u64>()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("{line:?}: {e}") })?;
            values.push(v);
        }
        BiometricVector::new(values, bits)
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|v| format!("{v}\n")).collect()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entries as scalars of `G`; fails if `2^m` exceeds the group order.
    pub fn to_scalars<G: PrimeGroup>(&self) -> Result<Vec<G::Scalar>> {
        if G::order() < (num_bigint::BigUint::from(1u32) << self.bits) {
            return Err(Error::InvalidFeatureWidth(self.bits));
        }
        Ok(self.values.iter().map(|&v| G::scalar_from_u64(v)).collect())
    }
}

/// `Σ (f0_i − f1_i)²` over the integers.
pub fn compute_distance(f0: &BiometricVector, f1: &BiometricVector) -> Result<u64> {
    if f0.len() != f1.len() {
        return Err(Error::LengthMismatch { expected: f0.len(), actual: f1.len() });
    }
    Ok(f0.values.iter().zip(&f1.values).map(|(&a, &b)| a.abs_diff(b).pow(2)).sum())
}

/// User-held registration material. Only `id` and `c0` are public.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationRecord<G: PrimeGroup> {
    pub id: Vec<u8>,
    pub c0: Vec<Commitment<G>>,
    pub f0: BiometricVector,
    pub r0: Vec<G::Scalar>,
    /// Highest nonce this record has produced a proof for.
    pub last_nonce: Option<u64>,
}

impl<G: PrimeGroup> RegistrationRecord<G> {
    pub fn len(&self) -> usize {
        self.c0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c0.is_empty()
    }

    /// Smallest nonce above every one used so far.
    pub fn next_nonce(&self) -> u64 {
        self.last_nonce.map_or(1, |n| n.saturating_add(1))
    }

    /// `BZRR ‖ version ‖ profile ‖ id ‖ m ‖ [f0] ‖ [c0] ‖ [r0] ‖ last nonce`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(RECORD_MAGIC);
        w.u8(RECORD_VERSION);
        w.u8(G::PROFILE.tag());
        w.bytes(&self.id);
        w.u8(self.f0.bits as u8);
        w.u32(self.f0.len() as u32);
        for &v in &self.f0.values {
            w.u64(v);
        }
        w.elements::<G>(self.c0.iter().map(Commitment::element));
        w.scalars::<G>(&self.r0);
        match self.last_nonce {
            None => w.u8(0),
            Some(n) => {
                w.u8(1);
                w.u64(n);
            }
        }
        w.into_bytes()
    }

    /// Parses a record and checks `c0_i = commit(f0_i, r0_i)` for every `i`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(RECORD_MAGIC)?;
        r.version(RECORD_VERSION)?;
        r.expect_profile::<G>()?;
        let id = r.bytes()?.to_vec();
        let bits = r.u8()? as u32;
        let n = r.u32()? as usize;
        if n.saturating_mul(8) > r.remaining() {
            return Err(Error::Decode(format!("feature count {n} exceeds input")));
        }
        let values = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let f0 = BiometricVector::new(values, bits)?;
        let c0: Vec<_> = r.elements::<G>()?.into_iter().map(Commitment::from_element).collect();
        let r0 = r.scalars::<G>()?;
        let last_nonce = match r.u8()? {
            0 => None,
            1 => Some(r.u64()?),
            t => return Err(Error::Decode(format!("bad nonce flag {t}"))),
        };
        r.finish()?;
        for len in [c0.len(), r0.len()] {
            if len != n {
                return Err(Error::LengthMismatch { expected: n, actual: len });
            }
        }
        let f = f0.to_scalars::<G>()?;
        for i in 0..n {
            if commit(&Opening::new(f[i].clone(), r0[i].clone())) != c0[i] {
                return Err(Error::OpeningMismatch);
            }
        }
        Ok(RegistrationRecord { id, c0, f0, r0, last_nonce })
    }
}

/// Commits to `f0` under fresh per-index blindings.
pub fn register<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    id: &[u8],
    f0: &BiometricVector,
    rng: &mut R,
) -> Result<RegistrationRecord<G>> {
    let f = f0.to_scalars::<G>()?;
    let r0: Vec<G::Scalar> = f.iter().map(|_| G::random_scalar(rng)).collect();
    let c0 = f.iter().zip(&r0).map(|(f, r)| commit(&Opening::new(f.clone(), r.clone()))).collect();
    Ok(RegistrationRecord { id: id.to_vec(), c0, f0: f0.clone(), r0, last_nonce: None })
}

/// `Π c00_i · c11_i · (c01_i²)^(−1)`, charging operations to `meter`.
pub fn distance_commitment_metered<G: PrimeGroup>(
    c00: &[Commitment<G>],
    c11: &[Commitment<G>],
    c01: &[Commitment<G>],
    meter: &mut OpMeter,
) -> Result<Commitment<G>> {
    let n = c00.len();
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    for len in [c11.len(), c01.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, actual: len });
        }
    }
    let two = G::scalar_from_u64(2);
    let mut acc = G::identity();
    for i in 0..n {
        acc = meter.mul::<G>(&acc, c00[i].element());
        acc = meter.mul::<G>(&acc, c11[i].element());
        let doubled = meter.exp::<G>(c01[i].element(), &two);
        let inv = meter.inv::<G>(&doubled);
        acc = meter.mul::<G>(&acc, &inv);
    }
    Ok(Commitment::from_element(acc))
}

/// Commitment to the squared distance, rebuilt from the three product
/// vectors alone.
pub fn distance_commitment<G: PrimeGroup>(
    c00: &[Commitment<G>],
    c11: &[Commitment<G>],
    c01: &[Commitment<G>],
) -> Result<Commitment<G>> {
    distance_commitment_metered(c00, c11, c01, &mut OpMeter::new())
}

/// The authentication package Γ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthProof<G: PrimeGroup> {
    pub id: Vec<u8>,
    pub nonce: u64,
    pub c1: Vec<Commitment<G>>,
    pub c00: Vec<Commitment<G>>,
    pub c11: Vec<Commitment<G>>,
    pub c01: Vec<Commitment<G>>,
    pub relations: AuthRelationProof<G>,
    pub pi: RangeProof,
}

impl<G: PrimeGroup> AuthProof<G> {
    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    /// `BZAP ‖ version ‖ profile ‖ id ‖ nonce ‖ [c1] ‖ [c00] ‖ [c11] ‖ [c01] ‖
    /// relation proof ‖ π`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(PROOF_MAGIC);
        w.u8(PROOF_VERSION);
        w.u8(G::PROFILE.tag());
        w.bytes(&self.id);
        w.u64(self.nonce);
        for v in [&self.c1, &self.c00, &self.c11, &self.c01] {
            w.elements::<G>(v.iter().map(Commitment::element));
        }
        self.relations.write(&mut w);
        w.bytes(self.pi.as_bytes());
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(PROOF_MAGIC)?;
        r.version(PROOF_VERSION)?;
        r.expect_profile::<G>()?;
        let id = r.bytes()?.to_vec();
        let nonce = r.u64()?;
        let mut vecs = Vec::with_capacity(4);
        for _ in 0..4 {
            let v: Vec<_> = r.elements::<G>()?.into_iter().map(Commitment::from_element).collect();
            vecs.push(v);
        }
        let relations = AuthRelationProof::read(&mut r)?;
        let pi = RangeProof::from_bytes(r.bytes()?.to_vec());
        r.finish()?;
        let [c1, c00, c11, c01]: [Vec<_>; 4] = vecs.try_into().expect("four vectors");
        Ok(AuthProof { id, nonce, c1, c00, c11, c01, relations, pi })
    }

    /// SHA-256 of the serialized proof.
    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }

    /// Authentication transcript against the registered `c0`.
    pub fn transcript(&self, c0: &[Commitment<G>]) -> Result<Transcript> {
        Transcript::authentication(
            c0,
            &self.c1,
            &self.c00,
            &self.c11,
            &self.c01,
            &self.id,
            self.nonce,
            TranscriptLayout::Framed,
        )
    }
}

/// Wall-clock split of one proof generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProofTimings {
    /// Commitments, challenge and relation proof.
    pub commitment_layer: Duration,
    /// Distance aggregation and range proof.
    pub range_proof: Duration,
}

/// Inputs of one authentication attempt.
#[derive(Clone, Copy, Debug)]
pub struct AuthRequest<'a> {
    pub keys: &'a RangeKeys,
    pub f1: &'a BiometricVector,
    pub nonce: u64,
    pub epsilon: u64,
    pub mode: RelationMode,
}

/// Every secret the prover used for one Γ.
#[doc(hidden)]
#[derive(Clone, Debug)]
pub struct ProverSecrets<G: PrimeGroup> {
    pub witness: RelationWitness<G>,
    /// `b1 … b7` of the relation proof.
    pub nonces: [Vec<G::Scalar>; 7],
    pub d: u64,
    pub r_d: G::Scalar,
}

struct Generated<G: PrimeGroup> {
    proof: AuthProof<G>,
    timings: ProofTimings,
    secrets: ProverSecrets<G>,
}

fn generate<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    record: &mut RegistrationRecord<G>,
    req: &AuthRequest<'_>,
    guarded: bool,
    rng: &mut R,
) -> Result<Generated<G>> {
    req.keys.check::<G>()?;
    if let Some(last) = record.last_nonce {
        if req.nonce <= last {
            return Err(Error::StaleNonce { nonce: req.nonce, last });
        }
    }
    let d = compute_distance(&record.f0, req.f1)?;
    if guarded && d >= req.epsilon {
        return Err(Error::NotBelowThreshold { value: d, epsilon: req.epsilon });
    }
    let f0 = record.f0.to_scalars::<G>()?;
    let f1 = req.f1.to_scalars::<G>()?;
    let n = f0.len();
    if record.c0.len() != n || record.r0.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: record.c0.len().min(record.r0.len()) });
    }

    let start = Instant::now();
    let fresh = |rng: &mut R| -> Vec<G::Scalar> { (0..n).map(|_| G::random_scalar(rng)).collect() };
    let witness = RelationWitness::<G> {
        f0: f0.clone(),
        r0: record.r0.clone(),
        f1: f1.clone(),
        r1: fresh(rng),
        r00: fresh(rng),
        r11: fresh(rng),
        r01: fresh(rng),
    };
    let commit_all = |m: &dyn Fn(usize) -> G::Scalar, r: &[G::Scalar]| -> Vec<Commitment<G>> {
        (0..n).map(|i| commit(&Opening::new(m(i), r[i].clone()))).collect()
    };
    let c1 = commit_all(&|i| f1[i].clone(), &witness.r1);
    let c00 = commit_all(&|i| f0[i].clone() * f0[i].clone(), &witness.r00);
    let c11 = commit_all(&|i| f1[i].clone() * f1[i].clone(), &witness.r11);
    let c01 = commit_all(&|i| f0[i].clone() * f1[i].clone(), &witness.r01);

    let base = Transcript::authentication(
        &record.c0,
        &c1,
        &c00,
        &c11,
        &c01,
        &record.id,
        req.nonce,
        TranscriptLayout::Framed,
    )?;
    let prover = RelationProver::commit(req.mode, &witness, &record.c0, &c1, rng)?;
    let e = relation_challenge(&base, req.mode, prover.first_message());
    let relations = prover.respond(&e);
    let nonces = prover.nonces().clone();
    let commitment_layer = start.elapsed();

    let start = Instant::now();
    let two = G::scalar_from_u64(2);
    let mut r_d = G::scalar_zero();
    for i in 0..n {
        r_d = r_d + witness.r00[i].clone() + witness.r11[i].clone() - two.clone() * witness.r01[i].clone();
    }
    let c_d = commit(&Opening::new(G::scalar_from_u64(d), r_d.clone()));
    let pi = if guarded {
        prove_range(&req.keys.pk, d, &r_d, &c_d, req.epsilon, rng)?
    } else {
        prove_range_unchecked_for_testing(&req.keys.pk, d, &r_d, &c_d, req.epsilon, rng)?
    };
    let range_proof = start.elapsed();
    debug_assert_eq!(distance_commitment(&c00, &c11, &c01).as_ref(), Ok(&c_d));

    record.last_nonce = Some(req.nonce);
    let proof = AuthProof { id: record.id.clone(), nonce: req.nonce, c1, c00, c11, c01, relations, pi };
    Ok(Generated {
        proof,
        timings: ProofTimings { commitment_layer, range_proof },
        secrets: ProverSecrets { witness, nonces, d, r_d },
    })
}

/// Builds Γ for probe `f1` and advances the record's nonce.
///
/// Refuses when the nonce is not above the record's last one or when the
/// distance is not below `ε`.
pub fn generate_auth_proof<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    record: &mut RegistrationRecord<G>,
    req: &AuthRequest<'_>,
    rng: &mut R,
) -> Result<AuthProof<G>> {
    generate(record, req, true, rng).map(|g| g.proof)
}

/// [`generate_auth_proof`] with a timing split of the prover's work.
pub fn generate_auth_proof_timed<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    record: &mut RegistrationRecord<G>,
    req: &AuthRequest<'_>,
    rng: &mut R,
) -> Result<(AuthProof<G>, ProofTimings)> {
    generate(record, req, true, rng).map(|g| (g.proof, g.timings))
}

/// Generates Γ even when `d ≥ ε`, for negative-path tests. The range proof
/// of such a Γ never verifies.
#[doc(hidden)]
pub fn generate_auth_proof_unchecked_for_testing<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    record: &mut RegistrationRecord<G>,
    req: &AuthRequest<'_>,
    rng: &mut R,
) -> Result<AuthProof<G>> {
    generate(record, req, false, rng).map(|g| g.proof)
}

/// Honest generation that also returns the prover's secrets, for audits.
#[doc(hidden)]
pub fn generate_auth_proof_with_secrets_for_testing<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    record: &mut RegistrationRecord<G>,
    req: &AuthRequest<'_>,
    rng: &mut R,
) -> Result<(AuthProof<G>, ProverSecrets<G>)> {
    generate(record, req, true, rng).map(|g| (g.proof, g.secrets))
}
