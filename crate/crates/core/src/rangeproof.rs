//! Range proofs for committed values: shows that `c_d` opens to some
//! `d ∈ [0, ε)` without revealing `d`.
//!
//! The backend is a transparent bit-decomposition proof. The prover commits
//! to the `L` bits of `d` and the `L` bits of `ε − 1 − d`, proves each bit
//! commitment opens to 0 or 1 with a two-branch OR proof, and arranges the
//! blindings so that
//!
//! ```text
//! Π C_j^(2^j)  = c_d
//! Π C'_j^(2^j) = g^(ε−1) · c_d^(−1)
//! ```
//!
//! All `2L` OR proofs share one Fiat–Shamir challenge. With `2^(L+1) ≤ q + 1`
//! neither sum can wrap modulo `q`, so both decompositions pin `d` to
//! `[0, ε − 1]` over the integers. Proof size depends on `L` only.

use std::fmt;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::group::{PrimeGroup, Profile};
use crate::meter::OpMeter;
use crate::pedersen::{commit, Commitment, Opening};

/// Backend identifier of the bit-decomposition proof.
pub const BACKEND_BIT_SIGMA: u8 = 0x01;

const DOMAIN: &[u8] = b"biozero/range/bitsigma/v1";
const KEYS_MAGIC: &[u8; 4] = b"BZRK";
const KEYS_VERSION: u8 = 1;

/// Largest supported bit-length for `G`: `2^(L+1) ≤ q + 1`, capped at 64.
pub fn max_bits<G: PrimeGroup>() -> u32 {
    let capacity = (G::order() + BigUint::from(1u32)).bits() as u32 - 2;
    capacity.min(64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProvingKey {
    pub profile: Profile,
    pub bits: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VerifyingKey {
    pub profile: Profile,
    pub bits: u32,
}

/// Keys for the range domain `[0, 2^L)`. The backend needs no trusted setup,
/// so both halves carry the same public data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RangeKeys {
    pub pk: ProvingKey,
    pub vk: VerifyingKey,
}

impl RangeKeys {
    pub fn bits(&self) -> u32 {
        self.vk.bits
    }

    pub fn profile(&self) -> Profile {
        self.vk.profile
    }

    /// `BZRK ‖ version ‖ profile ‖ backend ‖ u32 L`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(KEYS_MAGIC);
        w.u8(KEYS_VERSION);
        w.u8(self.vk.profile.tag());
        w.u8(BACKEND_BIT_SIGMA);
        w.u32(self.vk.bits);
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<RangeKeys> {
        let mut r = Reader::new(bytes);
        r.magic(KEYS_MAGIC)?;
        r.version(KEYS_VERSION)?;
        let profile = r.profile()?;
        let backend = r.u8()?;
        if backend != BACKEND_BIT_SIGMA {
            return Err(Error::Decode(format!("unknown range backend {backend}")));
        }
        let bits = r.u32()?;
        r.finish()?;
        if bits == 0 || bits > 64 {
            return Err(Error::Decode(format!("range bit-length {bits} out of bounds")));
        }
        Ok(keys(profile, bits))
    }

    /// Requires the keys to belong to `G` and fit its capacity.
    pub fn check<G: PrimeGroup>(&self) -> Result<()> {
        if self.profile() != G::PROFILE {
            return Err(Error::ProfileMismatch {
                expected: G::PROFILE.to_string(),
                found: self.profile().to_string(),
            });
        }
        check_bits::<G>(self.bits())
    }
}

fn keys(profile: Profile, bits: u32) -> RangeKeys {
    RangeKeys { pk: ProvingKey { profile, bits }, vk: VerifyingKey { profile, bits } }
}

fn check_bits<G: PrimeGroup>(bits: u32) -> Result<()> {
    let max = max_bits::<G>();
    if bits == 0 || bits > max {
        return Err(Error::RangeBitsUnsupported { bits, max });
    }
    Ok(())
}

fn check_epsilon(epsilon: u64, bits: u32) -> Result<()> {
    if epsilon == 0 || (bits < 64 && epsilon > 1u64 << bits) {
        return Err(Error::ThresholdOutOfDomain { epsilon, bits });
    }
    Ok(())
}

/// Keys for the domain `[0, 2^bits)`. Deterministic.
pub fn setup<G: PrimeGroup>(bits: u32) -> Result<RangeKeys> {
    check_bits::<G>(bits)?;
    Ok(keys(G::PROFILE, bits))
}

/// Opaque proof bytes; the first byte names the backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeProof {
    bytes: Vec<u8>,
}

impl RangeProof {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        RangeProof { bytes }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn backend(&self) -> Option<u8> {
        self.bytes.first().copied()
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Parsed bit-decomposition proof. Entries `0..L` belong to `d`, entries
/// `L..2L` to `ε − 1 − d`; bit `j` of each half has weight `2^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitProof<G: PrimeGroup> {
    pub challenge: G::Scalar,
    pub commitments: Vec<G::Element>,
    /// Challenge share of the "bit is 0" branch; the other is `e − e0`.
    pub e0: Vec<G::Scalar>,
    pub z0: Vec<G::Scalar>,
    pub z1: Vec<G::Scalar>,
}

impl<G: PrimeGroup> BitProof<G> {
    /// `backend ‖ e ‖ [C] ‖ [e0] ‖ [z0] ‖ [z1]`, arrays count-prefixed.
    pub fn encode(&self) -> RangeProof {
        let mut w = Writer::new();
        w.u8(BACKEND_BIT_SIGMA);
        w.scalar::<G>(&self.challenge);
        w.elements::<G>(self.commitments.iter());
        w.scalars::<G>(&self.e0);
        w.scalars::<G>(&self.z0);
        w.scalars::<G>(&self.z1);
        RangeProof::from_bytes(w.into_bytes())
    }

    /// Structural decoding only; lengths are checked against the key at
    /// verification time.
    pub fn decode(proof: &RangeProof) -> Result<Self> {
        let mut r = Reader::new(proof.as_bytes());
        let backend = r.u8()?;
        if backend != BACKEND_BIT_SIGMA {
            return Err(Error::Decode(format!("unknown range backend {backend}")));
        }
        let out = BitProof {
            challenge: r.scalar::<G>()?,
            commitments: r.elements::<G>()?,
            e0: r.scalars::<G>()?,
            z0: r.scalars::<G>()?,
            z1: r.scalars::<G>()?,
        };
        r.finish()?;
        Ok(out)
    }
}

fn pow2<G: PrimeGroup>(j: u32) -> G::Scalar {
    G::scalar_from_u64(1u64 << j)
}

/// Bits of `value` (low first) with blindings summing to `blinding` under
/// weights `2^j`.
fn decompose<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    value: u64,
    blinding: &G::Scalar,
    bits: u32,
    rng: &mut R,
) -> Vec<(bool, G::Scalar)> {
    let mut out: Vec<(bool, G::Scalar)> =
        (0..bits).map(|j| (value >> j & 1 == 1, G::random_scalar(rng))).collect();
    let mut s0 = blinding.clone();
    for (j, (_, s)) in out.iter().enumerate().skip(1) {
        s0 = s0 - pow2::<G>(j as u32) * s.clone();
    }
    out[0].1 = s0;
    out
}

/// Bytes hashed into the shared challenge.
fn challenge_input<G: PrimeGroup>(
    bits: u32,
    epsilon: u64,
    c_d: &G::Element,
    commitments: &[G::Element],
    firsts: &[(G::Element, G::Element)],
) -> Vec<u8> {
    let mut w = Writer::new();
    w.raw(DOMAIN);
    w.u8(G::PROFILE.tag());
    w.u32(bits);
    w.u64(epsilon);
    w.element::<G>(c_d);
    for c in commitments {
        w.element::<G>(c);
    }
    for (a0, a1) in firsts {
        w.element::<G>(a0);
        w.element::<G>(a1);
    }
    w.into_bytes()
}

fn hash_to_scalar<G: PrimeGroup>(input: &[u8]) -> G::Scalar {
    G::scalar_from_be_bytes_mod_order(&Sha256::digest(input))
}

/// `ε − 1` as a scalar.
fn threshold_scalar<G: PrimeGroup>(epsilon: u64) -> G::Scalar {
    G::scalar_from_u64(epsilon - 1)
}

fn prove_decompositions<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    bits: u32,
    c_d: &Commitment<G>,
    epsilon: u64,
    d: u64,
    r_d: &G::Scalar,
    rng: &mut R,
) -> RangeProof {
    let h = G::blinding_generator();
    let g_inv = G::inv(&G::generator());
    let mut entries = decompose::<G, R>(d, r_d, bits, rng);
    let rest = (epsilon - 1).wrapping_sub(d);
    entries.extend(decompose::<G, R>(rest, &-r_d.clone(), bits, rng));

    struct Pending<G: PrimeGroup> {
        bit: bool,
        s: G::Scalar,
        k: G::Scalar,
        sim_e: G::Scalar,
        sim_z: G::Scalar,
    }
    let mut commitments = Vec::with_capacity(entries.len());
    let mut firsts = Vec::with_capacity(entries.len());
    let mut pending = Vec::with_capacity(entries.len());
    for (bit, s) in entries {
        let b = if bit { G::scalar_one() } else { G::scalar_zero() };
        let c = G::commit_gh(&b, &s);
        let y0 = c.clone();
        let y1 = G::mul(&c, &g_inv);
        let k = G::random_scalar(rng);
        let sim_e = G::random_scalar(rng);
        let sim_z = G::random_scalar(rng);
        let real = G::exp(&h, &k);
        let (sim_base, pair) = if bit { (&y0, 0) } else { (&y1, 1) };
        let sim = G::exp2(&h, &sim_z, sim_base, &-sim_e.clone());
        firsts.push(if pair == 0 { (sim, real) } else { (real, sim) });
        commitments.push(c);
        pending.push(Pending::<G> { bit, s, k, sim_e, sim_z });
    }

    let input = challenge_input::<G>(bits, epsilon, c_d.element(), &commitments, &firsts);
    let e = hash_to_scalar::<G>(&input);
    let mut e0 = Vec::with_capacity(pending.len());
    let mut z0 = Vec::with_capacity(pending.len());
    let mut z1 = Vec::with_capacity(pending.len());
    for p in pending {
        let real_e = e.clone() - p.sim_e.clone();
        let real_z = p.k + real_e.clone() * p.s;
        if p.bit {
            e0.push(p.sim_e);
            z0.push(p.sim_z);
            z1.push(real_z);
        } else {
            e0.push(real_e);
            z0.push(real_z);
            z1.push(p.sim_z);
        }
    }
    BitProof::<G> { challenge: e, commitments, e0, z0, z1 }.encode()
}

/// Proves `c_d = commit(d, r_d)` with `d < ε`.
///
/// Refuses when `d ≥ ε`, when the opening does not match, or when `ε` lies
/// outside `[1, 2^L]`.
pub fn prove_range<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    pk: &ProvingKey,
    d: u64,
    r_d: &G::Scalar,
    c_d: &Commitment<G>,
    epsilon: u64,
    rng: &mut R,
) -> Result<RangeProof> {
    keys(pk.profile, pk.bits).check::<G>()?;
    check_epsilon(epsilon, pk.bits)?;
    if d >= epsilon {
        return Err(Error::NotBelowThreshold { value: d, epsilon });
    }
    if commit(&Opening::new(G::scalar_from_u64(d), r_d.clone())) != *c_d {
        return Err(Error::OpeningMismatch);
    }
    Ok(prove_decompositions(pk.bits, c_d, epsilon, d, r_d, rng))
}

/// Builds a proof without the `d < ε` guard so negative paths can be
/// exercised. The result never verifies when `d ≥ ε`.
#[doc(hidden)]
pub fn prove_range_unchecked_for_testing<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    pk: &ProvingKey,
    d: u64,
    r_d: &G::Scalar,
    c_d: &Commitment<G>,
    epsilon: u64,
    rng: &mut R,
) -> Result<RangeProof> {
    keys(pk.profile, pk.bits).check::<G>()?;
    check_epsilon(epsilon, pk.bits)?;
    Ok(prove_decompositions(pk.bits, c_d, epsilon, d, r_d, rng))
}

/// Why a range proof was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RangeFailure {
    /// Key profile or bit-length unusable, or `ε` outside `[1, 2^L]`.
    Domain(String),
    Malformed(String),
    /// The weighted bit commitments of half `0` (`d`) or `1` (`ε − 1 − d`)
    /// do not recombine to the target.
    Recombination(usize),
    /// Recomputed challenge differs: some OR proof is invalid.
    Challenge,
}

impl fmt::Display for RangeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeFailure::Domain(msg) => write!(f, "range domain: {msg}"),
            RangeFailure::Malformed(msg) => write!(f, "malformed range proof: {msg}"),
            RangeFailure::Recombination(0) => f.write_str("bit commitments do not recombine to c_d"),
            RangeFailure::Recombination(_) => {
                f.write_str("complement bit commitments do not recombine to g^(ε−1)/c_d")
            }
            RangeFailure::Challenge => f.write_str("bit OR proofs do not match the challenge"),
        }
    }
}

/// `Π C_j^(2^j)` by Horner's rule, highest bit first.
fn recombine<G: PrimeGroup>(meter: &mut OpMeter, cs: &[G::Element]) -> G::Element {
    let mut acc = cs[cs.len() - 1].clone();
    for c in cs[..cs.len() - 1].iter().rev() {
        let sq = meter.mul::<G>(&acc, &acc);
        acc = meter.mul::<G>(&sq, c);
    }
    acc
}

/// Verifies with a diagnostic, charging every group operation to `meter`.
pub fn verify_range_detailed<G: PrimeGroup>(
    vk: &VerifyingKey,
    c_d: &Commitment<G>,
    epsilon: u64,
    proof: &RangeProof,
    meter: &mut OpMeter,
) -> std::result::Result<(), RangeFailure> {
    let bits = vk.bits;
    keys(vk.profile, bits)
        .check::<G>()
        .and_then(|_| check_epsilon(epsilon, bits))
        .map_err(|e| RangeFailure::Domain(e.to_string()))?;
    let p = BitProof::<G>::decode(proof).map_err(|e| RangeFailure::Malformed(e.to_string()))?;
    let n = 2 * bits as usize;
    for (name, len) in
        [("commitments", p.commitments.len()), ("e0", p.e0.len()), ("z0", p.z0.len()), ("z1", p.z1.len())]
    {
        if len != n {
            return Err(RangeFailure::Malformed(format!("{name} has {len} entries, expected {n}")));
        }
    }

    let half = bits as usize;
    let c = c_d.element();
    if recombine::<G>(meter, &p.commitments[..half]) != *c {
        return Err(RangeFailure::Recombination(0));
    }
    let g_eps = meter.exp::<G>(&G::generator(), &threshold_scalar::<G>(epsilon));
    let c_inv = meter.inv::<G>(c);
    let target = meter.mul::<G>(&g_eps, &c_inv);
    if recombine::<G>(meter, &p.commitments[half..]) != target {
        return Err(RangeFailure::Recombination(1));
    }

    let h = G::blinding_generator();
    let g_inv = meter.inv::<G>(&G::generator());
    let mut firsts = Vec::with_capacity(n);
    for j in 0..n {
        let cj = &p.commitments[j];
        let e1 = p.challenge.clone() - p.e0[j].clone();
        let y1 = meter.mul::<G>(cj, &g_inv);
        let a0 = meter.exp2::<G>(&h, &p.z0[j], cj, &-p.e0[j].clone());
        let a1 = meter.exp2::<G>(&h, &p.z1[j], &y1, &-e1);
        firsts.push((a0, a1));
    }
    let input = challenge_input::<G>(bits, epsilon, c, &p.commitments, &firsts);
    meter.hash();
    if hash_to_scalar::<G>(&input) != p.challenge {
        return Err(RangeFailure::Challenge);
    }
    Ok(())
}

pub fn verify_range<G: PrimeGroup>(
    vk: &VerifyingKey,
    c_d: &Commitment<G>,
    epsilon: u64,
    proof: &RangeProof,
) -> bool {
    verify_range_detailed(vk, c_d, epsilon, proof, &mut OpMeter::new()).is_ok()
}
