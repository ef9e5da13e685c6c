//! Prime-order cyclic groups.
//!
//! Everything above this module is generic over [`PrimeGroup`]. Three
//! instantiations ship with the crate:
//!
//! * [`ToyGroup`]: the order-11 subgroup of `Z_23^*` with `g = 2`, `h = 3`.
//!   Small enough for exhaustive oracles in tests; offers no security.
//! * [`Ristretto255`]: the prime-order Ristretto group over Curve25519. This
//!   is the `production` profile.
//! * [`Modp2048`]: the quadratic-residue subgroup of the RFC 3526 2048-bit
//!   safe-prime group. Multiplicative like the toy group but slow.
//!
//! Group elements are written multiplicatively throughout (`mul`, `inv`,
//! `exp`), whatever the underlying representation.

mod modular;
mod ristretto;

use std::fmt::{self, Debug};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

pub use modular::{
    ModConstants, ModElement, ModGroup, ModParams, ModScalar, Modp2048, Modp2048Params, ToyGroup, ToyParams,
};
pub use ristretto::Ristretto255;

/// Domain tag used to derive the blinding generator `h` from `g`.
pub const BLINDING_GENERATOR_TAG: &[u8] = b"biozero/pedersen/h/v1";

/// Selects one of the built-in group instantiations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Profile {
    Toy,
    Production,
    Modp2048,
}

impl Profile {
    pub const ALL: [Profile; 3] = [Profile::Toy, Profile::Production, Profile::Modp2048];

    /// One-byte tag written into every file header.
    pub fn tag(self) -> u8 {
        match self {
            Profile::Toy => 0x01,
            Profile::Production => 0x02,
            Profile::Modp2048 => 0x03,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Profile> {
        Profile::ALL.into_iter().find(|p| p.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Toy => "toy",
            Profile::Production => "production",
            Profile::Modp2048 => "modp2048",
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "toy" => Ok(Profile::Toy),
            "production" | "ristretto255" => Ok(Profile::Production),
            "modp2048" => Ok(Profile::Modp2048),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// A prime-order cyclic group together with its scalar field `Z_q`.
///
/// Implementors are zero-sized markers; all operations are associated
/// functions so protocol code reads `G::exp(&c, &e)`.
pub trait PrimeGroup: Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    type Scalar: Clone
        + Debug
        + PartialEq
        + Eq
        + Send
        + Sync
        + Add<Output = Self::Scalar>
        + Sub<Output = Self::Scalar>
        + Mul<Output = Self::Scalar>
        + Neg<Output = Self::Scalar>;

    type Element: Clone + Debug + PartialEq + Eq + Send + Sync;

    const PROFILE: Profile;

    /// Descriptive parameters (modulus, order, generators, encoding lengths).
    fn params() -> GroupParams;

    /// The message generator `g`.
    fn generator() -> Self::Element;

    /// The blinding generator `h`, with no known discrete log base `g`.
    fn blinding_generator() -> Self::Element;

    fn identity() -> Self::Element;

    fn mul(a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn inv(a: &Self::Element) -> Self::Element;

    /// `base^k`. Implementations run a fixed operation sequence for every `k`.
    fn exp(base: &Self::Element, k: &Self::Scalar) -> Self::Element;

    /// `b1^k1 · b2^k2`.
    fn exp2(b1: &Self::Element, k1: &Self::Scalar, b2: &Self::Element, k2: &Self::Scalar) -> Self::Element {
        Self::mul(&Self::exp(b1, k1), &Self::exp(b2, k2))
    }

    /// `g^f · h^r`; groups with precomputed tables override this.
    fn commit_gh(f: &Self::Scalar, r: &Self::Scalar) -> Self::Element {
        Self::exp2(&Self::generator(), f, &Self::blinding_generator(), r)
    }

    /// Deterministically maps bytes to an element of the prime-order group.
    fn hash_to_group(seed: &[u8]) -> Self::Element;

    /// Fixed length of an encoded element in bytes.
    fn element_len() -> usize;

    /// Fixed length of an encoded scalar in bytes.
    fn scalar_len() -> usize;

    fn encode_element(e: &Self::Element, out: &mut Vec<u8>);

    /// Accepts only canonical encodings of subgroup elements.
    fn decode_element(bytes: &[u8]) -> Option<Self::Element>;

    /// Big-endian, fixed length.
    fn encode_scalar(s: &Self::Scalar, out: &mut Vec<u8>);

    /// Accepts only canonical (fully reduced) encodings.
    fn decode_scalar(bytes: &[u8]) -> Option<Self::Scalar>;

    fn scalar_from_u64(v: u64) -> Self::Scalar;

    /// Interprets `bytes` as a big-endian integer and reduces it mod `q`.
    fn scalar_from_be_bytes_mod_order(bytes: &[u8]) -> Self::Scalar;

    /// Uniform in `[0, q)`.
    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self::Scalar;

    /// Multiplicative inverse in `Z_q`; `None` for zero.
    fn invert_scalar(s: &Self::Scalar) -> Option<Self::Scalar>;

    /// The group order `q`.
    fn order() -> BigUint;

    fn scalar_zero() -> Self::Scalar {
        Self::scalar_from_u64(0)
    }

    fn scalar_one() -> Self::Scalar {
        Self::scalar_from_u64(1)
    }

    fn element_bytes(e: &Self::Element) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::element_len());
        Self::encode_element(e, &mut out);
        out
    }

    fn scalar_bytes(s: &Self::Scalar) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::scalar_len());
        Self::encode_scalar(s, &mut out);
        out
    }
}

/// Public description of a group instantiation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub profile: Profile,
    /// Field or group modulus `p`.
    pub modulus: BigUint,
    /// Prime order `q` of the group in which commitments live.
    pub order: BigUint,
    /// Encoded `g`.
    pub g: Vec<u8>,
    /// Encoded `h`.
    pub h: Vec<u8>,
    pub element_len: usize,
    pub scalar_len: usize,
}

const PARAMS_MAGIC: &[u8; 4] = b"BZGP";
const PARAMS_VERSION: u8 = 1;

impl GroupParams {
    /// Serializes to the params file format.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(PARAMS_MAGIC);
        w.u8(PARAMS_VERSION);
        w.u8(self.profile.tag());
        w.bytes(&self.modulus.to_bytes_be());
        w.bytes(&self.order.to_bytes_be());
        w.bytes(&self.g);
        w.bytes(&self.h);
        w.u32(self.element_len as u32);
        w.u32(self.scalar_len as u32);
        w.into_bytes()
    }

    /// Parses a params file and checks it against the built-in constants of
    /// its profile.
    pub fn from_bytes(bytes: &[u8]) -> Result<GroupParams> {
        let mut r = Reader::new(bytes);
        r.magic(PARAMS_MAGIC)?;
        r.version(PARAMS_VERSION)?;
        let profile = r.profile()?;
        let params = GroupParams {
            profile,
            modulus: BigUint::from_bytes_be(r.bytes()?),
            order: BigUint::from_bytes_be(r.bytes()?),
            g: r.bytes()?.to_vec(),
            h: r.bytes()?.to_vec(),
            element_len: r.u32()? as usize,
            scalar_len: r.u32()? as usize,
        };
        r.finish()?;
        if params != setup_group(profile) {
            return Err(Error::Decode(format!("parameters do not match the built-in {profile} group")));
        }
        Ok(params)
    }
}

/// Returns the fixed parameters of `profile`.
pub fn setup_group(profile: Profile) -> GroupParams {
    match profile {
        Profile::Toy => ToyGroup::params(),
        Profile::Production => Ristretto255::params(),
        Profile::Modp2048 => Modp2048::params(),
    }
}

/// Minimal byte length of `x` (at least one byte).
pub(crate) fn byte_len(x: &BigUint) -> usize {
    x.bits().div_ceil(8).max(1) as usize
}

/// Left-pads the big-endian encoding of `x` to `len` bytes.
pub(crate) fn to_fixed_be(x: &BigUint, len: usize, out: &mut Vec<u8>) {
    let raw = x.to_bytes_be();
    debug_assert!(raw.len() <= len);
    out.extend(std::iter::repeat_n(0u8, len - raw.len()));
    out.extend_from_slice(&raw);
}
