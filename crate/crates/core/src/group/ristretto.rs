use std::sync::LazyLock;

use curve25519_dalek::constants::{RISTRETTO_BASEPOINT_POINT, RISTRETTO_BASEPOINT_TABLE};
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoBasepointTable, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{Identity, MultiscalarMul};
use num_bigint::BigUint;
use num_traits::One;
use rand_core::{CryptoRng, RngCore};
use sha2::Sha512;

use super::{GroupParams, PrimeGroup, Profile, BLINDING_GENERATOR_TAG};

/// The Ristretto255 prime-order group.
///
/// Elements use the canonical 32-byte Ristretto encoding; scalars are
/// written big-endian like every other profile.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Ristretto255;

static H: LazyLock<RistrettoPoint> = LazyLock::new(|| {
    let mut seed = BLINDING_GENERATOR_TAG.to_vec();
    seed.extend_from_slice(RISTRETTO_BASEPOINT_POINT.compress().as_bytes());
    RistrettoPoint::hash_from_bytes::<Sha512>(&seed)
});

static H_TABLE: LazyLock<RistrettoBasepointTable> = LazyLock::new(|| RistrettoBasepointTable::create(&H));

/// l = 2^252 + 27742317777372353535851937790883648493
fn group_order() -> BigUint {
    (BigUint::one() << 252u32) + BigUint::parse_bytes(b"27742317777372353535851937790883648493", 10).unwrap()
}

impl PrimeGroup for Ristretto255 {
    type Scalar = Scalar;
    type Element = RistrettoPoint;

    const PROFILE: Profile = Profile::Production;

    fn params() -> GroupParams {
        GroupParams {
            profile: Profile::Production,
            modulus: (BigUint::one() << 255u32) - 19u32,
            order: group_order(),
            g: Self::element_bytes(&Self::generator()),
            h: Self::element_bytes(&Self::blinding_generator()),
            element_len: 32,
            scalar_len: 32,
        }
    }

    fn generator() -> RistrettoPoint {
        RISTRETTO_BASEPOINT_POINT
    }

    fn blinding_generator() -> RistrettoPoint {
        *H
    }

    fn identity() -> RistrettoPoint {
        RistrettoPoint::identity()
    }

    fn mul(a: &RistrettoPoint, b: &RistrettoPoint) -> RistrettoPoint {
        a + b
    }

    fn inv(a: &RistrettoPoint) -> RistrettoPoint {
        -a
    }

    fn exp(base: &RistrettoPoint, k: &Scalar) -> RistrettoPoint {
        base * k
    }

    fn exp2(b1: &RistrettoPoint, k1: &Scalar, b2: &RistrettoPoint, k2: &Scalar) -> RistrettoPoint {
        RistrettoPoint::multiscalar_mul([k1, k2], [b1, b2])
    }

    fn commit_gh(f: &Scalar, r: &Scalar) -> RistrettoPoint {
        RISTRETTO_BASEPOINT_TABLE * f + &*H_TABLE * r
    }

    fn hash_to_group(seed: &[u8]) -> RistrettoPoint {
        RistrettoPoint::hash_from_bytes::<Sha512>(seed)
    }

    fn element_len() -> usize {
        32
    }

    fn scalar_len() -> usize {
        32
    }

    fn encode_element(e: &RistrettoPoint, out: &mut Vec<u8>) {
        out.extend_from_slice(e.compress().as_bytes());
    }

    fn decode_element(bytes: &[u8]) -> Option<RistrettoPoint> {
        CompressedRistretto::from_slice(bytes).ok()?.decompress()
    }

    fn encode_scalar(s: &Scalar, out: &mut Vec<u8>) {
        let mut b = s.to_bytes();
        b.reverse();
        out.extend_from_slice(&b);
    }

    fn decode_scalar(bytes: &[u8]) -> Option<Scalar> {
        let mut le: [u8; 32] = bytes.try_into().ok()?;
        le.reverse();
        Scalar::from_canonical_bytes(le).into()
    }

    fn scalar_from_u64(v: u64) -> Scalar {
        Scalar::from(v)
    }

    fn scalar_from_be_bytes_mod_order(bytes: &[u8]) -> Scalar {
        let reduced = BigUint::from_bytes_be(bytes) % group_order();
        let mut le = [0u8; 32];
        let raw = reduced.to_bytes_le();
        le[..raw.len()].copy_from_slice(&raw);
        Scalar::from_canonical_bytes(le).expect("reduced below l")
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Scalar {
        let mut wide = [0u8; 64];
        rng.fill_bytes(&mut wide);
        Scalar::from_bytes_mod_order_wide(&wide)
    }

    fn invert_scalar(s: &Scalar) -> Option<Scalar> {
        (*s != Scalar::ZERO).then(|| s.invert())
    }

    fn order() -> BigUint {
        group_order()
    }
}
