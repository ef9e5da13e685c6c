//! Prime-order subgroups of `Z_p^*` for safe primes `p = 2q + 1`.

use std::fmt::Debug;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::LazyLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::{byte_len, to_fixed_be, GroupParams, PrimeGroup, Profile, BLINDING_GENERATOR_TAG};

/// Constants of one safe-prime group.
#[derive(Clone, Debug)]
pub struct ModConstants {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub h: BigUint,
    pub element_len: usize,
    pub scalar_len: usize,
    /// Number of ladder steps per exponentiation.
    pub q_bits: u64,
}

impl ModConstants {
    fn new(p: BigUint, g: BigUint, h: Option<BigUint>) -> Self {
        let q = (&p - 1u32) >> 1;
        let element_len = byte_len(&p);
        let scalar_len = byte_len(&q);
        let q_bits = q.bits();
        let mut c = ModConstants { p, q, g, h: BigUint::zero(), element_len, scalar_len, q_bits };
        c.h = match h {
            Some(h) => h,
            None => {
                let mut seed = BLINDING_GENERATOR_TAG.to_vec();
                to_fixed_be(&c.g, c.element_len, &mut seed);
                hash_to_subgroup(&c, &seed)
            }
        };
        c
    }
}

/// Supplies the constants for a [`ModGroup`].
pub trait ModParams: Copy + Clone + Debug + Default + PartialEq + Eq + Send + Sync + 'static {
    const PROFILE: Profile;
    fn constants() -> &'static ModConstants;
}

/// `p = 23`, `q = 11`, `g = 2`, `h = 3`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ToyParams;

/// RFC 3526 group 14 (2048-bit MODP), `g = 2`, `h` hashed from `g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Modp2048Params;

static TOY: LazyLock<ModConstants> = LazyLock::new(|| {
    // h is pinned rather than hashed so hand-computed toy vectors stay valid.
    ModConstants::new(23u32.into(), 2u32.into(), Some(3u32.into()))
});

const RFC3526_2048: &str = "\
FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74\
020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437\
4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED\
EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05\
98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB\
9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B\
E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718\
3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF";

static MODP2048: LazyLock<ModConstants> = LazyLock::new(|| {
    let p = BigUint::parse_bytes(RFC3526_2048.as_bytes(), 16).expect("valid prime literal");
    ModConstants::new(p, 2u32.into(), None)
});

impl ModParams for ToyParams {
    const PROFILE: Profile = Profile::Toy;
    fn constants() -> &'static ModConstants {
        &TOY
    }
}

impl ModParams for Modp2048Params {
    const PROFILE: Profile = Profile::Modp2048;
    fn constants() -> &'static ModConstants {
        &MODP2048
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModGroup<P>(PhantomData<P>);

pub type ToyGroup = ModGroup<ToyParams>;
pub type Modp2048 = ModGroup<Modp2048Params>;

/// Integer in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModScalar<P> {
    value: BigUint,
    _params: PhantomData<P>,
}

/// Integer in `[1, p)` of multiplicative order dividing `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModElement<P> {
    value: BigUint,
    _params: PhantomData<P>,
}

impl<P: ModParams> ModScalar<P> {
    fn reduce(value: BigUint) -> Self {
        ModScalar { value: value % &P::constants().q, _params: PhantomData }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

impl<P: ModParams> ModElement<P> {
    fn wrap(value: BigUint) -> Self {
        ModElement { value, _params: PhantomData }
    }

    /// Builds an element from an integer, checking subgroup membership.
    pub fn new(value: BigUint) -> Option<Self> {
        let c = P::constants();
        if value.is_zero() || value >= c.p || !value.modpow(&c.q, &c.p).is_one() {
            return None;
        }
        Some(Self::wrap(value))
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

impl<P: ModParams> Add for ModScalar<P> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::reduce(self.value + rhs.value)
    }
}

impl<P: ModParams> Sub for ModScalar<P> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::reduce(self.value + &P::constants().q - rhs.value)
    }
}

impl<P: ModParams> Mul for ModScalar<P> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::reduce(self.value * rhs.value)
    }
}

impl<P: ModParams> Neg for ModScalar<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::reduce(&P::constants().q - self.value)
    }
}

/// Montgomery ladder over the full bit-length of `q`.
///
/// Every call performs exactly `q_bits` steps of one multiplication and one
/// squaring regardless of `k`; the step count is returned for tests.
fn ladder(c: &ModConstants, base: &BigUint, k: &BigUint) -> (BigUint, u64) {
    let mut r0 = BigUint::one();
    let mut r1 = base.clone();
    let mut steps = 0;
    for i in (0..c.q_bits).rev() {
        let bit = k.bit(i);
        if bit {
            std::mem::swap(&mut r0, &mut r1);
        }
        r1 = (&r0 * &r1) % &c.p;
        r0 = (&r0 * &r0) % &c.p;
        if bit {
            std::mem::swap(&mut r0, &mut r1);
        }
        steps += 1;
    }
    (r0, steps)
}

/// Counter-mode SHA-256 expansion to `|p| + 16` bytes, reduced mod `p` and
/// squared into the quadratic-residue (order-`q`) subgroup.
fn hash_to_subgroup(c: &ModConstants, seed: &[u8]) -> BigUint {
    let wide = c.element_len + 16;
    for attempt in 0u32.. {
        let mut bytes = Vec::with_capacity(wide + 32);
        let mut block = 0u32;
        while bytes.len() < wide {
            let digest = Sha256::new()
                .chain_update(b"biozero/hash-to-group/v1")
                .chain_update(attempt.to_be_bytes())
                .chain_update(block.to_be_bytes())
                .chain_update(seed)
                .finalize();
            bytes.extend_from_slice(&digest);
            block += 1;
        }
        let x = BigUint::from_bytes_be(&bytes[..wide]) % &c.p;
        let y = (&x * &x) % &c.p;
        if y > BigUint::one() {
            return y;
        }
    }
    unreachable!("hash-to-group exhausted attempts")
}

impl<P: ModParams> ModGroup<P> {
    /// Exponentiation that also reports the number of ladder steps taken.
    pub fn exp_with_steps(base: &ModElement<P>, k: &ModScalar<P>) -> (ModElement<P>, u64) {
        let (v, steps) = ladder(P::constants(), &base.value, &k.value);
        (ModElement::wrap(v), steps)
    }

    pub fn scalar(value: u64) -> ModScalar<P> {
        ModScalar::reduce(value.into())
    }

    pub fn element(value: u64) -> Option<ModElement<P>> {
        ModElement::new(value.into())
    }
}

impl<P: ModParams> PrimeGroup for ModGroup<P> {
    type Scalar = ModScalar<P>;
    type Element = ModElement<P>;

    const PROFILE: Profile = P::PROFILE;

    fn params() -> GroupParams {
        let c = P::constants();
        GroupParams {
            profile: P::PROFILE,
            modulus: c.p.clone(),
            order: c.q.clone(),
            g: Self::element_bytes(&Self::generator()),
            h: Self::element_bytes(&Self::blinding_generator()),
            element_len: c.element_len,
            scalar_len: c.scalar_len,
        }
    }

    fn generator() -> Self::Element {
        ModElement::wrap(P::constants().g.clone())
    }

    fn blinding_generator() -> Self::Element {
        ModElement::wrap(P::constants().h.clone())
    }

    fn identity() -> Self::Element {
        ModElement::wrap(BigUint::one())
    }

    fn mul(a: &Self::Element, b: &Self::Element) -> Self::Element {
        ModElement::wrap((&a.value * &b.value) % &P::constants().p)
    }

    fn inv(a: &Self::Element) -> Self::Element {
        // a^(q-1) = a^-1 inside the order-q subgroup.
        let c = P::constants();
        let e = ModScalar::reduce(&c.q - 1u32);
        Self::exp(a, &e)
    }

    fn exp(base: &Self::Element, k: &Self::Scalar) -> Self::Element {
        Self::exp_with_steps(base, k).0
    }

    fn hash_to_group(seed: &[u8]) -> Self::Element {
        ModElement::wrap(hash_to_subgroup(P::constants(), seed))
    }

    fn element_len() -> usize {
        P::constants().element_len
    }

    fn scalar_len() -> usize {
        P::constants().scalar_len
    }

    fn encode_element(e: &Self::Element, out: &mut Vec<u8>) {
        to_fixed_be(&e.value, Self::element_len(), out);
    }

    fn decode_element(bytes: &[u8]) -> Option<Self::Element> {
        if bytes.len() != Self::element_len() {
            return None;
        }
        ModElement::new(BigUint::from_bytes_be(bytes))
    }

    fn encode_scalar(s: &Self::Scalar, out: &mut Vec<u8>) {
        to_fixed_be(&s.value, Self::scalar_len(), out);
    }

    fn decode_scalar(bytes: &[u8]) -> Option<Self::Scalar> {
        if bytes.len() != Self::scalar_len() {
            return None;
        }
        let v = BigUint::from_bytes_be(bytes);
        (v < P::constants().q).then(|| ModScalar::reduce(v))
    }

    fn scalar_from_u64(v: u64) -> Self::Scalar {
        ModScalar::reduce(v.into())
    }

    fn scalar_from_be_bytes_mod_order(bytes: &[u8]) -> Self::Scalar {
        ModScalar::reduce(BigUint::from_bytes_be(bytes))
    }

    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(rng: &mut R) -> Self::Scalar {
        let c = P::constants();
        let mut buf = vec![0u8; c.scalar_len];
        let excess = (c.scalar_len as u64 * 8 - c.q_bits) as u32;
        let mask = 0xffu8 >> excess;
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= mask;
            let v = BigUint::from_bytes_be(&buf);
            if v < c.q {
                return ModScalar::reduce(v);
            }
        }
    }

    fn invert_scalar(s: &Self::Scalar) -> Option<Self::Scalar> {
        if s.value.is_zero() {
            return None;
        }
        let q = &P::constants().q;
        Some(ModScalar::reduce(s.value.modpow(&(q - 2u32), q)))
    }

    fn order() -> BigUint {
        P::constants().q.clone()
    }
}
