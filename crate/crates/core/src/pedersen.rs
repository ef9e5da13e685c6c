//! Pedersen commitments `c = base^f · h^r` and their homomorphic operations.

use rand_core::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::PrimeGroup;

/// The pair of bases a commitment was formed over. The second base is always
/// the blinding generator `h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasePair<G: PrimeGroup> {
    /// `(g, h)`
    Standard,
    /// `(c, h)` for some element `c`, as used by the product proofs.
    Custom(G::Element),
}

/// Secret opening of a commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Opening<G: PrimeGroup> {
    pub message: G::Scalar,
    pub blinding: G::Scalar,
}

impl<G: PrimeGroup> Opening<G> {
    pub fn new(message: G::Scalar, blinding: G::Scalar) -> Self {
        Opening { message, blinding }
    }

    /// Opening of `message` under a fresh uniformly random blinding.
    pub fn random<R: RngCore + CryptoRng + ?Sized>(message: G::Scalar, rng: &mut R) -> Self {
        Opening::new(message, G::random_scalar(rng))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment<G: PrimeGroup> {
    element: G::Element,
    base: BasePair<G>,
}

/// Commitments to the entries of a feature vector, index-aligned.
pub type CommitmentVector<G> = Vec<Commitment<G>>;

impl<G: PrimeGroup> Commitment<G> {
    /// Wraps an element as a standard-base commitment.
    pub fn from_element(element: G::Element) -> Self {
        Commitment { element, base: BasePair::Standard }
    }

    pub fn element(&self) -> &G::Element {
        &self.element
    }

    pub fn base(&self) -> &BasePair<G> {
        &self.base
    }

    pub fn into_element(self) -> G::Element {
        self.element
    }
}

/// `g^f · h^r`.
pub fn commit<G: PrimeGroup>(opening: &Opening<G>) -> Commitment<G> {
    Commitment::from_element(G::commit_gh(&opening.message, &opening.blinding))
}

/// `base^f · h^r`.
pub fn commit_with_base<G: PrimeGroup>(base: &G::Element, opening: &Opening<G>) -> Commitment<G> {
    Commitment {
        element: G::exp2(base, &opening.message, &G::blinding_generator(), &opening.blinding),
        base: BasePair::Custom(base.clone()),
    }
}

fn same_base<G: PrimeGroup>(a: &Commitment<G>, b: &Commitment<G>) -> Result<()> {
    if a.base != b.base {
        return Err(Error::BaseMismatch);
    }
    Ok(())
}

/// Commitment to `f_a + f_b` under blinding `r_a + r_b`.
pub fn add<G: PrimeGroup>(a: &Commitment<G>, b: &Commitment<G>) -> Result<Commitment<G>> {
    same_base(a, b)?;
    Ok(Commitment { element: G::mul(&a.element, &b.element), base: a.base.clone() })
}

/// Commitment to `f_a - f_b` under blinding `r_a - r_b`.
pub fn sub<G: PrimeGroup>(a: &Commitment<G>, b: &Commitment<G>) -> Result<Commitment<G>> {
    same_base(a, b)?;
    Ok(Commitment { element: G::mul(&a.element, &G::inv(&b.element)), base: a.base.clone() })
}

/// Commitment to `k·f` under blinding `k·r`.
pub fn scale<G: PrimeGroup>(a: &Commitment<G>, k: &G::Scalar) -> Commitment<G> {
    Commitment { element: G::exp(&a.element, k), base: a.base.clone() }
}

/// True iff `opening` recomputes `c` over `c`'s own base pair.
pub fn verify_opening<G: PrimeGroup>(c: &Commitment<G>, opening: &Opening<G>) -> bool {
    let recomputed = match &c.base {
        BasePair::Standard => commit(opening),
        BasePair::Custom(base) => commit_with_base(base, opening),
    };
    recomputed.element == c.element
}
