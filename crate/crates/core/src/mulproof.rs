//! Product-consistency proofs over Pedersen commitments.
//!
//! The single-element protocol shows that `c01` commits to the product of
//! the values inside `c0` and `c1`:
//!
//! ```text
//! prover:   α = g^b1 h^b2,  β = g^b3 h^b4,  γ = c0^b3 h^b5
//! verifier: e
//! prover:   z1 = b1 + e·f0        z2 = b2 + e·r0
//!           z3 = b3 + e·f1        z4 = b4 + e·r1
//!           z5 = b5 + e·(r01 − r0·f1)
//! check:    g^z1 h^z2 = α·c0^e,  g^z3 h^z4 = β·c1^e,  c0^z3 h^z5 = γ·c01^e
//! ```
//!
//! The authentication variant runs three such relations per feature index
//! (`f0·f0`, `f1·f1`, `f0·f1`), sharing the opening-knowledge responses, and
//! checks five equation families per index.

use std::fmt;
use std::str::FromStr;

use rand_core::{CryptoRng, RngCore};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::group::PrimeGroup;
use crate::meter::OpMeter;
use crate::pedersen::{commit, Commitment, Opening};
use crate::transcript::{Challenge, Transcript};

/// Openings of `c0`, `c1` and the blinding of the product commitment `c01`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductWitness<G: PrimeGroup> {
    pub left: Opening<G>,
    pub right: Opening<G>,
    pub product_blinding: G::Scalar,
}

/// The three public commitments a product proof speaks about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductStatement<G: PrimeGroup> {
    pub left: Commitment<G>,
    pub right: Commitment<G>,
    pub product: Commitment<G>,
}

impl<G: PrimeGroup> ProductWitness<G> {
    pub fn statement(&self) -> ProductStatement<G> {
        let product = Opening::new(
            self.left.message.clone() * self.right.message.clone(),
            self.product_blinding.clone(),
        );
        ProductStatement { left: commit(&self.left), right: commit(&self.right), product: commit(&product) }
    }
}

/// First prover message `(α, β, γ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCommitments<G: PrimeGroup> {
    pub alpha: G::Element,
    pub beta: G::Element,
    pub gamma: G::Element,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductProof<G: PrimeGroup> {
    pub commitments: ProductCommitments<G>,
    /// `z1 … z5`
    pub responses: [G::Scalar; 5],
}

/// Prover state between the first message and the challenge.
pub struct ProductProver<G: PrimeGroup> {
    witness: ProductWitness<G>,
    nonces: [G::Scalar; 5],
    first: ProductCommitments<G>,
}

impl<G: PrimeGroup> ProductProver<G> {
    pub fn commit<R: RngCore + CryptoRng + ?Sized>(witness: ProductWitness<G>, rng: &mut R) -> Self {
        let nonces = std::array::from_fn(|_| G::random_scalar(rng));
        Self::with_nonces(witness, nonces)
    }

    /// Uses caller-chosen `b1 … b5`. Only sound if they are uniformly random
    /// and never reused.
    pub fn with_nonces(witness: ProductWitness<G>, nonces: [G::Scalar; 5]) -> Self {
        let [b1, b2, b3, b4, b5] = &nonces;
        let c0 = commit(&witness.left).into_element();
        let first = ProductCommitments {
            alpha: G::commit_gh(b1, b2),
            beta: G::commit_gh(b3, b4),
            gamma: G::exp2(&c0, b3, &G::blinding_generator(), b5),
        };
        ProductProver { witness, nonces, first }
    }

    pub fn first_message(&self) -> &ProductCommitments<G> {
        &self.first
    }

    pub fn respond(&self, e: &Challenge<G>) -> ProductProof<G> {
        let e = e.scalar().clone();
        let w = &self.witness;
        let [b1, b2, b3, b4, b5] = self.nonces.clone();
        let (f0, r0) = (w.left.message.clone(), w.left.blinding.clone());
        let (f1, r1) = (w.right.message.clone(), w.right.blinding.clone());
        let cross = w.product_blinding.clone() - r0.clone() * f1.clone();
        ProductProof {
            commitments: self.first.clone(),
            responses: [
                b1 + e.clone() * f0,
                b2 + e.clone() * r0,
                b3 + e.clone() * f1,
                b4 + e.clone() * r1,
                b5 + e * cross,
            ],
        }
    }
}

/// Interactive proof with an externally supplied challenge.
pub fn prove_product<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    witness: &ProductWitness<G>,
    e: &Challenge<G>,
    rng: &mut R,
) -> ProductProof<G> {
    ProductProver::commit(witness.clone(), rng).respond(e)
}

pub fn verify_product<G: PrimeGroup>(
    statement: &ProductStatement<G>,
    e: &Challenge<G>,
    proof: &ProductProof<G>,
) -> bool {
    let e = e.scalar();
    let h = G::blinding_generator();
    let [z1, z2, z3, z4, z5] = &proof.responses;
    let c0 = statement.left.element();
    let c1 = statement.right.element();
    let c01 = statement.product.element();
    let pc = &proof.commitments;
    G::commit_gh(z1, z2) == G::mul(&pc.alpha, &G::exp(c0, e))
        && G::commit_gh(z3, z4) == G::mul(&pc.beta, &G::exp(c1, e))
        && G::exp2(c0, z3, &h, z5) == G::mul(&pc.gamma, &G::exp(c01, e))
}

/// Nonce layout of the batched authentication proof.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RelationMode {
    /// Fresh `b1 … b7` per index; `α1`, `α2` are per-index vectors and the
    /// challenge additionally binds the first prover message.
    #[default]
    Repaired,
    /// One set of `b1 … b7` shared across indices and a challenge over the
    /// commitment vectors only. Kept for comparison; it leaks feature
    /// differences and its challenge does not bind `α`, `β`.
    PaperFaithful,
}

impl RelationMode {
    pub fn tag(self) -> u8 {
        match self {
            RelationMode::Repaired => 0x01,
            RelationMode::PaperFaithful => 0x02,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0x01 => Some(RelationMode::Repaired),
            0x02 => Some(RelationMode::PaperFaithful),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationMode::Repaired => "repaired",
            RelationMode::PaperFaithful => "paper-faithful",
        }
    }

    /// Number of `α1` / `α2` entries for a vector of length `n`.
    pub fn alpha_len(self, n: usize) -> usize {
        match self {
            RelationMode::Repaired => n,
            RelationMode::PaperFaithful => 1,
        }
    }
}

impl fmt::Display for RelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "repaired" => Ok(RelationMode::Repaired),
            "paper-faithful" => Ok(RelationMode::PaperFaithful),
            other => Err(Error::Parse { line: 0, msg: format!("unknown mode {other:?}") }),
        }
    }
}

/// Secret side of the batched relations; all vectors have length `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationWitness<G: PrimeGroup> {
    pub f0: Vec<G::Scalar>,
    pub r0: Vec<G::Scalar>,
    pub f1: Vec<G::Scalar>,
    pub r1: Vec<G::Scalar>,
    pub r00: Vec<G::Scalar>,
    pub r11: Vec<G::Scalar>,
    pub r01: Vec<G::Scalar>,
}

impl<G: PrimeGroup> RelationWitness<G> {
    /// Common length of all seven vectors.
    pub fn len(&self) -> Result<usize> {
        let n = self.f0.len();
        for v in [&self.r0, &self.f1, &self.r1, &self.r00, &self.r11, &self.r01] {
            if v.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: v.len() });
            }
        }
        if n == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(n)
    }
}

/// First prover message of the batched proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCommitments<G: PrimeGroup> {
    pub alpha1: Vec<G::Element>,
    pub alpha2: Vec<G::Element>,
    pub beta1: Vec<G::Element>,
    pub beta2: Vec<G::Element>,
    pub beta3: Vec<G::Element>,
}

impl<G: PrimeGroup> RelationCommitments<G> {
    fn arrays(&self) -> [&Vec<G::Element>; 5] {
        [&self.alpha1, &self.alpha2, &self.beta1, &self.beta2, &self.beta3]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthRelationProof<G: PrimeGroup> {
    pub mode: RelationMode,
    pub commitments: RelationCommitments<G>,
    /// `z1 … z7`, each of length `N`.
    pub responses: [Vec<G::Scalar>; 7],
}

impl<G: PrimeGroup> AuthRelationProof<G> {
    pub fn len(&self) -> usize {
        self.responses[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mode tag, then count-prefixed `α1, α2, β1, β2, β3, z1 … z7`.
    pub fn write(&self, w: &mut Writer) {
        w.u8(self.mode.tag());
        for arr in self.commitments.arrays() {
            w.elements::<G>(arr.iter());
        }
        for z in &self.responses {
            w.scalars::<G>(z);
        }
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self> {
        let tag = r.u8()?;
        let mode = RelationMode::from_tag(tag)
            .ok_or_else(|| Error::Decode(format!("unknown relation mode {tag}")))?;
        let commitments = RelationCommitments {
            alpha1: r.elements::<G>()?,
            alpha2: r.elements::<G>()?,
            beta1: r.elements::<G>()?,
            beta2: r.elements::<G>()?,
            beta3: r.elements::<G>()?,
        };
        let mut responses: [Vec<G::Scalar>; 7] = Default::default();
        for z in responses.iter_mut() {
            *z = r.scalars::<G>()?;
        }
        Ok(AuthRelationProof { mode, commitments, responses })
    }
}

/// The challenge the relation responses are computed against.
///
/// `base` is the authentication transcript. In repaired mode the first
/// prover message is appended before hashing.
pub fn relation_challenge<G: PrimeGroup>(
    base: &Transcript,
    mode: RelationMode,
    first: &RelationCommitments<G>,
) -> Challenge<G> {
    match mode {
        RelationMode::PaperFaithful => base.challenge(),
        RelationMode::Repaired => {
            let mut t = base.clone();
            for arr in first.arrays() {
                t.append_elements::<G>(arr.iter());
            }
            t.challenge()
        }
    }
}

/// Prover state of the batched relations between first message and challenge.
pub struct RelationProver<'w, G: PrimeGroup> {
    mode: RelationMode,
    witness: &'w RelationWitness<G>,
    /// `b1 … b7`, each of length `N` (repaired) or 1 (paper-faithful).
    nonces: [Vec<G::Scalar>; 7],
    first: RelationCommitments<G>,
}

impl<'w, G: PrimeGroup> RelationProver<'w, G> {
    /// `c0`, `c1` are the public commitments to `f0`, `f1`; they serve as
    /// bases for the `β` factors.
    pub fn commit<R: RngCore + CryptoRng + ?Sized>(
        mode: RelationMode,
        witness: &'w RelationWitness<G>,
        c0: &[Commitment<G>],
        c1: &[Commitment<G>],
        rng: &mut R,
    ) -> Result<Self> {
        let n = witness.len()?;
        let k = mode.alpha_len(n);
        let nonces = std::array::from_fn(|_| (0..k).map(|_| G::random_scalar(rng)).collect());
        Self::with_nonces(mode, witness, c0, c1, nonces)
    }

    pub fn with_nonces(
        mode: RelationMode,
        witness: &'w RelationWitness<G>,
        c0: &[Commitment<G>],
        c1: &[Commitment<G>],
        nonces: [Vec<G::Scalar>; 7],
    ) -> Result<Self> {
        let n = witness.len()?;
        let k = mode.alpha_len(n);
        for v in [c0.len(), c1.len()] {
            if v != n {
                return Err(Error::LengthMismatch { expected: n, actual: v });
            }
        }
        for b in &nonces {
            if b.len() != k {
                return Err(Error::LengthMismatch { expected: k, actual: b.len() });
            }
        }
        let h = G::blinding_generator();
        let [b1, b2, b3, b4, b5, b6, b7] = &nonces;
        let at = |v: &'_ Vec<G::Scalar>, i: usize| v[i.min(k - 1)].clone();
        let mut first = RelationCommitments {
            alpha1: Vec::with_capacity(k),
            alpha2: Vec::with_capacity(k),
            beta1: Vec::with_capacity(n),
            beta2: Vec::with_capacity(n),
            beta3: Vec::with_capacity(n),
        };
        for j in 0..k {
            first.alpha1.push(G::commit_gh(&b1[j], &b2[j]));
            first.alpha2.push(G::commit_gh(&b3[j], &b4[j]));
        }
        for i in 0..n {
            let (c0i, c1i) = (c0[i].element(), c1[i].element());
            first.beta1.push(G::exp2(c0i, &at(b1, i), &h, &at(b5, i)));
            first.beta2.push(G::exp2(c1i, &at(b3, i), &h, &at(b6, i)));
            first.beta3.push(G::exp2(c0i, &at(b3, i), &h, &at(b7, i)));
        }
        Ok(RelationProver { mode, witness, nonces, first })
    }

    pub fn first_message(&self) -> &RelationCommitments<G> {
        &self.first
    }

    #[doc(hidden)]
    pub fn nonces(&self) -> &[Vec<G::Scalar>; 7] {
        &self.nonces
    }

    pub fn respond(&self, e: &Challenge<G>) -> AuthRelationProof<G> {
        let w = self.witness;
        let n = w.f0.len();
        let k = self.nonces[0].len();
        let e = e.scalar();
        let mut responses: [Vec<G::Scalar>; 7] = std::array::from_fn(|_| Vec::with_capacity(n));
        for i in 0..n {
            let b = |j: usize| self.nonces[j][i.min(k - 1)].clone();
            let (f0, r0) = (w.f0[i].clone(), w.r0[i].clone());
            let (f1, r1) = (w.f1[i].clone(), w.r1[i].clone());
            let aux5 = w.r00[i].clone() - r0.clone() * f0.clone();
            let aux6 = w.r11[i].clone() - r1.clone() * f1.clone();
            let aux7 = w.r01[i].clone() - r0.clone() * f1.clone();
            let z = [
                b(0) + e.clone() * f0,
                b(1) + e.clone() * r0,
                b(2) + e.clone() * f1,
                b(3) + e.clone() * r1,
                b(4) + e.clone() * aux5,
                b(5) + e.clone() * aux6,
                b(6) + e.clone() * aux7,
            ];
            for (out, zj) in responses.iter_mut().zip(z) {
                out.push(zj);
            }
        }
        AuthRelationProof { mode: self.mode, commitments: self.first.clone(), responses }
    }
}

/// Batched proof against a challenge fixed before the first message.
pub fn prove_auth_relations<G: PrimeGroup, R: RngCore + CryptoRng + ?Sized>(
    mode: RelationMode,
    witness: &RelationWitness<G>,
    c0: &[Commitment<G>],
    c1: &[Commitment<G>],
    e: &Challenge<G>,
    rng: &mut R,
) -> Result<AuthRelationProof<G>> {
    Ok(RelationProver::commit(mode, witness, c0, c1, rng)?.respond(e))
}

/// One of the five per-index verification equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// (i) `g^z1 h^z2 = α1·c0^e`
    RegisteredOpening,
    /// (ii) `c0^z1 h^z5 = β1·c00^e`
    RegisteredSquare,
    /// (iii) `g^z3 h^z4 = α2·c1^e`
    ProbeOpening,
    /// (iv) `c1^z3 h^z6 = β2·c11^e`
    ProbeSquare,
    /// (v) `c0^z3 h^z7 = β3·c01^e`
    CrossProduct,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::RegisteredOpening,
        Family::RegisteredSquare,
        Family::ProbeOpening,
        Family::ProbeSquare,
        Family::CrossProduct,
    ];

    pub fn numeral(self) -> &'static str {
        match self {
            Family::RegisteredOpening => "i",
            Family::RegisteredSquare => "ii",
            Family::ProbeOpening => "iii",
            Family::ProbeSquare => "iv",
            Family::CrossProduct => "v",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Family::RegisteredOpening => "registered-opening",
            Family::RegisteredSquare => "registered-square",
            Family::ProbeOpening => "probe-opening",
            Family::ProbeSquare => "probe-square",
            Family::CrossProduct => "cross-product",
        };
        write!(f, "({}) {name}", self.numeral())
    }
}

/// Why a batched relation proof was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelationFailure {
    /// Vector lengths disagree with each other or with the mode.
    Shape(String),
    /// First failing equation in index-major, family-minor order.
    Equation { family: Family, index: usize },
}

impl fmt::Display for RelationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationFailure::Shape(msg) => write!(f, "malformed relation proof: {msg}"),
            RelationFailure::Equation { family, index } => {
                write!(f, "equation family {family} failed at index {index}")
            }
        }
    }
}

/// Public inputs of the batched relations.
#[derive(Clone, Copy, Debug)]
pub struct RelationStatement<'a, G: PrimeGroup> {
    pub c0: &'a [Commitment<G>],
    pub c1: &'a [Commitment<G>],
    pub c00: &'a [Commitment<G>],
    pub c11: &'a [Commitment<G>],
    pub c01: &'a [Commitment<G>],
}

fn check_shape<G: PrimeGroup>(
    s: &RelationStatement<'_, G>,
    proof: &AuthRelationProof<G>,
) -> std::result::Result<usize, RelationFailure> {
    let n = s.c0.len();
    if n == 0 {
        return Err(RelationFailure::Shape("empty commitment vectors".into()));
    }
    let k = proof.mode.alpha_len(n);
    let pc = &proof.commitments;
    let expected = [
        ("c1", s.c1.len(), n),
        ("c00", s.c00.len(), n),
        ("c11", s.c11.len(), n),
        ("c01", s.c01.len(), n),
        ("alpha1", pc.alpha1.len(), k),
        ("alpha2", pc.alpha2.len(), k),
        ("beta1", pc.beta1.len(), n),
        ("beta2", pc.beta2.len(), n),
        ("beta3", pc.beta3.len(), n),
    ];
    for (name, got, want) in expected {
        if got != want {
            return Err(RelationFailure::Shape(format!("{name} has length {got}, expected {want}")));
        }
    }
    for (j, z) in proof.responses.iter().enumerate() {
        if z.len() != n {
            return Err(RelationFailure::Shape(format!("z{} has length {}, expected {n}", j + 1, z.len())));
        }
    }
    Ok(n)
}

/// `lhs == factor · c^e`
fn holds<G: PrimeGroup>(
    meter: &mut OpMeter,
    lhs: G::Element,
    factor: &G::Element,
    c: &G::Element,
    e: &G::Scalar,
) -> bool {
    let ce = meter.exp::<G>(c, e);
    lhs == meter.mul::<G>(factor, &ce)
}

/// Checks all `5N` equations, stopping at the first failure.
pub fn verify_auth_relations<G: PrimeGroup>(
    statement: &RelationStatement<'_, G>,
    e: &Challenge<G>,
    proof: &AuthRelationProof<G>,
    meter: &mut OpMeter,
) -> std::result::Result<(), RelationFailure> {
    let n = check_shape(statement, proof)?;
    let k = proof.mode.alpha_len(n);
    let e = e.scalar();
    let h = G::blinding_generator();
    let pc = &proof.commitments;
    let [z1, z2, z3, z4, z5, z6, z7] = &proof.responses;
    for i in 0..n {
        let c0 = statement.c0[i].element();
        let c1 = statement.c1[i].element();
        let a = i.min(k - 1);
        let fail = |family| RelationFailure::Equation { family, index: i };
        let lhs = meter.commit_gh::<G>(&z1[i], &z2[i]);
        if !holds::<G>(meter, lhs, &pc.alpha1[a], c0, e) {
            return Err(fail(Family::RegisteredOpening));
        }
        let lhs = meter.exp2::<G>(c0, &z1[i], &h, &z5[i]);
        if !holds::<G>(meter, lhs, &pc.beta1[i], statement.c00[i].element(), e) {
            return Err(fail(Family::RegisteredSquare));
        }
        let lhs = meter.commit_gh::<G>(&z3[i], &z4[i]);
        if !holds::<G>(meter, lhs, &pc.alpha2[a], c1, e) {
            return Err(fail(Family::ProbeOpening));
        }
        let lhs = meter.exp2::<G>(c1, &z3[i], &h, &z6[i]);
        if !holds::<G>(meter, lhs, &pc.beta2[i], statement.c11[i].element(), e) {
            return Err(fail(Family::ProbeSquare));
        }
        let lhs = meter.exp2::<G>(c0, &z3[i], &h, &z7[i]);
        if !holds::<G>(meter, lhs, &pc.beta3[i], statement.c01[i].element(), e) {
            return Err(fail(Family::CrossProduct));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Ristretto255, ToyGroup};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type T = ToyGroup;
    type R = Ristretto255;

    fn toy_witness(f0: u64, r0: u64, f1: u64, r1: u64, r01: u64) -> ProductWitness<T> {
        ProductWitness {
            left: Opening::new(T::scalar(f0), T::scalar(r0)),
            right: Opening::new(T::scalar(f1), T::scalar(r1)),
            product_blinding: T::scalar(r01),
        }
    }

    fn e_toy(v: u64) -> Challenge<T> {
        Challenge::from_scalar(T::scalar(v))
    }

    fn value(e: &<T as PrimeGroup>::Element) -> u64 {
        e.value().try_into().unwrap()
    }

    fn svalue(s: &<T as PrimeGroup>::Scalar) -> u64 {
        s.value().try_into().unwrap()
    }

    /// g^a h^b mod 23 and c^a h^b mod 23 by repeated multiplication.
    fn pow23(base: u64, k: u64) -> u64 {
        (0..k % 11).fold(1, |acc, _| acc * base % 23)
    }

    #[test]
    fn toy_golden_product_transcript() {
        // witness f0=3 r0=5 f1=4 r1=7 r01=2, nonces b=(1,2,3,4,5), e=6
        let w = toy_witness(3, 5, 4, 7, 2);
        let nonces = [1, 2, 3, 4, 5].map(T::scalar);
        let proof = ProductProver::with_nonces(w.clone(), nonces).respond(&e_toy(6));

        // independent integer oracle
        let c0 = pow23(2, 3) * pow23(3, 5) % 23;
        assert_eq!(c0, 12);
        let alpha = pow23(2, 1) * pow23(3, 2) % 23;
        let beta = pow23(2, 3) * pow23(3, 4) % 23;
        let gamma = pow23(c0, 3) * pow23(3, 5) % 23;
        let z = [
            (1 + 6 * 3) % 11,
            (2 + 6 * 5) % 11,
            (3 + 6 * 4) % 11,
            (4 + 6 * 7) % 11,
            (5 + 6 * ((2 + 11 * 11 - 5 * 4) % 11)) % 11,
        ];

        // pinned values
        assert_eq!((alpha, beta, gamma), (18, 4, 16));
        assert_eq!(z, [8, 10, 5, 2, 7]);

        let pc = &proof.commitments;
        assert_eq!((value(&pc.alpha), value(&pc.beta), value(&pc.gamma)), (alpha, beta, gamma));
        assert_eq!(proof.responses.clone().map(|s| svalue(&s)), z);
        assert!(verify_product(&w.statement(), &e_toy(6), &proof));
    }

    #[test]
    fn product_completeness_random_toy() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            let w = ProductWitness::<T> {
                left: Opening::random(T::random_scalar(&mut rng), &mut rng),
                right: Opening::random(T::random_scalar(&mut rng), &mut rng),
                product_blinding: T::random_scalar(&mut rng),
            };
            let e = Challenge::from_scalar(T::random_scalar(&mut rng));
            let proof = prove_product(&w, &e, &mut rng);
            assert!(verify_product(&w.statement(), &e, &proof));
        }
    }

    fn random_product_witness(rng: &mut ChaCha20Rng) -> ProductWitness<R> {
        ProductWitness {
            left: Opening::random(R::random_scalar(rng), rng),
            right: Opening::random(R::random_scalar(rng), rng),
            product_blinding: R::random_scalar(rng),
        }
    }

    #[test]
    fn fresh_nonces_give_distinct_valid_proofs() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let w = random_product_witness(&mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let p1 = prove_product(&w, &e, &mut rng);
        let p2 = prove_product(&w, &e, &mut rng);
        assert_ne!(p1, p2);
        assert!(verify_product(&w.statement(), &e, &p1));
        assert!(verify_product(&w.statement(), &e, &p2));
    }

    #[test]
    fn product_soundness_probes() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let w = random_product_witness(&mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let proof = prove_product(&w, &e, &mut rng);
        let st = w.statement();

        let mut bumped = proof.clone();
        bumped.responses[4] += R::scalar_one();
        assert!(!verify_product(&st, &e, &bumped));

        let mut wrong = st.clone();
        wrong.product =
            commit(&Opening::new(w.left.message * w.right.message + R::scalar_one(), w.product_blinding));
        assert!(!verify_product(&wrong, &e, &proof));

        let other_e = Challenge::from_scalar(*e.scalar() + R::scalar_one());
        assert!(!verify_product(&st, &other_e, &proof));
    }

    /// Recovers (f0, r0, f1, r1, r01) from two transcripts sharing a first
    /// message.
    fn extract_product(p: &ProductProof<T>, e: u64, q: &ProductProof<T>, e2: u64) -> ProductWitness<T> {
        assert_eq!(p.commitments, q.commitments);
        let inv = T::invert_scalar(&(T::scalar(e) - T::scalar(e2))).unwrap();
        let d = |j: usize| (p.responses[j].clone() - q.responses[j].clone()) * inv.clone();
        let (f0, r0, f1, r1) = (d(0), d(1), d(2), d(3));
        let r01 = d(4) + r0.clone() * f1.clone();
        ProductWitness { left: Opening::new(f0, r0), right: Opening::new(f1, r1), product_blinding: r01 }
    }

    #[test]
    fn product_special_soundness_extractor() {
        let mut rng = ChaCha20Rng::seed_from_u64(14);
        for _ in 0..100 {
            let w = ProductWitness::<T> {
                left: Opening::random(T::random_scalar(&mut rng), &mut rng),
                right: Opening::random(T::random_scalar(&mut rng), &mut rng),
                product_blinding: T::random_scalar(&mut rng),
            };
            let prover = ProductProver::commit(w.clone(), &mut rng);
            let e1 = svalue(&T::random_scalar(&mut rng));
            let e2 = (e1 + 1 + svalue(&T::random_scalar(&mut rng)) % 10) % 11;
            let p1 = prover.respond(&e_toy(e1));
            let p2 = prover.respond(&e_toy(e2));
            assert!(verify_product(&w.statement(), &e_toy(e1), &p1));
            assert!(verify_product(&w.statement(), &e_toy(e2), &p2));
            assert_eq!(extract_product(&p1, e1, &p2, e2), w);
        }
    }

    fn relation_fixture<G: PrimeGroup>(
        f0: &[u64],
        f1: &[u64],
        rng: &mut ChaCha20Rng,
    ) -> (RelationWitness<G>, [Vec<Commitment<G>>; 5]) {
        let s = |v: &[u64]| v.iter().map(|&x| G::scalar_from_u64(x)).collect::<Vec<_>>();
        let rand = |rng: &mut ChaCha20Rng| (0..f0.len()).map(|_| G::random_scalar(rng)).collect();
        let w = RelationWitness::<G> {
            f0: s(f0),
            r0: rand(rng),
            f1: s(f1),
            r1: rand(rng),
            r00: rand(rng),
            r11: rand(rng),
            r01: rand(rng),
        };
        let commits = |m: &dyn Fn(usize) -> G::Scalar, r: &Vec<G::Scalar>| {
            (0..f0.len()).map(|i| commit(&Opening::new(m(i), r[i].clone()))).collect::<Vec<_>>()
        };
        let c = [
            commits(&|i| w.f0[i].clone(), &w.r0),
            commits(&|i| w.f1[i].clone(), &w.r1),
            commits(&|i| w.f0[i].clone() * w.f0[i].clone(), &w.r00),
            commits(&|i| w.f1[i].clone() * w.f1[i].clone(), &w.r11),
            commits(&|i| w.f0[i].clone() * w.f1[i].clone(), &w.r01),
        ];
        (w, c)
    }

    fn statement<G: PrimeGroup>(c: &[Vec<Commitment<G>>; 5]) -> RelationStatement<'_, G> {
        RelationStatement { c0: &c[0], c1: &c[1], c00: &c[2], c11: &c[3], c01: &c[4] }
    }

    fn verify<G: PrimeGroup>(
        c: &[Vec<Commitment<G>>; 5],
        e: &Challenge<G>,
        p: &AuthRelationProof<G>,
    ) -> std::result::Result<(), RelationFailure> {
        verify_auth_relations(&statement(c), e, p, &mut OpMeter::new())
    }

    #[test]
    fn relations_complete_in_both_modes() {
        let mut rng = ChaCha20Rng::seed_from_u64(20);
        for mode in [RelationMode::Repaired, RelationMode::PaperFaithful] {
            let (w, c) = relation_fixture::<T>(&[1, 2, 3, 4], &[2, 2, 5, 0], &mut rng);
            let e = Challenge::from_scalar(T::random_scalar(&mut rng));
            let p = prove_auth_relations(mode, &w, &c[0], &c[1], &e, &mut rng).unwrap();
            assert_eq!(p.commitments.alpha1.len(), mode.alpha_len(4));
            assert_eq!(verify(&c, &e, &p), Ok(()));
        }
    }

    #[test]
    fn responses_follow_the_definition_per_index() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let (w, c) = relation_fixture::<R>(&[10, 20, 30], &[11, 19, 33], &mut rng);
        let nonces: [Vec<_>; 7] =
            std::array::from_fn(|_| (0..3).map(|_| R::random_scalar(&mut rng)).collect());
        let prover =
            RelationProver::with_nonces(RelationMode::Repaired, &w, &c[0], &c[1], nonces.clone()).unwrap();
        let e = R::random_scalar(&mut rng);
        let p = prover.respond(&Challenge::from_scalar(e));
        for i in 0..3 {
            assert_eq!(p.responses[0][i], nonces[0][i] + e * w.f0[i]);
            assert_eq!(p.responses[3][i], nonces[3][i] + e * w.r1[i]);
            assert_eq!(p.responses[6][i], nonces[6][i] + e * (w.r01[i] - w.r0[i] * w.f1[i]));
        }
    }

    #[test]
    fn shared_nonces_leak_feature_differences_and_fresh_ones_do_not() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let (w, c) = relation_fixture::<R>(&[10, 200, 37, 90], &[12, 190, 40, 91], &mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let leaks = |p: &AuthRelationProof<R>| {
            (1..4).all(|j| p.responses[0][j] - p.responses[0][0] == *e.scalar() * (w.f0[j] - w.f0[0]))
        };
        let paper =
            prove_auth_relations(RelationMode::PaperFaithful, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        assert!(leaks(&paper));
        let repaired = prove_auth_relations(RelationMode::Repaired, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        assert!(!leaks(&repaired));
    }

    #[test]
    fn substituted_commitments_fail_in_the_right_family() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let (w, c) = relation_fixture::<R>(&[5, 6, 7, 8], &[5, 9, 7, 1], &mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let p = prove_auth_relations(RelationMode::Repaired, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        assert_eq!(verify(&c, &e, &p), Ok(()));

        // c01 at index 2 committing to f0·f1 + 1
        let mut bad = c.clone();
        bad[4][2] = commit(&Opening::new(w.f0[2] * w.f1[2] + R::scalar_one(), w.r01[2]));
        assert_eq!(
            verify(&bad, &e, &p),
            Err(RelationFailure::Equation { family: Family::CrossProduct, index: 2 })
        );

        // c11 at index 1 claiming a smaller square to fake a closer match
        let mut bad = c.clone();
        bad[3][1] = commit(&Opening::new(R::scalar_from_u64(36), w.r11[1]));
        assert_eq!(
            verify(&bad, &e, &p),
            Err(RelationFailure::Equation { family: Family::ProbeSquare, index: 1 })
        );
    }

    #[test]
    fn single_family_corruption_is_reported_precisely() {
        let mut rng = ChaCha20Rng::seed_from_u64(24);
        let (w, c) = relation_fixture::<R>(&[1, 2, 3], &[3, 2, 1], &mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let p = prove_auth_relations(RelationMode::Repaired, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        let junk = R::hash_to_group(b"junk");
        let fail = |family| Err(RelationFailure::Equation { family, index: 1 });

        // statement vectors: c0 → (i), c1 → (iii), c00 → (ii), c11 → (iv), c01 → (v)
        let expect = [
            Family::RegisteredOpening,
            Family::ProbeOpening,
            Family::RegisteredSquare,
            Family::ProbeSquare,
            Family::CrossProduct,
        ];
        for (slot, family) in expect.into_iter().enumerate() {
            let mut bad = c.clone();
            bad[slot][1] = Commitment::from_element(junk);
            assert_eq!(verify(&bad, &e, &p), fail(family), "slot {slot}");
        }

        // proof factors
        let factor_family = [
            Family::RegisteredOpening,
            Family::ProbeOpening,
            Family::RegisteredSquare,
            Family::ProbeSquare,
            Family::CrossProduct,
        ];
        for (slot, family) in factor_family.into_iter().enumerate() {
            let mut bad = p.clone();
            let arr = match slot {
                0 => &mut bad.commitments.alpha1,
                1 => &mut bad.commitments.alpha2,
                2 => &mut bad.commitments.beta1,
                3 => &mut bad.commitments.beta2,
                _ => &mut bad.commitments.beta3,
            };
            arr[1] = junk;
            assert_eq!(verify(&c, &e, &bad), fail(family), "factor {slot}");
        }

        // responses z1..z7
        let z_family = [
            Family::RegisteredOpening,
            Family::RegisteredOpening,
            Family::ProbeOpening,
            Family::ProbeOpening,
            Family::RegisteredSquare,
            Family::ProbeSquare,
            Family::CrossProduct,
        ];
        for (j, family) in z_family.into_iter().enumerate() {
            let mut bad = p.clone();
            bad.responses[j][1] += R::scalar_one();
            assert_eq!(verify(&c, &e, &bad), fail(family), "z{}", j + 1);
        }
    }

    #[test]
    fn proof_is_bound_to_its_challenge() {
        let mut rng = ChaCha20Rng::seed_from_u64(25);
        let (w, c) = relation_fixture::<R>(&[1, 2], &[2, 1], &mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        let p = prove_auth_relations(RelationMode::Repaired, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        let e2 = Challenge::from_scalar(*e.scalar() + R::scalar_one());
        assert!(verify(&c, &e2, &p).is_err());
    }

    #[test]
    fn shape_errors_are_reported() {
        let mut rng = ChaCha20Rng::seed_from_u64(26);
        let (w, c) = relation_fixture::<T>(&[1, 2], &[2, 1], &mut rng);
        let e = e_toy(3);
        let p = prove_auth_relations(RelationMode::Repaired, &w, &c[0], &c[1], &e, &mut rng).unwrap();
        let mut short = p.clone();
        short.responses[6].pop();
        assert!(matches!(verify(&c, &e, &short), Err(RelationFailure::Shape(_))));
        let mut relabeled = p.clone();
        relabeled.mode = RelationMode::PaperFaithful;
        assert!(matches!(verify(&c, &e, &relabeled), Err(RelationFailure::Shape(_))));

        let mut bad_w = w.clone();
        bad_w.r11.pop();
        assert!(matches!(
            prove_auth_relations(RelationMode::Repaired, &bad_w, &c[0], &c[1], &e, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn relation_special_soundness_extractor() {
        let mut rng = ChaCha20Rng::seed_from_u64(27);
        let (w, c) = relation_fixture::<R>(&[9, 8, 7], &[1, 2, 3], &mut rng);
        let prover = RelationProver::commit(RelationMode::Repaired, &w, &c[0], &c[1], &mut rng).unwrap();
        let (e1, e2) = (R::random_scalar(&mut rng), R::random_scalar(&mut rng));
        let p1 = prover.respond(&Challenge::from_scalar(e1));
        let p2 = prover.respond(&Challenge::from_scalar(e2));
        let inv = R::invert_scalar(&(e1 - e2)).unwrap();
        for i in 0..3 {
            let d = |j: usize| (p1.responses[j][i] - p2.responses[j][i]) * inv;
            let (f0, r0, f1, r1) = (d(0), d(1), d(2), d(3));
            assert_eq!((f0, r0, f1, r1), (w.f0[i], w.r0[i], w.f1[i], w.r1[i]));
            assert_eq!(d(4) + r0 * f0, w.r00[i]);
            assert_eq!(d(5) + r1 * f1, w.r11[i]);
            assert_eq!(d(6) + r0 * f1, w.r01[i]);
        }
    }

    #[test]
    fn proof_encoding_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(28);
        let (w, c) = relation_fixture::<R>(&[1, 2, 3], &[3, 2, 1], &mut rng);
        let e = Challenge::from_scalar(R::random_scalar(&mut rng));
        for mode in [RelationMode::Repaired, RelationMode::PaperFaithful] {
            let p = prove_auth_relations(mode, &w, &c[0], &c[1], &e, &mut rng).unwrap();
            let mut wr = Writer::new();
            p.write(&mut wr);
            let bytes = wr.into_bytes();
            let mut r = Reader::new(&bytes);
            assert_eq!(AuthRelationProof::<R>::read(&mut r).unwrap(), p);
            r.finish().unwrap();
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn toy_relations_complete_for_all_witnesses(
            f0 in proptest::collection::vec(0u64..11, 1..4),
            seed in any::<u64>(),
            e in 0u64..11,
        ) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let f1: Vec<u64> = f0.iter().map(|x| (x * 7 + seed) % 11).collect();
            let (w, c) = relation_fixture::<T>(&f0, &f1, &mut rng);
            let mode = if seed % 2 == 0 { RelationMode::Repaired } else { RelationMode::PaperFaithful };
            let e = e_toy(e);
            let p = prove_auth_relations(mode, &w, &c[0], &c[1], &e, &mut rng).unwrap();
            prop_assert_eq!(verify(&c, &e, &p), Ok(()));

            let pw = toy_witness(f0[0], seed % 11, f1[0], (seed / 11) % 11, (seed / 121) % 11);
            let pp = prove_product(&pw, &e, &mut rng);
            prop_assert!(verify_product(&pw.statement(), &e, &pp));
        }
    }
}
