//! Operation counting for verification runs, used as a gas proxy.

use std::ops::{Add, AddAssign};

use crate::group::PrimeGroup;

/// Group and hash operation counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct OpCounts {
    pub exponentiations: u64,
    pub multiplications: u64,
    pub hashes: u64,
}

impl Add for OpCounts {
    type Output = OpCounts;
    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            exponentiations: self.exponentiations + o.exponentiations,
            multiplications: self.multiplications + o.multiplications,
            hashes: self.hashes + o.hashes,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

/// Cost of one verification, split at the range-proof boundary.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct CostReport {
    /// Challenge re-derivation, relation checks and distance reconstruction.
    pub commitment_layer: OpCounts,
    /// Range-proof verification.
    pub range_proof: OpCounts,
}

impl CostReport {
    pub fn total(&self) -> OpCounts {
        self.commitment_layer + self.range_proof
    }
}

/// Counts operations while delegating them to the group.
///
/// A two-base exponentiation counts as two exponentiations and one
/// multiplication; an inversion counts as an exponentiation.
#[derive(Debug, Default)]
pub struct OpMeter {
    counts: OpCounts,
}

impl OpMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn counts(&self) -> OpCounts {
        self.counts
    }

    /// Returns the counts so far and resets to zero.
    pub fn take(&mut self) -> OpCounts {
        std::mem::take(&mut self.counts)
    }

    pub fn exp<G: PrimeGroup>(&mut self, base: &G::Element, k: &G::Scalar) -> G::Element {
        self.counts.exponentiations += 1;
        G::exp(base, k)
    }

    pub fn exp2<G: PrimeGroup>(
        &mut self,
        b1: &G::Element,
        k1: &G::Scalar,
        b2: &G::Element,
        k2: &G::Scalar,
    ) -> G::Element {
        self.counts.exponentiations += 2;
        self.counts.multiplications += 1;
        G::exp2(b1, k1, b2, k2)
    }

    pub fn commit_gh<G: PrimeGroup>(&mut self, f: &G::Scalar, r: &G::Scalar) -> G::Element {
        self.counts.exponentiations += 2;
        self.counts.multiplications += 1;
        G::commit_gh(f, r)
    }

    pub fn mul<G: PrimeGroup>(&mut self, a: &G::Element, b: &G::Element) -> G::Element {
        self.counts.multiplications += 1;
        G::mul(a, b)
    }

    pub fn inv<G: PrimeGroup>(&mut self, a: &G::Element) -> G::Element {
        self.counts.exponentiations += 1;
        G::inv(a)
    }

    pub fn hash(&mut self) {
        self.counts.hashes += 1;
    }
}
