//! Canonical transcript bytes and the SHA-256 Fiat–Shamir challenge.
//!
//! Layout (framed, the default):
//!
//! ```text
//! c0[1..N] ‖ c1[1..N] ‖ c00[1..N] ‖ c11[1..N] ‖ c01[1..N] ‖ u32_be(|id|) ‖ id ‖ u64_be(nonce)
//! ```
//!
//! Every commitment uses the fixed-length element encoding of its group. The
//! challenge is `SHA-256(transcript)` read as a big-endian integer mod `q`.

use std::marker::PhantomData;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::PrimeGroup;
use crate::pedersen::Commitment;

/// How the identity is placed in the transcript.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TranscriptLayout {
    /// `u32_be(|id|) ‖ id`: unambiguous boundary between id and nonce.
    #[default]
    Framed,
    /// Bare `id` bytes, for byte-level interop with unframed producers.
    Unframed,
}

/// Fiat–Shamir challenge scalar `e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Challenge<G: PrimeGroup> {
    scalar: G::Scalar,
    _group: PhantomData<G>,
}

impl<G: PrimeGroup> Challenge<G> {
    pub fn from_scalar(scalar: G::Scalar) -> Self {
        Challenge { scalar, _group: PhantomData }
    }

    pub fn scalar(&self) -> &G::Scalar {
        &self.scalar
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    bytes: Vec<u8>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the authentication transcript over the five commitment vectors,
    /// the identity and the nonce.
    #[allow(clippy::too_many_arguments)]
    pub fn authentication<G: PrimeGroup>(
        c0: &[Commitment<G>],
        c1: &[Commitment<G>],
        c00: &[Commitment<G>],
        c11: &[Commitment<G>],
        c01: &[Commitment<G>],
        id: &[u8],
        nonce: u64,
        layout: TranscriptLayout,
    ) -> Result<Self> {
        let n = c0.len();
        for v in [c1, c00, c11, c01] {
            if v.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: v.len() });
            }
        }
        let mut t = Transcript { bytes: Vec::with_capacity(5 * n * G::element_len() + id.len() + 12) };
        for v in [c0, c1, c00, c11, c01] {
            t.append_elements::<G>(v.iter().map(Commitment::element));
        }
        if layout == TranscriptLayout::Framed {
            t.bytes.extend_from_slice(&(id.len() as u32).to_be_bytes());
        }
        t.bytes.extend_from_slice(id);
        t.bytes.extend_from_slice(&nonce.to_be_bytes());
        Ok(t)
    }

    pub fn append_elements<'a, G: PrimeGroup>(&mut self, elements: impl IntoIterator<Item = &'a G::Element>) {
        for e in elements {
            G::encode_element(e, &mut self.bytes);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(&self.bytes).into()
    }

    pub fn challenge<G: PrimeGroup>(&self) -> Challenge<G> {
        Challenge::from_scalar(G::scalar_from_be_bytes_mod_order(&self.digest()))
    }
}

/// `e = H(c0 ‖ c1 ‖ c00 ‖ c11 ‖ c01 ‖ id ‖ nonce)` with the framed layout.
pub fn derive_challenge<G: PrimeGroup>(
    c0: &[Commitment<G>],
    c1: &[Commitment<G>],
    c00: &[Commitment<G>],
    c11: &[Commitment<G>],
    c01: &[Commitment<G>],
    id: &[u8],
    nonce: u64,
) -> Result<Challenge<G>> {
    Transcript::authentication(c0, c1, c00, c11, c01, id, nonce, TranscriptLayout::Framed)
        .map(|t| t.challenge())
}
