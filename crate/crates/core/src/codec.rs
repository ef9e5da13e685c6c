//! Byte-level framing shared by every file and wire format.
//!
//! Integers are big-endian. Variable-length fields carry a `u32` length (byte
//! strings) or count (arrays of fixed-size elements/scalars) prefix.

use crate::error::{Error, Result};
use crate::group::{PrimeGroup, Profile};

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    /// Length-prefixed byte string.
    pub fn bytes(&mut self, b: &[u8]) {
        self.u32(b.len() as u32);
        self.raw(b);
    }

    pub fn element<G: PrimeGroup>(&mut self, e: &G::Element) {
        G::encode_element(e, &mut self.buf);
    }

    pub fn scalar<G: PrimeGroup>(&mut self, s: &G::Scalar) {
        G::encode_scalar(s, &mut self.buf);
    }

    /// Count-prefixed array of elements.
    pub fn elements<'a, G: PrimeGroup>(&mut self, items: impl ExactSizeIterator<Item = &'a G::Element>) {
        self.u32(items.len() as u32);
        for e in items {
            self.element::<G>(e);
        }
    }

    /// Count-prefixed array of scalars.
    pub fn scalars<G: PrimeGroup>(&mut self, items: &[G::Scalar]) {
        self.u32(items.len() as u32);
        for s in items {
            self.scalar::<G>(s);
        }
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if n > self.remaining() {
            return Err(Error::Decode(format!(
                "truncated input: need {n} bytes at offset {}, have {}",
                self.pos,
                self.remaining()
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn magic(&mut self, expected: &[u8]) -> Result<()> {
        if self.take(expected.len())? != expected {
            return Err(Error::Decode("bad magic".into()));
        }
        Ok(())
    }

    pub fn version(&mut self, expected: u8) -> Result<()> {
        let v = self.u8()?;
        if v != expected {
            return Err(Error::Decode(format!("unsupported version {v}")));
        }
        Ok(())
    }

    pub fn profile(&mut self) -> Result<Profile> {
        let tag = self.u8()?;
        Profile::from_tag(tag).ok_or_else(|| Error::Decode(format!("unknown profile tag {tag}")))
    }

    /// Reads a profile tag and requires it to be `G`'s.
    pub fn expect_profile<G: PrimeGroup>(&mut self) -> Result<()> {
        let found = self.profile()?;
        if found != G::PROFILE {
            return Err(Error::ProfileMismatch {
                expected: G::PROFILE.to_string(),
                found: found.to_string(),
            });
        }
        Ok(())
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn element<G: PrimeGroup>(&mut self) -> Result<G::Element> {
        let raw = self.take(G::element_len())?;
        G::decode_element(raw).ok_or_else(|| Error::Decode("invalid group element".into()))
    }

    pub fn scalar<G: PrimeGroup>(&mut self) -> Result<G::Scalar> {
        let raw = self.take(G::scalar_len())?;
        G::decode_scalar(raw).ok_or_else(|| Error::Decode("non-canonical scalar".into()))
    }

    /// Reads an array count and checks it against the bytes left, so a
    /// hostile count cannot trigger a huge allocation.
    fn count(&mut self, item_len: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(item_len) > self.remaining() {
            return Err(Error::Decode(format!("array of {n} items exceeds input")));
        }
        Ok(n)
    }

    pub fn elements<G: PrimeGroup>(&mut self) -> Result<Vec<G::Element>> {
        let n = self.count(G::element_len())?;
        (0..n).map(|_| self.element::<G>()).collect()
    }

    pub fn scalars<G: PrimeGroup>(&mut self) -> Result<Vec<G::Scalar>> {
        let n = self.count(G::scalar_len())?;
        (0..n).map(|_| self.scalar::<G>()).collect()
    }

    /// Fails if any input is left unread.
    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Decode(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::ToyGroup;

    #[test]
    fn hostile_count_is_rejected_without_allocating() {
        let mut w = Writer::new();
        w.u32(u32::MAX);
        let bytes = w.into_bytes();
        assert!(Reader::new(&bytes).elements::<ToyGroup>().is_err());
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut w = Writer::new();
        w.u64(7);
        w.u8(0);
        let bytes = w.into_bytes();
        let mut r = Reader::new(&bytes);
        assert_eq!(r.u64().unwrap(), 7);
        assert!(r.finish().is_err());
    }

    #[test]
    fn truncated_reads_fail() {
        let mut r = Reader::new(&[0, 0, 0, 5, 1, 2]);
        assert!(r.bytes().is_err());
    }
}
