//! Properties shared by the fuzz targets and the in-tree seed replay test.
//! Every function must return normally on arbitrary input.

#![allow(dead_code)]

use biozero::group::{GroupParams, PrimeGroup, Ristretto255, ToyGroup};
use biozero::ledger::LedgerState;
use biozero::protocol::{register, AuthProof, BiometricVector, RegistrationRecord};
use biozero::rangeproof::{setup, BitProof, RangeKeys, RangeProof};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Decodes under both shipped groups; a decodable input re-encodes to itself.
macro_rules! both {
    ($data:expr, $f:ident) => {{
        $f::<ToyGroup>($data);
        $f::<Ristretto255>($data);
    }};
}

fn auth_proof_in<G: PrimeGroup>(data: &[u8]) {
    if let Ok(gamma) = AuthProof::<G>::from_bytes(data) {
        assert_eq!(gamma.to_bytes(), data);
    }
}

pub fn auth_proof(data: &[u8]) {
    both!(data, auth_proof_in)
}

fn ledger_in<G: PrimeGroup>(data: &[u8]) {
    if let Ok(state) = LedgerState::<G>::from_bytes(data) {
        assert_eq!(state.to_bytes(), data);
        let _ = state.reverify_log();
    }
}

pub fn ledger(data: &[u8]) {
    both!(data, ledger_in)
}

fn range_proof_in<G: PrimeGroup>(data: &[u8]) {
    if let Ok(bits) = BitProof::<G>::decode(&RangeProof::from_bytes(data.to_vec())) {
        assert_eq!(bits.encode().as_bytes(), data);
    }
}

pub fn range_proof(data: &[u8]) {
    both!(data, range_proof_in)
}

pub fn range_keys(data: &[u8]) {
    if let Ok(keys) = RangeKeys::from_bytes(data) {
        assert_eq!(keys.to_bytes(), data);
    }
}

pub fn params(data: &[u8]) {
    if let Ok(params) = GroupParams::from_bytes(data) {
        assert_eq!(params.to_bytes(), data);
    }
}

fn record_in<G: PrimeGroup>(data: &[u8]) {
    if let Ok(record) = RegistrationRecord::<G>::from_bytes(data) {
        assert_eq!(record.to_bytes(), data);
    }
}

pub fn record(data: &[u8]) {
    both!(data, record_in)
}

/// First byte selects the feature width; the rest is the file text.
pub fn features(data: &[u8]) {
    let Some((&bits, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    if let Ok(v) = BiometricVector::parse(text, u32::from(bits % 20)) {
        assert_eq!(BiometricVector::parse(&v.to_text(), v.bits()).unwrap(), v);
    }
}

fn verify_in<G: PrimeGroup>(data: &[u8], f0: &[u64], bits: u32, range_bits: u32, epsilon: u64) {
    // same identity and blindings as the corpus generator
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let f0 = BiometricVector::new(f0.to_vec(), bits).unwrap();
    let record = register::<G, _>(b"seed", &f0, &mut rng).unwrap();
    let mut ledger = LedgerState::<G>::new();
    ledger.register_identity(b"seed", record.c0).unwrap();
    let vk = setup::<G>(range_bits).unwrap().vk;
    let outcome = ledger.verify_auth_bytes(&vk, epsilon, data);
    let last = ledger.entry(b"seed").unwrap().last_nonce;
    if outcome.verdict.is_pass() {
        assert!(last.is_some());
    } else {
        assert_eq!(last, None);
    }
    assert!(ledger.reverify_log().is_consistent());
}

/// Arbitrary Γ bytes against a ledger holding the corpus identity.
pub fn verify_auth(data: &[u8]) {
    verify_in::<ToyGroup>(data, &[1, 2], 2, 2, 3);
    verify_in::<Ristretto255>(data, &[10, 200, 33, 47], 8, 16, 10);
}
