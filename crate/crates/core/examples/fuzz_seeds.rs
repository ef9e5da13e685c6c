//! Writes one valid encoding per decoder into `<dir>/<target>/`.
//!
//! Usage: `cargo run -p biozero --example fuzz_seeds -- fuzz/corpus`

use std::fs;
use std::path::Path;

use biozero::group::{setup_group, PrimeGroup, Profile, Ristretto255, ToyGroup};
use biozero::ledger::LedgerState;
use biozero::mulproof::RelationMode;
use biozero::protocol::{generate_auth_proof, register, AuthRequest, BiometricVector};
use biozero::rangeproof::{setup, BitProof, RangeProof};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn put(dir: &Path, target: &str, name: &str, bytes: &[u8]) {
    let d = dir.join(target);
    fs::create_dir_all(&d).unwrap();
    fs::write(d.join(name), bytes).unwrap();
}

fn seeds<G: PrimeGroup>(dir: &Path, f0: &[u64], f1: &[u64], bits: u32, range_bits: u32, epsilon: u64) {
    let tag = G::PROFILE.name();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let keys = setup::<G>(range_bits).unwrap();
    let f0 = BiometricVector::new(f0.to_vec(), bits).unwrap();
    let f1 = BiometricVector::new(f1.to_vec(), bits).unwrap();
    let mut record = register::<G, _>(b"seed", &f0, &mut rng).unwrap();
    let mut ledger = LedgerState::<G>::new();
    ledger.register_identity(b"seed", record.c0.clone()).unwrap();
    put(dir, "decode_record", &format!("{tag}-fresh"), &record.to_bytes());
    put(dir, "decode_ledger", &format!("{tag}-registered"), &ledger.to_bytes());

    for mode in [RelationMode::Repaired, RelationMode::PaperFaithful] {
        let req = AuthRequest { keys: &keys, f1: &f1, nonce: record.next_nonce(), epsilon, mode };
        let gamma = generate_auth_proof(&mut record, &req, &mut rng).unwrap();
        let bytes = gamma.to_bytes();
        let name = format!("{tag}-{}", mode.name());
        put(dir, "decode_auth_proof", &name, &bytes);
        put(dir, "verify_auth", &name, &bytes);
        put(dir, "decode_range_proof", &name, gamma.pi.as_bytes());
        BitProof::<G>::decode(&RangeProof::from_bytes(gamma.pi.as_bytes().to_vec())).unwrap();
        assert!(ledger.verify_auth_bytes(&keys.vk, epsilon, &bytes).verdict.is_pass());
    }
    put(dir, "decode_record", &format!("{tag}-used"), &record.to_bytes());
    put(dir, "decode_ledger", &format!("{tag}-after-auth"), &ledger.to_bytes());
    put(dir, "decode_range_keys", tag, &keys.to_bytes());
    put(dir, "decode_params", tag, &setup_group(G::PROFILE).to_bytes());
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fuzz/corpus".into());
    let dir = Path::new(&dir);
    seeds::<ToyGroup>(dir, &[1, 2], &[2, 2], 2, 2, 3);
    seeds::<Ristretto255>(dir, &[10, 200, 33, 47], &[11, 199, 33, 47], 8, 16, 10);
    put(dir, "decode_params", Profile::Modp2048.name(), &setup_group(Profile::Modp2048).to_bytes());
    put(dir, "parse_features", "short", b"1\n2\n3\n");
    put(dir, "parse_features", "blank-lines", b"255\n\n0\n  17 \n");
    put(dir, "parse_features", "bad-line", b"12\nx\n");
}
