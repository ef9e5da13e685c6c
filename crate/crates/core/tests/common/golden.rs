//! Pinned toy-group authentication and an integer-arithmetic oracle for it.
//!
//! The oracle parses the raw bytes itself and recomputes every check with
//! `u64` arithmetic mod 23; it shares no code with the library except SHA-256.

#![allow(dead_code)]

use biozero::group::ToyGroup;
use biozero::mulproof::RelationMode;
use biozero::protocol::{generate_auth_proof, register, AuthRequest, BiometricVector};
use biozero::rangeproof::setup;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub const SEED: u64 = 2029;
pub const ID: &[u8] = b"golden";
pub const F0: [u64; 2] = [1, 2];
pub const F1: [u64; 2] = [2, 2];
pub const BITS: u32 = 2;
pub const RANGE_BITS: u32 = 2;
pub const EPSILON: u64 = 3;

// Checked against a second, Python implementation of the oracle below.
pub const RECORD_HEX: &str =
    "425a5252010100000006676f6c64656e02000000020000000000000001000000000000000200000002040c00000002070100";
pub const GAMMA_REPAIRED_HEX: &str = "425a4150010100000006676f6c64656e000000000000000100000002030600000002120d000000020c0c00000002060c0100000002020800000002061200000002041200000002100600000002020300000002020100000002010a000000020907000000020a07000000020a000000000204030000000205020000002201020000000402030c100000000407010a04000000040a0905090000000408080205";
pub const GAMMA_FAITHFUL_HEX: &str = "425a4150010100000006676f6c64656e000000000000000100000002030600000002120d000000020c0c00000002060c020000000109000000010300000002120300000002100200000002080200000002000800000002040000000002020200000002060700000002040900000002030100000002020900000022010300000004080d0c10000000040702080600000004090a07020000000401020a01";

/// Deterministic registration and one authentication.
pub fn run(mode: RelationMode) -> (Vec<u8>, Vec<u8>) {
    run_seeded(SEED, mode)
}

pub fn run_seeded(seed: u64, mode: RelationMode) -> (Vec<u8>, Vec<u8>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let f0 = BiometricVector::new(F0.to_vec(), BITS).unwrap();
    let f1 = BiometricVector::new(F1.to_vec(), BITS).unwrap();
    let mut record = register::<ToyGroup, _>(ID, &f0, &mut rng).unwrap();
    let record_bytes = record.to_bytes();
    let keys = setup::<ToyGroup>(RANGE_BITS).unwrap();
    let req = AuthRequest { keys: &keys, f1: &f1, nonce: 1, epsilon: EPSILON, mode };
    let gamma = generate_auth_proof(&mut record, &req, &mut rng).unwrap();
    (record_bytes, gamma.to_bytes())
}

const P: u64 = 23;
const Q: u64 = 11;
const G: u64 = 2;
const H: u64 = 3;

fn pow(base: u64, k: u64) -> u64 {
    (0..k % Q).fold(1, |acc, _| acc * base % P)
}

fn pow11(x: u64) -> u64 {
    (0..Q).fold(1, |acc, _| acc * x % P)
}

fn inv(a: u64) -> u64 {
    pow(a, Q - 1)
}

fn commit(m: u64, r: u64) -> u64 {
    pow(G, m) * pow(H, r) % P
}

fn hash_mod_q(bytes: &[u8]) -> u64 {
    Sha256::digest(bytes).iter().fold(0, |acc, &b| (acc * 256 + b as u64) % Q)
}

struct Cursor<'a>(&'a [u8]);

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        if self.0.len() < n {
            return Err(format!("need {n} bytes, have {}", self.0.len()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u64, String> {
        Ok(self.take(1)?[0] as u64)
    }

    fn u32(&mut self) -> Result<usize, String> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Count-prefixed array of one-byte toy values.
    fn arr(&mut self) -> Result<Vec<u64>, String> {
        let n = self.u32()?;
        Ok(self.take(n)?.iter().map(|&b| b as u64).collect())
    }

    /// Array of elements of the order-11 subgroup.
    fn elements(&mut self) -> Result<Vec<u64>, String> {
        let v = self.arr()?;
        ensure(v.iter().all(|&x| x != 0 && x < P && pow11(x) == 1), "subgroup element")?;
        Ok(v)
    }

    /// Array of canonical scalars.
    fn scalars(&mut self) -> Result<Vec<u64>, String> {
        let v = self.arr()?;
        ensure(v.iter().all(|&x| x < Q), "canonical scalar")?;
        Ok(v)
    }

    fn done(&self) -> Result<(), String> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(format!("{} trailing bytes", self.0.len()))
        }
    }
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Registered commitments from a record, after checking every opening.
pub fn oracle_record(bytes: &[u8]) -> Result<Vec<u64>, String> {
    let mut c = Cursor(bytes);
    ensure(c.take(4)? == b"BZRR", "record magic")?;
    ensure(c.u8()? == 1 && c.u8()? == 1, "record version/profile")?;
    let id_len = c.u32()?;
    ensure(c.take(id_len)? == ID, "record id")?;
    let bits = c.u8()?;
    let n = c.u32()?;
    let f0 = (0..n).map(|_| c.u64()).collect::<Result<Vec<_>, _>>()?;
    ensure(f0.iter().all(|&v| v < 1 << bits), "feature width")?;
    let c0 = c.elements()?;
    let r0 = c.scalars()?;
    ensure(c.u8()? == 0, "fresh record has no nonce")?;
    c.done()?;
    for i in 0..n {
        ensure(c0[i] == commit(f0[i], r0[i]), format!("opening {i}"))?;
    }
    Ok(c0)
}

/// Checks Γ against `c0`: framing, challenge, all `5N` relations, the
/// distance commitment and the range proof.
pub fn oracle_gamma(c0: &[u64], bytes: &[u8], epsilon: u64, range_bits: usize) -> Result<(), String> {
    let mut c = Cursor(bytes);
    ensure(c.take(4)? == b"BZAP", "proof magic")?;
    ensure(c.u8()? == 1 && c.u8()? == 1, "proof version/profile")?;
    let id_len = c.u32()?;
    let id = c.take(id_len)?.to_vec();
    ensure(id == ID, "registered identity")?;
    let nonce = c.u64()?;
    let (c1, c00, c11, c01) = (c.elements()?, c.elements()?, c.elements()?, c.elements()?);
    let n = c0.len();
    for v in [&c1, &c00, &c11, &c01] {
        ensure(v.len() == n, "commitment vector length")?;
    }
    let mode = c.u8()?;
    ensure(mode == 1 || mode == 2, "mode tag")?;
    let first: Vec<Vec<u64>> = (0..5).map(|_| c.elements()).collect::<Result<_, _>>()?;
    let z: Vec<Vec<u64>> = (0..7).map(|_| c.scalars()).collect::<Result<_, _>>()?;
    let pi_len = c.u32()?;
    let pi = c.take(pi_len)?.to_vec();
    c.done()?;

    let k = if mode == 1 { n } else { 1 };
    let (a1, a2, b1, b2, b3) = (&first[0], &first[1], &first[2], &first[3], &first[4]);
    ensure(a1.len() == k && a2.len() == k, "alpha length")?;
    ensure([b1, b2, b3].iter().all(|b| b.len() == n), "beta length")?;
    ensure(z.iter().all(|zj| zj.len() == n), "response length")?;

    let mut t = Vec::new();
    for v in [c0, &c1[..], &c00[..], &c11[..], &c01[..]] {
        t.extend(v.iter().map(|&x| x as u8));
    }
    t.extend_from_slice(&(id.len() as u32).to_be_bytes());
    t.extend_from_slice(&id);
    t.extend_from_slice(&nonce.to_be_bytes());
    if mode == 1 {
        for v in &first {
            t.extend(v.iter().map(|&x| x as u8));
        }
    }
    let e = hash_mod_q(&t);

    for i in 0..n {
        let a = i.min(k - 1);
        let zi = |j: usize| z[j][i];
        let checks = [
            (commit(zi(0), zi(1)), a1[a] * pow(c0[i], e) % P),
            (pow(c0[i], zi(0)) * pow(H, zi(4)) % P, b1[i] * pow(c00[i], e) % P),
            (commit(zi(2), zi(3)), a2[a] * pow(c1[i], e) % P),
            (pow(c1[i], zi(2)) * pow(H, zi(5)) % P, b2[i] * pow(c11[i], e) % P),
            (pow(c0[i], zi(2)) * pow(H, zi(6)) % P, b3[i] * pow(c01[i], e) % P),
        ];
        for (f, (lhs, rhs)) in checks.iter().enumerate() {
            ensure(lhs == rhs, format!("relation family {} at index {i}", f + 1))?;
        }
    }

    let c_d = (0..n).fold(1, |acc, i| acc * c00[i] % P * c11[i] % P * inv(c01[i] * c01[i] % P) % P);

    let mut r = Cursor(&pi);
    ensure(r.u8()? == 1, "range backend")?;
    let challenge = r.u8()?;
    let (cs, e0, z0, z1) = (r.elements()?, r.scalars()?, r.scalars()?, r.scalars()?);
    r.done()?;
    let m = 2 * range_bits;
    ensure([&cs, &e0, &z0, &z1].iter().all(|v| v.len() == m), "range proof length")?;
    let weighted = |half: &[u64]| half.iter().enumerate().fold(1, |acc, (j, &cj)| acc * pow(cj, 1 << j) % P);
    ensure(weighted(&cs[..range_bits]) == c_d, "bits recombine to c_d")?;
    ensure(weighted(&cs[range_bits..]) == pow(G, epsilon - 1) * inv(c_d) % P, "complement bits recombine")?;
    let mut input = b"biozero/range/bitsigma/v1".to_vec();
    input.push(1);
    input.extend_from_slice(&(range_bits as u32).to_be_bytes());
    input.extend_from_slice(&epsilon.to_be_bytes());
    input.push(c_d as u8);
    input.extend(cs.iter().map(|&x| x as u8));
    for j in 0..m {
        let e1 = (challenge + Q - e0[j]) % Q;
        let a0 = pow(H, z0[j]) * inv(pow(cs[j], e0[j])) % P;
        let a1 = pow(H, z1[j]) * inv(pow(cs[j] * inv(G) % P, e1)) % P;
        input.push(a0 as u8);
        input.push(a1 as u8);
    }
    ensure(hash_mod_q(&input) == challenge, "range challenge")?;
    Ok(())
}
