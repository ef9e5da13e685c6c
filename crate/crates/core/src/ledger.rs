//! Verifier state machine standing in for the on-chain contract.
//!
//! Holds the identity registry and an append-only event log. Verification of
//! an authentication proof runs these stages in order and stops at the first
//! failure:
//!
//! | code | stage       | check                                               |
//! |------|-------------|-----------------------------------------------------|
//! | 0    | decode      | Γ parses                                            |
//! | 1    | nonce       | nonce above the identity's last accepted nonce      |
//! | 2    | registry    | identity is registered                              |
//! | 3    | challenge   | vector lengths match `c0`; challenge re-derived     |
//! | 4    | relations   | all `5N` product-consistency equations hold         |
//! | 5    | reconstruct | distance commitment rebuilt from `c00, c11, c01`    |
//! | 6    | range       | range proof accepts the rebuilt commitment and `ε`  |
//!
//! A pass advances the identity's nonce; a fail leaves the registry as it
//! was. Both append an event carrying the full Γ bytes, so the log can be
//! replayed from an empty state.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::group::PrimeGroup;
use crate::meter::{CostReport, OpCounts, OpMeter};
use crate::mulproof::{relation_challenge, verify_auth_relations, RelationStatement};
use crate::pedersen::Commitment;
use crate::protocol::{distance_commitment, distance_commitment_metered, AuthProof};
use crate::rangeproof::{verify_range_detailed, VerifyingKey};

const LEDGER_MAGIC: &[u8; 4] = b"BZLG";
const LEDGER_VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Decode,
    Nonce,
    Registry,
    Challenge,
    Relations,
    Reconstruct,
    Range,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Decode,
        Stage::Nonce,
        Stage::Registry,
        Stage::Challenge,
        Stage::Relations,
        Stage::Reconstruct,
        Stage::Range,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Stage> {
        Stage::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Decode => "decode",
            Stage::Nonce => "nonce",
            Stage::Registry => "registry",
            Stage::Challenge => "challenge",
            Stage::Relations => "relations",
            Stage::Reconstruct => "reconstruct",
            Stage::Range => "range",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {} ({})", self.code(), self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail { stage: Stage, detail: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn failed_stage(&self) -> Option<Stage> {
        match self {
            Verdict::Pass => None,
            Verdict::Fail { stage, .. } => Some(*stage),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("pass"),
            Verdict::Fail { stage, detail } => write!(f, "fail at {stage}: {detail}"),
        }
    }
}

/// Result of one verification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub verdict: Verdict,
    pub cost: CostReport,
    /// SHA-256 of the submitted Γ bytes.
    pub digest: [u8; 32],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistryEntry<G: PrimeGroup> {
    pub c0: Vec<Commitment<G>>,
    /// `None` until the first accepted authentication.
    pub last_nonce: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthEvent {
    pub epsilon: u64,
    pub range_bits: u32,
    pub digest: [u8; 32],
    pub verdict: Verdict,
    pub cost: CostReport,
    pub gamma: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event<G: PrimeGroup> {
    Registration { id: Vec<u8>, c0: Vec<Commitment<G>> },
    Authentication(AuthEvent),
}

/// Differences found when replaying the event log.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReverifyReport {
    pub registrations: usize,
    pub authentications: usize,
    pub passes: usize,
    /// Indices of events whose recomputed verdict or cost differs.
    pub mismatches: Vec<usize>,
    /// Whether the replayed registry equals the stored one.
    pub registry_matches: bool,
}

impl ReverifyReport {
    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty() && self.registry_matches
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerState<G: PrimeGroup> {
    registry: BTreeMap<Vec<u8>, RegistryEntry<G>>,
    events: Vec<Event<G>>,
}

impl<G: PrimeGroup> Default for LedgerState<G> {
    fn default() -> Self {
        LedgerState { registry: BTreeMap::new(), events: Vec::new() }
    }
}

/// Rebuilds the distance commitment from Γ alone.
pub fn reconstruct_distance_commitment<G: PrimeGroup>(gamma: &AuthProof<G>) -> Result<Commitment<G>> {
    distance_commitment(&gamma.c00, &gamma.c11, &gamma.c01)
}

fn fail(stage: Stage, detail: impl Into<String>) -> Verdict {
    Verdict::Fail { stage, detail: detail.into() }
}

impl<G: PrimeGroup> LedgerState<G> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entry(&self, id: &[u8]) -> Option<&RegistryEntry<G>> {
        self.registry.get(id)
    }

    pub fn identities(&self) -> impl Iterator<Item = &[u8]> {
        self.registry.keys().map(Vec::as_slice)
    }

    pub fn events(&self) -> &[Event<G>] {
        &self.events
    }

    pub fn register_identity(&mut self, id: &[u8], c0: Vec<Commitment<G>>) -> Result<()> {
        if self.registry.contains_key(id) {
            return Err(Error::DuplicateIdentity);
        }
        if c0.is_empty() {
            return Err(Error::EmptyVector);
        }
        self.registry.insert(id.to_vec(), RegistryEntry { c0: c0.clone(), last_nonce: None });
        self.events.push(Event::Registration { id: id.to_vec(), c0 });
        Ok(())
    }

    /// Runs stages 1 to 6 without touching the state.
    fn evaluate(&self, vk: &VerifyingKey, epsilon: u64, gamma: &AuthProof<G>) -> (Verdict, CostReport) {
        let mut cost = CostReport::default();
        let entry = self.registry.get(&gamma.id);

        if let Some(last) = entry.and_then(|e| e.last_nonce) {
            if gamma.nonce <= last {
                return (
                    fail(Stage::Nonce, format!("nonce {} is not above last accepted {last}", gamma.nonce)),
                    cost,
                );
            }
        }
        let Some(entry) = entry else {
            return (fail(Stage::Registry, "identity is not registered"), cost);
        };

        let mut meter = OpMeter::new();
        let base = match gamma.transcript(&entry.c0) {
            Ok(t) => t,
            Err(e) => return (fail(Stage::Challenge, e.to_string()), cost),
        };
        let e = relation_challenge(&base, gamma.relations.mode, &gamma.relations.commitments);
        meter.hash();

        let statement = RelationStatement {
            c0: &entry.c0,
            c1: &gamma.c1,
            c00: &gamma.c00,
            c11: &gamma.c11,
            c01: &gamma.c01,
        };
        if let Err(f) = verify_auth_relations(&statement, &e, &gamma.relations, &mut meter) {
            cost.commitment_layer = meter.take();
            return (fail(Stage::Relations, f.to_string()), cost);
        }

        let c_d = distance_commitment_metered(&gamma.c00, &gamma.c11, &gamma.c01, &mut meter);
        cost.commitment_layer = meter.take();
        let c_d = match c_d {
            Ok(c) => c,
            Err(e) => return (fail(Stage::Reconstruct, e.to_string()), cost),
        };

        let verdict = match verify_range_detailed(vk, &c_d, epsilon, &gamma.pi, &mut meter) {
            Ok(()) => Verdict::Pass,
            Err(f) => fail(Stage::Range, f.to_string()),
        };
        cost.range_proof = meter.take();
        (verdict, cost)
    }

    fn evaluate_bytes(
        &self,
        vk: &VerifyingKey,
        epsilon: u64,
        bytes: &[u8],
    ) -> (Verdict, CostReport, Option<(Vec<u8>, u64)>) {
        match AuthProof::<G>::from_bytes(bytes) {
            Err(e) => (fail(Stage::Decode, e.to_string()), CostReport::default(), None),
            Ok(gamma) => {
                let (v, c) = self.evaluate(vk, epsilon, &gamma);
                (v, c, Some((gamma.id, gamma.nonce)))
            }
        }
    }

    /// Verifies serialized Γ bytes, records the event and, on pass,
    /// advances the identity's nonce.
    pub fn verify_auth_bytes(&mut self, vk: &VerifyingKey, epsilon: u64, bytes: &[u8]) -> Outcome {
        let digest: [u8; 32] = Sha256::digest(bytes).into();
        let (verdict, cost, key) = self.evaluate_bytes(vk, epsilon, bytes);
        if let (Verdict::Pass, Some((id, nonce))) = (&verdict, key) {
            if let Some(entry) = self.registry.get_mut(&id) {
                entry.last_nonce = Some(nonce);
            }
        }
        self.events.push(Event::Authentication(AuthEvent {
            epsilon,
            range_bits: vk.bits,
            digest,
            verdict: verdict.clone(),
            cost,
            gamma: bytes.to_vec(),
        }));
        Outcome { verdict, cost, digest }
    }

    pub fn verify_auth(&mut self, vk: &VerifyingKey, epsilon: u64, gamma: &AuthProof<G>) -> Outcome {
        self.verify_auth_bytes(vk, epsilon, &gamma.to_bytes())
    }

    /// Replays every event from an empty state and compares verdicts, costs
    /// and the final registry.
    pub fn reverify_log(&self) -> ReverifyReport {
        let mut replay = LedgerState::<G>::new();
        let mut report = ReverifyReport::default();
        for (i, event) in self.events.iter().enumerate() {
            match event {
                Event::Registration { id, c0 } => {
                    report.registrations += 1;
                    if replay.register_identity(id, c0.clone()).is_err() {
                        report.mismatches.push(i);
                    }
                }
                Event::Authentication(a) => {
                    report.authentications += 1;
                    let vk = VerifyingKey { profile: G::PROFILE, bits: a.range_bits };
                    let out = replay.verify_auth_bytes(&vk, a.epsilon, &a.gamma);
                    if out.verdict.is_pass() {
                        report.passes += 1;
                    }
                    if out.verdict != a.verdict || out.cost != a.cost || out.digest != a.digest {
                        report.mismatches.push(i);
                    }
                }
            }
        }
        report.registry_matches = replay.registry == self.registry;
        report
    }

    /// `BZLG ‖ version ‖ profile ‖ registry ‖ events`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(LEDGER_MAGIC);
        w.u8(LEDGER_VERSION);
        w.u8(G::PROFILE.tag());
        w.u32(self.registry.len() as u32);
        for (id, entry) in &self.registry {
            w.bytes(id);
            w.elements::<G>(entry.c0.iter().map(Commitment::element));
            write_nonce(&mut w, entry.last_nonce);
        }
        w.u32(self.events.len() as u32);
        for event in &self.events {
            match event {
                Event::Registration { id, c0 } => {
                    w.u8(1);
                    w.bytes(id);
                    w.elements::<G>(c0.iter().map(Commitment::element));
                }
                Event::Authentication(a) => {
                    w.u8(2);
                    w.u64(a.epsilon);
                    w.u32(a.range_bits);
                    w.raw(&a.digest);
                    match &a.verdict {
                        Verdict::Pass => w.u8(0xff),
                        Verdict::Fail { stage, .. } => w.u8(stage.code()),
                    }
                    let detail = match &a.verdict {
                        Verdict::Pass => "",
                        Verdict::Fail { detail, .. } => detail.as_str(),
                    };
                    w.bytes(detail.as_bytes());
                    write_counts(&mut w, &a.cost.commitment_layer);
                    write_counts(&mut w, &a.cost.range_proof);
                    w.bytes(&a.gamma);
                }
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.magic(LEDGER_MAGIC)?;
        r.version(LEDGER_VERSION)?;
        r.expect_profile::<G>()?;
        let mut state = LedgerState::new();
        let entries = bounded_count(&mut r, 9)?;
        for _ in 0..entries {
            let id = r.bytes()?.to_vec();
            let c0 = read_commitments::<G>(&mut r)?;
            let last_nonce = read_nonce(&mut r)?;
            if state.registry.insert(id, RegistryEntry { c0, last_nonce }).is_some() {
                return Err(Error::Decode("duplicate registry identity".into()));
            }
        }
        let events = bounded_count(&mut r, 1)?;
        for _ in 0..events {
            let event = match r.u8()? {
                1 => Event::Registration { id: r.bytes()?.to_vec(), c0: read_commitments::<G>(&mut r)? },
                2 => {
                    let epsilon = r.u64()?;
                    let range_bits = r.u32()?;
                    let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
                    let code = r.u8()?;
                    let detail = String::from_utf8(r.bytes()?.to_vec())
                        .map_err(|_| Error::Decode("detail is not UTF-8".into()))?;
                    let verdict = match (code, Stage::from_code(code)) {
                        (0xff, _) if detail.is_empty() => Verdict::Pass,
                        (_, Some(stage)) => Verdict::Fail { stage, detail },
                        _ => return Err(Error::Decode(format!("bad verdict code {code}"))),
                    };
                    let cost = CostReport {
                        commitment_layer: read_counts(&mut r)?,
                        range_proof: read_counts(&mut r)?,
                    };
                    let gamma = r.bytes()?.to_vec();
                    Event::Authentication(AuthEvent { epsilon, range_bits, digest, verdict, cost, gamma })
                }
                t => return Err(Error::Decode(format!("unknown event kind {t}"))),
            };
            state.events.push(event);
        }
        r.finish()?;
        Ok(state)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }

    /// Writes to a sibling temporary file, syncs it, then renames over
    /// `path`.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = Path::new(&tmp);
        {
            let mut f = fs::File::create(tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }
}

fn bounded_count(r: &mut Reader<'_>, min_item: usize) -> Result<usize> {
    let n = r.u32()? as usize;
    if n.saturating_mul(min_item) > r.remaining() {
        return Err(Error::Decode(format!("count {n} exceeds input")));
    }
    Ok(n)
}

fn read_commitments<G: PrimeGroup>(r: &mut Reader<'_>) -> Result<Vec<Commitment<G>>> {
    Ok(r.elements::<G>()?.into_iter().map(Commitment::from_element).collect())
}

fn write_nonce(w: &mut Writer, nonce: Option<u64>) {
    match nonce {
        None => w.u8(0),
        Some(n) => {
            w.u8(1);
            w.u64(n);
        }
    }
}

fn read_nonce(r: &mut Reader<'_>) -> Result<Option<u64>> {
    match r.u8()? {
        0 => Ok(None),
        1 => Ok(Some(r.u64()?)),
        t => Err(Error::Decode(format!("bad nonce flag {t}"))),
    }
}

fn write_counts(w: &mut Writer, c: &OpCounts) {
    w.u64(c.exponentiations);
    w.u64(c.multiplications);
    w.u64(c.hashes);
}

fn read_counts(r: &mut Reader<'_>) -> Result<OpCounts> {
    Ok(OpCounts { exponentiations: r.u64()?, multiplications: r.u64()?, hashes: r.u64()? })
}
