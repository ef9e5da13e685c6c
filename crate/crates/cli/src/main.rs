//! `biozero` command-line front end.
//!
//! Exit codes: 0 pass, 1 fail verdict, 2 usage or I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biozero::bench::{run_bench, summarize, write_csv, BenchConfig, DEFAULT_SIZES};
use biozero::group::{setup_group, GroupParams, Modp2048, PrimeGroup, Profile, Ristretto255, ToyGroup};
use biozero::ledger::LedgerState;
use biozero::mulproof::RelationMode;
use biozero::protocol::{
    generate_auth_proof, generate_auth_proof_unchecked_for_testing, register, AuthRequest, BiometricVector,
    RegistrationRecord, DEFAULT_FEATURE_BITS,
};
use biozero::rangeproof::{setup, RangeKeys};
use biozero::synth::{synth_features, TargetDistance};
use biozero::Error;
use clap::{Args, Parser, Subcommand};
use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

#[derive(Parser)]
#[command(name = "biozero", version, about = "Biometric authentication over committed feature vectors")]
struct Cli {
    /// Group instantiation: toy, production or modp2048.
    #[arg(long, global = true, env = "BIOZERO_PROFILE", default_value = "production")]
    profile: Profile,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the group parameters and range-proof keys.
    Setup {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        keys: PathBuf,
        /// Range-proof bit-length L; thresholds up to 2^L are provable.
        #[arg(long, default_value_t = 32)]
        range_bits: u32,
    },
    /// Commit to an enrollment feature file, write the secret record and
    /// publish the commitments to the ledger.
    Register {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FEATURE_BITS)]
        bits: u32,
        #[arg(long)]
        seed: Option<u64>,
        /// Registration record (secret: contains the features and blindings).
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an authentication proof Γ for a probe feature file.
    Prove {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        /// Registration record; its nonce is advanced in place.
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        epsilon: u64,
        /// Defaults to one above the record's last nonce.
        #[arg(long)]
        nonce: Option<u64>,
        #[arg(long, default_value = "repaired")]
        mode: RelationMode,
        /// Shorthand for `--mode paper-faithful`.
        #[arg(long, conflicts_with = "mode")]
        paper_faithful: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Emit Γ even when the probe is not within the threshold.
        #[arg(long)]
        force_negative_test: bool,
    },
    /// Apply a Γ file to the ledger and report the verdict and cost.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        epsilon: u64,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Replay the ledger's event log and compare recorded verdicts.
    ReverifyLog {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Run the scaling sweep and write a CSV.
    Bench {
        #[command(flatten)]
        bench: BenchArgs,
    },
    /// Write a deterministic pair of feature files at a chosen distance.
    Synth {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        len: usize,
        #[arg(long, default_value_t = DEFAULT_FEATURE_BITS)]
        bits: u32,
        /// Squared distance, or "random".
        #[arg(long, default_value = "random")]
        distance: String,
        #[arg(long)]
        enroll: PathBuf,
        #[arg(long)]
        probe: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Params file; when given it must describe the selected profile.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_FEATURE_BITS)]
    bits: u32,
    #[arg(long, default_value_t = 32)]
    range_bits: u32,
    #[arg(long, default_value_t = 10_000)]
    epsilon: u64,
    #[arg(long, default_value = "repaired")]
    mode: RelationMode,
    /// Shorthand for `--mode paper-faithful`.
    #[arg(long, conflicts_with = "mode")]
    paper_faithful: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Failures that map to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, Usage> {
    r.map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> Result<Vec<u8>, Usage> {
    io(path, fs::read(path))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Usage> {
    io(path, fs::write(path, bytes))
}

fn in_file<T>(path: &Path, r: biozero::Result<T>) -> Result<T, Usage> {
    r.map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn check_params(profile: Profile, common: &Common) -> Result<(), Usage> {
    if let Some(path) = &common.params {
        let params = in_file(path, GroupParams::from_bytes(&read(path)?))?;
        if params.profile != profile {
            return Err(Usage(format!(
                "{}: params are for {}, selected profile is {profile}",
                path.display(),
                params.profile
            )));
        }
    }
    Ok(())
}

fn load_keys<G: PrimeGroup>(path: &Path) -> Result<RangeKeys, Usage> {
    let keys = in_file(path, RangeKeys::from_bytes(&read(path)?))?;
    in_file(path, keys.check::<G>())?;
    Ok(keys)
}

fn load_features(path: &Path, bits: u32) -> Result<BiometricVector, Usage> {
    let text = io(path, fs::read_to_string(path))?;
    in_file(path, BiometricVector::parse(&text, bits))
}

fn rng(seed: Option<u64>) -> Box<dyn RngCoreCrypto> {
    match seed {
        Some(s) => Box::new(ChaCha20Rng::seed_from_u64(s)),
        None => Box::new(OsRng),
    }
}

trait RngCoreCrypto: RngCore + CryptoRng {}
impl<T: RngCore + CryptoRng> RngCoreCrypto for T {}

fn run<G: PrimeGroup>(profile: Profile, command: Command) -> Result<bool, Usage> {
    match command {
        Command::Setup { params, keys, range_bits } => {
            let k = setup::<G>(range_bits)?;
            write(&params, &setup_group(profile).to_bytes())?;
            write(&keys, &k.to_bytes())?;
            println!("profile {profile}, range bits {range_bits}");
            Ok(true)
        }
        Command::Register { common, ledger, id, features, bits, seed, out } => {
            check_params(profile, &common)?;
            let f0 = load_features(&features, bits)?;
            let mut state = if ledger.exists() {
                in_file(&ledger, LedgerState::<G>::load(&ledger))?
            } else {
                LedgerState::new()
            };
            let record = register::<G, _>(id.as_bytes(), &f0, &mut *rng(seed))?;
            state.register_identity(id.as_bytes(), record.c0.clone())?;
            write(&out, &record.to_bytes())?;
            in_file(&ledger, state.save(&ledger))?;
            println!("registered {id:?} with {} features", f0.len());
            Ok(true)
        }
        Command::Prove {
            common,
            keys,
            record,
            features,
            epsilon,
            nonce,
            mode,
            paper_faithful,
            seed,
            out,
            force_negative_test,
        } => {
            let mode = if paper_faithful { RelationMode::PaperFaithful } else { mode };
            check_params(profile, &common)?;
            let keys = load_keys::<G>(&keys)?;
            let record_path = record;
            let mut record =
                in_file(&record_path, RegistrationRecord::<G>::from_bytes(&read(&record_path)?))?;
            let f1 = load_features(&features, record.f0.bits())?;
            let req = AuthRequest {
                keys: &keys,
                f1: &f1,
                nonce: nonce.unwrap_or_else(|| record.next_nonce()),
                epsilon,
                mode,
            };
            let mut rng = rng(seed);
            let gamma = if force_negative_test {
                generate_auth_proof_unchecked_for_testing(&mut record, &req, &mut *rng)?
            } else {
                generate_auth_proof(&mut record, &req, &mut *rng)?
            };
            let bytes = gamma.to_bytes();
            write(&out, &bytes)?;
            write(&record_path, &record.to_bytes())?;
            println!("nonce {}, |Γ| {} bytes, |π| {} bytes", req.nonce, bytes.len(), gamma.pi.len());
            Ok(true)
        }
        Command::Verify { common, keys, ledger, epsilon, proof } => {
            check_params(profile, &common)?;
            let keys = load_keys::<G>(&keys)?;
            let mut state = in_file(&ledger, LedgerState::<G>::load(&ledger))?;
            let outcome = state.verify_auth_bytes(&keys.vk, epsilon, &read(&proof)?);
            in_file(&ledger, state.save(&ledger))?;
            let (c, r) = (outcome.cost.commitment_layer, outcome.cost.range_proof);
            println!("{}", outcome.verdict);
            println!(
                "cost: commitment layer {} exp {} mul {} hash; range proof {} exp {} mul {} hash",
                c.exponentiations,
                c.multiplications,
                c.hashes,
                r.exponentiations,
                r.multiplications,
                r.hashes
            );
            Ok(outcome.verdict.is_pass())
        }
        Command::ReverifyLog { common, ledger } => {
            check_params(profile, &common)?;
            let state = in_file(&ledger, LedgerState::<G>::load(&ledger))?;
            let report = state.reverify_log();
            println!(
                "{} registrations, {} authentications ({} passed)",
                report.registrations, report.authentications, report.passes
            );
            for i in &report.mismatches {
                println!("event {i}: recomputed outcome differs from the log");
            }
            if !report.registry_matches {
                println!("replayed registry differs from the stored one");
            }
            println!("{}", if report.is_consistent() { "consistent" } else { "inconsistent" });
            Ok(report.is_consistent())
        }
        Command::Bench { bench } => {
            let config = BenchConfig {
                sizes: bench.sizes,
                trials: bench.trials,
                seed: bench.seed,
                feature_bits: bench.bits,
                range_bits: bench.range_bits,
                epsilon: bench.epsilon,
                mode: if bench.paper_faithful { RelationMode::PaperFaithful } else { bench.mode },
            };
            let records = run_bench::<G>(&config)?;
            let file = io(&bench.out, fs::File::create(&bench.out))?;
            in_file(&bench.out, write_csv(&records, file))?;
            let summary = summarize(&records);
            print!("{summary}");
            Ok(summary.all_pass())
        }
        Command::Synth { .. } => unreachable!("handled before group dispatch"),
    }
}

fn synth(seed: u64, len: usize, bits: u32, distance: &str, enroll: &Path, probe: &Path) -> Result<(), Usage> {
    let target = match distance {
        "random" => TargetDistance::Random,
        d => TargetDistance::Exact(
            d.parse().map_err(|_| Usage(format!("distance must be an integer or \"random\", got {d:?}")))?,
        ),
    };
    let pair = synth_features(seed, len, bits, target)?;
    write(enroll, pair.f0.to_text().as_bytes())?;
    write(probe, pair.f1.to_text().as_bytes())?;
    println!("distance {}", pair.distance);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth { seed, len, bits, distance, enroll, probe } => {
            synth(seed, len, bits, &distance, &enroll, &probe).map(|()| true)
        }
        command => match cli.profile {
            Profile::Toy => run::<ToyGroup>(cli.profile, command),
            Profile::Production => run::<Ristretto255>(cli.profile, command),
            Profile::Modp2048 => run::<Modp2048>(cli.profile, command),
        },
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
