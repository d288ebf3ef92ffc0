//! Command implementations and the error → exit-code mapping.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed input,
//! 3 configuration error.

use std::fs;
use std::path::Path;

use provmap::{
    digest_key, Commitment, ComposeError, Journal, Key, LedgerError, Notary, SigningKey,
    TransferPackage, Value, VerifyingKey,
};
use provmap_cli::bench::{self, BenchConfig, BenchError};
use thiserror::Error;

use crate::store::{self, derivative_file_name, DerivativeRef};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Verification(String),
    #[error("{0}")]
    Malformed(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Malformed(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

impl From<LedgerError> for CliError {
    fn from(err: LedgerError) -> Self {
        match &err {
            LedgerError::Signature | LedgerError::CorruptState(_) => {
                CliError::Verification(err.to_string())
            }
            LedgerError::Compose(compose) => match compose {
                ComposeError::RootMismatch { .. }
                | ComposeError::Conflict { .. }
                | ComposeError::DuplicateKey(_)
                | ComposeError::MalformedProof { .. }
                | ComposeError::Merkle(_) => CliError::Verification(err.to_string()),
                ComposeError::Decode(_) | ComposeError::EmptySequence => {
                    CliError::Malformed(err.to_string())
                }
            },
            _ => CliError::Malformed(err.to_string()),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(err: BenchError) -> Self {
        match err {
            BenchError::Config(_) => CliError::Config(err.to_string()),
            BenchError::Merge { .. } => CliError::Verification(err.to_string()),
        }
    }
}

fn load_journal(dir: &Path) -> Result<Journal, CliError> {
    Journal::load(dir).map_err(|e| match e {
        LedgerError::Io(io) => {
            CliError::Malformed(format!("cannot read journal at {}: {io}", dir.display()))
        }
        other => other.into(),
    })
}

fn parse_pubkey(hex_str: &str) -> Result<VerifyingKey, CliError> {
    let mut bytes = [0u8; 32];
    if hex_str.len() != 64 {
        return Err(CliError::Malformed("public key must be 64 hex characters".into()));
    }
    hex::decode_to_slice(hex_str, &mut bytes)
        .map_err(|e| CliError::Malformed(format!("bad public key hex: {e}")))?;
    VerifyingKey::from_bytes(&bytes)
        .map_err(|e| CliError::Malformed(format!("invalid public key: {e}")))
}

fn read_package(path: &Path) -> Result<TransferPackage, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))?;
    TransferPackage::from_json(&text)
        .map_err(|e| CliError::Malformed(format!("invalid package {}: {e}", path.display())))
}

pub fn init(dir: &Path, id: Option<String>) -> Result<(), CliError> {
    if dir.join("chain.json").exists() {
        return Err(CliError::Malformed(format!(
            "{} already holds a journal",
            dir.display()
        )));
    }
    let seed: [u8; 32] = rand::random();
    let signing_key = SigningKey::from_bytes(&seed);
    let pubkey = hex::encode(signing_key.verifying_key().to_bytes());
    let id = id.unwrap_or_else(|| format!("notary-{}", &pubkey[..8]));
    let journal = Journal::new(Notary::new(id.clone(), signing_key));
    journal.save(dir)?;
    println!("initialized journal at {}", dir.display());
    println!("notary id:  {id}");
    println!("public key: {pubkey}");
    Ok(())
}

pub fn commit(dir: &Path, kv: &[String]) -> Result<(), CliError> {
    let mut journal = load_journal(dir)?;
    let mut updates: Vec<(Key, Value)> = Vec::with_capacity(kv.len());
    for item in kv {
        let (name, file) = item.split_once('=').ok_or_else(|| {
            CliError::Malformed(format!("--kv expects key=file, got '{item}'"))
        })?;
        let content = fs::read(file)
            .map_err(|e| CliError::Malformed(format!("cannot read {file}: {e}")))?;
        updates.push((
            digest_key(name.as_bytes()),
            Value::from_digest(provmap::hash::sha256(&content)),
        ));
    }
    let block = journal.commit(&updates)?;
    journal.save(dir)?;
    println!("block {} root {}", block.index, block.root);
    Ok(())
}

fn parse_keys(keys: &str) -> Result<Vec<Key>, CliError> {
    let parsed: Vec<Key> = keys
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|name| digest_key(name.as_bytes()))
        .collect();
    if parsed.is_empty() {
        return Err(CliError::Config("no keys given".into()));
    }
    Ok(parsed)
}

pub fn export(
    dir: &Path,
    block: u64,
    keys: &str,
    multiproof: bool,
    output: &Path,
) -> Result<(), CliError> {
    let journal = load_journal(dir)?;
    let package = journal.export_package(block, &parse_keys(keys)?, multiproof)?;
    let json = package
        .to_json()
        .map_err(|e| CliError::Malformed(format!("cannot encode package: {e}")))?;
    fs::write(output, json)
        .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", output.display())))?;
    println!(
        "exported block {} ({} payload) to {}",
        block,
        if multiproof { "multiproof" } else { "entries" },
        output.display()
    );
    Ok(())
}

pub fn import(store_dir: &Path, package_path: &Path, pubkey: Option<String>) -> Result<(), CliError> {
    let package = read_package(package_path)?;
    let (mut meta, mut derivatives) = store::load(store_dir)?;

    let recorded = meta.notaries.get(&package.notary_id).cloned();
    let pubkey_hex = match (pubkey, recorded) {
        (Some(given), Some(known)) if given != known => {
            return Err(CliError::Verification(format!(
                "public key for notary '{}' differs from the one on record",
                package.notary_id
            )));
        }
        (Some(given), _) => given,
        (None, Some(known)) => known,
        (None, None) => {
            return Err(CliError::Config(format!(
                "unknown notary '{}': pass --pubkey on first import",
                package.notary_id
            )));
        }
    };
    let key = parse_pubkey(&pubkey_hex)?;

    let derivative = derivatives.import_package(&package, &key)?;
    println!(
        "imported {} entries for block {} of '{}' (root {})",
        derivative.leaves().len(),
        package.block.index,
        package.notary_id,
        derivative.source_root()
    );

    meta.notaries.insert(package.notary_id.clone(), pubkey_hex);
    let file = derivative_file_name(&package.notary_id, package.block.index);
    if !meta.derivatives.iter().any(|d| d.file == file) {
        meta.derivatives.push(DerivativeRef {
            notary_id: package.notary_id.clone(),
            block_index: package.block.index,
            file,
        });
    }
    store::save(store_dir, &meta, &derivatives)
}

pub fn adopt(dir: &Path, package_path: &Path, pubkey: Option<String>) -> Result<(), CliError> {
    let package = read_package(package_path)?;
    let pubkey = pubkey.ok_or_else(|| {
        CliError::Config("adopting a foreign package requires --pubkey".into())
    })?;
    let key = parse_pubkey(&pubkey)?;
    let mut journal = load_journal(dir)?;
    let block = journal.adopt_package(&package, &key)?;
    journal.save(dir)?;
    println!(
        "adopted block {} of '{}' as local block {} (root {})",
        package.block.index, package.notary_id, block.index, block.root
    );
    Ok(())
}

pub fn verify(commitment_path: &Path, pubkey: &str) -> Result<(), CliError> {
    let text = fs::read_to_string(commitment_path).map_err(|e| {
        CliError::Malformed(format!("cannot read {}: {e}", commitment_path.display()))
    })?;
    let commitment: Commitment = serde_json::from_str(&text).map_err(|e| {
        CliError::Malformed(format!("invalid commitment {}: {e}", commitment_path.display()))
    })?;
    let key = parse_pubkey(pubkey)?;
    if provmap::verify_commitment(&commitment, &key) {
        println!(
            "valid: key {} at block {} under notary '{}'",
            commitment.entry.key.to_hex(),
            commitment.block_index(),
            commitment.notary_id
        );
        Ok(())
    } else {
        Err(CliError::Verification("commitment does not verify".into()))
    }
}

pub fn commitment(dir: &Path, block: u64, key_name: &str, output: &Path) -> Result<(), CliError> {
    let journal = load_journal(dir)?;
    let commitment = journal.commitment(block, &digest_key(key_name.as_bytes()))?;
    let json = serde_json::to_string_pretty(&commitment)
        .map_err(|e| CliError::Malformed(format!("cannot encode commitment: {e}")))?;
    fs::write(output, json)
        .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", output.display())))?;
    println!("wrote commitment for '{key_name}' at block {block} to {}", output.display());
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| CliError::Config(format!("bad {what} '{s}': {e}")))
        })
        .collect()
}

pub fn run_bench(
    ratios: &str,
    sizes: &str,
    trials: u32,
    seed: u64,
    output: &Path,
    phases: bool,
) -> Result<(), CliError> {
    let config = BenchConfig {
        ratios: parse_list(ratios, "ratio")?,
        sizes: parse_list(sizes, "size")?,
        trials,
        seed,
    };
    let report = bench::run_bench(&config)?;

    let mut csv = Vec::new();
    bench::write_csv(&report, &mut csv)
        .map_err(|e| CliError::Malformed(format!("cannot encode report: {e}")))?;
    fs::write(output, csv)
        .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", output.display())))?;

    if phases {
        let mut csv = Vec::new();
        bench::write_phase_csv(&report, &mut csv)
            .map_err(|e| CliError::Malformed(format!("cannot encode phase report: {e}")))?;
        let path = output.with_extension("phases.csv");
        fs::write(&path, csv)
            .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", path.display())))?;
        println!("phase report: {}", path.display());
    }

    for summary in &report.summaries {
        println!(
            "ratio {:<6} m {:>8} n {:>9}  geomean {:.6}s  mean {:.6}s",
            summary.ratio, summary.m, summary.n, summary.geomean_seconds, summary.mean_seconds
        );
    }
    if let Ok(slopes) = bench::fit_scaling(&report) {
        for (ratio, slope) in slopes {
            println!("ratio {ratio}: log-log slope of merge time vs m = {slope:.3}");
        }
    }
    println!("report: {}", output.display());
    Ok(())
}
