//! On-disk layout of an importing archive's derivative store.
//!
//! A store directory holds `store.json` — known notary public keys plus an
//! index of imported derivatives — and one `.mp` multiproof file per
//! `(notary, block)` slot.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use provmap::hash::sha256;
use provmap::{decode_multiproof, DerivativeStore};
use serde::{Deserialize, Serialize};

use crate::commands::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StoreMeta {
    /// notary_id → 64-char hex public key, recorded on first import.
    pub notaries: BTreeMap<String, String>,
    pub derivatives: Vec<DerivativeRef>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DerivativeRef {
    pub notary_id: String,
    pub block_index: u64,
    pub file: String,
}

fn meta_path(dir: &Path) -> PathBuf {
    dir.join("store.json")
}

/// File name for a slot: a short hash of the notary id keeps arbitrary ids
/// path-safe.
pub fn derivative_file_name(notary_id: &str, block_index: u64) -> String {
    let tag = sha256(notary_id.as_bytes()).to_hex();
    format!("{}-{block_index}.mp", &tag[..16])
}

pub fn load(dir: &Path) -> Result<(StoreMeta, DerivativeStore), CliError> {
    let mut store = DerivativeStore::new();
    let meta: StoreMeta = match fs::read_to_string(meta_path(dir)) {
        Ok(text) => serde_json::from_str(&text)
            .map_err(|e| CliError::Malformed(format!("unreadable store.json: {e}")))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => StoreMeta::default(),
        Err(e) => return Err(CliError::Malformed(format!("cannot read store.json: {e}"))),
    };
    for item in &meta.derivatives {
        let bytes = fs::read(dir.join(&item.file)).map_err(|e| {
            CliError::Malformed(format!("cannot read derivative {}: {e}", item.file))
        })?;
        let tree = decode_multiproof(&bytes)
            .map_err(|e| CliError::Malformed(format!("corrupt derivative {}: {e}", item.file)))?;
        store.insert(item.notary_id.clone(), item.block_index, tree);
    }
    Ok((meta, store))
}

pub fn save(dir: &Path, meta: &StoreMeta, store: &DerivativeStore) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Malformed(format!("cannot create store dir: {e}")))?;
    for item in &meta.derivatives {
        let tree = store
            .get(&item.notary_id, item.block_index)
            .expect("index entry without derivative");
        let bytes = provmap::encode_multiproof(tree);
        fs::write(dir.join(&item.file), bytes.as_bytes())
            .map_err(|e| CliError::Malformed(format!("cannot write {}: {e}", item.file)))?;
    }
    let text = serde_json::to_string_pretty(meta)
        .map_err(|e| CliError::Malformed(format!("cannot encode store.json: {e}")))?;
    fs::write(meta_path(dir), text)
        .map_err(|e| CliError::Malformed(format!("cannot write store.json: {e}")))?;
    Ok(())
}
