//! The system model around the trees: notaries producing hash-chained signed
//! blocks (discrete time), journals committing verifiable-map roots to a
//! notary, portable transfer packages, externally checkable commitments, and
//! nested proofs across hierarchies of maps.
//!
//! A notary is a single Ed25519 signer. Block `i` signs
//! `H(index || root || prev_hash)` with the index as 8 big-endian bytes, and
//! block `i + 1` chains to it through the hash of the whole signed record.
//! Journals have a single-writer contract: one mutator at a time, any number
//! of readers holding snapshots. Verification functions are pure.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use ed25519_dalek::{Signature, Signer, SigningKey, VerifyingKey};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::compose::{
    decode_multiproof, encode_multiproof, merge_tree, resplit, split_tree, ComposeError,
    DerivativeTree, Entry,
};
use crate::hash::{sha256_concat, Digest, DigestError, EMPTY};
use crate::merkle::{
    build_tree, digest_key, verify_proof, walk, Key, MerkleError, TreeNode, Value, VerifiableMap,
};

/// Current transfer-package format version.
pub const PACKAGE_FORMAT_VERSION: u32 = 1;

/// A 64-byte Ed25519 signature, hex-encoded in all textual formats.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SignatureBytes([u8; 64]);

impl SignatureBytes {
    pub fn new(bytes: [u8; 64]) -> Self {
        SignatureBytes(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 64] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, DigestError> {
        if s.len() != 128 {
            return Err(DigestError::Length {
                expected: 128,
                got: s.len(),
            });
        }
        let mut bytes = [0u8; 64];
        hex::decode_to_slice(s, &mut bytes)?;
        Ok(SignatureBytes(bytes))
    }
}

impl fmt::Debug for SignatureBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SignatureBytes({})", self.to_hex())
    }
}

impl fmt::Display for SignatureBytes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for SignatureBytes {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for SignatureBytes {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        SignatureBytes::from_hex(&s).map_err(de::Error::custom)
    }
}

/// One notarized point in discrete time: a verifiable-map root at a block
/// index, chained to the previous block and signed by the notary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub index: u64,
    pub root: Digest,
    pub prev_hash: Digest,
    pub signature: SignatureBytes,
}

impl Block {
    /// The digest the notary signs: `H(index || root || prev_hash)`.
    pub fn signing_digest(index: u64, root: &Digest, prev_hash: &Digest) -> Digest {
        sha256_concat(&[&index.to_be_bytes(), root.as_bytes(), prev_hash.as_bytes()])
    }

    /// Digest of the whole record including the signature; the next block's
    /// `prev_hash`.
    pub fn record_hash(&self) -> Digest {
        sha256_concat(&[
            &self.index.to_be_bytes(),
            self.root.as_bytes(),
            self.prev_hash.as_bytes(),
            self.signature.as_bytes(),
        ])
    }
}

/// Errors from the notary/journal layer, including package verification and
/// on-disk state handling.
#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("signature verification failed")]
    Signature,
    #[error("block {0} not found")]
    BlockNotFound(u64),
    #[error("unsupported package format version {0}")]
    UnsupportedVersion(u32),
    #[error("hierarchy mismatch: {0}")]
    Hierarchy(String),
    #[error("corrupt journal state: {0}")]
    CorruptState(String),
    #[error(transparent)]
    Merkle(#[from] MerkleError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Digest(#[from] DigestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The single signer whose append-only chain of blocks defines discrete time.
pub struct Notary {
    id: String,
    signing_key: SigningKey,
    chain: Vec<Block>,
}

impl Notary {
    pub fn new(id: impl Into<String>, signing_key: SigningKey) -> Self {
        Notary {
            id: id.into(),
            signing_key,
            chain: Vec::new(),
        }
    }

    /// Deterministic notary from a 32-byte seed. Test and tooling aid; real
    /// deployments should feed fresh randomness to [`Notary::new`].
    pub fn from_seed(id: impl Into<String>, seed: [u8; 32]) -> Self {
        Notary::new(id, SigningKey::from_bytes(&seed))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn verifying_key(&self) -> VerifyingKey {
        self.signing_key.verifying_key()
    }

    pub fn chain(&self) -> &[Block] {
        &self.chain
    }

    pub fn secret_key_bytes(&self) -> [u8; 32] {
        self.signing_key.to_bytes()
    }

    /// Appends a block committing `root` at index `chain.len()`. Genesis
    /// chains to [`EMPTY`].
    pub fn append(&mut self, root: Digest) -> Block {
        let index = self.chain.len() as u64;
        let prev_hash = self.chain.last().map(Block::record_hash).unwrap_or(EMPTY);
        let message = Block::signing_digest(index, &root, &prev_hash);
        let signature = self.signing_key.sign(message.as_bytes());
        let block = Block {
            index,
            root,
            prev_hash,
            signature: SignatureBytes(signature.to_bytes()),
        };
        self.chain.push(block);
        block
    }

    fn restore(id: String, signing_key: SigningKey, chain: Vec<Block>) -> Self {
        Notary {
            id,
            signing_key,
            chain,
        }
    }
}

/// Checks one block: its signature, and its position relative to `prev`
/// (genesis when `prev` is absent).
pub fn verify_block(block: &Block, key: &VerifyingKey, prev: Option<&Block>) -> bool {
    let message = Block::signing_digest(block.index, &block.root, &block.prev_hash);
    let signature = Signature::from_bytes(block.signature.as_bytes());
    if key.verify_strict(message.as_bytes(), &signature).is_err() {
        return false;
    }
    match prev {
        None => block.index == 0 && block.prev_hash == EMPTY,
        Some(prev) => block.index == prev.index + 1 && block.prev_hash == prev.record_hash(),
    }
}

/// Checks a whole chain pairwise, genesis first. An empty chain verifies.
pub fn verify_chain(blocks: &[Block], key: &VerifyingKey) -> bool {
    blocks
        .iter()
        .enumerate()
        .all(|(i, block)| verify_block(block, key, if i == 0 { None } else { Some(&blocks[i - 1]) }))
}

struct JournalSnapshot {
    root: Digest,
    map: VerifiableMap,
}

/// The party maintaining a verifiable map over time: every commit rebuilds
/// the tree, notarizes the new root, and snapshots the map at that block.
pub struct Journal {
    notary: Notary,
    map: VerifiableMap,
    tree: Option<TreeNode>,
    history: Vec<JournalSnapshot>,
}

impl Journal {
    /// A journal over a fresh notary (empty chain).
    pub fn new(notary: Notary) -> Self {
        Journal {
            notary,
            map: VerifiableMap::new(),
            tree: None,
            history: Vec::new(),
        }
    }

    pub fn notary(&self) -> &Notary {
        &self.notary
    }

    /// Number of committed blocks.
    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    pub fn current_map(&self) -> &VerifiableMap {
        &self.map
    }

    pub fn current_root(&self) -> Option<Digest> {
        self.history.last().map(|s| s.root)
    }

    pub fn block(&self, index: u64) -> Option<&Block> {
        self.notary.chain().get(index as usize)
    }

    pub fn root_at(&self, index: u64) -> Option<Digest> {
        self.history.get(index as usize).map(|s| s.root)
    }

    pub fn map_at(&self, index: u64) -> Option<&VerifiableMap> {
        self.history.get(index as usize).map(|s| &s.map)
    }

    /// Applies inserts/overwrites, rebuilds the tree, and notarizes the new
    /// root. On error the journal is unchanged.
    pub fn commit(&mut self, updates: &[(Key, Value)]) -> Result<Block, LedgerError> {
        let mut map = self.map.clone();
        for (key, value) in updates {
            map.insert(*key, *value);
        }
        let tree = build_tree(&map)?;
        let root = tree.hash();
        let block = self.notary.append(root);
        self.history.push(JournalSnapshot {
            root,
            map: map.clone(),
        });
        self.map = map;
        self.tree = Some(tree);
        Ok(block)
    }

    fn snapshot(&self, block_index: u64) -> Result<&JournalSnapshot, LedgerError> {
        self.history
            .get(block_index as usize)
            .ok_or(LedgerError::BlockNotFound(block_index))
    }

    /// The cached current tree, when `block_index` is the latest block.
    fn cached_tree(&self, block_index: u64) -> Option<&TreeNode> {
        (block_index as usize + 1 == self.history.len())
            .then_some(self.tree.as_ref())
            .flatten()
    }

    /// Splits the requested keys out of the snapshot at `block_index` into a
    /// portable package. With `use_multiproof` the entries are merged and
    /// serialized as one pruned tree instead of an entry list.
    pub fn export_package(
        &self,
        block_index: u64,
        keys: &[Key],
        use_multiproof: bool,
    ) -> Result<TransferPackage, LedgerError> {
        let snapshot = self.snapshot(block_index)?;
        let built;
        let tree = match self.cached_tree(block_index) {
            Some(tree) => tree,
            None => {
                built = build_tree(&snapshot.map)?;
                &built
            }
        };
        let selection: VerifiableMap = keys
            .iter()
            .map(|key| {
                snapshot
                    .map
                    .get(key)
                    .map(|value| (*key, *value))
                    .ok_or(LedgerError::Merkle(MerkleError::KeyNotFound))
            })
            .collect::<Result<_, _>>()?;
        let entries = split_tree(&selection, tree)?;
        let block = *self
            .block(block_index)
            .ok_or(LedgerError::BlockNotFound(block_index))?;
        let payload = if use_multiproof {
            let derivative = merge_tree(&entries, Some(&block.root))?;
            PackagePayload::Multiproof(encode_multiproof(&derivative).into_bytes())
        } else {
            PackagePayload::Entries(entries)
        };
        Ok(TransferPackage {
            format_version: PACKAGE_FORMAT_VERSION,
            notary_id: self.notary.id().to_string(),
            block,
            payload,
        })
    }

    /// A single externally verifiable provenance claim for `key` at
    /// `block_index`.
    pub fn commitment(&self, block_index: u64, key: &Key) -> Result<Commitment, LedgerError> {
        let snapshot = self.snapshot(block_index)?;
        let value = *snapshot
            .map
            .get(key)
            .ok_or(LedgerError::Merkle(MerkleError::KeyNotFound))?;
        let built;
        let tree = match self.cached_tree(block_index) {
            Some(tree) => tree,
            None => {
                built = build_tree(&snapshot.map)?;
                &built
            }
        };
        let (_, proof) = walk(tree, key)?;
        let block = *self
            .block(block_index)
            .ok_or(LedgerError::BlockNotFound(block_index))?;
        Ok(Commitment {
            notary_id: self.notary.id().to_string(),
            block,
            entry: Entry {
                key: *key,
                value,
                proof,
            },
        })
    }

    /// Migrates a foreign package under this journal's own chain: verifies
    /// it, then commits `digest_key(notary_id || block_index) → foreign root`
    /// into the local map. The foreign content stays verifiable against its
    /// own block and becomes provable under the local chain through a
    /// two-segment [`NestedProof`]. A failed package leaves the journal
    /// untouched.
    pub fn adopt_package(
        &mut self,
        package: &TransferPackage,
        notary_key: &VerifyingKey,
    ) -> Result<Block, LedgerError> {
        verify_package(package, notary_key)?;
        let key = adoption_key(&package.notary_id, package.block.index);
        let value = Value::from_digest(package.block.root);
        self.commit(&[(key, value)])
    }
}

/// The key a foreign block root is filed under when adopted:
/// `digest_key(notary_id || index_be8)`.
pub fn adoption_key(notary_id: &str, block_index: u64) -> Key {
    let mut name = Vec::with_capacity(notary_id.len() + 8);
    name.extend_from_slice(notary_id.as_bytes());
    name.extend_from_slice(&block_index.to_be_bytes());
    digest_key(&name)
}

/// A provenance claim: one entry plus the notarized block it verifies
/// against. Everything a verifier needs besides the notary public key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub notary_id: String,
    pub block: Block,
    pub entry: Entry,
}

impl Commitment {
    pub fn block_index(&self) -> u64 {
        self.block.index
    }

    pub fn root(&self) -> Digest {
        self.block.root
    }
}

/// True iff the entry's proof folds to the block root and the block
/// signature verifies under `key`. Pure.
pub fn verify_commitment(commitment: &Commitment, key: &VerifyingKey) -> bool {
    let block = &commitment.block;
    let message = Block::signing_digest(block.index, &block.root, &block.prev_hash);
    let signature = Signature::from_bytes(block.signature.as_bytes());
    if key.verify_strict(message.as_bytes(), &signature).is_err() {
        return false;
    }
    verify_proof(
        &block.root,
        &commitment.entry.key,
        &commitment.entry.value,
        &commitment.entry.proof,
    )
}

/// Transfer payload: either a plain entry list or multiproof bytes
/// (base64 in JSON).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "payload_kind", content = "payload", rename_all = "lowercase")]
pub enum PackagePayload {
    Entries(Vec<Entry>),
    Multiproof(#[serde(with = "base64_bytes")] Vec<u8>),
}

mod base64_bytes {
    use base64::engine::general_purpose::STANDARD;
    use base64::Engine as _;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(deserializer)?;
        STANDARD.decode(s).map_err(de::Error::custom)
    }
}

/// The unit moved between archives: a signed block plus the payload that
/// merges to its root. Serialized as JSON with hex digests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferPackage {
    pub format_version: u32,
    pub notary_id: String,
    pub block: Block,
    #[serde(flatten)]
    pub payload: PackagePayload,
}

impl TransferPackage {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<TransferPackage, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Verifies a package standalone and decodes its payload into a derivative
/// tree: checks the format version, the block signature under `key`, and
/// that the payload merges (or decodes) to exactly `block.root`.
pub fn verify_package(
    package: &TransferPackage,
    key: &VerifyingKey,
) -> Result<DerivativeTree, LedgerError> {
    if package.format_version != PACKAGE_FORMAT_VERSION {
        return Err(LedgerError::UnsupportedVersion(package.format_version));
    }
    let block = &package.block;
    let message = Block::signing_digest(block.index, &block.root, &block.prev_hash);
    let signature = Signature::from_bytes(block.signature.as_bytes());
    if key.verify_strict(message.as_bytes(), &signature).is_err() {
        return Err(LedgerError::Signature);
    }
    let derivative = match &package.payload {
        PackagePayload::Entries(entries) => merge_tree(entries, Some(&block.root))?,
        PackagePayload::Multiproof(bytes) => {
            let derivative = decode_multiproof(bytes)?;
            if derivative.source_root() != block.root {
                return Err(ComposeError::RootMismatch {
                    expected: block.root,
                    actual: derivative.source_root(),
                }
                .into());
            }
            derivative
        }
    };
    Ok(derivative)
}

/// An importing archive's collection of derivative trees, keyed by
/// `(notary_id, block_index)`.
#[derive(Default)]
pub struct DerivativeStore {
    items: BTreeMap<(String, u64), DerivativeTree>,
}

impl DerivativeStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, notary_id: &str, block_index: u64) -> Option<&DerivativeTree> {
        self.items.get(&(notary_id.to_string(), block_index))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, u64), &DerivativeTree)> {
        self.items.iter()
    }

    /// Inserts a derivative directly, replacing any existing one. Intended
    /// for reloading persisted state; imports should go through
    /// [`DerivativeStore::import_package`].
    pub fn insert(&mut self, notary_id: impl Into<String>, block_index: u64, tree: DerivativeTree) {
        self.items.insert((notary_id.into(), block_index), tree);
    }

    /// Verifies and stores a package. Re-importing under the same
    /// `(notary_id, block_index)` merges the key sets: the union of old and
    /// new entries must still reproduce the block root, so importing the
    /// same package twice is a no-op.
    pub fn import_package(
        &mut self,
        package: &TransferPackage,
        key: &VerifyingKey,
    ) -> Result<&DerivativeTree, LedgerError> {
        let incoming = verify_package(package, key)?;
        let slot = (package.notary_id.clone(), package.block.index);
        let merged = match self.items.get(&slot) {
            None => incoming,
            Some(existing) => union_derivatives(existing, &incoming, &package.block.root)?,
        };
        self.items.insert(slot.clone(), merged);
        Ok(&self.items[&slot])
    }
}

/// Re-merges the union of two derivatives of the same source tree.
fn union_derivatives(
    a: &DerivativeTree,
    b: &DerivativeTree,
    expected_root: &Digest,
) -> Result<DerivativeTree, LedgerError> {
    let keys_a: Vec<Key> = a.leaves().into_iter().map(|(k, _)| k).collect();
    let keys_b: Vec<Key> = b.leaves().into_iter().map(|(k, _)| k).collect();
    let mut union: BTreeMap<Key, Entry> = resplit(a, &keys_a)?
        .into_iter()
        .map(|e| (e.key, e))
        .collect();
    for entry in resplit(b, &keys_b)? {
        match union.get(&entry.key) {
            None => {
                union.insert(entry.key, entry);
            }
            Some(existing) if *existing == entry => {}
            Some(_) => {
                return Err(ComposeError::Conflict {
                    depth: entry.proof.len(),
                }
                .into())
            }
        }
    }
    let entries: Vec<Entry> = union.into_values().collect();
    Ok(merge_tree(&entries, Some(expected_root))?)
}

/// A proof chain across a hierarchy of maps: segment `j`'s value is the root
/// segment `j + 1` verifies against; the last value is the content digest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestedProof {
    pub segments: Vec<Entry>,
}

/// Extracts a nested proof along `path`, one key per hierarchy level.
/// `levels[j]` must be the tree whose map holds `path[j]`.
pub fn get_nested_proof(levels: &[&TreeNode], path: &[Key]) -> Result<NestedProof, LedgerError> {
    if levels.is_empty() || levels.len() != path.len() {
        return Err(LedgerError::Hierarchy(format!(
            "{} levels for {} path keys",
            levels.len(),
            path.len()
        )));
    }
    let segments = levels
        .iter()
        .zip(path)
        .map(|(tree, key)| {
            let (value, proof) = walk(tree, key)?;
            Ok(Entry {
                key: *key,
                value,
                proof,
            })
        })
        .collect::<Result<Vec<_>, LedgerError>>()?;
    Ok(NestedProof { segments })
}

/// Folds [`verify_proof`] across the segments, requiring each value to be
/// the next segment's root. All-or-nothing; an empty chain is false.
pub fn verify_nested(root: &Digest, proof: &NestedProof) -> bool {
    if proof.segments.is_empty() {
        return false;
    }
    let mut current = *root;
    for segment in &proof.segments {
        if !verify_proof(&current, &segment.key, &segment.value, &segment.proof) {
            return false;
        }
        current = segment.value.digest();
    }
    true
}

#[derive(Serialize, Deserialize)]
struct ChainFile {
    notary_id: String,
    public_key: String,
    secret_key: String,
    blocks: Vec<Block>,
}

fn snapshot_path(dir: &Path, index: usize) -> std::path::PathBuf {
    dir.join(format!("snapshot-{index}.json"))
}

impl Journal {
    /// Persists the journal as a directory: `chain.json` (notary identity,
    /// key pair and block chain) plus one `snapshot-<index>.json` per block
    /// mapping hex keys to hex values.
    pub fn save(&self, dir: &Path) -> Result<(), LedgerError> {
        fs::create_dir_all(dir)?;
        let chain_file = ChainFile {
            notary_id: self.notary.id().to_string(),
            public_key: hex::encode(self.notary.verifying_key().to_bytes()),
            secret_key: hex::encode(self.notary.secret_key_bytes()),
            blocks: self.notary.chain().to_vec(),
        };
        fs::write(
            dir.join("chain.json"),
            serde_json::to_string_pretty(&chain_file)?,
        )?;
        for (index, snapshot) in self.history.iter().enumerate() {
            let map: BTreeMap<String, String> = snapshot
                .map
                .iter()
                .map(|(k, v)| (k.to_hex(), v.to_hex()))
                .collect();
            fs::write(
                snapshot_path(dir, index),
                serde_json::to_string_pretty(&map)?,
            )?;
        }
        Ok(())
    }

    /// Restores a journal from [`Journal::save`] output, verifying the chain
    /// signatures and that every snapshot still hashes to its block root.
    pub fn load(dir: &Path) -> Result<Journal, LedgerError> {
        let chain_file: ChainFile =
            serde_json::from_str(&fs::read_to_string(dir.join("chain.json"))?)?;
        let secret = decode_key_material(&chain_file.secret_key)?;
        let signing_key = SigningKey::from_bytes(&secret);
        let public = decode_key_material(&chain_file.public_key)?;
        if signing_key.verifying_key().to_bytes() != public {
            return Err(LedgerError::CorruptState(
                "public key does not match secret key".into(),
            ));
        }
        if !verify_chain(&chain_file.blocks, &signing_key.verifying_key()) {
            return Err(LedgerError::Signature);
        }

        let mut history = Vec::with_capacity(chain_file.blocks.len());
        let mut current_tree = None;
        for (index, block) in chain_file.blocks.iter().enumerate() {
            let raw: BTreeMap<String, String> =
                serde_json::from_str(&fs::read_to_string(snapshot_path(dir, index))?)?;
            let mut map = VerifiableMap::new();
            for (k, v) in &raw {
                map.insert(Key::from_hex(k)?, Value::from_hex(v)?);
            }
            let tree = build_tree(&map)?;
            if tree.hash() != block.root {
                return Err(LedgerError::CorruptState(format!(
                    "snapshot {index} does not hash to its block root"
                )));
            }
            history.push(JournalSnapshot {
                root: block.root,
                map,
            });
            current_tree = Some(tree);
        }

        let map = history
            .last()
            .map(|s| s.map.clone())
            .unwrap_or_default();
        Ok(Journal {
            notary: Notary::restore(chain_file.notary_id, signing_key, chain_file.blocks),
            map,
            tree: current_tree,
            history,
        })
    }
}

fn decode_key_material(hex_str: &str) -> Result<[u8; 32], LedgerError> {
    if hex_str.len() != 64 {
        return Err(LedgerError::CorruptState("key material must be 64 hex chars".into()));
    }
    let mut bytes = [0u8; 32];
    hex::decode_to_slice(hex_str, &mut bytes)
        .map_err(|e| LedgerError::CorruptState(format!("bad key material hex: {e}")))?;
    Ok(bytes)
}
