//! Splitting a verifiable map into independent proof-carrying entries and
//! merging any subset back into a derivative tree that reproduces the source
//! root, plus the compact multiproof and cross-block sequence encodings used
//! when moving entries in bulk.
//!
//! A split of an n-entry map yields n entries whose total sibling count is
//! the sum of the leaf depths (about `n log n` hashes of transfer). Merging
//! m entries costs at most `2·(Σ proof lengths) + 2m` hash computations and
//! reconstructs every pruned sibling as a stub, so the result hashes to the
//! original root. Positions asserted by more than one proof are cross-checked
//! hash by hash: entries from two different source trees can never merge into
//! a silently wrong root.
//!
//! All functions here are pure; inputs are never mutated.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::Digest;
use crate::merkle::{build_tree, get_proof, walk, Key, MerkleError, Proof, TreeNode, Value, VerifiableMap};

/// A `(key, value, proof)` triple: the atomic, self-verifying unit produced
/// by [`split_tree`] and consumed by [`merge_tree`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub key: Key,
    pub value: Value,
    pub proof: Proof,
}

/// A pruned tree rebuilt from entries: real leaves for the merged keys,
/// stubs elsewhere, hashing to the same root as the source tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivativeTree {
    root: TreeNode,
    source_root: Digest,
}

impl DerivativeTree {
    pub fn root_node(&self) -> &TreeNode {
        &self.root
    }

    /// The root this tree reproduces. Always equal to `root_node().hash()`.
    pub fn source_root(&self) -> Digest {
        self.source_root
    }

    /// Leaves present in this derivative, in key order.
    pub fn leaves(&self) -> Vec<(Key, Value)> {
        self.root.leaves()
    }
}

impl From<TreeNode> for DerivativeTree {
    fn from(root: TreeNode) -> Self {
        DerivativeTree {
            source_root: root.hash(),
            root,
        }
    }
}

/// Hash-work accounting for one merge invocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MergeStats {
    /// Number of SHA-256 invocations performed while rebuilding the tree.
    pub hash_invocations: u64,
}

/// The multiproof wire format: a pre-order stream of tagged nodes.
///
/// Tag `0x00` is a leaf followed by 32 key bytes and 32 value bytes; `0x01`
/// is an internal node whose left then right subtrees follow; `0x02` is a
/// stub followed by its 32 hash bytes. Hashes shared by several proofs appear
/// exactly once, which is what makes this strictly smaller than a list of
/// independent entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multiproof(Vec<u8>);

impl Multiproof {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Multiproof(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

const TAG_LEAF: u8 = 0x00;
const TAG_INTERNAL: u8 = 0x01;
const TAG_STUB: u8 = 0x02;

/// One step of a [`SequenceDelta`]: the entries whose key → value binding
/// changed versus the previous block, carrying proofs against `new_root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceStep {
    pub block_index: u64,
    pub changed: Vec<Entry>,
    pub new_root: Digest,
}

/// Delta encoding of successive states of one ledger: the first state in
/// full as a multiproof, then per-block changed-entry lists. Replaying the
/// deltas over the base reproduces each block's root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDelta {
    pub base_index: u64,
    pub base: Multiproof,
    pub deltas: Vec<SequenceStep>,
}

/// Malformed multiproof streams.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("stream truncated")]
    Truncated,
    #[error("{0} trailing bytes after root subtree")]
    TrailingBytes(usize),
    #[error("unknown node tag {0:#04x}")]
    UnknownTag(u8),
    #[error("nesting exceeds the 256-bit key width")]
    DepthLimit,
}

/// Errors from split, merge and the transfer encodings.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ComposeError {
    #[error("duplicate key {0:?} in entry list")]
    DuplicateKey(Key),
    #[error("entries imply different hashes for the same position at depth {depth}")]
    Conflict { depth: usize },
    #[error("merged root {actual} does not match expected root {expected}")]
    RootMismatch { expected: Digest, actual: Digest },
    #[error("proof exhausted before its partition became a single entry (depth {depth})")]
    MalformedProof { depth: usize },
    #[error("multiproof decode failed: {0}")]
    Decode(#[from] DecodeError),
    #[error("sequence has no states")]
    EmptySequence,
    #[error(transparent)]
    Merkle(#[from] MerkleError),
}

/// Decomposes `map` into one self-verifying [`Entry`] per pair, each proof
/// extracted from `tree`.
///
/// `tree` is normally `build_tree(map)` but may be any derivative tree that
/// still contains all of `map`'s keys on stub-free paths.
pub fn split_tree(map: &VerifiableMap, tree: &TreeNode) -> Result<Vec<Entry>, ComposeError> {
    map.iter()
        .map(|(key, value)| {
            let proof = get_proof(tree, key)?;
            Ok(Entry {
                key: *key,
                value: *value,
                proof,
            })
        })
        .collect()
}

/// Recombines entries into a [`DerivativeTree`].
///
/// Entries are sorted by key first, so the result is deterministic for any
/// input order. Every position asserted by more than one proof is checked
/// for agreement, and when `expected_root` is given the final root must
/// match it. See [`ComposeError`] for the failure modes.
pub fn merge_tree(
    entries: &[Entry],
    expected_root: Option<&Digest>,
) -> Result<DerivativeTree, ComposeError> {
    merge_tree_with_stats(entries, expected_root).map(|(tree, _)| tree)
}

/// [`merge_tree`] plus the number of hash computations it performed, which
/// is bounded by `2·(Σ proof lengths) + 2·entries.len()`.
pub fn merge_tree_with_stats(
    entries: &[Entry],
    expected_root: Option<&Digest>,
) -> Result<(DerivativeTree, MergeStats), ComposeError> {
    if entries.is_empty() {
        return Err(MerkleError::EmptyMap.into());
    }
    if entries.iter().any(|e| e.proof.len() > Key::BITS) {
        return Err(ComposeError::MalformedProof { depth: Key::BITS });
    }
    let mut sorted: Vec<&Entry> = entries.iter().collect();
    sorted.sort_by_key(|e| e.key);
    for pair in sorted.windows(2) {
        if pair[0].key == pair[1].key {
            return Err(ComposeError::DuplicateKey(pair[0].key));
        }
    }

    let mut hashes = 0u64;
    let root = merge_node(&sorted, 0, &mut hashes)?;
    let actual = root.hash();
    if let Some(expected) = expected_root {
        if actual != *expected {
            return Err(ComposeError::RootMismatch {
                expected: *expected,
                actual,
            });
        }
    }
    Ok((
        DerivativeTree {
            root,
            source_root: actual,
        },
        MergeStats {
            hash_invocations: hashes,
        },
    ))
}

/// The hash all `claimants` assert for the sibling subtree at `depth`, or
/// `None` when nobody reaches that depth. Disagreement is a conflict.
fn claimed_sibling(claimants: &[&Entry], depth: usize) -> Result<Option<Digest>, ComposeError> {
    let mut claim: Option<Digest> = None;
    for entry in claimants {
        if let Some(hash) = entry.proof.get(depth) {
            match claim {
                None => claim = Some(*hash),
                Some(first) if first != *hash => {
                    return Err(ComposeError::Conflict { depth });
                }
                Some(_) => {}
            }
        }
    }
    Ok(claim)
}

fn merge_node(
    items: &[&Entry],
    depth: usize,
    hashes: &mut u64,
) -> Result<TreeNode, ComposeError> {
    debug_assert!(!items.is_empty());
    if items.len() == 1 && items[0].proof.len() == depth {
        *hashes += 1;
        return Ok(TreeNode::leaf(items[0].key, items[0].value));
    }

    let split = items.partition_point(|e| e.key.bit(depth) == 0);
    let (zeros, ones) = items.split_at(split);

    // Ones descend right, so their proofs name the left subtree, and vice
    // versa. Cross-check the claims before anything else: a mix of entries
    // from different source trees surfaces here as a conflict.
    let claimed_left = claimed_sibling(ones, depth)?;
    let claimed_right = claimed_sibling(zeros, depth)?;

    if items.iter().any(|e| e.proof.len() <= depth) {
        return Err(ComposeError::MalformedProof { depth });
    }

    let left = if zeros.is_empty() {
        let hash = claimed_left.expect("ones nonempty and not exhausted");
        TreeNode::stub(hash)
    } else {
        let node = merge_node(zeros, depth + 1, hashes)?;
        if let Some(claim) = claimed_left {
            if node.hash() != claim {
                return Err(ComposeError::Conflict { depth });
            }
        }
        node
    };

    let right = if ones.is_empty() {
        let hash = claimed_right.expect("zeros nonempty and not exhausted");
        TreeNode::stub(hash)
    } else {
        let node = merge_node(ones, depth + 1, hashes)?;
        if let Some(claim) = claimed_right {
            if node.hash() != claim {
                return Err(ComposeError::Conflict { depth });
            }
        }
        node
    };

    *hashes += 1;
    Ok(TreeNode::internal(left, right))
}

/// Splits a derivative tree again: a derivative is itself a source for
/// further transfer. Requested keys must sit on stub-free paths.
pub fn resplit(derivative: &DerivativeTree, keys: &[Key]) -> Result<Vec<Entry>, ComposeError> {
    keys.iter()
        .map(|key| {
            let (value, proof) = walk(derivative.root_node(), key)?;
            Ok(Entry {
                key: *key,
                value,
                proof,
            })
        })
        .collect()
}

/// Serializes a derivative tree in pre-order. Deterministic; shared interior
/// hashes appear exactly once.
pub fn encode_multiproof(derivative: &DerivativeTree) -> Multiproof {
    let mut out = Vec::new();
    encode_node(derivative.root_node(), &mut out);
    Multiproof(out)
}

fn encode_node(node: &TreeNode, out: &mut Vec<u8>) {
    match node {
        TreeNode::Leaf { key, value, .. } => {
            out.push(TAG_LEAF);
            out.extend_from_slice(key.as_bytes());
            out.extend_from_slice(value.as_bytes());
        }
        TreeNode::Internal { left, right, .. } => {
            out.push(TAG_INTERNAL);
            encode_node(left, out);
            encode_node(right, out);
        }
        TreeNode::Stub { hash } => {
            out.push(TAG_STUB);
            out.extend_from_slice(hash.as_bytes());
        }
    }
}

/// Structural inverse of [`encode_multiproof`]. All leaf and internal hashes
/// are recomputed, and the recomputed root becomes the source root.
pub fn decode_multiproof(bytes: &[u8]) -> Result<DerivativeTree, ComposeError> {
    let mut pos = 0usize;
    let root = decode_node(bytes, &mut pos, 0)?;
    if pos != bytes.len() {
        return Err(DecodeError::TrailingBytes(bytes.len() - pos).into());
    }
    Ok(DerivativeTree {
        source_root: root.hash(),
        root,
    })
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, len: usize) -> Result<&'a [u8], DecodeError> {
    let end = pos.checked_add(len).ok_or(DecodeError::Truncated)?;
    if end > bytes.len() {
        return Err(DecodeError::Truncated);
    }
    let slice = &bytes[*pos..end];
    *pos = end;
    Ok(slice)
}

fn take_digest(bytes: &[u8], pos: &mut usize) -> Result<Digest, DecodeError> {
    let slice = take(bytes, pos, Digest::LEN)?;
    let mut out = [0u8; 32];
    out.copy_from_slice(slice);
    Ok(Digest::new(out))
}

fn decode_node(bytes: &[u8], pos: &mut usize, depth: usize) -> Result<TreeNode, ComposeError> {
    if depth > Key::BITS {
        return Err(DecodeError::DepthLimit.into());
    }
    let tag = take(bytes, pos, 1)?[0];
    match tag {
        TAG_LEAF => {
            let key = Key::from_digest(take_digest(bytes, pos)?);
            let value = Value::from_digest(take_digest(bytes, pos)?);
            Ok(TreeNode::leaf(key, value))
        }
        TAG_INTERNAL => {
            let left = decode_node(bytes, pos, depth + 1)?;
            let right = decode_node(bytes, pos, depth + 1)?;
            Ok(TreeNode::internal(left, right))
        }
        TAG_STUB => Ok(TreeNode::stub(take_digest(bytes, pos)?)),
        other => Err(DecodeError::UnknownTag(other).into()),
    }
}

/// Compresses successive states of one ledger: the first state in full, each
/// later state as the entries whose binding changed since the previous one.
///
/// States must share key-space lineage (each is the previous state plus
/// inserts or overwrites); removals are out of scope and surface as a root
/// mismatch on replay.
pub fn encode_sequence(states: &[(u64, DerivativeTree)]) -> Result<SequenceDelta, ComposeError> {
    let (base_index, base_tree) = states.first().ok_or(ComposeError::EmptySequence)?;
    let base = encode_multiproof(base_tree);
    let mut previous: VerifiableMap = base_tree.leaves().into_iter().collect();

    let mut deltas = Vec::with_capacity(states.len().saturating_sub(1));
    for (block_index, tree) in &states[1..] {
        let current: VerifiableMap = tree.leaves().into_iter().collect();
        let mut changed = Vec::new();
        for (key, value) in &current {
            if previous.get(key) != Some(value) {
                let (_, proof) = walk(tree.root_node(), key)?;
                changed.push(Entry {
                    key: *key,
                    value: *value,
                    proof,
                });
            }
        }
        deltas.push(SequenceStep {
            block_index: *block_index,
            changed,
            new_root: tree.source_root(),
        });
        previous = current;
    }

    Ok(SequenceDelta {
        base_index: *base_index,
        base,
        deltas,
    })
}

/// Replays a [`SequenceDelta`], producing one tree per block. Every replayed
/// root must equal the recorded one.
pub fn decode_sequence(delta: &SequenceDelta) -> Result<Vec<DerivativeTree>, ComposeError> {
    let base = decode_multiproof(delta.base.as_bytes())?;
    let mut map: VerifiableMap = base.leaves().into_iter().collect();
    let mut out = Vec::with_capacity(delta.deltas.len() + 1);
    out.push(base);

    for step in &delta.deltas {
        for entry in &step.changed {
            map.insert(entry.key, entry.value);
        }
        let root = build_tree(&map)?;
        let actual = root.hash();
        if actual != step.new_root {
            return Err(ComposeError::RootMismatch {
                expected: step.new_root,
                actual,
            });
        }
        out.push(DerivativeTree {
            source_root: actual,
            root,
        });
    }
    Ok(out)
}

/// Payload bytes of `entries` encoded as independent records: 32 key bytes,
/// 32 value bytes and 32 bytes per sibling each. The baseline the multiproof
/// is measured against.
pub fn naive_entry_list_size(entries: &[Entry]) -> usize {
    entries.iter().map(|e| 64 + 32 * e.proof.len()).sum()
}
