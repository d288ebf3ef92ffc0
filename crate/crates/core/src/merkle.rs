//! Sparse binary Merkle trie backing a verifiable map.
//!
//! Keys are 256-bit paths walked MSB-first over the digest bytes: bit `d` of
//! the key selects the child at depth `d` (0 = left, 1 = right). There is no
//! path compression, so a leaf's depth always equals its proof length: each
//! key's leaf sits at depth `longest common bit-prefix with any other key + 1`
//! (depth 0 for a single-entry map). Subtrees holding no keys contribute the
//! [`EMPTY`] digest.
//!
//! Trees are immutable after construction; rebuild instead of updating in
//! place. Concurrent readers need no coordination.

use std::collections::btree_map;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::{leaf_hash, node_hash, sha256, Digest, DigestError, EMPTY};

/// A 256-bit tree path: a digest interpreted MSB-first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key(Digest);

impl Key {
    /// Number of addressable bits in a path.
    pub const BITS: usize = 256;

    pub fn from_digest(digest: Digest) -> Self {
        Key(digest)
    }

    pub fn digest(&self) -> Digest {
        self.0
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        self.0.as_bytes()
    }

    /// Child selector at `depth`: 0 descends left, 1 descends right.
    pub fn bit(&self, depth: usize) -> u8 {
        assert!(depth < Self::BITS, "bit index {depth} out of range");
        (self.0.as_bytes()[depth / 8] >> (7 - depth % 8)) & 1
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }

    pub fn from_hex(s: &str) -> Result<Self, DigestError> {
        Digest::from_hex(s).map(Key)
    }
}

impl fmt::Debug for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Key({})", self.0.to_hex())
    }
}

/// The digest of a piece of archived content. Opaque to the tree.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Value(Digest);

impl Value {
    pub fn from_digest(digest: Digest) -> Self {
        Value(digest)
    }

    pub fn digest(&self) -> Digest {
        self.0
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        self.0.as_bytes()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }

    pub fn from_hex(s: &str) -> Result<Self, DigestError> {
        Digest::from_hex(s).map(Value)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({})", self.0.to_hex())
    }
}

/// Hashes a user-facing name (URL, path, identifier) to a fixed-width path.
///
/// Raw names are never used as paths directly; hashing keeps the depth
/// distribution near `log2 n` regardless of how similar the names are.
pub fn digest_key(name: &[u8]) -> Key {
    Key(sha256(name))
}

/// A finite key → value mapping. Its authenticated form is [`build_tree`];
/// iteration order never affects any derived hash.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifiableMap {
    entries: BTreeMap<Key, Value>,
}

impl VerifiableMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts or overwrites, returning the previous value if any.
    pub fn insert(&mut self, key: Key, value: Value) -> Option<Value> {
        self.entries.insert(key, value)
    }

    pub fn get(&self, key: &Key) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn contains_key(&self, key: &Key) -> bool {
        self.entries.contains_key(key)
    }

    /// Iterates pairs in key order.
    pub fn iter(&self) -> btree_map::Iter<'_, Key, Value> {
        self.entries.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.entries.keys()
    }
}

impl FromIterator<(Key, Value)> for VerifiableMap {
    fn from_iter<I: IntoIterator<Item = (Key, Value)>>(iter: I) -> Self {
        VerifiableMap {
            entries: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a VerifiableMap {
    type Item = (&'a Key, &'a Value);
    type IntoIter = btree_map::Iter<'a, Key, Value>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}

/// A node of the trie, with its hash cached at construction.
///
/// `Stub` stands in for a subtree that is known only by hash: either a
/// subtree pruned away in a derivative ledger, or — when the hash is
/// [`EMPTY`] — a subtree that holds no keys at all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeNode {
    Leaf {
        key: Key,
        value: Value,
        hash: Digest,
    },
    Internal {
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        hash: Digest,
    },
    Stub {
        hash: Digest,
    },
}

impl TreeNode {
    pub fn leaf(key: Key, value: Value) -> TreeNode {
        let hash = leaf_hash(&key.digest(), &value.digest());
        TreeNode::Leaf { key, value, hash }
    }

    pub fn internal(left: TreeNode, right: TreeNode) -> TreeNode {
        let hash = node_hash(&left.hash(), &right.hash());
        TreeNode::Internal {
            left: Box::new(left),
            right: Box::new(right),
            hash,
        }
    }

    pub fn stub(hash: Digest) -> TreeNode {
        TreeNode::Stub { hash }
    }

    /// The node standing for an empty subtree.
    pub fn empty() -> TreeNode {
        TreeNode::Stub { hash: EMPTY }
    }

    pub fn hash(&self) -> Digest {
        match self {
            TreeNode::Leaf { hash, .. }
            | TreeNode::Internal { hash, .. }
            | TreeNode::Stub { hash } => *hash,
        }
    }

    pub fn is_stub(&self) -> bool {
        matches!(self, TreeNode::Stub { .. })
    }

    /// True for a stub carrying the [`EMPTY`] marker.
    pub fn is_empty_subtree(&self) -> bool {
        matches!(self, TreeNode::Stub { hash } if *hash == EMPTY)
    }

    /// All reachable leaves in key order. Stubs contribute nothing.
    pub fn leaves(&self) -> Vec<(Key, Value)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<(Key, Value)>) {
        match self {
            TreeNode::Leaf { key, value, .. } => out.push((*key, *value)),
            TreeNode::Internal { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            TreeNode::Stub { .. } => {}
        }
    }
}

/// Ordered sibling hashes, root to leaf: `siblings[d]` is the hash of the
/// sibling of the path node entered at depth `d + 1`. The length equals the
/// leaf's depth and never exceeds 256.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Proof {
    siblings: Vec<Digest>,
}

impl Proof {
    pub fn new(siblings: Vec<Digest>) -> Self {
        Proof { siblings }
    }

    pub fn len(&self) -> usize {
        self.siblings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.siblings.is_empty()
    }

    pub fn siblings(&self) -> &[Digest] {
        &self.siblings
    }

    pub fn get(&self, depth: usize) -> Option<&Digest> {
        self.siblings.get(depth)
    }
}

/// Errors from trie construction and proof extraction.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MerkleError {
    #[error("cannot build a tree from an empty map")]
    EmptyMap,
    #[error("key not present in tree")]
    KeyNotFound,
    #[error("path runs through a pruned subtree")]
    PrunedPath,
}

/// Builds the trie for `map`. The root hash is deterministic: it depends
/// only on the key/value set, never on insertion order.
pub fn build_tree(map: &VerifiableMap) -> Result<TreeNode, MerkleError> {
    if map.is_empty() {
        return Err(MerkleError::EmptyMap);
    }
    let entries: Vec<(Key, Value)> = map.iter().map(|(k, v)| (*k, *v)).collect();
    Ok(build_node(&entries, 0))
}

fn build_node(entries: &[(Key, Value)], depth: usize) -> TreeNode {
    match entries.len() {
        0 => TreeNode::empty(),
        1 => TreeNode::leaf(entries[0].0, entries[0].1),
        _ => {
            debug_assert!(depth < Key::BITS, "distinct keys must diverge by depth 256");
            // Entries are sorted by key, so each partition is contiguous.
            let split = entries.partition_point(|(k, _)| k.bit(depth) == 0);
            let (zeros, ones) = entries.split_at(split);
            TreeNode::internal(build_node(zeros, depth + 1), build_node(ones, depth + 1))
        }
    }
}

/// Extracts the membership proof for `key`.
///
/// Works identically on full trees and on derivative (stub-containing) trees
/// as long as the key's own path crosses no pruned stub.
pub fn get_proof(tree: &TreeNode, key: &Key) -> Result<Proof, MerkleError> {
    walk(tree, key).map(|(_, proof)| proof)
}

/// Descends to `key`'s leaf, returning its value and proof.
pub(crate) fn walk(tree: &TreeNode, key: &Key) -> Result<(Value, Proof), MerkleError> {
    let mut node = tree;
    let mut depth = 0usize;
    let mut siblings = Vec::new();
    loop {
        match node {
            TreeNode::Leaf {
                key: leaf_key,
                value,
                ..
            } => {
                return if leaf_key == key {
                    Ok((*value, Proof::new(siblings)))
                } else {
                    Err(MerkleError::KeyNotFound)
                };
            }
            TreeNode::Stub { hash } => {
                // An EMPTY stub is a subtree known to hold nothing; any other
                // stub hides content we cannot see into.
                return Err(if *hash == EMPTY {
                    MerkleError::KeyNotFound
                } else {
                    MerkleError::PrunedPath
                });
            }
            TreeNode::Internal { left, right, .. } => {
                if depth >= Key::BITS {
                    return Err(MerkleError::KeyNotFound);
                }
                let (next, sibling) = if key.bit(depth) == 0 {
                    (left, right)
                } else {
                    (right, left)
                };
                siblings.push(sibling.hash());
                node = next;
                depth += 1;
            }
        }
    }
}

/// Checks a membership proof against a root.
///
/// Folds from the deepest sibling up: starting from `H(0x00 || key || value)`,
/// each step combines with `proof[d]` on the side selected by key bit `d`.
/// Returns false on any mismatch; proofs longer than 256 are always false.
pub fn verify_proof(root: &Digest, key: &Key, value: &Value, proof: &Proof) -> bool {
    if proof.len() > Key::BITS {
        return false;
    }
    let mut acc = leaf_hash(&key.digest(), &value.digest());
    for depth in (0..proof.len()).rev() {
        let sibling = &proof.siblings()[depth];
        acc = if key.bit(depth) == 0 {
            node_hash(&acc, sibling)
        } else {
            node_hash(sibling, &acc)
        };
    }
    acc == *root
}
