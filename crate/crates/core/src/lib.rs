//! Composable verifiable-map ledgers for content provenance.
//!
//! A *verifiable map* is a key → value mapping authenticated by a sparse
//! binary Merkle trie: its root commits to every pair, and each pair carries
//! a membership proof. This crate makes those commitments portable:
//!
//! * [`compose::split_tree`] decomposes a map into independent,
//!   self-verifying `(key, value, proof)` entries;
//! * [`compose::merge_tree`] recombines any subset into a *derivative
//!   ledger* — a pruned tree with real leaves for the merged keys and stubs
//!   elsewhere that still hashes to the original root, and can itself be
//!   split again;
//! * [`compose::encode_multiproof`] and [`compose::encode_sequence`] shrink
//!   bulk transfers by deduplicating shared proof structure within one tree
//!   and across successive states of one ledger.
//!
//! The [`ledger`] module wraps this in the surrounding system model: a
//! [`ledger::Notary`] signs a hash chain of map roots (discrete time), a
//! [`ledger::Journal`] maintains the map and commits its roots, and
//! verifiers check [`ledger::Commitment`]s and [`ledger::TransferPackage`]s
//! against nothing but the notary public key.
//!
//! ```
//! use provmap::{build_tree, digest_key, merge_tree, split_tree, Value, VerifiableMap};
//!
//! let map: VerifiableMap = [
//!     (digest_key(b"https://example.org/a"), Value::from_digest(provmap::hash::sha256(b"page a"))),
//!     (digest_key(b"https://example.org/b"), Value::from_digest(provmap::hash::sha256(b"page b"))),
//! ]
//! .into_iter()
//! .collect();
//! let tree = build_tree(&map).unwrap();
//! let entries = split_tree(&map, &tree).unwrap();
//! // Any single entry still reproduces the full root.
//! let derivative = merge_tree(&entries[..1], Some(&tree.hash())).unwrap();
//! assert_eq!(derivative.source_root(), tree.hash());
//! ```

pub mod compose;
pub mod hash;
pub mod ledger;
pub mod merkle;

// Key types appearing in the public verification API.
pub use ed25519_dalek::{SigningKey, VerifyingKey};

pub use compose::{
    decode_multiproof, decode_sequence, encode_multiproof, encode_sequence, merge_tree,
    merge_tree_with_stats, naive_entry_list_size, resplit, split_tree, ComposeError, DecodeError,
    DerivativeTree, Entry, MergeStats, Multiproof, SequenceDelta, SequenceStep,
};
pub use hash::{Digest, DigestError, EMPTY};
pub use ledger::{
    adoption_key, get_nested_proof, verify_block, verify_chain, verify_commitment, verify_nested,
    verify_package, Block, Commitment, DerivativeStore, Journal, LedgerError, NestedProof, Notary,
    PackagePayload, SignatureBytes, TransferPackage, PACKAGE_FORMAT_VERSION,
};
pub use merkle::{
    build_tree, digest_key, get_proof, verify_proof, Key, MerkleError, Proof, TreeNode, Value,
    VerifiableMap,
};
