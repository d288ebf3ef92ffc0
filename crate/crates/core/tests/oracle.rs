//! Cross-checks against an independent brute-force oracle.
//!
//! The oracle rebuilds trees by filtering the raw pair list bit by bit and
//! hashing with sha2 directly — it shares no code with the library's
//! sort-based builder, proof walker, or merge recursion.

use std::collections::BTreeSet;

use provmap::{
    build_tree, digest_key, encode_multiproof, get_nested_proof, get_proof, merge_tree,
    naive_entry_list_size, resplit, split_tree, verify_nested, verify_proof, Digest, Journal, Key,
    Notary, Proof, TreeNode, Value, VerifiableMap,
};
use rand::rngs::StdRng;
use rand::seq::index;
use rand::{Rng, SeedableRng};

mod oracle {
    use std::collections::{BTreeMap, BTreeSet};

    use sha2::{Digest as _, Sha256};

    pub type Pair = ([u8; 32], [u8; 32]);

    pub fn bit(bytes: &[u8; 32], i: usize) -> u8 {
        (bytes[i / 8] >> (7 - i % 8)) & 1
    }

    fn leaf(key: &[u8; 32], value: &[u8; 32]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update([0u8]);
        h.update(key);
        h.update(value);
        h.finalize().into()
    }

    fn node(left: &[u8; 32], right: &[u8; 32]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update([1u8]);
        h.update(left);
        h.update(right);
        h.finalize().into()
    }

    /// Brute-force recursive-partition builder. Returns the root and every
    /// leaf's depth.
    pub fn root_and_depths(pairs: &[Pair]) -> ([u8; 32], BTreeMap<[u8; 32], usize>) {
        assert!(!pairs.is_empty());
        let mut depths = BTreeMap::new();
        let root = recurse(pairs, 0, &mut depths);
        (root, depths)
    }

    fn recurse(pairs: &[Pair], depth: usize, depths: &mut BTreeMap<[u8; 32], usize>) -> [u8; 32] {
        match pairs.len() {
            0 => [0u8; 32],
            1 => {
                depths.insert(pairs[0].0, depth);
                leaf(&pairs[0].0, &pairs[0].1)
            }
            _ => {
                let zeros: Vec<Pair> =
                    pairs.iter().copied().filter(|(k, _)| bit(k, depth) == 0).collect();
                let ones: Vec<Pair> =
                    pairs.iter().copied().filter(|(k, _)| bit(k, depth) == 1).collect();
                let left = recurse(&zeros, depth + 1, depths);
                let right = recurse(&ones, depth + 1, depths);
                node(&left, &right)
            }
        }
    }

    /// Longest common bit-prefix of two keys.
    pub fn common_prefix_len(a: &[u8; 32], b: &[u8; 32]) -> usize {
        (0..256).find(|&i| bit(a, i) != bit(b, i)).unwrap_or(256)
    }

    /// Number of subtrees hanging off the paths to `chosen` keys that contain
    /// no chosen key themselves (empty subtrees included): the siblings a
    /// derivative tree must carry as stubs because they cannot be derived
    /// from the included leaves.
    pub fn boundary_sibling_count(pairs: &[Pair], chosen: &BTreeSet<[u8; 32]>) -> usize {
        assert!(pairs.iter().any(|(k, _)| chosen.contains(k)));
        recurse_boundary(pairs, chosen, 0)
    }

    fn recurse_boundary(pairs: &[Pair], chosen: &BTreeSet<[u8; 32]>, depth: usize) -> usize {
        if pairs.len() == 1 {
            return 0;
        }
        let zeros: Vec<Pair> =
            pairs.iter().copied().filter(|(k, _)| bit(k, depth) == 0).collect();
        let ones: Vec<Pair> =
            pairs.iter().copied().filter(|(k, _)| bit(k, depth) == 1).collect();
        let mut stubs = 0;
        for side in [zeros, ones] {
            if side.iter().any(|(k, _)| chosen.contains(k)) {
                stubs += recurse_boundary(&side, chosen, depth + 1);
            } else {
                stubs += 1;
            }
        }
        stubs
    }
}

fn random_pairs(rng: &mut StdRng, n: usize) -> Vec<oracle::Pair> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let key: [u8; 32] = rng.gen();
        if seen.insert(key) {
            out.push((key, rng.gen()));
        }
    }
    out
}

fn to_map(pairs: &[oracle::Pair]) -> VerifiableMap {
    pairs
        .iter()
        .map(|(k, v)| {
            (
                Key::from_digest(Digest::new(*k)),
                Value::from_digest(Digest::new(*v)),
            )
        })
        .collect()
}

fn count_stubs(node: &TreeNode) -> usize {
    match node {
        TreeNode::Stub { .. } => 1,
        TreeNode::Internal { left, right, .. } => count_stubs(left) + count_stubs(right),
        TreeNode::Leaf { .. } => 0,
    }
}

#[test]
fn build_tree_agrees_with_brute_force_on_root_and_depths() {
    let mut rng = StdRng::seed_from_u64(0xA11CE);
    for trial in 0..100 {
        let n = rng.gen_range(1..=64);
        let pairs = random_pairs(&mut rng, n);
        let (oracle_root, oracle_depths) = oracle::root_and_depths(&pairs);
        let map = to_map(&pairs);
        let tree = build_tree(&map).unwrap();
        assert_eq!(tree.hash().as_bytes(), &oracle_root, "root mismatch in trial {trial}");
        for (key_bytes, depth) in &oracle_depths {
            let key = Key::from_digest(Digest::new(*key_bytes));
            let proof = get_proof(&tree, &key).unwrap();
            assert_eq!(proof.len(), *depth, "depth mismatch in trial {trial}");
        }
    }
}

#[test]
fn leaf_depth_law_holds_against_pairwise_prefixes() {
    let mut rng = StdRng::seed_from_u64(0xDEB7);
    for _ in 0..20 {
        let n = rng.gen_range(1..=64);
        let pairs = random_pairs(&mut rng, n);
        let tree = build_tree(&to_map(&pairs)).unwrap();
        for (key_bytes, _) in &pairs {
            let expected = pairs
                .iter()
                .filter(|(other, _)| other != key_bytes)
                .map(|(other, _)| oracle::common_prefix_len(key_bytes, other))
                .max()
                .map(|lcp| lcp + 1)
                .unwrap_or(0);
            let key = Key::from_digest(Digest::new(*key_bytes));
            assert_eq!(get_proof(&tree, &key).unwrap().len(), expected);
        }
    }
}

#[test]
fn proofs_verify_and_every_flipped_sibling_fails() {
    let mut rng = StdRng::seed_from_u64(0xF1AB);
    let pairs = random_pairs(&mut rng, 64);
    let (oracle_root, _) = oracle::root_and_depths(&pairs);
    let root = Digest::new(oracle_root);
    let map = to_map(&pairs);
    let tree = build_tree(&map).unwrap();
    for (key, value) in &map {
        let proof = get_proof(&tree, key).unwrap();
        assert!(verify_proof(&root, key, value, &proof));
        for i in 0..proof.len() {
            let mut siblings = proof.siblings().to_vec();
            let mut bytes = *siblings[i].as_bytes();
            bytes[rng.gen_range(0..32)] ^= 0xff;
            siblings[i] = Digest::new(bytes);
            assert!(!verify_proof(&root, key, value, &Proof::new(siblings)));
        }
    }
}

#[test]
fn split_transfer_size_is_the_sum_of_leaf_depths() {
    let mut rng = StdRng::seed_from_u64(0x5137);
    let pairs = random_pairs(&mut rng, 64);
    let (_, depths) = oracle::root_and_depths(&pairs);
    let map = to_map(&pairs);
    let tree = build_tree(&map).unwrap();
    let entries = split_tree(&map, &tree).unwrap();
    assert_eq!(entries.len(), 64);
    let total_siblings: usize = entries.iter().map(|e| e.proof.len()).sum();
    let oracle_total: usize = depths.values().sum();
    assert_eq!(total_siblings, oracle_total);
}

#[test]
fn merged_subset_reproduces_root_and_original_proofs() {
    let mut rng = StdRng::seed_from_u64(0x3E16);
    let pairs = random_pairs(&mut rng, 64);
    let (oracle_root, _) = oracle::root_and_depths(&pairs);
    let map = to_map(&pairs);
    let tree = build_tree(&map).unwrap();
    let entries = split_tree(&map, &tree).unwrap();

    let subset: Vec<_> = index::sample(&mut rng, 64, 16)
        .into_iter()
        .map(|i| entries[i].clone())
        .collect();
    let derivative = merge_tree(&subset, None).unwrap();
    assert_eq!(derivative.source_root().as_bytes(), &oracle_root);

    let keys: Vec<Key> = subset.iter().map(|e| e.key).collect();
    let again = resplit(&derivative, &keys).unwrap();
    for (original, extracted) in subset.iter().zip(&again) {
        assert_eq!(original, extracted);
    }
}

#[test]
fn resplit_of_a_resplit_subset_still_reproduces_the_root() {
    let mut rng = StdRng::seed_from_u64(0x9e5);
    let pairs = random_pairs(&mut rng, 64);
    let map = to_map(&pairs);
    let tree = build_tree(&map).unwrap();
    let root = tree.hash();
    let entries = split_tree(&map, &tree).unwrap();

    let sixteen: Vec<_> = entries.iter().take(16).cloned().collect();
    let derivative = merge_tree(&sixteen, Some(&root)).unwrap();
    let four: Vec<Key> = sixteen.iter().take(4).map(|e| e.key).collect();
    let again = resplit(&derivative, &four).unwrap();
    let merged = merge_tree(&again, None).unwrap();
    assert_eq!(merged.source_root(), root);
}

#[test]
fn multiproof_stub_count_matches_the_boundary_oracle() {
    let mut rng = StdRng::seed_from_u64(0x171a);
    let pairs = random_pairs(&mut rng, 1024);
    let map = to_map(&pairs);
    let tree = build_tree(&map).unwrap();
    let entries = split_tree(&map, &tree).unwrap();

    let picked = index::sample(&mut rng, 1024, 256);
    let subset: Vec<_> = picked.iter().map(|i| entries[i].clone()).collect();
    let chosen: BTreeSet<[u8; 32]> = subset.iter().map(|e| *e.key.as_bytes()).collect();

    let derivative = merge_tree(&subset, Some(&tree.hash())).unwrap();
    let stubs = count_stubs(derivative.root_node());
    assert_eq!(stubs, oracle::boundary_sibling_count(&pairs, &chosen));

    let encoded = encode_multiproof(&derivative);
    assert!(encoded.len() < naive_entry_list_size(&subset));
}

#[test]
fn journal_roots_match_oracle_rebuilds_per_state() {
    let mut rng = StdRng::seed_from_u64(0x70AD);
    let mut pairs = random_pairs(&mut rng, 64);
    let mut journal = Journal::new(Notary::from_seed("oracle-journal", [42u8; 32]));
    journal
        .commit(&to_map(&pairs).iter().map(|(k, v)| (*k, *v)).collect::<Vec<_>>())
        .unwrap();

    for step in 0..3 {
        let i = rng.gen_range(0..pairs.len());
        pairs[i].1 = rng.gen();
        let key = Key::from_digest(Digest::new(pairs[i].0));
        let value = Value::from_digest(Digest::new(pairs[i].1));
        let block = journal.commit(&[(key, value)]).unwrap();
        let (oracle_root, _) = oracle::root_and_depths(&pairs);
        assert_eq!(
            block.root.as_bytes(),
            &oracle_root,
            "state {} root diverged from oracle",
            step + 1
        );
    }
}

#[test]
fn three_level_hierarchy_verifies_every_leaf_path() {
    let mut rng = StdRng::seed_from_u64(0x3113);

    // Eight content maps of 8 leaves each, a middle map holding the eight
    // bottom roots, and a top map whose 8 entries all point at the middle
    // root: 8 leaves at every level.
    let bottoms: Vec<VerifiableMap> = (0..8).map(|_| to_map(&random_pairs(&mut rng, 8))).collect();
    let bottom_trees: Vec<TreeNode> = bottoms.iter().map(|m| build_tree(m).unwrap()).collect();

    let middle: VerifiableMap = bottom_trees
        .iter()
        .enumerate()
        .map(|(i, t)| (digest_key(format!("shard-{i}").as_bytes()), Value::from_digest(t.hash())))
        .collect();
    let middle_tree = build_tree(&middle).unwrap();

    let top: VerifiableMap = (0..8)
        .map(|i| {
            (
                digest_key(format!("archive-{i}").as_bytes()),
                Value::from_digest(middle_tree.hash()),
            )
        })
        .collect();
    let top_tree = build_tree(&top).unwrap();
    let top_root = top_tree.hash();

    for archive in 0..8 {
        let archive_key = digest_key(format!("archive-{archive}").as_bytes());
        for (shard, bottom_tree) in bottom_trees.iter().enumerate() {
            let shard_key = digest_key(format!("shard-{shard}").as_bytes());
            for (leaf_key, _) in &bottoms[shard] {
                let nested = get_nested_proof(
                    &[&top_tree, &middle_tree, bottom_tree],
                    &[archive_key, shard_key, *leaf_key],
                )
                .unwrap();
                assert_eq!(nested.segments.len(), 3);
                assert!(verify_nested(&top_root, &nested));
            }
        }
    }
}

#[test]
fn sequence_deltas_carry_exactly_the_oracle_diff() {
    let mut rng = StdRng::seed_from_u64(0x5E0);
    let mut pairs = random_pairs(&mut rng, 64);

    let mut states = Vec::new();
    let mut changed_keys = Vec::new();
    for step in 0..4 {
        if step > 0 {
            let i = rng.gen_range(0..pairs.len());
            pairs[i].1 = rng.gen();
            changed_keys.push(pairs[i].0);
        }
        let map = to_map(&pairs);
        let tree = build_tree(&map).unwrap();
        let entries = split_tree(&map, &tree).unwrap();
        states.push((step as u64, merge_tree(&entries, None).unwrap()));
    }

    let delta = provmap::encode_sequence(&states).unwrap();
    assert_eq!(delta.deltas.len(), 3);
    for (step, expected_key) in delta.deltas.iter().zip(&changed_keys) {
        // The per-step diff oracle: exactly the overwritten key changed.
        assert_eq!(step.changed.len(), 1);
        assert_eq!(step.changed[0].key.as_bytes(), expected_key);
        assert!(verify_proof(
            &step.new_root,
            &step.changed[0].key,
            &step.changed[0].value,
            &step.changed[0].proof
        ));
    }

    let replayed = provmap::decode_sequence(&delta).unwrap();
    let roots: Vec<Digest> = replayed.iter().map(|t| t.source_root()).collect();
    let expected: Vec<Digest> = states.iter().map(|(_, t)| t.source_root()).collect();
    assert_eq!(roots, expected);
}
