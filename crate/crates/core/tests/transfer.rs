//! Randomized journal-to-journal transfer flows: exported subsets stay
//! verifiable after import, and adopted packages stay verifiable under both
//! the foreign and the local chain.

use provmap::{
    adoption_key, build_tree, get_nested_proof, resplit, verify_commitment, verify_nested,
    verify_package, Commitment, DerivativeStore, Digest, Journal, Key, Notary, Value,
    VerifiableMap,
};
use rand::rngs::StdRng;
use rand::seq::index;
use rand::{Rng, SeedableRng};

fn random_journal(rng: &mut StdRng, n: usize, tag: u64) -> (Journal, Vec<Key>) {
    let mut updates: Vec<(Key, Value)> = Vec::with_capacity(n);
    let mut map = VerifiableMap::new();
    while map.len() < n {
        let key = Key::from_digest(Digest::new(rng.gen()));
        let value = Value::from_digest(Digest::new(rng.gen()));
        if map.insert(key, value).is_none() {
            updates.push((key, value));
        }
    }
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&tag.to_be_bytes());
    let mut journal = Journal::new(Notary::from_seed(format!("journal-{tag}"), seed));
    journal.commit(&updates).unwrap();
    let keys = updates.into_iter().map(|(k, _)| k).collect();
    (journal, keys)
}

#[test]
fn random_subset_transfers_stay_verifiable() {
    let mut rng = StdRng::seed_from_u64(0x7A5F);
    for trial in 0..20 {
        let n = rng.gen_range(1..=256);
        let (journal, keys) = random_journal(&mut rng, n, trial);
        let notary_key = journal.notary().verifying_key();
        let root = journal.current_root().unwrap();

        let m = rng.gen_range(1..=n);
        let subset: Vec<Key> = index::sample(&mut rng, n, m)
            .into_iter()
            .map(|i| keys[i])
            .collect();
        let package = journal
            .export_package(0, &subset, rng.gen_bool(0.5))
            .unwrap();

        let mut store = DerivativeStore::new();
        let derivative = store.import_package(&package, &notary_key).unwrap();
        assert_eq!(derivative.source_root(), root);

        // Every imported entry is an externally verifiable commitment.
        for entry in resplit(derivative, &subset).unwrap() {
            let commitment = Commitment {
                notary_id: package.notary_id.clone(),
                block: package.block,
                entry,
            };
            assert!(verify_commitment(&commitment, &notary_key));
        }
    }
}

#[test]
fn adopted_packages_verify_under_both_chains() {
    let mut rng = StdRng::seed_from_u64(0xAD09);
    for trial in 0..10 {
        let n = rng.gen_range(2..=64);
        let (foreign, keys) = random_journal(&mut rng, n, 100 + trial);
        let foreign_key = foreign.notary().verifying_key();

        let m = rng.gen_range(1..=n);
        let subset: Vec<Key> = index::sample(&mut rng, n, m)
            .into_iter()
            .map(|i| keys[i])
            .collect();
        let package = foreign.export_package(0, &subset, false).unwrap();

        let (mut local, _) = random_journal(&mut rng, 8, 200 + trial);
        let local_block = local.adopt_package(&package, &foreign_key).unwrap();

        let derivative = verify_package(&package, &foreign_key).unwrap();
        let local_tree = build_tree(local.current_map()).unwrap();
        let adopt_key = adoption_key(&package.notary_id, package.block.index);

        for key in &subset {
            // Directly against the foreign block...
            let entry = resplit(&derivative, std::slice::from_ref(key))
                .unwrap()
                .pop()
                .unwrap();
            let commitment = Commitment {
                notary_id: package.notary_id.clone(),
                block: package.block,
                entry,
            };
            assert!(verify_commitment(&commitment, &foreign_key));

            // ...and through the local chain with a two-segment chain of proofs.
            let nested =
                get_nested_proof(&[&local_tree, derivative.root_node()], &[adopt_key, *key])
                    .unwrap();
            assert_eq!(nested.segments.len(), 2);
            assert!(verify_nested(&local_block.root, &nested));
        }
    }
}
