use std::sync::OnceLock;

use crossclone_core::fixtures::all_fixtures;
use crossclone_core::tokens::{embed_mean, encode, train_bpe, train_sgns, BpeVocab, EmbeddingTable, SgnsConfig, TokenSequence};
use proptest::prelude::*;

fn vocab() -> &'static BpeVocab {
    static V: OnceLock<BpeVocab> = OnceLock::new();
    V.get_or_init(|| {
        let fixtures = all_fixtures();
        train_bpe(fixtures.iter().map(|f| f.text), 400).unwrap()
    })
}

fn table() -> &'static EmbeddingTable {
    static T: OnceLock<EmbeddingTable> = OnceLock::new();
    T.get_or_init(|| {
        let seqs: Vec<TokenSequence> = all_fixtures().iter().map(|f| encode(f.id, f.text, vocab())).collect();
        let cfg = SgnsConfig {
            dim: 8,
            epochs: 1,
            ..SgnsConfig::with_seed(1)
        };
        train_sgns(&seqs, vocab().len(), cfg).unwrap()
    })
}

#[test]
fn trained_vocab_replays_and_round_trips_fixtures() {
    let v = vocab();
    assert!(v.len() > 256);
    let pairs: Vec<(u32, u32)> = v.merges().iter().map(|m| (m.left, m.right)).collect();
    assert_eq!(&BpeVocab::from_merges(&pairs).unwrap(), v);
    let fixtures = all_fixtures();
    assert_eq!(&train_bpe(fixtures.iter().map(|f| f.text), 400).unwrap(), v);
    for f in fixtures {
        let seq = encode(f.id, f.text, v);
        assert_eq!(v.decode(&seq.tokens), f.text);
        assert!(seq.tokens.len() < f.text.len());
    }
}

proptest! {
    #[test]
    fn arbitrary_bytes_round_trip(bytes in prop::collection::vec(any::<u8>(), 0..300)) {
        let v = vocab();
        let ids = v.encode_bytes(&bytes);
        prop_assert_eq!(v.decode_bytes(&ids), bytes.clone());
        prop_assert_eq!(ids, v.encode_bytes(&bytes));
        prop_assert_eq!(BpeVocab::byte_level().encode_bytes(&bytes).len(), bytes.len());
    }

    #[test]
    fn arbitrary_text_round_trips(text in any::<String>()) {
        let v = vocab();
        prop_assert_eq!(v.decode(&v.encode_ids(&text)), text);
    }

    #[test]
    fn mean_pooling_ignores_order(
        ids in prop::collection::vec(0u32..400, 1..40),
        perm_seed in any::<u64>(),
    ) {
        let t = table();
        let mut shuffled = ids.clone();
        let mut rng = perm_seed;
        for i in (1..shuffled.len()).rev() {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (rng >> 33) as usize % (i + 1));
        }
        let seq = |tokens: Vec<u32>| TokenSequence { unit_id: "u".into(), surface: Vec::new(), tokens };
        let a = embed_mean(&seq(ids), t).unwrap();
        let b = embed_mean(&seq(shuffled), t).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
