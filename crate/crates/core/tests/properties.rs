//! Property tests over the corpus index invariants.

use hopqpp_core::{build_index, Document, IndexBuilder};
use proptest::prelude::*;

fn doc_strategy() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec![
            "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
        ]),
        1..15,
    )
    .prop_map(|words| words.into_iter().map(str::to_string).collect())
}

fn corpus_strategy() -> impl Strategy<Value = Vec<Document>> {
    prop::collection::vec(doc_strategy(), 1..12).prop_map(|texts| {
        texts
            .into_iter()
            .enumerate()
            .map(|(i, words)| Document::new(format!("d{i}"), "", words.join(" ")))
            .collect()
    })
}

proptest! {
    /// An n-gram can never occur in more documents than any of its parts.
    #[test]
    fn ngram_df_is_bounded_by_subgram_df(docs in corpus_strategy()) {
        let idx = build_index(&docs, 3).unwrap();
        let mut keys: Vec<Vec<String>> = Vec::new();
        for doc in &docs {
            let toks = doc.tokens();
            for n in 2..=3usize.min(toks.len()) {
                for w in toks.windows(n) {
                    keys.push(w.to_vec());
                }
            }
        }
        for gram in keys {
            let df = idx.doc_count(&gram).unwrap();
            for sub in [&gram[..gram.len() - 1], &gram[1..]] {
                prop_assert!(df <= idx.doc_count(sub).unwrap());
            }
        }
    }

    /// Document order does not matter.
    #[test]
    fn indexing_is_order_independent(docs in corpus_strategy(), seed in any::<u64>()) {
        let forward = build_index(&docs, 3).unwrap();
        let mut shuffled = docs.clone();
        // Fisher-Yates with a splitmix-style step, to avoid another dep here
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let j = (state >> 33) as usize % (i + 1);
            shuffled.swap(i, j);
        }
        let backward = build_index(&shuffled, 3).unwrap();
        prop_assert_eq!(forward, backward);
    }

    /// Adding one document grows num_docs by one and never shrinks counts.
    #[test]
    fn adding_a_document_is_monotone(docs in corpus_strategy(), extra in doc_strategy()) {
        let before = build_index(&docs, 3).unwrap();
        let mut builder = IndexBuilder::new(3);
        for doc in &docs {
            builder.add(doc).unwrap();
        }
        builder.add(&Document::new("extra", "", extra.join(" "))).unwrap();
        let after = builder.finish();

        prop_assert_eq!(after.num_docs(), before.num_docs() + 1);
        prop_assert!(after.total_tokens() >= before.total_tokens());
        for doc in &docs {
            let toks = doc.tokens();
            for n in 1..=3usize.min(toks.len()) {
                for w in toks.windows(n) {
                    prop_assert!(after.doc_count(w).unwrap() >= before.doc_count(w).unwrap());
                }
            }
            for t in &toks {
                prop_assert!(after.collection_frequency(t) >= before.collection_frequency(t));
            }
        }
    }

    /// Probabilities stay in [0, 1] and grow with df.
    #[test]
    fn term_probability_is_bounded_and_monotone(df1 in 1u64..50, df2 in 1u64..50) {
        let num_docs = 50u64;
        let lo = df1.min(df2);
        let hi = df1.max(df2);
        let make = |df: u64| {
            hopqpp_core::DfIndex::from_counts(
                num_docs,
                3,
                vec![("term".to_string(), df)],
                Vec::new(),
            )
            .unwrap()
        };
        let p_lo = make(lo).term_probability(&["term"]).unwrap();
        let p_hi = make(hi).term_probability(&["term"]).unwrap();
        prop_assert!((0.0..=1.0).contains(&p_lo) && (0.0..=1.0).contains(&p_hi));
        prop_assert!(p_lo <= p_hi);
    }
}
