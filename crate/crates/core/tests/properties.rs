use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use xling::corpus::{build_vocabulary, tokenize, LangWord, Lexicon, ParallelCorpus};
use xling::dice::{dice_similarity, dice_via_dot, CooccurrenceStats};
use xling::eval::{compute_aer, predict, Alignments, GoldAlignment, Similarity};
use xling::matrix::{build_count_matrix, build_indicator_matrix, transform_idf, transform_l1, transform_pmi};
use xling::{Granularity, SparseMatrix};

fn line(max_len: usize, alphabet: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(alphabet), 0..=max_len).prop_map(|w| w.join(" "))
}

fn bitext() -> impl Strategy<Value = (Vec<String>, Vec<String>)> {
    // the first pair is never blank so the corpus is never empty
    (1usize..15).prop_flat_map(|n| {
        (
            prop::collection::vec(line(5, &["a", "b", "c", "d", "e"]), n),
            prop::collection::vec(line(5, &["v", "w", "x", "y", "z"]), n),
        )
            .prop_map(|(mut en, mut fr)| {
                en[0].push_str(" a");
                fr[0].push_str(" v");
                (en, fr)
            })
    })
}

fn corpus(en: &[String], fr: &[String]) -> ParallelCorpus {
    ParallelCorpus::from_lines(vec![("en".to_string(), en.to_vec()), ("fr".to_string(), fr.to_vec())]).unwrap()
}

/// Sentence IDs containing each word, rescanned from the raw lines.
fn occurrence_sets(lines: &[String]) -> BTreeMap<String, BTreeSet<usize>> {
    let mut sets: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (i, l) in lines.iter().enumerate() {
        for w in l.split_whitespace() {
            sets.entry(w.to_string()).or_default().insert(i);
        }
    }
    sets
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tokenize_is_idempotent(s in "\\PC{0,40}") {
        let once = tokenize(&s);
        prop_assert_eq!(tokenize(&once.join(" ")), once.clone());
        prop_assert!(once.iter().all(|t| !t.is_empty() && !t.contains(char::is_whitespace)));
    }

    #[test]
    fn sentence_counts_match_rescan((en, fr) in bitext()) {
        let c = corpus(&en, &fr);
        let v = build_vocabulary(&c, 1).unwrap();
        let sets = occurrence_sets(&en);
        for (w, ids) in &sets {
            let i = v.lexicon().index_of("en", w).unwrap();
            prop_assert_eq!(v.sentence_count(i), ids.len() as u64);
        }
        prop_assert_eq!(v.lexicon().indices_of("en").len(), sets.len());
    }

    #[test]
    fn vocabulary_indices_are_deterministic((en, fr) in bitext()) {
        let a = build_vocabulary(&corpus(&en, &fr), 1).unwrap();
        let mut rev_en = en.clone();
        let mut rev_fr = fr.clone();
        rev_en.reverse();
        rev_fr.reverse();
        let b = build_vocabulary(&corpus(&rev_en, &rev_fr), 1).unwrap();
        prop_assert_eq!(a.lexicon().words(), b.lexicon().words());
        let words = a.lexicon().words();
        prop_assert!(words.windows(2).all(|p| (&p[0].language, &p[0].surface) < (&p[1].language, &p[1].surface)));
    }

    #[test]
    fn dice_matches_counts_and_dot((en, fr) in bitext()) {
        let c = corpus(&en, &fr);
        let v = build_vocabulary(&c, 1).unwrap();
        let Ok(stats) = CooccurrenceStats::from_corpus(&c, &v, "en", "fr", Granularity::Sentence) else {
            return Ok(());
        };
        let l1 = transform_l1(&stats.indicator().matrix).unwrap();
        let (se, sf) = (occurrence_sets(&en), occurrence_sets(&fr));
        for (a, ia) in &se {
            for (b, ib) in &sf {
                let (wa, wb) = (LangWord::new("en", a), LangWord::new("fr", b));
                let both = ia.intersection(ib).count() as f64;
                let expected = 2.0 * both / (ia.len() as f64 * ib.len() as f64);
                let d = dice_similarity(&wa, &wb, &stats).unwrap();
                prop_assert!((d - expected).abs() <= 1e-12);
                let dot = dice_via_dot(&wa, &wb, stats.lexicon(), &l1).unwrap();
                prop_assert!((dot - d / 2.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn duplicated_tokens_leave_indicator_unchanged((en, fr) in bitext()) {
        let doubled: Vec<String> = en.iter().map(|l| format!("{l} {l}")).collect();
        let (a, b) = (corpus(&en, &fr), corpus(&doubled, &fr));
        let (va, vb) = (build_vocabulary(&a, 1).unwrap(), build_vocabulary(&b, 1).unwrap());
        let ma = build_indicator_matrix(&a, &va, &["en", "fr"], Granularity::Sentence).unwrap();
        let mb = build_indicator_matrix(&b, &vb, &["en", "fr"], Granularity::Sentence).unwrap();
        prop_assert_eq!(ma.matrix.iter().collect::<Vec<_>>(), mb.matrix.iter().collect::<Vec<_>>());
        let counts = build_count_matrix(&b, &vb, &["en"], Granularity::Sentence).unwrap();
        prop_assert!(counts.matrix.iter().all(|(_, _, v)| v >= 2.0));
    }

    #[test]
    fn l1_and_idf_row_structure((en, fr) in bitext()) {
        let c = corpus(&en, &fr);
        let v = build_vocabulary(&c, 1).unwrap();
        let m = build_indicator_matrix(&c, &v, &["en", "fr"], Granularity::Sentence).unwrap().matrix;
        let l1 = transform_l1(&m).unwrap();
        let idf = transform_idf(&m).unwrap();
        for r in 0..m.n_rows() {
            prop_assert!((l1.row(r).1.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let expected = (m.n_cols() as f64 / m.row_sum(r)).ln();
            prop_assert!(idf.row(r).1.iter().all(|&x| (x - expected).abs() < 1e-12));
            prop_assert_eq!(idf.row(r).0.len() <= m.row(r).0.len(), true);
        }
        prop_assert_eq!(idf.row_sum(0), m.row_sum(0));
    }

    #[test]
    fn pmi_of_outer_product_vanishes(
        u in prop::collection::vec(0.1f64..10.0, 1..8),
        w in prop::collection::vec(0.1f64..10.0, 1..8),
    ) {
        let rows = u.iter().map(|a| w.iter().enumerate().map(|(j, b)| (j, a * b)).collect()).collect();
        let m = SparseMatrix::from_rows(w.len(), rows).unwrap();
        let pmi = transform_pmi(&m, false).unwrap();
        prop_assert!(pmi.iter().all(|(_, _, v)| v.abs() < 1e-12));
    }

    #[test]
    fn sure_links_lower_aer_and_links_outside_possible_never_help(
        sure in prop::collection::btree_set((1usize..6, 1usize..6), 0..10),
        extra in prop::collection::btree_set((1usize..6, 1usize..6), 0..10),
        predicted in prop::collection::btree_set((1usize..6, 1usize..6), 0..10),
    ) {
        let mut gold = GoldAlignment::default();
        gold.sentences.entry(1).or_default();
        for &l in &sure { gold.insert(1, l, true); }
        for &l in &extra { gold.insert(1, l, false); }
        let base: Alignments = BTreeMap::from([(1, predicted.clone())]);
        let before = compute_aer(&base, &gold).unwrap().aer;
        prop_assert!((0.0..=1.0).contains(&before));
        for &s in sure.difference(&predicted) {
            let mut more = predicted.clone();
            more.insert(s);
            let after = compute_aer(&BTreeMap::from([(1, more)]), &gold).unwrap().aer;
            prop_assert!(after < before);
        }
        let possible = &gold.sentences[&1].possible;
        for l in (1..6).flat_map(|i| (1..6).map(move |j| (i, j))) {
            if predicted.contains(&l) || possible.contains(&l) {
                continue;
            }
            let mut more = predicted.clone();
            more.insert(l);
            let after = compute_aer(&BTreeMap::from([(1, more)]), &gold).unwrap().aer;
            prop_assert!(after >= before);
        }
        if extra.is_subset(&sure) {
            let perfect = compute_aer(&BTreeMap::from([(1, sure.clone())]), &gold).unwrap().aer;
            prop_assert_eq!(perfect, 0.0);
        }
    }

    #[test]
    fn prediction_is_invariant_under_monotone_maps(scores in prop::collection::vec(-5.0f64..5.0, 6)) {
        let base = Grid::new(scores.clone());
        let mapped = Grid::new(scores.iter().map(|s| s.exp() * 3.0 + 1.0).collect());
        for src in 0..2 {
            prop_assert_eq!(predict(&base, src, "fr"), predict(&mapped, src, "fr"));
        }
    }
}

/// Two source words against three target words with explicit scores.
struct Grid {
    lexicon: Lexicon,
    scores: Vec<f64>,
}

impl Grid {
    fn new(scores: Vec<f64>) -> Self {
        let words = ["en:a", "en:b", "fr:x", "fr:y", "fr:z"].iter().map(|w| LangWord::parse(w).unwrap()).collect();
        Grid {
            lexicon: Lexicon::from_words(words).unwrap(),
            scores,
        }
    }
}

impl Similarity for Grid {
    fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        self.scores[source * 3 + target - 2]
    }
}
