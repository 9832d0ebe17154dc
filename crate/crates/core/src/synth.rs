//! Synthetic parallel corpora with a known translation lexicon.
//!
//! Each sentence is a bag of concepts drawn uniformly from a shared lexicon;
//! every language renders concept `i` as its own surface form, given by a
//! random bijection. Optionally every token is dropped independently with a
//! fixed probability per language, which blurs the sentence-ID signal.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::ParallelCorpus;
use crate::error::Result;
use crate::eval::BilingualDictionary;

#[derive(Clone, Debug)]
pub struct SyntheticSpec {
    pub languages: Vec<String>,
    pub lexicon_size: usize,
    pub sentences: usize,
    pub min_len: usize,
    pub max_len: usize,
    /// Probability of dropping each token, independently per language.
    pub deletion: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            languages: vec!["en".into(), "fr".into()],
            lexicon_size: 50,
            sentences: 500,
            min_len: 3,
            max_len: 10,
            deletion: 0.0,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub corpus: ParallelCorpus,
    /// Per language, the surface form of each concept.
    pub surfaces: Vec<Vec<String>>,
    pub languages: Vec<String>,
}

impl SyntheticCorpus {
    pub fn generate(spec: &SyntheticSpec) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let surfaces: Vec<Vec<String>> = spec
            .languages
            .iter()
            .map(|_| {
                let mut ids: Vec<usize> = (0..spec.lexicon_size).collect();
                ids.shuffle(&mut rng);
                ids.into_iter().map(|i| format!("w{i}")).collect()
            })
            .collect();
        let mut lines: Vec<Vec<String>> = vec![Vec::with_capacity(spec.sentences); spec.languages.len()];
        for _ in 0..spec.sentences {
            let len = rng.gen_range(spec.min_len..=spec.max_len);
            let concepts: Vec<usize> = (0..len).map(|_| rng.gen_range(0..spec.lexicon_size)).collect();
            for (lang, out) in lines.iter_mut().enumerate() {
                let tokens: Vec<&str> = concepts
                    .iter()
                    .filter(|_| spec.deletion == 0.0 || !rng.gen_bool(spec.deletion))
                    .map(|&c| surfaces[lang][c].as_str())
                    .collect();
                out.push(tokens.join(" "));
            }
        }
        let tokens = spec
            .languages
            .iter()
            .cloned()
            .zip(lines)
            .map(|(lang, lines)| {
                let sentences = lines
                    .iter()
                    .map(|l| Some(l.split_whitespace().map(str::to_owned).collect()))
                    .collect();
                (lang, sentences)
            })
            .collect();
        Ok(SyntheticCorpus {
            corpus: ParallelCorpus::from_tokens(tokens)?,
            surfaces,
            languages: spec.languages.clone(),
        })
    }

    /// The gold bijection between two languages as a dictionary.
    pub fn dictionary(&self, source: &str, target: &str) -> BilingualDictionary {
        let s = self.languages.iter().position(|l| l == source).expect("known source language");
        let t = self.languages.iter().position(|l| l == target).expect("known target language");
        let pairs: Vec<(&str, &str)> = self.surfaces[s]
            .iter()
            .zip(&self.surfaces[t])
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        BilingualDictionary::from_pairs(source, target, &pairs)
    }

    /// Raw lines per language, as they would appear in corpus files.
    pub fn lines(&self, language: &str) -> Vec<String> {
        let lang = self.corpus.language_index(language).expect("known language");
        (0..self.corpus.num_sentences())
            .map(|sid| self.corpus.tokens(lang, sid).map(|t| t.join(" ")).unwrap_or_default())
            .collect()
    }
}
