//! Word alignment and dictionary induction benchmarks over any cross-lingual
//! similarity function.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{tokenize, LangWord, Lexicon};
use crate::error::{Error, Result};

/// A scorer over pairs of lexicon indices; higher means more similar.
///
/// Words missing from [`Similarity::lexicon`] are out of vocabulary.
pub trait Similarity: Sync {
    fn lexicon(&self) -> &Lexicon;

    fn score(&self, source: usize, target: usize) -> f64;
}

impl<T: Similarity + ?Sized> Similarity for &T {
    fn lexicon(&self) -> &Lexicon {
        (**self).lexicon()
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        (**self).score(source, target)
    }
}

impl<T: Similarity + ?Sized + Send> Similarity for Box<T> {
    fn lexicon(&self) -> &Lexicon {
        (**self).lexicon()
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        (**self).score(source, target)
    }
}

/// A link between 1-based source and target positions.
pub type Link = (usize, usize);

/// Predicted links per sentence ID.
pub type Alignments = BTreeMap<usize, BTreeSet<Link>>;

/// Links each in-vocabulary source token to its most similar in-vocabulary
/// target token. Out-of-vocabulary source tokens stay unaligned; out-of-vocabulary
/// target tokens are never chosen. Ties go to the lowest target position.
pub fn greedy_align<S: AsRef<str>, T: AsRef<str>>(
    source_tokens: &[S],
    source_language: &str,
    target_tokens: &[T],
    target_language: &str,
    sim: &dyn Similarity,
) -> BTreeSet<Link> {
    let lexicon = sim.lexicon();
    let targets: Vec<(usize, usize)> = target_tokens
        .iter()
        .enumerate()
        .filter_map(|(j, t)| lexicon.index_of(target_language, t.as_ref()).map(|w| (j + 1, w)))
        .collect();
    let mut links = BTreeSet::new();
    for (i, s) in source_tokens.iter().enumerate() {
        let Some(sw) = lexicon.index_of(source_language, s.as_ref()) else {
            continue;
        };
        let mut best: Option<(usize, f64)> = None;
        for &(pos, tw) in &targets {
            let score = sim.score(sw, tw);
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((pos, score));
            }
        }
        if let Some((pos, _)) = best {
            links.insert((i + 1, pos));
        }
    }
    links
}

/// Greedy alignment of every sentence pair; sentence IDs start at 1.
pub fn align_sentences(
    source: &[Vec<String>],
    source_language: &str,
    target: &[Vec<String>],
    target_language: &str,
    sim: &dyn Similarity,
) -> Result<Alignments> {
    if source.len() != target.len() {
        return Err(Error::SentenceMismatch(format!(
            "{} source sentences vs {} target sentences",
            source.len(),
            target.len()
        )));
    }
    let links: Vec<_> = source
        .par_iter()
        .zip(target.par_iter())
        .map(|(s, t)| greedy_align(s, source_language, t, target_language, sim))
        .collect();
    Ok(links.into_iter().enumerate().map(|(i, l)| (i + 1, l)).collect())
}

/// Sure and possible gold links of one sentence pair. `sure ⊆ possible`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SentenceGold {
    pub sure: BTreeSet<Link>,
    pub possible: BTreeSet<Link>,
}

/// Gold word alignments keyed by sentence ID.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldAlignment {
    pub sentences: BTreeMap<usize, SentenceGold>,
}

impl GoldAlignment {
    /// Adds a link; sure links are also possible links.
    pub fn insert(&mut self, sentence: usize, link: Link, sure: bool) {
        let entry = self.sentences.entry(sentence).or_default();
        if sure {
            entry.sure.insert(link);
        }
        entry.possible.insert(link);
    }

    /// Reads `sentID srcPos tgtPos flag` lines (flag `S` or `P`, `S` when
    /// omitted). Sentence IDs and positions are 1-based and checked against
    /// the token counts of the accompanying sentence files; every sentence ID
    /// `1..=len` gets an entry, linked or not.
    pub fn load(path: &Path, source_lengths: &[usize], target_lengths: &[usize]) -> Result<Self> {
        if source_lengths.len() != target_lengths.len() {
            return Err(Error::SentenceMismatch(format!(
                "{} source sentences vs {} target sentences",
                source_lengths.len(),
                target_lengths.len()
            )));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut gold = GoldAlignment::default();
        for sid in 1..=source_lengths.len() {
            gold.sentences.insert(sid, SentenceGold::default());
        }
        for (i, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let err = |m: &str| Error::parse(path, i + 1, m);
            if fields.len() != 3 && fields.len() != 4 {
                return Err(err("expected `sentID srcPos tgtPos flag`"));
            }
            let num = |f: &str| f.parse::<usize>().map_err(|_| err("expected a positive integer"));
            let (sid, s, t) = (num(fields[0])?, num(fields[1])?, num(fields[2])?);
            let sure = match fields.get(3).copied() {
                None | Some("S") => true,
                Some("P") => false,
                Some(_) => return Err(err("flag must be S or P")),
            };
            if sid == 0 || sid > source_lengths.len() {
                return Err(err("sentence ID out of range"));
            }
            if s == 0 || s > source_lengths[sid - 1] || t == 0 || t > target_lengths[sid - 1] {
                return Err(err("position outside the sentence"));
            }
            gold.insert(sid, (s, t), sure);
        }
        Ok(gold)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AerScore {
    pub aer: f64,
    pub one_minus_aer: f64,
}

/// Alignment error rate `1 − (|A∩S| + |A∩P|) / (|A| + |S|)` with counts summed
/// over the whole corpus. Defined as 0 when `|A| + |S| = 0`.
pub fn compute_aer(predicted: &Alignments, gold: &GoldAlignment) -> Result<AerScore> {
    let p_ids: BTreeSet<_> = predicted.keys().collect();
    let g_ids: BTreeSet<_> = gold.sentences.keys().collect();
    if p_ids != g_ids {
        let missing: Vec<String> = p_ids
            .symmetric_difference(&g_ids)
            .take(5)
            .map(|id| id.to_string())
            .collect();
        return Err(Error::SentenceMismatch(missing.join(", ")));
    }
    let (mut a, mut s, mut a_s, mut a_p) = (0usize, 0usize, 0usize, 0usize);
    for (sid, links) in predicted {
        let g = &gold.sentences[sid];
        a += links.len();
        s += g.sure.len();
        a_s += links.intersection(&g.sure).count();
        a_p += links.intersection(&g.possible).count();
    }
    let aer = if a + s == 0 {
        0.0
    } else {
        1.0 - (a_s + a_p) as f64 / (a + s) as f64
    };
    Ok(AerScore {
        aer,
        one_minus_aer: 1.0 - aer,
    })
}

/// Word-by-word translation pairs; a source word may have several translations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilingualDictionary {
    pub source_language: String,
    pub target_language: String,
    pub entries: Vec<(LangWord, LangWord)>,
}

impl BilingualDictionary {
    /// Builds a dictionary from surface pairs, dropping duplicates.
    pub fn from_pairs<S: AsRef<str>>(source_language: &str, target_language: &str, pairs: &[(S, S)]) -> Self {
        let mut seen = HashSet::new();
        let entries = pairs
            .iter()
            .map(|(s, t)| {
                (
                    LangWord::new(source_language, s.as_ref()),
                    LangWord::new(target_language, t.as_ref()),
                )
            })
            .filter(|pair| seen.insert(pair.clone()))
            .collect();
        BilingualDictionary {
            source_language: source_language.to_owned(),
            target_language: target_language.to_owned(),
            entries,
        }
    }

    /// Reads a `source<TAB>target` file. Both sides are tokenized like the
    /// corpus; entries that do not reduce to single tokens are dropped and
    /// counted in the second return value.
    pub fn load(path: &Path, source_language: &str, target_language: &str) -> Result<(Self, usize)> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs = Vec::new();
        let mut dropped = 0;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let Some((source, target)) = line.split_once('\t') else {
                return Err(Error::parse(path, i + 1, "expected `source<TAB>target`"));
            };
            let (s, t) = (tokenize(source), tokenize(target));
            if s.len() == 1 && t.len() == 1 {
                pairs.push((s[0].clone(), t[0].clone()));
            } else {
                dropped += 1;
            }
        }
        Ok((Self::from_pairs(source_language, target_language, &pairs), dropped))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// How dictionary pairs are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InductionMode {
    /// Every `(source, target)` pair is one item.
    #[default]
    Pair,
    /// Every source word is one item, correct if its prediction is any listed translation.
    AnyOf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InductionScore {
    /// `None` when no item has an in-vocabulary source word.
    pub p_at_1: Option<f64>,
    /// Fraction of items whose source word is in vocabulary.
    pub coverage: f64,
    pub scored: usize,
    pub total: usize,
}

/// Most similar word of `target_language` to `source`; ties go to the lowest index.
pub fn predict(sim: &dyn Similarity, source: usize, target_language: &str) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &t in sim.lexicon().indices_of(target_language) {
        let score = sim.score(source, t);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((t, score));
        }
    }
    best.map(|(t, _)| t)
}

/// The `k` most similar words of `target_language`, best first.
pub fn nearest(sim: &dyn Similarity, source: usize, target_language: &str, k: usize) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = sim
        .lexicon()
        .indices_of(target_language)
        .iter()
        .map(|&t| (t, sim.score(source, t)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Precision at one of dictionary induction against all target-language words.
pub fn induce_p_at_1(sim: &dyn Similarity, dict: &BilingualDictionary, mode: InductionMode) -> Result<InductionScore> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    let lexicon = sim.lexicon();
    let target_language = dict.target_language.as_str();

    // item = (source word, accepted translations)
    let mut items: Vec<(&LangWord, Vec<&LangWord>)> = Vec::new();
    match mode {
        InductionMode::Pair => items.extend(dict.entries.iter().map(|(s, t)| (s, vec![t]))),
        InductionMode::AnyOf => {
            let mut grouped: BTreeMap<&LangWord, Vec<&LangWord>> = BTreeMap::new();
            for (s, t) in &dict.entries {
                grouped.entry(s).or_default().push(t);
            }
            items.extend(grouped);
        }
    }

    let sources: BTreeSet<usize> = items.iter().filter_map(|(s, _)| lexicon.get(s)).collect();
    let predictions: BTreeMap<usize, Option<usize>> = sources
        .into_par_iter()
        .map(|s| (s, predict(sim, s, target_language)))
        .collect();

    let mut scored = 0;
    let mut correct = 0;
    for (source, translations) in &items {
        let Some(s) = lexicon.get(source) else {
            continue;
        };
        scored += 1;
        if let Some(p) = predictions[&s] {
            if translations.iter().any(|t| lexicon.word(p) == *t) {
                correct += 1;
            }
        }
    }
    Ok(InductionScore {
        p_at_1: (scored > 0).then(|| correct as f64 / scored as f64),
        coverage: scored as f64 / items.len() as f64,
        scored,
        total: items.len(),
    })
}

/// Reads a sentence file for the alignment benchmark: one sentence per line,
/// lowercased and split on whitespace so token positions match the gold file.
pub fn read_sentences(path: &Path) -> Result<Vec<Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split_whitespace().map(str::to_lowercase).collect())
        .collect())
}

/// One line of the results table: `benchmark src tgt method metric value`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub benchmark: String,
    pub source: String,
    pub target: String,
    pub method: String,
    pub metric: String,
    pub value: f64,
}

impl fmt::Display for ResultRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{:.6}",
            self.benchmark, self.source, self.target, self.method, self.metric, self.value
        )
    }
}
