//! The Dice aligner and its reading as a dot product of L1-normalized
//! sentence-ID rows.
//!
//! With `S(a, b)` the number of aligned sentences containing both words,
//!
//! ```text
//! Dice(ws, wt) = 2·S(ws, wt) / (S(ws, *) · S(*, wt))
//! ```
//!
//! and the dot product of the two L1-normalized indicator rows is exactly half
//! of it. [`dice_via_dot`] computes the latter directly from the matrix.

use std::io::{BufRead, Write};

use crate::corpus::{LangWord, Lexicon, ParallelCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::Similarity;
use crate::matrix::{build_indicator_matrix, Granularity, SparseMatrix, WordFeatureMatrix};

/// Denominator of the coefficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiceVariant {
    /// `2·S(ws,wt) / (S(ws,*)·S(*,wt))`
    #[default]
    Product,
    /// The classical `2·S(ws,wt) / (S(ws,*) + S(*,wt))`.
    Sum,
}

/// Sentence co-occurrence counts for one language pair, computed on demand
/// by intersecting indicator rows.
#[derive(Clone, Debug)]
pub struct CooccurrenceStats {
    source_language: String,
    target_language: String,
    indicator: WordFeatureMatrix,
}

impl CooccurrenceStats {
    pub fn new(indicator: WordFeatureMatrix, source_language: &str, target_language: &str) -> Result<Self> {
        for lang in [source_language, target_language] {
            if !indicator.vocab.lexicon().contains_language(lang) {
                return Err(Error::UnknownLanguage(lang.to_owned()));
            }
        }
        Ok(CooccurrenceStats {
            source_language: source_language.to_owned(),
            target_language: target_language.to_owned(),
            indicator,
        })
    }

    pub fn from_corpus(
        corpus: &ParallelCorpus,
        vocab: &Vocabulary,
        source_language: &str,
        target_language: &str,
        granularity: Granularity,
    ) -> Result<Self> {
        let m = build_indicator_matrix(corpus, vocab, &[source_language, target_language], granularity)?;
        Self::new(m, source_language, target_language)
    }

    pub fn source_language(&self) -> &str {
        &self.source_language
    }

    pub fn target_language(&self) -> &str {
        &self.target_language
    }

    pub fn lexicon(&self) -> &Lexicon {
        self.indicator.vocab.lexicon()
    }

    pub fn indicator(&self) -> &WordFeatureMatrix {
        &self.indicator
    }

    /// `S(w, *)`: number of sentences containing the word.
    pub fn occurrences(&self, word: usize) -> usize {
        self.indicator.matrix.row_nnz(word)
    }

    /// `S(a, b)`: number of sentences containing both words.
    pub fn pair_count(&self, a: usize, b: usize) -> usize {
        self.indicator.matrix.overlap(a, b)
    }

    /// Coefficient for two lexicon indices.
    pub fn dice(&self, source: usize, target: usize, variant: DiceVariant) -> f64 {
        let both = self.pair_count(source, target) as f64;
        let (s, t) = (self.occurrences(source) as f64, self.occurrences(target) as f64);
        let denominator = match variant {
            DiceVariant::Product => s * t,
            DiceVariant::Sum => s + t,
        };
        if denominator == 0.0 {
            0.0
        } else {
            2.0 * both / denominator
        }
    }

    /// Writes the header `source target granularity n_features min_count`
    /// followed by `lang:word occurrences f1 f2 ...` for every word, listing
    /// the 0-based feature columns it occurs in.
    pub fn write_listing<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let (vocab, m) = (&self.indicator.vocab, &self.indicator.matrix);
        writeln!(
            out,
            "{} {} {} {} {}",
            self.source_language,
            self.target_language,
            self.indicator.granularity,
            m.n_cols(),
            vocab.min_count()
        )?;
        for (i, word) in vocab.lexicon().words().iter().enumerate() {
            write!(out, "{word} {}", vocab.occurrence_count(i))?;
            for c in m.row(i).0 {
                write!(out, " {c}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Reads the format written by [`CooccurrenceStats::write_listing`].
    pub fn read_listing<R: BufRead>(input: R, name: &str) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(name, 1, "missing header"))?
            .map_err(|e| Error::io(name, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::parse(name, 1, "header must be `source target granularity n_features min_count`");
        let [source, target, granularity, n_cols, min_count] = fields[..] else {
            return Err(bad_header());
        };
        let granularity: Granularity = granularity.parse().map_err(|_| bad_header())?;
        let n_cols: usize = n_cols.parse().map_err(|_| bad_header())?;
        let min_count: u64 = min_count.parse().map_err(|_| bad_header())?;

        let (mut words, mut occurrences, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields
                .next()
                .and_then(LangWord::parse)
                .ok_or_else(|| Error::parse(name, i + 2, "expected lang:word"))?;
            let mut numbers = fields.map(|f| f.parse::<usize>());
            let count = numbers
                .next()
                .and_then(|n| n.ok())
                .ok_or_else(|| Error::parse(name, i + 2, "expected occurrence count"))?;
            let row = numbers
                .map(|c| c.map(|c| (c, 1.0)))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::parse(name, i + 2, "bad feature index"))?;
            words.push(word);
            occurrences.push(count as u64);
            rows.push(row);
        }
        let matrix = SparseMatrix::from_rows(n_cols, rows)?;
        if matrix.iter().any(|(_, _, v)| v != 1.0) {
            return Err(Error::parse(name, 1, "repeated feature index"));
        }
        let sentence_counts = (0..matrix.n_rows()).map(|r| matrix.row_nnz(r) as u64).collect();
        let vocab = Vocabulary::from_parts(Lexicon::from_words(words)?, occurrences, sentence_counts, min_count);
        let indicator = WordFeatureMatrix {
            vocab,
            matrix,
            granularity,
        };
        Self::new(indicator, source, target)
    }

    fn lookup(&self, word: &LangWord) -> Result<usize> {
        self.lexicon()
            .get(word)
            .ok_or_else(|| Error::OutOfVocabulary(word.to_string()))
    }
}

/// Product-denominator Dice coefficient of two words.
pub fn dice_similarity(source: &LangWord, target: &LangWord, stats: &CooccurrenceStats) -> Result<f64> {
    let (s, t) = (stats.lookup(source)?, stats.lookup(target)?);
    Ok(stats.dice(s, t, DiceVariant::Product))
}

/// Dot product of two rows of an L1-normalized indicator matrix whose rows are
/// labelled by `lexicon`.
pub fn dice_via_dot(source: &LangWord, target: &LangWord, lexicon: &Lexicon, l1: &SparseMatrix) -> Result<f64> {
    let s = lexicon
        .get(source)
        .ok_or_else(|| Error::OutOfVocabulary(source.to_string()))?;
    let t = lexicon
        .get(target)
        .ok_or_else(|| Error::OutOfVocabulary(target.to_string()))?;
    Ok(l1.dot_rows(s, t))
}

/// Dice as a cross-lingual similarity function.
#[derive(Clone, Debug)]
pub struct DiceSimilarity {
    pub stats: CooccurrenceStats,
    pub variant: DiceVariant,
}

impl DiceSimilarity {
    pub fn new(stats: CooccurrenceStats) -> Self {
        DiceSimilarity {
            stats,
            variant: DiceVariant::Product,
        }
    }
}

impl Similarity for DiceSimilarity {
    fn lexicon(&self) -> &Lexicon {
        self.stats.lexicon()
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        self.stats.dice(source, target, self.variant)
    }
}
