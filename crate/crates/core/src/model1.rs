//! IBM Model-1 trained by expectation maximization.
//!
//! The translation table `t(target | source)` is kept sparse: a row holds only
//! the target words that co-occur with the source word in at least one aligned
//! sentence. The E-step is split into two parallel passes, first per sentence
//! (normalizers) and then per source row (expected counts), so the result does
//! not depend on the number of worker threads.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::corpus::{LangWord, Lexicon, ParallelCorpus, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::Similarity;

/// Source-side name of the empty word in table dumps.
pub const NULL_WORD: &str = "NULL";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Model1Config {
    pub iterations: usize,
    pub use_null: bool,
}

impl Default for Model1Config {
    fn default() -> Self {
        Model1Config {
            iterations: 5,
            use_null: true,
        }
    }
}

/// Row-stochastic conditional probabilities `t(target | source)` for one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct TranslationTable {
    source_language: String,
    target_language: String,
    lexicon: Lexicon,
    /// lexicon index → row, for source-language words
    row_of: Vec<Option<u32>>,
    /// row → lexicon index; `None` for the NULL row
    row_words: Vec<Option<usize>>,
    row_ptr: Vec<usize>,
    targets: Vec<u32>,
    probs: Vec<f64>,
}

impl TranslationTable {
    pub fn source_language(&self) -> &str {
        &self.source_language
    }

    pub fn target_language(&self) -> &str {
        &self.target_language
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.targets[range.clone()], &self.probs[range])
    }

    fn lookup(&self, row: usize, target: usize) -> f64 {
        let (targets, probs) = self.row(row);
        match targets.binary_search(&(target as u32)) {
            Ok(i) => probs[i],
            Err(_) => 0.0,
        }
    }

    /// `t(target | source)` for lexicon indices; 0 for unsupported pairs.
    pub fn prob(&self, source: usize, target: usize) -> f64 {
        match self.row_of.get(source).copied().flatten() {
            Some(r) => self.lookup(r as usize, target),
            None => 0.0,
        }
    }

    /// `t(target | NULL)`, or 0 when trained without NULL.
    pub fn null_prob(&self, target: usize) -> f64 {
        match self.row_words.iter().position(Option::is_none) {
            Some(r) => self.lookup(r, target),
            None => 0.0,
        }
    }

    /// Sum of every nonempty row, NULL included.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.row_words.len())
            .filter(|&r| self.row_ptr[r + 1] > self.row_ptr[r])
            .map(|r| self.row(r).1.iter().sum())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `(source, target, probability)` for every supported pair, sorted by the
    /// textual form of source then target. The NULL row uses [`NULL_WORD`].
    pub fn entries(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (r, word) in self.row_words.iter().enumerate() {
            let source = match word {
                Some(w) => self.lexicon.word(*w).to_string(),
                None => NULL_WORD.to_owned(),
            };
            let (targets, probs) = self.row(r);
            for (&t, &p) in targets.iter().zip(probs) {
                out.push((source.clone(), self.lexicon.word(t as usize).to_string(), p));
            }
        }
        out.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        out
    }

    /// Writes `n_entries` followed by sorted `src_word tgt_word prob` lines.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let entries = self.entries();
        writeln!(out, "{}", entries.len())?;
        for (s, t, p) in entries {
            writeln!(out, "{s} {t} {p}")?;
        }
        Ok(())
    }

    /// Reads a table dump. The lexicon is rebuilt from the words that appear in it.
    pub fn read_dump<R: BufRead>(input: R, name: &str, source_language: &str, target_language: &str) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(name, 1, "missing header"))?
            .map_err(|e| Error::io(name, e))?;
        let n: usize = header
            .trim()
            .parse()
            .map_err(|_| Error::parse(name, 1, "header must be the entry count"))?;
        let mut raw: Vec<(Option<LangWord>, LangWord, f64)> = Vec::with_capacity(n);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| Error::parse(name, i + 2, m);
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [s, t, p] = fields[..] else {
                return Err(bad("expected `src_word tgt_word prob`"));
            };
            let source = if s == NULL_WORD {
                None
            } else {
                let w = LangWord::parse(s).ok_or_else(|| bad("expected lang:word"))?;
                if w.language != source_language {
                    return Err(bad("source word of the wrong language"));
                }
                Some(w)
            };
            let target = LangWord::parse(t).ok_or_else(|| bad("expected lang:word"))?;
            if target.language != target_language {
                return Err(bad("target word of the wrong language"));
            }
            let p: f64 = p.parse().map_err(|_| bad("bad probability"))?;
            raw.push((source, target, p));
        }
        if raw.len() != n {
            return Err(Error::parse(name, 1, format!("header says {n} entries, found {}", raw.len())));
        }
        let mut words: Vec<LangWord> = raw
            .iter()
            .flat_map(|(s, t, _)| s.iter().chain(std::iter::once(t)))
            .cloned()
            .collect();
        words.sort();
        words.dedup();
        let lexicon = Lexicon::from_words(words)?;

        // (source word or NULL, [(target, prob)])
        type Row = (Option<usize>, Vec<(u32, f64)>);
        let mut rows: Vec<Row> = Vec::new();
        let mut row_index = std::collections::HashMap::new();
        for (s, t, p) in raw {
            let key = s.map(|w| lexicon.get(&w).unwrap());
            let r = *row_index.entry(key).or_insert_with(|| {
                rows.push((key, Vec::new()));
                rows.len() - 1
            });
            rows[r].1.push((lexicon.get(&t).unwrap() as u32, p));
        }
        let mut row_of = vec![None; lexicon.len()];
        let mut row_words = Vec::with_capacity(rows.len());
        let mut row_ptr = vec![0];
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        for (r, (word, mut cells)) in rows.into_iter().enumerate() {
            if let Some(w) = word {
                row_of[w] = Some(r as u32);
            }
            row_words.push(word);
            cells.sort_by_key(|c| c.0);
            for (t, p) in cells {
                targets.push(t);
                probs.push(p);
            }
            row_ptr.push(targets.len());
        }
        Ok(TranslationTable {
            source_language: source_language.to_owned(),
            target_language: target_language.to_owned(),
            lexicon,
            row_of,
            row_words,
            row_ptr,
            targets,
            probs,
        })
    }
}

impl Similarity for TranslationTable {
    fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        self.prob(source, target)
    }
}

/// One aligned sentence pair reduced to vocabulary words.
#[derive(Clone, Debug)]
struct SentencePair {
    /// (row, multiplicity), excluding NULL
    sources: Vec<(u32, u32)>,
    source_len: u32,
    /// (lexicon index, multiplicity)
    targets: Vec<(u32, u32)>,
}

fn count_unique(mut ids: Vec<u32>) -> Vec<(u32, u32)> {
    ids.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::new();
    for id in ids {
        match out.last_mut() {
            Some((last, n)) if *last == id => *n += 1,
            _ => out.push((id, 1)),
        }
    }
    out
}

/// EM state for one translation direction.
pub struct Model1Trainer {
    table: TranslationTable,
    pairs: Vec<SentencePair>,
    /// row → (sentence, multiplicity)
    postings: Vec<Vec<(u32, u32)>>,
    null_row: Option<usize>,
    iterations_done: usize,
}

impl Model1Trainer {
    pub fn new(
        corpus: &ParallelCorpus,
        vocab: &Vocabulary,
        source_language: &str,
        target_language: &str,
        use_null: bool,
    ) -> Result<Self> {
        let src = corpus
            .language_index(source_language)
            .ok_or_else(|| Error::UnknownLanguage(source_language.to_owned()))?;
        let tgt = corpus
            .language_index(target_language)
            .ok_or_else(|| Error::UnknownLanguage(target_language.to_owned()))?;
        if src == tgt {
            return Err(Error::InvalidConfig("source and target language must differ".into()));
        }
        let vocab = vocab.restrict(&[source_language, target_language]);
        let lexicon = vocab.lexicon().clone();
        let token_map = lexicon.map_tokens(corpus);

        let source_words = lexicon.indices_of(source_language).to_vec();
        let mut row_of = vec![None; lexicon.len()];
        for (r, &w) in source_words.iter().enumerate() {
            row_of[w] = Some(r as u32);
        }
        let mut row_words: Vec<Option<usize>> = source_words.iter().map(|&w| Some(w)).collect();
        let null_row = use_null.then(|| {
            row_words.push(None);
            row_words.len() - 1
        });

        let mut overlap = false;
        let mut pairs = Vec::new();
        for sid in 0..corpus.num_sentences() {
            let (Some(s_ids), Some(t_ids)) = (corpus.token_ids(src, sid), corpus.token_ids(tgt, sid)) else {
                continue;
            };
            overlap = true;
            let sources: Vec<u32> = s_ids
                .iter()
                .filter_map(|&id| token_map[src][id as usize])
                .map(|w| row_of[w].unwrap())
                .collect();
            let targets: Vec<u32> = t_ids
                .iter()
                .filter_map(|&id| token_map[tgt][id as usize])
                .map(|w| w as u32)
                .collect();
            if targets.is_empty() || (sources.is_empty() && !use_null) {
                continue;
            }
            pairs.push(SentencePair {
                source_len: sources.len() as u32,
                sources: count_unique(sources),
                targets: count_unique(targets),
            });
        }
        if !overlap {
            return Err(Error::NoOverlap(source_language.to_owned(), target_language.to_owned()));
        }

        let mut postings: Vec<Vec<(u32, u32)>> = vec![Vec::new(); row_words.len()];
        for (i, pair) in pairs.iter().enumerate() {
            for &(r, m) in &pair.sources {
                postings[r as usize].push((i as u32, m));
            }
            if let Some(n) = null_row {
                postings[n].push((i as u32, 1));
            }
        }

        // support: targets co-occurring with each row, uniform initial mass
        let support: Vec<Vec<u32>> = postings
            .par_iter()
            .map(|posting| {
                let mut row: Vec<u32> = posting
                    .iter()
                    .flat_map(|&(i, _)| pairs[i as usize].targets.iter().map(|&(t, _)| t))
                    .collect();
                row.sort_unstable();
                row.dedup();
                row
            })
            .collect();
        let mut row_ptr = vec![0];
        let mut targets = Vec::new();
        let mut probs = Vec::new();
        for row in support {
            let p = 1.0 / row.len() as f64;
            probs.extend(std::iter::repeat_n(p, row.len()));
            targets.extend(row);
            row_ptr.push(targets.len());
        }

        Ok(Model1Trainer {
            table: TranslationTable {
                source_language: source_language.to_owned(),
                target_language: target_language.to_owned(),
                lexicon,
                row_of,
                row_words,
                row_ptr,
                targets,
                probs,
            },
            pairs,
            postings,
            null_row,
            iterations_done: 0,
        })
    }

    pub fn table(&self) -> &TranslationTable {
        &self.table
    }

    pub fn into_table(self) -> TranslationTable {
        self.table
    }

    pub fn iterations_done(&self) -> usize {
        self.iterations_done
    }

    /// Per sentence, `1 / Σ_s t(t|s)` for each distinct target word, plus the
    /// corpus log-likelihood of the current table.
    fn normalizers(&self) -> (Vec<Vec<f64>>, f64) {
        let table = &self.table;
        let per_sentence: Vec<(Vec<f64>, f64)> = self
            .pairs
            .par_iter()
            .map(|pair| {
                let denom = pair.source_len as f64 + if self.null_row.is_some() { 1.0 } else { 0.0 };
                let mut ll = 0.0;
                let inv = pair
                    .targets
                    .iter()
                    .map(|&(t, count)| {
                        let mut z = 0.0;
                        for &(r, m) in &pair.sources {
                            z += m as f64 * table.lookup(r as usize, t as usize);
                        }
                        if let Some(n) = self.null_row {
                            z += table.lookup(n, t as usize);
                        }
                        ll += count as f64 * (z / denom).ln();
                        1.0 / z
                    })
                    .collect();
                (inv, ll)
            })
            .collect();
        let ll = per_sentence.iter().map(|(_, ll)| ll).sum();
        (per_sentence.into_iter().map(|(inv, _)| inv).collect(), ll)
    }

    /// Corpus log-likelihood `Σ_pairs Σ_t log(1/(l+1) · Σ_s t(t|s))` of the current table.
    pub fn log_likelihood(&self) -> f64 {
        self.normalizers().1
    }

    /// One EM pass. Returns the log-likelihood of the table before the update.
    pub fn step(&mut self) -> f64 {
        let (inv_z, ll) = self.normalizers();
        let table = &self.table;
        let rows: Vec<Vec<f64>> = self
            .postings
            .par_iter()
            .enumerate()
            .map(|(r, posting)| {
                let (targets, probs) = table.row(r);
                let mut counts = vec![0.0; targets.len()];
                for &(i, m) in posting {
                    let pair = &self.pairs[i as usize];
                    for (&(t, count), &inv) in pair.targets.iter().zip(&inv_z[i as usize]) {
                        let k = targets.binary_search(&t).expect("target in row support");
                        counts[k] += (m * count) as f64 * probs[k] * inv;
                    }
                }
                let total: f64 = counts.iter().sum();
                if total > 0.0 {
                    counts.iter_mut().for_each(|c| *c /= total);
                }
                counts
            })
            .collect();
        self.table.probs = rows.concat();
        self.iterations_done += 1;
        ll
    }
}

/// Trains `t(target | source)` with exactly `config.iterations` EM passes.
pub fn train_model1(
    corpus: &ParallelCorpus,
    vocab: &Vocabulary,
    source_language: &str,
    target_language: &str,
    config: Model1Config,
) -> Result<TranslationTable> {
    if config.iterations == 0 {
        return Err(Error::InvalidConfig("Model-1 needs at least one iteration".into()));
    }
    let mut trainer = Model1Trainer::new(corpus, vocab, source_language, target_language, config.use_null)?;
    for _ in 0..config.iterations {
        let ll = trainer.step();
        log::debug!("model1 {source_language}→{target_language} iteration {}: log-likelihood {ll}", trainer.iterations_done());
    }
    Ok(trainer.into_table())
}
