//! Corpus ingestion: tokenization, sentence-ID assignment and the shared
//! language-tagged vocabulary.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::error::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 2;

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

/// Lowercases `line`, isolates every maximal run of punctuation characters and
/// splits the result on whitespace.
///
/// ```
/// assert_eq!(xling::tokenize("don't stop!"), ["don", "'", "t", "stop", "!"]);
/// ```
pub fn tokenize(line: &str) -> Vec<String> {
    let lowered = line.to_lowercase();
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut current_punct = false;
    for c in lowered.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        let punct = is_punctuation(c);
        if !current.is_empty() && punct != current_punct {
            tokens.push(std::mem::take(&mut current));
        }
        current_punct = punct;
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// A word tagged with its language. Identical surfaces in different
/// languages are different words.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LangWord {
    pub language: String,
    pub surface: String,
}

impl LangWord {
    pub fn new(language: impl Into<String>, surface: &str) -> Self {
        LangWord {
            language: language.into(),
            surface: surface.to_lowercase(),
        }
    }

    /// Parses the `lang:surface` form used in artifact files.
    pub fn parse(tagged: &str) -> Option<Self> {
        let (language, surface) = tagged.split_once(':')?;
        if language.is_empty() || surface.is_empty() {
            return None;
        }
        Some(LangWord::new(language, surface))
    }
}

impl fmt::Display for LangWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.language, self.surface)
    }
}

#[derive(Clone, Debug, Default)]
struct LanguageText {
    surfaces: Vec<String>,
    ids: HashMap<String, u32>,
    sentences: Vec<Option<Vec<u32>>>,
}

impl LanguageText {
    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.surfaces.len() as u32;
        self.surfaces.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }

    fn push(&mut self, sentence: Option<Vec<String>>) {
        let ids = sentence.map(|tokens| tokens.iter().map(|t| self.intern(t)).collect());
        self.sentences.push(ids);
    }
}

/// Language-tagged token sequences sharing one contiguous range of sentence IDs.
///
/// Tokens are interned per language; a sentence is either present (possibly
/// empty) or absent for a language.
#[derive(Clone, Debug)]
pub struct ParallelCorpus {
    languages: Vec<String>,
    texts: Vec<LanguageText>,
    n_sentences: usize,
    document_keys: Option<Vec<String>>,
}

impl ParallelCorpus {
    /// Builds a corpus from raw lines per language. Line `i` of every language
    /// is sentence ID `i`; blank lines and missing trailing lines are absent.
    pub fn from_lines<L, S>(languages: L) -> Result<Self>
    where
        L: IntoIterator<Item = (String, Vec<S>)>,
        S: AsRef<str>,
    {
        let tokenized = languages
            .into_iter()
            .map(|(lang, lines)| {
                let sentences = lines
                    .iter()
                    .map(|line| {
                        let line = line.as_ref();
                        if line.trim().is_empty() {
                            None
                        } else {
                            Some(tokenize(line))
                        }
                    })
                    .collect();
                (lang, sentences)
            })
            .collect::<Vec<_>>();
        Self::from_tokens(tokenized)
    }

    /// Builds a corpus from already tokenized sentences. Tokens are lowercased.
    pub fn from_tokens(languages: Vec<(String, Vec<Option<Vec<String>>>)>) -> Result<Self> {
        if languages.len() < 2 {
            return Err(Error::TooFewLanguages(languages.len()));
        }
        let n_sentences = languages.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
        let mut names = Vec::with_capacity(languages.len());
        let mut texts = Vec::with_capacity(languages.len());
        for (lang, sentences) in languages {
            if names.contains(&lang) {
                return Err(Error::InvalidConfig(format!("language `{lang}` given twice")));
            }
            let mut text = LanguageText::default();
            for sentence in sentences {
                text.push(sentence.map(|tokens| tokens.iter().map(|t| t.to_lowercase()).collect()));
            }
            text.sentences.resize(n_sentences, None);
            names.push(lang);
            texts.push(text);
        }
        let nonempty = texts
            .iter()
            .any(|t| t.sentences.iter().flatten().any(|s| !s.is_empty()));
        if !nonempty {
            return Err(Error::EmptyCorpus);
        }
        Ok(ParallelCorpus {
            languages: names,
            texts,
            n_sentences,
            document_keys: None,
        })
    }

    /// Attaches one document key per sentence ID for document-granularity features.
    pub fn with_document_keys(mut self, keys: Vec<String>) -> Result<Self> {
        if keys.len() != self.n_sentences {
            return Err(Error::DocumentKeyMismatch {
                expected: self.n_sentences,
                got: keys.len(),
            });
        }
        self.document_keys = Some(keys);
        Ok(self)
    }

    pub fn document_keys(&self) -> Option<&[String]> {
        self.document_keys.as_deref()
    }

    pub fn languages(&self) -> &[String] {
        &self.languages
    }

    pub fn language_index(&self, language: &str) -> Option<usize> {
        self.languages.iter().position(|l| l == language)
    }

    pub fn num_sentences(&self) -> usize {
        self.n_sentences
    }

    /// Interned token IDs of sentence `sentence` in language `lang`, or `None` if absent.
    pub fn token_ids(&self, lang: usize, sentence: usize) -> Option<&[u32]> {
        self.texts[lang].sentences[sentence].as_deref()
    }

    pub fn surface(&self, lang: usize, token: u32) -> &str {
        &self.texts[lang].surfaces[token as usize]
    }

    pub fn num_types(&self, lang: usize) -> usize {
        self.texts[lang].surfaces.len()
    }

    /// Tokens of a sentence as strings, or `None` if absent.
    pub fn tokens(&self, lang: usize, sentence: usize) -> Option<Vec<&str>> {
        self.token_ids(lang, sentence)
            .map(|ids| ids.iter().map(|&id| self.surface(lang, id)).collect())
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r').to_owned())
        .collect())
}

/// Loads a line-aligned corpus, one UTF-8 file per language.
pub fn load_parallel_corpus<I, P>(files: I) -> Result<ParallelCorpus>
where
    I: IntoIterator<Item = (String, P)>,
    P: AsRef<Path>,
{
    let mut languages = Vec::new();
    for (lang, path) in files {
        languages.push((lang, read_lines(path.as_ref())?));
    }
    ParallelCorpus::from_lines(languages)
}

/// Lists `<lang>.txt` files of a corpus directory, sorted by language code.
pub fn corpus_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = BTreeMap::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("txt") {
            continue;
        }
        if let Some(lang) = path.file_stem().and_then(|s| s.to_str()) {
            files.insert(lang.to_owned(), path);
        }
    }
    Ok(files)
}

/// Reads one document key per line, aligned with sentence IDs.
pub fn load_document_keys(path: &Path) -> Result<Vec<String>> {
    let lines = read_lines(path)?;
    lines
        .into_iter()
        .enumerate()
        .map(|(i, line)| {
            let key = line.trim();
            if key.is_empty() {
                Err(Error::parse(path, i + 1, "blank document key"))
            } else {
                Ok(key.to_owned())
            }
        })
        .collect()
}

/// Bidirectional map between language-tagged words and dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lexicon {
    words: Vec<LangWord>,
    by_language: BTreeMap<String, HashMap<String, usize>>,
    language_indices: BTreeMap<String, Vec<usize>>,
}

impl Lexicon {
    /// Indexes `words` in the order given. Duplicates are rejected.
    pub fn from_words(words: Vec<LangWord>) -> Result<Self> {
        let mut by_language: BTreeMap<String, HashMap<String, usize>> = BTreeMap::new();
        let mut language_indices: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, w) in words.iter().enumerate() {
            let map = by_language.entry(w.language.clone()).or_default();
            if map.insert(w.surface.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate word `{w}`")));
            }
            language_indices.entry(w.language.clone()).or_default().push(i);
        }
        Ok(Lexicon {
            words,
            by_language,
            language_indices,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, index: usize) -> &LangWord {
        &self.words[index]
    }

    pub fn words(&self) -> &[LangWord] {
        &self.words
    }

    pub fn index_of(&self, language: &str, surface: &str) -> Option<usize> {
        self.by_language.get(language)?.get(surface).copied()
    }

    pub fn get(&self, word: &LangWord) -> Option<usize> {
        self.index_of(&word.language, &word.surface)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.language_indices.keys().map(String::as_str)
    }

    pub fn contains_language(&self, language: &str) -> bool {
        self.language_indices.contains_key(language)
    }

    /// Indices of all words of `language`, ascending.
    pub fn indices_of(&self, language: &str) -> &[usize] {
        self.language_indices
            .get(language)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Maps every interned corpus token to its lexicon index, per corpus language.
    pub fn map_tokens(&self, corpus: &ParallelCorpus) -> Vec<Vec<Option<usize>>> {
        (0..corpus.languages().len())
            .map(|lang| {
                let name = &corpus.languages()[lang];
                (0..corpus.num_types(lang) as u32)
                    .map(|id| self.index_of(name, corpus.surface(lang, id)))
                    .collect()
            })
            .collect()
    }
}

/// The shared vocabulary: every language-tagged word occurring at least
/// `min_count` times, with occurrence and sentence statistics.
///
/// Indices are assigned in (language, surface) order.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    lexicon: Lexicon,
    occurrence_counts: Vec<u64>,
    sentence_counts: Vec<u64>,
    min_count: u64,
}

impl Vocabulary {
    pub(crate) fn from_parts(lexicon: Lexicon, occurrence_counts: Vec<u64>, sentence_counts: Vec<u64>, min_count: u64) -> Self {
        Vocabulary {
            lexicon,
            occurrence_counts,
            sentence_counts,
            min_count,
        }
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn occurrence_count(&self, index: usize) -> u64 {
        self.occurrence_counts[index]
    }

    /// Number of distinct sentence IDs containing the word, `I(w,*)`.
    pub fn sentence_count(&self, index: usize) -> u64 {
        self.sentence_counts[index]
    }

    /// Keeps only the words of the given languages, preserving relative order.
    pub fn restrict<S: AsRef<str>>(&self, languages: &[S]) -> Vocabulary {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let lang = &self.lexicon.word(i).language;
                languages.iter().any(|l| l.as_ref() == lang)
            })
            .collect();
        let words = keep.iter().map(|&i| self.lexicon.word(i).clone()).collect();
        Vocabulary {
            lexicon: Lexicon::from_words(words).expect("subset of a valid lexicon"),
            occurrence_counts: keep.iter().map(|&i| self.occurrence_counts[i]).collect(),
            sentence_counts: keep.iter().map(|&i| self.sentence_counts[i]).collect(),
            min_count: self.min_count,
        }
    }
}

/// Collects every language-tagged word with at least `min_count` token occurrences.
pub fn build_vocabulary(corpus: &ParallelCorpus, min_count: u64) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::InvalidConfig("min_count must be positive".into()));
    }
    let mut entries: Vec<(LangWord, u64, u64)> = Vec::new();
    for (lang, name) in corpus.languages().iter().enumerate() {
        let n_types = corpus.num_types(lang);
        let mut occurrences = vec![0u64; n_types];
        let mut sentences = vec![0u64; n_types];
        let mut last_seen = vec![usize::MAX; n_types];
        for sid in 0..corpus.num_sentences() {
            let Some(ids) = corpus.token_ids(lang, sid) else {
                continue;
            };
            for &id in ids {
                let id = id as usize;
                occurrences[id] += 1;
                if last_seen[id] != sid {
                    last_seen[id] = sid;
                    sentences[id] += 1;
                }
            }
        }
        for id in 0..n_types {
            if occurrences[id] >= min_count {
                let word = LangWord {
                    language: name.clone(),
                    surface: corpus.surface(lang, id as u32).to_owned(),
                };
                entries.push((word, occurrences[id], sentences[id]));
            }
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let occurrence_counts = entries.iter().map(|e| e.1).collect();
    let sentence_counts = entries.iter().map(|e| e.2).collect();
    let words = entries.into_iter().map(|e| e.0).collect();
    Ok(Vocabulary {
        lexicon: Lexicon::from_words(words)?,
        occurrence_counts,
        sentence_counts,
        min_count,
    })
}
