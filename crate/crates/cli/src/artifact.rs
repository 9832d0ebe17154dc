//! Trained models on disk and the manifests describing them.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use xling::corpus::{corpus_files, load_document_keys, load_parallel_corpus};
use xling::{CooccurrenceStats, DiceSimilarity, Embeddings, ParallelCorpus, Similarity, TranslationTable};

use crate::train::{Hyper, Method, Mode};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub method: Method,
    /// For dice and model1 the first language is the source.
    pub languages: Vec<String>,
    pub mode: Mode,
    pub flags: Hyper,
    pub seed: u64,
    pub corpus_checksum: String,
}

impl Manifest {
    pub fn path_for(artifact: &Path) -> PathBuf {
        let mut name = artifact.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    pub fn write(&self, artifact: &Path) -> Result<()> {
        let path = Self::path_for(artifact);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(artifact: &Path) -> Result<Self> {
        let path = Self::path_for(artifact);
        let text = fs::read_to_string(&path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub enum Model {
    Embeddings(Embeddings),
    Table(TranslationTable),
    Dice(DiceSimilarity),
}

impl Model {
    pub fn similarity(&self) -> &dyn Similarity {
        match self {
            Model::Embeddings(e) => e,
            Model::Table(t) => t,
            Model::Dice(d) => d,
        }
    }

    /// Fails unless the model can score `source → target`.
    pub fn check_direction(&self, languages: &[String], source: &str, target: &str) -> Result<()> {
        if source == target {
            bail!("source and target language are both `{source}`");
        }
        let covered = match self {
            Model::Table(t) => t.source_language() == source && t.target_language() == target,
            _ => [source, target].iter().all(|l| languages.iter().any(|k| k == l)),
        };
        if !covered {
            bail!(
                "the model covers {} but {source}→{target} was requested",
                match self {
                    Model::Table(t) => format!("{}→{}", t.source_language(), t.target_language()),
                    _ => languages.join(","),
                }
            );
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        match self {
            Model::Embeddings(e) => e.write_text(&mut out)?,
            Model::Table(t) => t.write_dump(&mut out)?,
            Model::Dice(d) => d.stats.write_listing(&mut out)?,
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, manifest: &Manifest) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let input = BufReader::new(file);
        let name = path.display().to_string();
        Ok(match manifest.method {
            Method::Sgns | Method::SvdIdf | Method::SvdPpmi => Model::Embeddings(Embeddings::read_text(input, &name)?),
            Method::Model1 => {
                let [s, t] = &manifest.languages[..] else {
                    bail!("model1 manifest must list exactly two languages");
                };
                Model::Table(TranslationTable::read_dump(input, &name, s, t)?)
            }
            Method::Dice => Model::Dice(DiceSimilarity::new(CooccurrenceStats::read_listing(input, &name)?)),
        })
    }
}

/// A corpus directory restricted to some languages.
pub struct LoadedCorpus {
    pub corpus: ParallelCorpus,
    /// In the order requested, or sorted when all languages were requested.
    pub languages: Vec<String>,
    pub checksum: String,
}

/// `selection` is a comma-separated list of language codes or `all`.
pub fn load_corpus(dir: &Path, selection: &str, doc_ids: Option<&Path>) -> Result<LoadedCorpus> {
    let files = corpus_files(dir)?;
    let languages: Vec<String> = if selection == "all" {
        files.keys().cloned().collect()
    } else {
        selection.split(',').map(|l| l.trim().to_owned()).filter(|l| !l.is_empty()).collect()
    };
    let mut selected = Vec::with_capacity(languages.len());
    for lang in &languages {
        let Some(path) = files.get(lang) else {
            bail!("no {lang}.txt in {}", dir.display());
        };
        if selected.iter().any(|(l, _)| l == lang) {
            bail!("language `{lang}` listed twice");
        }
        selected.push((lang.clone(), path.clone()));
    }
    let checksum = checksum(&selected)?;
    let mut corpus = load_parallel_corpus(selected)?;
    if let Some(keys) = doc_ids {
        corpus = corpus.with_document_keys(load_document_keys(keys)?)?;
    }
    Ok(LoadedCorpus {
        corpus,
        languages,
        checksum,
    })
}

/// SHA-256 over the language codes and file contents, in language order.
pub fn checksum(files: &[(String, PathBuf)]) -> Result<String> {
    let mut sorted: Vec<&(String, PathBuf)> = files.iter().collect();
    sorted.sort();
    let mut hasher = Sha256::new();
    for (lang, path) in sorted {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        hasher.update(lang.as_bytes());
        hasher.update([0]);
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(&bytes);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

/// Checksum of the manifest's languages in `dir`.
pub fn corpus_checksum(dir: &Path, languages: &[String]) -> Result<String> {
    let files = corpus_files(dir)?;
    let selected = languages
        .iter()
        .map(|l| match files.get(l) {
            Some(p) => Ok((l.clone(), p.clone())),
            None => bail!("no {l}.txt in {}", dir.display()),
        })
        .collect::<Result<Vec<_>>>()?;
    checksum(&selected)
}
