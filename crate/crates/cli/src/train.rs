//! Training any of the supported methods from a loaded corpus.

use std::fmt;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use xling::model1::train_model1;
use xling::svd::{svd_embeddings, SvdInput};
use xling::{
    build_indicator_matrix, build_vocabulary, train_sid_sgns, CooccurrenceStats, DiceSimilarity, Granularity,
    Model1Config, ParallelCorpus, SgnsConfig, SvdConfig, TrainingMode,
};

use crate::artifact::Model;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[value(name = "dice")]
    Dice,
    #[value(name = "model1")]
    Model1,
    #[value(name = "sgns")]
    Sgns,
    #[value(name = "svd-idf")]
    SvdIdf,
    #[value(name = "svd-ppmi")]
    SvdPpmi,
}

impl Method {
    fn is_bilingual_only(self) -> bool {
        matches!(self, Method::Dice | Method::Model1)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Bilingual,
    Multilingual,
}

impl From<Mode> for TrainingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Bilingual => TrainingMode::Bilingual,
            Mode::Multilingual => TrainingMode::Multilingual,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GranularityArg {
    #[default]
    Sentence,
    Document,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Sentence => Granularity::Sentence,
            GranularityArg::Document => Granularity::Document,
        }
    }
}

/// Hyperparameters shared by all methods; each method reads the ones it uses.
#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    /// Embedding dimension (sgns, svd-*)
    #[arg(long, default_value_t = 500)]
    pub dim: usize,
    /// Training epochs (sgns)
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Negative samples per positive pair (sgns)
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    /// Context distribution smoothing exponent (sgns)
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    /// EM iterations (model1)
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    /// Minimum token occurrences for a word to enter the vocabulary
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 1 gives bit-reproducible results
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value_t = GranularityArg::Sentence)]
    pub granularity: GranularityArg,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            dim: 500,
            epochs: 100,
            negatives: 5,
            alpha: 0.75,
            iterations: 5,
            min_count: 2,
            seed: 1,
            threads: 1,
            granularity: GranularityArg::Sentence,
        }
    }
}

/// Rejects flag combinations no method supports.
pub fn validate(method: Method, mode: Mode, languages: &[String], hyper: &Hyper) -> Result<()> {
    if method.is_bilingual_only() && mode == Mode::Multilingual {
        bail!("--mode multilingual is not available for {method}, which is bilingual");
    }
    match mode {
        Mode::Bilingual if languages.len() != 2 => {
            bail!("bilingual training needs exactly 2 languages, got {}", languages.len())
        }
        Mode::Multilingual if languages.len() < 2 => {
            bail!("multilingual training needs at least 2 languages, got {}", languages.len())
        }
        _ => {}
    }
    if method == Method::Model1 && hyper.granularity == GranularityArg::Document {
        bail!("model1 aligns sentence pairs and does not support --granularity document");
    }
    if hyper.threads == 0 {
        bail!("--threads must be at least 1");
    }
    Ok(())
}

pub fn train(corpus: &ParallelCorpus, method: Method, mode: Mode, languages: &[String], hyper: &Hyper) -> Result<Model> {
    validate(method, mode, languages, hyper)?;
    let vocab = build_vocabulary(corpus, hyper.min_count)?;
    let granularity = hyper.granularity.into();
    log::info!("{method}: {} vocabulary words over {}", vocab.len(), languages.join(","));
    Ok(match method {
        Method::Dice => {
            let stats = CooccurrenceStats::from_corpus(corpus, &vocab, &languages[0], &languages[1], granularity)?;
            Model::Dice(DiceSimilarity::new(stats))
        }
        Method::Model1 => {
            let config = Model1Config {
                iterations: hyper.iterations,
                ..Model1Config::default()
            };
            Model::Table(train_model1(corpus, &vocab, &languages[0], &languages[1], config)?)
        }
        Method::Sgns => {
            let m = build_indicator_matrix(corpus, &vocab, languages, granularity)?;
            let config = SgnsConfig {
                dim: hyper.dim,
                epochs: hyper.epochs,
                negatives: hyper.negatives,
                alpha: hyper.alpha,
                seed: hyper.seed,
                threads: hyper.threads,
                ..SgnsConfig::default()
            };
            Model::Embeddings(train_sid_sgns(&m, &config, mode.into())?)
        }
        Method::SvdIdf | Method::SvdPpmi => {
            let m = build_indicator_matrix(corpus, &vocab, languages, granularity)?;
            let config = SvdConfig {
                dim: hyper.dim,
                seed: hyper.seed,
                ..SvdConfig::default()
            };
            let input = if method == Method::SvdIdf {
                SvdInput::Idf
            } else {
                SvdInput::PositivePmi
            };
            Model::Embeddings(svd_embeddings(&m, input, &config)?)
        }
    })
}
