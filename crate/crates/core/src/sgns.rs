//! Skip-gram with negative sampling applied to the word × sentence-ID matrix.
//!
//! Every occupied cell `(w, f)` of the indicator matrix is one positive
//! training pair per epoch. For each of them `k` negative features are drawn
//! from the smoothed column distribution `P(f) ∝ #(*,f)^α` and the usual
//! logistic updates are applied to the word vector of `w` and the feature
//! vectors of `f` and the negatives.
//!
//! With `threads == 1` training is a fixed sequence of floating-point
//! operations determined by the seed. With more threads, workers update the
//! shared vectors without locks and concurrent writes may be lost.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, WeightedAliasIndex};

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::matrix::WordFeatureMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub epochs: usize,
    /// Negative samples per positive pair.
    pub negatives: usize,
    /// Context distribution smoothing exponent.
    pub alpha: f64,
    /// Initial learning rate, decayed linearly towards zero over training.
    pub learning_rate: f64,
    pub seed: u64,
    pub threads: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 500,
            epochs: 100,
            negatives: 5,
            alpha: 0.75,
            learning_rate: 0.025,
            seed: 1,
            threads: 1,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if self.dim == 0 {
            return bad("dim must be ≥ 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be ≥ 1");
        }
        if self.negatives == 0 {
            return bad("negatives must be ≥ 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must be in (0, 1]");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be positive");
        }
        if self.threads == 0 {
            return bad("threads must be ≥ 1");
        }
        Ok(())
    }
}

/// Whether the matrix holds exactly two languages or any number of them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrainingMode {
    #[default]
    Bilingual,
    Multilingual,
}

impl FromStr for TrainingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bilingual" => Ok(TrainingMode::Bilingual),
            "multilingual" => Ok(TrainingMode::Multilingual),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for TrainingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainingMode::Bilingual => "bilingual",
            TrainingMode::Multilingual => "multilingual",
        })
    }
}

/// Draws feature columns with probability `#(*,f)^α / Σ #(*,f')^α`.
#[derive(Clone, Debug)]
pub struct NegativeSampler {
    columns: Vec<u32>,
    probabilities: Vec<f64>,
    alias: WeightedAliasIndex<f64>,
}

impl NegativeSampler {
    pub fn new(col_sums: &[f64], alpha: f64) -> Result<Self> {
        let mut columns = Vec::new();
        let mut weights = Vec::new();
        for (c, &n) in col_sums.iter().enumerate() {
            if n > 0.0 {
                columns.push(c as u32);
                weights.push(n.powf(alpha));
            }
        }
        if columns.len() < 2 {
            return Err(Error::InvalidConfig(
                "negative sampling needs at least two occupied features".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        let mut probabilities = vec![0.0; col_sums.len()];
        for (&c, &w) in columns.iter().zip(&weights) {
            probabilities[c as usize] = w / total;
        }
        let alias = WeightedAliasIndex::new(weights)
            .map_err(|e| Error::InvalidConfig(format!("negative sampling weights: {e}")))?;
        Ok(NegativeSampler {
            columns,
            probabilities,
            alias,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.columns[self.alias.sample(rng)] as usize
    }

    /// A draw different from `positive`.
    pub fn sample_excluding<R: Rng + ?Sized>(&self, rng: &mut R, positive: usize) -> usize {
        loop {
            let f = self.sample(rng);
            if f != positive {
                return f;
            }
        }
    }

    pub fn probability(&self, column: usize) -> f64 {
        self.probabilities[column]
    }
}

/// Scalar storage shared by the update rule: plain cells when training
/// alone, relaxed atomics when several workers write concurrently.
trait Slot {
    fn get(&self) -> f64;
    fn set(&self, v: f64);
}

impl Slot for Cell<f64> {
    #[inline]
    fn get(&self) -> f64 {
        Cell::get(self)
    }

    #[inline]
    fn set(&self, v: f64) {
        Cell::set(self, v)
    }
}

impl Slot for AtomicU64 {
    #[inline]
    fn get(&self) -> f64 {
        f64::from_bits(self.load(Ordering::Relaxed))
    }

    #[inline]
    fn set(&self, v: f64) {
        self.store(v.to_bits(), Ordering::Relaxed)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `-log σ(x)`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// One positive pair and its negatives. Returns the pair's loss.
#[allow(clippy::too_many_arguments)]
fn update<S: Slot, R: Rng>(
    words: &[S],
    features: &[S],
    dim: usize,
    word: usize,
    feature: usize,
    sampler: &NegativeSampler,
    negatives: usize,
    lr: f64,
    grad: &mut [f64],
    rng: &mut R,
) -> f64 {
    let w = &words[word * dim..(word + 1) * dim];
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for k in 0..=negatives {
        let (target, label) = if k == 0 {
            (feature, 1.0)
        } else {
            (sampler.sample_excluding(rng, feature), 0.0)
        };
        let c = &features[target * dim..(target + 1) * dim];
        let score: f64 = w.iter().zip(c).map(|(a, b)| a.get() * b.get()).sum();
        loss += if label == 1.0 {
            neg_log_sigmoid(score)
        } else {
            neg_log_sigmoid(-score)
        };
        let g = (label - sigmoid(score)) * lr;
        for ((gi, wi), ci) in grad.iter_mut().zip(w).zip(c) {
            let cv = ci.get();
            *gi += g * cv;
            ci.set(cv + g * wi.get());
        }
    }
    for (wi, gi) in w.iter().zip(grad.iter()) {
        wi.set(wi.get() + gi);
    }
    loss
}

/// Embeddings plus the mean loss per positive pair of every epoch.
#[derive(Clone, Debug)]
pub struct SgnsTraining {
    pub embeddings: Embeddings,
    pub epoch_losses: Vec<f64>,
}

fn check_mode(m: &WordFeatureMatrix, mode: TrainingMode) -> Result<()> {
    let n_languages = m.vocab.lexicon().languages().count();
    match mode {
        TrainingMode::Bilingual if n_languages != 2 => Err(Error::InvalidConfig(format!(
            "bilingual training needs exactly 2 languages, matrix has {n_languages}"
        ))),
        TrainingMode::Multilingual if n_languages < 2 => Err(Error::InvalidConfig(format!(
            "multilingual training needs ≥ 2 languages, matrix has {n_languages}"
        ))),
        _ => Ok(()),
    }
}

/// Trains word and sentence-ID vectors on an indicator matrix.
pub fn train_sid_sgns(m: &WordFeatureMatrix, config: &SgnsConfig, mode: TrainingMode) -> Result<Embeddings> {
    train_sid_sgns_with_losses(m, config, mode).map(|t| t.embeddings)
}

pub fn train_sid_sgns_with_losses(
    m: &WordFeatureMatrix,
    config: &SgnsConfig,
    mode: TrainingMode,
) -> Result<SgnsTraining> {
    config.validate()?;
    if m.matrix.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    check_mode(m, mode)?;

    let dim = config.dim;
    let n_words = m.matrix.n_rows();
    let n_features = m.matrix.n_cols();
    let sampler = NegativeSampler::new(m.matrix.col_sums(), config.alpha)?;
    let mut pairs: Vec<(u32, u32)> = m.matrix.iter().map(|(r, c, _)| (r as u32, c as u32)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / dim as f64;
    let mut words: Vec<f64> = (0..n_words * dim).map(|_| rng.gen_range(-half..half)).collect();
    let mut features = vec![0.0; n_features * dim];

    let total_steps = (config.epochs * pairs.len()) as f64;
    let lr_at = |step: usize| config.learning_rate * (1.0 - step as f64 / total_steps).max(1e-4);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    if config.threads == 1 {
        let w = Cell::from_mut(words.as_mut_slice()).as_slice_of_cells();
        let f = Cell::from_mut(features.as_mut_slice()).as_slice_of_cells();
        let mut grad = vec![0.0; dim];
        let mut step = 0;
        for _ in 0..config.epochs {
            pairs.shuffle(&mut rng);
            let mut loss = 0.0;
            for &(word, feature) in &pairs {
                let lr = lr_at(step);
                loss += update(
                    w,
                    f,
                    dim,
                    word as usize,
                    feature as usize,
                    &sampler,
                    config.negatives,
                    lr,
                    &mut grad,
                    &mut rng,
                );
                step += 1;
            }
            epoch_losses.push(loss / pairs.len() as f64);
        }
    } else {
        let w: Vec<AtomicU64> = words.iter().map(|v| AtomicU64::new(v.to_bits())).collect();
        let f: Vec<AtomicU64> = features.iter().map(|v| AtomicU64::new(v.to_bits())).collect();
        let progress = AtomicUsize::new(0);
        let chunk = pairs.len().div_ceil(config.threads);
        for epoch in 0..config.epochs {
            pairs.shuffle(&mut rng);
            let worker_seeds: Vec<u64> = (0..config.threads).map(|_| rng.gen()).collect();
            let losses: Vec<f64> = std::thread::scope(|scope| {
                let handles: Vec<_> = pairs
                    .chunks(chunk)
                    .zip(&worker_seeds)
                    .map(|(slice, &seed)| {
                        let (w, f, sampler, progress) = (&w, &f, &sampler, &progress);
                        scope.spawn(move || {
                            let mut rng = ChaCha8Rng::seed_from_u64(seed);
                            let mut grad = vec![0.0; dim];
                            let mut loss = 0.0;
                            for &(word, feature) in slice {
                                let step = progress.fetch_add(1, Ordering::Relaxed);
                                loss += update(
                                    w,
                                    f,
                                    dim,
                                    word as usize,
                                    feature as usize,
                                    sampler,
                                    config.negatives,
                                    lr_at(step),
                                    &mut grad,
                                    &mut rng,
                                );
                            }
                            loss
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("sgns worker panicked")).collect()
            });
            epoch_losses.push(losses.iter().sum::<f64>() / pairs.len() as f64);
            log::debug!("sgns epoch {epoch}: loss {}", epoch_losses[epoch]);
        }
        words = w.iter().map(|v| f64::from_bits(v.load(Ordering::Relaxed))).collect();
        features = f.iter().map(|v| f64::from_bits(v.load(Ordering::Relaxed))).collect();
    }

    let embeddings = Embeddings::new(m.vocab.lexicon().clone(), dim, words, Some(features))?;
    Ok(SgnsTraining {
        embeddings,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocabulary, ParallelCorpus};
    use crate::matrix::{build_indicator_matrix, Granularity};

    fn toy_matrix(langs: &[&str]) -> WordFeatureMatrix {
        let lines = |prefix: &str| -> Vec<String> {
            (0..10)
                .map(|i| format!("{p}{} {p}{}", i % 5, (i + 1) % 5, p = prefix))
                .collect()
        };
        let corpus = ParallelCorpus::from_lines(vec![
            ("en".to_string(), lines("e")),
            ("fr".to_string(), lines("f")),
            ("tr".to_string(), lines("t")),
        ])
        .unwrap();
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        build_indicator_matrix(&corpus, &vocab, langs, Granularity::Sentence).unwrap()
    }

    fn small(dim: usize) -> SgnsConfig {
        SgnsConfig {
            dim,
            epochs: 3,
            ..SgnsConfig::default()
        }
    }

    #[test]
    fn shape_and_finiteness() {
        let m = toy_matrix(&["en", "fr"]);
        assert_eq!(m.vocab.len(), 10);
        let e = train_sid_sgns(&m, &small(500), TrainingMode::Bilingual).unwrap();
        assert_eq!((e.len(), e.dim()), (10, 500));
        assert_eq!(e.n_features(), 10);
        assert!(e.word_vectors().iter().all(|v| v.is_finite()));
        assert!(e.feature_vectors().unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn same_seed_same_bits() {
        let m = toy_matrix(&["en", "fr"]);
        let a = train_sid_sgns(&m, &small(16), TrainingMode::Bilingual).unwrap();
        let b = train_sid_sgns(&m, &small(16), TrainingMode::Bilingual).unwrap();
        assert_eq!(a.word_vectors(), b.word_vectors());
        let other = SgnsConfig { seed: 2, ..small(16) };
        let c = train_sid_sgns(&m, &other, TrainingMode::Bilingual).unwrap();
        assert_ne!(a.word_vectors(), c.word_vectors());
    }

    #[test]
    fn multilingual_with_two_languages_is_bilingual() {
        let m = toy_matrix(&["en", "fr"]);
        let a = train_sid_sgns(&m, &small(8), TrainingMode::Bilingual).unwrap();
        let b = train_sid_sgns(&m, &small(8), TrainingMode::Multilingual).unwrap();
        assert_eq!(a.word_vectors(), b.word_vectors());
    }

    #[test]
    fn mode_checks_language_count() {
        let three = toy_matrix(&["en", "fr", "tr"]);
        assert!(train_sid_sgns(&three, &small(4), TrainingMode::Bilingual).is_err());
        assert!(train_sid_sgns(&three, &small(4), TrainingMode::Multilingual).is_ok());
        let one = toy_matrix(&["en"]);
        assert!(train_sid_sgns(&one, &small(4), TrainingMode::Multilingual).is_err());
    }

    #[test]
    fn invalid_configs() {
        let m = toy_matrix(&["en", "fr"]);
        for cfg in [
            SgnsConfig { dim: 0, ..small(4) },
            SgnsConfig { epochs: 0, ..small(4) },
            SgnsConfig { negatives: 0, ..small(4) },
            SgnsConfig { alpha: 0.0, ..small(4) },
            SgnsConfig { alpha: 1.5, ..small(4) },
            SgnsConfig { threads: 0, ..small(4) },
        ] {
            assert!(matches!(
                train_sid_sgns(&m, &cfg, TrainingMode::Bilingual),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn parallel_mode_runs() {
        let m = toy_matrix(&["en", "fr"]);
        let cfg = SgnsConfig { threads: 3, ..small(8) };
        let e = train_sid_sgns(&m, &cfg, TrainingMode::Bilingual).unwrap();
        assert!(e.word_vectors().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn negative_distribution_matches_smoothed_marginals() {
        let col_sums = [1.0, 3.0, 0.0, 10.0, 50.0, 7.0];
        let sampler = NegativeSampler::new(&col_sums, 0.75).unwrap();
        let total: f64 = col_sums.iter().map(|n: &f64| n.powf(0.75)).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 1_000_000;
        let mut hist = [0usize; 6];
        for _ in 0..draws {
            hist[sampler.sample(&mut rng)] += 1;
        }
        for (c, &n) in col_sums.iter().enumerate() {
            let expected = n.powf(0.75) / total;
            assert!((sampler.probability(c) - expected).abs() < 1e-15);
            assert!((hist[c] as f64 / draws as f64 - expected).abs() < 0.01);
        }
        assert_eq!(hist[2], 0);
        assert!(NegativeSampler::new(&[0.0, 4.0], 0.75).is_err());
    }

    #[test]
    fn stable_log_sigmoid() {
        assert!((neg_log_sigmoid(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!(neg_log_sigmoid(800.0) >= 0.0);
        assert!((neg_log_sigmoid(-800.0) - 800.0).abs() < 1e-9);
    }
}
