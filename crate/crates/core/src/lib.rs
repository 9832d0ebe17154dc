//! Cross-lingual word representations built on the sentence-ID feature space.
//!
//! Every word of a sentence-aligned corpus is represented by the set of
//! sentence IDs it occurs in. Because those IDs are shared across all
//! translations, rows of different languages live in one feature space and
//! can be compared directly. The crate implements the methods that exploit
//! this space:
//!
//! - [`dice`]: the Dice aligner and its dot-product reading over L1-normalized rows,
//! - [`model1`]: IBM Model-1 trained by EM,
//! - [`sgns`]: negative-sampling factorization of the word × sentence-ID matrix,
//! - [`svd`]: truncated symmetric SVD of the IDF (or positive PMI) matrix,
//!
//! and the two evaluation protocols in [`eval`]: greedy word alignment scored by
//! alignment error rate, and bilingual dictionary induction scored by precision at one.

pub mod corpus;
pub mod dice;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod matrix;
pub mod model1;
pub mod sgns;
pub mod svd;
pub mod synth;

pub use corpus::{
    build_vocabulary, load_parallel_corpus, tokenize, LangWord, Lexicon, ParallelCorpus,
    Vocabulary,
};
pub use dice::{CooccurrenceStats, DiceSimilarity, DiceVariant};
pub use embedding::{cosine, Embeddings};
pub use error::{Error, Result};
pub use eval::{BilingualDictionary, GoldAlignment, Similarity};
pub use matrix::{build_indicator_matrix, Granularity, SparseMatrix, WordFeatureMatrix};
pub use model1::{train_model1, Model1Config, TranslationTable};
pub use sgns::{train_sid_sgns, SgnsConfig, TrainingMode};
pub use svd::{train_inverted_index, SvdConfig};
