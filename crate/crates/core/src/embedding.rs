//! Dense word vectors and cosine similarity.

use std::io::{BufRead, Write};

use crate::corpus::{LangWord, Lexicon};
use crate::error::{Error, Result};
use crate::eval::Similarity;

/// `u·v / (‖u‖·‖v‖)`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Shortest decimal form that parses back to the same double; exponent
/// notation outside `[1e-4, 1e15)`.
pub(crate) fn format_f64(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

/// Word vectors (rows follow the lexicon) and optional feature vectors.
#[derive(Clone, Debug)]
pub struct Embeddings {
    lexicon: Lexicon,
    dim: usize,
    word_vectors: Vec<f64>,
    feature_vectors: Option<Vec<f64>>,
    inv_norms: Vec<f64>,
}

impl Embeddings {
    /// `word_vectors` is row-major `lexicon.len() × dim`; `feature_vectors`,
    /// when given, is row-major `n_features × dim`.
    pub fn new(lexicon: Lexicon, dim: usize, word_vectors: Vec<f64>, feature_vectors: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("embedding dimension must be positive".into()));
        }
        if word_vectors.len() != lexicon.len() * dim {
            return Err(Error::InvalidConfig(format!(
                "{} values for {} words of dimension {dim}",
                word_vectors.len(),
                lexicon.len()
            )));
        }
        if let Some(f) = &feature_vectors {
            if f.len() % dim != 0 {
                return Err(Error::InvalidConfig("feature vectors do not match the dimension".into()));
            }
        }
        let inv_norms = word_vectors
            .chunks_exact(dim)
            .map(|row| {
                let n = norm(row);
                if n > 0.0 {
                    1.0 / n
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Embeddings {
            lexicon,
            dim,
            word_vectors,
            feature_vectors,
            inv_norms,
        })
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }

    pub fn vector(&self, word: usize) -> &[f64] {
        &self.word_vectors[word * self.dim..(word + 1) * self.dim]
    }

    pub fn word_vectors(&self) -> &[f64] {
        &self.word_vectors
    }

    pub fn feature_vectors(&self) -> Option<&[f64]> {
        self.feature_vectors.as_deref()
    }

    pub fn n_features(&self) -> usize {
        self.feature_vectors.as_ref().map_or(0, |f| f.len() / self.dim)
    }

    pub fn feature_vector(&self, feature: usize) -> Option<&[f64]> {
        self.feature_vectors
            .as_ref()
            .map(|f| &f[feature * self.dim..(feature + 1) * self.dim])
    }

    /// Writes `|V| d` followed by `lang:surface v1 ... vd` lines. Values use the
    /// shortest representation that parses back to the same double.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {}", self.len(), self.dim)?;
        let mut line = String::new();
        for (i, word) in self.lexicon.words().iter().enumerate() {
            line.clear();
            line.push_str(&word.to_string());
            for v in self.vector(i) {
                line.push(' ');
                line.push_str(&format_f64(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads the format written by [`Embeddings::write_text`].
    pub fn read_text<R: BufRead>(input: R, name: &str) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::parse(name, 1, "missing header"))?
            .map_err(|e| Error::io(name, e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(name, 1, "header must be `|V| d`"))?;
        let [n, dim] = dims[..] else {
            return Err(Error::parse(name, 1, "header must be `|V| d`"));
        };
        let mut words = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * dim);
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let word = fields
                .next()
                .and_then(LangWord::parse)
                .ok_or_else(|| Error::parse(name, i + 2, "expected lang:word"))?;
            let before = values.len();
            for f in fields {
                let v: f64 = f.parse().map_err(|_| Error::parse(name, i + 2, "bad value"))?;
                if !v.is_finite() {
                    return Err(Error::parse(name, i + 2, "non-finite value"));
                }
                values.push(v);
            }
            if values.len() - before != dim {
                return Err(Error::parse(name, i + 2, format!("expected {dim} values")));
            }
            words.push(word);
        }
        if words.len() != n {
            return Err(Error::parse(name, 1, format!("header says {n} words, found {}", words.len())));
        }
        Embeddings::new(Lexicon::from_words(words)?, dim, values, None)
    }
}

/// Cosine of word vectors. A zero vector has no direction and scores −∞.
impl Similarity for Embeddings {
    fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn score(&self, source: usize, target: usize) -> f64 {
        let (a, b) = (self.inv_norms[source], self.inv_norms[target]);
        if a == 0.0 || b == 0.0 {
            return f64::NEG_INFINITY;
        }
        dot(self.vector(source), self.vector(target)) * a * b
    }
}
