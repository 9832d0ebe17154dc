//! Word × feature sparse matrices and their association transforms.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::corpus::{ParallelCorpus, Vocabulary};
use crate::error::{Error, Result};

/// What a feature column stands for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Granularity {
    #[default]
    Sentence,
    /// Columns are externally supplied document keys; several sentence IDs may
    /// share one column.
    Document,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sentence" => Ok(Granularity::Sentence),
            "document" => Ok(Granularity::Document),
            other => Err(Error::InvalidConfig(format!("unknown granularity `{other}`"))),
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Granularity::Sentence => "sentence",
            Granularity::Document => "document",
        })
    }
}

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within a row and no stored value is
/// zero. `row_sums`, `col_sums` and `total` always describe the raw matrix a
/// transform started from, so `#(w,*)`, `#(*,f)` and `#(*,*)` stay available
/// after transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    total: f64,
}

impl SparseMatrix {
    /// Builds a matrix from per-row `(column, value)` lists. Duplicate columns
    /// are summed and zeros dropped; marginals are computed from the result.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n_rows = rows.len();
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if c >= n_cols {
                    return Err(Error::InvalidConfig(format!(
                        "column {c} out of range for {n_cols} columns"
                    )));
                }
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c as u32);
                    values.push(v);
                    last = Some(c);
                }
            }
            // drop zeros produced by the input or by cancellation
            let start = *row_ptr.last().unwrap();
            let mut write = start;
            for read in start..values.len() {
                if values[read] != 0.0 {
                    values[write] = values[read];
                    col_idx[write] = col_idx[read];
                    write += 1;
                }
            }
            values.truncate(write);
            col_idx.truncate(write);
            row_ptr.push(values.len());
        }
        let mut m = SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
            row_sums: Vec::new(),
            col_sums: Vec::new(),
            total: 0.0,
        };
        m.recompute_marginals();
        Ok(m)
    }

    fn recompute_marginals(&mut self) {
        let mut row_sums = vec![0.0; self.n_rows];
        let mut col_sums = vec![0.0; self.n_cols];
        for (r, sum) in row_sums.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                *sum += v;
                col_sums[c as usize] += v;
            }
        }
        self.total = row_sums.iter().sum();
        self.row_sums = row_sums;
        self.col_sums = col_sums;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&(c as u32)) {
            Ok(i) => vals[i],
            Err(_) => 0.0,
        }
    }

    /// All stored cells in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c as usize, v))
        })
    }

    /// Raw row marginal `#(w,*)`.
    pub fn row_sum(&self, r: usize) -> f64 {
        self.row_sums[r]
    }

    /// Raw column marginal `#(*,f)`.
    pub fn col_sum(&self, c: usize) -> f64 {
        self.col_sums[c]
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    /// Raw total `#(*,*)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Sparse dot product of rows `a` and `b`.
    pub fn dot_rows(&self, a: usize, b: usize) -> f64 {
        let (ca, va) = self.row(a);
        let (cb, vb) = self.row(b);
        let (mut i, mut j) = (0, 0);
        let mut sum = 0.0;
        while i < ca.len() && j < cb.len() {
            match ca[i].cmp(&cb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += va[i] * vb[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Number of columns occupied in both rows.
    pub fn overlap(&self, a: usize, b: usize) -> usize {
        let (ca, _) = self.row(a);
        let (cb, _) = self.row(b);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < ca.len() && j < cb.len() {
            match ca[i].cmp(&cb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    /// Replaces each stored value, keeping the raw marginals and dropping cells that become zero.
    fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> Option<f64>) -> SparseMatrix {
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        row_ptr.push(0);
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                if let Some(x) = f(r, c as usize, v) {
                    if x != 0.0 {
                        col_idx.push(c);
                        values.push(x);
                    }
                }
            }
            row_ptr.push(values.len());
        }
        SparseMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
            row_sums: self.row_sums.clone(),
            col_sums: self.col_sums.clone(),
            total: self.total,
        }
    }

    fn check_rows(&self) -> Result<()> {
        match (0..self.n_rows).find(|&r| self.row_sums[r] <= 0.0) {
            Some(r) => Err(Error::ZeroRow(r)),
            None => Ok(()),
        }
    }

    /// Writes `n_rows n_cols nnz` followed by one `row col value` line per cell.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(out, "{r} {c} {v}")?;
        }
        Ok(())
    }

    /// Reads the format written by [`SparseMatrix::write_dump`].
    pub fn read_dump<R: BufRead>(input: R, name: &str) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(name, e))?,
            None => return Err(Error::parse(name, 1, "missing header")),
        };
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(name, 1, "header must be `n_rows n_cols nnz`"))?;
        let [n_rows, n_cols, nnz] = dims[..] else {
            return Err(Error::parse(name, 1, "header must be `n_rows n_cols nnz`"));
        };
        let mut rows = vec![Vec::new(); n_rows];
        let mut seen = 0;
        for (i, line) in lines {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::parse(name, i + 1, "expected `row col value`");
            let mut fields = line.split_whitespace();
            let r: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            let c: usize = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            let v: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            if r >= n_rows {
                return Err(Error::parse(name, i + 1, format!("row {r} out of range")));
            }
            rows[r].push((c, v));
            seen += 1;
        }
        if seen != nnz {
            return Err(Error::parse(name, 1, format!("header says {nnz} cells, found {seen}")));
        }
        SparseMatrix::from_rows(n_cols, rows)
    }
}

/// L1 row normalization: `I(w,f) / I(w,*)`.
pub fn transform_l1(m: &SparseMatrix) -> Result<SparseMatrix> {
    m.check_rows()?;
    Ok(m.map_values(|r, _, v| Some(v / m.row_sums[r])))
}

/// Inverse document frequency `log(|V_F| / I(w,*))`, placed on the occupied
/// cells of each row only.
pub fn transform_idf(m: &SparseMatrix) -> Result<SparseMatrix> {
    m.check_rows()?;
    let n_features = m.n_cols as f64;
    Ok(m.map_values(|r, _, _| Some((n_features / m.row_sums[r]).ln())))
}

/// Pointwise mutual information `log(#(w,f)·#(*,*) / (#(w,*)·#(*,f)))` over the
/// occupied cells. Unoccupied cells stay zero; with `positive`, negative
/// cells are dropped as well.
pub fn transform_pmi(m: &SparseMatrix, positive: bool) -> Result<SparseMatrix> {
    if m.total <= 0.0 {
        return Err(Error::ZeroMarginals);
    }
    let total = m.total;
    Ok(m.map_values(|r, c, v| {
        let pmi = (v * total / (m.row_sums[r] * m.col_sums[c])).ln();
        if positive && pmi < 0.0 {
            None
        } else {
            Some(pmi)
        }
    }))
}

/// A sparse matrix together with the words labelling its rows.
#[derive(Clone, Debug)]
pub struct WordFeatureMatrix {
    pub vocab: Vocabulary,
    pub matrix: SparseMatrix,
    pub granularity: Granularity,
}

/// Column index for every sentence ID under the requested granularity.
fn feature_columns(corpus: &ParallelCorpus, granularity: Granularity) -> Result<(Vec<usize>, usize)> {
    match granularity {
        Granularity::Sentence => Ok(((0..corpus.num_sentences()).collect(), corpus.num_sentences())),
        Granularity::Document => {
            let keys = corpus.document_keys().ok_or(Error::MissingDocumentKeys)?;
            let mut ids: HashMap<&str, usize> = HashMap::new();
            let columns = keys
                .iter()
                .map(|k| {
                    let next = ids.len();
                    *ids.entry(k.as_str()).or_insert(next)
                })
                .collect();
            Ok((columns, ids.len()))
        }
    }
}

fn build_matrix<S: AsRef<str>>(
    corpus: &ParallelCorpus,
    vocab: &Vocabulary,
    languages: &[S],
    granularity: Granularity,
    indicator: bool,
) -> Result<WordFeatureMatrix> {
    if languages.is_empty() {
        return Err(Error::EmptyLanguageSelection);
    }
    let mut lang_ids = Vec::with_capacity(languages.len());
    for l in languages {
        let l = l.as_ref();
        lang_ids.push(corpus.language_index(l).ok_or_else(|| Error::UnknownLanguage(l.to_owned()))?);
    }
    let vocab = vocab.restrict(languages);
    let token_map = vocab.lexicon().map_tokens(corpus);
    let (columns, n_cols) = feature_columns(corpus, granularity)?;

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); vocab.len()];
    for &lang in &lang_ids {
        for (sid, &col) in columns.iter().enumerate() {
            let Some(ids) = corpus.token_ids(lang, sid) else {
                continue;
            };
            for &id in ids {
                if let Some(w) = token_map[lang][id as usize] {
                    rows[w].push((col, 1.0));
                }
            }
        }
    }
    if indicator {
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            row.dedup_by_key(|&mut (c, _)| c);
        }
    }
    Ok(WordFeatureMatrix {
        vocab,
        matrix: SparseMatrix::from_rows(n_cols, rows)?,
        granularity,
    })
}

/// Indicator matrix: cell `(w, f)` is 1 iff `w` occurs in feature `f` at least once.
///
/// Rows are the vocabulary words of the selected languages.
pub fn build_indicator_matrix<S: AsRef<str>>(
    corpus: &ParallelCorpus,
    vocab: &Vocabulary,
    languages: &[S],
    granularity: Granularity,
) -> Result<WordFeatureMatrix> {
    build_matrix(corpus, vocab, languages, granularity, true)
}

/// Like [`build_indicator_matrix`] but cells hold raw occurrence counts `#(w,f)`.
pub fn build_count_matrix<S: AsRef<str>>(
    corpus: &ParallelCorpus,
    vocab: &Vocabulary,
    languages: &[S],
    granularity: Granularity,
) -> Result<WordFeatureMatrix> {
    build_matrix(corpus, vocab, languages, granularity, false)
}
