//! Methods × directions result tables driven by a TOML config.
//!
//! ```toml
//! corpus = "bible"            # directory of <lang>.txt, relative to this file
//! results = "results.tsv"     # optional, rows are appended
//!
//! [[method]]
//! method = "sgns"
//! dim = 100
//!
//! [[align]]
//! src = "en"
//! tgt = "fr"
//! gold = "gold/en-fr.txt"
//! src_sentences = "gold/en.txt"
//! tgt_sentences = "gold/fr.txt"
//!
//! [[dict]]
//! src = "en"
//! tgt = "fr"
//! path = "dict/en-fr.tsv"
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use xling::eval::{InductionMode, ResultRow};
use xling::ParallelCorpus;

use crate::artifact::{load_corpus, Model};
use crate::evaluate::{align_benchmark, append_rows, dict_benchmark, AlignTask};
use crate::train::{train, Hyper, Method, Mode};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub corpus: PathBuf,
    pub doc_ids: Option<PathBuf>,
    pub results: Option<PathBuf>,
    #[serde(default)]
    pub any_of: bool,
    #[serde(default, rename = "method")]
    pub methods: Vec<MethodEntry>,
    #[serde(default)]
    pub align: Vec<AlignEntry>,
    #[serde(default)]
    pub dict: Vec<DictEntry>,
}

#[derive(Debug, Deserialize)]
pub struct MethodEntry {
    pub method: Method,
    /// Column label; defaults to the method name.
    pub name: Option<String>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(flatten)]
    pub hyper: Hyper,
}

impl MethodEntry {
    fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.method.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignEntry {
    pub src: String,
    pub tgt: String,
    pub gold: PathBuf,
    pub src_sentences: PathBuf,
    pub tgt_sentences: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictEntry {
    pub src: String,
    pub tgt: String,
    pub path: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut config: Config = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| *p = base.join(&*p);
        resolve(&mut config.corpus);
        config.doc_ids.as_mut().map(resolve);
        config.results.as_mut().map(resolve);
        for a in &mut config.align {
            resolve(&mut a.gold);
            resolve(&mut a.src_sentences);
            resolve(&mut a.tgt_sentences);
        }
        for d in &mut config.dict {
            resolve(&mut d.path);
        }
        Ok(config)
    }

    fn languages(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self
            .align
            .iter()
            .flat_map(|a| [&a.src, &a.tgt])
            .chain(self.dict.iter().flat_map(|d| [&d.src, &d.tgt]))
            .collect();
        set.into_iter().cloned().collect()
    }
}

/// One metric table: rows are directions, columns are methods.
pub struct Table {
    pub metric: String,
    pub methods: Vec<String>,
    pub rows: Vec<(String, Vec<f64>)>,
}

/// Values are compared at the printed precision when crediting the best method of a row.
fn rounded(v: f64) -> f64 {
    (v * 1e4).round()
}

fn format_credit(c: f64) -> String {
    let s = format!("{c:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

impl Table {
    pub fn averages(&self) -> Vec<f64> {
        (0..self.methods.len())
            .map(|m| self.rows.iter().map(|(_, v)| v[m]).sum::<f64>() / self.rows.len() as f64)
            .collect()
    }

    /// Per method, the number of rows it is best in; ties share the credit.
    pub fn top1(&self) -> Vec<f64> {
        let mut credit = vec![0.0; self.methods.len()];
        for (_, values) in &self.rows {
            let best = values.iter().map(|&v| rounded(v)).fold(f64::NEG_INFINITY, f64::max);
            let winners: Vec<usize> = (0..values.len()).filter(|&m| rounded(values[m]) == best).collect();
            for m in &winners {
                credit[*m] += 1.0 / winners.len() as f64;
            }
        }
        credit
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}\t{}", self.metric, self.methods.join("\t"));
        let line = |label: &str, cells: Vec<String>| format!("{label}\t{}\n", cells.join("\t"));
        for (direction, values) in &self.rows {
            out.push_str(&line(direction, values.iter().map(|v| format!("{v:.4}")).collect()));
        }
        out.push_str(&line("Average", self.averages().iter().map(|v| format!("{v:.4}")).collect()));
        out.push_str(&line("Top 1", self.top1().into_iter().map(format_credit).collect()));
        out
    }
}

/// Runs every method on every direction and returns the rendered tables.
pub fn run(config: &Config) -> Result<String> {
    if config.methods.is_empty() {
        bail!("benchmark config lists no methods");
    }
    if config.align.is_empty() && config.dict.is_empty() {
        bail!("benchmark config lists no align or dict entries");
    }
    let languages = config.languages();
    let loaded = load_corpus(&config.corpus, &languages.join(","), config.doc_ids.as_deref())?;
    let mode = if config.any_of {
        InductionMode::AnyOf
    } else {
        InductionMode::Pair
    };

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut tables = Vec::new();
    let labels: Vec<String> = config.methods.iter().map(MethodEntry::label).collect();
    let mut models = ModelCache::new(&loaded.corpus, &languages);

    if !config.align.is_empty() {
        let mut table = Table {
            metric: "1-AER".into(),
            methods: labels.clone(),
            rows: Vec::new(),
        };
        for a in &config.align {
            let mut values = Vec::new();
            for (i, entry) in config.methods.iter().enumerate() {
                let mut cell = || -> Result<ResultRow> {
                    let model = models.get(i, entry, &a.src, &a.tgt)?;
                    let task = AlignTask {
                        gold: &a.gold,
                        source_sentences: &a.src_sentences,
                        target_sentences: &a.tgt_sentences,
                    };
                    align_benchmark(model.similarity(), &a.src, &a.tgt, &labels[i], &task)
                };
                let r = cell().with_context(|| format!("cell align {}-{} / {}", a.src, a.tgt, labels[i]))?;
                values.push(r.value);
                rows.push(r);
            }
            table.rows.push((format!("{}-{}", a.src, a.tgt), values));
        }
        tables.push(table);
    }
    if !config.dict.is_empty() {
        let mut table = Table {
            metric: "P@1".into(),
            methods: labels.clone(),
            rows: Vec::new(),
        };
        for d in &config.dict {
            let mut values = Vec::new();
            for (i, entry) in config.methods.iter().enumerate() {
                let mut cell = || -> Result<Vec<ResultRow>> {
                    let model = models.get(i, entry, &d.src, &d.tgt)?;
                    dict_benchmark(model.similarity(), &d.src, &d.tgt, &labels[i], &d.path, mode)
                };
                let r = cell().with_context(|| format!("cell dict {}-{} / {}", d.src, d.tgt, labels[i]))?;
                values.push(r[0].value);
                rows.extend(r);
            }
            table.rows.push((format!("{}-{}", d.src, d.tgt), values));
        }
        tables.push(table);
    }

    if let Some(path) = &config.results {
        append_rows(path, &rows)?;
    }
    Ok(tables.iter().map(Table::render).collect::<Vec<_>>().join("\n"))
}

/// Trains each (method, languages) model once.
struct ModelCache<'a> {
    corpus: &'a ParallelCorpus,
    all_languages: &'a [String],
    models: BTreeMap<(usize, Vec<String>), Model>,
}

impl<'a> ModelCache<'a> {
    fn new(corpus: &'a ParallelCorpus, all_languages: &'a [String]) -> Self {
        ModelCache {
            corpus,
            all_languages,
            models: BTreeMap::new(),
        }
    }

    fn get(&mut self, index: usize, entry: &MethodEntry, src: &str, tgt: &str) -> Result<&Model> {
        let languages: Vec<String> = match (entry.mode, entry.method) {
            (Mode::Multilingual, _) => self.all_languages.to_vec(),
            (Mode::Bilingual, Method::Model1) => vec![src.to_owned(), tgt.to_owned()],
            (Mode::Bilingual, _) => {
                let mut pair = vec![src.to_owned(), tgt.to_owned()];
                pair.sort();
                pair
            }
        };
        let key = (index, languages);
        if !self.models.contains_key(&key) {
            let model = train(self.corpus, entry.method, entry.mode, &key.1, &entry.hyper)?;
            self.models.insert(key.clone(), model);
        }
        let model = &self.models[&key];
        let languages = if entry.method == Method::Dice {
            // dice is symmetric in its two languages
            vec![src.to_owned(), tgt.to_owned()]
        } else {
            key.1.clone()
        };
        model.check_direction(&languages, src, tgt)?;
        Ok(model)
    }
}
