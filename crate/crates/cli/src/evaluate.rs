//! The alignment and dictionary benchmarks over a trained model.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use xling::eval::{align_sentences, compute_aer, induce_p_at_1, read_sentences, InductionMode, ResultRow};
use xling::{BilingualDictionary, GoldAlignment, Similarity};

pub struct AlignTask<'a> {
    pub gold: &'a Path,
    pub source_sentences: &'a Path,
    pub target_sentences: &'a Path,
}

/// `1-AER` of greedy alignment against the gold links.
pub fn align_benchmark(sim: &dyn Similarity, source: &str, target: &str, method: &str, task: &AlignTask) -> Result<ResultRow> {
    let src = read_sentences(task.source_sentences)?;
    let tgt = read_sentences(task.target_sentences)?;
    let src_lengths: Vec<usize> = src.iter().map(Vec::len).collect();
    let tgt_lengths: Vec<usize> = tgt.iter().map(Vec::len).collect();
    let gold = GoldAlignment::load(task.gold, &src_lengths, &tgt_lengths)?;
    let predicted = align_sentences(&src, source, &tgt, target, sim)?;
    let score = compute_aer(&predicted, &gold)?;
    Ok(row("align", source, target, method, "1-AER", score.one_minus_aer))
}

/// `P@1` and coverage of dictionary induction.
pub fn dict_benchmark(
    sim: &dyn Similarity,
    source: &str,
    target: &str,
    method: &str,
    dictionary: &Path,
    mode: InductionMode,
) -> Result<Vec<ResultRow>> {
    let (dict, dropped) = BilingualDictionary::load(dictionary, source, target)?;
    if dropped > 0 {
        log::warn!("{}: dropped {dropped} multi-token entries", dictionary.display());
    }
    let score = induce_p_at_1(sim, &dict, mode)?;
    let p = score
        .p_at_1
        .ok_or_else(|| anyhow!("no source word of {} is in the model's vocabulary", dictionary.display()))?;
    Ok(vec![
        row("dict", source, target, method, "P@1", p),
        row("dict", source, target, method, "coverage", score.coverage),
    ])
}

fn row(benchmark: &str, source: &str, target: &str, method: &str, metric: &str, value: f64) -> ResultRow {
    ResultRow {
        benchmark: benchmark.to_owned(),
        source: source.to_owned(),
        target: target.to_owned(),
        method: method.to_owned(),
        metric: metric.to_owned(),
        value,
    }
}

pub fn append_rows(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    for r in rows {
        writeln!(file, "{r}")?;
    }
    Ok(())
}
