use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use xling::eval::{align_sentences, nearest, read_sentences, InductionMode, ResultRow};
use xling::LangWord;

mod artifact;
mod benchmark;
mod evaluate;
mod train;

use artifact::{corpus_checksum, load_corpus, Manifest, Model};
use evaluate::{align_benchmark, append_rows, dict_benchmark, AlignTask};
use train::{Hyper, Method, Mode};

#[derive(Parser)]
#[command(name = "xling", version, about = "Cross-lingual word representations from sentence IDs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on a directory of sentence-aligned <lang>.txt files
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Comma-separated language codes, or `all`
        #[arg(long, default_value = "all")]
        langs: String,
        #[arg(long, value_enum, default_value_t = Mode::Bilingual)]
        mode: Mode,
        /// One document key per line, line-aligned with the corpus
        #[arg(long)]
        doc_ids: Option<PathBuf>,
        #[command(flatten)]
        hyper: Hyper,
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedily align sentence pairs and write `sentID srcPos tgtPos` links
    Align {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        src: String,
        #[arg(long)]
        tgt: String,
        #[arg(long)]
        src_sentences: PathBuf,
        #[arg(long)]
        tgt_sentences: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Score a model on the alignment or dictionary benchmark
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        benchmark: Benchmark,
        #[arg(long)]
        src: String,
        #[arg(long)]
        tgt: String,
        /// Gold links (align)
        #[arg(long, required_if_eq("benchmark", "align"))]
        gold: Option<PathBuf>,
        #[arg(long, required_if_eq("benchmark", "align"))]
        src_sentences: Option<PathBuf>,
        #[arg(long, required_if_eq("benchmark", "align"))]
        tgt_sentences: Option<PathBuf>,
        /// `source<TAB>target` pairs (dict)
        #[arg(long, required_if_eq("benchmark", "dict"))]
        dict: Option<PathBuf>,
        /// Count a source word as correct if its prediction is any listed translation
        #[arg(long)]
        any_of: bool,
        /// Method label in the result rows; defaults to the trained method
        #[arg(long)]
        name: Option<String>,
        /// Append result rows to this file
        #[arg(long)]
        results: Option<PathBuf>,
        /// Corpus directory to compare against the manifest checksum
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Run every configured method on every configured direction
    Benchmark {
        config: PathBuf,
        /// Also write the tables here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Print the k most similar target-language words of a word
    Neighbors {
        #[arg(long)]
        model: PathBuf,
        /// lang:word
        word: String,
        #[arg(long)]
        target: String,
        #[arg(short, long, default_value_t = 10)]
        k: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Benchmark {
    Align,
    Dict,
}

fn init_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        bail!("--threads must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

fn load_model(path: &Path) -> Result<(Manifest, Model)> {
    let manifest = Manifest::read(path)?;
    let model = Model::load(path, &manifest)?;
    Ok((manifest, model))
}

fn print_rows(rows: &[ResultRow], results: Option<&Path>) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    for r in rows {
        writeln!(stdout, "{r}")?;
    }
    if let Some(path) = results {
        append_rows(path, rows)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train {
            corpus,
            method,
            langs,
            mode,
            doc_ids,
            hyper,
            out,
        } => {
            init_threads(hyper.threads)?;
            let loaded = load_corpus(&corpus, &langs, doc_ids.as_deref())?;
            let model = train::train(&loaded.corpus, method, mode, &loaded.languages, &hyper)?;
            model.save(&out)?;
            Manifest {
                method,
                languages: loaded.languages,
                mode,
                seed: hyper.seed,
                flags: hyper,
                corpus_checksum: loaded.checksum,
            }
            .write(&out)?;
            log::info!("wrote {}", out.display());
        }
        Command::Align {
            model,
            src,
            tgt,
            src_sentences,
            tgt_sentences,
            out,
            threads,
        } => {
            init_threads(threads)?;
            let (manifest, model) = load_model(&model)?;
            model.check_direction(&manifest.languages, &src, &tgt)?;
            let s = read_sentences(&src_sentences)?;
            let t = read_sentences(&tgt_sentences)?;
            let links = align_sentences(&s, &src, &t, &tgt, model.similarity())?;
            let mut text = String::new();
            for (sid, set) in &links {
                for (i, j) in set {
                    text.push_str(&format!("{sid} {i} {j}\n"));
                }
            }
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Eval {
            model: model_path,
            benchmark,
            src,
            tgt,
            gold,
            src_sentences,
            tgt_sentences,
            dict,
            any_of,
            name,
            results,
            corpus,
            threads,
        } => {
            init_threads(threads)?;
            let (manifest, model) = load_model(&model_path)?;
            model.check_direction(&manifest.languages, &src, &tgt)?;
            if let Some(dir) = corpus {
                let now = corpus_checksum(&dir, &manifest.languages)?;
                if now != manifest.corpus_checksum {
                    log::warn!("corpus in {} differs from the one {} was trained on", dir.display(), model_path.display());
                }
            }
            let label = name.unwrap_or_else(|| manifest.method.to_string());
            let rows = match benchmark {
                Benchmark::Align => {
                    let task = AlignTask {
                        gold: gold.as_deref().expect("required by clap"),
                        source_sentences: src_sentences.as_deref().expect("required by clap"),
                        target_sentences: tgt_sentences.as_deref().expect("required by clap"),
                    };
                    vec![align_benchmark(model.similarity(), &src, &tgt, &label, &task)?]
                }
                Benchmark::Dict => {
                    let mode = if any_of { InductionMode::AnyOf } else { InductionMode::Pair };
                    dict_benchmark(model.similarity(), &src, &tgt, &label, dict.as_deref().expect("required by clap"), mode)?
                }
            };
            print_rows(&rows, results.as_deref())?;
        }
        Command::Benchmark { config, out, threads } => {
            init_threads(threads)?;
            let config = benchmark::Config::load(&config)?;
            let tables = benchmark::run(&config)?;
            print!("{tables}");
            if let Some(out) = out {
                fs::write(&out, &tables).with_context(|| format!("writing {}", out.display()))?;
            }
        }
        Command::Neighbors { model, word, target, k } => {
            let (_, model) = load_model(&model)?;
            let sim = model.similarity();
            let query = LangWord::parse(&word).with_context(|| format!("`{word}` is not lang:word"))?;
            let Some(index) = sim.lexicon().get(&query) else {
                bail!("{query} is not in the model's vocabulary");
            };
            for (t, score) in nearest(sim, index, &target, k) {
                println!("{}\t{score:.6}", sim.lexicon().word(t));
            }
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
