use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn xling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xling")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_corpus(dir: &Path) {
    let corpus = dir.join("corpus");
    fs::create_dir_all(&corpus).unwrap();
    let en = "the cat sleeps\nthe dog sleeps\na cat eats\nthe dog eats\n";
    let fr = "le chat dort\nle chien dort\nun chat mange\nle chien mange\n";
    let de = "die katze schläft\nder hund schläft\neine katze isst\nder hund isst\n";
    fs::write(corpus.join("en.txt"), en).unwrap();
    fs::write(corpus.join("fr.txt"), fr).unwrap();
    fs::write(corpus.join("de.txt"), de).unwrap();
    fs::write(dir.join("docs.txt"), "g1\ng1\ng2\ng2\n").unwrap();
    fs::write(dir.join("en-fr.tsv"), "cat\tchat\ndog\tchien\nhot dog\tfoo\n").unwrap();
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

#[test]
fn incompatible_training_flags_fail() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let corpus = p(dir.path(), "corpus");
    let out = p(dir.path(), "m");
    let o = xling(&["train", "--corpus", &corpus, "--method", "dice", "--mode", "multilingual", "--out", &out]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("multilingual"));

    let o = xling(&["train", "--corpus", &corpus, "--method", "sgns", "--langs", "all", "--out", &out]);
    assert!(!o.status.success(), "bilingual with three languages");

    let docs = p(dir.path(), "docs.txt");
    let o = xling(&[
        "train", "--corpus", &corpus, "--method", "model1", "--langs", "en,fr", "--granularity", "document",
        "--doc-ids", &docs, "--out", &out,
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("document"));

    let o = xling(&["train", "--corpus", &corpus, "--method", "sgns", "--langs", "en,xx", "--out", &out]);
    assert!(!o.status.success());
}

#[test]
fn multilingual_embeddings_cover_all_languages() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let out = p(dir.path(), "all.vec");
    let o = xling(&[
        "train", "--corpus", &p(dir.path(), "corpus"), "--method", "sgns", "--mode", "multilingual", "--langs", "all",
        "--min-count", "1", "--dim", "8", "--epochs", "5", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    for lang in ["de:", "en:", "fr:"] {
        assert!(text.lines().any(|l| l.starts_with(lang)));
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{out}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["languages"], serde_json::json!(["de", "en", "fr"]));
    assert_eq!(manifest["mode"], "multilingual");
    assert_eq!(manifest["seed"], 1);

    let o = xling(&["neighbors", "--model", &out, "en:cat", "--target", "fr", "-k", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
}

#[test]
fn eval_checks_direction_and_checksum() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let corpus = p(dir.path(), "corpus");
    let dict = p(dir.path(), "en-fr.tsv");
    let out = p(dir.path(), "m1");
    let o = xling(&["train", "--corpus", &corpus, "--method", "model1", "--langs", "en,fr", "--min-count", "1", "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));

    let results = p(dir.path(), "results.tsv");
    let o = xling(&[
        "eval", "--model", &out, "--benchmark", "dict", "--src", "en", "--tgt", "fr", "--dict", &dict, "--results",
        &results, "--corpus", &corpus,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stderr(&o).contains("differs"));
    let stdout = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(stdout.starts_with("dict\ten\tfr\tmodel1\tP@1\t"));
    assert!(stdout.contains("\tcoverage\t1.000000"));
    assert_eq!(fs::read_to_string(&results).unwrap(), stdout);

    let o = xling(&["eval", "--model", &out, "--benchmark", "dict", "--src", "fr", "--tgt", "en", "--dict", &dict]);
    assert!(!o.status.success());
    let o = xling(&["eval", "--model", &out, "--benchmark", "dict", "--src", "en", "--tgt", "de", "--dict", &dict]);
    assert!(!o.status.success());
    let o = xling(&["eval", "--model", &out, "--benchmark", "align", "--src", "en", "--tgt", "fr"]);
    assert!(!o.status.success(), "align without gold files");

    fs::write(dir.path().join("corpus/fr.txt"), "le chat\n").unwrap();
    let o = xling(&[
        "eval", "--model", &out, "--benchmark", "dict", "--src", "en", "--tgt", "fr", "--dict", &dict, "--corpus", &corpus,
    ]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("differs"));
}

#[test]
fn align_writes_links() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let out = p(dir.path(), "dice");
    let o = xling(&[
        "train", "--corpus", &p(dir.path(), "corpus"), "--method", "dice", "--langs", "en,fr", "--min-count", "1", "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    fs::write(dir.path().join("s.txt"), "the cat\n").unwrap();
    fs::write(dir.path().join("t.txt"), "le chat\n").unwrap();
    let links = p(dir.path(), "links.txt");
    let o = xling(&[
        "align", "--model", &out, "--src", "en", "--tgt", "fr", "--src-sentences", &p(dir.path(), "s.txt"),
        "--tgt-sentences", &p(dir.path(), "t.txt"), "--out", &links,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&links).unwrap(), "1 1 1\n1 2 2\n");
}
