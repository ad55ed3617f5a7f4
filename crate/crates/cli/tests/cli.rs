use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use reviewfix::corpus::Source;
use reviewfix::synth;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_reviewfix"));
    c.env_remove("OPENAI_API_KEY");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_corpus(dir: &Path, name: &str, source: Source, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    synth::generate(source, n, seed).save(&path).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn arg(source: &str, p: &Path) -> String {
    format!("{source}={}", p.display())
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    v.sort();
    v
}

#[test]
fn ingest_valid_and_malformed() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), "rd.jsonl", Source::RD, 12, 1);
    let out = tmp.path().join("norm.jsonl");
    let o = run(&["ingest", "--input", s(&input), "--source", "rd", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ingested 12 instances"));
    assert!(out.exists());

    let mut text = std::fs::read_to_string(&input).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    text = format!("{}\n{}\n{{\"id\": \"broken\"\n", lines[0], lines[1]);
    std::fs::write(&input, text).unwrap();
    let bad_out = tmp.path().join("bad.jsonl");
    let o = run(&["ingest", "--input", s(&input), "--source", "rd", "--out", s(&bad_out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!bad_out.exists());

    let o = run(&["ingest", "--input", s(&input), "--source", "pd", "--out", s(&bad_out)]);
    assert_eq!(code(&o), 2);
    let o = run(&["ingest", "--input", s(&tmp.path().join("missing.jsonl")), "--source", "rd", "--out", s(&bad_out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn ingest_reports_full_reviewer_corpus_size() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_corpus(tmp.path(), "rd.jsonl", Source::RD, 16_228, 3);
    let out = tmp.path().join("norm.jsonl");
    let o = run(&["ingest", "--input", s(&input), "--source", "rd", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ingested 16228 instances"), "{}", stdout(&o));
}

#[test]
fn prune_split_render_export() {
    let tmp = tempfile::tempdir().unwrap();
    let rd = write_corpus(tmp.path(), "rd.jsonl", Source::RD, 40, 5);
    let pd = write_corpus(tmp.path(), "pd.jsonl", Source::PD, 40, 6);
    let pruned = tmp.path().join("pruned.jsonl");
    let report = tmp.path().join("prune.json");
    let o = run(&["prune", "--corpus", &arg("rd", &rd), "--corpus", &arg("pd", &pd), "--out", s(&pruned), "--report", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("kept 80"), "{}", stdout(&o));
    assert!(report.exists());

    let (train, test) = (tmp.path().join("train.jsonl"), tmp.path().join("test.jsonl"));
    let o = run(&["split", "--corpus", &arg("rd", &rd), "--ratio", "0.75", "--seed", "9", "--train-out", s(&train), "--test-out", s(&test)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "train 30\ntest 10\n");
    let first = std::fs::read(&train).unwrap();
    run(&["split", "--corpus", &arg("rd", &rd), "--ratio", "0.75", "--seed", "9", "--train-out", s(&train), "--test-out", s(&test)]);
    assert_eq!(std::fs::read(&train).unwrap(), first);

    let rendered = tmp.path().join("p7.jsonl");
    let o = run(&["render", "--corpus", &arg("pd", &pd), "--prompt", "p7", "--out", s(&rendered)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let line = std::fs::read_to_string(&rendered).unwrap();
    assert_eq!(line.lines().count(), 40);
    assert!(line.contains("[FIX_START]"));

    let ft = tmp.path().join("ft.jsonl");
    let o = run(&["export-finetune", "--corpus", &arg("rd", &rd), "--prompt", "P5", "--out", s(&ft)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(ft.exists());
    let zero = tmp.path().join("zero.jsonl");
    let o = run(&["export-finetune", "--corpus", &arg("rd", &rd), "--prompt", "p1", "--out", s(&zero)]);
    assert_eq!(code(&o), 2);
    assert!(!zero.exists());
}

#[test]
fn render_without_comment() {
    let tmp = tempfile::tempdir().unwrap();
    let mut corpus = synth::generate(Source::RD, 3, 2);
    for inst in &mut corpus.instances {
        inst.comment.clear();
    }
    let path = tmp.path().join("nocomment.jsonl");
    corpus.save(&path).unwrap();
    let out = tmp.path().join("p1.jsonl");
    let o = run(&["render", "--corpus", &arg("rd", &path), "--prompt", "p1", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out2 = tmp.path().join("p2.jsonl");
    let o = run(&["render", "--corpus", &arg("rd", &path), "--prompt", "p2", "--out", s(&out2)]);
    assert_eq!(code(&o), 2);
    assert!(!out2.exists());
}

#[test]
fn golden_run_record_and_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let rd = write_corpus(tmp.path(), "rd.jsonl", Source::RD, 25, 8);
    let store = tmp.path().join("store.jsonl");
    let live = tmp.path().join("live");
    let c = arg("rd", &rd);
    let base = ["run", "--corpus", &c, "--prompt", "p3,p7", "--model", "m"];
    let o = bin().args(base).args(["--backend", "golden", "--store", s(&store), "--out-dir", s(&live)]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ECM 100.00%"), "{}", stdout(&o));
    assert_eq!(files(&live).len(), 4);

    // rerunning reuses artifacts and yields identical bytes
    let before: Vec<Vec<u8>> = files(&live).iter().map(|f| std::fs::read(live.join(f)).unwrap()).collect();
    let o = bin().args(base).args(["--backend", "golden", "--out-dir", s(&live)]).output().unwrap();
    assert_eq!(code(&o), 0);
    let after: Vec<Vec<u8>> = files(&live).iter().map(|f| std::fs::read(live.join(f)).unwrap()).collect();
    assert_eq!(before, after);

    let (r1, r2) = (tmp.path().join("r1"), tmp.path().join("r2"));
    for dir in [&r1, &r2] {
        let o = bin().args(base).args(["--backend", "replay", "--store", s(&store), "--out-dir", s(dir)]).output().unwrap();
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert_eq!(files(&r1), files(&live));
    for f in files(&r1) {
        assert_eq!(std::fs::read(r1.join(&f)).unwrap(), std::fs::read(r2.join(&f)).unwrap(), "{f}");
        assert_eq!(std::fs::read(r1.join(&f)).unwrap(), std::fs::read(live.join(&f)).unwrap(), "{f}");
    }

    // a prompt never recorded misses the store: backend failure, nothing left behind
    let r3 = tmp.path().join("r3");
    let o = run(&["run", "--corpus", &c, "--prompt", "p5", "--model", "m", "--backend", "replay", "--store", s(&store), "--out-dir", s(&r3)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(!r3.exists());
}

#[test]
fn unreachable_endpoint_is_backend_error_and_cleans_up() {
    let tmp = tempfile::tempdir().unwrap();
    let rd = write_corpus(tmp.path(), "rd.jsonl", Source::RD, 3, 8);
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let out = tmp.path().join("out");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("keep.txt"), "mine").unwrap();
    let endpoint = format!("http://127.0.0.1:{port}/v1");
    let o = run(&["run", "--corpus", &arg("rd", &rd), "--prompt", "p2", "--endpoint", &endpoint, "--retries", "0", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(files(&out), ["keep.txt"]);
}

#[test]
fn config_values_yield_to_flags() {
    let tmp = tempfile::tempdir().unwrap();
    write_corpus(tmp.path(), "rd.jsonl", Source::RD, 5, 8);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "out_dir = \"out\"\n[[corpus]]\npath = \"rd.jsonl\"\nsource = \"rd\"\n[backend]\nkind = \"golden\"\nconcurrency = 0\n[run]\nprompts = [\"p4\"]\n",
    )
    .unwrap();
    let o = run(&["run", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = run(&["run", "--config", s(&cfg), "--concurrency", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("P4 "), "{}", stdout(&o));
    assert_eq!(files(&tmp.path().join("out")).len(), 2);
    let o = run(&["run", "--config", s(&cfg), "--concurrency", "2", "--prompt", "p6", "--backend", "identity"]);
    assert!(stdout(&o).contains("ECM 0.00%"), "{}", stdout(&o));

    std::fs::write(&cfg, "[backend]\nflavour = \"x\"\n").unwrap();
    assert_eq!(code(&run(&["run", "--config", s(&cfg)])), 2);
}

#[test]
fn unknown_flags_fail_and_help_lists_flags() {
    let o = run(&["run", "--no-such-flag"]);
    assert_eq!(code(&o), 2);
    let o = run(&["run", "--help"]);
    assert_eq!(code(&o), 0);
    let help = stdout(&o);
    for flag in ["--corpus", "--prompt", "--backend", "--concurrency", "--store", "--out-dir", "--config"] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn score_reports_and_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = synth::generate(Source::PD, 10, 4);
    let path = tmp.path().join("pd.jsonl");
    corpus.save(&path).unwrap();
    let outputs: String = corpus
        .instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            let out = if i < 4 { &inst.fixed_code } else { &inst.buggy_code };
            format!("{}\n", serde_json::json!({"instance_id": inst.id, "output": format!("```java\n{out}\n```")}))
        })
        .collect();
    let out_file = tmp.path().join("outputs.jsonl");
    std::fs::write(&out_file, outputs).unwrap();
    let scored = tmp.path().join("scored");
    let o = run(&["score", "--corpus", &arg("pd", &path), "--prompt", "p3", "--outputs", s(&out_file), "--out-dir", s(&scored)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("ECM 40.00%"), "{}", stdout(&o));

    let run_file = files(&scored).into_iter().find(|f| f.starts_with("run-")).unwrap();
    let run_path = scored.join(run_file);
    let o = run(&["report", "--style", "table3", "--run", s(&run_path), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("Short Description,Lowest,Highest\n"));

    let summary = scored.join(files(&scored).into_iter().find(|f| f.starts_with("summary-")).unwrap());
    let o = run(&["report", "--style", "table1", "--summary", &format!("M={}", summary.display())]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("Zero-shot results\n"));
    assert!(!stdout(&o).contains("P3"), "only zero-shot rows belong in table1");
    let o = run(&["report", "--style", "table2", "--summary", &format!("M={}", summary.display())]);
    assert_eq!(code(&o), 2, "missing kinds is a validation error");

    let cell = |m: &str, t: &str| format!("{m}:{t}={}", run_path.display());
    let o = run(&["report", "--style", "table5", "--cell", &cell("A", "X"), "--cell", &cell("B", "X"), "--format", "text"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("Finetuned Model"));
    assert!(text.lines().any(|l| l.starts_with("Union of Fix") && l.ends_with("40.00%")), "{text}");
}

#[test]
fn normalize_debug_compares() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.java");
    let b = tmp.path().join("b.java");
    std::fs::write(&a, "int x = 1; // note\nreturn x;").unwrap();
    std::fs::write(&b, "int x=1;\n\nreturn   x;").unwrap();
    let o = run(&["normalize-debug", "--code", s(&a), "--reference", s(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("exact match: true"), "{}", stdout(&o));
}
