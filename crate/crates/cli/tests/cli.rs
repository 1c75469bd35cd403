use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::sync::OnceLock;

const BIN: &str = env!("CARGO_BIN_EXE_gostcite");

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn gostcite(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn model() -> &'static Path {
    static MODEL: OnceLock<PathBuf> = OnceLock::new();
    MODEL.get_or_init(|| {
        let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-test-model.txt");
        let annotations = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/annotations.xml");
        let o = gostcite(&["train", "--annotations", p(&annotations), "-o", p(&path)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        path
    })
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(PathBuf, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}

#[test]
fn stats_counts_lines_by_script() {
    let input = "Гордиенко Э.А. Варлаам Хутынский. – 2010.\n\
                 Lewison G. Citation indexing. Scientometrics, 2005.\n\
                 \n\
                 Parinov S. Towards an Open Data. 2014.\n\
                 Ивaнoв И.И. Статья // Journal. – 2012.\n";
    let o = with_stdin(&["stats"], input);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "lines\t4\nnon_cyrillic\t2\ncyrillic_span\t2\n");
}

#[test]
fn process_on_empty_directory_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("in");
    fs::create_dir(&empty).unwrap();
    let out = tmp.path().join("out");
    let o = gostcite(&["process", "-m", p(model()), "-o", p(&out), p(&empty)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!out.exists());
}

#[test]
fn batch_twice_gives_identical_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let collection = fixtures().join("collection.jsonl");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let o = gostcite(&["batch", "-m", p(model()), "--collection", p(&collection), "-o", p(&out), "-j", "4", p(&fixtures().join("docs"))]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        // the registry carries first-seen timestamps
        runs.push(tree(&out).into_iter().filter(|(path, _)| path != Path::new("unlinked.jsonl")).collect::<Vec<_>>());
    }
    assert_eq!(runs[0].len(), 8);
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn rerun_with_same_registry_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let collection = fixtures().join("collection.jsonl");
    let docs = fixtures().join("docs");
    let args = ["batch", "-m", p(model()), "--collection", p(&collection), "-o", p(&out), p(&docs)];
    assert!(gostcite(&args).status.success());
    let first = tree(&out);
    assert!(gostcite(&args).status.success());
    assert_eq!(tree(&out), first);
}

#[test]
fn one_corrupt_document_in_a_batch() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in/spz");
    fs::create_dir_all(&input).unwrap();
    for f in ["cris2016.json", "ekonomika2017.json"] {
        fs::copy(fixtures().join("docs/spz").join(f), input.join(f)).unwrap();
    }
    fs::copy(fixtures().join("bad/corrupt.json"), input.join("corrupt.json")).unwrap();
    let out = tmp.path().join("out");
    let o = gostcite(&["batch", "-m", p(model()), "-o", p(&out), p(&tmp.path().join("in"))]);
    assert_eq!(o.status.code(), Some(3));
    let names: Vec<String> = tree(&out.join("spz")).into_iter().map(|(p, _)| p.display().to_string()).collect();
    assert_eq!(
        names,
        [
            "corrupt-error.json",
            "cris2016-intext.jsonl",
            "cris2016-intext.xml",
            "cris2016-refs.jsonl",
            "cris2016-refs.xml",
            "ekonomika2017-intext.jsonl",
            "ekonomika2017-intext.xml",
            "ekonomika2017-refs.jsonl",
            "ekonomika2017-refs.xml",
        ]
    );
}

#[test]
fn parse_refs_reads_the_sample_line() {
    let line = "Гордиенко Э.А. Варлаам Хутынский и архиепископ Антоний в житиях и мистериях XII-XVI века. – М.; СПб., 2010.\n";
    let o = with_stdin(&["parse-refs", "-m", p(model())], line);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["num"], 1);
    assert_eq!(v["author"], "Гордиенко Э.А.");
    assert_eq!(v["title"], "Варлаам Хутынский и архиепископ Антоний в житиях и мистериях XII-XVI века.");
    assert_eq!(v["year"], "2010");
}

#[test]
fn tag_prints_columns() {
    let o = with_stdin(&["tag", "-m", p(model())], "Гордиенко Э.А. Варлаам Хутынский. – М., 2010.\n");
    assert!(o.status.success());
    let text = stdout(&o);
    let first: Vec<&str> = text.lines().take(3).collect();
    assert_eq!(first, ["Гордиенко\tB-A", "Э.А.\tI-A", "Варлаам\tB-T"]);
}

#[test]
fn link_registers_what_it_cannot_link() {
    let tmp = tempfile::tempdir().unwrap();
    let registry = tmp.path().join("unlinked.jsonl");
    let refs = concat!(
        r#"{"num":4,"raw":"","span":{"start":0,"end":0},"author":"Parinov S.","title":"Towards an Open Data on how the Research Data are Used: CRIS CERIF based Approach.","year":"2014","unparsed_tail":""}"#,
        "\n",
        r#"{"num":5,"raw":"","span":{"start":0,"end":0},"author":"Preston J.","title":"The Future of Academic Research.","year":"2013","unparsed_tail":""}"#,
        "\n"
    );
    let collection = fixtures().join("collection.jsonl");
    let args = ["link", "--collection", p(&collection), "--registry", p(&registry), "--citing", "spz/x"];
    let o = with_stdin(&args, refs);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["link"]["handle"], "RePEc:rus:mqijxk:34");
    assert_eq!(lines[0]["link"]["kind"], "linked");
    assert_eq!(lines[1]["link"]["handle"], "spz:cyrkitec:references:1");
    assert_eq!(lines[1]["link"]["kind"], "unlinked");
    assert_eq!(lines[1]["citing"], "spz/x");

    let again = with_stdin(&args, refs);
    assert_eq!(stdout(&again), stdout(&o));
    assert_eq!(fs::read_to_string(&registry).unwrap().lines().count(), 1);
}

#[test]
fn mine_names_writes_provenance() {
    let corpus = "Иванов И.И., Сидорчук П.П. Экономика региона. – 2010.\n";
    let tmp = tempfile::tempdir().unwrap();
    let seed = tmp.path().join("seed.tsv");
    fs::write(&seed, "Иванов\tseed\n").unwrap();
    let o = with_stdin(&["mine-names", "--seed", p(&seed)], corpus);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().any(|l| l == "Сидорчук\tmined"), "{text}");
    assert!(text.lines().any(|l| l == "Иванов\tseed"), "{text}");
}

#[test]
fn exit_codes() {
    assert_eq!(gostcite(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(gostcite(&["process", "-o", "x"]).status.code(), Some(2));
    let missing = gostcite(&["parse-refs", "-m", "/nonexistent/model.txt", "-"]);
    assert_eq!(missing.status.code(), Some(1));

    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("gostcite.toml");
    fs::write(&config, "version = 99\n").unwrap();
    assert_eq!(gostcite(&["--config", p(&config), "stats", "-"]).status.code(), Some(1));
}

#[test]
fn config_changes_context_width() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("gostcite.toml");
    fs::write(&config, "version = 1\n\n[intext]\ncontext_width = 20\n").unwrap();
    let out = tmp.path().join("out");
    let doc = fixtures().join("docs/spz/cris2016.json");
    let o = gostcite(&["--config", p(&config), "process", "-m", p(model()), "-o", p(&out), p(&doc)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let jsonl = fs::read_to_string(out.join("spz/cris2016-intext.jsonl")).unwrap();
    for line in jsonl.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["prefix"].as_str().unwrap().chars().count() <= 20);
        assert!(v["suffix"].as_str().unwrap().chars().count() <= 20);
    }
}
