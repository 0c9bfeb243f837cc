use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn kolmo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kolmo"))
        .args(args)
        .env("KOLMO_FIXTURES", fixtures())
        .output()
        .expect("spawn kolmo")
}

fn stdout(args: &[&str]) -> String {
    let o = kolmo(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn kraft_of_complete_code() {
    assert_eq!(stdout(&["codes", "kraft", "0", "10", "11"]), "1/2^0\n");
    let mut child = Command::new(env!("CARGO_BIN_EXE_kolmo"))
        .args(["codes", "kraft"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    use std::io::Write;
    child.stdin.take().unwrap().write_all(b"0\n10\n11\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "1/2^0\n");
}

#[test]
fn small_codes() {
    assert_eq!(stdout(&["codes", "bar", "10"]), "11010\n");
    assert_eq!(stdout(&["codes", "unpair", "101100"]), "10\t0\n");
    assert_eq!(stdout(&["codes", "interval", "1/2^2", "3/2^2"]), "largest\t01\ncover\t01\ncover\t10\n");
}

#[test]
fn exit_codes() {
    assert_eq!(kolmo(&["codes", "bar", "--bogus"]).status.code(), Some(2));
    assert_eq!(kolmo(&["nonsense"]).status.code(), Some(2));
    assert_eq!(kolmo(&["vm", "run", "-m", "no-such-machine"]).status.code(), Some(1));
    assert_eq!(kolmo(&["selftest"]).status.code(), Some(0));
}

#[test]
fn code_build_then_decode() {
    let dir = tempfile::tempdir().unwrap();
    let book = dir.path().join("book.tsv");
    let km = dir.path().join("book.km");
    let phi = fixtures().join("phi-staircase.csv");
    let out = kolmo(&[
        "code",
        "build",
        "--phi",
        phi.to_str().unwrap(),
        "--out",
        book.to_str().unwrap(),
        "--machine-out",
        km.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&book).unwrap();
    let mut seen = 0;
    for line in text.lines().skip_while(|l| !l.starts_with("columns")).skip(1) {
        let cells: Vec<&str> = line.split('\t').collect();
        let (x, p) = (cells[0], cells[1]);
        let b = book.to_str().unwrap();
        assert_eq!(stdout(&["code", "decode", "--book", b, "-p", p]).trim(), x);
        // The exported machine decodes the same way.
        let run = stdout(&["vm", "run", "-m", km.to_str().unwrap(), "-p", p]);
        assert!(run.starts_with(&format!("halted\t{x}\t{}", p.len())), "{run}");
        seen += 1;
    }
    assert!(seen >= 3);
    let encoded = stdout(&["code", "encode", "--book", book.to_str().unwrap(), "--x", "0"]);
    assert_eq!(
        stdout(&["code", "decode", "--book", book.to_str().unwrap(), "-p", encoded.trim()]),
        "0\n"
    );
}

#[test]
fn fixture_directory_lookup() {
    let by_name = stdout(&["vm", "run", "-m", "aux-or-bar.km", "-a", "1", "-p", "0"]);
    let builtin = stdout(&["vm", "run", "-m", "aux-or-bar", "-a", "1", "-p", "0"]);
    assert_eq!(by_name, builtin);
    let o = Command::new(env!("CARGO_BIN_EXE_kolmo"))
        .args(["vm", "run", "-m", "aux-or-bar.km"])
        .env_remove("KOLMO_FIXTURES")
        .current_dir(std::env::temp_dir())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn checked_in_fixtures_are_current() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&["fixtures", dir.path().to_str().unwrap()]);
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        let name = p.file_name().unwrap();
        assert_eq!(
            std::fs::read_to_string(&p).unwrap(),
            std::fs::read_to_string(fixtures().join(name)).unwrap(),
            "{name:?} is stale; run `kolmo fixtures crates/kolmo/fixtures`"
        );
    }
}

#[test]
fn manifests_pin_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let out = dir.path().join(format!("{tag}.tsv"));
        let man = dir.path().join(format!("{tag}.json"));
        let o = kolmo(&[
            "apriori",
            "-m",
            "two-routes.km",
            "--max-stage",
            "200",
            "-L",
            "6",
            "--out",
            out.to_str().unwrap(),
            "--manifest",
            man.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(man).unwrap()).unwrap();
        (std::fs::read(out).unwrap(), m)
    };
    let (a, ma) = run("a");
    let (b, mb) = run("b");
    assert_eq!(a, b);
    assert_eq!(ma["output_sha256"], mb["output_sha256"]);
    assert_eq!(ma["subcommand"], "apriori");
    assert_eq!(ma["inputs"].as_object().unwrap().len(), 1);
    assert_eq!(ma["output_sha256"], kolmo::manifest::sha256_hex(&a));
}

#[test]
fn apriori_extend_checks_growth() {
    let dir = tempfile::tempdir().unwrap();
    let old = dir.path().join("old.tsv");
    let o = kolmo(&["apriori", "-m", "aux-or-bar", "-a", "1", "--max-stage", "60", "-L", "5", "--out", old.to_str().unwrap()]);
    assert!(o.status.success());
    let old = old.to_str().unwrap();
    assert!(kolmo(&["apriori", "-m", "aux-or-bar", "-a", "1", "--max-stage", "90", "-L", "6", "--extend", old]).status.success());
    assert_eq!(kolmo(&["apriori", "-m", "aux-or-bar", "-a", "1", "--max-stage", "50", "-L", "6", "--extend", old]).status.code(), Some(1));
    assert_eq!(kolmo(&["apriori", "-m", "aux-or-bar", "--max-stage", "90", "-L", "6", "--extend", old]).status.code(), Some(1));
}

#[test]
fn report_commands_run() {
    for args in [
        &["k", "-m", "two-routes", "-L", "4", "-S", "50"][..],
        &["k", "-m", "aux-or-bar", "--x", "0", "-L", "10", "-S", "300", "--soi"],
        &["code", "gap", "-m", "copy2", "-L", "4", "-S", "50"],
        &["semimeasure", "normalize", "--phi", "phi-heavy.csv", "--max-stage", "4"],
        &["demo", "condition-set", "-m", "aux-or-bar", "--set", "0", "--range", "3", "-L", "8", "-S", "200"],
    ] {
        let cwd_args: Vec<String> = args
            .iter()
            .map(|a| if a.ends_with(".csv") { fixtures().join(a).display().to_string() } else { a.to_string() })
            .collect();
        let refs: Vec<&str> = cwd_args.iter().map(String::as_str).collect();
        assert!(!stdout(&refs).is_empty());
    }
    let q = stdout(&["demo", "quotient", "--joint", fixtures().join("joint-a.tsv").to_str().unwrap()]);
    assert!(q.contains("0\t0\t2/3\n"));
    let dom = stdout(&[
        "semimeasure",
        "dominate",
        "--component",
        fixtures().join("phi-staircase.csv").to_str().unwrap(),
        "--component",
        fixtures().join("phi-heavy.csv").to_str().unwrap(),
        "--max-stage",
        "4",
    ]);
    assert!(dom.ends_with("dominates\ttrue\n"));
}
