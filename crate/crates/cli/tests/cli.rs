use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn example_log() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/person_workload.txt")
}

fn isummary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isummary"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn example_summary_with_base_prefix() {
    let dir = tempfile::tempdir().unwrap();
    let nt = dir.path().join("s.nt");
    let report = dir.path().join("s.json");
    let log = example_log();
    let out = isummary(&[
        "summarize",
        "--log",
        log.to_str().unwrap(),
        "--base-prefix",
        "http://example.org/",
        "--seed",
        "Person",
        "--k",
        "2",
        "--out",
        nt.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(&nt).unwrap(),
        "<http://example.org/Organization> <http://example.org/affiliatedOf> <http://example.org/Person> .\n"
    );
    let json = std::fs::read_to_string(&report).unwrap();
    assert!(json.contains("\"strategy\": \"isummary\""));
    assert!(json.contains("\"frequency\": 2"));
}

#[test]
fn literal_seed_on_stdout() {
    let log = example_log();
    let out = isummary(&[
        "summarize",
        "--log",
        log.to_str().unwrap(),
        "--seed",
        "\"FORTH\"",
        "--k",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "<Organization> <orgName> \"FORTH\" .\n"
    );
}

#[test]
fn synth_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, rng: &str| {
        let path = dir.path().join(name);
        let out = isummary(&[
            "synth",
            "--n-queries",
            "300",
            "--rng",
            rng,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        std::fs::read(path).unwrap()
    };
    let a = run("a.txt", "5");
    assert_eq!(a, run("b.txt", "5"));
    assert_ne!(a, run("c.txt", "6"));
    assert_eq!(a.iter().filter(|&&b| b == b'\n').count(), 300);
}

#[test]
fn evaluate_row_count_and_thread_independence() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.txt");
    assert!(isummary(&[
        "synth",
        "--n-queries",
        "2000",
        "--rng",
        "2",
        "--out",
        log.to_str().unwrap()
    ])
    .status
    .success());
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_isummary"))
            .env("ISUMMARY_THREADS", threads)
            .args([
                "evaluate",
                "--log",
                log.to_str().unwrap(),
                "--folds",
                "3",
                "--sample-seeds",
                "4",
            ])
            .args(["--k", "2,5", "--rng", "9"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        String::from_utf8(out.stdout).unwrap()
    };
    let csv = run("1");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "fold,seed,k,strategy,n,node_cov,edge_cov,coverage"
    );
    assert_eq!(lines.len() - 1, 3 * 4 * 2 * 2);
    assert_eq!(csv, run("4"));
}

#[test]
fn oracle_reads_instance_files() {
    let dir = tempfile::tempdir().unwrap();
    let instances = dir.path().join("instances");
    std::fs::create_dir(&instances).unwrap();
    std::fs::write(instances.join("path.txt"), "3 2 1 2\n0 1 5\n0 1\n1 2\n0\n").unwrap();
    let out = isummary(&[
        "oracle",
        "--instances",
        instances.to_str().unwrap(),
        "--trials",
        "5",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("path.txt,3,2,1,"));
}

#[test]
fn usage_errors_exit_2() {
    let log = example_log();
    let log = log.to_str().unwrap();
    for args in [
        vec!["summarize", "--log", log, "--k", "2"],
        vec![
            "summarize",
            "--log",
            log,
            "--seed",
            "Person",
            "--k",
            "2",
            "--strategy",
            "best",
        ],
        vec![
            "summarize",
            "--log",
            log,
            "--seed",
            "Person",
            "--seed",
            "Professor",
            "--k",
            "1",
        ],
        vec!["summarize", "--log", log, "--seed", "?x", "--k", "2"],
        vec!["evaluate", "--log", log, "--split", "1.5"],
        vec!["frobnicate"],
    ] {
        let out = isummary(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn data_errors_exit_3_with_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "not a query\n").unwrap();
    let log = example_log();
    let cases = [
        (
            vec![
                "summarize",
                "--log",
                log.to_str().unwrap(),
                "--seed",
                "Nobody",
                "--k",
                "2",
            ],
            "NoRelevantQueries",
        ),
        (
            vec![
                "summarize",
                "--log",
                empty.to_str().unwrap(),
                "--seed",
                "Person",
                "--k",
                "2",
            ],
            "EmptyWorkload",
        ),
        (
            vec![
                "summarize",
                "--log",
                "/no/such/file",
                "--seed",
                "Person",
                "--k",
                "2",
            ],
            "IoError",
        ),
    ];
    for (args, name) in cases {
        let out = isummary(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}");
        assert!(stderr(&out).contains(name), "{args:?}: {}", stderr(&out));
    }
}
