use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bayesvote(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayesvote"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SOLVE_ARGS: &[&str] = &[
    "--seed",
    "1",
    "--dist",
    "mallows:0.8",
    "--m",
    "4",
    "--n",
    "20",
    "--c",
    "3",
    "--tsolve",
    "50",
];

#[test]
fn solve_prints_strategy_and_ballots() {
    let out = bayesvote(&[&["solve"], SOLVE_ARGS].concat());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("optimal=true"));
    assert!(text.contains("solve_time=NA"));
    let ballots = text.split("ballots:\n").nth(1).unwrap();
    assert!(ballots.starts_with("m=4\n"));
    let voters: u32 = ballots
        .lines()
        .skip(1)
        .map(|l| l.split(':').next().unwrap().parse::<u32>().unwrap())
        .sum();
    assert_eq!(voters, 3);
    // Same seed, same answer.
    assert_eq!(stdout(&bayesvote(&[&["solve"], SOLVE_ARGS].concat())), text);
}

#[test]
fn solve_output_round_trips_through_recover_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&bayesvote(&[&["solve"], SOLVE_ARGS].concat()));
    let matrix: String = text
        .split("strategy:\n")
        .nth(1)
        .unwrap()
        .split("ballots:")
        .next()
        .unwrap()
        .to_string();
    let psm = dir.path().join("psm.txt");
    fs::write(&psm, &matrix).unwrap();

    let recovered = bayesvote(&["recover", psm.to_str().unwrap()]);
    assert!(recovered.status.success());
    assert!(stdout(&recovered).starts_with("m=4\n"));

    let eval = bayesvote(
        &[
            &[
                "evaluate",
                "--strategy",
                psm.to_str().unwrap(),
                "--trials",
                "200",
            ],
            SOLVE_ARGS,
        ]
        .concat(),
    );
    assert!(
        eval.status.success(),
        "{}",
        String::from_utf8_lossy(&eval.stderr)
    );
    let report = stdout(&eval);
    assert!(report.contains("expected_regret="));
    assert!(report.contains("trials=200"));
}

#[test]
fn sweep_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = bayesvote(&[
        "sweep",
        "--seed",
        "3",
        "--dist",
        "mallows:0.8",
        "--sweep-n",
        "20,40",
        "--sweep-phi",
        "0.6,1",
        "--c",
        "3",
        "--m",
        "4",
        "--tsolve",
        "40",
        "--trials",
        "100",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("phi,d,n,predicted_prob,realized_prob"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn complexity_matches_known_count() {
    let out = bayesvote(&[
        "complexity",
        "--c",
        "2",
        "--m",
        "3",
        "--k",
        "1",
        "--eps",
        "0.1",
        "--delta",
        "0.05",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("kapproval=214580"));
}

#[test]
fn sample_writes_parseable_ballots() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pool.txt");
    let out = bayesvote(&[
        "sample",
        "--seed",
        "9",
        "--dist",
        "ic",
        "--m",
        "5",
        "--n",
        "40",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let spec = format!("ballots:{}", path.display());
    let again = bayesvote(&[
        "solve", "--seed", "2", "--dist", &spec, "--n", "10", "--c", "2", "--tsolve", "20",
    ]);
    assert!(
        again.status.success(),
        "{}",
        String::from_utf8_lossy(&again.stderr)
    );
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# small run\nrule = plurality\nm = 3\nn = 15\nc = 2\ntsolve = 30\nseed = 4\n",
    )
    .unwrap();
    let base = bayesvote(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(base.status.success());
    assert!(stdout(&base).contains("rule=1,0,0"));
    let over = bayesvote(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--rule",
        "borda",
    ]);
    assert!(stdout(&over).contains("rule=2,1,0"));
}

#[test]
fn errors_name_the_offending_key() {
    let out = bayesvote(&["solve", "--set", "foo=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`foo`"));

    let out = bayesvote(&["solve", "--dist", "mallows:2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`dist`"));
}

#[test]
fn missing_strategy_file_is_an_error() {
    let out = bayesvote(&["recover", "/nonexistent/psm.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new("/nonexistent/psm.txt").exists());
}
