use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudotwin"))
        .args(args)
        .env_remove("PSEUDOTWIN_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn pihat_row_format() {
    let o = run(&["pihat", "--x", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,pi_hat,model,ratio,ambiguous");
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(cols[0], "1000");
    assert_eq!(cols[1], "30");
    // 17 significant digits in scientific form
    assert_eq!(cols[2].split('e').next().unwrap().len(), 18);
    assert!(!text.contains('\r'));
}

#[test]
fn pihat_cross_check() {
    let o = run(&["pihat", "--x", "1e4", "--cross-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",165"));
}

#[test]
fn vaughan_summary_row() {
    let o = run(&[
        "vaughan-verify",
        "--u",
        "30",
        "--v",
        "30",
        "--max-n",
        "10000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "checked,failures\n9970,0\n");
}

#[test]
fn wvdc_rows_are_seeded() {
    let a = run(&["wvdc-fuzz", "--trials", "1000", "--seed", "42"]);
    let b = run(&[
        "wvdc-fuzz",
        "--trials",
        "1000",
        "--seed",
        "42",
        "--threads",
        "1",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().next().unwrap(), "trial,k,q,lhs,rhs,ok");
    assert_eq!(text.lines().count(), 1001);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
    let c = run(&["wvdc-fuzz", "--trials", "10", "--seed", "43"]);
    assert_ne!(stdout(&c).lines().nth(1), text.lines().nth(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["pihat"]).status.code(), Some(2));
    assert_eq!(
        run(&["pihat", "--x", "10", "--bogus"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    // a flag from another command is not accepted
    assert_eq!(
        run(&["pihat", "--x", "10", "--seed", "1"]).status.code(),
        Some(2)
    );
    // library parameter validation
    assert_eq!(
        run(&["decompose", "--h", "1", "--n", "100", "--n2", "300"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["pihat", "--x", "2e9"]).status.code(), Some(2));
    assert_eq!(
        run(&["pihat", "--x", "10", "--threads", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn thread_counts_agree() {
    let one = run(&["--threads", "1", "decompose", "--h", "5", "--n", "3000"]);
    let four = run(&["--threads", "4", "decompose", "--h", "5", "--n", "3000"]);
    assert_eq!(one.status.code(), Some(0));
    let parse = |o: &Output| -> Vec<f64> {
        stdout(o)
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .map(|c| c.parse().unwrap())
            .collect()
    };
    for (a, b) in parse(&one).iter().zip(parse(&four)) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s0.csv");
    let to_file = run(&[
        "expsum-s0",
        "--h",
        "1",
        "--q",
        "1",
        "--k",
        "5",
        "--l",
        "10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(to_file.status.code(), Some(0));
    let direct = run(&["expsum-s0", "--h", "1", "--q", "1", "--k", "5", "--l", "10"]);
    assert_eq!(fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn golden_store_lifecycle() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("goldens.tsv");
    let s = store.to_str().unwrap();

    // missing store
    assert_eq!(run(&["goldens", "--goldens", s]).status.code(), Some(1));

    let fresh = run(&["goldens", "--goldens", s, "--init"]);
    assert_eq!(fresh.status.code(), Some(0));
    assert_eq!(stdout(&fresh), "key,value,note\n");
    assert_eq!(
        run(&["goldens", "--goldens", s, "--init"]).status.code(),
        Some(1)
    );

    let t = run(&["pihat-table", "--checkpoints", "1e3,1e4", "--goldens", s]);
    assert_eq!(t.status.code(), Some(0));
    let listed = stdout(&run(&["goldens", "--goldens", s]));
    assert!(listed.contains("pihat.ratio.1000,"));
    assert!(listed.contains("pihat.ratio.10000,"));

    // re-running with identical results is not a rewrite
    assert_eq!(
        run(&["pihat-table", "--checkpoints", "1e3,1e4", "--goldens", s])
            .status
            .code(),
        Some(0)
    );

    // a conflicting value is refused unless regenerate is given
    let text = fs::read_to_string(&store).unwrap();
    let tampered: String = text
        .lines()
        .map(|l| {
            if l.starts_with("pihat.count.1000\t") {
                "pihat.count.1000\t31\tedited".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    fs::write(&store, tampered + "\n").unwrap();
    assert_eq!(
        run(&["pihat-table", "--checkpoints", "1e3", "--goldens", s])
            .status
            .code(),
        Some(1)
    );
    let regen = run(&[
        "pihat-table",
        "--checkpoints",
        "1e3",
        "--goldens",
        s,
        "--regenerate",
    ]);
    assert_eq!(regen.status.code(), Some(0));
    assert!(fs::read_to_string(&store)
        .unwrap()
        .contains("pihat.count.1000\t3.00000000000000000e1"));
}

#[test]
fn every_command_emits_a_header() {
    let cases: &[&[&str]] = &[
        &["lival", "--x", "10"],
        &["lival", "--y", "5"],
        &["expsum-linear", "--h", "1", "--n", "1024"],
        &["expsum-linear", "--h", "1", "--n", "1024", "--sup"],
        &[
            "expsum-bilinear",
            "--h",
            "1,2",
            "--l",
            "64",
            "--k",
            "64",
            "--alpha",
            "b",
            "--beta",
            "ones",
        ],
        &[
            "decompose",
            "--h",
            "1",
            "--n",
            "256",
            "--u",
            "4",
            "--v",
            "4",
        ],
        &["s-total", "--n", "256", "--h-max", "3"],
        &["sigma", "--n", "256", "--h-max", "64"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let text = stdout(&o);
        let mut lines = text.lines();
        let head = lines.next().unwrap().split(',').count();
        for l in lines {
            assert_eq!(l.split(',').count(), head, "{args:?}");
        }
    }
}

#[test]
fn linear_h_zero_counts_terms() {
    let o = run(&["expsum-linear", "--h", "0", "--n", "100", "--n1", "150"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[4].parse::<f64>().unwrap(), 50.0);
    assert_eq!(cols[7], "");
}
