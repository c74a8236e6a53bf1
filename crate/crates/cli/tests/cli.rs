use std::fs;
use std::process::{Command, Output};

fn rmnest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmnest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn monte_carlo_output_is_byte_identical() {
    let args = [
        "metrics",
        "--code",
        "rm 1 3",
        "--channel",
        "bsc 0.1",
        "--mode",
        "mc",
        "--samples",
        "20000",
        "--seed",
        "7",
    ];
    let a = rmnest(&args);
    let b = rmnest(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);

    let mut two = args.to_vec();
    two.extend(["--workers", "2"]);
    let c = rmnest(&two);
    let body = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&a), body(&c), "estimates depend on the worker count");
}

#[test]
fn provenance_header_and_columns() {
    let out = rmnest(&["bound-table", "--table", "rate", "--m", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# tool: rmnest "));
    assert!(text.lines().any(|l| l.starts_with("# config_sha256: ")));
    assert!(text.lines().any(|l| l == "# seed: 1"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "r,m,rate,phi,gap,gap_bound,holds");
}

#[test]
fn malformed_channel_names_the_field() {
    let out = rmnest(&["metrics", "--code", "rep 3", "--channel", "bsc abc"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("crossover probability"),
        "{}",
        stderr(&out)
    );

    let out = rmnest(&["metrics", "--code", "rep 3", "--channel", "bec 1.7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("erasure probability"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn infeasible_request_exits_with_two() {
    let out = rmnest(&["metrics", "--code", "rm 2 6", "--channel", "bsc 0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("feasibility"), "{}", stderr(&out));
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(
        &path,
        "# metrics run\ncommand = metrics\ncode = rep 3\nchanel = bsc 0.1\n",
    )
    .unwrap();
    let out = rmnest(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("two_look.cfg");
    let csv = dir.path().join("two_look.csv");
    fs::write(
        &cfg,
        format!(
            "command = bound-table\ntable = two-look\ncode = rm 1 3\nout = {}\n",
            csv.display()
        ),
    )
    .unwrap();
    let out = rmnest(&["run", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "p,pe_long,pe_short,rho,bound,pass");
    assert_eq!(rows.len(), 20);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
    assert!(text.contains("# all_pass: true"));
}

#[test]
fn json_output_parses_shape() {
    let out = rmnest(&["rm-info", "--code", "rm 2 5", "--format", "json"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.trim_start().starts_with('{'));
    assert!(text.contains("\"rows\""));
    assert!(text.contains("\"min_distance\": 8"), "{text}");
}

#[test]
fn verify_subset_reports_each_criterion() {
    let out = rmnest(&["verify", "--criteria", "2,3,11"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("# all_pass: true"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",true,")));
}
