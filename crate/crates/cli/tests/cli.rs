use std::path::Path;
use std::process::{Command, Output};

use recon_cli::{cmd_sweep, ExperimentConfig, CSV_HEADER};
use recon_core::ldpc::{generate_gallager, write_alist};

fn recon(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recon"))
        .args(args)
        .current_dir(dir)
        .env("RECON_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&recon(
        &["sweep", "--code", "gallager:120,3,6,1", "--grid", ""],
        dir.path(),
    ));
    assert_eq!(out, format!("{CSV_HEADER}\n"));
}

#[test]
fn reference_point_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&recon(
        &[
            "sweep",
            "--code",
            "gallager:200000,2,5,3",
            "--grid",
            "0.068",
            "--delta",
            "0.05",
            "--f-eff",
            "1.09",
            "--frames",
            "1",
        ],
        dir.path(),
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[1..5], ["200000", "120000", "4228", "5772"]);
    assert_eq!(fields[9], "84228");
    assert_eq!(fields[14], "ok");
}

#[test]
fn reruns_are_identical_and_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--code",
        "gallager:600,3,6,2",
        "--grid",
        "0.02:0.04:0.01",
        "--frames",
        "20",
        "--seed",
        "9",
    ];
    let first = stdout(&recon(&args, dir.path()));
    let second = stdout(&recon(&args, dir.path()));
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 4);

    let mut with_out = args.to_vec();
    with_out.extend(["--out", "rows.csv"]);
    assert_eq!(stdout(&recon(&with_out, dir.path())), "");
    assert_eq!(
        std::fs::read_to_string(dir.path().join("rows.csv")).unwrap(),
        first
    );
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# sweep settings\ncode = gallager:600,3,6,2\ngrid = 0.02\nframes = 10\nseed = 1\n",
    )
    .unwrap();
    let from_file = stdout(&recon(&["sweep", "--config", "run.conf"], dir.path()));
    let overridden = stdout(&recon(
        &["sweep", "--config", "run.conf", "--grid", "0.02,0.03"],
        dir.path(),
    ));
    assert_eq!(from_file.lines().count(), 2);
    assert_eq!(overridden.lines().count(), 3);
    assert_eq!(from_file.lines().nth(1), overridden.lines().nth(1));

    std::fs::write(dir.path().join("bad.conf"), "colour = blue\n").unwrap();
    let out = recon(&["sweep", "--config", "bad.conf"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key"));
}

#[test]
fn calibration_table_feeds_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let code = [
        "--code",
        "gallager:600,3,6,2",
        "--delta",
        "0.1",
        "--frames",
        "20",
    ];
    let mut calibrate = vec!["calibrate", "--grid", "0.02,0.04,0.45", "--out", "f.table"];
    calibrate.extend(code);
    stdout(&recon(&calibrate, dir.path()));
    let table = std::fs::read_to_string(dir.path().join("f.table")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("0.020000 "));
    // far past the code's capacity: no candidate reaches the target
    assert_eq!(lines[2], "0.450000 inf");

    let mut sweep = vec![
        "sweep",
        "--grid",
        "0.02,0.03,0.44",
        "--f-eff",
        "table:f.table",
    ];
    sweep.extend(code);
    let csv = stdout(&recon(&sweep, dir.path()));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows[0].ends_with(",ok"), "{}", rows[0]);
    assert!(rows[2].ends_with(",unreachable"), "{}", rows[2]);
}

#[test]
fn infeasible_points_are_marked() {
    let cfg = ExperimentConfig::from_entries(
        &[
            ("code", "gallager:600,3,6,2"),
            ("grid", "0.01,0.2"),
            ("delta", "0.02"),
            ("frames", "2"),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect(),
    )
    .unwrap();
    let csv = cmd_sweep(&cfg, 1).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // a 12-symbol budget cannot lift the rate to the 0.01 target, so every symbol is punctured
    assert!(
        rows[0].starts_with("0.010000,600,300,0,12,") && rows[0].ends_with(",ok"),
        "{csv}"
    );
    // nor lower it far enough for 0.2
    assert!(rows[1].ends_with(",infeasible"), "{csv}");
    assert_eq!(rows[1].split(',').nth(3), Some(""));
}

#[test]
fn keybudget_reference_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(&recon(
        &[
            "keybudget",
            "--h-min",
            "190000",
            "--n",
            "200000",
            "--k",
            "120000",
            "--s",
            "4228",
            "--p",
            "5772",
        ],
        dir.path(),
    ));
    assert!(out.contains("transcript_bits: 84228\n"), "{out}");
    assert!(out.contains("routes_agree: true\n"));
    let bound: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("key_bits_lower_bound: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((bound - 115692.0).abs() < 1e-6, "{bound}");
}

#[test]
fn keybudget_rejects_bad_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let out = recon(
        &[
            "keybudget",
            "--h-min",
            "lots",
            "--n",
            "10",
            "--k",
            "5",
            "--s",
            "0",
            "--p",
            "0",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
}

#[test]
fn alist_check_reports_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let code = generate_gallager(96, 2, 4, 4).unwrap();
    std::fs::write(dir.path().join("c.alist"), write_alist(&code)).unwrap();

    let out = stdout(&recon(
        &["alist-check", "c.alist", "--no-rank-check"],
        dir.path(),
    ));
    assert!(
        out.contains("n: 96\n") && out.contains("m_rows: 48\n") && out.contains("edges: 192\n"),
        "{out}"
    );

    // every column has weight 2, so the rows sum to zero and the rank check refuses it
    let out = recon(&["alist-check", "c.alist"], dir.path());
    assert!(!out.status.success());

    std::fs::write(dir.path().join("broken.alist"), "3 2\n2 3\n").unwrap();
    let out = recon(&["alist-check", "broken.alist"], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}
