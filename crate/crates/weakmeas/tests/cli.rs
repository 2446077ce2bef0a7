use std::process::Command;

use weakmeas::csv::parse_header;

fn weakmeas(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_weakmeas")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        &["mi-sweep", "x=0.1", "T=5"][..],
        &["mi-sweep", "model=I", "x=0.1", "T=5", "colour=red"],
        &["nonmonotone-scan", "phi=", "x=0.5", "T=5"],
        &["xi", "model=III", "x=1"],
        &["xi", "model=I", "x=1", "phi=0.1"],
        &["accuracy", "model=I", "x=1", "T=4", "eta=1.5"],
        &["accuracy", "model=I", "x=1", "T=4", "M=0"],
        &["sme-ensemble", "model=I", "dt=0.1"],
        &["no-such-command"],
        &[],
    ] {
        let (code, stdout, stderr) = weakmeas(args);
        assert_eq!(code, 2, "{args:?}: {stderr}");
        assert!(stdout.is_empty());
        assert!(!stderr.is_empty());
    }
}

#[test]
fn output_is_deterministic_and_carries_its_config() {
    let args = ["mi-sweep", "model=II", "x=0.3,0.6", "a=1", "Tmax=40", "points=4", "M=500", "seed=7"];
    let (code, first, _) = weakmeas(&args);
    assert_eq!(code, 0);
    let (_, second, _) = weakmeas(&[&args[..], &["workers=1"]].concat());
    assert_eq!(first, second);
    let header = parse_header(&first);
    assert_eq!(header[0], ("command".to_string(), "mi-sweep".to_string()));
    assert!(header.contains(&("seed".to_string(), "7".to_string())));
    assert!(header.contains(&("eta".to_string(), "1".to_string())));
    let body: Vec<&str> = first.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "x,T,x2T,mi,epsilon,delta,M");
    assert_eq!(body.len(), 9);
    // Both curves sample x²T ∈ {0.9, 1.8, 2.7, 3.6}.
    let x2t: Vec<&str> = body[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(x2t[..4].len(), 4);
    let (_, other, _) = weakmeas(&[&args[..7], &["seed=8"]].concat());
    assert_ne!(first, other);
}

#[test]
fn replay_reproduces_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("acc.csv");
    let out = format!("out={}", path.display());
    let (code, stdout, _) = weakmeas(&["accuracy", "model=II", "x=1", "T=1,3", "M=800", "seed=3", &out]);
    assert_eq!((code, stdout.as_str()), (0, ""));
    let written = std::fs::read_to_string(&path).unwrap();
    let file = format!("file={}", path.display());
    let (code, replayed, _) = weakmeas(&["replay", &file]);
    assert_eq!(code, 0);
    assert_eq!(replayed, written);
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# transfer matrix\nmodel=I\nx=2\n").unwrap();
    let (code, stdout, _) = weakmeas(&["xi", &format!("config={}", cfg.display()), "x=1"]);
    assert_eq!(code, 0);
    let row = stdout.lines().last().unwrap();
    let xi: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((xi - 3.7397).abs() < 1e-4);
}

#[test]
fn projective_limit_sweep() {
    let (code, stdout, _) = weakmeas(&["mi-sweep", "model=I", "x=50", "T=1"]);
    assert_eq!(code, 0);
    let row: Vec<f64> = stdout.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[3] - 1.0 / 3.0).abs() <= row[4]);
    assert_eq!(row[6], 6623.0);
}

#[test]
fn plateau_table_edge_cases() {
    let (code, stdout, _) = weakmeas(&["plateau-compare", "model=I,II", "eta=0", "alpha=0", "M=200"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<&str>> = stdout.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!((r[5], r[6], r[7], r[8]), ("0", "0", "nan", "0"));
    }
    let (_, stdout, _) = weakmeas(&["plateau-compare", "model=II", "eta=0.5", "alpha=0", "M=200"]);
    let r: Vec<&str> = stdout.lines().last().unwrap().split(',').collect();
    assert_eq!((r[6], r[8]), ("1", "1"));
}

#[test]
fn noiseless_sme_path_follows_the_lindblad_decay() {
    let (code, stdout, _) = weakmeas(&["sme-ensemble", "model=I", "eta=0", "paths=1", "dt=0.001", "t=1"]);
    assert_eq!(code, 0);
    let last: Vec<f64> = stdout.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!((last[4] - (-4.0f64).exp()).abs() < 4.0 * 1e-3);
}

#[test]
fn record_dump_matches_the_training_set() {
    let (code, stdout, _) = weakmeas(&["records", "model=I", "x=0.4", "T=6", "n=5", "seed=2"]);
    assert_eq!(code, 0);
    let dump = weakmeas::records::parse_dump(&stdout, 6).unwrap();
    assert_eq!(dump.records.len(), 5);
    assert!(dump.records.iter().all(|r| r.len() == 6));
    assert_eq!(dump.header_value("T"), Some("6"));
}

#[test]
fn weaker_measurement_can_inform_more() {
    let (code, stdout, _) = weakmeas(&["nonmonotone-scan", "phi=pi/8", "x=0.4,3", "T=50", "M=2000"]);
    assert_eq!(code, 0);
    let rows: Vec<Vec<f64>> = stdout
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows[0][4] > rows[1][4] + 2.0 * rows[0][5]);
}
