use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn i3kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_i3kit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TABLES: [&str; 7] = [
    "rank_table.csv",
    "indicators.csv",
    "ztest.csv",
    "ri3r.csv",
    "homogeneity.net",
    "homogeneity_edges.csv",
    "overlay.geojson",
];

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = i3kit(&[
        "run",
        s(&fixture("nano_200.txt")),
        "--gazetteer",
        s(&fixture("gazetteer.csv")),
        "--out-dir",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in TABLES
        .iter()
        .chain(&["records.csv", "scored.csv", "strata.csv", "skipped_journal.csv"])
    {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let rank = fs::read_to_string(out.join("rank_table.csv")).unwrap();
    assert_eq!(rank.lines().count(), 1 + 8, "one row per journal");
    assert!(rank.starts_with("rank,unit,n_papers,"));
    let skipped = fs::read_to_string(out.join("overlay_skipped.csv")).unwrap();
    assert!(skipped.contains("Singapore,Singapore,not in gazetteer"));
}

#[test]
fn rerun_from_scored_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    let gaz = fixture("gazetteer.csv");
    for extra in [
        vec![
            s(&fixture("nano_200.txt")).to_string(),
            "--out-dir".into(),
            s(&first).into(),
        ],
        vec![
            "--from-scored".into(),
            s(&first).into(),
            "--out-dir".into(),
            s(&second).into(),
        ],
    ] {
        let mut args = vec!["run", "--unit", "country", "--gazetteer", s(&gaz)];
        args.extend(extra.iter().map(String::as_str));
        let o = i3kit(&args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in TABLES.iter().chain(&["scored.csv", "records.csv"]) {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn staged_subcommands_match_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let links = fixture("links_200.csv");
    let steps: Vec<Vec<String>> = vec![
        vec![
            "ingest".into(),
            s(&fixture("nano_200.txt")).into(),
            "-o".into(),
            s(&d.join("r.csv")).into(),
        ],
        vec![
            "fractional".into(),
            s(&d.join("r.csv")).into(),
            "--links".into(),
            s(&links).into(),
            "-o".into(),
            s(&d.join("rf.csv")).into(),
        ],
        vec![
            "score".into(),
            s(&d.join("rf.csv")).into(),
            "-o".into(),
            s(&d.join("sc.csv")).into(),
        ],
        vec![
            "rank".into(),
            s(&d.join("rf.csv")).into(),
            s(&d.join("sc.csv")).into(),
            "--out-dir".into(),
            s(&d.join("staged")).into(),
        ],
    ];
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let o = i3kit(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = i3kit(&[
        "run",
        s(&fixture("nano_200.txt")),
        "--links",
        s(&links),
        "--out-dir",
        s(&d.join("whole")),
    ]);
    assert!(o.status.success());
    for f in ["rank_table.csv", "ztest.csv", "ri3r.csv"] {
        assert_eq!(
            fs::read(d.join("staged").join(f)).unwrap(),
            fs::read(d.join("whole").join(f)).unwrap(),
            "{f}"
        );
    }
    // fractional weights change the citation column
    let plain = i3kit(&["run", s(&fixture("nano_200.txt")), "--out-dir", s(&d.join("plain"))]);
    assert!(plain.status.success());
    assert_ne!(
        fs::read(d.join("plain/scored.csv")).unwrap(),
        fs::read(d.join("whole/scored.csv")).unwrap()
    );
}

#[test]
fn compare_and_map_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = i3kit(&["run", s(&fixture("nano_200.txt")), "--out-dir", s(d)]);
    assert!(o.status.success());
    let (records, scored) = (d.join("records.csv"), d.join("scored.csv"));

    let o = i3kit(&[
        "compare",
        s(&records),
        s(&scored),
        "--compare",
        "tc",
        "--out-dir",
        s(&d.join("cmp")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("max core "));
    let net = fs::read_to_string(d.join("cmp/homogeneity.net")).unwrap();
    assert!(net.starts_with("*Vertices 8\n1 \"ACS NANO\"\n"));

    let kml = d.join("cities.kml");
    let o = i3kit(&[
        "map",
        s(&records),
        s(&scored),
        "--overlay",
        "ri3r",
        "--gazetteer",
        s(&fixture("gazetteer.csv")),
        "--format",
        "kml",
        "-o",
        s(&kml),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&kml).unwrap();
    assert!(text.contains("<Placemark>"));
    assert!(d.join("cities.skipped.csv").is_file());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let input = fixture("nano_200.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", s(&input), "--unit", "department", "--out-dir", out],
        vec!["run", s(&input), "--rule", "leq", "--mutz", "--out-dir", out],
        vec!["run", "/nonexistent/export.txt", "--out-dir", out],
        vec!["run", s(&input), "--alpha", "0", "--out-dir", out],
        vec![
            "run",
            s(&input),
            "--gazetteer",
            "/nonexistent/gaz.csv",
            "--out-dir",
            out,
        ],
    ];
    for args in cases {
        let o = i3kit(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn malformed_export_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(
        &bad,
        "PT\tAU\tSO\tDT\tC1\tNR\tTC\tPY\nJ\tX, Y\tJ\tArticle\t\t10\tmany\t2007\n",
    )
    .unwrap();
    let o = i3kit(&["run", s(&bad), "--out-dir", s(&dir.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ingest: ") && err.contains("line 2"), "{err}");
}
