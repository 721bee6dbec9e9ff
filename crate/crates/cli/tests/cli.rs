use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DEMO: &str = r#"layout "demo" {
  window { width: 120; height: 100; }
  widget a { pref: 50x20; }
  widget b { pref: 50x20; }
  pattern hflow(items: [a, b], container: root);
  constraint soft(2): a.width == b.width;
}
"#;

const ROTATE: &str = r#"layout "rot" {
  window { width: 300; height: 100; }
  widget g { min: 0x0; max: 1000x1000; }
  widget c1 { pref: 40x30; }
  widget c2 { pref: 40x30; }
  widget c3 { pref: 40x30; }
  pattern rotate_group(group: g, children: [c1, c2, c3]);
}
"#;

const RIBBON: &str = r#"layout "ribbon" {
  window { width: 400; height: 40; }
  widget r1 { pref: 40x20; min: 40x20; max: 40x20; priority: high; }
  widget r2 { pref: 40x20; min: 40x20; max: 40x20; priority: medium; }
  widget r3 { pref: 40x20; min: 40x20; max: 40x20; priority: low; }
  pattern hflow(items: [r1, r2, r3]);
  pattern optional(widget: r1);
  pattern optional(widget: r2);
  pattern optional(widget: r3);
}
"#;

fn orc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orc")).args(args).current_dir(dir).output().expect("orc runs")
}

fn spec(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// (left, top, width, height, visible) of `id` in one record.
fn rect(record: &Value, id: &str) -> (f64, f64, f64, f64, bool) {
    let w = record["solution"]["widgets"].as_array().unwrap().iter().find(|w| w["id"] == id).unwrap();
    let f = |k: &str| w[k].as_f64().unwrap();
    (f("left"), f("top"), f("width"), f("height"), w["visible"].as_bool().unwrap())
}

#[test]
fn demo_wraps_when_narrow() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "demo.orc", DEMO);
    let out = orc(&["solve", "demo.orc", "--viewport", "120x100", "--viewport", "60x100"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    let records = v.as_array().unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["viewport"]["width"], 120.0);
    assert_eq!(rect(&records[0], "a"), (0.0, 0.0, 50.0, 20.0, true));
    assert_eq!(rect(&records[0], "b"), (50.0, 0.0, 50.0, 20.0, true));
    assert_eq!(rect(&records[1], "b"), (0.0, 20.0, 50.0, 20.0, true));
    for r in records {
        assert_eq!(r["solution"]["optimal"], true);
        assert_eq!(r["solution"]["solve_ms"], 0.0);
    }
    // wrapping gives up the single-row preference but keeps the equal widths
    let w0 = records[0]["solution"]["satisfied_weight"].as_f64().unwrap();
    let w1 = records[1]["solution"]["satisfied_weight"].as_f64().unwrap();
    assert!(w1 < w0);
}

#[test]
fn window_is_the_default_viewport() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "demo.orc", DEMO);
    let out = orc(&["solve", "demo.orc"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v[0]["viewport"]["width"], 120.0);
    assert_eq!(v[0]["viewport"]["height"], 100.0);
}

#[test]
fn rotation_follows_the_viewport() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "rot.orc", ROTATE);
    let out = orc(&["solve", "rot.orc", "--viewport", "300x100", "--viewport", "100x300"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    let wide: Vec<_> = ["c1", "c2", "c3"].iter().map(|c| rect(&v[0], c)).collect();
    let tall: Vec<_> = ["c1", "c2", "c3"].iter().map(|c| rect(&v[1], c)).collect();
    assert!(wide.iter().all(|r| r.1 == wide[0].1) && wide[0].0 < wide[1].0 && wide[1].0 < wide[2].0);
    assert!(tall.iter().all(|r| r.0 == tall[0].0) && tall[0].1 < tall[1].1 && tall[1].1 < tall[2].1);
}

#[test]
fn optional_widgets_are_hidden_and_not_drawn() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "ribbon.orc", RIBBON);
    let out = orc(&["solve", "ribbon.orc", "--viewport", "90x20", "--svg-dir", "svg"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    let shown: Vec<&str> =
        ["r1", "r2", "r3"].into_iter().filter(|id| rect(&v[0], id).4).collect();
    assert_eq!(shown, ["r1", "r2"]);
    let svg = std::fs::read_to_string(dir.path().join("svg/ribbon-90x20.svg")).unwrap();
    assert_eq!(svg.matches("<rect").count(), 2);
    assert!(!svg.contains("id=\"r3\""));
}

#[test]
fn svg_rects_match_json_and_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "demo.orc", DEMO);
    let args = ["solve", "demo.orc", "--viewport", "60x100", "--svg-dir", "out", "--json", "out/demo.json"];
    assert_eq!(orc(&args, dir.path()).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("out/demo-60x100.svg")).unwrap();
    assert_eq!(orc(&args, dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("out/demo-60x100.svg")).unwrap(), first);

    let svg = String::from_utf8(first).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("viewBox=\"0 0 60 100\""));
    let json: Value = serde_json::from_slice(&std::fs::read(dir.path().join("out/demo.json")).unwrap()).unwrap();
    for id in ["a", "b"] {
        let (x, y, w, h, _) = rect(&json[0], id);
        let tag = format!("<rect id=\"{id}\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\"");
        assert!(svg.contains(&tag), "{tag} missing from\n{svg}");
    }
    assert_eq!(svg.matches("<rect").count(), 2);
}

#[test]
fn missing_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = orc(&["solve", "nope.orc"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot read nope.orc"));
}

#[test]
fn bad_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "demo.orc", DEMO);
    for args in [
        &["solve", "demo.orc", "--viewport", "3"][..],
        &["solve", "demo.orc", "--viewport", "0x10"],
        &["bench", "--out", "x.csv", "--ops", "shuffle"],
        &["bench", "--out", "x.csv", "--repeats", "0"],
        &["frobnicate"],
    ] {
        let out = orc(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(orc(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn syntax_error_points_at_the_token() {
    let dir = tempfile::tempdir().unwrap();
    spec(dir.path(), "bad.orc", "layout \"x\" {\n  window { width: oops; height: 10; }\n}\n");
    let out = orc(&["solve", "bad.orc"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("bad.orc:2:19: expected number"), "{err}");
    assert!(err.contains("  window { width: oops; height: 10; }"));
    let caret = err.lines().find(|l| l.trim_start().starts_with('^')).expect("caret line");
    let source = err.lines().find(|l| l.ends_with("height: 10; }")).unwrap();
    assert_eq!(caret.find('^'), source.find("oops"));
    assert_eq!(caret.trim(), "^^^^");
}

#[test]
fn infeasible_viewport_lists_conflicts() {
    let dir = tempfile::tempdir().unwrap();
    spec(
        dir.path(),
        "clash.orc",
        "layout \"c\" {\n  window { width: 100; height: 100; }\n  widget a { pref: 10x10; }\n  \
         constraint hard: a.left >= 50;\n  constraint hard: a.left <= 20;\n}\n",
    );
    let out = orc(&["solve", "clash.orc", "--viewport", "100x100"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("hard constraints conflict at 100x100: c1, c2"), "{err}");
    let v = stdout_json(&out);
    assert_eq!(v[0]["conflicts"], serde_json::json!(["c1", "c2"]));
}

#[test]
fn timeout_reports_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let ids: Vec<String> = (1..=30).map(|i| format!("w{i}")).collect();
    let mut src = String::from("layout \"big\" {\n  window { width: 200; height: 2000; }\n");
    for id in &ids {
        src += &format!("  widget {id} {{ min: 30x20; pref: 45x20; max: 60x20; }}\n");
    }
    src += &format!("  pattern hflow(items: [{}]);\n}}\n", ids.join(", "));
    spec(dir.path(), "big.orc", &src);
    let out = orc(&["solve", "big.orc", "--timeout-ms", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)[0]["solution"]["optimal"], false);
}

#[test]
fn fmt_prints_and_rewrites_canonical_text() {
    let dir = tempfile::tempdir().unwrap();
    let messy = "layout \"demo\"{window{width:120;height:100;}widget a{pref:50 x 20;}\n\
                 widget b{pref:50x20;}pattern hflow(items:[a,b],container:root);\
                 constraint soft(2):a.width==b.width;}";
    let p = spec(dir.path(), "demo.orc", messy);
    let out = orc(&["fmt", "demo.orc"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), DEMO);
    assert_eq!(std::fs::read_to_string(&p).unwrap(), messy);

    assert_eq!(orc(&["fmt", "demo.orc", "--write"], dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&p).unwrap(), DEMO);
    let before = std::fs::metadata(&p).unwrap().modified().unwrap();
    assert_eq!(orc(&["fmt", "demo.orc", "--write"], dir.path()).status.code(), Some(0));
    assert_eq!(std::fs::metadata(&p).unwrap().modified().unwrap(), before);
}

#[test]
fn bench_writes_the_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = orc(
        &["bench", "--widgets", "3,4", "--ops", "insert,resize_window", "--repeats", "2", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stderr(&out).contains("resize_window at 3 widgets is a full rebuild"));
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("op,widgets,constraints,mean_ms_fresh,mean_ms_incremental,savings_pct"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    let keys: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(keys, [("insert", "3"), ("insert", "4"), ("resize_window", "3"), ("resize_window", "4")]);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!(r[2].parse::<usize>().unwrap() > 0);
        let fresh: f64 = r[3].parse().unwrap();
        let inc: f64 = r[4].parse().unwrap();
        assert!(fresh > 0.0 && inc > 0.0);
        r[5].parse::<f64>().unwrap();
    }
    // a rebuild reports the fresh time for both columns
    assert_eq!(rows[2][3], rows[2][4]);
}
