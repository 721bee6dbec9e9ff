//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
#[path = "../../core/tests/common/mod.rs"]
mod common;
#[path = "../../core/tests/common/docs.rs"]
mod docs;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use orc_core::solver::{brute_force_solve_with_limits, OracleLimits};
use orc_core::{
    compile, lang, solve, Container, FixedRect, LayoutProblem, Pattern, PatternInstance, Rect, SolveError, Solution,
    SolutionView, Viewport, Widget,
};
use orc_service::{router, AppState, Config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

fn lowered(src: &str, vp: Viewport) -> LayoutProblem {
    let doc = lang::parse(src).unwrap_or_else(|d| panic!("{d:?}"));
    lang::lower(&doc, Some(vp)).expect("spec lowers").problem
}

fn solved(p: &LayoutProblem) -> Solution {
    let s = solve(p, None).expect("feasible");
    assert!(s.optimal);
    s
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn flow_spec(n: usize, w: f64, h: f64) -> String {
    let items = ids("w", n);
    let mut s = String::from("layout \"flow\" {\n  window { width: 100; height: 100; }\n");
    for id in &items {
        s += &format!("  widget {id} {{ min: {w}x{h}; pref: {w}x{h}; max: {w}x{h}; }}\n");
    }
    s + &format!("  pattern hflow(items: [{}]);\n}}\n", items.join(", "))
}

/// Distinct row tops and how many widgets share each, top to bottom.
fn rows(s: &Solution, items: &[String]) -> Vec<(f64, usize)> {
    let mut tops: Vec<(f64, usize)> = Vec::new();
    for id in items {
        let t = s.rect(id).unwrap().top;
        match tops.iter_mut().find(|(x, _)| (*x - t).abs() < 1e-6) {
            Some((_, n)) => *n += 1,
            None => tops.push((t, 1)),
        }
    }
    tops.sort_by(|a, b| a.0.total_cmp(&b.0));
    tops
}

fn oracle_equivalence() -> Check {
    let limits = OracleLimits { max_branches: 24, max_soft: 16 };
    let t = Instant::now();
    let mut infeasible = 0;
    for seed in 0..200u64 {
        let p = common::random_problem(seed);
        match (solve(&p, None), brute_force_solve_with_limits(&p, limits)) {
            (Ok(a), Ok(b)) => {
                ensure(a.satisfied_weight == b.satisfied_weight, || {
                    format!("seed {seed}: weight {} vs oracle {}", a.satisfied_weight, b.satisfied_weight)
                })?;
                ensure(a.branch_choices == b.branch_choices, || format!("seed {seed}: branch choices differ"))?;
            }
            (Err(SolveError::HardInfeasible(_)), Err(SolveError::HardInfeasible(_))) => infeasible += 1,
            (a, b) => return Err(format!("seed {seed}: solver {a:?} vs oracle {b:?}")),
        }
    }
    let took = t.elapsed();
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("200 problems ({infeasible} infeasible) in {took:.2?}"))
}

fn flow_golden() -> Check {
    let items = ids("w", 3);
    let s = solved(&lowered(&flow_spec(3, 50.0, 20.0), Viewport::new(120.0, 100.0)));
    let got: Vec<(f64, f64)> = items.iter().map(|id| s.rect(id).map(|r| (r.left, r.top)).unwrap()).collect();
    ensure(got == [(0.0, 0.0), (50.0, 0.0), (0.0, 20.0)], || format!("positions {got:?}"))?;
    for n in [3, 7] {
        let items = ids("w", n);
        for width in (100..=300).step_by(10) {
            let width = width as f64;
            let s = solved(&lowered(&flow_spec(n, 50.0, 20.0), Viewport::new(width, 400.0)));
            let per_row = (width / 50.0).floor() as usize;
            let expected = n.div_ceil(per_row);
            let r = rows(&s, &items);
            ensure(r.len() == expected, || format!("{n} widgets at {width}: {} rows, expected {expected}", r.len()))?;
            ensure(r.iter().all(|&(_, k)| k <= per_row), || format!("{n} widgets at {width}: row over {per_row}"))?;
        }
    }
    Ok("3 widgets at 120 wrap the third; widths 100..300 match floor row counts".into())
}

const ROTATE: &str = r#"layout "rot" {
  window { width: 300; height: 100; }
  widget g { min: 0x0; max: 1000x1000; }
  widget c1 { pref: 40x30; min: 40x30; max: 40x30; }
  widget c2 { pref: 40x30; min: 40x30; max: 40x30; }
  widget c3 { pref: 40x30; min: 40x30; max: 40x30; }
  pattern rotate_group(group: g, children: [c1, c2, c3]);
}
"#;

fn rotation() -> Check {
    let key = "pattern1.rotate_group.rotate";
    let wide = solved(&lowered(ROTATE, Viewport::new(300.0, 100.0)));
    let tall = solved(&lowered(ROTATE, Viewport::new(100.0, 300.0)));
    ensure(wide.branch_choices.get(key) == Some(&0), || format!("300x100 chose {:?}", wide.branch_choices.get(key)))?;
    ensure(tall.branch_choices.get(key) == Some(&1), || format!("100x300 chose {:?}", tall.branch_choices.get(key)))?;
    let g = wide.rect("g").unwrap();
    ensure((g.width, g.height) == (120.0, 30.0), || format!("horizontal group {g:?}"))?;
    let g = tall.rect("g").unwrap();
    ensure((g.width, g.height) == (40.0, 90.0), || format!("vertical group {g:?}"))?;
    Ok("horizontal at 300x100, vertical at 100x300".into())
}

fn balanced_flow() -> Check {
    let items = ids("b", 6);
    let mut spec = String::from("layout \"bal\" {\n  window { width: 100; height: 400; }\n");
    for id in &items {
        spec += &format!("  widget {id} {{ min: 40x20; pref: 40x20; max: 40x20; }}\n");
    }
    spec += &format!("  pattern balanced(items: [{}]);\n}}\n", items.join(", "));
    let allowed = [1, 2, 3, 6];
    let mut seen = BTreeSet::new();
    for width in (50..=400).step_by(10) {
        let s = solved(&lowered(&spec, Viewport::new(width as f64, 400.0)));
        let sizes: Vec<usize> = rows(&s, &items).into_iter().map(|(_, k)| k).collect();
        ensure(sizes.iter().all(|k| allowed.contains(k)), || format!("width {width}: rows {sizes:?}"))?;
        ensure(sizes.iter().all(|&k| k == sizes[0]), || format!("width {width}: uneven rows {sizes:?}"))?;
        seen.insert(sizes[0]);
    }
    Ok(format!("36 widths, row sizes used {seen:?}"))
}

fn ribbon_spec() -> String {
    let prios = ["high", "medium", "low", "medium", "low"];
    let mut s = String::from("layout \"ribbon\" {\n  window { width: 400; height: 20; }\n");
    for (i, p) in prios.iter().enumerate() {
        s += &format!("  widget r{} {{ min: 40x20; pref: 40x20; max: 40x20; priority: {p}; }}\n", i + 1);
    }
    s += "  pattern hflow(items: [r1, r2, r3, r4, r5]);\n";
    for i in 1..=5 {
        s += &format!("  pattern optional(widget: r{i});\n");
    }
    s + "}\n"
}

fn shown(s: &Solution) -> BTreeSet<String> {
    ids("r", 5).into_iter().filter(|id| s.rect(id).unwrap().is_visible()).collect()
}

fn optional_ribbon() -> Check {
    let spec = ribbon_spec();
    let at = |w: f64| shown(&solved(&lowered(&spec, Viewport::new(w, 20.0))));
    let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    ensure(at(400.0) == set(&["r1", "r2", "r3", "r4", "r5"]), || format!("large: {:?}", at(400.0)))?;
    ensure(at(130.0) == set(&["r1", "r2", "r4"]), || format!("medium: {:?}", at(130.0)))?;
    ensure(at(50.0) == set(&["r1"]), || format!("small: {:?}", at(50.0)))?;
    let mut prev = BTreeSet::new();
    for k in 0..30 {
        let w = 40.0 + 10.0 * k as f64;
        let now = at(w);
        ensure(prev.is_subset(&now), || format!("width {w}: {now:?} drops some of {prev:?}"))?;
        prev = now;
    }
    Ok("all / high+medium / high at 400 / 130 / 50; monotone over 30 widths".into())
}

fn flow_around(n: usize, fixed: FixedRect, vp: Viewport) -> LayoutProblem {
    let items = ids("f", n);
    let widgets: Vec<Widget> = items.iter().map(|i| Widget::fixed(i.clone(), 40.0, 20.0)).collect();
    let inst = vec![PatternInstance::new("p", Pattern::FlowAround { items, fixed, container: Container::Root })];
    compile(&inst, widgets, vp).expect("flow-around compiles")
}

fn flow_around_check() -> Check {
    let f = FixedRect::new(80.0, 10.0, 40.0, 30.0);
    let p = flow_around(4, f, Viewport::new(160.0, 100.0));
    let s = solved(&p);
    let b = brute_force_solve_with_limits(&p, OracleLimits { max_branches: 1000, max_soft: 16 })
        .map_err(|e| format!("oracle: {e}"))?;
    ensure(s.satisfied_weight == b.satisfied_weight, || format!("weight {} vs {}", s.satisfied_weight, b.satisfied_weight))?;
    ensure(s.assignment == b.assignment, || "4-widget geometry differs from brute force".into())?;

    let (vw, vh) = (300.0, 200.0);
    let f = FixedRect::new(100.0, 30.0, 100.0, 40.0);
    let s = solved(&flow_around(10, f, Viewport::new(vw, vh)));
    let fixed = Rect { left: f.left, top: f.top, width: f.width, height: f.height };
    let rects: Vec<(String, Rect)> = ids("f", 10).into_iter().map(|id| (id.clone(), s.rect(&id).unwrap())).collect();
    for (i, (a_id, a)) in rects.iter().enumerate() {
        let inside = a.left >= -1e-6 && a.top >= -1e-6 && a.right() <= vw + 1e-6 && a.bottom() <= vh + 1e-6;
        ensure(inside, || format!("{a_id} leaves the container"))?;
        ensure(!a.overlaps(&fixed), || format!("{a_id} overlaps the fixed area"))?;
        for (b_id, b) in &rects[i + 1..] {
            ensure(!a.overlaps(b), || format!("{a_id} overlaps {b_id}"))?;
        }
    }
    Ok("4 widgets match brute force; 10 widgets disjoint and contained".into())
}

fn orc(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_orc")).args(args).current_dir(dir).output().expect("orc runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).expect("bench csv");
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn bench() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let all = orc(&["bench", "--ops", "insert,delete,move,resize,resize_window", "--repeats", "3", "--out", "all.csv"], dir.path());
    ensure(all.status.success(), || String::from_utf8_lossy(&all.stderr).into_owned())?;
    let mut slowest = 0.0f64;
    for r in csv_rows(&dir.path().join("all.csv")) {
        let constraints: usize = r[2].parse().unwrap();
        let fresh: f64 = r[3].parse().unwrap();
        if constraints <= 175 {
            ensure(fresh < 1000.0, || format!("{} at {} widgets: fresh {fresh} ms", r[0], r[1]))?;
            slowest = slowest.max(fresh);
        }
    }
    let edits = orc(&["bench", "--widgets", "5,20", "--ops", "insert,delete,move", "--repeats", "100", "--out", "edits.csv"], dir.path());
    ensure(edits.status.success(), || String::from_utf8_lossy(&edits.stderr).into_owned())?;
    let mut least = f64::INFINITY;
    for r in csv_rows(&dir.path().join("edits.csv")) {
        let savings: f64 = r[5].parse().unwrap();
        ensure(savings > 0.0, || format!("{} at {} widgets: savings {savings}%", r[0], r[1]))?;
        least = least.min(savings);
    }
    Ok(format!("slowest fresh {slowest:.2} ms; smallest edit saving {least:.2}%"))
}

fn parser_fuzz() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for i in 0..500 {
        let doc = docs::random_document(&mut rng);
        let text = lang::print(&doc);
        let back = lang::parse(&text).map_err(|d| format!("doc {i} does not reparse: {d:?}\n{text}"))?;
        ensure(lang::print(&back) == text, || format!("doc {i} prints differently"))?;
        ensure(back.without_spans() == doc, || format!("doc {i} changed after round trip\n{text}"))?;
    }
    let start = Instant::now();
    let mut inputs = 0;
    while start.elapsed() < Duration::from_secs(1) {
        let bytes: Vec<u8> = if inputs % 2 == 0 {
            (0..65536).map(|_| rng.gen()).collect()
        } else {
            // printable noise drawn from the language's own alphabet goes deeper
            let text = lang::print(&docs::random_document(&mut rng)).into_bytes();
            (0..65536).map(|_| if rng.gen_bool(0.9) { text[rng.gen_range(0..text.len())] } else { rng.gen() }).collect()
        };
        let src = String::from_utf8_lossy(&bytes).into_owned();
        let t = Instant::now();
        catch_unwind(|| {
            if let Ok(doc) = lang::parse(&src) {
                let _ = lang::lower(&doc, Some(Viewport::new(100.0, 100.0)));
            }
        })
        .map_err(|_| format!("parser panicked on input {inputs}"))?;
        ensure(t.elapsed() < Duration::from_secs(1), || format!("input {inputs} took {:?}", t.elapsed()))?;
        inputs += 1;
    }
    Ok(format!("500 documents round-trip; {inputs} 64 KiB inputs parsed without panic"))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.body(body.map_or(Body::empty(), |b| Body::from(b.to_string()))).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() })
}

fn random_edit(rng: &mut ChaCha8Rng, live: &mut Vec<String>, next: &mut usize) -> Value {
    let pick = |rng: &mut ChaCha8Rng, live: &[String]| live[rng.gen_range(0..live.len())].clone();
    let size = |rng: &mut ChaCha8Rng| 10.0 * rng.gen_range(3..=8) as f64;
    match rng.gen_range(0..7) {
        0 if live.len() < 7 => {
            *next += 1;
            let id = format!("w{next}");
            live.push(id.clone());
            let (w, h) = (size(rng), 20.0);
            json!({"type": "insert_widget", "id": id, "pref": [w, h], "pattern": "pattern1.hflow"})
        }
        1 if live.len() > 2 => {
            let id = pick(rng, live);
            live.retain(|x| *x != id);
            json!({"type": "delete_widget", "id": id})
        }
        2 => json!({"type": "move_widget", "id": pick(rng, live), "left": size(rng), "top": 20.0 * rng.gen_range(0..3) as f64}),
        3 => json!({"type": "resize_widget", "id": pick(rng, live), "width": size(rng), "height": 20.0}),
        4 => json!({"type": "set_viewport", "width": 10.0 * rng.gen_range(8..=30) as f64, "height": 200.0}),
        5 => {
            let (a, b) = (pick(rng, live), pick(rng, live));
            json!({"type": "add_constraint", "constraint": format!("constraint soft(1): {a}.width == {b}.width;")})
        }
        _ => json!({"type": "set_viewport", "width": 10.0 * rng.gen_range(8..=30) as f64, "height": 150.0}),
    }
}

fn untimed(v: &Value) -> SolutionView {
    serde_json::from_value::<SolutionView>(v.clone()).expect("solution view").untimed()
}

fn cli_view(dir: &Path, spec: &str, vp: Option<(f64, f64)>) -> Result<SolutionView, String> {
    std::fs::write(dir.join("s.orc"), spec).unwrap();
    let mut args = vec!["solve".to_string(), "s.orc".into()];
    if let Some((w, h)) = vp {
        args.extend(["--viewport".into(), format!("{w}x{h}")]);
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = orc(&args, dir);
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok(untimed(&v[0]["solution"]))
}

async fn session_script(seed: u64, dir: &Path) -> Result<usize, String> {
    let app = router(AppState::new(Config::default()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=4);
    let mut live = ids("w", n);
    let mut next = n;
    let mut spec = String::from("layout \"s\" {\n  window { width: 160; height: 200; }\n");
    for id in &live {
        spec += &format!("  widget {id} {{ pref: 50x20; }}\n");
    }
    spec += &format!("  pattern hflow(items: [{}]);\n}}\n", live.join(", "));
    let (status, v) = call(&app, "POST", "/v1/sessions", Some(json!({ "spec": spec }))).await;
    ensure(status == StatusCode::CREATED, || format!("create: {status} {v}"))?;
    let id = v["id"].as_str().unwrap().to_string();
    let mut rev = 0;
    let mut applied = 0;
    for _ in 0..8 {
        let before = live.clone();
        let edit = random_edit(&mut rng, &mut live, &mut next);
        let (status, v) = call(
            &app,
            "POST",
            &format!("/v1/sessions/{id}/edits"),
            Some(json!({"expected_revision": rev, "edit": edit})),
        )
        .await;
        if status == StatusCode::OK {
            rev = v["revision"].as_u64().unwrap();
            applied += 1;
        } else {
            live = before;
        }
    }
    let (_, canon) = call(&app, "GET", &format!("/v1/sessions/{id}/spec"), None).await;
    let canon = canon["spec"].as_str().unwrap().to_string();
    let (_, current) = call(&app, "GET", &format!("/v1/sessions/{id}/solution"), None).await;
    let want = cli_view(dir, &canon, None)?;
    ensure(untimed(&current["solution"]) == want, || format!("seed {seed}: current solution differs\n{canon}"))?;
    let (w, h) = (10.0 * rng.gen_range(8..=30) as f64, 120.0);
    let (_, what_if) = call(&app, "GET", &format!("/v1/sessions/{id}/solution?width={w}&height={h}"), None).await;
    let want = cli_view(dir, &canon, Some((w, h)))?;
    ensure(untimed(&what_if["solution"]) == want, || format!("seed {seed}: {w}x{h} differs\n{canon}"))?;
    Ok(applied)
}

fn service_matches_cli() -> Check {
    let dir = tempfile::tempdir().unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let mut applied = 0;
    for seed in 0..20 {
        applied += rt.block_on(session_script(seed, dir.path()))?;
    }
    Ok(format!("20 sessions, {applied} accepted edits, two viewports each"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("flow golden", flow_golden),
        ("rotation", rotation),
        ("balanced flow", balanced_flow),
        ("optional ribbon", optional_ribbon),
        ("flow around", flow_around_check),
        ("bench", bench),
        ("parser fuzz", parser_fuzz),
        ("service matches cli", service_matches_cli),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
