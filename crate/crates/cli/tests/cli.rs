use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ltlpn::milp::parse_lp;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn ltlpn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltlpn")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Plans the office fixture into `dir` and returns the plan path.
fn office_plan(dir: &TempDir, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.path().join("plan.json");
    let (env, aut) = (fixture("office.cells"), fixture("office.buchi"));
    let mut args = vec!["plan", "--env", s(&env), "--automaton", s(&aut), "--out", s(&out)];
    args.extend_from_slice(extra);
    (ltlpn(&args), out)
}

fn polylines(svg: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| n.attribute("stroke").unwrap().to_string())
        .collect()
}

#[test]
fn plan_prints_counts_and_writes_a_plan() {
    let dir = TempDir::new().unwrap();
    let (o, plan) = office_plan(&dir, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("quotient   5 places, 10 transitions"), "{text}");
    assert!(text.contains("composed   14 places, 17 transitions"), "{text}");
    assert!(fs::read_to_string(plan).unwrap().contains("\"trajectories\""));
}

#[test]
fn normalized_plans_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (oa, pa) = office_plan(&a, &["--normalize-timings"]);
    let (ob, pb) = office_plan(&b, &["--normalize-timings"]);
    assert!(oa.status.success() && ob.status.success());
    let (ta, tb) = (fs::read(pa).unwrap(), fs::read(pb).unwrap());
    assert_eq!(ta, tb);
    assert!(!String::from_utf8(ta).unwrap().contains("timings"));
}

#[test]
fn verify_accepts_and_rejects() {
    let dir = TempDir::new().unwrap();
    let (_, plan) = office_plan(&dir, &[]);
    let (env, aut) = (fixture("office.cells"), fixture("office.buchi"));
    let o = ltlpn(&["verify", "--env", s(&env), "--automaton", s(&aut), "--plan", s(&plan)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = fs::read_to_string(&plan).unwrap().replacen("\"final_state\": \"s3\"", "\"final_state\": \"s2\"", 1);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, text).unwrap();
    let o = ltlpn(&["verify", "--env", s(&env), "--automaton", s(&aut), "--plan", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("plan rejected"));
}

#[test]
fn infeasible_mission_exits_with_two() {
    let (env, aut) = (fixture("disjoint3.grid"), fixture("all_three.buchi"));
    let o = ltlpn(&["plan", "--env", s(&env), "--automaton", s(&aut)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("the formula cannot be achieved"));
}

#[test]
fn bad_input_exits_with_one() {
    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.grid");
    fs::write(&broken, "grid 2 1 1\n. ?\n").unwrap();
    let aut = fixture("top.buchi");
    let o = ltlpn(&["plan", "--env", s(&broken), "--automaton", s(&aut)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    let o = ltlpn(&["plan", "--env", "/nonexistent.grid", "--automaton", s(&aut)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn export_lp_stages() {
    let (env, aut) = (fixture("office.cells"), fixture("office.buchi"));
    let dir = TempDir::new().unwrap();
    let lp = dir.path().join("prefix.lp");
    let o = ltlpn(&["export-lp", "--env", s(&env), "--automaton", s(&aut), "--stage", "prefix", "--out", s(&lp)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = parse_lp(&fs::read_to_string(&lp).unwrap()).unwrap();
    // 2k steps of (14 places + 17 transitions) at k = 4
    assert_eq!(model.variable_count(), 8 * 31);

    let o = ltlpn(&["export-lp", "--env", s(&env), "--automaton", s(&aut), "--stage", "projection"]);
    assert!(o.status.success());
    assert_eq!(parse_lp(&stdout(&o)).unwrap().variable_count(), 1500);

    let o = ltlpn(&["export-lp", "--env", s(&env), "--automaton", s(&aut), "--stage", "suffix"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("self-loop"));
}

#[test]
fn render_plan_and_environment() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("plan.svg");
    let (o, plan) = office_plan(&dir, &["--svg", s(&svg)]);
    assert!(o.status.success());
    assert_eq!(polylines(&fs::read_to_string(&svg).unwrap()).len(), 2);

    let env = fixture("office.cells");
    let o = ltlpn(&["render", "--env", s(&env), "--plan", s(&plan)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(polylines(&stdout(&o)).len(), 2);

    let o = ltlpn(&["render", "--env", s(&env)]);
    assert!(o.status.success());
    assert!(polylines(&stdout(&o)).is_empty());

    // a plan from another environment is refused
    let other = fixture("disjoint3.grid");
    let o = ltlpn(&["render", "--env", s(&other), "--plan", s(&plan)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn six_robots_get_six_colors() {
    let dir = TempDir::new().unwrap();
    let env = dir.path().join("six.grid");
    fs::write(&env, "grid 4 2 6\n.@r1 .@r2 .@r3 y1\n.@r4 .@r5 .@r6 .\n").unwrap();
    let aut = fixture("top.buchi");
    let (plan, svg) = (dir.path().join("plan.json"), dir.path().join("six.svg"));
    let o = ltlpn(&["plan", "--env", s(&env), "--automaton", s(&aut), "--out", s(&plan), "--svg", s(&svg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(" 0 moves"), "{}", stdout(&o));
    let colors = polylines(&fs::read_to_string(&svg).unwrap());
    assert_eq!(colors.len(), 6);
    assert_eq!(colors.iter().collect::<BTreeSet<_>>().len(), 6);
}
