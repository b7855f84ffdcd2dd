//! End-to-end CLI checks: exit-code contract, determinism, error reporting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fractal-chain"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    cmd.output().expect("binary runs")
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fractal-chain-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate", "x.json"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "/nonexistent/config.json"]).status.code(),
        Some(2)
    );
    let g = fixture("gasket2d-weighted.json");
    assert_eq!(
        run(&["verify", g.to_str().unwrap(), "--wat"]).status.code(),
        Some(2)
    );
}

#[test]
fn bad_masses_exit_2_with_message() {
    let dir = tmpdir("masses");
    let path = dir.join("bad.json");
    let text = fs::read_to_string(fixture("gasket2d-weighted.json")).unwrap();
    fs::write(&path, text.replace("\"1/2\",", "\"2/5\",")).unwrap();
    let out = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("sum to 1"), "stderr: {stderr}");
}

#[test]
fn verify_all_passes_on_weighted_gasket() {
    let g = fixture("gasket2d-weighted.json");
    let out = run(&["verify", g.to_str().unwrap(), "--depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for suite in ["green", "q-invariance", "theorem-bridge", "harmonic", "metric"] {
        assert!(stdout.contains(&format!("ok: suite {suite}")), "{stdout}");
    }
}

#[test]
fn corrupted_green_table_detected() {
    let g = fixture("gasket2d-weighted.json");
    let out = run(&[
        "verify",
        g.to_str().unwrap(),
        "--depth",
        "3",
        "--suite",
        "green",
        "--corrupt-green",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("counterexample"), "{stdout}");
}

#[test]
fn table_export_is_deterministic_and_exact() {
    let g = fixture("gasket2d-weighted.json");
    let dir1 = tmpdir("table1");
    let dir2 = tmpdir("table2");
    for dir in [&dir1, &dir2] {
        let out = run(&[
            "table",
            g.to_str().unwrap(),
            "--depth",
            "3",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let chain1 = fs::read(dir1.join("chain.csv")).unwrap();
    let chain2 = fs::read(dir2.join("chain.csv")).unwrap();
    assert_eq!(chain1, chain2);
    assert_eq!(
        fs::read(dir1.join("kernel.csv")).unwrap(),
        fs::read(dir2.join("kernel.csv")).unwrap()
    );

    let text = String::from_utf8(chain1).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("v,w,gap,g,q"));
    // Root row for w = "12": g = m = 1/8 under the weighted preset.
    assert!(text.lines().any(|l| l == "-,12,2,1/8,1/1"), "{text}");
    // Row count = diagonal + positive-Green pairs; every row has 5 fields.
    for line in text.lines().skip(1) {
        assert_eq!(line.split(',').count(), 5, "{line}");
    }
}

#[test]
fn render_svg_and_ppm() {
    let g = fixture("gasket2d-weighted.json");
    let dir = tmpdir("render");
    let svg_path = dir.join("g.svg");
    let out = run(&[
        "render",
        g.to_str().unwrap(),
        "--depth",
        "3",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    assert_eq!(svg.matches("<polygon").count(), 27);
    assert!(svg.contains("data-word=\"111\" data-mass=\"1/8\""));
    // Masses over one level sum to one: collect and check digit strings.
    let masses: Vec<&str> = svg
        .split("data-mass=\"")
        .skip(1)
        .map(|rest| rest.split('"').next().unwrap())
        .collect();
    assert_eq!(masses.len(), 27);
    let total: f64 = masses
        .iter()
        .map(|m| {
            let (n, d) = m.split_once('/').unwrap();
            n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-12);

    let ppm_path = dir.join("g.ppm");
    let out = run(&[
        "render",
        g.to_str().unwrap(),
        "--depth",
        "2",
        "--out",
        ppm_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let ppm = fs::read(&ppm_path).unwrap();
    assert!(ppm.starts_with(b"P6\n"));

    // Dimension 3 is refused.
    let t = fixture("tetra-uniform.json");
    let out = run(&["render", t.to_str().unwrap(), "--depth", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uniform_masses_render_flat() {
    let g = fixture("gasket2d-uniform.json");
    let dir = tmpdir("render-uniform");
    let svg_path = dir.join("u.svg");
    let out = run(&[
        "render",
        g.to_str().unwrap(),
        "--depth",
        "2",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let svg = fs::read_to_string(&svg_path).unwrap();
    for chunk in svg.split("fill-opacity=\"").skip(1) {
        let value = chunk.split('"').next().unwrap();
        assert_eq!(value, "1.000000");
    }
}

#[test]
fn simulate_deterministic_under_seed() {
    let g = fixture("gasket2d-weighted.json");
    let args = [
        "simulate",
        g.to_str().unwrap(),
        "--depth",
        "2",
        "--paths",
        "5000",
        "--seed",
        "9",
        "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(parsed["paths"], 5000);
    assert_eq!(parsed["words"].as_array().unwrap().len(), 9);
}

#[test]
fn simulate_depth_zero_stays_at_root() {
    let g = fixture("gasket2d-weighted.json");
    let out = run(&[
        "simulate",
        g.to_str().unwrap(),
        "--depth",
        "0",
        "--paths",
        "10",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let words = parsed["words"].as_array().unwrap();
    assert_eq!(words.len(), 1);
    assert_eq!(words[0]["word"], "-");
    assert_eq!(words[0]["frequency"], 1.0);
}

#[test]
fn audit_json_is_machine_readable() {
    let c = fixture("carpet-geometric-uniform.json");
    let out = run(&[
        "audit",
        c.to_str().unwrap(),
        "--depth",
        "2",
        "--check",
        "transitivity",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["transitivity"]["pass"], false);
    assert!(parsed["transitivity"]["violation_count"].as_u64().unwrap() >= 1);
    let first = &parsed["transitivity"]["violations"][0];
    assert_eq!(first.as_array().unwrap().len(), 3);
}

#[test]
fn nested_audit_refuses_tolerance_mode() {
    let dir = tmpdir("tolerance");
    let path = dir.join("float.json");
    fs::write(
        &path,
        r#"{
            "name": "float-pair",
            "dimension": 2,
            "N": 2,
            "arithmetic": {"tolerance": 1e-9},
            "maps": [
                {"ratio": 0.5, "fixed_point": [0.0, 0.0]},
                {"ratio": 0.5, "fixed_point": [1.0, 0.0]}
            ],
            "masses": ["1/2", "1/2"]
        }"#,
    )
    .unwrap();
    let out = run(&["audit", path.to_str().unwrap(), "--check", "nested"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exact mode required"), "{stderr}");
}

#[test]
fn boundary_reports_fixture_pairs() {
    let g = fixture("gasket2d-weighted.json");
    let pairs = fixture("gasket-pairs.txt");
    let out = run(&[
        "boundary",
        g.to_str().unwrap(),
        "--pairs",
        pairs.to_str().unwrap(),
        "--depths",
        "4,6",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = parsed["pairs"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    let glued = &entries[0];
    assert_eq!(glued["left"], "1(2)");
    assert_eq!(glued["n0"], 2);
    assert_eq!(glued["address_distance"], 0.0);
    assert_eq!(glued["addresses_equal_exact"], true);

    // Malformed pairs exit 2.
    let dir = tmpdir("pairs");
    let bad = dir.join("bad.txt");
    fs::write(&bad, "1(2 2(1)\n").unwrap();
    let out = run(&[
        "boundary",
        g.to_str().unwrap(),
        "--pairs",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let empty = dir.join("empty.txt");
    fs::write(&empty, "# nothing here\n").unwrap();
    let out = run(&[
        "boundary",
        g.to_str().unwrap(),
        "--pairs",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fixture_configs_match_programmatic_fixtures() {
    // The shipped carpet rules JSON and the library's rule set agree.
    let text = fs::read_to_string(fixture("carpet-extended-weighted.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rules = parsed["equivalence"]["rules"].as_array().unwrap();
    let expected = fractal_chain::fixtures::carpet_extended_rules().unwrap();
    assert_eq!(rules.len(), expected.pairs().len());
    for (entry, (a, b)) in rules.iter().zip(expected.pairs()) {
        assert_eq!(entry[0].as_str().unwrap(), a.render(8));
        assert_eq!(entry[1].as_str().unwrap(), b.render(8));
    }
    // Weighted carpet masses sum to one and match the figure weights.
    let masses = parsed["masses"].as_array().unwrap();
    let expected = fractal_chain::fixtures::carpet_weighted_masses();
    for (m, e) in masses.iter().zip(&expected) {
        assert_eq!(m.as_str().unwrap(), fractal_chain::rat::format(e));
    }
}
