use std::process::{Command, Output};

use serde_json::Value;

fn dicube(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicube")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

struct Scratch(std::path::PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let d = std::env::temp_dir().join(format!("dicube-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        Scratch(d)
    }
    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

#[test]
fn twice_subdivided_interval_has_five_vertices() {
    let s = Scratch::new("sd");
    let (i, sd) = (s.path("i.json"), s.path("sd.json"));
    assert!(dicube(&["generate", "interval", "0", "-o", &i]).status.success());
    assert!(dicube(&["subdivide", &i, "--times", "2", "-o", &sd]).status.success());
    let info = stdout_json(&dicube(&["info", &sd]));
    assert_eq!(info["cells"], serde_json::json!([5, 4]));
}

#[test]
fn annulus_corner_dipaths_form_two_classes() {
    let s = Scratch::new("classes");
    let a = s.path("a.json");
    assert!(dicube(&["generate", "annulus", "-o", &a]).status.success());
    let out = dicube(&["classes", &a, "--from", "0", "--to", "15", "--len", "6"]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["classes"], 2);
    let tri = stdout_json(&dicube(&["classes", &a, "--from", "0", "--to", "15", "--len", "6", "--via", "tri"]));
    assert_eq!(tri["classes"], 2);
}

#[test]
fn verify_all_passes() {
    let out = dicube(&["verify", "all"]);
    let report = stdout_json(&out);
    assert_eq!(out.status.code(), Some(0), "{report}");
    assert_eq!(report["pass"], true);
    assert_eq!(report["failed"], 0);
}

#[test]
fn failing_suite_exits_with_one() {
    let out = dicube(&["verify", "ex_representables"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["pass"], false);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [vec!["frobnicate"], vec!["verify", "no_such_suite"], vec!["info", "/no/such/file.json"], vec!["subdivide", "--times", "x"]] {
        let out = dicube(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).expect("error is JSON");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let s = Scratch::new("malformed");
    let f = s.path("bad.json");
    std::fs::write(&f, r#"{"cells":[2,1],"faces":[[[[0,0],[0,7]]]],"site":"cube"}"#).unwrap();
    let err: Value = serde_json::from_slice(&dicube(&["info", &f]).stderr).unwrap();
    assert_eq!(err["error"], "invalid", "{err}");
    assert!(err["message"].as_str().unwrap().contains("(1,0)"));
}

#[test]
fn output_depends_only_on_the_seed() {
    let run = |seed: &str| dicube(&["--seed", seed, "generate", "random-dipath"]).stdout;
    assert_eq!(run("5"), run("5"));
    assert_ne!(run("5"), run("6"));
    let lattice = |seed: &str| dicube(&["--seed", seed, "verify", "lattice"]).stdout;
    assert_eq!(lattice("2"), lattice("2"));
}

#[test]
fn every_written_file_reads_back() {
    let s = Scratch::new("closure");
    let (a, t, q, pl, src) = (s.path("a.json"), s.path("t.json"), s.path("q.json"), s.path("pl.json"), s.path("src.json"));
    assert!(dicube(&["generate", "annulus", "-o", &a]).status.success());
    assert!(dicube(&["tri", &a, "-o", &t]).status.success());
    assert!(dicube(&["qua", &t, "--max-dim", "2", "-o", &q]).status.success());
    for f in [&a, &t, &q] {
        let again = dicube(&["subdivide", f, "--times", "0"]);
        assert_eq!(again.stdout, std::fs::read(f).unwrap());
    }
    assert!(dicube(&["--seed", "4", "generate", "random-dipath", "-o", &pl]).status.success());
    let approx = stdout_json(&dicube(&["approximate", &pl]));
    assert!(approx["depth"].as_u64().unwrap() <= 1);
    assert!(dicube(&["generate", "pair-dipath", "--from", "0", "--to", "15", "--len", "6", "--side", "source", "-o", &src]).status.success());
    assert!(std::fs::read_to_string(&src).unwrap().contains("\"pair\""));
}

#[test]
fn probing_the_collapse_of_the_interval() {
    let s = Scratch::new("probe");
    let (i, pt, map) = (s.path("i.json"), s.path("pt.json"), s.path("map.json"));
    assert!(dicube(&["generate", "representable", "1", "-o", &i]).status.success());
    assert!(dicube(&["generate", "representable", "0", "-o", &pt]).status.success());
    std::fs::write(&map, "[[[0,0],[0,0]],[[0,0,1]]]").unwrap();
    let r0 = stdout_json(&dicube(&["probe-equivalence", &i, &pt, &map]));
    assert_eq!(r0["bijective_on_all_probes"], false);
    assert_eq!(r0["probes"][1]["source_classes"], 2);
    let r1 = stdout_json(&dicube(&["probe-equivalence", &i, &pt, &map, "--depth", "1"]));
    assert_eq!(r1["bijective_on_all_probes"], true);
}

#[test]
fn hom_counts_interval_self_maps() {
    let s = Scratch::new("hom");
    let i = s.path("i.json");
    assert!(dicube(&["generate", "representable", "1", "-o", &i]).status.success());
    assert_eq!(stdout_json(&dicube(&["hom", &i, &i]))["count"], 3);
    let t = stdout_json(&dicube(&["tensor", &i, &i]));
    assert_eq!(t["cells"], serde_json::json!([4, 4, 1]));
}
