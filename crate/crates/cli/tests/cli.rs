use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use b3m_core::frontier::{read_frontier_csv, read_stats_csv, Tolerance};
use b3m_core::{
    build_charging_program, lexmin, ChargingInstance, CriterionPoint, Objective, ObjectiveBox, SolverConfig,
};
use tempfile::TempDir;

fn b3m(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_b3m"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = b3m(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn desk_instance(dir: &Path, seed: &str) -> PathBuf {
    ok(&[
        "generate",
        "--desk",
        "--n-evs",
        "3",
        "--n-chargers",
        "2",
        "--seed",
        seed,
        "--out-dir",
        s(dir),
    ]);
    dir.join(format!("UniEV-UniChar-3-2-seed{seed}.json"))
}

#[test]
fn generate_names_the_instance_after_the_case() {
    let dir = TempDir::new().unwrap();
    ok(&[
        "generate",
        "--ev-dist",
        "uniform",
        "--charger-layout",
        "uniform",
        "--n-evs",
        "10",
        "--n-chargers",
        "5",
        "--seed",
        "7",
        "--out-dir",
        s(dir.path()),
    ]);
    let path = dir.path().join("UniEV-UniChar-10-5-seed7.json");
    let inst = ChargingInstance::from_json(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!((inst.evs.len(), inst.chargers.len()), (10, 5));
    let manifest: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("UniEV-UniChar-10-5-seed7.generate.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn frontier_writes_stats_with_the_requested_epsilon() {
    let dir = TempDir::new().unwrap();
    let inst = desk_instance(dir.path(), "2");
    ok(&["frontier", "--instance", s(&inst), "--method", "b3m2", "--epsilon", "3"]);
    let file =
        |suffix: &str| fs::File::open(dir.path().join(format!("UniEV-UniChar-3-2-seed2.b3m2-eps3.{suffix}"))).unwrap();
    let stats = read_stats_csv(file("stats.csv")).unwrap();
    assert_eq!(stats.len(), 1);
    assert_eq!(stats[0].epsilon, "3".parse::<Tolerance>().unwrap());
    // re-parsing checks the ordering invariant
    let rows = read_frontier_csv(file("frontier.csv")).unwrap();
    assert_eq!(rows.len(), stats[0].ndp);
}

#[test]
fn bargain_tie_resolves_to_smallest_z1() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("two.frontier.csv");
    fs::write(
        &csv,
        "method,epsilon,index,z1,z2,assignment_ref\nbbox,0,0,4,8,bbox:0:0\nbbox,0,1,8,4,bbox:0:1\n",
    )
    .unwrap();
    let out = ok(&[
        "bargain",
        "--frontier",
        s(&csv),
        "--disagreement",
        "10,10",
        "--mode",
        "gnb",
        "--pi",
        "0.5",
    ]);
    assert!(out.contains("selected (4, 8)"), "{out}");
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("two.bargain-gnb.json")).unwrap()).unwrap();
    assert_eq!(doc["point"], serde_json::json!({"z1": 4, "z2": 8}));
    assert_eq!(doc["assignment_ref"], "bbox:0:0");
}

#[test]
fn distance_mode_needs_an_ideal_point() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("two.frontier.csv");
    fs::write(
        &csv,
        "method,epsilon,index,z1,z2,assignment_ref\nbbox,0,0,2,8,bbox:0:0\nbbox,0,1,4,4,bbox:0:1\n",
    )
    .unwrap();
    let base = [
        "bargain",
        "--frontier",
        s(&csv),
        "--disagreement",
        "10,10",
        "--mode",
        "dist",
        "--alpha",
        "inf",
    ];
    assert_eq!(b3m(&base).status.code(), Some(2));
    let mut with_ideal = base.to_vec();
    with_ideal.extend(["--ideal", "0,0"]);
    assert!(ok(&with_ideal).contains("selected (4, 4)"));
}

#[test]
fn bargain_before_frontier_names_the_missing_artifact() {
    let dir = TempDir::new().unwrap();
    let inst = desk_instance(dir.path(), "2");
    let missing = dir.path().join("UniEV-UniChar-3-2-seed2.bbox-eps0.frontier.csv");
    let out = b3m(&[
        "bargain",
        "--frontier",
        s(&missing),
        "--instance",
        s(&inst),
        "--mode",
        "gnb",
        "--pi",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("missing artifact") && err.contains("bbox-eps0.frontier.csv"),
        "{err}"
    );
}

#[test]
fn usage_errors_exit_with_two() {
    let out = b3m(&["frontier", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"));
    assert_eq!(b3m(&["launch"]).status.code(), Some(2));
    assert_eq!(
        b3m(&["bargain", "--frontier", "x.csv", "--mode", "gnb"]).status.code(),
        Some(2)
    );
    assert_eq!(
        b3m(&["frontier", "--instance", "x.json", "--method", "b3m3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn invalid_pi_is_a_usage_error() {
    let out = b3m(&[
        "bargain",
        "--frontier",
        "x.csv",
        "--disagreement",
        "1,1",
        "--mode",
        "gnb",
        "--pi",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let inst = desk_instance(dir, "5");
    for m in ["bbox", "b3m1", "b3m2"] {
        ok(&["frontier", "--instance", s(&inst), "--method", m, "--epsilon", "3"]);
    }
    let front = dir.join("UniEV-UniChar-3-2-seed5.bbox-eps0.frontier.csv");
    ok(&[
        "bargain",
        "--frontier",
        s(&front),
        "--instance",
        s(&inst),
        "--mode",
        "gnb",
        "--pi",
        "0.5",
    ]);
    ok(&["oracle", "--instance", s(&inst)]);
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            !name.contains("manifest") && !name.ends_with("stats.csv")
        })
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn pipeline_artifacts_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let first = pipeline(a.path());
    let second = pipeline(b.path());
    assert_eq!(first.len(), 10);
    for ((na, ca), (nb, cb)) in first.iter().zip(&second) {
        assert_eq!(na, nb);
        assert!(ca == cb, "{na} differs between runs");
    }
}

#[test]
fn generate_reads_config_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"n_evs": 4, "n_chargers": 3, "seed": 11, "horizon": 6, "earliest_start_range": [0, 2]}"#,
    )
    .unwrap();
    ok(&[
        "generate",
        "--config",
        s(&cfg),
        "--n-evs",
        "5",
        "--out-dir",
        s(dir.path()),
    ]);
    let inst = dir.path().join("UniEV-UniChar-5-3-seed11.json");
    let instance = ChargingInstance::from_json(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(instance.horizon, 6);
    let manifest = fs::read_to_string(dir.path().join("UniEV-UniChar-5-3-seed11.generate.manifest.json")).unwrap();
    assert!(manifest.contains("cfg.json"));

    fs::write(&cfg, r#"{"n_evs": "many"}"#).unwrap();
    let out = b3m(&["generate", "--config", s(&cfg), "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_agrees_with_bbox_frontier() {
    let dir = TempDir::new().unwrap();
    for seed in ["1", "2", "5"] {
        let inst = desk_instance(dir.path(), seed);
        ok(&["frontier", "--instance", s(&inst), "--method", "bbox"]);
        ok(&["oracle", "--instance", s(&inst)]);
        let base = dir.path().join(format!("UniEV-UniChar-3-2-seed{seed}"));
        let front: Vec<CriterionPoint> =
            read_frontier_csv(fs::File::open(base.with_extension("bbox-eps0.frontier.csv")).unwrap())
                .unwrap()
                .iter()
                .map(|r| r.point())
                .collect();
        let oracle_csv = base.with_extension("oracle.csv");
        let truth: Vec<CriterionPoint> = read_frontier_csv(fs::File::open(&oracle_csv).unwrap())
            .unwrap()
            .iter()
            .map(|r| r.point())
            .collect();
        assert_eq!(front, truth, "seed {seed}");
        if !truth.is_empty() {
            ok(&[
                "bargain",
                "--frontier",
                s(&oracle_csv),
                "--instance",
                s(&inst),
                "--mode",
                "gnb",
                "--pi",
                "0.5",
            ]);
        }
    }
}

/// Solution listing for the z1-lexmin of the whole program, as an external
/// solver would print it.
fn reference_solution(inst: &Path) -> (String, CriterionPoint) {
    let instance = ChargingInstance::from_json(&fs::read_to_string(inst).unwrap()).unwrap();
    let program = build_charging_program(&instance).unwrap().into_program();
    let lex = lexmin(
        &program,
        Objective::Z1,
        &ObjectiveBox::unbounded(),
        &SolverConfig::default(),
    )
    .unwrap();
    let a = lex.assignment.unwrap();
    let listing: String = program
        .render_assignment(&a)
        .lines()
        .map(|l| {
            let (n, v) = l.split_once(' ').unwrap();
            format!("{n} {v}.000000\n")
        })
        .collect();
    (listing, lex.point.unwrap())
}

#[test]
fn lp_export_and_solution_import_round_trip() {
    let dir = TempDir::new().unwrap();
    let inst = desk_instance(dir.path(), "4");
    let lp = dir.path().join("model.lp");
    ok(&["export-lp", "--instance", s(&inst), "--objective", "1", "--out", s(&lp)]);
    let text = fs::read_to_string(&lp).unwrap();
    for section in ["Minimize", "Subject To", "Bounds", "Binaries", "Generals", "End"] {
        assert!(text.contains(section), "{section}");
    }

    let (listing, point) = reference_solution(&inst);
    let sol = dir.path().join("model.sol");
    fs::write(&sol, listing).unwrap();
    let out = ok(&["import-solution", "--instance", s(&inst), "--solution", s(&sol)]);
    assert!(out.contains(&format!("point {point}")), "{out}");
    let schedule = dir.path().join("model.schedule.json");
    assert!(ok(&["validate", "--instance", s(&inst), "--schedule", s(&schedule)]).contains("schedule is valid"));
}

#[cfg(unix)]
#[test]
fn external_solver_is_run_from_the_environment() {
    use std::os::unix::fs::PermissionsExt;
    let dir = TempDir::new().unwrap();
    let inst = desk_instance(dir.path(), "4");
    let (listing, point) = reference_solution(&inst);
    let canned = dir.path().join("canned.sol");
    fs::write(&canned, listing).unwrap();
    let script = dir.path().join("fake-solver.sh");
    fs::write(
        &script,
        format!(
            "#!/bin/sh\ntest -s \"$1\" || exit 3\ncp '{}' \"$2\"\n",
            canned.display()
        ),
    )
    .unwrap();
    fs::set_permissions(&script, fs::Permissions::from_mode(0o755)).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_b3m"))
        .args(["import-solution", "--instance", s(&inst), "--run-solver"])
        .env("B3M_SOLVER", &script)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains(&format!("point {point}")));

    let unset = Command::new(env!("CARGO_BIN_EXE_b3m"))
        .args(["import-solution", "--instance", s(&inst), "--run-solver"])
        .env_remove("B3M_SOLVER")
        .output()
        .unwrap();
    assert_eq!(unset.status.code(), Some(1));
}

#[test]
fn infeasible_solution_is_rejected() {
    let dir = TempDir::new().unwrap();
    let inst = desk_instance(dir.path(), "4");
    let (listing, _) = reference_solution(&inst);
    // drop every rental; sessions now sit on unrented chargers
    let unrented: String = listing
        .lines()
        .map(|l| {
            if l.starts_with("y_") {
                format!("{} 0\n", l.split(' ').next().unwrap())
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let sol = dir.path().join("unrented.sol");
    fs::write(&sol, unrented).unwrap();
    let out = b3m(&["import-solution", "--instance", s(&inst), "--solution", s(&sol)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("violates"));

    let empty = dir.path().join("empty.sol");
    fs::write(&empty, "# nothing set\n").unwrap();
    let out = b3m(&["import-solution", "--instance", s(&inst), "--solution", s(&empty)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("outside its bounds"));
}

#[test]
fn validate_reports_violations() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("t1.json");
    fs::copy(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/t1.json"), &inst).unwrap();
    let schedule = dir.path().join("clash.json");
    fs::write(
        &schedule,
        r#"{"instance": "T1", "rentals": [{"charger": "A", "company": 1}],
            "sessions": [{"ev": "v1", "charger": "A", "start": 0, "end": 2, "energy": 10},
                         {"ev": "v2", "charger": "A", "start": 1, "end": 3, "energy": 10}]}"#,
    )
    .unwrap();
    let out = b3m(&["validate", "--instance", s(&inst), "--schedule", s(&schedule)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "charger-capacity: charger A, interval 2\n"
    );

    let shared = dir.path().join("shared.json");
    fs::write(
        &shared,
        r#"{"instance": "T1", "rentals": [{"charger": "A", "company": 1}],
            "sessions": [{"ev": "v1", "charger": "A", "start": 0, "end": 2, "energy": 10},
                         {"ev": "v2", "charger": "A", "start": 2, "end": 4, "energy": 10}]}"#,
    )
    .unwrap();
    let out = ok(&["validate", "--instance", s(&inst), "--schedule", s(&shared)]);
    assert_eq!(out, "company 1: 21.00\ncompany 2: 27.00\nschedule is valid\n");
}

#[test]
fn report_tabulates_cases_and_averages() {
    let dir = TempDir::new().unwrap();
    let batch = dir.path().join("batch");
    for seed in ["1", "2"] {
        desk_instance(&batch, seed);
    }
    ok(&[
        "report",
        "--batch",
        s(&batch),
        "--epsilon",
        "1",
        "--epsilon",
        "3",
        "--jobs",
        "2",
    ]);
    let mut rdr = csv::Reader::from_path(batch.join("report.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[2], "ndp_bbox");
    assert_eq!(&headers[11], "cts_b3m2_pct");
    let cases: Vec<String> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            format!("{}@{}", &r[0], &r[1])
        })
        .collect();
    assert_eq!(
        cases,
        [
            "UniEV-UniChar-3-2-seed1@1",
            "UniEV-UniChar-3-2-seed1@3",
            "UniEV-UniChar-3-2-seed2@1",
            "UniEV-UniChar-3-2-seed2@3",
            "Average@1",
            "Average@3"
        ]
    );
}

#[test]
fn report_on_missing_batch_is_a_domain_error() {
    let out = b3m(&["report", "--batch", "/nonexistent/batch"]);
    assert_eq!(out.status.code(), Some(1));
}
