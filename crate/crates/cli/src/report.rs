//! Batch table: every method on every instance of a directory, one row per
//! (instance, ε), then one average row per ε. Averages are means of the
//! per-case values.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use anyhow::Context;

use b3m_core::charging::{build_charging_program, noncollab_point};
use b3m_core::frontier::{cts_metric, gap_metric, run_method, FrontierResult, Method, Tolerance};
use b3m_core::SolverConfig;

use crate::commands::load_instance;
use crate::manifest::RunManifest;
use crate::{Failure, ReportArgs};

const HEADER: [&str; 12] = [
    "case",
    "epsilon",
    "ndp_bbox",
    "cpu_bbox_s",
    "ndp_b3m1",
    "cpu_b3m1_s",
    "gap_b3m1_pct",
    "cts_b3m1_pct",
    "ndp_b3m2",
    "cpu_b3m2_s",
    "gap_b3m2_pct",
    "cts_b3m2_pct",
];

struct MethodCell {
    ndp: f64,
    cpu_s: f64,
    gap: Option<f64>,
    cts: Option<f64>,
}

struct CaseRow {
    case: String,
    epsilon: Tolerance,
    bbox: MethodCell,
    b3m1: MethodCell,
    b3m2: MethodCell,
}

fn reduced_cell(exact: &FrontierResult, r: &FrontierResult) -> anyhow::Result<MethodCell> {
    let gap = match exact.endpoints() {
        Some((zt, zb)) => gap_metric(&exact.criterion_points(), &r.criterion_points(), zt, zb).ok(),
        None => None,
    };
    Ok(MethodCell {
        ndp: r.ndp() as f64,
        cpu_s: r.wall_time.as_secs_f64(),
        gap,
        cts: cts_metric(exact.wall_time, r.wall_time).ok(),
    })
}

fn run_case(path: &Path, epsilons: &[Tolerance]) -> anyhow::Result<Vec<CaseRow>> {
    let instance = load_instance(path)?;
    let config = SolverConfig::default();
    let participation = noncollab_point(&instance, &config)?;
    let program = build_charging_program(&instance)?.into_program();
    let bbox = run_method(&program, participation, Method::Bbox, Tolerance::ZERO, &config)?;
    let case = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    epsilons
        .iter()
        .map(|&eps| {
            let b1 = run_method(&program, participation, Method::B3m1, eps, &config)?;
            let b2 = run_method(&program, participation, Method::B3m2, eps, &config)?;
            Ok(CaseRow {
                case: case.clone(),
                epsilon: eps,
                bbox: MethodCell {
                    ndp: bbox.ndp() as f64,
                    cpu_s: bbox.wall_time.as_secs_f64(),
                    gap: None,
                    cts: None,
                },
                b3m1: reduced_cell(&bbox, &b1)?,
                b3m2: reduced_cell(&bbox, &b2)?,
            })
        })
        .collect()
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn average(rows: &[&CaseRow], epsilon: Tolerance) -> CaseRow {
    let cell = |f: fn(&CaseRow) -> &MethodCell| MethodCell {
        ndp: mean(rows.iter().map(|r| Some(f(r).ndp))).unwrap_or(0.0),
        cpu_s: mean(rows.iter().map(|r| Some(f(r).cpu_s))).unwrap_or(0.0),
        gap: mean(rows.iter().map(|r| f(r).gap)),
        cts: mean(rows.iter().map(|r| f(r).cts)),
    };
    CaseRow {
        case: "Average".into(),
        epsilon,
        bbox: cell(|r| &r.bbox),
        b3m1: cell(|r| &r.b3m1),
        b3m2: cell(|r| &r.b3m2),
    }
}

fn record(row: &CaseRow) -> Vec<String> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x:.2}"));
    let ndp = |v: f64| {
        if v.fract() == 0.0 {
            format!("{v}")
        } else {
            format!("{v:.2}")
        }
    };
    vec![
        row.case.clone(),
        row.epsilon.to_string(),
        ndp(row.bbox.ndp),
        format!("{:.4}", row.bbox.cpu_s),
        ndp(row.b3m1.ndp),
        format!("{:.4}", row.b3m1.cpu_s),
        opt(row.b3m1.gap),
        opt(row.b3m1.cts),
        ndp(row.b3m2.ndp),
        format!("{:.4}", row.b3m2.cpu_s),
        opt(row.b3m2.gap),
        opt(row.b3m2.cts),
    ]
}

fn instance_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("missing artifact: batch directory `{}`", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            // instance files have exactly one dot
            name.ends_with(".json") && name.matches('.').count() == 1
        })
        .collect();
    files.sort();
    if files.is_empty() {
        anyhow::bail!("missing artifact: no instance files in `{}`", dir.display());
    }
    Ok(files)
}

pub fn run(args: &ReportArgs) -> Result<(), Failure> {
    let files = instance_files(&args.batch)?;
    let mut manifest = RunManifest::new("report", serde_json::to_value(args)?);
    for f in &files {
        manifest.input(f);
    }
    let jobs = args
        .jobs
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, files.len());

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<anyhow::Result<Vec<CaseRow>>>>> =
        Mutex::new((0..files.len()).map(|_| None).collect());
    let started = std::time::Instant::now();
    thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= files.len() {
                    break;
                }
                let r = run_case(&files[i], &args.epsilons).with_context(|| format!("case `{}`", files[i].display()));
                results.lock().expect("no panics while holding the lock")[i] = Some(r);
            });
        }
    });
    manifest.stage("batch", started.elapsed());

    let mut rows = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        rows.extend(r.expect("every case ran")?);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for row in &rows {
        w.write_record(record(row))?;
    }
    for &eps in &args.epsilons {
        let subset: Vec<&CaseRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
        w.write_record(record(&average(&subset, eps)))?;
    }
    let out = args.out.clone().unwrap_or_else(|| args.batch.join("report.csv"));
    manifest.emit(out.clone(), w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    manifest.finish(out.with_extension("manifest.json"))?;
    println!("{} cases, {} rows", files.len(), rows.len());
    println!("{}", out.display());
    Ok(())
}
