use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use serde_json::{json, Value};

use b3m_core::bargaining::{reference_points, select, Alpha, BargainConfig, ReferencePoints};
use b3m_core::charging::{
    build_charging_program, company_cost, noncollab_point, validate_schedule, ChargingInstance, Company, Schedule,
};
use b3m_core::frontier::{
    frontier_rows, read_frontier_csv, run_method, write_frontier_csv, write_stats_csv, FrontierRow, Method, StatsRow,
    Tolerance,
};
use b3m_core::lp::{export_lp, parse_external_solution};
use b3m_core::oracle::{charging_frontier, charging_noncollab, OracleBudget};
use b3m_core::scenario::{
    generate_scenario, load_price_series, ChargerLayout, EvDistribution, PriceSeries, ScenarioConfig,
};
use b3m_core::solver::region_constraints;
use b3m_core::{CriterionPoint, Objective, SolverConfig};

use crate::manifest::RunManifest;
use crate::{
    BargainArgs, EvDistArg, ExportLpArgs, Failure, FrontierArgs, GenerateArgs, ImportArgs, LayoutArg, ModeArg,
    OracleArgs, ValidateArgs,
};

/// Environment variable naming an external LP solver executable. It is
/// invoked as `<solver> <model.lp> <solution.txt>` and must write a
/// `name value` listing to the second path.
pub const SOLVER_ENV: &str = "B3M_SOLVER";

type Outcome = Result<(), Failure>;

fn snapshot<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

pub fn read_artifact(path: &Path, what: &str) -> anyhow::Result<String> {
    if !path.exists() {
        bail!("missing artifact: {what} `{}` does not exist", path.display());
    }
    fs::read_to_string(path).with_context(|| format!("reading {what} `{}`", path.display()))
}

pub fn load_instance(path: &Path) -> anyhow::Result<ChargingInstance> {
    let text = read_artifact(path, "instance")?;
    ChargingInstance::from_json(&text).with_context(|| format!("instance `{}`", path.display()))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
}

fn dir_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn objective_of(index: u8) -> Objective {
    Objective::from_index(index as usize).expect("clap restricts the objective to 1 or 2")
}

fn point_json(p: CriterionPoint) -> Value {
    json!({ "z1": p.z1, "z2": p.z2 })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

pub fn generate(args: &GenerateArgs) -> Outcome {
    let mut config = match &args.config {
        Some(p) => serde_json::from_str::<ScenarioConfig>(&read_artifact(p, "scenario config")?)
            .map_err(|e| Failure::Usage(format!("config `{}`: {e}", p.display())))?,
        None if args.desk => ScenarioConfig::desk(0, 4, 2),
        None => ScenarioConfig::default(),
    };
    if let Some(d) = args.ev_dist {
        config.ev_distribution = match d {
            EvDistArg::Uniform => EvDistribution::Uniform,
            EvDistArg::Clustered => EvDistribution::Clustered,
        };
    }
    if let Some(l) = args.charger_layout {
        config.charger_layout = match l {
            LayoutArg::Uniform => ChargerLayout::Uniform,
            LayoutArg::Centralized => ChargerLayout::Centralized,
        };
    }
    if let Some(n) = args.n_evs {
        config.n_evs = n;
    }
    if let Some(n) = args.n_chargers {
        config.n_chargers = n;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(h) = args.horizon {
        config.horizon = h;
    }
    if let Some(theta) = args.theta {
        config.price_scale = theta;
    }
    if let Some(vot) = args.vot {
        config.vot_sek_per_hour = vot;
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let mut manifest = RunManifest::new("generate", serde_json::to_value(&config)?);
    manifest.seed = Some(config.seed);
    if let Some(p) = &args.config {
        manifest.input(p);
    }
    let prices = match &args.prices {
        Some(p) => {
            manifest.input(p);
            load_price_series(&read_artifact(p, "price series")?)
                .with_context(|| format!("prices `{}`", p.display()))?
        }
        None => PriceSeries::default(),
    };
    let started = Instant::now();
    let instance = generate_scenario(&config, &prices)?;
    manifest.stage("generate", started.elapsed());

    let name = format!("{}-seed{}", config.case_name(), config.seed);
    let path = args.out_dir.join(format!("{name}.json"));
    manifest.emit(path.clone(), instance.to_json() + "\n")?;
    manifest.finish(args.out_dir.join(format!("{name}.generate.manifest.json")))?;
    println!("{}", path.display());
    Ok(())
}

fn solver_config(node_limit: Option<u64>) -> SolverConfig {
    SolverConfig {
        node_limit,
        ..SolverConfig::default()
    }
}

pub fn frontier(args: &FrontierArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let config = solver_config(args.node_limit);
    let mut manifest = RunManifest::new("frontier", snapshot(args));
    manifest.input(&args.instance);

    let started = Instant::now();
    let participation = noncollab_point(&instance, &config)?;
    manifest.stage("participation", started.elapsed());
    let model = build_charging_program(&instance)?;
    let result = run_method(model.program(), participation, args.method, args.epsilon, &config)?;
    manifest.stage("frontier", result.wall_time);

    let rows = frontier_rows(&result);
    let mut points = Vec::new();
    for (row, p) in rows.iter().zip(&result.points) {
        let schedule = model.decode(&p.assignment, &instance)?;
        points.push(json!({
            "assignment_ref": row.assignment_ref,
            "z1": row.z1,
            "z2": row.z2,
            "schedule": serde_json::from_str::<Value>(&schedule.to_json(&instance))?,
        }));
    }
    let doc = json!({
        "instance": instance.name,
        "method": result.method,
        "epsilon": result.epsilon,
        "status": result.status,
        "participation": participation,
        "margins": result.margins,
        "solver_calls": result.solver_calls,
        "nodes_explored": result.nodes_explored,
        "rectangles_processed": result.rectangles_processed,
        "discarded": result.discarded.iter().map(|p| point_json(*p)).collect::<Vec<_>>(),
        "points": points,
    });

    let out_dir = args.out_dir.clone().unwrap_or_else(|| dir_of(&args.instance));
    let base = format!("{}.{}-eps{}", stem(&args.instance), args.method, result.epsilon);
    let mut csv = Vec::new();
    write_frontier_csv(&rows, &mut csv)?;
    let csv_path = out_dir.join(format!("{base}.frontier.csv"));
    manifest.emit(csv_path.clone(), csv)?;
    manifest.emit(out_dir.join(format!("{base}.frontier.json")), pretty(&doc))?;
    let stats = StatsRow {
        method: result.method,
        epsilon: result.epsilon,
        ndp: result.ndp(),
        solver_calls: result.solver_calls,
        wall_ms: result.wall_time.as_secs_f64() * 1000.0,
        gap_pct: None,
        cts_pct: None,
    };
    let mut stats_csv = Vec::new();
    write_stats_csv(&[stats], &mut stats_csv)?;
    manifest.emit(out_dir.join(format!("{base}.stats.csv")), stats_csv)?;
    manifest.finish(out_dir.join(format!("{base}.frontier.manifest.json")))?;

    if result.points.is_empty() {
        println!("{}: no mutually beneficial collaboration", instance.name);
    } else {
        println!(
            "{}: {} points, {} solver calls",
            instance.name,
            result.ndp(),
            result.solver_calls
        );
    }
    println!("{}", csv_path.display());
    Ok(())
}

fn pick_run(rows: Vec<FrontierRow>, args: &BargainArgs) -> anyhow::Result<Vec<FrontierRow>> {
    let rows: Vec<FrontierRow> = rows
        .into_iter()
        .filter(|r| args.method.is_none_or(|m| r.method == m) && args.epsilon.is_none_or(|e| r.epsilon == e))
        .collect();
    let runs: std::collections::BTreeSet<_> = rows.iter().map(|r| (r.method, r.epsilon)).collect();
    if runs.len() > 1 {
        bail!(
            "frontier `{}` holds {} runs; choose one with --method and --epsilon",
            args.frontier.display(),
            runs.len()
        );
    }
    if rows.is_empty() {
        bail!(
            "frontier `{}` has no points: no mutually beneficial collaboration to bargain over",
            args.frontier.display()
        );
    }
    Ok(rows)
}

pub fn bargain(args: &BargainArgs) -> Outcome {
    let config = match args.mode {
        ModeArg::Gnb => BargainConfig::Gnb {
            pi: args.pi.expect("clap requires --pi for gnb"),
        },
        ModeArg::Dist => {
            let alpha: Alpha = args
                .alpha
                .as_deref()
                .expect("clap requires --alpha for dist")
                .parse()
                .map_err(|e: b3m_core::BargainError| Failure::Usage(e.to_string()))?;
            BargainConfig::Dist { alpha }
        }
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if args.instance.is_none() && args.disagreement.is_none() {
        return Err(Failure::Usage("bargain needs --instance or --disagreement".into()));
    }

    let mut manifest = RunManifest::new("bargain", snapshot(args));
    manifest.input(&args.frontier);
    let text = read_artifact(&args.frontier, "frontier CSV").map_err(|e| anyhow!("{e}; run `b3m frontier` first"))?;
    let rows = pick_run(read_frontier_csv(text.as_bytes())?, args)?;
    let points: Vec<CriterionPoint> = rows.iter().map(FrontierRow::point).collect();

    let started = Instant::now();
    let (disagreement, ideal) = match &args.instance {
        Some(path) => {
            manifest.input(path);
            let instance = load_instance(path)?;
            let solver = SolverConfig::default();
            let participation = noncollab_point(&instance, &solver)?;
            let program = build_charging_program(&instance)?.into_program();
            let refs = reference_points(&program, participation, &solver)?;
            (refs.disagreement, Some(refs.ideal))
        }
        None => {
            let (a, b) = args.disagreement.expect("checked above");
            (
                CriterionPoint::new(a, b),
                args.ideal.map(|(a, b)| CriterionPoint::new(a, b)),
            )
        }
    };
    manifest.stage("reference points", started.elapsed());
    let refs = match (ideal, args.mode) {
        (Some(ideal), _) => ReferencePoints::new(ideal, disagreement)?,
        (None, ModeArg::Gnb) => ReferencePoints {
            ideal: disagreement,
            disagreement,
        },
        (None, ModeArg::Dist) => return Err(Failure::Usage("--mode dist needs --ideal or --instance".into())),
    };
    let chosen = select(&points, &refs, &config)?;
    let row = rows
        .iter()
        .find(|r| r.point() == chosen)
        .expect("selection comes from the rows");

    let mut doc = json!({
        "mode": args.mode,
        "method": row.method,
        "epsilon": row.epsilon,
        "disagreement": point_json(disagreement),
        "ideal": ideal.map(point_json),
        "point": point_json(chosen),
        "assignment_ref": row.assignment_ref,
    });
    match config {
        BargainConfig::Gnb { pi } => doc["pi"] = json!(pi),
        BargainConfig::Dist { alpha } => doc["alpha"] = json!(alpha.to_string()),
    }
    let out = args.out.clone().unwrap_or_else(|| {
        let name = args
            .frontier
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned());
        let base = name.strip_suffix(".frontier.csv").unwrap_or(&name).to_string();
        let mode = match args.mode {
            ModeArg::Gnb => "gnb",
            ModeArg::Dist => "dist",
        };
        dir_of(&args.frontier).join(format!("{base}.bargain-{mode}.json"))
    });
    manifest.emit(out.clone(), pretty(&doc))?;
    let manifest_path = out.with_extension("manifest.json");
    manifest.finish(manifest_path)?;
    println!("selected {chosen} ({})", row.assignment_ref);
    println!("{}", out.display());
    Ok(())
}

pub fn oracle(args: &OracleArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let budget = OracleBudget {
        max_candidates: args.budget,
    };
    let mut manifest = RunManifest::new("oracle", snapshot(args));
    manifest.input(&args.instance);
    let started = Instant::now();
    let participation = charging_noncollab(&instance, budget)?;
    let front = charging_frontier(&instance, Some(participation), budget)?;
    manifest.stage("oracle", started.elapsed());

    let model = build_charging_program(&instance)?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for (i, (p, a)) in front.points.iter().enumerate() {
        let schedule = model.decode(a, &instance)?;
        // same layout as `frontier` output, so `bargain` reads it directly
        rows.push(FrontierRow {
            method: Method::Bbox,
            epsilon: Tolerance::ZERO,
            index: i,
            z1: p.z1,
            z2: p.z2,
            assignment_ref: format!("oracle:{i}"),
        });
        points.push(json!({
            "z1": p.z1,
            "z2": p.z2,
            "schedule": serde_json::from_str::<Value>(&schedule.to_json(&instance))?,
        }));
    }
    let doc = json!({
        "instance": instance.name,
        "participation": participation,
        "ideal": front.ideal.map(point_json),
        "candidates": front.candidates.to_string(),
        "feasible": front.feasible,
        "points": points,
    });
    let out_dir = args.out_dir.clone().unwrap_or_else(|| dir_of(&args.instance));
    let base = format!("{}.oracle", stem(&args.instance));
    let mut csv = Vec::new();
    write_frontier_csv(&rows, &mut csv)?;
    manifest.emit(out_dir.join(format!("{base}.csv")), csv)?;
    manifest.emit(out_dir.join(format!("{base}.json")), pretty(&doc))?;
    manifest.finish(out_dir.join(format!("{base}.manifest.json")))?;
    println!(
        "{}: participation ({}, {}), {} exact points from {} candidates",
        instance.name,
        participation.z1_non,
        participation.z2_non,
        front.points.len(),
        front.candidates
    );
    Ok(())
}

fn lp_text(
    instance: &ChargingInstance,
    objective: u8,
    participation: bool,
) -> anyhow::Result<(String, b3m_core::BiObjectiveProgram)> {
    let program = build_charging_program(instance)?.into_program();
    let extra = if participation {
        let p = noncollab_point(instance, &SolverConfig::default())?;
        region_constraints(&program, &p.region())
    } else {
        Vec::new()
    };
    Ok((export_lp(&program, objective_of(objective), &extra), program))
}

pub fn export_lp_file(args: &ExportLpArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let mut manifest = RunManifest::new("export-lp", snapshot(args));
    manifest.input(&args.instance);
    let (text, _) = lp_text(&instance, args.objective, args.participation)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| dir_of(&args.instance).join(format!("{}.z{}.lp", stem(&args.instance), args.objective)));
    manifest.emit(out.clone(), text)?;
    manifest.finish(out.with_extension("lp.manifest.json"))?;
    println!("{}", out.display());
    Ok(())
}

pub fn import_solution(args: &ImportArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let mut manifest = RunManifest::new("import-solution", snapshot(args));
    manifest.input(&args.instance);
    let (lp, program) = lp_text(&instance, args.objective, args.participation)?;

    let solution_path = match &args.solution {
        Some(p) => p.clone(),
        None => {
            let exe = std::env::var_os(SOLVER_ENV)
                .ok_or_else(|| anyhow!("--run-solver needs the {SOLVER_ENV} environment variable"))?;
            let base = dir_of(&args.instance).join(format!("{}.z{}", stem(&args.instance), args.objective));
            let lp_path = base.with_extension(format!("z{}.lp", args.objective));
            let sol_path = base.with_extension(format!("z{}.sol", args.objective));
            manifest.emit(lp_path.clone(), lp)?;
            let started = Instant::now();
            let status = Process::new(&exe)
                .arg(&lp_path)
                .arg(&sol_path)
                .status()
                .with_context(|| format!("running {}", PathBuf::from(&exe).display()))?;
            manifest.stage("external solver", started.elapsed());
            if !status.success() {
                return Err(anyhow!("external solver exited with {status}").into());
            }
            manifest.outputs.push(sol_path.clone());
            sol_path
        }
    };
    manifest.input(&solution_path);
    let text = read_artifact(&solution_path, "solution listing")?;
    let assignment = parse_external_solution(&text, &program)?;
    program.check_bounds(&assignment)?;
    let violated: Vec<&str> = program
        .constraints()
        .iter()
        .filter(|c| !c.is_satisfied(&assignment).unwrap_or(false))
        .map(|c| c.name.as_str())
        .collect();
    if !violated.is_empty() {
        return Err(anyhow!(
            "solution violates {} constraints: {}",
            violated.len(),
            violated.join(", ")
        )
        .into());
    }
    let model = build_charging_program(&instance)?;
    let schedule = model.decode(&assignment, &instance)?;
    let point = program.point(&assignment)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| solution_path.with_extension("schedule.json"));
    manifest.emit(out.clone(), schedule.to_json(&instance) + "\n")?;
    manifest.finish(out.with_extension("manifest.json"))?;
    println!("point {point}");
    println!("{}", out.display());
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let text = read_artifact(&args.schedule, "schedule")?;
    let schedule = Schedule::from_json(&text, &instance)?;
    let violations = validate_schedule(&schedule, &instance);
    if !violations.is_empty() {
        for v in &violations {
            println!("{v}");
        }
        return Err(anyhow!("schedule has {} violations", violations.len()).into());
    }
    let costs: BTreeMap<String, i64> = Company::ALL
        .into_iter()
        .map(|k| Ok((format!("company {k}"), company_cost(&schedule, &instance, k)?)))
        .collect::<anyhow::Result<_>>()?;
    for (k, c) in costs {
        println!("{k}: {}", b3m_core::model::format_minor(c, instance.minor_per_major));
    }
    println!("schedule is valid");
    Ok(())
}
