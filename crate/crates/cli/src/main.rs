//! Operator surface for the cafe-robot stack. Every command is
//! seed-reproducible: identical flags with the scripted or recorded backend
//! produce byte-identical outputs.
//!
//! Exit codes: 0 success, 1 runtime error (one line on stderr), 2 usage
//! error, 3 a configured acceptance threshold was missed.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use cafebot_core::eqa::{
    generate_dataset, randomize_scene, read_dataset, write_dataset, DatasetParams,
};
use cafebot_core::eval::{
    default_start, exploration_tour, generate_instructions, run_eqa_eval, run_instruction_eval,
    AblationFlags, EqaMode, InstructionCase, InstructionLength, TOUR_WAYPOINTS,
};
use cafebot_core::mem::{EnvironmentMemory, MemoryFlags, OutlierParams};
use cafebot_core::planner::{
    plan, EpisodeCaps, PlannerBackend, PlannerRequest, RecordedBackend, RemoteBackend,
    ScriptedOracle,
};
use cafebot_core::planner::{render_floor_summary, render_language_memory};
use cafebot_core::simworld::{load_scene, scene_to_json, WorldScene, ALL_CATEGORIES};
use cafebot_core::skills::{catalog_text, execute};

#[derive(Parser)]
#[command(name = "cafebot", version, about = "Deterministic cafe-robot simulation and evaluation")]
struct Cli {
    /// JSON config file mirroring the flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write N randomized scene JSON files.
    GenScenes(GenScenesArgs),
    /// Run the exploration tour on a scene; write memory JSON and floor plan.
    Explore(ExploreArgs),
    /// Generate the embodied question-answering dataset.
    GenEqa(GenEqaArgs),
    /// Plan one instruction and print the execution trace.
    Plan(PlanArgs),
    /// Instruction-planning evaluation.
    EvalInstr(EvalInstrArgs),
    /// Question-answering evaluation.
    EvalEqa(EvalEqaArgs),
}

#[derive(Args)]
struct GenScenesArgs {
    /// Number of scenes.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed.
    #[arg(long)]
    start_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExploreArgs {
    /// Scene JSON file.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Waypoints in the tour circuit.
    #[arg(long, default_value_t = TOUR_WAYPOINTS)]
    waypoints: usize,
    /// Apply statistical outlier removal to the fused cloud before writing.
    #[arg(long)]
    outlier_filter: bool,
    /// Disable the language-memory half.
    #[arg(long)]
    no_elm: bool,
    /// Disable the image-memory half.
    #[arg(long)]
    no_eim: bool,
}

#[derive(Args)]
struct GenEqaArgs {
    /// Number of scenes (each yields 15 items).
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    per_template: Option<usize>,
    #[arg(long)]
    start_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long)]
    instruction: Option<String>,
    /// scripted | recorded:DIR | remote
    #[arg(long)]
    backend: Option<String>,
    /// Comma-separated ablations: no-mem, no-elm, no-eim.
    #[arg(long)]
    ablate: Option<String>,
}

#[derive(Args)]
struct EvalInstrArgs {
    /// Pre-generated case file (JSON); mutually exclusive with --gen.
    #[arg(long)]
    cases: Option<PathBuf>,
    /// Generate cases of this length: short | long.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    /// Instruction-sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Scene JSON file; mutually exclusive with --scene-seed.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Randomized-scene seed.
    #[arg(long)]
    scene_seed: Option<u64>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    ablate: Option<String>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail (exit 3) when ESR(a) lands below this threshold.
    #[arg(long)]
    min_esr_a: Option<f64>,
    #[arg(long)]
    min_esr_b: Option<f64>,
    #[arg(long)]
    min_ssl: Option<f64>,
}

#[derive(Args)]
struct EvalEqaArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// single | multi
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    ablate: Option<String>,
    /// Evaluate only this many scenes (seeded selection).
    #[arg(long)]
    scenes: Option<usize>,
    #[arg(long)]
    subset_seed: Option<u64>,
    #[arg(long)]
    max_explorations: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    min_acc: Option<f64>,
}

/// Optional defaults mirroring the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seeds: Option<u64>,
    start_seed: Option<u64>,
    seed: Option<u64>,
    scene: Option<PathBuf>,
    scene_seed: Option<u64>,
    out: Option<PathBuf>,
    backend: Option<String>,
    ablate: Option<String>,
    jobs: Option<usize>,
    count: Option<usize>,
    gen: Option<String>,
    mode: Option<String>,
    dataset: Option<PathBuf>,
    scenes: Option<usize>,
    subset_seed: Option<u64>,
    per_template: Option<usize>,
    max_explorations: Option<usize>,
    instruction: Option<String>,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            serde_json::from_slice(&bytes)
                .with_context(|| format!("invalid config {}", path.display()))
        }
    }
}

fn parse_ablation(spec: Option<&str>) -> Result<AblationFlags> {
    let mut flags = AblationFlags::default();
    let Some(spec) = spec else { return Ok(flags) };
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "no-mem" => flags = AblationFlags::no_mem(),
            "no-elm" => flags.no_language_memory = true,
            "no-eim" => flags.no_image_memory = true,
            other => bail!("unknown ablation {other:?} (expected no-mem, no-elm, no-eim)"),
        }
    }
    Ok(flags)
}

fn backend_factory(
    spec: &str,
) -> Result<Box<dyn Fn() -> Box<dyn PlannerBackend> + Sync + Send>> {
    if spec == "scripted" {
        return Ok(Box::new(|| Box::new(ScriptedOracle::new())));
    }
    if let Some(dir) = spec.strip_prefix("recorded:") {
        let dir = PathBuf::from(dir);
        if !dir.is_dir() {
            bail!("transcript directory {} does not exist", dir.display());
        }
        return Ok(Box::new(move || Box::new(RecordedBackend::new(dir.clone()))));
    }
    if spec == "remote" {
        // Validate the environment once up front.
        RemoteBackend::from_env().map_err(|e| anyhow::anyhow!("{e}"))?;
        return Ok(Box::new(|| {
            Box::new(RemoteBackend::from_env().expect("validated at startup"))
        }));
    }
    bail!("unknown backend {spec:?} (expected scripted, recorded:DIR or remote)")
}

fn load_scene_file(path: &Path) -> Result<WorldScene> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read scene {}", path.display()))?;
    load_scene(&bytes).with_context(|| format!("invalid scene {}", path.display()))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn pretty_json(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("json serialization");
    bytes.push(b'\n');
    bytes
}

fn cmd_gen_scenes(args: &GenScenesArgs, cfg: &FileConfig) -> Result<u8> {
    let count = args.seeds.or(cfg.seeds).unwrap_or(10);
    let start_seed = args.start_seed.or(cfg.start_seed).unwrap_or(1);
    let out = args.out.clone().or(cfg.out.clone()).context("--out DIR is required")?;
    std::fs::create_dir_all(&out)?;
    for index in 0..count {
        let seed = start_seed + index;
        let scene = randomize_scene(seed, &ALL_CATEGORIES, cafebot_core::eqa::default_bounds());
        let path = out.join(format!("scene-{index:03}.json"));
        write_bytes(&path, &pretty_json(&scene_to_json(&scene)))?;
    }
    println!("wrote {count} scenes to {}", out.display());
    Ok(0)
}

fn cmd_explore(args: &ExploreArgs, cfg: &FileConfig) -> Result<u8> {
    let scene_path = args.scene.clone().or(cfg.scene.clone()).context("--scene FILE is required")?;
    let out = args.out.clone().or(cfg.out.clone()).context("--out DIR is required")?;
    let scene = load_scene_file(&scene_path)?;
    std::fs::create_dir_all(&out)?;

    let flags = MemoryFlags { language_memory: !args.no_elm, image_memory: !args.no_eim };
    let mut robot = default_start(&scene);
    let mut mem = EnvironmentMemory::new(scene.bounds, flags);
    let path_m = exploration_tour(&scene, &mut robot, &mut mem, args.waypoints);
    if args.outlier_filter {
        let outcome = mem.filter_outliers(&OutlierParams::default());
        println!(
            "outlier filter removed {} points{}",
            outcome.removed,
            if outcome.skipped_small_cloud { " (cloud too small, skipped)" } else { "" }
        );
    }

    write_bytes(&out.join("memory.json"), &mem.serialize_memory())?;
    write_bytes(&out.join("floorplan.pgm"), &mem.plan.to_pgm())?;
    write_bytes(&out.join("floorplan.png"), &mem.plan.to_png())?;
    println!(
        "toured {:.1} m over {} waypoints: {} objects remembered, {} cloud points, {:.1}% occupied",
        path_m,
        args.waypoints,
        mem.language.len(),
        mem.cloud.len(),
        100.0 * mem.plan.occupied_fraction()
    );
    Ok(0)
}

fn cmd_gen_eqa(args: &GenEqaArgs, cfg: &FileConfig) -> Result<u8> {
    let params = DatasetParams {
        scene_count: args.seeds.or(cfg.seeds).unwrap_or(70),
        start_seed: args.start_seed.or(cfg.start_seed).unwrap_or(1),
        per_template: args.per_template.or(cfg.per_template).unwrap_or(3),
        ..DatasetParams::default()
    };
    let out = args.out.clone().or(cfg.out.clone()).context("--out FILE is required")?;
    let dataset = generate_dataset(&params)?;
    write_bytes(&out, &write_dataset(&dataset))?;
    println!("wrote {} items to {}", dataset.items.len(), out.display());
    Ok(0)
}

fn cmd_plan(args: &PlanArgs, cfg: &FileConfig) -> Result<u8> {
    let scene_path = args.scene.clone().or(cfg.scene.clone()).context("--scene FILE is required")?;
    let instruction = args
        .instruction
        .clone()
        .or(cfg.instruction.clone())
        .context("--instruction TEXT is required")?;
    if instruction.trim().is_empty() {
        // Usage-level error: nothing to plan.
        clap::Error::raw(clap::error::ErrorKind::InvalidValue, "instruction must be non-empty\n")
            .exit();
    }
    let ablation = parse_ablation(args.ablate.as_deref().or(cfg.ablate.as_deref()))?;
    let backend_spec =
        args.backend.clone().or(cfg.backend.clone()).unwrap_or_else(|| "scripted".into());
    let make_backend = backend_factory(&backend_spec)?;

    let base = load_scene_file(&scene_path)?;
    let mut scene = base.clone();
    let mut robot = default_start(&scene);
    let mut mem = EnvironmentMemory::new(scene.bounds, MemoryFlags::default());
    exploration_tour(&scene, &mut robot, &mut mem, TOUR_WAYPOINTS);

    let request = PlannerRequest {
        instruction: instruction.clone(),
        catalog: catalog_text(),
        language_memory: (!ablation.no_language_memory).then(|| render_language_memory(&mem)),
        floor_plan_summary: (!ablation.no_image_memory).then(|| render_floor_summary(&mem)),
        failed_plans: Vec::new(),
        retry_note: None,
    };
    let mut backend = make_backend();
    let generated = plan(&request, backend.as_mut()).map_err(|e| anyhow::anyhow!("{e}"))?;

    println!("plan ({} steps):", generated.len());
    for (idx, step) in generated.steps.iter().enumerate() {
        println!("  {}. {}", idx + 1, step.render());
    }
    println!("trace:");
    let mut all_ok = true;
    for (idx, step) in generated.steps.iter().enumerate() {
        let outcome = execute(step, &mut scene, &mut robot, &mem);
        all_ok &= outcome.success;
        let status = match (&outcome.success, outcome.failure_detail()) {
            (true, _) => "ok".to_string(),
            (false, Some(detail)) => format!("failed ({detail})"),
            (false, None) => "failed".to_string(),
        };
        if outcome.distance_traveled > 0.0 {
            println!(
                "  {}. {} .. {status} (traveled {:.2} m)",
                idx + 1,
                step.render(),
                outcome.distance_traveled
            );
        } else {
            println!("  {}. {} .. {status}", idx + 1, step.render());
        }
    }
    println!("result: {}", if all_ok { "success" } else { "failure" });
    Ok(0)
}

#[derive(Debug, Deserialize)]
struct CaseFile {
    cases: Vec<InstructionCase>,
}

fn cmd_eval_instr(args: &EvalInstrArgs, cfg: &FileConfig) -> Result<u8> {
    let backend_spec =
        args.backend.clone().or(cfg.backend.clone()).unwrap_or_else(|| "scripted".into());
    let ablation = parse_ablation(args.ablate.as_deref().or(cfg.ablate.as_deref()))?;
    let jobs = args.jobs.or(cfg.jobs).unwrap_or(1);
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    let count = args.count.or(cfg.count).unwrap_or(20);
    let out = args.out.clone().or(cfg.out.clone()).context("--out FILE is required")?;

    let scene_file = args.scene.clone().or(cfg.scene.clone());
    let scene_seed = args.scene_seed.or(cfg.scene_seed);
    let (scene, scene_source) = match (&scene_file, scene_seed) {
        (Some(_), Some(_)) => {
            clap::Error::raw(
                clap::error::ErrorKind::ArgumentConflict,
                "--scene and --scene-seed are mutually exclusive\n",
            )
            .exit();
        }
        (Some(path), None) => (load_scene_file(path)?, serde_json::json!({"file": path})),
        (None, seed) => {
            let seed = seed.unwrap_or(1);
            (
                randomize_scene(seed, &ALL_CATEGORIES, cafebot_core::eqa::default_bounds()),
                serde_json::json!({"seed": seed}),
            )
        }
    };

    let gen_spec = args.gen.clone().or(cfg.gen.clone());
    let (cases, case_source) = match (&args.cases, gen_spec) {
        (Some(_), Some(_)) => {
            clap::Error::raw(
                clap::error::ErrorKind::ArgumentConflict,
                "--cases and --gen are mutually exclusive\n",
            )
            .exit();
        }
        (Some(path), None) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("cannot read cases {}", path.display()))?;
            let file: CaseFile = serde_json::from_slice(&bytes)
                .with_context(|| format!("invalid case file {}", path.display()))?;
            (file.cases, serde_json::json!({"file": path}))
        }
        (None, spec) => {
            let length: InstructionLength =
                spec.as_deref().unwrap_or("short").parse().map_err(|e: String| anyhow::anyhow!(e))?;
            let cases = generate_instructions(seed, length, count, &scene)?;
            (cases, serde_json::json!({"generated": {"seed": seed, "length": length, "count": count}}))
        }
    };

    let config = serde_json::json!({
        "command": "eval-instr",
        "scene": scene_source,
        "cases": case_source,
        "backend": backend_spec,
        "ablation": ablation,
        "tour_waypoints": TOUR_WAYPOINTS,
    });
    let make_backend = backend_factory(&backend_spec)?;
    let report = run_instruction_eval(&scene, &cases, ablation, jobs, &make_backend, config);
    write_bytes(&out, &report.to_json_bytes())?;
    print!("{}", report.summary());
    println!("report: {}", out.display());

    let mut missed = Vec::new();
    if let Some(min) = args.min_esr_a {
        if report.aggregates.esr_instruction < min {
            missed.push(format!("ESR(a) {:.4} < {min}", report.aggregates.esr_instruction));
        }
    }
    if let Some(min) = args.min_esr_b {
        if report.aggregates.esr_subtask < min {
            missed.push(format!("ESR(b) {:.4} < {min}", report.aggregates.esr_subtask));
        }
    }
    if let Some(min) = args.min_ssl {
        if report.aggregates.ssl < min {
            missed.push(format!("SSL {:.4} < {min}", report.aggregates.ssl));
        }
    }
    if !missed.is_empty() {
        eprintln!("error: threshold missed: {}", missed.join("; "));
        return Ok(3);
    }
    Ok(0)
}

fn cmd_eval_eqa(args: &EvalEqaArgs, cfg: &FileConfig) -> Result<u8> {
    let dataset_path =
        args.dataset.clone().or(cfg.dataset.clone()).context("--dataset FILE is required")?;
    let mode: EqaMode = args
        .mode
        .clone()
        .or(cfg.mode.clone())
        .unwrap_or_else(|| "single".into())
        .parse()
        .map_err(|e: String| anyhow::anyhow!(e))?;
    let backend_spec =
        args.backend.clone().or(cfg.backend.clone()).unwrap_or_else(|| "scripted".into());
    let ablation = parse_ablation(args.ablate.as_deref().or(cfg.ablate.as_deref()))?;
    let jobs = args.jobs.or(cfg.jobs).unwrap_or(1);
    let out = args.out.clone().or(cfg.out.clone()).context("--out FILE is required")?;
    let scenes = args.scenes.or(cfg.scenes);
    let subset_seed = args.subset_seed.or(cfg.subset_seed).unwrap_or(7);
    let caps = EpisodeCaps {
        max_explorations: args.max_explorations.or(cfg.max_explorations).unwrap_or(10),
    };

    let bytes = std::fs::read(&dataset_path)
        .with_context(|| format!("cannot read dataset {}", dataset_path.display()))?;
    let dataset = read_dataset(&bytes)?;

    let config = serde_json::json!({
        "command": "eval-eqa",
        "dataset": dataset_path,
        "mode": mode,
        "backend": backend_spec,
        "ablation": ablation,
        "scene_limit": scenes.map(|n| serde_json::json!({"scenes": n, "subset_seed": subset_seed})),
        "max_explorations": caps.max_explorations,
    });
    let make_backend = backend_factory(&backend_spec)?;
    let report = run_eqa_eval(
        &dataset,
        mode,
        ablation,
        scenes.map(|n| (n, subset_seed)),
        caps,
        jobs,
        &make_backend,
        config,
    );
    write_bytes(&out, &report.to_json_bytes())?;
    print!("{}", report.summary());
    println!("report: {}", out.display());

    if let Some(min) = args.min_acc {
        if report.aggregates.accuracy < min {
            eprintln!("error: threshold missed: ACC {:.4} < {min}", report.aggregates.accuracy);
            return Ok(3);
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = load_file_config(cli.config.as_deref())?;
    match &cli.command {
        Command::GenScenes(args) => cmd_gen_scenes(args, &cfg),
        Command::Explore(args) => cmd_explore(args, &cfg),
        Command::GenEqa(args) => cmd_gen_eqa(args, &cfg),
        Command::Plan(args) => cmd_plan(args, &cfg),
        Command::EvalInstr(args) => cmd_eval_instr(args, &cfg),
        Command::EvalEqa(args) => cmd_eval_eqa(args, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
