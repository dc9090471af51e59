mod config;
mod generate;
mod pipeline;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use config::{parse_integrand, ExperimentConfig, MeshSource, Pipeline, SCHEMA};
use generate::Artifact;
use pipeline::RunReport;

#[derive(Parser)]
#[command(name = "varilab", version, about = "Experiments on anisotropic Michael-Simon type inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config (`"schema": 1`)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid cells per side
    #[arg(long)]
    grid: Option<usize>,
    /// Exit with status 1 when any check fails
    #[arg(long)]
    strict: bool,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline and write report.json plus field files
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        pipeline: Option<Pipeline>,
        /// OFF mesh file
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Per-triangle multiplicities, one per line
        #[arg(long, requires = "mesh")]
        multiplicity: Option<PathBuf>,
        /// `area`, `lp:P`, `perturbed:EPS` or inline JSON
        #[arg(long)]
        integrand: Option<String>,
        /// Tube width
        #[arg(long)]
        eps: Option<f64>,
        /// Tube rotation in radians
        #[arg(long)]
        angle: Option<f64>,
    },
    /// Write the artifacts of a named generator
    Generate {
        #[command(flatten)]
        common: Common,
        /// icosphere, torus, graph-over-square, crossing-tubes, transverse-flow-pair, sheared-integrand
        name: String,
        /// Generator parameter as key=value
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
    /// Run a base config over a list of values of one field
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v = v.parse::<f64>().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.to_string(), v))
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn base_dir(config: Option<&Path>) -> PathBuf {
    config.and_then(Path::parent).map(Path::to_path_buf).unwrap_or_default()
}

fn write_files(dir: &Path, files: &[Artifact]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in files {
        let p = dir.join(&f.name);
        std::fs::write(&p, &f.bytes).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn run_and_write(c: &ExperimentConfig, base: &Path, out: &Path) -> Result<RunReport> {
    let mut o = pipeline::run(c, base)?;
    o.artifacts.push(Artifact::json("report.json", &o.report)?);
    write_files(out, &o.artifacts)?;
    Ok(o.report)
}

fn summary_line(r: &RunReport) -> String {
    let stages: Vec<String> = r.stages.iter().map(|s| format!("{} {}", s.stage, if s.pass { "pass" } else { "FAIL" })).collect();
    format!("{}: {} ({})", serde_json::to_value(r.pipeline).unwrap_or_default().as_str().unwrap_or("?"), if r.pass { "pass" } else { "FAIL" }, stages.join(", "))
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    common: Common,
    pipeline: Option<Pipeline>,
    mesh: Option<PathBuf>,
    multiplicity: Option<PathBuf>,
    integrand: Option<String>,
    eps: Option<f64>,
    angle: Option<f64>,
) -> Result<bool> {
    let mut c = match (&common.config, pipeline) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ExperimentConfig::from_json(&text).with_context(|| format!("in {}", p.display()))?
        }
        (None, Some(pl)) => ExperimentConfig::new(pl),
        (None, None) => bail!("either --config or --pipeline is required"),
    };
    if let Some(pl) = pipeline {
        c.pipeline = pl;
    }
    if let Some(path) = mesh {
        c.mesh = Some(MeshSource::File { path, multiplicity });
    }
    if let Some(f) = integrand {
        c.integrand = parse_integrand(&f)?;
    }
    c.eps = eps.or(c.eps);
    c.angle = angle.or(c.angle);
    c.grid = common.grid.or(c.grid);
    c.seed = common.seed.unwrap_or(c.seed);
    let base = base_dir(common.config.as_deref());
    let out = common.out.clone().or_else(|| c.out.as_ref().map(|o| base.join(o))).unwrap_or_else(|| PathBuf::from("out"));
    let r = run_and_write(&c, &base, &out)?;
    println!("{}", summary_line(&r));
    println!("wrote {}", out.join("report.json").display());
    Ok(r.pass)
}

fn cmd_generate(common: Common, name: String, params: Vec<(String, f64)>) -> Result<bool> {
    let mut map: BTreeMap<String, f64> = match &common.config {
        Some(p) => read_config(p)?,
        None => BTreeMap::new(),
    };
    map.extend(params);
    let files = generate::generate(&name, &map, common.seed.unwrap_or(0), common.grid)?;
    let out = common.out.unwrap_or_else(|| PathBuf::from("out"));
    write_files(&out, &files)?;
    for f in &files {
        println!("wrote {}", out.join(&f.name).display());
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum SweepField {
    Grid,
    Seed,
    Eps,
    Angle,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    schema: u32,
    base: ExperimentConfig,
    field: SweepField,
    values: Vec<f64>,
}

impl SweepConfig {
    fn entry(&self, v: f64) -> Result<ExperimentConfig> {
        let mut c = self.base.clone();
        let count = |v: f64| if v >= 0.0 && v.fract() == 0.0 { Ok(v as u64) } else { Err(anyhow::anyhow!("sweep value {v} is not a count")) };
        match self.field {
            SweepField::Grid => c.grid = Some(count(v)? as usize),
            SweepField::Seed => c.seed = count(v)?,
            SweepField::Eps => c.eps = Some(v),
            SweepField::Angle => c.angle = Some(v),
        }
        c.validate()?;
        Ok(c)
    }
}

fn cmd_sweep(common: Common, jobs: Option<usize>) -> Result<bool> {
    let Some(path) = &common.config else { bail!("sweep needs --config") };
    let mut sweep: SweepConfig = read_config(path)?;
    if sweep.schema != SCHEMA {
        bail!("unsupported sweep schema {}", sweep.schema);
    }
    if let Some(s) = common.seed {
        sweep.base.seed = s;
    }
    sweep.base.grid = common.grid.or(sweep.base.grid);
    let entries = sweep.values.iter().map(|&v| sweep.entry(v)).collect::<Result<Vec<_>>>()?;
    let base = base_dir(Some(path));
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let workers = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).clamp(1, entries.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<RunReport>>>> = Mutex::new((0..entries.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= entries.len() {
                    break;
                }
                let r = run_and_write(&entries[i], &base, &out.join(format!("run-{i:03}")));
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    let mut csv = String::from("index,value,pass,failed_stages\n");
    let mut all = true;
    for (i, r) in results.into_inner().unwrap().into_iter().enumerate() {
        let r = r.expect("every entry ran").with_context(|| format!("sweep entry {i}"))?;
        let failed: Vec<&str> = r.stages.iter().filter(|s| !s.pass).map(|s| s.stage.as_str()).collect();
        csv.push_str(&format!("{i},{:?},{},{}\n", sweep.values[i], r.pass, failed.join(";")));
        println!("[{i}] {}", summary_line(&r));
        all &= r.pass;
    }
    write_files(&out, &[Artifact::text("sweep.csv", csv)])?;
    println!("wrote {}", out.join("sweep.csv").display());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (strict, result) = match cli.command {
        Command::Run { common, pipeline, mesh, multiplicity, integrand, eps, angle } => {
            (common.strict, cmd_run(common, pipeline, mesh, multiplicity, integrand, eps, angle))
        }
        Command::Generate { common, name, params } => (common.strict, cmd_generate(common, name, params)),
        Command::Sweep { common, jobs } => (common.strict, cmd_sweep(common, jobs)),
    };
    match result {
        Ok(pass) if pass || !strict => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
