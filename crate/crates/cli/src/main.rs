mod config;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use config::{ExperimentConfig, Module};
use run::{Check, Context};

#[derive(Parser)]
#[command(name = "reglab", version, about = "Regularity estimates laboratory: audits, solves, bound checks, couplings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Only errors on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the structural hypotheses of the fixture.
    Audit(Common),
    /// Run the finite-difference solver.
    Solve(Common),
    /// Solve and check a regularity bound.
    Verify(Common),
    /// Simulate the mirror-coupled pair.
    Couple(Common),
    /// Liouville diagnostics of a modulus.
    Liouville(Common),
    /// Tabulate and check the auxiliary profile.
    Aux(Common),
    /// Every module the config has a section for.
    All(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (modules, common) = match cli.command {
        Command::Audit(c) => (vec![Module::Audit], c),
        Command::Solve(c) => (vec![Module::Solve], c),
        Command::Verify(c) => (vec![Module::Verify], c),
        Command::Couple(c) => (vec![Module::Couple], c),
        Command::Liouville(c) => (vec![Module::Liouville], c),
        Command::Aux(c) => (vec![Module::Aux], c),
        Command::All(c) => (Module::ALL.to_vec(), c),
    };
    match execute(&modules, &common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn init_threads() -> Result<()> {
    let n = match std::env::var("REGLAB_THREADS") {
        Ok(v) => v.trim().parse::<usize>().with_context(|| format!("REGLAB_THREADS = {v:?} is not a count"))?,
        Err(_) => 0,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Runs the modules and writes the artifacts. `Ok(false)` means some
/// absolute check failed or a module errored; config problems are `Err`.
fn execute(modules: &[Module], common: &Common) -> Result<bool> {
    init_threads()?;
    let (cfg, text) = config::load(&common.config)?;
    let seed = common.seed.unwrap_or(cfg.seed);
    let out = output_dir(&cfg, common);
    let selected: Vec<Module> = if modules.len() == 1 {
        if !cfg.has(modules[0]) {
            anyhow::bail!("config {} has no `{}` section", common.config.display(), modules[0].name());
        }
        modules.to_vec()
    } else {
        modules.iter().copied().filter(|&m| cfg.has(m)).collect()
    };

    let mut ctx = Context::new(&cfg, seed)?;
    let mut results = Map::new();
    let mut csvs = Vec::new();
    let mut all_pass = true;
    for m in selected {
        if !common.quiet {
            eprintln!("[{}] running {}", cfg.name, m.name());
        }
        let entry = match ctx.run(m) {
            Ok(o) => {
                let pass = o.checks.iter().all(|c| c.pass);
                all_pass &= pass;
                if !common.quiet {
                    print_checks(m, &o.checks);
                }
                csvs.extend(o.csvs);
                json!({ "status": if pass { "PASS" } else { "FAIL" }, "checks": o.checks, "result": o.report })
            }
            Err(e) => {
                all_pass = false;
                let kind = e.downcast_ref::<reglab_core::Error>().map(error_kind);
                eprintln!("[{}] {} failed: {e:#}", cfg.name, m.name());
                json!({ "status": "ERROR", "error": format!("{e:#}"), "error_kind": kind })
            }
        };
        results.insert(m.name().to_string(), entry);
    }

    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let report = json!({
        "name": cfg.name,
        "fixture": cfg.fixture,
        "dim": cfg.dim,
        "seed": seed,
        "status": if all_pass { "PASS" } else { "FAIL" },
        "modules": Value::Object(results),
    });
    write(&out, "report.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    let mut files = Vec::new();
    for (name, body) in &csvs {
        write(&out, name, body)?;
        files.push(json!({ "file": name, "sha256": sha256(body.as_bytes()) }));
    }
    let manifest = json!({
        "config": common.config.display().to_string(),
        "config_sha256": sha256(text.as_bytes()),
        "seed": seed,
        "reglab_version": env!("CARGO_PKG_VERSION"),
        "outputs": files,
    });
    write(&out, "manifest.json", &(serde_json::to_string_pretty(&manifest)? + "\n"))?;
    if !common.quiet {
        eprintln!("[{}] {} -> {}", cfg.name, if all_pass { "PASS" } else { "FAIL" }, out.display());
    }
    Ok(all_pass)
}

fn output_dir(cfg: &ExperimentConfig, common: &Common) -> PathBuf {
    if let Some(o) = &common.out {
        return o.clone();
    }
    match &cfg.out {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => common.config.parent().unwrap_or(Path::new(".")).join(p),
        None => PathBuf::from("out").join(&cfg.name),
    }
}

fn print_checks(m: Module, checks: &[Check]) {
    for c in checks {
        let word = if c.pass { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            eprintln!("  {}: {word} {}", m.name(), c.name);
        } else {
            eprintln!("  {}: {word} {} ({})", m.name(), c.name, c.detail);
        }
    }
}

/// Variant name of a library error, for machine-readable reports.
fn error_kind(e: &reglab_core::Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

fn write(dir: &Path, name: &str, body: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
