//! `vmx`: command-line front end for planted-rotation recovery experiments.
//!
//! Subcommands: `gen` (sample an instance to a directory), `varimax` (run
//! the solver on a matrix file), `dist` (signed-permutation-invariant
//! distance between two rotation files), `witness` (adversarial rotation
//! diagnostics for a generated instance), `sweep` (Monte Carlo grid with
//! CSV + SVG outputs), and `check-theory` (numerical verification of the
//! identities the experiments rely on).
//!
//! Every randomized subcommand takes an explicit `--seed`; there is no
//! wall-clock default. Identical invocations produce byte-identical
//! outputs. Exit codes: 0 success, 1 runtime/numerical error, 2 usage.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use varimax_core::{
    build_witness, check_theory, make_instance, optimize, parse_sweep_config, records_to_csv,
    render_heatmap, rotation_distance, run_sweep, summarize, summary_to_csv, witness_beats_truth,
    Instance, KurtosisLaw, Matrix, OptimizeOptions, Rotation,
};

#[derive(Parser)]
#[command(
    name = "vmx",
    about = "Planted-rotation recovery: fourth-power rotation criterion, phase-transition sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a planted-rotation instance into a directory
    /// (z.mat, r_star.mat, z_hat.mat, meta.txt).
    Gen {
        /// Number of rows (observations); must exceed k.
        #[arg(long)]
        n: usize,
        /// Dimension of the rotation.
        #[arg(long)]
        k: usize,
        /// Entry law: `gaussian`, `three_point:<a>`, or `sparse_gaussian:<p>`.
        #[arg(long)]
        law: String,
        /// Seed for the factor matrix and the planted rotation.
        #[arg(long)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Maximize the fourth-power criterion over rotations of a matrix file.
    Varimax {
        /// Path to the data matrix (text format, header row).
        matrix: PathBuf,
        /// Seed for the random restarts.
        #[arg(long)]
        seed: u64,
        /// Number of restarts (identity plus random starts).
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        /// Iteration cap per restart.
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
        /// Relative objective-change tolerance for convergence.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the recovered rotation here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance between two rotation files, modulo signed permutations.
    Dist {
        /// First rotation file (the reference).
        a: PathBuf,
        /// Second rotation file (the estimate).
        b: PathBuf,
    },
    /// Build the adversarial witness for a generated instance directory and
    /// report whether it beats the planted rotation.
    Witness {
        /// Directory produced by `gen`.
        dir: PathBuf,
        /// Where to write the witness rotation (default: <dir>/witness_a.mat).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo sweep over (n, k, law) cells from a config file.
    Sweep {
        /// Config file (key=value lines; see README for the schema).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for records.csv, summary.csv, phase.svg.
        #[arg(long)]
        out: PathBuf,
        /// Base seed for the whole sweep.
        #[arg(long)]
        seed: u64,
        /// Worker thread count (default: one per CPU).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Verify the analytic identities the experiments rest on.
    CheckTheory {
        /// Haar samples (and Monte Carlo draws) per configuration.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Largest dimension checked (2..=8).
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        /// Seed for all sampling.
        #[arg(long)]
        seed: u64,
    },
}

/// Errors split by exit status: usage problems that clap cannot see
/// (contradictory inputs) exit 2 like its own errors; everything else is a
/// runtime failure and exits 1.
enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gen { n, k, law, seed, out } => cmd_gen(n, k, &law, seed, &out),
        Command::Varimax { matrix, seed, restarts, max_iter, tol, out } => {
            cmd_varimax(&matrix, seed, restarts, max_iter, tol, out.as_deref())
        }
        Command::Dist { a, b } => cmd_dist(&a, &b),
        Command::Witness { dir, out } => cmd_witness(&dir, out.as_deref()),
        Command::Sweep { config, out, seed, workers } => cmd_sweep(&config, &out, seed, workers),
        Command::CheckTheory { samples, k_max, seed } => cmd_check_theory(samples, k_max, seed),
    }
}

fn cmd_gen(n: usize, k: usize, law: &str, seed: u64, out: &Path) -> Result<(), CliError> {
    let law = KurtosisLaw::parse(law)?;
    let inst = make_instance(n, k, &law, seed)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    inst.z.save(&out.join("z.mat"))?;
    inst.r_star.matrix().save(&out.join("r_star.mat"))?;
    inst.z_hat.save(&out.join("z_hat.mat"))?;
    let meta = format!("n={n}\nk={k}\nlaw={}\nseed={seed}\n", law.spec_string());
    std::fs::write(out.join("meta.txt"), meta)
        .with_context(|| format!("writing {}", out.join("meta.txt").display()))?;
    println!(
        "wrote z.mat, r_star.mat, z_hat.mat, meta.txt to {} (n={n}, k={k}, law={}, kappa={})",
        out.display(),
        law.spec_string(),
        law.kappa()
    );
    Ok(())
}

fn cmd_varimax(
    matrix: &Path,
    seed: u64,
    restarts: usize,
    max_iter: usize,
    tol: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let z_hat = Matrix::load(matrix).with_context(|| format!("loading {}", matrix.display()))?;
    let opts = OptimizeOptions { restarts, max_iter, rel_tol: tol, seed, extra_starts: Vec::new() };
    let sol = optimize(&z_hat, &opts)?;
    match out {
        Some(path) => {
            sol.r_hat.matrix().save(path)?;
            println!("rotation written to {}", path.display());
        }
        None => print!("{}", sol.r_hat.matrix().to_text()),
    }
    println!(
        "objective={} iterations={} restarts_used={}",
        sol.objective, sol.iterations, sol.restarts_used
    );
    Ok(())
}

fn cmd_dist(a: &Path, b: &Path) -> Result<(), CliError> {
    let load = |p: &Path| -> Result<Rotation, CliError> {
        let m = Matrix::load(p).with_context(|| format!("loading {}", p.display()))?;
        Ok(Rotation::new(m).map_err(|e| anyhow!("{}: {e}", p.display()))?)
    };
    let ra = load(a)?;
    let rb = load(b)?;
    let d = rotation_distance(&ra, &rb)?;
    println!("dist={}", d.dist);
    let perm: Vec<String> = d.alignment.perm().iter().map(|p| p.to_string()).collect();
    let signs: Vec<String> = d.alignment.signs().iter().map(|s| s.to_string()).collect();
    println!("perm={} signs={}", perm.join(","), signs.join(","));
    Ok(())
}

/// Rebuild the instance a `gen` directory describes.
fn load_instance(dir: &Path) -> Result<Instance, CliError> {
    let meta_path = dir.join("meta.txt");
    let meta = std::fs::read_to_string(&meta_path)
        .with_context(|| format!("reading {}", meta_path.display()))?;
    let mut law = None;
    let mut seed = None;
    for line in meta.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some(("law", v)) => law = Some(KurtosisLaw::parse(v)?),
            Some(("seed", v)) => {
                seed = Some(v.parse::<u64>().map_err(|e| anyhow!("bad seed in meta.txt: {e}"))?)
            }
            Some(("n" | "k", _)) => {} // implied by the matrix shapes
            _ => return Err(anyhow!("unrecognized meta.txt line: {line}").into()),
        }
    }
    let law = law.ok_or_else(|| anyhow!("meta.txt lacks a law= line"))?;
    let seed = seed.ok_or_else(|| anyhow!("meta.txt lacks a seed= line"))?;
    let z = Matrix::load(&dir.join("z.mat"))?;
    let r_star = Rotation::new(Matrix::load(&dir.join("r_star.mat"))?)?;
    Ok(Instance::from_parts(z, r_star, law, seed)?)
}

fn cmd_witness(dir: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let inst = load_instance(dir)?;
    let w = build_witness(&inst)?;
    let cmp = witness_beats_truth(&inst, &w)?;
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| dir.join("witness_a.mat"));
    w.a.matrix().save(&out_path)?;
    println!(
        "d1={} d2={} v_adv={} v_true={} beats={} witness={}",
        w.d1,
        w.d2,
        cmp.v_adv,
        cmp.v_true,
        cmp.beats,
        out_path.display()
    );
    Ok(())
}

fn cmd_sweep(
    config_path: &Path,
    out: &Path,
    seed: u64,
    workers: Option<usize>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("reading {}", config_path.display()))?;
    let parsed = parse_sweep_config(&text)?;
    if parsed.base_seed.is_some() {
        return Err(CliError::Usage(
            "config sets base_seed and --seed was given; use exactly one".into(),
        ));
    }
    let config = parsed.into_config(seed)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    // Per-cell progress on stderr: report when each (family, kappa, k, n)
    // cell finishes its trial quota.
    let trials_per_cell = config.trials;
    let progress = std::sync::Mutex::new(std::collections::BTreeMap::<String, usize>::new());
    let on_trial = move |rec: &varimax_core::TrialRecord| {
        let key = format!(
            "family={} kappa={} k={} n={}",
            rec.family, rec.kappa, rec.k, rec.n
        );
        let mut map = progress.lock().unwrap();
        let done = map.entry(key.clone()).and_modify(|c| *c += 1).or_insert(1);
        if *done == trials_per_cell {
            eprintln!("cell {key}: {trials_per_cell} trials done");
        }
    };
    let records = run_sweep(&config, workers, Some(&on_trial))?;

    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!(
            "note: {failed} trial(s) recorded an error (dist=NaN or empty witness columns)"
        );
    }

    std::fs::write(out.join("records.csv"), records_to_csv(&records))?;
    let summary = summarize(&records)?;
    std::fs::write(out.join("summary.csv"), summary_to_csv(&summary))?;
    std::fs::write(out.join("phase.svg"), render_heatmap(&summary)?)?;
    println!(
        "wrote records.csv ({} trials), summary.csv ({} cells), phase.svg to {}",
        records.len(),
        summary.len(),
        out.display()
    );
    Ok(())
}

fn cmd_check_theory(samples: usize, k_max: usize, seed: u64) -> Result<(), CliError> {
    let report = check_theory(samples, k_max, seed)?;
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status} {}: {}", c.name, c.detail);
    }
    if report.all_passed() {
        println!("all {} checks passed", report.checks.len());
        Ok(())
    } else {
        Err(anyhow!("one or more checks failed").into())
    }
}
