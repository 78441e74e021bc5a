//! Monte Carlo sweep harness: configs, trials, records, summaries.
//!
//! Determinism contract: a sweep is a pure function of its config (base
//! seed included). Every trial derives its own seed from the base seed and
//! the cell coordinates, trials run in parallel at trial granularity, and
//! records are sorted into a canonical order before use, so the emitted
//! CSV/SVG bytes do not depend on the worker count or scheduling.

use crate::adversarial::{build_witness, witness_beats_truth};
use crate::datagen::{make_instance, KurtosisLaw};
use crate::error::{Error, Result};
use crate::metrics::rotation_distance;
use crate::seed::derive_seed;
use crate::varimax::{objective, optimize, OptimizeOptions};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::time::Instant;

/// Sweep definition: the grid is `n_list x k_list x laws`, with `trials`
/// instances per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub laws: Vec<KurtosisLaw>,
    pub trials: usize,
    /// Success threshold on the rotation distance.
    pub delta: f64,
    pub restarts: usize,
    pub base_seed: u64,
    /// Also build and score the adversarial witness per trial.
    pub run_witness: bool,
    /// Add the planted rotation as an extra optimizer start (upper-bound
    /// diagnostic for the multi-start search).
    pub include_truth_restart: bool,
}

/// A parsed config file; `base_seed` may be absent and supplied later
/// (e.g. from a command-line flag).
#[derive(Debug, Clone)]
pub struct ParsedSweepConfig {
    pub n_list: Vec<usize>,
    pub k_list: Vec<usize>,
    pub laws: Vec<KurtosisLaw>,
    pub trials: usize,
    pub delta: f64,
    pub restarts: usize,
    pub base_seed: Option<u64>,
    pub run_witness: bool,
    pub include_truth_restart: bool,
}

impl ParsedSweepConfig {
    /// Combine with a seed given out-of-band. A config `base_seed` that
    /// contradicts `seed` is an error.
    pub fn into_config(self, seed: u64) -> Result<SweepConfig> {
        if let Some(s) = self.base_seed {
            if s != seed {
                return Err(Error::Parameter(format!(
                    "config base_seed={s} conflicts with the requested seed {seed}"
                )));
            }
        }
        let cfg = SweepConfig {
            n_list: self.n_list,
            k_list: self.k_list,
            laws: self.laws,
            trials: self.trials,
            delta: self.delta,
            restarts: self.restarts,
            base_seed: seed,
            run_witness: self.run_witness,
            include_truth_restart: self.include_truth_restart,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() || self.k_list.is_empty() || self.laws.is_empty() {
            return Err(Error::Parameter("n_list, k_list and laws must be non-empty".into()));
        }
        if self.k_list.iter().any(|&k| k == 0) {
            return Err(Error::Parameter("k values must be at least 1".into()));
        }
        if self.n_list.iter().any(|&n| n < 2) {
            return Err(Error::Parameter("n values must be at least 2".into()));
        }
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::Parameter("restarts must be at least 1".into()));
        }
        if !self.delta.is_finite() || self.delta <= 0.0 || self.delta > 2.0 {
            return Err(Error::Parameter(format!(
                "delta must lie in (0, 2], got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Parse the `key = value` sweep config format.
///
/// Keys: `n_list`, `k_list`, `laws`, `trials` (required); `delta` (default
/// 0.5), `restarts` (default 10), `base_seed`, `run_witness` and
/// `include_truth_restart` (default false). Lists are comma-separated; `#`
/// starts a comment; unknown or duplicate keys are errors. List order is
/// normalized (sorted, deduplicated) — trial seeds depend only on cell
/// coordinates, never on list positions.
pub fn parse_sweep_config(text: &str) -> Result<ParsedSweepConfig> {
    let mut seen: Vec<String> = Vec::new();
    let mut n_list: Option<Vec<usize>> = None;
    let mut k_list: Option<Vec<usize>> = None;
    let mut laws: Option<Vec<KurtosisLaw>> = None;
    let mut trials: Option<usize> = None;
    let mut delta = 0.5f64;
    let mut restarts = 10usize;
    let mut base_seed: Option<u64> = None;
    let mut run_witness = false;
    let mut include_truth_restart = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {}: expected `key = value`, got {raw:?}", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if seen.iter().any(|k| k == key) {
            return Err(Error::Parse(format!("config line {}: duplicate key {key:?}", lineno + 1)));
        }
        seen.push(key.to_string());

        let parse_usize_list = |v: &str| -> Result<Vec<usize>> {
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad integer {s:?} for {key}")))
                })
                .collect()
        };
        match key {
            "n_list" => n_list = Some(parse_usize_list(value)?),
            "k_list" => k_list = Some(parse_usize_list(value)?),
            "laws" => {
                laws = Some(
                    value.split(',').map(KurtosisLaw::parse).collect::<Result<Vec<_>>>()?,
                )
            }
            "trials" => {
                trials = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("bad integer {value:?} for trials"))
                })?)
            }
            "delta" => {
                delta = value
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number {value:?} for delta")))?
            }
            "restarts" => {
                restarts = value.parse().map_err(|_| {
                    Error::Parse(format!("bad integer {value:?} for restarts"))
                })?
            }
            "base_seed" => {
                base_seed = Some(value.parse().map_err(|_| {
                    Error::Parse(format!("bad integer {value:?} for base_seed"))
                })?)
            }
            "run_witness" => run_witness = parse_bool(value)?,
            "include_truth_restart" => include_truth_restart = parse_bool(value)?,
            other => {
                return Err(Error::Parse(format!(
                    "config line {}: unknown key {other:?}",
                    lineno + 1
                )))
            }
        }
    }

    let require = |name: &str| Error::Parse(format!("config is missing required key {name:?}"));
    let mut n_list = n_list.ok_or_else(|| require("n_list"))?;
    let mut k_list = k_list.ok_or_else(|| require("k_list"))?;
    let laws = laws.ok_or_else(|| require("laws"))?;
    let trials = trials.ok_or_else(|| require("trials"))?;

    n_list.sort_unstable();
    n_list.dedup();
    k_list.sort_unstable();
    k_list.dedup();
    let mut dedup_laws: Vec<KurtosisLaw> = Vec::new();
    for law in laws {
        if !dedup_laws.iter().any(|l| l.spec_string() == law.spec_string()) {
            dedup_laws.push(law);
        }
    }

    Ok(ParsedSweepConfig {
        n_list,
        k_list,
        laws: dedup_laws,
        trials,
        delta,
        restarts,
        base_seed,
        run_witness,
        include_truth_restart,
    })
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(Error::Parse(format!("expected true/false, got {other:?}"))),
    }
}

/// Everything needed to run (or replay) one trial.
#[derive(Debug, Clone)]
pub struct TrialParams {
    pub n: usize,
    pub k: usize,
    pub law: KurtosisLaw,
    pub delta: f64,
    pub restarts: usize,
    pub include_truth_restart: bool,
    pub run_witness: bool,
    pub trial_index: usize,
    /// Fully derived per-trial seed.
    pub seed: u64,
}

/// One row of `records.csv`. Witness fields are present only when the
/// witness was requested and built.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub family: String,
    pub trial_index: usize,
    pub seed: u64,
    pub dist: f64,
    pub objective: f64,
    pub v_true: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub success: bool,
    pub witness_beats: Option<bool>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    /// Measured in memory; persisted as 0 so sweep outputs are
    /// byte-deterministic.
    pub wall_time_ms: f64,
    /// In-memory diagnostic for failed trials; not part of the CSV schema.
    pub error: Option<String>,
}

/// The per-trial seed used by sweeps: derived from the base seed and the
/// cell coordinates only, so it does not depend on grid enumeration order.
pub fn trial_seed(base_seed: u64, law: &KurtosisLaw, n: usize, k: usize, trial_index: usize) -> u64 {
    let tag = match law.param() {
        Some(p) => format!("trial/{}/{}/{n}/{k}", law.family(), p),
        None => format!("trial/{}/{n}/{k}", law.family()),
    };
    derive_seed(base_seed, &tag, trial_index as u64)
}

/// Run one trial. Never fails: any stage error is folded into the record
/// (NaN diagnostics, `success = false`, message in `error`).
pub fn run_trial(params: &TrialParams) -> TrialRecord {
    let start = Instant::now();
    let mut record = TrialRecord {
        n: params.n,
        k: params.k,
        kappa: params.law.kappa(),
        family: params.law.family().to_string(),
        trial_index: params.trial_index,
        seed: params.seed,
        dist: f64::NAN,
        objective: f64::NAN,
        v_true: f64::NAN,
        iterations: 0,
        restarts_used: 0,
        success: false,
        witness_beats: None,
        d1: None,
        d2: None,
        wall_time_ms: 0.0,
        error: None,
    };

    // A rank-deficient witness block (possible under discrete laws, e.g. a
    // three-point Z_1 with an all-zero column) restarts the whole trial on
    // a fresh sub-seeded instance, so every record describes one internally
    // consistent instance. Other errors are recorded, never retried.
    const WITNESS_ATTEMPTS: u64 = 3;
    enum Attempt {
        Done,
        RetrySingularWitness,
    }
    let mut failure: Option<String> = None;
    for attempt in 0..WITNESS_ATTEMPTS {
        let instance_seed = if attempt == 0 {
            params.seed
        } else {
            derive_seed(params.seed, "resample", attempt - 1)
        };
        let outcome = (|| -> Result<Attempt> {
            let inst = make_instance(params.n, params.k, &params.law, instance_seed)?;
            record.v_true = objective(&inst.z_hat, &inst.r_star)?;
            let opts = OptimizeOptions {
                restarts: params.restarts,
                seed: derive_seed(params.seed, "optimize", 0),
                extra_starts: if params.include_truth_restart {
                    vec![inst.r_star.clone()]
                } else {
                    Vec::new()
                },
                ..OptimizeOptions::default()
            };
            let sol = optimize(&inst.z_hat, &opts)?;
            record.objective = sol.objective;
            record.iterations = sol.iterations;
            record.restarts_used = sol.restarts_used;
            let d = rotation_distance(&inst.r_star, &sol.r_hat)?;
            record.dist = d.dist;
            record.success = d.dist < params.delta;

            if params.run_witness {
                match build_witness(&inst) {
                    Ok(w) => {
                        let cmp = witness_beats_truth(&inst, &w)?;
                        record.witness_beats = Some(cmp.beats);
                        record.d1 = Some(w.d1);
                        record.d2 = Some(w.d2);
                    }
                    Err(Error::Singular(_)) => return Ok(Attempt::RetrySingularWitness),
                    Err(e) => return Err(e),
                }
            }
            Ok(Attempt::Done)
        })();

        match outcome {
            Ok(Attempt::Done) => {
                failure = None;
                break;
            }
            Ok(Attempt::RetrySingularWitness) => {
                // The optimizer fields from this attempt stay valid; only
                // the witness is missing. Note it if no retry is left.
                failure = Some(format!(
                    "witness block rank-deficient in {WITNESS_ATTEMPTS} resampled instances"
                ));
            }
            Err(e) => {
                record.error = Some(e.to_string());
                record.success = false;
                failure = None;
                break;
            }
        }
    }
    if let Some(msg) = failure {
        record.error = Some(msg);
    }
    record.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    record
}

/// Run the whole grid. Cells with `n <= k` are skipped (no instance
/// exists). Trials are the unit of parallelism; `workers` limits the
/// thread count (`None` uses the global rayon pool). Records come back
/// sorted by `(family, kappa, k, n, trial_index)` regardless of scheduling,
/// and `on_trial` (if given) fires once per finished trial.
pub fn run_sweep(
    config: &SweepConfig,
    workers: Option<usize>,
    on_trial: Option<&(dyn Fn(&TrialRecord) + Sync)>,
) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let mut tasks: Vec<TrialParams> = Vec::new();
    for law in &config.laws {
        for &k in &config.k_list {
            for &n in &config.n_list {
                if n <= k {
                    continue;
                }
                for trial_index in 0..config.trials {
                    tasks.push(TrialParams {
                        n,
                        k,
                        law: law.clone(),
                        delta: config.delta,
                        restarts: config.restarts,
                        include_truth_restart: config.include_truth_restart,
                        run_witness: config.run_witness,
                        trial_index,
                        seed: trial_seed(config.base_seed, law, n, k, trial_index),
                    });
                }
            }
        }
    }
    if tasks.is_empty() {
        return Err(Error::Parameter(
            "sweep grid is empty: every (n, k) cell has n <= k".into(),
        ));
    }

    let run_all = || -> Vec<TrialRecord> {
        tasks
            .par_iter()
            .map(|p| {
                let r = run_trial(p);
                if let Some(cb) = on_trial {
                    cb(&r);
                }
                r
            })
            .collect()
    };
    let mut records = match workers {
        Some(w) => {
            if w == 0 {
                return Err(Error::Parameter("workers must be at least 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
            pool.install(run_all)
        }
        None => run_all(),
    };

    records.sort_by(|a, b| {
        (a.family.as_str(), a.kappa.to_bits(), a.k, a.n, a.trial_index)
            .cmp(&(b.family.as_str(), b.kappa.to_bits(), b.k, b.n, b.trial_index))
    });
    Ok(records)
}

/// Aggregates for one `(family, kappa, k, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub k: usize,
    pub kappa: f64,
    pub family: String,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Binomial standard error `sqrt(p(1-p)/trials)`.
    pub success_se: f64,
    /// Median of the trial distances (midpoint of the two central order
    /// statistics for even counts); NaN distances from failed trials are
    /// excluded.
    pub median_dist: f64,
    pub witness_beat_rate: Option<f64>,
    pub witness_beat_se: Option<f64>,
}

/// Group records into per-cell summaries, ordered by
/// `(family, kappa, k, n)`.
pub fn summarize(records: &[TrialRecord]) -> Result<Vec<CellSummary>> {
    if records.is_empty() {
        return Err(Error::Parameter("no records to summarize".into()));
    }
    use std::collections::BTreeMap;
    let mut cells: BTreeMap<(String, u64, usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.family.clone(), r.kappa.to_bits(), r.k, r.n)).or_default().push(r);
    }
    let mut out = Vec::with_capacity(cells.len());
    for ((family, kappa_bits, k, n), rs) in cells {
        let trials = rs.len();
        let successes = rs.iter().filter(|r| r.success).count();
        let rate = successes as f64 / trials as f64;
        let se = (rate * (1.0 - rate) / trials as f64).sqrt();
        let mut dists: Vec<f64> = rs.iter().map(|r| r.dist).filter(|d| !d.is_nan()).collect();
        dists.sort_by(f64::total_cmp);
        let median = if dists.is_empty() {
            f64::NAN
        } else if dists.len() % 2 == 1 {
            dists[dists.len() / 2]
        } else {
            let hi = dists.len() / 2;
            0.5 * (dists[hi - 1] + dists[hi])
        };
        let witnessed: Vec<bool> = rs.iter().filter_map(|r| r.witness_beats).collect();
        let (wrate, wse) = if witnessed.is_empty() {
            (None, None)
        } else {
            let wr = witnessed.iter().filter(|&&b| b).count() as f64 / witnessed.len() as f64;
            (Some(wr), Some((wr * (1.0 - wr) / witnessed.len() as f64).sqrt()))
        };
        out.push(CellSummary {
            n,
            k,
            kappa: f64::from_bits(kappa_bits),
            family,
            trials,
            successes,
            success_rate: rate,
            success_se: se,
            median_dist: median,
            witness_beat_rate: wrate,
            witness_beat_se: wse,
        });
    }
    Ok(out)
}

pub const RECORDS_HEADER: &str = "n,k,kappa,family,trial_index,seed,dist,objective,v_true,iterations,restarts_used,success,witness_beats,d1,d2,wall_time_ms";

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}

fn fmt_opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn fmt_opt_bool(x: Option<bool>) -> String {
    x.map(|b| b.to_string()).unwrap_or_default()
}

/// Serialize records. Floats use the shortest round-trip form, so reading
/// the text back reproduces every value bit-for-bit; `wall_time_ms` is
/// written as 0 to keep sweep outputs byte-deterministic.
pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut s = String::with_capacity(64 * (records.len() + 1));
    s.push_str(RECORDS_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},0",
            r.n,
            r.k,
            fmt_f64(r.kappa),
            r.family,
            r.trial_index,
            r.seed,
            fmt_f64(r.dist),
            fmt_f64(r.objective),
            fmt_f64(r.v_true),
            r.iterations,
            r.restarts_used,
            r.success,
            fmt_opt_bool(r.witness_beats),
            fmt_opt_f64(r.d1),
            fmt_opt_f64(r.d2),
        );
    }
    s
}

/// Parse records written by [`records_to_csv`].
pub fn records_from_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty records file".into()))?;
    if header != RECORDS_HEADER {
        return Err(Error::Parse(format!("unexpected records header {header:?}")));
    }
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 {
            return Err(Error::Parse(format!(
                "records line {}: expected 16 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let ctx = |what: &str| Error::Parse(format!("records line {}: bad {what}", lineno + 2));
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| ctx(what))
        };
        let parse_opt_f = |s: &str, what: &str| -> Result<Option<f64>> {
            if s.is_empty() { Ok(None) } else { parse_f(s, what).map(Some) }
        };
        let parse_b = |s: &str, what: &str| -> Result<bool> {
            match s {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(ctx(what)),
            }
        };
        out.push(TrialRecord {
            n: fields[0].parse().map_err(|_| ctx("n"))?,
            k: fields[1].parse().map_err(|_| ctx("k"))?,
            kappa: parse_f(fields[2], "kappa")?,
            family: fields[3].to_string(),
            trial_index: fields[4].parse().map_err(|_| ctx("trial_index"))?,
            seed: fields[5].parse().map_err(|_| ctx("seed"))?,
            dist: parse_f(fields[6], "dist")?,
            objective: parse_f(fields[7], "objective")?,
            v_true: parse_f(fields[8], "v_true")?,
            iterations: fields[9].parse().map_err(|_| ctx("iterations"))?,
            restarts_used: fields[10].parse().map_err(|_| ctx("restarts_used"))?,
            success: parse_b(fields[11], "success")?,
            witness_beats: if fields[12].is_empty() {
                None
            } else {
                Some(parse_b(fields[12], "witness_beats")?)
            },
            d1: parse_opt_f(fields[13], "d1")?,
            d2: parse_opt_f(fields[14], "d2")?,
            wall_time_ms: parse_f(fields[15], "wall_time_ms")?,
            error: None,
        });
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str = "n,k,kappa,family,trials,successes,success_rate,success_se,median_dist,witness_beat_rate,witness_beat_se";

/// Serialize cell summaries (same float conventions as the records).
pub fn summary_to_csv(cells: &[CellSummary]) -> String {
    let mut s = String::with_capacity(64 * (cells.len() + 1));
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for c in cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.n,
            c.k,
            fmt_f64(c.kappa),
            c.family,
            c.trials,
            c.successes,
            fmt_f64(c.success_rate),
            fmt_f64(c.success_se),
            fmt_f64(c.median_dist),
            fmt_opt_f64(c.witness_beat_rate),
            fmt_opt_f64(c.witness_beat_se),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> SweepConfig {
        SweepConfig {
            n_list: vec![16, 48],
            k_list: vec![2],
            laws: vec![KurtosisLaw::three_point(2.0).unwrap()],
            trials: 4,
            delta: 0.5,
            restarts: 3,
            base_seed: 77,
            run_witness: true,
            include_truth_restart: false,
        }
    }

    #[test]
    fn config_parses_with_defaults() {
        let text = "\
# comment line
n_list = 100, 50, 100
k_list = 3, 2
laws = three_point:2.0, gaussian
trials = 7
";
        let p = parse_sweep_config(text).unwrap();
        assert_eq!(p.n_list, vec![50, 100]);
        assert_eq!(p.k_list, vec![2, 3]);
        assert_eq!(p.laws.len(), 2);
        assert_eq!(p.trials, 7);
        assert_eq!(p.delta, 0.5);
        assert_eq!(p.restarts, 10);
        assert_eq!(p.base_seed, None);
        assert!(!p.run_witness);
        assert!(!p.include_truth_restart);
        let cfg = p.into_config(9).unwrap();
        assert_eq!(cfg.base_seed, 9);
    }

    #[test]
    fn config_full_and_seed_conflict() {
        let text = "\
n_list = 10
k_list = 2
laws = sparse_gaussian:0.75
trials = 1
delta = 0.3
restarts = 4
base_seed = 5
run_witness = true
include_truth_restart = true
";
        let p = parse_sweep_config(text).unwrap();
        assert_eq!(p.base_seed, Some(5));
        assert!(p.run_witness && p.include_truth_restart);
        assert_eq!(p.delta, 0.3);
        assert!(p.clone().into_config(5).is_ok());
        assert!(matches!(p.into_config(6), Err(Error::Parameter(_))));
    }

    #[test]
    fn config_rejects_bad_input() {
        assert!(parse_sweep_config("n_list = 10\nk_list = 2\ntrials = 1").is_err()); // laws missing
        assert!(parse_sweep_config("nlist = 10").is_err()); // unknown key
        assert!(parse_sweep_config("n_list = 10\nn_list = 20").is_err()); // duplicate
        assert!(parse_sweep_config("n_list ten").is_err()); // no '='
        assert!(parse_sweep_config("n_list = ten\nk_list=2\nlaws=gaussian\ntrials=1").is_err());
        let bad_delta = "n_list=10\nk_list=2\nlaws=gaussian\ntrials=1\ndelta=3.0";
        assert!(parse_sweep_config(bad_delta).unwrap().into_config(0).is_err());
        let zero_trials = "n_list=10\nk_list=2\nlaws=gaussian\ntrials=0";
        assert!(parse_sweep_config(zero_trials).unwrap().into_config(0).is_err());
    }

    #[test]
    fn trial_seed_depends_only_on_coordinates() {
        let law = KurtosisLaw::three_point(2.0).unwrap();
        let s1 = trial_seed(9, &law, 100, 3, 5);
        let s2 = trial_seed(9, &law, 100, 3, 5);
        assert_eq!(s1, s2);
        assert_ne!(s1, trial_seed(9, &law, 100, 3, 6));
        assert_ne!(s1, trial_seed(9, &law, 101, 3, 5));
        assert_ne!(s1, trial_seed(10, &law, 100, 3, 5));
        let gauss = KurtosisLaw::gaussian();
        assert_ne!(s1, trial_seed(9, &gauss, 100, 3, 5));
    }

    #[test]
    fn run_trial_produces_complete_records() {
        // sparse_gaussian keeps the witness block full-rank almost surely;
        // a tiny three_point block is all-zero over half the time.
        let law = KurtosisLaw::sparse_gaussian(0.75).unwrap();
        let p = TrialParams {
            n: 200,
            k: 4,
            law: law.clone(),
            delta: 0.5,
            restarts: 3,
            include_truth_restart: false,
            run_witness: true,
            trial_index: 0,
            seed: trial_seed(1, &law, 200, 4, 0),
        };
        let r = run_trial(&p);
        assert!(r.error.is_none(), "{:?}", r.error);
        assert!(r.dist.is_finite());
        assert!(r.objective.is_finite());
        assert!(r.v_true.is_finite());
        assert!(r.witness_beats.is_some());
        assert!(r.d1.unwrap() >= 0.0);
        assert!(r.d2.unwrap() >= 0.0);
        assert!(r.wall_time_ms >= 0.0);
        assert_eq!(r.kappa, 4.0);
        assert_eq!(r.family, "sparse_gaussian");
    }

    #[test]
    fn sweep_is_worker_count_invariant() {
        let cfg = tiny_config();
        let a = run_sweep(&cfg, Some(1), None).unwrap();
        let b = run_sweep(&cfg, Some(4), None).unwrap();
        assert_eq!(records_to_csv(&a), records_to_csv(&b));
        assert_eq!(summary_to_csv(&summarize(&a).unwrap()), summary_to_csv(&summarize(&b).unwrap()));
        // 2 n-values x 1 k x 1 law x 4 trials.
        assert_eq!(a.len(), 8);
    }

    #[test]
    fn sweep_skips_degenerate_cells_and_rejects_empty_grids() {
        let mut cfg = tiny_config();
        cfg.n_list = vec![2, 16];
        cfg.k_list = vec![2];
        let recs = run_sweep(&cfg, Some(1), None).unwrap();
        assert!(recs.iter().all(|r| r.n == 16), "n=2 <= k=2 must be skipped");
        cfg.n_list = vec![2];
        assert!(run_sweep(&cfg, Some(1), None).is_err());
    }

    #[test]
    fn records_csv_round_trips() {
        let cfg = tiny_config();
        let recs = run_sweep(&cfg, Some(2), None).unwrap();
        let csv = records_to_csv(&recs);
        assert!(csv.starts_with(RECORDS_HEADER));
        let back = records_from_csv(&csv).unwrap();
        assert_eq!(back.len(), recs.len());
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.dist.to_bits(), b.dist.to_bits());
            assert_eq!(a.objective.to_bits(), b.objective.to_bits());
            assert_eq!(a.v_true.to_bits(), b.v_true.to_bits());
            assert_eq!(a.witness_beats, b.witness_beats);
            assert_eq!(a.d1.map(f64::to_bits), b.d1.map(f64::to_bits));
            assert_eq!(b.wall_time_ms, 0.0);
        }
        // Writing the reloaded records reproduces the bytes.
        assert_eq!(records_to_csv(&back), csv);
        // And the reloaded summary equals the in-memory summary.
        assert_eq!(
            summary_to_csv(&summarize(&back).unwrap()),
            summary_to_csv(&summarize(&recs).unwrap())
        );
    }

    #[test]
    fn records_csv_handles_nan_and_missing_witness() {
        let mut r = run_trial(&TrialParams {
            n: 10,
            k: 2,
            law: KurtosisLaw::gaussian(),
            delta: 0.5,
            restarts: 1,
            include_truth_restart: false,
            run_witness: false,
            trial_index: 0,
            seed: 4,
        });
        r.dist = f64::NAN;
        let csv = records_to_csv(&[r]);
        let back = records_from_csv(&csv).unwrap();
        assert!(back[0].dist.is_nan());
        assert_eq!(back[0].witness_beats, None);
        assert_eq!(back[0].d1, None);
    }

    #[test]
    fn records_csv_rejects_malformed_input() {
        assert!(records_from_csv("").is_err());
        assert!(records_from_csv("wrong,header\n").is_err());
        let csv = format!("{RECORDS_HEADER}\n1,2,3\n");
        assert!(records_from_csv(&csv).is_err());
    }

    #[test]
    fn summarize_medians_and_rates() {
        let law = KurtosisLaw::gaussian();
        let base = run_trial(&TrialParams {
            n: 10,
            k: 2,
            law: law.clone(),
            delta: 0.5,
            restarts: 1,
            include_truth_restart: false,
            run_witness: false,
            trial_index: 0,
            seed: 1,
        });
        let mk = |dist: f64, success: bool, idx: usize| {
            let mut r = base.clone();
            r.dist = dist;
            r.success = success;
            r.trial_index = idx;
            r
        };
        let recs =
            vec![mk(0.1, true, 0), mk(0.2, true, 1), mk(0.3, false, 2), mk(0.4, false, 3)];
        let cells = summarize(&recs).unwrap();
        assert_eq!(cells.len(), 1);
        let c = &cells[0];
        assert_eq!(c.trials, 4);
        assert_eq!(c.successes, 2);
        assert_eq!(c.success_rate, 0.5);
        assert!((c.median_dist - 0.25).abs() <= 1e-15);
        assert!((c.success_se - (0.25f64 / 4.0).sqrt()).abs() <= 1e-15);
        assert_eq!(c.witness_beat_rate, None);

        // Odd count and NaN exclusion.
        let recs2 = vec![mk(0.1, true, 0), mk(f64::NAN, false, 1), mk(0.3, false, 2)];
        let c2 = &summarize(&recs2).unwrap()[0];
        assert!((c2.median_dist - 0.2).abs() <= 1e-15);

        assert!(summarize(&[]).is_err());
    }
}
