//! Seeded Monte Carlo sweeps over `G(n, p)` with `p = C·n^{exponent}`.
//!
//! Each trial samples a graph, optionally replaces it by its `ℓ`-clean
//! subgraph, colours it with the configured adversary and evaluates a
//! predicate. A success therefore means "this adversary failed on this
//! graph"; the sweep does not decide the canonical arrow for the sampled
//! graph, which would require beating every colouring.

use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{generate_colouring, AdversarySpec};
use crate::graph::{gnp_generate, GraphError, OrderedGraph, Vertex};
use crate::rng::mix_seed;
use crate::search::{arrows_mono, find_canonical_copy, find_rainbow_copy, ArrowQuery, ArrowVerdict, SearchError, DEFAULT_NODE_BUDGET};

/// `z` for the two-sided 95% Wilson interval.
pub const WILSON_Z: f64 = 1.96;

/// Pattern label stored when the arrow solver hit its node budget.
pub const RESOURCE_LIMIT_PATTERN: &str = "resource_limit";

/// One-line caveat written at the top of every CSV.
pub const OUTPUT_NOTE: &str =
    "found = the predicate held against this adversary's colouring; it does not decide the canonical arrow for the sampled graph";

const ADVERSARY_SALT: u64 = 0xAD7E_5A41;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("corollary verification needs a clean_mode sweep")]
    WrongMode,
    #[error("invariant breach at n={n}, trial={trial}, seed={seed}: {what}")]
    InvariantBreach {
        n: usize,
        trial: usize,
        seed: u64,
        what: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Exponent of `n` in the edge probability.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMode {
    /// `−2/(ℓ+1)`.
    Canonical,
    /// `−(2ℓ−2)/(ℓ²+ℓ−4)`.
    UpperWindow,
}

impl ExponentMode {
    pub fn exponent(self, ell: usize) -> f64 {
        let l = ell as f64;
        match self {
            ExponentMode::Canonical => -2.0 / (l + 1.0),
            ExponentMode::UpperWindow => -(2.0 * l - 2.0) / (l * l + l - 4.0),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Predicate {
    /// A rainbow `K_ℓ` exists in the adversary's colouring.
    #[serde(rename = "rainbow")]
    Rainbow,
    /// A canonical `K_ℓ` exists in the adversary's colouring.
    #[serde(rename = "canonical")]
    Canonical,
    /// `G → (K_ℓ)_2`; the adversary is not consulted.
    #[serde(rename = "mono_after_2colour")]
    MonoAfter2Colour,
}

fn default_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ell: usize,
    pub n_grid: Vec<usize>,
    pub c_grid: Vec<f64>,
    pub exponent_mode: ExponentMode,
    /// Kind and parameters; its seed is mixed into every per-trial seed.
    pub adversary: AdversarySpec,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub clean_mode: bool,
    pub predicate: Predicate,
    /// Node budget for the arrow solver.
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.ell < 3 {
            return bad(format!("ell = {} must be at least 3", self.ell));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.c_grid.is_empty() {
            return bad("n_grid and c_grid must be non-empty".into());
        }
        if let Some(n) = self.n_grid.iter().find(|&&n| n == 0) {
            return bad(format!("n = {n} in n_grid"));
        }
        if let Some(c) = self.c_grid.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return bad(format!("C = {c} must be positive and finite"));
        }
        if self.budget == 0 {
            return bad("budget must be at least 1".into());
        }
        Ok(())
    }

    /// `(p, clamped)` for the cell `(n, C)`.
    pub fn cell_probability(&self, n: usize, c: f64) -> (f64, bool) {
        let raw = c * (n as f64).powf(self.exponent_mode.exponent(self.ell));
        let p = raw.clamp(0.0, 1.0);
        (p, p != raw)
    }

    /// Seed of trial `trial` in cell `(n, c_grid[c_index])`.
    pub fn trial_seed(&self, n: usize, c_index: usize, trial: usize) -> u64 {
        mix_seed(&[self.master_seed, n as u64, c_index as u64, trial as u64])
    }
}

/// One trial, as emitted in the CSV (minus `witness`, which is JSON-only).
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub ell: usize,
    pub n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    pub adversary: String,
    pub clean: bool,
    pub trial: usize,
    pub seed: u64,
    pub found: bool,
    pub pattern: Option<String>,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<Vertex>>,
}

impl TrialRecord {
    pub fn hit_resource_limit(&self) -> bool {
        self.pattern.as_deref() == Some(RESOURCE_LIMIT_PATTERN)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    ell: usize,
    n: usize,
    #[serde(rename = "C")]
    c: f64,
    p: f64,
    adversary: &'a str,
    clean: bool,
    trial: usize,
    seed: u64,
    found: bool,
    pattern: &'a str,
    elapsed_ms: u64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct CellSummary {
    pub ell: usize,
    pub n: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub p: f64,
    pub adversary: String,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SweepOutput {
    pub note: String,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<CellSummary>,
}

/// Wilson score interval at `z = 1.96`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials, "need 0 <= successes <= trials, trials >= 1");
    let t = trials as f64;
    let ph = successes as f64 / t;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / t;
    let centre = (ph + z2 / (2.0 * t)) / denom;
    let half = WILSON_Z * (ph * (1.0 - ph) / t + z2 / (4.0 * t * t)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

struct Job {
    n_index: usize,
    c_index: usize,
    trial: usize,
}

/// Runs every trial on the global rayon pool.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput, HarnessError> {
    config.validate()?;
    for &n in &config.n_grid {
        for &c in &config.c_grid {
            if config.cell_probability(n, c).1 {
                log::warn!("p = {c}·{n}^{:.4} clamped to [0, 1]", config.exponent_mode.exponent(config.ell));
            }
        }
    }
    let jobs: Vec<Job> = (0..config.n_grid.len())
        .flat_map(|n_index| {
            (0..config.c_grid.len())
                .flat_map(move |c_index| (0..config.trials).map(move |trial| Job { n_index, c_index, trial }))
        })
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|job| run_trial(config, job))
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by_key(|r| {
        let ni = config.n_grid.iter().position(|&n| n == r.n).unwrap_or(usize::MAX);
        let ci = config.c_grid.iter().position(|&c| c == r.c).unwrap_or(usize::MAX);
        (ni, ci, r.trial)
    });
    let summary = summarise(config, &records);
    Ok(SweepOutput {
        note: OUTPUT_NOTE.into(),
        config: config.clone(),
        records,
        summary,
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(config: &ExperimentConfig, threads: usize) -> Result<SweepOutput, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(config))
}

fn run_trial(config: &ExperimentConfig, job: &Job) -> Result<TrialRecord, HarnessError> {
    let start = Instant::now();
    let n = config.n_grid[job.n_index];
    let c = config.c_grid[job.c_index];
    let (p, _) = config.cell_probability(n, c);
    let seed = config.trial_seed(n, job.c_index, job.trial);
    let mut graph = gnp_generate(n, p, seed)?.graph;
    if config.clean_mode {
        graph = graph.clean_subgraph(config.ell)?;
    }
    let spec = config.adversary.with_seed(mix_seed(&[seed, config.adversary.seed, ADVERSARY_SALT]));
    let (found, pattern, witness) = evaluate(config, &graph, &spec)?;
    Ok(TrialRecord {
        ell: config.ell,
        n,
        c,
        p,
        adversary: config.adversary.kind.to_string(),
        clean: config.clean_mode,
        trial: job.trial,
        seed,
        found,
        pattern,
        elapsed_ms: start.elapsed().as_millis() as u64,
        witness,
    })
}

type Evaluation = (bool, Option<String>, Option<Vec<Vertex>>);

fn evaluate(config: &ExperimentConfig, g: &OrderedGraph, spec: &AdversarySpec) -> Result<Evaluation, HarnessError> {
    let ell = config.ell;
    let outcome = match config.predicate {
        Predicate::MonoAfter2Colour => {
            return Ok(match arrows_mono(g, ArrowQuery::new(ell, 2)?, config.budget)? {
                ArrowVerdict::Arrows { .. } => (true, Some("arrows".into()), None),
                ArrowVerdict::Avoided { .. } => (false, None, None),
                ArrowVerdict::ResourceLimit { .. } => (false, Some(RESOURCE_LIMIT_PATTERN.into()), None),
            });
        }
        Predicate::Rainbow => find_rainbow_copy(&generate_colouring(g, spec), ell, None)?,
        Predicate::Canonical => find_canonical_copy(&generate_colouring(g, spec), ell, None)?,
    };
    Ok(match outcome.witness {
        Some(w) => {
            let tag = match config.predicate {
                Predicate::Rainbow => "rainbow",
                _ => w.tags.primary().map_or("none", |t| t.name()),
            };
            (true, Some(tag.into()), Some(w.vertices))
        }
        None => (false, None, None),
    })
}

fn summarise(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut out: Vec<CellSummary> = Vec::new();
    for r in records {
        match out.last_mut() {
            Some(cell) if cell.n == r.n && cell.c == r.c => {
                cell.trials += 1;
                cell.successes += r.found as usize;
            }
            _ => out.push(CellSummary {
                ell: config.ell,
                n: r.n,
                c: r.c,
                p: r.p,
                adversary: r.adversary.clone(),
                trials: 1,
                successes: r.found as usize,
                p_hat: 0.0,
                ci_lo: 0.0,
                ci_hi: 0.0,
            }),
        }
    }
    for cell in &mut out {
        cell.p_hat = cell.successes as f64 / cell.trials as f64;
        (cell.ci_lo, cell.ci_hi) = wilson_interval(cell.successes, cell.trials);
    }
    out
}

/// Per-trial CSV, preceded by a `#` comment line carrying [`OUTPUT_NOTE`].
pub fn write_records_csv(records: &[TrialRecord], mut out: impl Write) -> Result<(), HarnessError> {
    writeln!(out, "# {OUTPUT_NOTE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(CsvRow {
            ell: r.ell,
            n: r.n,
            c: r.c,
            p: r.p,
            adversary: &r.adversary,
            clean: r.clean,
            trial: r.trial,
            seed: r.seed,
            found: r.found,
            pattern: r.pattern.as_deref().unwrap_or(""),
            elapsed_ms: r.elapsed_ms,
        })?;
    }
    if records.is_empty() {
        w.write_record(["ell", "n", "C", "p", "adversary", "clean", "trial", "seed", "found", "pattern", "elapsed_ms"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary_csv(summary: &[CellSummary], out: impl Write) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for cell in summary {
        w.serialize(cell)?;
    }
    if summary.is_empty() {
        w.write_record(["ell", "n", "C", "p", "adversary", "trials", "successes", "p_hat", "ci_lo", "ci_hi"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(output: &SweepOutput, mut out: impl Write) -> Result<(), HarnessError> {
    serde_json::to_writer_pretty(&mut out, output)?;
    writeln!(out)?;
    Ok(())
}

/// What [`verify_corollary_mode`] checked.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct CorollaryReport {
    pub trials_checked: usize,
    pub witnesses_checked: usize,
    /// `K_ℓ` copies inspected across all cleaned graphs.
    pub cliques_checked: u128,
}

/// Regenerates and cleans the graph behind every record, then re-asserts that
/// it is `K_{ℓ+1}`-free (for `ℓ ≥ 4`), that no two `K_ℓ`'s share three vertices, and that the
/// recorded witness is a clique of the cleaned graph.
pub fn verify_corollary_mode(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<CorollaryReport, HarnessError> {
    if !config.clean_mode {
        return Err(HarnessError::WrongMode);
    }
    let ell = config.ell;
    let mut report = CorollaryReport::default();
    for r in records {
        if !r.clean {
            return Err(HarnessError::WrongMode);
        }
        let breach = |what: String| HarnessError::InvariantBreach {
            n: r.n,
            trial: r.trial,
            seed: r.seed,
            what,
        };
        let cleaned = gnp_generate(r.n, r.p, r.seed)?.graph.clean_subgraph(ell)?;
        // Two triangles never share three vertices, so K_4-freeness needs ell >= 4.
        if let Some(big) = cleaned.cliques(ell + 1, None)?.next().filter(|_| ell >= 4) {
            return Err(breach(format!("cleaned graph contains K_{} on {big:?}", ell + 1)));
        }
        let mut owner: HashMap<[Vertex; 3], Vec<Vertex>> = HashMap::new();
        for clique in cleaned.cliques(ell, None)? {
            report.cliques_checked += 1;
            for i in 0..ell {
                for j in i + 1..ell {
                    for k in j + 1..ell {
                        let key = [clique[i], clique[j], clique[k]];
                        if let Some(prev) = owner.insert(key, clique.clone()) {
                            return Err(breach(format!("K_{ell}'s {prev:?} and {clique:?} share {key:?}")));
                        }
                    }
                }
            }
        }
        if let Some(w) = &r.witness {
            if !cleaned.is_clique(w) {
                return Err(breach(format!("witness {w:?} is not a clique of the cleaned graph")));
            }
            report.witnesses_checked += 1;
        }
        report.trials_checked += 1;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AdversaryKind;

    fn config(kind: AdversaryKind, predicate: Predicate) -> ExperimentConfig {
        ExperimentConfig {
            ell: 4,
            n_grid: vec![20, 30],
            c_grid: vec![0.5, 2.0],
            exponent_mode: ExponentMode::Canonical,
            adversary: AdversarySpec::new(kind, 0).unwrap(),
            trials: 6,
            master_seed: 1,
            clean_mode: false,
            predicate,
            budget: 10_000,
        }
    }

    #[test]
    fn wilson_examples() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        // z²/(n + z²)
        assert!((hi - 3.8416 / 103.8416).abs() < 1e-12);
        let (lo, hi) = wilson_interval(100, 100);
        assert_eq!(hi, 1.0);
        assert!((lo - 100.0 / 103.8416).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exponents() {
        assert_eq!(ExponentMode::Canonical.exponent(4), -0.4);
        assert!((ExponentMode::UpperWindow.exponent(4) - (-6.0 / 16.0)).abs() < 1e-15);
        let c = config(AdversaryKind::Injective, Predicate::Rainbow);
        assert_eq!(c.cell_probability(60, 1e6), (1.0, true));
        let (p, clamped) = c.cell_probability(32, 1.0);
        assert!(!clamped);
        assert!((p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn config_json_round_trip() {
        let text = r#"{"ell":4,"n_grid":[60],"c_grid":[1e9],"exponent_mode":"canonical",
            "adversary":{"kind":"random","r":3},"trials":2,"master_seed":5,
            "clean_mode":false,"predicate":"mono_after_2colour"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.adversary.kind, AdversaryKind::RandomR(3));
        assert_eq!(c.budget, DEFAULT_NODE_BUDGET);
        assert_eq!(c.predicate, Predicate::MonoAfter2Colour);
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
        assert!(ExperimentConfig::from_json(&text.replace("\"trials\":2", "\"trials\":0")).is_err());
        assert!(ExperimentConfig::from_json(&text.replace("[1e9]", "[-1]")).is_err());
    }

    #[test]
    fn trivial_corners() {
        let mut c = config(AdversaryKind::Injective, Predicate::Rainbow);
        c.n_grid = vec![12];
        c.c_grid = vec![1e9, 1e-9];
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.summary.len(), 2);
        assert_eq!(out.summary[0].p, 1.0);
        assert_eq!(out.summary[0].successes, c.trials);
        assert_eq!(out.summary[1].successes, 0);
        assert!(out.records[..c.trials].iter().all(|r| r.pattern.as_deref() == Some("rainbow")));
    }

    #[test]
    fn seeds_are_per_cell_and_stable() {
        let c = config(AdversaryKind::GreedyProper, Predicate::Rainbow);
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.records.len(), 24);
        for r in &out.records {
            let ci = c.c_grid.iter().position(|&x| x == r.c).unwrap();
            assert_eq!(r.seed, c.trial_seed(r.n, ci, r.trial));
        }
        let keys: Vec<_> = out.records.iter().map(|r| (r.n, r.c.to_bits(), r.trial)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn serial_and_parallel_agree() {
        let c = config(AdversaryKind::RandomR(3), Predicate::Canonical);
        let strip = |o: SweepOutput| {
            o.records
                .into_iter()
                .map(|r| TrialRecord { elapsed_ms: 0, ..r })
                .collect::<Vec<_>>()
        };
        let a = strip(run_sweep_with_threads(&c, 1).unwrap());
        let b = strip(run_sweep_with_threads(&c, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn injective_dominates_greedy_proper() {
        let inj = run_sweep(&config(AdversaryKind::Injective, Predicate::Rainbow)).unwrap();
        let greedy = run_sweep(&config(AdversaryKind::GreedyProper, Predicate::Rainbow)).unwrap();
        for (a, b) in inj.records.iter().zip(&greedy.records) {
            assert_eq!(a.seed, b.seed);
            assert!(a.found || !b.found);
        }
    }

    #[test]
    fn resource_limit_is_recorded_not_fatal() {
        let mut c = config(AdversaryKind::Injective, Predicate::MonoAfter2Colour);
        c.ell = 3;
        c.n_grid = vec![8];
        c.c_grid = vec![1e9];
        c.trials = 2;
        c.budget = 5;
        let out = run_sweep(&c).unwrap();
        assert!(out.records.iter().all(|r| r.hit_resource_limit() && !r.found));
        c.budget = DEFAULT_NODE_BUDGET;
        let out = run_sweep(&c).unwrap();
        assert!(out.records.iter().all(|r| r.found && r.pattern.as_deref() == Some("arrows")));
    }

    #[test]
    fn csv_layout() {
        let mut c = config(AdversaryKind::GreedyProper, Predicate::Rainbow);
        c.trials = 2;
        let out = run_sweep(&c).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&out.records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# "));
        assert_eq!(lines.next().unwrap(), "ell,n,C,p,adversary,clean,trial,seed,found,pattern,elapsed_ms");
        assert_eq!(lines.count(), 8);

        let mut buf = Vec::new();
        write_summary_csv(&out.summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "ell,n,C,p,adversary,trials,successes,p_hat,ci_lo,ci_hi");
        assert_eq!(text.lines().count(), 5);

        let mut buf = Vec::new();
        write_records_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn corollary_mode_checks() {
        let mut c = config(AdversaryKind::Injective, Predicate::Rainbow);
        assert!(matches!(verify_corollary_mode(&c, &[]), Err(HarnessError::WrongMode)));
        c.clean_mode = true;
        assert_eq!(verify_corollary_mode(&c, &[]).unwrap(), CorollaryReport::default());
        c.c_grid = vec![2.5];
        let out = run_sweep(&c).unwrap();
        let report = verify_corollary_mode(&c, &out.records).unwrap();
        assert_eq!(report.trials_checked, 12);
        assert_eq!(report.witnesses_checked, out.records.iter().filter(|r| r.found).count());

        let mut forged = out.records[0].clone();
        forged.witness = Some(vec![1, 2, 3, 4]);
        forged.p = 1.0;
        assert!(matches!(
            verify_corollary_mode(&c, &[forged]),
            Err(HarnessError::InvariantBreach { .. })
        ));
    }
}
