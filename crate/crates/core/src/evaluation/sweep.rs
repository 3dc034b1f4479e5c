//! Grid sweeps over sample count, seed, epochs and threshold.
//!
//! Each `(samples, seed)` unit trains once up to the largest epoch count and is
//! evaluated at every requested epoch along the way. Results are appended to
//! `results.csv` as they arrive, so an interrupted sweep resumes where it stopped.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::median;
use crate::manifest::{settings_hash, RunManifest};
use crate::model::generate_dataset;
use crate::pipeline::{
    correlation_for, reconstruct_and_score, CorrelationSource, GroundTruth,
    DEFAULT_BASELINE_SEEDS, DEFAULT_HIDDEN_UNITS,
};
use crate::reconstruct::ThresholdMode;
use crate::sage::{forward, init_model, train_observed, Activation, AdamConfig, SageModel};
use crate::scenario::{load_scenario, Scenario};
use crate::temporal::{build_temporal_graph, TemporalGraph};

pub const RESULTS_FILE: &str = "results.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

fn default_scenario_ref() -> String {
    "default".into()
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("sweep-out")
}
fn default_learning_rate() -> f64 {
    crate::sage::DEFAULT_LEARNING_RATE
}
fn default_workers() -> usize {
    1
}
fn default_baseline_seeds() -> u64 {
    DEFAULT_BASELINE_SEEDS
}
fn default_hidden_units() -> usize {
    DEFAULT_HIDDEN_UNITS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `"default"` or a scenario file path, relative to the config file.
    #[serde(default = "default_scenario_ref")]
    pub scenario: String,
    /// Relative to the config file.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub epochs: Vec<usize>,
    pub samples: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_baseline_seeds")]
    pub baseline_seeds: u64,
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    #[serde(default = "default_hidden_units")]
    pub hidden_units: usize,
    #[serde(default)]
    pub correlation_source: CorrelationSource,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                    format!("{origin}:{line}:{col}")
                }
                None => origin.to_string(),
            };
            Error::Parse {
                location,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate(origin)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Directory relative paths resolve against; empty for in-memory configs.
    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    pub fn resolved_output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.output_dir)
    }

    pub fn resolved_scenario(&self) -> Result<(String, Scenario)> {
        if self.scenario == "default" {
            return Ok(("default".into(), Scenario::default_scenario()));
        }
        let path = self.base_dir.join(&self.scenario);
        let scenario = load_scenario(&path)?;
        Ok((path.display().to_string(), scenario))
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let bad = |field: &str, message: String| Error::InvalidScenario {
            location: format!("{origin}: {field}"),
            message,
        };
        for (field, empty) in [
            ("epochs", self.epochs.is_empty()),
            ("samples", self.samples.is_empty()),
            ("thresholds", self.thresholds.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(bad(field, "sweep axis must not be empty".into()));
            }
        }
        if let Some(e) = self.epochs.iter().find(|&&e| e == 0) {
            return Err(bad("epochs", format!("epoch count {e} must be ≥ 1")));
        }
        if let Some(n) = self.samples.iter().find(|&&n| n < 2) {
            return Err(bad("samples", format!("sample count {n} must be ≥ 2")));
        }
        if let Some(t) = self.thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(bad("thresholds", format!("threshold {t} must lie in (0, 1)")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(bad("learning_rate", "must be positive".into()));
        }
        if self.workers == 0 {
            return Err(bad("workers", "must be ≥ 1".into()));
        }
        if self.baseline_seeds == 0 {
            return Err(bad("baseline_seeds", "must be ≥ 1".into()));
        }
        if self.hidden_units == 0 {
            return Err(bad("hidden_units", "must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.epochs.len() * self.samples.len() * self.thresholds.len() * self.seeds.len()
    }
}

/// Settings that identify one grid cell apart from its seed.
#[derive(Serialize)]
struct CellSettings<'a> {
    scenario_hash: &'a str,
    samples: usize,
    epochs: usize,
    threshold: f64,
    learning_rate: f64,
    threshold_mode: ThresholdMode,
    hidden_units: usize,
    correlation_source: CorrelationSource,
    baseline_seeds: u64,
}

/// One row of `results.csv`. Metric fields are empty when `status` is `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub config_hash: String,
    pub samples: usize,
    pub seed: u64,
    pub epochs: usize,
    pub threshold: f64,
    pub status: String,
    pub final_loss: Option<f64>,
    pub predicted_edges: Option<usize>,
    pub edge_precision: Option<f64>,
    pub edge_recall: Option<f64>,
    pub edge_f1: Option<f64>,
    pub direct_f1: Option<f64>,
    pub implicit_f1: Option<f64>,
    pub indirect_f1: Option<f64>,
    pub baseline_f1: Option<f64>,
    pub error: String,
}

impl SweepRecord {
    fn failed(config_hash: String, samples: usize, seed: u64, epochs: usize, threshold: f64, error: &Error) -> Self {
        Self {
            config_hash,
            samples,
            seed,
            epochs,
            threshold,
            status: "error".into(),
            final_loss: None,
            predicted_edges: None,
            edge_precision: None,
            edge_recall: None,
            edge_f1: None,
            direct_f1: None,
            implicit_f1: None,
            indirect_f1: None,
            baseline_f1: None,
            error: error.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Median, min and max over seeds for one `(samples, epochs, threshold)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub config_hash: String,
    pub samples: usize,
    pub epochs: usize,
    pub threshold: f64,
    pub seeds_ok: usize,
    pub seeds_failed: usize,
    pub edge_f1_median: Option<f64>,
    pub edge_f1_min: Option<f64>,
    pub edge_f1_max: Option<f64>,
    pub direct_f1_median: Option<f64>,
    pub implicit_f1_median: Option<f64>,
    pub implicit_f1_min: Option<f64>,
    pub implicit_f1_max: Option<f64>,
    pub indirect_f1_median: Option<f64>,
    pub indirect_f1_min: Option<f64>,
    pub indirect_f1_max: Option<f64>,
    pub baseline_f1_median: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub output_dir: PathBuf,
    pub records_written: usize,
    pub records_skipped: usize,
    pub failures: usize,
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<AggregateRow>,
}

struct Plan<'a> {
    cfg: &'a SweepConfig,
    scenario: &'a Scenario,
    scenario_hash: String,
    truth: GroundTruth,
    done: BTreeSet<(String, u64)>,
}

impl Plan<'_> {
    fn config_hash(&self, samples: usize, epochs: usize, threshold: f64) -> String {
        settings_hash(&CellSettings {
            scenario_hash: &self.scenario_hash,
            samples,
            epochs,
            threshold,
            learning_rate: self.cfg.learning_rate,
            threshold_mode: self.cfg.threshold_mode,
            hidden_units: self.cfg.hidden_units,
            correlation_source: self.cfg.correlation_source,
            baseline_seeds: self.cfg.baseline_seeds,
        })
    }

    fn pending(&self, samples: usize, seed: u64, epochs: usize) -> Vec<(f64, String)> {
        self.cfg
            .thresholds
            .iter()
            .map(|&t| (t, self.config_hash(samples, epochs, t)))
            .filter(|(_, h)| !self.done.contains(&(h.clone(), seed)))
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate_checkpoint(
        &self,
        samples: usize,
        seed: u64,
        epochs: usize,
        model: &SageModel,
        temporal: &TemporalGraph,
        final_loss: f64,
        pending: Vec<(f64, String)>,
        emit: &impl Fn(SweepRecord) -> Result<()>,
    ) -> Result<()> {
        let correlation = forward(model, temporal)
            .and_then(|emb| correlation_for(self.cfg.correlation_source, temporal, &emb));
        for (threshold, hash) in pending {
            let scored = correlation.as_ref().map_err(clone_error).and_then(|c| {
                reconstruct_and_score(
                    self.scenario,
                    &self.truth,
                    c.clone(),
                    threshold,
                    self.cfg.threshold_mode,
                    self.cfg.baseline_seeds,
                )
            });
            let record = match scored {
                Ok(rec) => {
                    let ev = rec.evaluation;
                    SweepRecord {
                        config_hash: hash,
                        samples,
                        seed,
                        epochs,
                        threshold,
                        status: "ok".into(),
                        final_loss: Some(final_loss),
                        predicted_edges: Some(ev.predicted_edges),
                        edge_precision: Some(ev.edge.precision),
                        edge_recall: Some(ev.edge.recall),
                        edge_f1: Some(ev.edge.f1),
                        direct_f1: Some(ev.direct.f1),
                        implicit_f1: Some(ev.implicit.f1),
                        indirect_f1: Some(ev.indirect.f1),
                        baseline_f1: Some(ev.baseline_f1),
                        error: String::new(),
                    }
                }
                Err(e) => SweepRecord::failed(hash, samples, seed, epochs, threshold, &e),
            };
            emit(record)?;
        }
        Ok(())
    }

    /// Trains one `(samples, seed)` unit and emits a record for every pending cell.
    fn run_unit(&self, samples: usize, seed: u64, emit: &impl Fn(SweepRecord) -> Result<()>) -> Result<()> {
        let checkpoints: BTreeMap<usize, Vec<(f64, String)>> = self
            .cfg
            .epochs
            .iter()
            .map(|&e| (e, self.pending(samples, seed, e)))
            .filter(|(_, p)| !p.is_empty())
            .collect();
        let Some(&max_epochs) = checkpoints.keys().next_back() else {
            return Ok(());
        };
        let fail_all = |from: usize, err: &Error| -> Result<()> {
            for (&e, pending) in checkpoints.range(from..) {
                for (t, h) in pending {
                    emit(SweepRecord::failed(h.clone(), samples, seed, e, *t, err))?;
                }
            }
            Ok(())
        };
        let prepared = generate_dataset(self.scenario, samples, seed)
            .and_then(|d| build_temporal_graph(&d))
            .and_then(|g| {
                let dims = [self.scenario.feature_count(), self.cfg.hidden_units, self.scenario.feature_count()];
                let m = init_model(&dims, seed)?.with_activations(Activation::Relu, Activation::Identity);
                Ok((g, m))
            });
        let (temporal, model) = match prepared {
            Ok(p) => p,
            Err(e) => return fail_all(0, &e),
        };
        let mut reached = 0;
        let mut last_loss = f64::NAN;
        let outcome = train_observed(
            model,
            &temporal,
            max_epochs,
            AdamConfig::with_learning_rate(self.cfg.learning_rate),
            |epoch, m| {
                reached = epoch;
                if let Some(pending) = checkpoints.get(&epoch) {
                    // loss of the updated weights, matching a fresh run of `epoch` epochs
                    last_loss = forward(m, &temporal)
                        .and_then(|emb| crate::sage::mse_loss(&emb, &temporal))
                        .unwrap_or(f64::NAN);
                    self.evaluate_checkpoint(samples, seed, epoch, m, &temporal, last_loss, pending.clone(), emit)?;
                }
                Ok(())
            },
        );
        match outcome {
            Ok(_) => Ok(()),
            Err(e @ Error::Io { .. }) | Err(e @ Error::Csv(_)) => Err(e),
            Err(e) => fail_all(reached + 1, &e),
        }
    }
}

fn clone_error(e: &Error) -> Error {
    Error::InvalidArgument(e.to_string())
}

fn read_records(path: &Path) -> Result<Vec<SweepRecord>> {
    if !path.exists() || std::fs::metadata(path).map_err(|e| Error::io(path, e))?.len() == 0 {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize().map(|r| r.map_err(Error::from)).collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut w = csv::Writer::from_path(&tmp)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Groups records by cell and summarizes over seeds, ordered by `(samples, epochs, threshold)`.
pub fn aggregate(records: &[SweepRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(usize, usize, u64, String), Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.samples, r.epochs, r.threshold.to_bits(), r.config_hash.clone()))
            .or_default()
            .push(r);
    }
    cells
        .into_iter()
        .map(|((samples, epochs, _, config_hash), rs)| {
            let ok: Vec<&SweepRecord> = rs.iter().copied().filter(|r| r.is_ok()).collect();
            let col = |f: fn(&SweepRecord) -> Option<f64>| -> Vec<f64> { ok.iter().filter_map(|r| f(r)).collect() };
            let min = |v: &[f64]| v.iter().copied().reduce(f64::min);
            let max = |v: &[f64]| v.iter().copied().reduce(f64::max);
            let edge = col(|r| r.edge_f1);
            let implicit = col(|r| r.implicit_f1);
            let indirect = col(|r| r.indirect_f1);
            AggregateRow {
                config_hash,
                samples,
                epochs,
                threshold: rs[0].threshold,
                seeds_ok: ok.len(),
                seeds_failed: rs.len() - ok.len(),
                edge_f1_median: median(&edge),
                edge_f1_min: min(&edge),
                edge_f1_max: max(&edge),
                direct_f1_median: median(&col(|r| r.direct_f1)),
                implicit_f1_median: median(&implicit),
                implicit_f1_min: min(&implicit),
                implicit_f1_max: max(&implicit),
                indirect_f1_median: median(&indirect),
                indirect_f1_min: min(&indirect),
                indirect_f1_max: max(&indirect),
                baseline_f1_median: median(&col(|r| r.baseline_f1)),
            }
        })
        .collect()
}

/// Runs every pending cell of `cfg`, then rewrites `results.csv` in sorted order and
/// writes `aggregate.csv` and `manifest.json`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    let (scenario_source, scenario) = cfg.resolved_scenario()?;
    let out_dir = cfg.resolved_output_dir();
    std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let results_path = out_dir.join(RESULTS_FILE);

    let existing = read_records(&results_path)?;
    let plan = Plan {
        cfg,
        scenario: &scenario,
        scenario_hash: scenario.hash(),
        truth: GroundTruth::for_scenario(&scenario),
        done: existing.iter().map(|r| (r.config_hash.clone(), r.seed)).collect(),
    };
    let expected: BTreeSet<(String, u64)> = cfg
        .samples
        .iter()
        .flat_map(|&n| cfg.epochs.iter().map(move |&e| (n, e)))
        .flat_map(|(n, e)| cfg.thresholds.iter().map(move |&t| (n, e, t)))
        .flat_map(|(n, e, t)| {
            let h = plan.config_hash(n, e, t);
            cfg.seeds.iter().map(move |&s| (h.clone(), s))
        })
        .collect();
    let records_skipped = expected.intersection(&plan.done).count();

    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&results_path)
        .map_err(|e| Error::io(&results_path, e))?;
    let writer = Mutex::new((
        csv::WriterBuilder::new().has_headers(existing.is_empty()).from_writer(file),
        0usize,
        0usize,
    ));
    let emit = |record: SweepRecord| -> Result<()> {
        let mut guard = writer.lock().expect("results writer poisoned");
        let (w, written, failed) = &mut *guard;
        w.serialize(&record)?;
        w.flush().map_err(|e| Error::io(&results_path, e))?;
        *written += 1;
        if !record.is_ok() {
            *failed += 1;
        }
        Ok(())
    };

    let units: Vec<(usize, u64)> = cfg
        .samples
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
    pool.install(|| {
        units
            .par_iter()
            .try_for_each(|&(n, s)| plan.run_unit(n, s, &emit))
    })?;
    let (_, records_written, failures) = writer.into_inner().expect("results writer poisoned");

    let mut records: Vec<SweepRecord> = read_records(&results_path)?
        .into_iter()
        .filter(|r| expected.contains(&(r.config_hash.clone(), r.seed)))
        .collect();
    records.sort_by(|a, b| {
        (a.samples, a.epochs, a.seed)
            .cmp(&(b.samples, b.epochs, b.seed))
            .then(a.threshold.total_cmp(&b.threshold))
    });
    records.dedup_by(|a, b| a.config_hash == b.config_hash && a.seed == b.seed);
    write_csv(&results_path, &records)?;
    let aggregates = aggregate(&records);
    write_csv(&out_dir.join(AGGREGATE_FILE), &aggregates)?;

    let mut manifest = RunManifest::new("sweep", &scenario_source, &plan.scenario_hash);
    manifest.hyperparameters = None;
    manifest.threshold_mode = Some(cfg.threshold_mode);
    manifest.correlation_source = Some(cfg.correlation_source.as_str().into());
    manifest.seal_run_id();
    manifest.record_existing(&out_dir, RESULTS_FILE)?;
    manifest.record_existing(&out_dir, AGGREGATE_FILE)?;
    let config_json = serde_json::to_string_pretty(cfg)? + "\n";
    manifest.write_artifact(&out_dir, "sweep-config.json", config_json.as_bytes())?;
    manifest.finish(&out_dir)?;

    Ok(SweepResult {
        output_dir: out_dir,
        records_written,
        records_skipped,
        failures,
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_pipeline, RunConfig};

    fn tiny(dir: &Path) -> SweepConfig {
        SweepConfig::from_toml_str(
            "epochs = [3, 6]\nsamples = [40]\nthresholds = [0.3, 0.6]\nseeds = [0, 1]\nbaseline_seeds = 5\nworkers = 2\n",
            "tiny.toml",
        )
        .unwrap()
        .with_base_dir(dir)
    }

    #[test]
    fn empty_axis_rejected() {
        let err = SweepConfig::from_toml_str(
            "epochs = []\nsamples = [10]\nthresholds = [0.5]\nseeds = [0]\n",
            "s.toml",
        )
        .unwrap_err();
        assert!(err.to_string().contains("epochs"), "{err}");
    }

    #[test]
    fn parse_error_has_location() {
        let err = SweepConfig::from_toml_str("epochs = [1,\nsamples = ", "s.toml").unwrap_err();
        assert!(err.to_string().starts_with("s.toml:"), "{err}");
    }

    #[test]
    fn checkpoints_match_independent_runs() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_sweep(&tiny(dir.path())).unwrap();
        assert_eq!(res.records.len(), 8);
        assert_eq!(res.failures, 0);
        let r = res
            .records
            .iter()
            .find(|r| r.seed == 1 && r.epochs == 3 && r.threshold == 0.3)
            .unwrap();
        let cfg = RunConfig {
            samples: 40,
            seed: 1,
            epochs: 3,
            threshold: 0.3,
            baseline_seeds: 5,
            ..RunConfig::default()
        };
        let ev = run_pipeline(&Scenario::default_scenario(), &cfg)
            .unwrap()
            .reconstruction
            .evaluation;
        assert_eq!(r.edge_f1, Some(ev.edge.f1));
        assert_eq!(r.indirect_f1, Some(ev.indirect.f1));
        assert_eq!(r.baseline_f1, Some(ev.baseline_f1));
        assert_eq!(res.aggregates.len(), 4);
        assert!(res.aggregates.iter().all(|a| a.seeds_ok == 2));
    }

    #[test]
    fn resume_skips_recorded_cells() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let first = run_sweep(&cfg).unwrap();
        let results = std::fs::read(dir.path().join("sweep-out").join(RESULTS_FILE)).unwrap();
        let second = run_sweep(&cfg).unwrap();
        assert_eq!(second.records_written, 0);
        assert_eq!(second.records_skipped, 8);
        assert_eq!(first.records, second.records);
        let again = std::fs::read(dir.path().join("sweep-out").join(RESULTS_FILE)).unwrap();
        assert_eq!(results, again);
    }

    #[test]
    fn partial_results_are_completed() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = tiny(dir.path());
        let full = run_sweep(&cfg).unwrap();
        let path = dir.path().join("sweep-out").join(RESULTS_FILE);
        let text = std::fs::read_to_string(&path).unwrap();
        let kept: Vec<&str> = text.lines().take(4).collect();
        std::fs::write(&path, kept.join("\n") + "\n").unwrap();
        let resumed = run_sweep(&cfg).unwrap();
        assert_eq!(resumed.records_skipped, 3);
        assert_eq!(resumed.records_written, 5);
        assert_eq!(resumed.records, full.records);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut one = tiny(a.path());
        one.workers = 1;
        let ra = run_sweep(&one).unwrap();
        let rb = run_sweep(&tiny(b.path())).unwrap();
        assert_eq!(ra.records, rb.records);
    }

    #[test]
    fn config_hash_excludes_seed() {
        let dir = tempfile::tempdir().unwrap();
        let res = run_sweep(&tiny(dir.path())).unwrap();
        let hashes: BTreeSet<_> = res.records.iter().map(|r| r.config_hash.clone()).collect();
        assert_eq!(hashes.len(), 4);
    }
}
