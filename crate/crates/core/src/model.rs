//! Structural KPI model, parameter sampling and synthetic telemetry datasets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::matrix::Matrix;
use crate::scenario::{ModelId, Scenario};

/// Relative margin kept above each parameter's lower bound when sampling.
pub const LOWER_BOUND_MARGIN: f64 = 1e-3;

/// One value per declared parameter, in declared order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector(pub Vec<f64>);

/// One value per structural equation, in equation order (K1, K2, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiVector(pub Vec<f64>);

/// A variable appearing on the right-hand side of a structural equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Symbol {
    /// Parameter slot (0-based: `Param(0)` is P1).
    Param(usize),
    /// Equation slot of another KPI (0-based: `Kpi(0)` is K1).
    Kpi(usize),
}

/// Right-hand-side variables of each equation of `model`, in equation order.
pub fn structural_dependencies(model: ModelId) -> &'static [&'static [Symbol]] {
    use Symbol::{Kpi, Param};
    match model {
        ModelId::Gaussian4Kpi => &[
            &[Param(0), Param(1)],
            &[Param(0), Param(2)],
            &[Param(3), Param(4), Kpi(0)],
            &[Param(6), Param(5), Kpi(1)],
        ],
    }
}

/// Draws every parameter independently and uniformly from `(lower + ε, upper]`
/// with `ε = LOWER_BOUND_MARGIN · (upper − lower)`.
pub fn sample_parameters<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> ParameterVector {
    let values = scenario
        .parameters()
        .iter()
        .map(|p| {
            let lo = p.lower + LOWER_BOUND_MARGIN * p.range();
            let width = p.upper - lo;
            loop {
                // u ∈ [0, 1) maps onto (lo, upper]; redraw on the rare rounding onto lo.
                let u: f64 = rng.random();
                let v = p.upper - u * width;
                if v > lo {
                    break v;
                }
            }
        })
        .collect();
    ParameterVector(values)
}

#[inline]
fn gaussian(center_offset: f64, width_param: f64) -> f64 {
    let denom = 2.0 * width_param;
    (-(center_offset * center_offset) / (denom * denom)).exp()
}

/// Evaluates the four-KPI Gaussian model. K1 and K2 are computed before the
/// equations that consume them.
pub fn evaluate_kpis(params: &ParameterVector) -> Result<KpiVector> {
    let p = &params.0;
    if p.len() != 7 {
        return Err(Error::DimensionMismatch(format!(
            "gaussian-4kpi expects 7 parameters, got {}",
            p.len()
        )));
    }
    for slot in [1usize, 2, 4, 5] {
        let v = p[slot];
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!(
                "P{} = {v} must be strictly positive and finite",
                slot + 1
            )));
        }
    }
    let k1 = 0.5 * gaussian(p[0] + 50.0, p[1]);
    let k2 = gaussian(p[0] - 50.0, p[2]);
    let k3 = gaussian(p[3] + k1, p[4]);
    let k4 = gaussian(p[6] + k2, p[5]);
    Ok(KpiVector(vec![k1, k2, k3, k4]))
}

/// Recorded alongside every dataset CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub seed: u64,
    pub scenario_hash: String,
    pub samples: usize,
    pub model_id: String,
    pub feature_names: Vec<String>,
}

/// T i.i.d. samples arranged as a time series. Row t = parameters ‖ KPIs in
/// declared order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesDataset {
    feature_names: Vec<String>,
    parameter_count: usize,
    rows: Matrix,
    seed: u64,
    scenario_hash: String,
}

impl TimeSeriesDataset {
    pub fn new(
        feature_names: Vec<String>,
        parameter_count: usize,
        rows: Matrix,
        seed: u64,
        scenario_hash: String,
    ) -> Result<Self> {
        if rows.cols() != feature_names.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                rows.cols()
            )));
        }
        if parameter_count > feature_names.len() {
            return Err(Error::DimensionMismatch(
                "more parameters than features".into(),
            ));
        }
        Ok(Self {
            feature_names,
            parameter_count,
            rows,
            seed,
            scenario_hash,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.rows() == 0
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_count
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scenario_hash(&self) -> &str {
        &self.scenario_hash
    }

    pub fn metadata(&self) -> DatasetMetadata {
        DatasetMetadata {
            seed: self.seed,
            scenario_hash: self.scenario_hash.clone(),
            samples: self.len(),
            model_id: ModelId::default().to_string(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Header of feature names, then one row per sample, 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.feature_names.join(",");
        out.push('\n');
        for t in 0..self.rows.rows() {
            for (j, v) in self.rows.row(t).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    /// Sidecar path for a dataset file: `<file>.meta.json`.
    pub fn metadata_path(csv_path: &Path) -> PathBuf {
        let mut s = csv_path.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    }

    /// Writes the CSV and its metadata sidecar.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv_string()).map_err(|e| Error::io(csv_path, e))?;
        let meta_path = Self::metadata_path(csv_path);
        let meta = serde_json::to_string_pretty(&self.metadata())? + "\n";
        std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
        Ok(())
    }

    /// Reads a dataset CSV. The sidecar is optional; without it seed is 0, the
    /// scenario hash is empty and `parameter_count` must be supplied.
    pub fn read(csv_path: &Path, parameter_count: usize) -> Result<Self> {
        let text = std::fs::read_to_string(csv_path).map_err(|e| Error::io(csv_path, e))?;
        let meta_path = Self::metadata_path(csv_path);
        let meta: Option<DatasetMetadata> = match std::fs::read_to_string(&meta_path) {
            Ok(m) => Some(serde_json::from_str(&m)?),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(Error::io(&meta_path, e)),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let names: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut data = Vec::new();
        let mut count = 0;
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            for field in rec.iter() {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    location: format!("{}:{}", csv_path.display(), i + 2),
                    message: format!("not a number: `{field}`"),
                })?;
                data.push(v);
            }
            count += 1;
        }
        let rows = Matrix::from_vec(count, names.len(), data);
        let (seed, hash) = meta
            .as_ref()
            .map_or((0, String::new()), |m| (m.seed, m.scenario_hash.clone()));
        Self::new(names, parameter_count, rows, seed, hash)
    }
}

/// RNG used for dataset generation with a given seed.
pub fn dataset_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generates `n_samples` independent parameter draws and their KPIs.
pub fn generate_dataset(
    scenario: &Scenario,
    n_samples: usize,
    seed: u64,
) -> Result<TimeSeriesDataset> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be ≥ 1".into()));
    }
    let mut rng = dataset_rng(seed);
    let width = scenario.feature_count();
    let n_params = scenario.parameters().len();
    let slots = scenario.kpi_slots();
    let mut data = Vec::with_capacity(n_samples * width);
    for _ in 0..n_samples {
        let params = sample_parameters(scenario, &mut rng);
        let kpis = evaluate_kpis(&params)?;
        data.extend_from_slice(&params.0);
        data.extend(slots.iter().map(|&s| kpis.0[s]));
    }
    TimeSeriesDataset::new(
        scenario.feature_names(),
        n_params,
        Matrix::from_vec(n_samples, width, data),
        seed,
        scenario.hash(),
    )
}

/// Structural P–K and K–K edges of the scenario's model plus every subscription edge.
pub fn ground_truth_graph(scenario: &Scenario) -> ConflictGraph {
    let mut g = ConflictGraph::empty_for(scenario);
    let params = scenario.parameters();
    let kpis = scenario.kpis();
    let slots = scenario.kpi_slots();
    let kpi_for_slot = |slot: usize| {
        let j = slots.iter().position(|&s| s == slot).expect("every slot bound");
        kpis[j].name.as_str()
    };
    for (slot, deps) in structural_dependencies(scenario.model_id()).iter().enumerate() {
        let target = kpi_for_slot(slot);
        for dep in deps.iter() {
            let source = match *dep {
                Symbol::Param(i) => params[i].name.as_str(),
                Symbol::Kpi(i) => kpi_for_slot(i),
            };
            g.add_edge_by_name(source, target)
                .expect("model symbols resolve to scenario vertices");
        }
    }
    g.add_subscriptions(scenario)
        .expect("validated subscriptions resolve");
    g
}
