//! Experiment configuration, seeding, execution and persistence.

mod plot;
mod table;

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    init_population, run, ModelConfig, Population, RunObserver, SimRng, StepKind, StepOutcome,
};
use crate::measures::{optimal_cluster_count, MeasurementRecord};
use crate::network::{
    duplicate, generate_complete, generate_scale_free, generate_small_world, DuplexNetwork,
    NetworkError,
};

pub use plot::{emit_plot, render_plot, Measure};
pub use table::{
    final_comparison, format_value, read_csv, to_csv, write_csv, FinalSummary, MeasureSummary,
    ResultRow,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid experiment: {0}")]
    Config(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("cell alpha={alpha} replicate={replicate} failed: {source}")]
    Cell {
        alpha: f64,
        replicate: u64,
        source: Box<EngineError>,
    },
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("no rows match: {0}")]
    EmptySelection(String),
    #[error("missing final rows for cells: {0}")]
    MissingCells(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Complete,
    ScaleFree,
    SmallWorld,
    File,
}

impl Topology {
    pub fn label(self) -> &'static str {
        match self {
            Topology::Complete => "complete",
            Topology::ScaleFree => "scale-free",
            Topology::SmallWorld => "small-world",
            Topology::File => "file",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    /// Out-degree per node. Unset means 6 for scale-free and full clusters
    /// (`n / clusters - 1`) for small-world.
    pub k_out: Option<usize>,
    pub clusters: usize,
    pub p_rewire: f64,
    /// Duplex file, for the `file` topology.
    pub path: Option<PathBuf>,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            k_out: None,
            clusters: 5,
            p_rewire: 0.1,
            path: None,
        }
    }
}

/// Everything needed to reproduce a sweep. Field names double as the JSON
/// config keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub topology: Topology,
    pub topology_params: TopologyParams,
    pub n: usize,
    pub model: ModelConfig,
    pub alphas: Vec<f64>,
    pub replicates: u64,
    pub sample_every: u64,
    pub out_path: Option<PathBuf>,
    /// Adds a gap-statistic `cluster_count` column (slow).
    pub cluster_count: bool,
    pub cluster_k_max: usize,
    pub cluster_refs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            topology: Topology::Complete,
            topology_params: TopologyParams::default(),
            n: 30,
            model: ModelConfig::default(),
            alphas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replicates: 10,
            sample_every: 500,
            out_path: None,
            cluster_count: false,
            cluster_k_max: 8,
            cluster_refs: 10,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::Config(msg));
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if self.alphas.is_empty() {
            return bad("alphas must not be empty".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return bad(format!("alpha {a} outside [0, 1]"));
        }
        if self.sample_every < 1 {
            return bad("sample_every must be at least 1".into());
        }
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        self.model.validate().map_err(EngineError::Config)?;
        // Surface generator errors before any simulation starts.
        self.network(0)?;
        Ok(())
    }

    /// Duplicated duplex for one replicate. Random topologies get a fresh
    /// structural seed per replicate.
    pub fn network(&self, replicate: u64) -> Result<DuplexNetwork, EngineError> {
        let p = &self.topology_params;
        let seed = network_seed(self.model.master_seed, replicate);
        let net = match self.topology {
            Topology::Complete => duplicate(&generate_complete(self.n)),
            Topology::ScaleFree => {
                duplicate(&generate_scale_free(self.n, p.k_out.unwrap_or(6), seed)?)
            }
            Topology::SmallWorld => {
                let k_out = p
                    .k_out
                    .unwrap_or((self.n / p.clusters.max(1)).saturating_sub(1));
                duplicate(&generate_small_world(
                    self.n, p.clusters, k_out, p.p_rewire, seed,
                )?)
            }
            Topology::File => {
                let path = p.path.as_ref().ok_or_else(|| {
                    EngineError::Config("file topology needs topology_params.path".into())
                })?;
                let net = DuplexNetwork::load(path)?;
                if net.node_count() != self.n {
                    return Err(EngineError::Config(format!(
                        "network file has {} nodes but n = {}",
                        net.node_count(),
                        self.n
                    )));
                }
                net
            }
        };
        Ok(net)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for one cell.
///
/// Frozen definition, with `mix64` the SplitMix64 finalizer and
/// `G = 0x9E3779B97F4A7C15`:
///
/// ```text
/// h = mix64(master + G)
/// h = mix64((h ^ alpha_index) + 2G)
/// h = mix64((h ^ replicate) + 3G)
/// ```
///
/// All arithmetic wraps modulo 2^64.
pub fn derive_seed(master: u64, alpha_index: u64, replicate: u64) -> u64 {
    let h = mix64(master.wrapping_add(GOLDEN_GAMMA));
    let h = mix64((h ^ alpha_index).wrapping_add(GOLDEN_GAMMA.wrapping_mul(2)));
    mix64((h ^ replicate).wrapping_add(GOLDEN_GAMMA.wrapping_mul(3)))
}

/// Seeding key for an alpha: its value in millionths, so a cell's stream
/// does not depend on which other alphas share the sweep.
pub fn alpha_key(alpha: f64) -> u64 {
    (alpha * 1e6).round() as u64
}

const NETWORK_STREAM: u64 = u64::MAX;
const POPULATION_STREAM: u64 = u64::MAX - 1;
const CLUSTER_STREAM: u64 = u64::MAX - 2;

pub fn network_seed(master: u64, replicate: u64) -> u64 {
    derive_seed(master, NETWORK_STREAM, replicate)
}

/// Initial populations depend only on the replicate, so every alpha starts
/// from the same state.
pub fn population_seed(master: u64, replicate: u64) -> u64 {
    derive_seed(master, POPULATION_STREAM, replicate)
}

/// Network, starting population and model config of one sweep cell.
#[derive(Clone, Debug)]
pub struct Cell {
    pub alpha: f64,
    pub replicate: u64,
    pub network: DuplexNetwork,
    pub population: Population,
    pub config: ModelConfig,
}

pub fn build_cell(spec: &ExperimentSpec, alpha: f64, replicate: u64) -> Result<Cell, EngineError> {
    let network = spec.network(replicate)?;
    let master = spec.model.master_seed;
    let mut init_rng = SimRng::seed_from_u64(population_seed(master, replicate));
    let population = init_population(spec.n, spec.model.k, &mut init_rng);
    let config = ModelConfig {
        alpha,
        master_seed: derive_seed(master, alpha_key(alpha), replicate),
        ..spec.model.clone()
    };
    Ok(Cell {
        alpha,
        replicate,
        network,
        population,
        config,
    })
}

/// Step-kind tallies of a finished cell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CellStats {
    pub association_steps: u64,
    pub preference_steps: u64,
    pub skipped_steps: u64,
}

struct Recorder<'a> {
    spec: &'a ExperimentSpec,
    cell_seed: u64,
    alpha: f64,
    replicate: u64,
    stats: CellStats,
    rows: Vec<ResultRow>,
}

impl RunObserver for Recorder<'_> {
    fn sample(&mut self, t: u64, pop: &Population) {
        let m = MeasurementRecord::capture(t, pop, self.spec.model.mi_mode);
        let cluster_count = self.spec.cluster_count.then(|| {
            let mut rng = SimRng::seed_from_u64(derive_seed(self.cell_seed, CLUSTER_STREAM, t));
            optimal_cluster_count(
                pop,
                self.spec.cluster_k_max,
                self.spec.cluster_refs,
                &mut rng,
            )
        });
        self.rows.push(ResultRow {
            topology: self.spec.topology.label().to_string(),
            alpha: self.alpha,
            replicate: self.replicate,
            t,
            pref_similarity: m.pref_similarity,
            pref_congruence: m.pref_congruence,
            assoc_similarity: m.assoc_similarity,
            mean_mutual_info: Some(m.mean_mutual_info),
            excluded_pairs: m.excluded_pairs as u64,
            skipped_steps: self.stats.skipped_steps,
            cluster_count,
        });
    }

    fn step(&mut self, _t: u64, outcome: &StepOutcome) {
        match outcome.kind {
            StepKind::Association => self.stats.association_steps += 1,
            StepKind::Preference => self.stats.preference_steps += 1,
            StepKind::Skipped => self.stats.skipped_steps += 1,
        }
    }
}

/// Runs one cell and returns its rows and step tallies.
pub fn run_single_with_stats(
    spec: &ExperimentSpec,
    alpha: f64,
    replicate: u64,
) -> Result<(Vec<ResultRow>, CellStats), EngineError> {
    let cell = build_cell(spec, alpha, replicate)?;
    let mut recorder = Recorder {
        spec,
        cell_seed: cell.config.master_seed,
        alpha,
        replicate,
        stats: CellStats::default(),
        rows: Vec::new(),
    };
    run(
        cell.population,
        &cell.network,
        &cell.config,
        spec.sample_every,
        &mut recorder,
    );
    Ok((recorder.rows, recorder.stats))
}

/// Rows for one `(alpha, replicate)` cell, sampled at `t = 0`, every
/// `sample_every` steps, and the final step.
pub fn run_single(
    spec: &ExperimentSpec,
    alpha: f64,
    replicate: u64,
) -> Result<Vec<ResultRow>, EngineError> {
    run_single_with_stats(spec, alpha, replicate).map(|(rows, _)| rows)
}

/// Final population of one cell.
pub fn final_population(
    spec: &ExperimentSpec,
    alpha: f64,
    replicate: u64,
) -> Result<Population, EngineError> {
    let cell = build_cell(spec, alpha, replicate)?;
    Ok(run(
        cell.population,
        &cell.network,
        &cell.config,
        spec.sample_every,
        &mut |_: u64, _: &Population| {},
    ))
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.alpha
            .total_cmp(&b.alpha)
            .then(a.replicate.cmp(&b.replicate))
            .then(a.t.cmp(&b.t))
    });
}

/// Every `(alpha, replicate)` cell, in canonical order. Cells run in parallel.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, EngineError> {
    spec.validate()?;
    let cells: Vec<(f64, u64)> = spec
        .alphas
        .iter()
        .flat_map(|&a| (0..spec.replicates).map(move |r| (a, r)))
        .collect();
    let chunks = cells
        .par_iter()
        .map(|&(alpha, replicate)| {
            run_single(spec, alpha, replicate).map_err(|e| EngineError::Cell {
                alpha,
                replicate,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

/// Same cells as [`run_sweep`], one after another.
pub fn run_sweep_serial(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, EngineError> {
    spec.validate()?;
    let mut rows = Vec::new();
    for &alpha in &spec.alphas {
        for replicate in 0..spec.replicates {
            rows.extend(
                run_single(spec, alpha, replicate).map_err(|e| EngineError::Cell {
                    alpha,
                    replicate,
                    source: Box::new(e),
                })?,
            );
        }
    }
    sort_rows(&mut rows);
    Ok(rows)
}

/// Runs the sweep and writes its CSV. Nothing is left at `out` on failure.
pub fn run_sweep_to_file(
    spec: &ExperimentSpec,
    out: impl AsRef<Path>,
) -> Result<Vec<ResultRow>, EngineError> {
    let out = out.as_ref();
    let rows = run_sweep(spec)?;
    let tmp = out.with_extension("csv.partial");
    let written =
        write_csv(&rows, &tmp).and_then(|()| fs::rename(&tmp, out).map_err(EngineError::from));
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        let _ = fs::remove_file(out);
        return Err(e);
    }
    Ok(rows)
}
