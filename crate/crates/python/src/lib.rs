//! Python bindings: networks, populations, the step-level simulator,
//! population measures and parameter sweeps.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;

use duplex_diffusion::dynamics::{
    self, AgentState, AssociationMatrix, MiMode, ModelConfig, Practices, Retention, SimRng,
    StepKind, StepOutcome,
};
use duplex_diffusion::engine::{self, EngineError, ExperimentSpec, ResultRow};
use duplex_diffusion::measures::{self, JointExhibitDistribution, MeasurementRecord};
use duplex_diffusion::network::{self as net, DuplexNetwork, LayerId, NetworkError, NodeId};

fn network_err(e: NetworkError) -> PyErr {
    match e {
        NetworkError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn engine_err(e: EngineError) -> PyErr {
    match e {
        EngineError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn layer_id(layer: u8) -> PyResult<LayerId> {
    LayerId::try_from(layer).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn mi_mode(name: &str) -> PyResult<MiMode> {
    match name {
        "sequential" => Ok(MiMode::Sequential),
        "association_coupled" => Ok(MiMode::AssociationCoupled),
        other => Err(PyValueError::new_err(format!("unknown mi_mode `{other}`"))),
    }
}

fn retention(name: &str) -> PyResult<Retention> {
    match name {
        "less" => Ok(Retention::Less),
        "greater" => Ok(Retention::Greater),
        other => Err(PyValueError::new_err(format!(
            "unknown retention `{other}`"
        ))),
    }
}

/// Two-layer directed network over one node set.
#[pyclass(
    name = "Network",
    module = "duplex_diffusion",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
pub struct PyNetwork {
    inner: DuplexNetwork,
}

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn complete(n: usize) -> Self {
        Self {
            inner: net::duplicate(&net::generate_complete(n)),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (n, k_out = 6, seed = 0))]
    fn scale_free(n: usize, k_out: usize, seed: u64) -> PyResult<Self> {
        let layer = net::generate_scale_free(n, k_out, seed).map_err(network_err)?;
        Ok(Self {
            inner: net::duplicate(&layer),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, clusters = 5, k_out = None, p_rewire = 0.1, seed = 0))]
    fn small_world(
        n: usize,
        clusters: usize,
        k_out: Option<usize>,
        p_rewire: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let k_out = k_out.unwrap_or((n / clusters.max(1)).saturating_sub(1));
        let layer =
            net::generate_small_world(n, clusters, k_out, p_rewire, seed).map_err(network_err)?;
        Ok(Self {
            inner: net::duplicate(&layer),
        })
    }

    /// Builds a network from explicit `(src, dst)` edge lists per layer.
    #[staticmethod]
    fn from_edges(
        n: usize,
        observation: Vec<(usize, usize)>,
        influence: Vec<(usize, usize)>,
    ) -> PyResult<Self> {
        let layer = |edges: Vec<(usize, usize)>| net::DirectedLayer::from_edges(n, edges);
        let inner = DuplexNetwork::new(
            layer(observation).map_err(network_err)?,
            layer(influence).map_err(network_err)?,
        )
        .map_err(network_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        DuplexNetwork::load(path)
            .map(|inner| Self { inner })
            .map_err(network_err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map_err(network_err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[pyo3(signature = (layer = 1))]
    fn edge_count(&self, layer: u8) -> PyResult<usize> {
        Ok(self.inner.layer(layer_id(layer)?).edge_count())
    }

    #[pyo3(signature = (layer = 1))]
    fn edges(&self, layer: u8) -> PyResult<Vec<(usize, usize)>> {
        Ok(self
            .inner
            .layer(layer_id(layer)?)
            .edges()
            .map(|(a, b)| (a.index(), b.index()))
            .collect())
    }

    fn out_neighbors(&self, layer: u8, node: usize) -> PyResult<Vec<usize>> {
        if node >= self.inner.node_count() {
            return Err(PyIndexError::new_err(format!("node {node} out of range")));
        }
        Ok(self
            .inner
            .out_neighbors(layer_id(layer)?, NodeId(node))
            .iter()
            .map(|v| v.index())
            .collect())
    }

    #[pyo3(signature = (layer = 1))]
    fn mean_shortest_path(&self, layer: u8) -> PyResult<f64> {
        Ok(self.inner.layer(layer_id(layer)?).mean_shortest_path())
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(nodes={}, edges=({}, {}))",
            self.inner.node_count(),
            self.inner.layer(LayerId::Observation).edge_count(),
            self.inner.layer(LayerId::Influence).edge_count()
        )
    }
}

/// Agents' preference vectors and association matrices.
#[pyclass(name = "Population", module = "duplex_diffusion", skip_from_py_object)]
#[derive(Clone)]
pub struct PyPopulation {
    inner: dynamics::Population,
}

#[pymethods]
impl PyPopulation {
    /// Uniform preferences on [-1, 1] and all-one associations.
    #[staticmethod]
    #[pyo3(signature = (n, k = 6, seed = 0))]
    fn random(n: usize, k: usize, seed: u64) -> Self {
        Self {
            inner: dynamics::init_population(n, k, &mut SimRng::seed_from_u64(seed)),
        }
    }

    /// Associations default to all ones.
    #[new]
    #[pyo3(signature = (preferences, associations = None))]
    fn new(preferences: Vec<Vec<f64>>, associations: Option<Vec<Vec<Vec<f64>>>>) -> PyResult<Self> {
        let k = preferences.first().map_or(0, Vec::len);
        if preferences.iter().any(|v| v.len() != k) {
            return Err(PyValueError::new_err(
                "all preference vectors must have the same length",
            ));
        }
        let matrices = match associations {
            Some(r) if r.len() != preferences.len() => {
                return Err(PyValueError::new_err(
                    "one association matrix per agent required",
                ));
            }
            Some(r) => r,
            None => vec![vec![vec![1.0; k]; k]; preferences.len()],
        };
        let mut agents = Vec::with_capacity(preferences.len());
        for (v, r) in preferences.into_iter().zip(matrices) {
            if r.len() != k || r.iter().any(|row| row.len() != k) {
                return Err(PyValueError::new_err(format!(
                    "association matrices must be {k}x{k}"
                )));
            }
            agents.push(AgentState::new(v, AssociationMatrix::from_rows(&r)));
        }
        Ok(Self {
            inner: dynamics::Population::from_agents(agents),
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn preferences(&self) -> Vec<Vec<f64>> {
        self.inner
            .agents
            .iter()
            .map(|a| a.preferences.clone())
            .collect()
    }

    fn associations(&self, agent: usize) -> PyResult<Vec<Vec<f64>>> {
        self.inner
            .agents
            .get(agent)
            .map(|a| a.associations.to_rows())
            .ok_or_else(|| PyIndexError::new_err(format!("agent {agent} out of range")))
    }

    fn __repr__(&self) -> String {
        format!(
            "Population(agents={}, k={})",
            self.inner.len(),
            self.inner.k
        )
    }
}

fn outcome_dict<'py>(py: Python<'py>, t: u64, o: &StepOutcome) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", t)?;
    d.set_item(
        "kind",
        match o.kind {
            StepKind::Association => "association",
            StepKind::Preference => "preference",
            StepKind::Skipped => "skipped",
        },
    )?;
    d.set_item("observer", o.observer.index())?;
    d.set_item("sender", o.sender.map(NodeId::index))?;
    match o.practices {
        Practices::None => d.set_item("practices", Vec::<usize>::new())?,
        Practices::Single(i) => d.set_item("practices", vec![i])?,
        Practices::Pair(i, j) => d.set_item("practices", vec![i, j])?,
    }
    d.set_item("retained", o.proposal_retained)?;
    d.set_item("cs_before", o.cs_before)?;
    d.set_item("cs_after", o.cs_after)?;
    d.set_item("cs_fallback", o.cs_fallback)?;
    Ok(d)
}

fn record_dict<'py>(py: Python<'py>, m: &MeasurementRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", m.t)?;
    d.set_item("pref_similarity", m.pref_similarity)?;
    d.set_item("pref_congruence", m.pref_congruence)?;
    d.set_item("assoc_similarity", m.assoc_similarity)?;
    d.set_item("mean_mutual_info", m.mean_mutual_info)?;
    d.set_item("interpretive_distance", m.interpretive_distance)?;
    d.set_item("excluded_pairs", m.excluded_pairs)?;
    Ok(d)
}

fn row_dict<'py>(py: Python<'py>, r: &ResultRow) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("topology", &r.topology)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("replicate", r.replicate)?;
    d.set_item("t", r.t)?;
    d.set_item("pref_similarity", r.pref_similarity)?;
    d.set_item("pref_congruence", r.pref_congruence)?;
    d.set_item("assoc_similarity", r.assoc_similarity)?;
    d.set_item("mean_mutual_info", r.mean_mutual_info)?;
    d.set_item("excluded_pairs", r.excluded_pairs)?;
    d.set_item("skipped_steps", r.skipped_steps)?;
    d.set_item("cluster_count", r.cluster_count)?;
    Ok(d)
}

/// Step-level simulator owning its population and random stream.
#[pyclass(name = "Simulation", module = "duplex_diffusion")]
pub struct PySimulation {
    network: DuplexNetwork,
    population: dynamics::Population,
    config: ModelConfig,
    rng: SimRng,
    t: u64,
}

#[pymethods]
impl PySimulation {
    #[new]
    #[pyo3(signature = (
        network,
        population,
        alpha = 0.0,
        seed = 0,
        symmetric_r = true,
        cs_normalize = false,
        cs_include_diagonal = false,
        retention = "less",
        mi_mode = "sequential",
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        network: &PyNetwork,
        population: &PyPopulation,
        alpha: f64,
        seed: u64,
        symmetric_r: bool,
        cs_normalize: bool,
        cs_include_diagonal: bool,
        retention: &str,
        mi_mode: &str,
    ) -> PyResult<Self> {
        let config = ModelConfig {
            alpha,
            k: population.inner.k,
            steps: 0,
            symmetric_r,
            cs_normalize,
            cs_include_diagonal,
            retention: self::retention(retention)?,
            mi_mode: self::mi_mode(mi_mode)?,
            master_seed: seed,
        };
        config.validate().map_err(PyValueError::new_err)?;
        if population.inner.len() != network.inner.node_count() {
            return Err(PyValueError::new_err(format!(
                "population has {} agents but the network has {} nodes",
                population.inner.len(),
                network.inner.node_count()
            )));
        }
        Ok(Self {
            network: network.inner.clone(),
            population: population.inner.clone(),
            config,
            rng: SimRng::seed_from_u64(seed),
            t: 0,
        })
    }

    #[getter]
    fn t(&self) -> u64 {
        self.t
    }

    /// Copy of the current population.
    #[getter]
    fn population(&self) -> PyPopulation {
        PyPopulation {
            inner: self.population.clone(),
        }
    }

    /// One round; returns its trace record.
    fn step<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let outcome = dynamics::step(
            &mut self.population,
            &self.network,
            &self.config,
            &mut self.rng,
        );
        self.t += 1;
        outcome_dict(py, self.t, &outcome)
    }

    /// Advances `steps` rounds, measuring every `sample_every` rounds and at the end.
    #[pyo3(signature = (steps, sample_every = 500))]
    fn run<'py>(
        &mut self,
        py: Python<'py>,
        steps: u64,
        sample_every: u64,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        if sample_every == 0 {
            return Err(PyValueError::new_err("sample_every must be at least 1"));
        }
        let mut samples = Vec::new();
        for n in 1..=steps {
            dynamics::step(
                &mut self.population,
                &self.network,
                &self.config,
                &mut self.rng,
            );
            self.t += 1;
            if n % sample_every == 0 || n == steps {
                let m = MeasurementRecord::capture(self.t, &self.population, self.config.mi_mode);
                samples.push(record_dict(py, &m)?);
            }
        }
        Ok(samples)
    }

    fn measure<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        record_dict(
            py,
            &MeasurementRecord::capture(self.t, &self.population, self.config.mi_mode),
        )
    }
}

#[pyfunction]
#[pyo3(signature = (preferences, associations, normalize = false, include_diagonal = false))]
fn constraint_satisfaction(
    preferences: Vec<f64>,
    associations: Vec<Vec<f64>>,
    normalize: bool,
    include_diagonal: bool,
) -> PyResult<f64> {
    let k = preferences.len();
    if associations.len() != k || associations.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err(format!(
            "associations must be {k}x{k}"
        )));
    }
    let cfg = ModelConfig {
        cs_normalize: normalize,
        cs_include_diagonal: include_diagonal,
        ..ModelConfig::default()
    };
    Ok(dynamics::constraint_satisfaction(
        &preferences,
        &AssociationMatrix::from_rows(&associations),
        &cfg,
    ))
}

/// `None` when either input is constant.
#[pyfunction]
fn pearson(x: Vec<f64>, y: Vec<f64>) -> PyResult<Option<f64>> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(PyValueError::new_err(
            "inputs need equal length of at least 2",
        ));
    }
    Ok(measures::pearson(&x, &y))
}

/// Mutual information (nats) of a square joint table given as rows.
#[pyfunction]
fn mutual_information(joint: Vec<Vec<f64>>) -> PyResult<f64> {
    let k = joint.len();
    if joint.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("joint table must be square"));
    }
    let table = JointExhibitDistribution::from_table(k, joint.into_iter().flatten().collect());
    Ok(measures::mutual_information(&table))
}

#[pyfunction]
#[pyo3(signature = (population, mi_mode = "sequential"))]
fn measure<'py>(
    py: Python<'py>,
    population: &PyPopulation,
    mi_mode: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let m = MeasurementRecord::capture(0, &population.inner, self::mi_mode(mi_mode)?);
    record_dict(py, &m)
}

#[pyfunction]
#[pyo3(signature = (population, k_max = 8, n_refs = 10, seed = 0))]
fn optimal_cluster_count(
    population: &PyPopulation,
    k_max: usize,
    n_refs: usize,
    seed: u64,
) -> usize {
    measures::optimal_cluster_count(
        &population.inner,
        k_max,
        n_refs,
        &mut SimRng::seed_from_u64(seed),
    )
}

#[pyfunction]
fn derive_seed(master: u64, alpha_index: u64, replicate: u64) -> u64 {
    engine::derive_seed(master, alpha_index, replicate)
}

fn parse_spec(config_json: &str) -> PyResult<ExperimentSpec> {
    let spec = ExperimentSpec::from_json(config_json).map_err(engine_err)?;
    spec.validate().map_err(engine_err)?;
    Ok(spec)
}

/// Rows for one cell of a JSON experiment config.
#[pyfunction]
fn run_cell<'py>(
    py: Python<'py>,
    config_json: &str,
    alpha: f64,
    replicate: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = parse_spec(config_json)?;
    let rows = py
        .detach(|| engine::run_single(&spec, alpha, replicate))
        .map_err(engine_err)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

/// Runs every cell of a JSON experiment config in parallel. Writes the CSV
/// too when `out` is given.
#[pyfunction]
#[pyo3(signature = (config_json, out = None))]
fn run_sweep<'py>(
    py: Python<'py>,
    config_json: &str,
    out: Option<PathBuf>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let spec = parse_spec(config_json)?;
    let rows = py
        .detach(|| match &out {
            Some(path) => engine::run_sweep_to_file(&spec, path),
            None => engine::run_sweep(&spec),
        })
        .map_err(engine_err)?;
    rows.iter().map(|r| row_dict(py, r)).collect()
}

#[pymodule]
#[pyo3(name = "duplex_diffusion")]
pub fn duplex_diffusion_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyPopulation>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(constraint_satisfaction, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_cluster_count, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(run_cell, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    Ok(())
}
