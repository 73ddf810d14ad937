//! Duplex directed networks: one node set, two independent edge sets.
//!
//! Layer 1 carries observation (association transmission), layer 2 carries
//! influence (preference transmission). The generators here produce single
//! layers; [`duplicate`] lifts one into a duplex with identical edge sets.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("edge {src} -> {dst} is a self-loop")]
    SelfLoop { src: usize, dst: usize },
    #[error("duplicate edge {src} -> {dst}")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("edge {src} -> {dst} references a node outside 0..{n}")]
    NodeOutOfRange { src: usize, dst: usize, n: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense node index in `0..n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which channel of the duplex an operation reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayerId {
    /// Layer 1: casual observation, carries associations.
    Observation,
    /// Layer 2: close ties, carries preferences.
    Influence,
}

impl TryFrom<u8> for LayerId {
    type Error = NetworkError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(LayerId::Observation),
            2 => Ok(LayerId::Influence),
            other => Err(NetworkError::InvalidParameters(format!(
                "layer id must be 1 or 2, got {other}"
            ))),
        }
    }
}

/// A directed graph stored as ordered out-adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedLayer {
    out: Vec<Vec<NodeId>>,
}

impl DirectedLayer {
    /// A layer with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            out: vec![Vec::new(); n],
        }
    }

    /// Builds a layer from `(src, dst)` pairs, keeping the given order per source.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut layer = Self::empty(n);
        for (src, dst) in edges {
            layer.add_edge(src, dst)?;
        }
        Ok(layer)
    }

    fn add_edge(&mut self, src: usize, dst: usize) -> Result<(), NetworkError> {
        let n = self.out.len();
        if src >= n || dst >= n {
            return Err(NetworkError::NodeOutOfRange { src, dst, n });
        }
        if src == dst {
            return Err(NetworkError::SelfLoop { src, dst });
        }
        if self.out[src].contains(&NodeId(dst)) {
            return Err(NetworkError::DuplicateEdge { src, dst });
        }
        self.out[src].push(NodeId(dst));
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Out-neighbors of `node`. Panics if `node` is out of range.
    pub fn out_neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.out[node.index()]
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out[node.index()].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.out.len()];
        for targets in &self.out {
            for t in targets {
                deg[t.index()] += 1;
            }
        }
        deg
    }

    /// All edges in source order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(src, targets)| targets.iter().map(move |&dst| (NodeId(src), dst)))
    }

    /// BFS distances from `source`; `None` marks unreachable nodes.
    pub fn distances_from(&self, source: NodeId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.out.len()];
        let mut queue = VecDeque::new();
        dist[source.index()] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap_or(0);
            for &v in &self.out[u.index()] {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Mean directed shortest-path length over ordered pairs of distinct nodes.
    /// Infinite when some pair is unreachable.
    pub fn mean_shortest_path(&self) -> f64 {
        let n = self.out.len();
        if n < 2 {
            return 0.0;
        }
        let mut total = 0usize;
        for s in 0..n {
            for (t, d) in self.distances_from(NodeId(s)).into_iter().enumerate() {
                if t == s {
                    continue;
                }
                match d {
                    Some(d) => total += d,
                    None => return f64::INFINITY,
                }
            }
        }
        total as f64 / (n * (n - 1)) as f64
    }
}

/// Two directed layers over one node set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuplexNetwork {
    observation: DirectedLayer,
    influence: DirectedLayer,
}

impl DuplexNetwork {
    pub fn new(observation: DirectedLayer, influence: DirectedLayer) -> Result<Self, NetworkError> {
        if observation.node_count() != influence.node_count() {
            return Err(NetworkError::InvalidParameters(format!(
                "layers disagree on node count: {} vs {}",
                observation.node_count(),
                influence.node_count()
            )));
        }
        Ok(Self {
            observation,
            influence,
        })
    }

    pub fn node_count(&self) -> usize {
        self.observation.node_count()
    }

    pub fn layer(&self, id: LayerId) -> &DirectedLayer {
        match id {
            LayerId::Observation => &self.observation,
            LayerId::Influence => &self.influence,
        }
    }

    pub fn layer_mut(&mut self, id: LayerId) -> &mut DirectedLayer {
        match id {
            LayerId::Observation => &mut self.observation,
            LayerId::Influence => &mut self.influence,
        }
    }

    /// Out-neighbors of `node` on the given layer. Panics if `node` is out of range.
    pub fn out_neighbors(&self, layer: LayerId, node: NodeId) -> &[NodeId] {
        self.layer(layer).out_neighbors(node)
    }

    /// Whether every node has at least one out-neighbor on both layers.
    pub fn has_no_sinks(&self) -> bool {
        (0..self.node_count()).all(|u| {
            self.observation.out_degree(NodeId(u)) > 0 && self.influence.out_degree(NodeId(u)) > 0
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetworkError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    /// Text form: a `duplex n=<N>` header, then `layer 1` and `layer 2`
    /// sections of `src dst` lines.
    pub fn to_text(&self) -> String {
        let mut out = format!("duplex n={}\n", self.node_count());
        for (label, layer) in [("layer 1", &self.observation), ("layer 2", &self.influence)] {
            out.push_str(label);
            out.push('\n');
            for (s, d) in layer.edges() {
                out.push_str(&format!("{s} {d}\n"));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, NetworkError> {
        let mut n: Option<usize> = None;
        let mut layers: [Option<DirectedLayer>; 2] = [None, None];
        let mut current: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let parse_err = |msg: String| NetworkError::Parse { line: line_no, msg };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some(n) = n else {
                let value = line
                    .strip_prefix("duplex")
                    .map(str::trim)
                    .and_then(|rest| rest.strip_prefix("n="))
                    .ok_or_else(|| parse_err(format!("expected `duplex n=<N>`, got `{line}`")))?;
                n = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|e| parse_err(format!("bad node count `{value}`: {e}")))?,
                );
                continue;
            };
            if let Some(rest) = line.strip_prefix("layer") {
                let slot = match rest.trim() {
                    "1" => 0,
                    "2" => 1,
                    other => return Err(parse_err(format!("unknown layer `{other}`"))),
                };
                if layers[slot].is_some() {
                    return Err(parse_err(format!("layer {} declared twice", slot + 1)));
                }
                layers[slot] = Some(DirectedLayer::empty(n));
                current = Some(slot);
                continue;
            }
            let slot = current.ok_or_else(|| parse_err("edge before any layer header".into()))?;
            let mut fields = line.split_whitespace();
            let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(format!("expected `src dst`, got `{line}`")));
            };
            let src: usize = a
                .parse()
                .map_err(|e| parse_err(format!("bad node `{a}`: {e}")))?;
            let dst: usize = b
                .parse()
                .map_err(|e| parse_err(format!("bad node `{b}`: {e}")))?;
            if let Some(layer) = layers[slot].as_mut() {
                layer
                    .add_edge(src, dst)
                    .map_err(|e| parse_err(e.to_string()))?;
            }
        }

        let n = n.ok_or_else(|| NetworkError::Parse {
            line: 1,
            msg: "missing `duplex n=<N>` header".into(),
        })?;
        let [l1, l2] = layers;
        Self::new(
            l1.unwrap_or_else(|| DirectedLayer::empty(n)),
            l2.unwrap_or_else(|| DirectedLayer::empty(n)),
        )
    }
}

/// Both layers get an independent copy of `layer`.
pub fn duplicate(layer: &DirectedLayer) -> DuplexNetwork {
    DuplexNetwork {
        observation: layer.clone(),
        influence: layer.clone(),
    }
}

/// Every node points to every other node.
pub fn generate_complete(n: usize) -> DirectedLayer {
    let out = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).map(NodeId).collect())
        .collect();
    DirectedLayer { out }
}

/// Directed preferential attachment with out-degree exactly `k_out`.
///
/// Starts from a complete digraph on `k_out + 1` nodes. Each later node picks
/// `k_out` distinct existing targets with probability proportional to
/// `in_degree + k_out`, which gives an in-degree tail exponent of 3.
pub fn generate_scale_free(
    n: usize,
    k_out: usize,
    seed: u64,
) -> Result<DirectedLayer, NetworkError> {
    if k_out == 0 || n < k_out + 1 {
        return Err(NetworkError::InvalidParameters(format!(
            "scale-free needs 1 <= k_out <= n-1 (n={n}, k_out={k_out})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = k_out + 1;
    let mut out: Vec<Vec<NodeId>> = Vec::with_capacity(n);
    // Each node appears once per unit of attractiveness: k_out base copies
    // plus one per incoming edge.
    let mut urn: Vec<usize> = Vec::with_capacity(n * k_out * 2);
    for u in 0..core {
        out.push((0..core).filter(|&v| v != u).map(NodeId).collect());
        urn.extend(std::iter::repeat_n(u, k_out + k_out));
    }
    for u in core..n {
        let mut targets: Vec<NodeId> = Vec::with_capacity(k_out);
        while targets.len() < k_out {
            let t = urn[rng.random_range(0..urn.len())];
            if !targets.contains(&NodeId(t)) {
                targets.push(NodeId(t));
            }
        }
        urn.extend(targets.iter().map(|t| t.index()));
        urn.extend(std::iter::repeat_n(u, k_out));
        out.push(targets);
    }
    Ok(DirectedLayer { out })
}

/// Clustered digraph with random out-edge rewiring.
///
/// Nodes are split into `clusters` consecutive blocks. Each node points to the
/// next `k_out` members of its block (cyclically), which is the full block
/// when `k_out = block_size - 1`. Each edge is then rewired with probability
/// `p_rewire` to a uniformly chosen node that is neither the source nor one of
/// its current targets.
pub fn generate_small_world(
    n: usize,
    clusters: usize,
    k_out: usize,
    p_rewire: f64,
    seed: u64,
) -> Result<DirectedLayer, NetworkError> {
    if clusters == 0 || !n.is_multiple_of(clusters) {
        return Err(NetworkError::InvalidParameters(format!(
            "small-world needs n divisible by clusters (n={n}, clusters={clusters})"
        )));
    }
    let size = n / clusters;
    if k_out == 0 || k_out + 1 > size {
        return Err(NetworkError::InvalidParameters(format!(
            "small-world needs 1 <= k_out <= n/clusters - 1 (k_out={k_out}, cluster size={size})"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(NetworkError::InvalidParameters(format!(
            "p_rewire must lie in [0, 1], got {p_rewire}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<NodeId>> = (0..n)
        .map(|u| {
            let base = u - u % size;
            let offset = u % size;
            (1..=k_out)
                .map(|step| NodeId(base + (offset + step) % size))
                .collect()
        })
        .collect();

    if p_rewire > 0.0 {
        for (u, targets) in out.iter_mut().enumerate() {
            for slot in 0..targets.len() {
                if !rng.random_bool(p_rewire) {
                    continue;
                }
                let candidates: Vec<usize> = (0..n)
                    .filter(|&w| w != u && !targets.contains(&NodeId(w)))
                    .collect();
                if let Some(&w) = candidates.choose(&mut rng) {
                    targets[slot] = NodeId(w);
                }
            }
        }
    }
    Ok(DirectedLayer { out })
}

/// Uniform random digraph with fixed out-degree; handy for tests.
pub fn generate_random_regular_out(
    n: usize,
    k_out: usize,
    seed: u64,
) -> Result<DirectedLayer, NetworkError> {
    if k_out + 1 > n {
        return Err(NetworkError::InvalidParameters(format!(
            "random out-regular needs k_out <= n-1 (n={n}, k_out={k_out})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = (0..n)
        .map(|u| {
            let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
            others.shuffle(&mut rng);
            others.into_iter().take(k_out).map(NodeId).collect()
        })
        .collect();
    Ok(DirectedLayer { out })
}
