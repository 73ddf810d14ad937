//! Agent state and the combined association / preference transmission process.
//!
//! Each round picks an observer uniformly at random. With probability
//! `1 - alpha` it watches an out-neighbor on the observation layer exhibit a
//! pair of practices, reinforces that association, and proposes a Gaussian
//! tweak to its weaker preference. With probability `alpha` it watches an
//! out-neighbor on the influence layer exhibit one practice, adopts a unit
//! preference increase for it, and proposes a Gaussian tweak to the
//! corresponding association row. Proposals survive only if they move
//! constraint satisfaction in the configured direction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::network::{DuplexNetwork, LayerId, NodeId};

/// Random stream used by every stochastic routine in the crate.
pub type SimRng = ChaCha8Rng;

/// Dense row-major square matrix of associations between practices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssociationMatrix {
    k: usize,
    data: Vec<f64>,
}

impl AssociationMatrix {
    pub fn filled(k: usize, value: f64) -> Self {
        Self {
            k,
            data: vec![value; k * k],
        }
    }

    /// Builds from rows; panics if the rows are not square.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for row in rows {
            assert_eq!(row.len(), k, "association matrix must be square");
            data.extend_from_slice(row);
        }
        Self { k, data }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.k + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.k + j] = value;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, delta: f64) {
        self.data[i * self.k + j] += delta;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.k).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.k;
        self.data
            .iter()
            .enumerate()
            .filter(move |(idx, _)| idx / k != idx % k)
            .map(|(_, &v)| v)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.k.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }
}

/// One agent: a preference per practice and a practice-by-practice association matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub preferences: Vec<f64>,
    pub associations: AssociationMatrix,
}

impl AgentState {
    pub fn new(preferences: Vec<f64>, associations: AssociationMatrix) -> Self {
        assert_eq!(
            preferences.len(),
            associations.size(),
            "preference length must match association size"
        );
        Self {
            preferences,
            associations,
        }
    }

    pub fn practice_count(&self) -> usize {
        self.preferences.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub agents: Vec<AgentState>,
    pub k: usize,
}

impl Population {
    /// Wraps agents that must all share the same practice count.
    pub fn from_agents(agents: Vec<AgentState>) -> Self {
        let k = agents.first().map_or(0, AgentState::practice_count);
        assert!(
            agents.iter().all(|a| a.practice_count() == k),
            "all agents must share the same practice count"
        );
        Self { agents, k }
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }
}

/// Direction in which a proposal must move constraint satisfaction to be kept.
///
/// CS is a mean absolute mismatch, so `Less` keeps proposals that make
/// preferences more coherent with associations. `Greater` keeps proposals
/// that widen the mismatch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Retention {
    /// Keep when CS strictly increases.
    Greater,
    /// Keep when CS strictly decreases.
    #[default]
    Less,
}

/// How the joint pair-exhibition law used for mutual information is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiMode {
    #[default]
    Sequential,
    AssociationCoupled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub alpha: f64,
    pub k: usize,
    pub steps: u64,
    pub symmetric_r: bool,
    pub cs_normalize: bool,
    pub cs_include_diagonal: bool,
    pub retention: Retention,
    pub mi_mode: MiMode,
    pub master_seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            k: 6,
            steps: 100_000,
            symmetric_r: true,
            cs_normalize: false,
            cs_include_diagonal: false,
            retention: Retention::Less,
            mi_mode: MiMode::Sequential,
            master_seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if self.k < 2 {
            return Err(format!("k must be at least 2, got {}", self.k));
        }
        Ok(())
    }

    fn keeps(&self, before: f64, after: f64) -> bool {
        match self.retention {
            Retention::Greater => after > before,
            Retention::Less => after < before,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Association,
    Preference,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Practices {
    None,
    Pair(usize, usize),
    Single(usize),
}

/// Trace record of one round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub kind: StepKind,
    pub observer: NodeId,
    pub sender: Option<NodeId>,
    pub practices: Practices,
    pub proposal_retained: bool,
    /// CS fell back to raw associations because normalization saw `max(R) <= 0`.
    pub cs_fallback: bool,
    /// CS before and after the proposal, both evaluated against the
    /// unperturbed half of the state.
    pub cs_before: f64,
    pub cs_after: f64,
}

impl StepOutcome {
    fn skipped(observer: NodeId) -> Self {
        Self {
            kind: StepKind::Skipped,
            observer,
            sender: None,
            practices: Practices::None,
            proposal_retained: false,
            cs_fallback: false,
            cs_before: f64::NAN,
            cs_after: f64::NAN,
        }
    }
}

/// Uniform preferences on `[-1, 1]`, associations all one.
pub fn init_population(n: usize, k: usize, rng: &mut SimRng) -> Population {
    let agents = (0..n)
        .map(|_| {
            let preferences = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
            AgentState::new(preferences, AssociationMatrix::filled(k, 1.0))
        })
        .collect();
    Population { agents, k }
}

/// Numerically stable softmax.
pub fn softmax_probabilities(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

fn sample_index(weights: &[f64], total: f64, rng: &mut SimRng) -> usize {
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (idx, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = idx;
        if u < w {
            return idx;
        }
        u -= w;
    }
    last
}

fn shifted_weights(v: &[f64]) -> Vec<f64> {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    v.iter().map(|&x| (x - max).exp()).collect()
}

/// One practice drawn from the softmax of the agent's preferences.
pub fn exhibit_single(agent: &AgentState, rng: &mut SimRng) -> usize {
    let w = shifted_weights(&agent.preferences);
    let total = w.iter().sum();
    sample_index(&w, total, rng)
}

/// Two distinct practices: the first from the softmax, the second from the
/// softmax renormalized over the remaining practices.
pub fn exhibit_pair(agent: &AgentState, rng: &mut SimRng) -> (usize, usize) {
    let v = &agent.preferences;
    let w = shifted_weights(v);
    let total = w.iter().sum();
    let i = sample_index(&w, total, rng);
    // Re-shift against the best remaining practice so the second draw cannot underflow.
    let rest_max = v
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != i)
        .map(|(_, &x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    let w2: Vec<f64> = v
        .iter()
        .enumerate()
        .map(|(c, &x)| if c == i { 0.0 } else { (x - rest_max).exp() })
        .collect();
    let rest = w2.iter().sum();
    let j = sample_index(&w2, rest, rng);
    (i, j)
}

/// Result of a constraint-satisfaction evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CsValue {
    pub value: f64,
    /// Normalization was requested but `max(R) <= 0`; raw `R` was used.
    pub fallback: bool,
}

/// Mean absolute mismatch between associations and preference distances,
/// `2 / (K (K - 1)) * sum |R_ij - |V_i - V_j||` over `i != j` (and the
/// diagonal too when `cs_include_diagonal` is set).
pub fn constraint_satisfaction(v: &[f64], r: &AssociationMatrix, cfg: &ModelConfig) -> f64 {
    constraint_satisfaction_checked(v, r, cfg).value
}

pub fn constraint_satisfaction_checked(
    v: &[f64],
    r: &AssociationMatrix,
    cfg: &ModelConfig,
) -> CsValue {
    let k = v.len();
    assert_eq!(k, r.size(), "preference length must match association size");
    let mut scale = 1.0;
    let mut fallback = false;
    if cfg.cs_normalize {
        let m = r.max();
        if m > 0.0 {
            scale = m;
        } else {
            fallback = true;
        }
    }
    let mut sum = 0.0;
    for i in 0..k {
        let row = r.row(i);
        for j in 0..k {
            if i == j && !cfg.cs_include_diagonal {
                continue;
            }
            sum += (row[j] / scale - (v[i] - v[j]).abs()).abs();
        }
    }
    let value = if k < 2 {
        0.0
    } else {
        2.0 / (k * (k - 1)) as f64 * sum
    };
    CsValue { value, fallback }
}

fn pick_observer_and_sender(
    net: &DuplexNetwork,
    layer: LayerId,
    rng: &mut SimRng,
) -> (NodeId, Option<NodeId>) {
    let observer = NodeId(rng.random_range(0..net.node_count()));
    let candidates = net.out_neighbors(layer, observer);
    if candidates.is_empty() {
        return (observer, None);
    }
    let sender = candidates[rng.random_range(0..candidates.len())];
    (observer, Some(sender))
}

/// Weaker of two preferences by magnitude; ties go to the smaller index.
fn weaker_practice(v: &[f64], i: usize, j: usize) -> usize {
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    if v[hi].abs() < v[lo].abs() {
        hi
    } else {
        lo
    }
}

pub fn association_step(
    pop: &mut Population,
    net: &DuplexNetwork,
    cfg: &ModelConfig,
    rng: &mut SimRng,
) -> StepOutcome {
    let (observer, sender) = pick_observer_and_sender(net, LayerId::Observation, rng);
    let Some(sender) = sender else {
        return StepOutcome::skipped(observer);
    };
    let (i, j) = exhibit_pair(&pop.agents[sender.index()], rng);
    let agent = &mut pop.agents[observer.index()];
    agent.associations.add(i, j, 1.0);
    if cfg.symmetric_r {
        agent.associations.add(j, i, 1.0);
    }

    let target = weaker_practice(&agent.preferences, i, j);
    let delta: f64 = StandardNormal.sample(rng);
    let before = constraint_satisfaction_checked(&agent.preferences, &agent.associations, cfg);
    let old = agent.preferences[target];
    agent.preferences[target] = old + delta;
    let after = constraint_satisfaction_checked(&agent.preferences, &agent.associations, cfg);
    let retained = cfg.keeps(before.value, after.value);
    if !retained {
        agent.preferences[target] = old;
    }
    StepOutcome {
        kind: StepKind::Association,
        observer,
        sender: Some(sender),
        practices: Practices::Pair(i, j),
        proposal_retained: retained,
        cs_fallback: before.fallback || after.fallback,
        cs_before: before.value,
        cs_after: after.value,
    }
}

pub fn preference_step(
    pop: &mut Population,
    net: &DuplexNetwork,
    cfg: &ModelConfig,
    rng: &mut SimRng,
) -> StepOutcome {
    let (observer, sender) = pick_observer_and_sender(net, LayerId::Influence, rng);
    let Some(sender) = sender else {
        return StepOutcome::skipped(observer);
    };
    let i = exhibit_single(&pop.agents[sender.index()], rng);
    let agent = &mut pop.agents[observer.index()];
    agent.preferences[i] += 1.0;

    let k = agent.practice_count();
    let before = constraint_satisfaction_checked(&agent.preferences, &agent.associations, cfg);
    let saved = agent.associations.clone();
    for c in 0..k {
        let delta: f64 = StandardNormal.sample(rng);
        agent.associations.add(i, c, delta);
        if cfg.symmetric_r && c != i {
            agent.associations.add(c, i, delta);
        }
    }
    let after = constraint_satisfaction_checked(&agent.preferences, &agent.associations, cfg);
    let retained = cfg.keeps(before.value, after.value);
    if !retained {
        agent.associations = saved;
    }
    StepOutcome {
        kind: StepKind::Preference,
        observer,
        sender: Some(sender),
        practices: Practices::Single(i),
        proposal_retained: retained,
        cs_fallback: before.fallback || after.fallback,
        cs_before: before.value,
        cs_after: after.value,
    }
}

/// One round: preference transmission with probability `alpha`, association
/// transmission otherwise.
pub fn step(
    pop: &mut Population,
    net: &DuplexNetwork,
    cfg: &ModelConfig,
    rng: &mut SimRng,
) -> StepOutcome {
    if rng.random_bool(cfg.alpha) {
        preference_step(pop, net, cfg, rng)
    } else {
        association_step(pop, net, cfg, rng)
    }
}

/// Observer of a running simulation.
pub trait RunObserver {
    /// Called at `t = 0`, every `sample_every` steps, and at the final step.
    fn sample(&mut self, t: u64, pop: &Population);

    /// Called after every step.
    fn step(&mut self, _t: u64, _outcome: &StepOutcome) {}
}

impl<F: FnMut(u64, &Population)> RunObserver for F {
    fn sample(&mut self, t: u64, pop: &Population) {
        self(t, pop)
    }
}

/// Runs `cfg.steps` rounds from a stream seeded by `cfg.master_seed`.
pub fn run<O: RunObserver + ?Sized>(
    mut pop: Population,
    net: &DuplexNetwork,
    cfg: &ModelConfig,
    sample_every: u64,
    observer: &mut O,
) -> Population {
    assert!(sample_every >= 1, "sample_every must be at least 1");
    assert_eq!(
        pop.len(),
        net.node_count(),
        "population size must match the network"
    );
    let mut rng = SimRng::seed_from_u64(cfg.master_seed);
    observer.sample(0, &pop);
    for t in 1..=cfg.steps {
        let outcome = step(&mut pop, net, cfg, &mut rng);
        observer.step(t, &outcome);
        if t % sample_every == 0 || t == cfg.steps {
            observer.sample(t, &pop);
        }
    }
    pop
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{duplicate, generate_complete, DirectedLayer};

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    fn agent(v: &[f64]) -> AgentState {
        AgentState::new(v.to_vec(), AssociationMatrix::filled(v.len(), 1.0))
    }

    #[test]
    fn init_population_contract() {
        let pop = init_population(30, 6, &mut rng(1));
        assert_eq!(pop.len(), 30);
        for a in &pop.agents {
            assert!(a.associations.as_slice().iter().all(|&x| x == 1.0));
            assert!(a.preferences.iter().all(|&x| (-1.0..=1.0).contains(&x)));
        }
        assert_eq!(pop, init_population(30, 6, &mut rng(1)));
        assert_ne!(pop, init_population(30, 6, &mut rng(2)));
    }

    #[test]
    fn softmax_values() {
        let p = softmax_probabilities(&[0.0; 5]);
        assert!(p.iter().all(|&x| (x - 0.2).abs() < 1e-15));
        let p = softmax_probabilities(&[1.0, 0.0]);
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        let shifted = softmax_probabilities(&[1001.0, 1000.0]);
        assert!((shifted[0] - p[0]).abs() < 1e-12);
        let sum: f64 = softmax_probabilities(&[3.0, -700.0, 12.5, 0.1])
            .iter()
            .sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exhibit_single_frequencies() {
        let mut r = rng(5);
        let a = agent(&[0.0, 0.0]);
        let hits = (0..100_000)
            .filter(|_| exhibit_single(&a, &mut r) == 0)
            .count();
        assert!((hits as f64 / 1e5 - 0.5).abs() < 0.01);

        let a = agent(&[10.0, -10.0]);
        let hits = (0..100_000)
            .filter(|_| exhibit_single(&a, &mut r) == 0)
            .count();
        assert!(hits as f64 / 1e5 > 0.9999);

        let one = AgentState::new(vec![3.0], AssociationMatrix::filled(1, 1.0));
        assert_eq!(exhibit_single(&one, &mut r), 0);
    }

    #[test]
    fn exhibit_pair_laws() {
        let mut r = rng(9);
        let two = agent(&[0.3, -0.2]);
        for _ in 0..1000 {
            let (i, j) = exhibit_pair(&two, &mut r);
            assert_ne!(i, j);
            assert!(i < 2 && j < 2);
        }

        let uniform = agent(&[0.0, 0.0, 0.0]);
        let mut counts = [[0usize; 3]; 3];
        for _ in 0..120_000 {
            let (i, j) = exhibit_pair(&uniform, &mut r);
            counts[i][j] += 1;
        }
        for (i, row) in counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if i == j {
                    assert_eq!(c, 0);
                } else {
                    assert!((c as f64 / 120_000.0 - 1.0 / 6.0).abs() < 0.01);
                }
            }
        }

        let peaked = agent(&[5.0, 0.0, 0.0]);
        let e5 = 5f64.exp();
        let first = (0..100_000)
            .filter(|_| exhibit_pair(&peaked, &mut r).0 == 0)
            .count();
        assert!((first as f64 / 1e5 - e5 / (e5 + 2.0)).abs() < 0.01);
    }

    #[test]
    fn cs_hand_values() {
        let cfg = ModelConfig::default();
        let ones = AssociationMatrix::filled(2, 1.0);
        assert_eq!(constraint_satisfaction(&[1.0, -1.0], &ones, &cfg), 2.0);
        assert_eq!(constraint_satisfaction(&[0.0, 0.0], &ones, &cfg), 2.0);
        let zeros = AssociationMatrix::filled(4, 0.0);
        assert_eq!(constraint_satisfaction(&[0.7; 4], &zeros, &cfg), 0.0);
    }

    #[test]
    fn cs_diagonal_and_normalization() {
        let r = AssociationMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 4.0]]);
        let v = [0.0, 1.0];
        let base = ModelConfig::default();
        // off-diagonal: 2 * |2 - 1| = 2
        assert_eq!(constraint_satisfaction(&v, &r, &base), 2.0);
        let diag = ModelConfig {
            cs_include_diagonal: true,
            ..base.clone()
        };
        assert_eq!(constraint_satisfaction(&v, &r, &diag), 10.0);
        let norm = ModelConfig {
            cs_normalize: true,
            ..base.clone()
        };
        // R / 4 = [[1, .5], [.5, 1]]; off-diagonal: 2 * |.5 - 1| = 1
        assert_eq!(constraint_satisfaction(&v, &r, &norm), 1.0);
        let neg = AssociationMatrix::filled(2, -1.0);
        let checked = constraint_satisfaction_checked(&v, &neg, &norm);
        assert!(checked.fallback);
        assert_eq!(checked.value, constraint_satisfaction(&v, &neg, &base));
    }

    #[test]
    fn weaker_practice_tie_break() {
        assert_eq!(weaker_practice(&[0.5, -0.5, 2.0], 1, 0), 0);
        assert_eq!(weaker_practice(&[0.5, -0.1, 2.0], 0, 1), 1);
        assert_eq!(weaker_practice(&[0.5, -0.1, 0.2], 2, 0), 2);
    }

    #[test]
    fn association_step_reinforces_observed_pair() {
        let net = duplicate(&generate_complete(2));
        let cfg = ModelConfig::default();
        let mut r = rng(11);
        let mut hits = 0;
        let trials = 2000;
        for _ in 0..trials {
            let sender_v = [10.0, 9.0, -10.0, -10.0];
            let mut pop = Population::from_agents(vec![agent(&sender_v), agent(&sender_v)]);
            let before = pop.clone();
            let out = association_step(&mut pop, &net, &cfg, &mut r);
            let o = out.observer.index();
            let Practices::Pair(i, j) = out.practices else {
                panic!("expected pair")
            };
            if (i, j) == (0, 1) {
                hits += 1;
            }
            let diff =
                pop.agents[o].associations.get(i, j) - before.agents[o].associations.get(i, j);
            assert_eq!(diff, 1.0);
            if !out.proposal_retained {
                assert_eq!(pop.agents[o].preferences, before.agents[o].preferences);
            }
        }
        assert!(hits as f64 / trials as f64 > 0.7);
    }

    #[test]
    fn preference_step_increments_once() {
        let net = duplicate(&generate_complete(5));
        let cfg = ModelConfig::default();
        let mut r = rng(3);
        let mut pop = init_population(5, 4, &mut r);
        for _ in 0..500 {
            let before = pop.clone();
            let out = preference_step(&mut pop, &net, &cfg, &mut r);
            let o = out.observer.index();
            let changed: Vec<usize> = (0..4)
                .filter(|&c| pop.agents[o].preferences[c] != before.agents[o].preferences[c])
                .collect();
            assert_eq!(changed.len(), 1);
            let c = changed[0];
            assert_eq!(out.practices, Practices::Single(c));
            assert_eq!(
                pop.agents[o].preferences[c],
                before.agents[o].preferences[c] + 1.0
            );
            if !out.proposal_retained {
                assert_eq!(pop.agents[o].associations, before.agents[o].associations);
            }
            assert!(pop.agents[o].associations.is_symmetric());
        }
    }

    #[test]
    fn preference_step_follows_dominant_sender() {
        let net = duplicate(&generate_complete(2));
        let cfg = ModelConfig::default();
        let mut r = rng(4);
        for _ in 0..1000 {
            let mut pop =
                Population::from_agents(vec![agent(&[10.0, -10.0]), agent(&[10.0, -10.0])]);
            let out = preference_step(&mut pop, &net, &cfg, &mut r);
            assert_eq!(out.practices, Practices::Single(0));
        }
    }

    #[test]
    fn empty_neighborhood_skips() {
        let net = duplicate(&DirectedLayer::empty(3));
        let cfg = ModelConfig {
            alpha: 0.5,
            ..ModelConfig::default()
        };
        let mut r = rng(0);
        let mut pop = init_population(3, 3, &mut r);
        let before = pop.clone();
        for _ in 0..50 {
            let out = step(&mut pop, &net, &cfg, &mut r);
            assert_eq!(out.kind, StepKind::Skipped);
            assert_eq!(out.sender, None);
        }
        assert_eq!(pop, before);
    }

    #[test]
    fn step_selection_by_alpha() {
        let net = duplicate(&generate_complete(4));
        let mut r = rng(8);
        let mut pop = init_population(4, 3, &mut r);
        for (alpha, want) in [(0.0, StepKind::Association), (1.0, StepKind::Preference)] {
            let cfg = ModelConfig {
                alpha,
                ..ModelConfig::default()
            };
            for _ in 0..200 {
                assert_eq!(step(&mut pop, &net, &cfg, &mut r).kind, want);
            }
        }
        let cfg = ModelConfig {
            alpha: 0.5,
            ..ModelConfig::default()
        };
        let mut pop = init_population(4, 3, &mut r);
        let assoc = (0..100_000)
            .filter(|_| step(&mut pop, &net, &cfg, &mut r).kind == StepKind::Association)
            .count();
        assert!((assoc as f64 / 1e5 - 0.5).abs() < 0.01);
    }

    #[test]
    fn run_zero_steps_samples_once() {
        let net = duplicate(&generate_complete(3));
        let cfg = ModelConfig {
            steps: 0,
            ..ModelConfig::default()
        };
        let pop = init_population(3, 3, &mut rng(1));
        let mut times = Vec::new();
        let out = run(
            pop.clone(),
            &net,
            &cfg,
            10,
            &mut |t: u64, _: &Population| times.push(t),
        );
        assert_eq!(times, vec![0]);
        assert_eq!(out, pop);
    }

    #[test]
    fn run_sampling_cadence() {
        let net = duplicate(&generate_complete(3));
        let cfg = ModelConfig {
            steps: 25,
            ..ModelConfig::default()
        };
        let pop = init_population(3, 3, &mut rng(1));
        let mut times = Vec::new();
        run(pop, &net, &cfg, 10, &mut |t: u64, _: &Population| {
            times.push(t)
        });
        assert_eq!(times, vec![0, 10, 20, 25]);
    }
}
