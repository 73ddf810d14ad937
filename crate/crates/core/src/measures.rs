//! Population-level measurements: evaluative agreement (preference
//! similarity and congruence), interpretive agreement (association
//! similarity, normalized association distance), behavioral predictability
//! (mutual information of the pair-exhibition law), and cultural
//! differentiation (gap-statistic cluster count).
//!
//! Logarithms are natural throughout, so information is reported in nats.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    softmax_probabilities, AgentState, AssociationMatrix, MiMode, Population, SimRng,
};

/// Floor for association weights in the coupled exhibition law.
pub const ASSOCIATION_FLOOR: f64 = 1e-9;

/// Product-moment correlation; `None` when either input has zero variance.
///
/// Panics if the lengths differ or are below 2.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson inputs must have equal length");
    assert!(x.len() >= 2, "pearson needs at least two observations");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of a pairwise statistic over unordered agent pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAverage {
    /// `None` when every pair was excluded.
    pub mean: Option<f64>,
    pub excluded: usize,
    pub total: usize,
}

fn average_pairs<T, F>(items: &[T], mut stat: F) -> PairAverage
where
    F: FnMut(&T, &T) -> Option<f64>,
{
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut total = 0usize;
    for (a, first) in items.iter().enumerate() {
        for second in &items[a + 1..] {
            total += 1;
            if let Some(v) = stat(first, second) {
                sum += v;
                used += 1;
            }
        }
    }
    PairAverage {
        mean: (used > 0).then(|| sum / used as f64),
        excluded: total - used,
        total,
    }
}

pub fn preference_similarity(pop: &Population) -> PairAverage {
    average_pairs(&pop.agents, |a, b| pearson(&a.preferences, &b.preferences))
}

pub fn preference_congruence(pop: &Population) -> PairAverage {
    average_pairs(&pop.agents, |a, b| {
        pearson(&a.preferences, &b.preferences).map(f64::abs)
    })
}

/// Mean pairwise correlation of the agents' off-diagonal association entries.
pub fn association_similarity(pop: &Population) -> PairAverage {
    let flattened: Vec<Vec<f64>> = pop
        .agents
        .iter()
        .map(|a| a.associations.off_diagonal().collect())
        .collect();
    average_pairs(&flattened, |a, b| pearson(a, b))
}

/// `(1/K^2) * sum |Ra/max(Ra) - Rb/max(Rb)|`; `None` if either maximum is not positive.
pub fn interpretive_distance(ra: &AssociationMatrix, rb: &AssociationMatrix) -> Option<f64> {
    assert_eq!(
        ra.size(),
        rb.size(),
        "association matrices must share a size"
    );
    let (ma, mb) = (ra.max(), rb.max());
    if !(ma > 0.0 && mb > 0.0) {
        return None;
    }
    let k = ra.size() as f64;
    let sum: f64 = ra
        .as_slice()
        .iter()
        .zip(rb.as_slice())
        .map(|(&a, &b)| (a / ma - b / mb).abs())
        .sum();
    Some(sum / (k * k))
}

pub fn mean_interpretive_distance(pop: &Population) -> PairAverage {
    average_pairs(&pop.agents, |a, b| {
        interpretive_distance(&a.associations, &b.associations)
    })
}

/// Probability of each ordered practice pair `(first, second)`; diagonal zero.
#[derive(Clone, Debug, PartialEq)]
pub struct JointExhibitDistribution {
    k: usize,
    p: Vec<f64>,
}

impl JointExhibitDistribution {
    /// Wraps a row-major `k x k` table. Panics if the shape is wrong.
    pub fn from_table(k: usize, p: Vec<f64>) -> Self {
        assert_eq!(p.len(), k * k, "joint table must be k x k");
        Self { k, p }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.k + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// Exhibition law of one agent's ordered practice pairs.
///
/// `Sequential` is exactly the law of [`crate::dynamics::exhibit_pair`].
/// `AssociationCoupled` keeps the softmax law for the first practice and
/// draws the second with weight `max(R_ij, 1e-9) * exp(V_j)`.
pub fn joint_exhibit_distribution(agent: &AgentState, mode: MiMode) -> JointExhibitDistribution {
    let v = &agent.preferences;
    let k = v.len();
    assert!(k >= 2, "pair exhibition needs at least two practices");
    let first = softmax_probabilities(v);
    let mut p = vec![0.0; k * k];
    for i in 0..k {
        let rest_max = (0..k)
            .filter(|&j| j != i)
            .map(|j| v[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let second: Vec<f64> = (0..k)
            .map(|j| {
                if j == i {
                    return 0.0;
                }
                let w = (v[j] - rest_max).exp();
                match mode {
                    MiMode::Sequential => w,
                    MiMode::AssociationCoupled => {
                        agent.associations.get(i, j).max(ASSOCIATION_FLOOR) * w
                    }
                }
            })
            .collect();
        let rest: f64 = second.iter().sum();
        for j in 0..k {
            p[i * k + j] = first[i] * second[j] / rest;
        }
    }
    JointExhibitDistribution { k, p }
}

/// Mutual information between the first and second practice of a joint law, in nats.
pub fn mutual_information(joint: &JointExhibitDistribution) -> f64 {
    let k = joint.k;
    let mut row = vec![0.0; k];
    let mut col = vec![0.0; k];
    for (idx, &pij) in joint.p.iter().enumerate() {
        row[idx / k] += pij;
        col[idx % k] += pij;
    }
    joint
        .p
        .iter()
        .enumerate()
        .filter(|&(_, &pij)| pij > 0.0)
        .map(|(idx, &pij)| pij * (pij.ln() - row[idx / k].ln() - col[idx % k].ln()))
        .sum()
}

pub fn mean_mutual_information(pop: &Population, mode: MiMode) -> f64 {
    if pop.is_empty() {
        return 0.0;
    }
    let total: f64 = pop
        .agents
        .iter()
        .map(|a| mutual_information(&joint_exhibit_distribution(a, mode)))
        .sum();
    total / pop.len() as f64
}

/// Snapshot of every population-level measure at one time step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub t: u64,
    pub pref_similarity: Option<f64>,
    pub pref_congruence: Option<f64>,
    pub assoc_similarity: Option<f64>,
    pub mean_mutual_info: f64,
    /// Zero-variance exclusions, preference pairs plus association pairs.
    pub excluded_pairs: usize,
    pub interpretive_distance: Option<f64>,
}

impl MeasurementRecord {
    pub fn capture(t: u64, pop: &Population, mode: MiMode) -> Self {
        let sim = preference_similarity(pop);
        let cong = preference_congruence(pop);
        let assoc = association_similarity(pop);
        Self {
            t,
            pref_similarity: sim.mean,
            pref_congruence: cong.mean,
            assoc_similarity: assoc.mean,
            mean_mutual_info: mean_mutual_information(pop, mode),
            excluded_pairs: sim.excluded + assoc.excluded,
            interpretive_distance: mean_interpretive_distance(pop).mean,
        }
    }
}

/// Distance that treats a preference vector and its mirror image as the same pattern.
/// Zero-variance vectors sit at distance 1 from everything.
pub fn congruence_distance(a: &[f64], b: &[f64]) -> f64 {
    pearson(a, b).map_or(1.0, |r| 1.0 - r.abs())
}

fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in a + 1..n {
            let v = congruence_distance(&points[a], &points[b]);
            d[a][b] = v;
            d[b][a] = v;
        }
    }
    d
}

/// Partitioning around medoids (greedy build, then best-improvement swaps).
/// Returns the medoid indices and each point's cluster label.
pub fn k_medoids(dist: &[Vec<f64>], k: usize) -> (Vec<usize>, Vec<usize>) {
    let n = dist.len();
    assert!(k >= 1 && k <= n, "k must lie in 1..=n");
    let cost_of = |medoids: &[usize]| -> f64 {
        (0..n)
            .map(|p| {
                medoids
                    .iter()
                    .map(|&m| dist[p][m])
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    };

    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    while medoids.len() < k {
        let best = (0..n)
            .filter(|c| !medoids.contains(c))
            .map(|c| {
                let mut trial = medoids.clone();
                trial.push(c);
                (cost_of(&trial), c)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, c)| c)
            .unwrap_or(0);
        medoids.push(best);
    }

    let mut cost = cost_of(&medoids);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for slot in 0..k {
            for c in (0..n).filter(|c| !medoids.contains(c)) {
                let mut trial = medoids.clone();
                trial[slot] = c;
                let trial_cost = cost_of(&trial);
                if trial_cost < cost - 1e-12 && best.is_none_or(|(b, _, _)| trial_cost < b) {
                    best = Some((trial_cost, slot, c));
                }
            }
        }
        match best {
            Some((c, slot, m)) => {
                medoids[slot] = m;
                cost = c;
            }
            None => break,
        }
    }

    let labels = (0..n)
        .map(|p| {
            (0..k)
                .min_by(|&a, &b| dist[p][medoids[a]].total_cmp(&dist[p][medoids[b]]))
                .unwrap_or(0)
        })
        .collect();
    (medoids, labels)
}

/// Pooled within-cluster dispersion `sum_r D_r / (2 n_r)`.
fn within_dispersion(dist: &[Vec<f64>], labels: &[usize], k: usize) -> f64 {
    let mut sums = vec![0.0; k];
    let mut sizes = vec![0usize; k];
    for (a, &la) in labels.iter().enumerate() {
        sizes[la] += 1;
        for (b, &lb) in labels.iter().enumerate() {
            if la == lb {
                sums[la] += dist[a][b];
            }
        }
    }
    sums.iter()
        .zip(&sizes)
        .filter(|(_, &s)| s > 0)
        .map(|(d, &s)| d / (2.0 * s as f64))
        .sum()
}

const LOG_FLOOR: f64 = 1e-12;

fn log_dispersion(points: &[Vec<f64>], k: usize) -> f64 {
    let dist = distance_matrix(points);
    let (_, labels) = k_medoids(&dist, k);
    within_dispersion(&dist, &labels, k).max(LOG_FLOOR).ln()
}

/// Gap curve and its standard errors for `k = 1..=k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct GapCurve {
    pub gap: Vec<f64>,
    pub std_err: Vec<f64>,
}

pub fn gap_curve(points: &[Vec<f64>], k_max: usize, n_refs: usize, rng: &mut SimRng) -> GapCurve {
    let k_max = k_max.min(points.len()).max(1);
    let n_refs = n_refs.max(1);
    let observed: Vec<f64> = (1..=k_max).map(|k| log_dispersion(points, k)).collect();
    let mut ref_logs = vec![Vec::with_capacity(n_refs); k_max];
    let dims = points.first().map_or(0, Vec::len);
    for _ in 0..n_refs {
        let mut reference = points.to_vec();
        for c in 0..dims {
            let mut column: Vec<f64> = points.iter().map(|p| p[c]).collect();
            column.shuffle(rng);
            for (row, value) in reference.iter_mut().zip(column) {
                row[c] = value;
            }
        }
        let dist = distance_matrix(&reference);
        for k in 1..=k_max {
            let (_, labels) = k_medoids(&dist, k);
            ref_logs[k - 1].push(within_dispersion(&dist, &labels, k).max(LOG_FLOOR).ln());
        }
    }
    let b = n_refs as f64;
    let mut gap = Vec::with_capacity(k_max);
    let mut std_err = Vec::with_capacity(k_max);
    for (logs, obs) in ref_logs.iter().zip(&observed) {
        let mean = logs.iter().sum::<f64>() / b;
        let sd = (logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / b).sqrt();
        gap.push(mean - obs);
        std_err.push(sd * (1.0 + 1.0 / b).sqrt());
    }
    GapCurve { gap, std_err }
}

/// Smallest `k` with `Gap(k) >= Gap(k+1) - s(k+1)`, clustering preference
/// vectors by [`congruence_distance`]. `k_max` is capped at the population size.
pub fn optimal_cluster_count(
    pop: &Population,
    k_max: usize,
    n_refs: usize,
    rng: &mut SimRng,
) -> usize {
    let points: Vec<Vec<f64>> = pop.agents.iter().map(|a| a.preferences.clone()).collect();
    optimal_cluster_count_of(&points, k_max, n_refs, rng)
}

pub fn optimal_cluster_count_of(
    points: &[Vec<f64>],
    k_max: usize,
    n_refs: usize,
    rng: &mut SimRng,
) -> usize {
    if points.len() <= 1 {
        return 1;
    }
    let dist = distance_matrix(points);
    let all_same = dist.iter().flatten().all(|&d| d <= LOG_FLOOR);
    if all_same {
        return 1;
    }
    let curve = gap_curve(points, k_max, n_refs, rng);
    let k_max = curve.gap.len();
    (1..k_max)
        .find(|&k| curve.gap[k - 1] >= curve.gap[k] - curve.std_err[k])
        .unwrap_or(k_max)
}
