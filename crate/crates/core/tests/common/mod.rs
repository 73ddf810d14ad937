//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use duplex_diffusion::dynamics::{AgentState, AssociationMatrix, Population, SimRng};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Brute-force CS over nested vectors.
pub fn cs_oracle(v: &[f64], r: &[Vec<f64>], normalize: bool, diagonal: bool) -> f64 {
    let k = v.len();
    let max = r
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let scale = if normalize && max > 0.0 { max } else { 1.0 };
    let mut total = 0.0;
    for (i, row) in r.iter().enumerate() {
        for (j, &rij) in row.iter().enumerate() {
            if i != j || diagonal {
                total += (rij / scale - (v[i] - v[j]).abs()).abs();
            }
        }
    }
    total * 2.0 / (k as f64 * (k as f64 - 1.0))
}

pub fn random_cs_instance(rng: &mut SimRng, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let v = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
    let r = (0..k)
        .map(|_| (0..k).map(|_| rng.random_range(-2.0..10.0)).collect())
        .collect();
    (v, r)
}

fn entropy(p: impl Iterator<Item = f64>) -> f64 {
    -p.filter(|&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()
}

/// MI as `H(X) + H(Y) - H(X, Y)` by enumerating a row-major `k x k` joint.
pub fn mi_oracle(k: usize, p: &[f64]) -> f64 {
    let rows = (0..k).map(|i| (0..k).map(|j| p[i * k + j]).sum::<f64>());
    let cols = (0..k).map(|j| (0..k).map(|i| p[i * k + j]).sum::<f64>());
    entropy(rows) + entropy(cols) - entropy(p.iter().copied())
}

/// Random joint with some exact zeros.
pub fn random_joint(rng: &mut SimRng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k * k)
        .map(|_| {
            if rng.random_bool(0.15) {
                0.0
            } else {
                rng.random::<f64>()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        return vec![1.0 / (k * k) as f64; k * k];
    }
    raw.into_iter().map(|x| x / total).collect()
}

/// Three mean-centred, mutually orthogonal preference patterns.
pub const PLANTED_CENTRES: [[f64; 6]; 3] = [
    [1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 1.0, -1.0],
];

/// `per_cluster` agents around each planted pattern with Gaussian noise.
pub fn planted_population(per_cluster: usize, sigma: f64, rng: &mut SimRng) -> Population {
    let noise = Normal::new(0.0, sigma).unwrap();
    let agents = PLANTED_CENTRES
        .iter()
        .flat_map(|c| std::iter::repeat_n(c, per_cluster))
        .map(|c| {
            let v: Vec<f64> = c.iter().map(|x| x + noise.sample(rng)).collect();
            AgentState::new(v, AssociationMatrix::filled(6, 1.0))
        })
        .collect();
    Population::from_agents(agents)
}
