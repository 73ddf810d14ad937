mod common;

use common::{mi_oracle, planted_population, random_joint};
use duplex_diffusion::dynamics::{
    exhibit_pair, init_population, AgentState, AssociationMatrix, MiMode, Population, SimRng,
};
use duplex_diffusion::measures::{
    association_similarity, joint_exhibit_distribution, mean_mutual_information,
    mutual_information, optimal_cluster_count, pearson, preference_congruence,
    preference_similarity, JointExhibitDistribution, MeasurementRecord,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

#[test]
fn mi_matches_entropy_decomposition() {
    let mut rng = SimRng::seed_from_u64(21);
    for case in 0..1000 {
        let k = 1 + case % 4;
        let p = random_joint(&mut rng, k);
        let got = mutual_information(&JointExhibitDistribution::from_table(k, p.clone()));
        let want = mi_oracle(k, &p);
        assert!((got - want).abs() <= 1e-12, "k={k}: {got} vs {want}");
        assert!(got >= -1e-12);
    }
}

#[test]
fn product_joint_has_zero_mi() {
    let mut rng = SimRng::seed_from_u64(22);
    for k in 2..=6 {
        let a: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let (sa, sb) = (a.iter().sum::<f64>(), b.iter().sum::<f64>());
        let p = (0..k * k).map(|x| a[x / k] / sa * b[x % k] / sb).collect();
        let mi = mutual_information(&JointExhibitDistribution::from_table(k, p));
        assert!(mi.abs() <= 1e-12, "{mi}");
    }
}

#[test]
fn sequential_joint_matches_sampler() {
    let agent = AgentState::new(
        vec![0.8, -0.3, 1.6, 0.0, -1.2],
        AssociationMatrix::filled(5, 1.0),
    );
    let joint = joint_exhibit_distribution(&agent, MiMode::Sequential);
    let mut counts = [0u32; 25];
    let mut rng = SimRng::seed_from_u64(23);
    let draws = 1_000_000;
    for _ in 0..draws {
        let (i, j) = exhibit_pair(&agent, &mut rng);
        counts[i * 5 + j] += 1;
    }
    let (mut cdf_emp, mut cdf_law, mut ks) = (0.0, 0.0, 0.0f64);
    for (c, &p) in counts.iter().zip(joint.as_slice()) {
        let freq = *c as f64 / draws as f64;
        assert!((freq - p).abs() <= 0.005, "{freq} vs {p}");
        cdf_emp += freq;
        cdf_law += p;
        ks = ks.max((cdf_emp - cdf_law).abs());
    }
    assert!(ks <= 0.005, "KS distance {ks}");
}

#[test]
fn coupled_joint_is_a_distribution() {
    let mut rng = SimRng::seed_from_u64(24);
    let pop = init_population(10, 5, &mut rng);
    for mut agent in pop.agents {
        agent.associations.set(0, 1, -4.0);
        let joint = joint_exhibit_distribution(&agent, MiMode::AssociationCoupled);
        let total: f64 = joint.as_slice().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((0..5).all(|i| joint.get(i, i) == 0.0));
        assert!(joint.as_slice().iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn identical_population_has_one_cluster() {
    let agent = AgentState::new(vec![0.3, -0.1, 0.9, 0.2], AssociationMatrix::filled(4, 1.0));
    let pop = Population::from_agents(vec![agent; 12]);
    for seed in 0..5 {
        assert_eq!(
            optimal_cluster_count(&pop, 8, 10, &mut SimRng::seed_from_u64(seed)),
            1
        );
    }
}

#[test]
fn planted_clusters_are_recovered() {
    let hits = (0..20)
        .filter(|&seed| {
            let mut rng = SimRng::seed_from_u64(seed);
            let pop = planted_population(10, 0.05, &mut rng);
            optimal_cluster_count(&pop, 8, 10, &mut rng) == 3
        })
        .count();
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn measures_are_pure() {
    let pop = init_population(15, 6, &mut SimRng::seed_from_u64(25));
    let copy = pop.clone();
    let a = MeasurementRecord::capture(3, &pop, MiMode::AssociationCoupled);
    let b = MeasurementRecord::capture(3, &pop, MiMode::AssociationCoupled);
    assert_eq!(pop, copy);
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

fn arb_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, n)
}

fn arb_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..12).prop_flat_map(|n| (arb_vec(n), arb_vec(n)))
}

fn arb_population() -> impl Strategy<Value = Population> {
    (2usize..10, 2usize..7).prop_flat_map(|(n, k)| {
        prop::collection::vec((arb_vec(k), prop::collection::vec(0.0f64..5.0, k * k)), n).prop_map(
            move |agents| {
                Population::from_agents(
                    agents
                        .into_iter()
                        .map(|(v, r)| {
                            let rows: Vec<Vec<f64>> = r.chunks(k).map(<[f64]>::to_vec).collect();
                            AgentState::new(v, AssociationMatrix::from_rows(&rows))
                        })
                        .collect(),
                )
            },
        )
    })
}

proptest! {
    #[test]
    fn pearson_identities((x, y) in arb_pair(), scale in 0.1f64..10.0, shift in -10.0f64..10.0) {
        if let Some(r) = pearson(&x, &x) {
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
        let r = pearson(&x, &y);
        prop_assert_eq!(r, pearson(&y, &x));
        if let Some(r) = r {
            prop_assert!((-1.0..=1.0).contains(&r));
            let affine: Vec<f64> = x.iter().map(|v| scale * v + shift).collect();
            if let Some(ra) = pearson(&affine, &y) {
                prop_assert!((ra - r).abs() < 1e-9);
            }
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson(&x, &neg).unwrap() + r).abs() < 1e-12);
        }
    }

    #[test]
    fn congruence_bounds_similarity(pop in arb_population()) {
        let s = preference_similarity(&pop);
        let c = preference_congruence(&pop);
        prop_assert_eq!(s.excluded, c.excluded);
        if let (Some(s), Some(c)) = (s.mean, c.mean) {
            prop_assert!(c + 1e-12 >= s.abs());
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn congruence_ignores_sign_flips(pop in arb_population(), flips in prop::collection::vec(any::<bool>(), 10)) {
        let mut flipped = pop.clone();
        for (a, &f) in flipped.agents.iter_mut().zip(&flips) {
            if f {
                a.preferences.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let (a, b) = (preference_congruence(&pop).mean, preference_congruence(&flipped).mean);
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
            (a, b) => prop_assert_eq!(a, b),
        }
    }

    #[test]
    fn association_similarity_ignores_common_shift(pop in arb_population(), c in -3.0f64..3.0) {
        let mut shifted = pop.clone();
        for a in &mut shifted.agents {
            let k = a.associations.size();
            for i in 0..k {
                for j in 0..k {
                    a.associations.add(i, j, c);
                }
            }
        }
        let (a, b) = (association_similarity(&pop).mean, association_similarity(&shifted).mean);
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mi_is_nonnegative(pop in arb_population(), coupled: bool) {
        let mode = if coupled { MiMode::AssociationCoupled } else { MiMode::Sequential };
        prop_assert!(mean_mutual_information(&pop, mode) >= -1e-12);
    }
}
