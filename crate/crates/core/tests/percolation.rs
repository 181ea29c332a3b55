mod common;

use std::collections::HashSet;

use common::{bfs_connects, crossing, cube_ball, replica};
use contact_perc::graphical::{OccupiedField, Provenance};
use contact_perc::percolation::{
    cluster_of, cluster_size_tail, connects, crossing_window, estimate_s, estimate_theta, theta_indicator,
    truncation_radius,
};
use contact_perc::rng::seed_for;
use contact_perc::{MonteCarlo, Vertex};
use rand::Rng;

fn random_field(region: &[Vertex], p: f64, seed: u64) -> OccupiedField {
    let mut rng = seed_for(seed, 0).rng();
    OccupiedField::from_pairs(
        region.iter().map(|v| (v.clone(), rng.random::<f64>() < p)),
        Provenance {
            lambda: 1.0,
            truncation_radius: 1.0,
            seed: None,
        },
    )
}

fn random_subset(region: &[Vertex], k: usize, seed: u64) -> Vec<Vertex> {
    let mut rng = seed_for(seed, 1).rng();
    (0..k).map(|_| region[rng.random_range(0..region.len())].clone()).collect()
}

#[test]
fn theta_matches_dual_evaluator_per_replica() {
    let (n, alpha, lambda, replicas, seed) = (3, 0.5, 0.5, 10_000, 31);
    let window = crossing_window(2, n, alpha).unwrap();
    let r = truncation_radius(n, alpha);
    let mut hits = 0u64;
    for i in 0..replicas {
        let config = replica(&window, seed, i);
        let expected = crossing(config.points(), 2, lambda, n, r);
        assert_eq!(theta_indicator(&config, lambda, n, alpha).unwrap(), expected, "replica {i}");
        hits += u64::from(expected);
    }
    let est = estimate_theta(&MonteCarlo::new(2, replicas, seed), lambda, n, alpha).unwrap();
    assert_eq!(est.mean, hits as f64 / replicas as f64);
}

#[test]
fn s_is_sum_of_thetas() {
    let mc = MonteCarlo::new(2, 400, 32);
    let s1 = estimate_s(&mc, 0.7, 1, 0.5).unwrap();
    assert_eq!(s1.mean, estimate_theta(&mc, 0.7, 1, 0.5).unwrap().mean);
    let s3 = estimate_s(&mc, 0.7, 3, 0.5).unwrap();
    assert!(s3.mean >= s1.mean);
}

#[test]
fn connects_matches_bfs_oracle() {
    let region = cube_ball(&Vertex::origin(2), 3);
    let set: HashSet<Vertex> = region.iter().cloned().collect();
    let mut positives = 0;
    for i in 0..1000 {
        let field = random_field(&region, 0.55, i);
        let occupied: HashSet<Vertex> = field.iter().filter(|(_, b)| *b).map(|(v, _)| v.clone()).collect();
        let a = random_subset(&region, 2, i);
        let b = random_subset(&region, 3, i + 5000);
        let b_set: HashSet<Vertex> = b.iter().cloned().collect();
        let expected = bfs_connects(&occupied, &set, &a, &b_set);
        assert_eq!(connects(&field, &a, &b, &region), expected, "instance {i}");
        assert_eq!(connects(&field, &b, &a, &region), expected);
        positives += usize::from(expected);
    }
    assert!(positives > 100 && positives < 900, "{positives}");
}

#[test]
fn cluster_matches_bfs_oracle() {
    let region = cube_ball(&Vertex::origin(2), 3);
    let set: HashSet<Vertex> = region.iter().cloned().collect();
    for i in 0..300 {
        let field = random_field(&region, 0.6, i + 100);
        let occupied: HashSet<Vertex> = field.iter().filter(|(_, b)| *b).map(|(v, _)| v.clone()).collect();
        let origin = Vertex::origin(2);
        let cluster = cluster_of(&field, &[origin.clone()], &region).unwrap();
        let expected: HashSet<Vertex> = region
            .iter()
            .filter(|v| {
                let target: HashSet<Vertex> = [(*v).clone()].into_iter().collect();
                bfs_connects(&occupied, &set, &[origin.clone()], &target)
            })
            .cloned()
            .collect();
        let got: HashSet<Vertex> = cluster.members.iter().cloned().collect();
        assert_eq!(got, expected, "instance {i}");
    }
}

#[test]
fn tail_is_nested_and_bounded_by_box() {
    let mc = MonteCarlo::new(2, 500, 33);
    let sizes = [1, 2, 3, 5, 8, 13, 25, 26];
    let tail = cluster_size_tail(&mc, 0.3, &sizes, 3, 0.5).unwrap();
    for pair in tail.estimates.windows(2) {
        assert!(pair[1].mean <= pair[0].mean);
    }
    // |Lambda_3| = 25.
    assert_eq!(tail.estimates.last().unwrap().mean, 0.0);
}
