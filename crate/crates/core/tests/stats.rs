use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use znav_core::navigator::{Outcome, TrajectorySample, VesselState};
use znav_core::stats::{occupancy, summarize, Bounds, OccupancyGrid};
use znav_core::{Trajectory, Vec2};

fn sample(t: f64, x: f64, y: f64) -> TrajectorySample<f64> {
    TrajectorySample {
        t,
        state: VesselState::new(Vec2::new(x, y), 0.0, true),
        action: None,
        reward: 0.0,
    }
}

/// Random walk inside `[0, 10)²` with random step times.
fn random_trajectory(rng: &mut ChaCha8Rng) -> Trajectory {
    let n = rng.random_range(2..40);
    let (mut t, mut x, mut y) = (0.0, rng.random_range(1.0..9.0), rng.random_range(1.0..9.0));
    let mut samples = vec![sample(t, x, y)];
    for _ in 1..n {
        t += rng.random_range(0.01..0.5);
        x = (x + rng.random_range(-0.7..0.7f64)).clamp(0.0, 9.999);
        y = (y + rng.random_range(-0.7..0.7f64)).clamp(0.0, 9.999);
        samples.push(sample(t, x, y));
    }
    let reached = rng.random_bool(0.8);
    Trajectory {
        samples,
        outcome: if reached { Outcome::Reached { arrival_time: t } } else { Outcome::Failed },
        power_on_time: t * rng.random_range(0.0..1.0),
        flow_time_offset: 0.0,
    }
}

fn ensemble(seed: u64, n: usize) -> Vec<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_trajectory(&mut rng)).collect()
}

fn arrival(t: f64) -> Trajectory {
    Trajectory {
        samples: vec![sample(0.0, 0.0, 0.0), sample(t, 1.0, 0.0)],
        outcome: Outcome::Reached { arrival_time: t },
        power_on_time: t,
        flow_time_offset: 0.0,
    }
}

fn failure(t: f64) -> Trajectory {
    Trajectory {
        outcome: Outcome::Failed,
        ..arrival(t)
    }
}

fn unit_bounds() -> Bounds {
    Bounds::new(0.0, 0.0, 10.0, 10.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_mass_and_failures_add_to_one(seed in any::<u64>(), n in 0usize..200, bins in 1usize..80) {
        let trajs = ensemble(seed, n);
        let s = summarize(&trajs, 1.5, bins).unwrap();
        prop_assert_eq!(s.n_total, n);
        if n > 0 {
            let reached = (n - s.n_failed) as f64 / n as f64;
            prop_assert!((s.arrival_pdf.total_mass() - reached).abs() < 1e-12);
            prop_assert!((s.power_pdf.total_mass() - reached).abs() < 1e-12);
            prop_assert!((s.arrival_pdf.total_mass() + s.failure_rate - 1.0).abs() < 1e-12);
        }
        prop_assert!(s.arrival_pdf.counts.len() == bins);
    }

    #[test]
    fn summary_ignores_order(seed in any::<u64>(), n in 1usize..100) {
        let trajs = ensemble(seed, n);
        let mut shuffled = trajs.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        prop_assert_eq!(summarize(&trajs, 2.0, 50).unwrap(), summarize(&shuffled, 2.0, 50).unwrap());
    }

    #[test]
    fn occupancy_is_additive(seed in any::<u64>(), n in 1usize..30, split in 0usize..30) {
        let trajs = ensemble(seed, n);
        let split = split.min(n);
        let whole = occupancy(&trajs, 0.37, unit_bounds()).unwrap();
        let mut parts = occupancy(&trajs[..split], 0.37, unit_bounds()).unwrap();
        parts.merge(&occupancy(&trajs[split..], 0.37, unit_bounds()).unwrap()).unwrap();
        for (a, b) in whole.time.iter().zip(&parts.time) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn occupancy_conserves_time(seed in any::<u64>(), n in 1usize..50, pixel in 0.05f64..2.0) {
        let trajs = ensemble(seed, n);
        let grid = occupancy(&trajs, pixel, unit_bounds()).unwrap();
        let durations: f64 = trajs.iter().map(|t| t.duration()).sum();
        prop_assert!(grid.time.iter().all(|&x| x >= 0.0));
        prop_assert!((grid.total() - durations).abs() <= 1e-6 * durations);
        prop_assert_eq!(grid.outside, 0.0);
    }
}

#[test]
fn identical_arrivals_fill_one_bin() {
    let trajs: Vec<Trajectory> = (0..10).map(|_| arrival(3.0)).collect();
    let s = summarize(&trajs, 3.0, 50).unwrap();
    assert_eq!(s.failure_rate, 0.0);
    let occupied: Vec<usize> = (0..50).filter(|&i| s.arrival_pdf.counts[i] > 0).collect();
    assert_eq!(occupied.len(), 1);
    let i = occupied[0];
    assert!(s.arrival_pdf.bin_edges[i] <= 1.0 && 1.0 < s.arrival_pdf.bin_edges[i + 1]);
    assert_eq!(s.arrival_pdf.counts[i], 10);
}

#[test]
fn one_failure_in_a_thousand() {
    let mut trajs: Vec<Trajectory> = (0..999).map(|i| arrival(1.0 + i as f64 * 1e-3)).collect();
    trajs.push(failure(40.0));
    let s = summarize(&trajs, 1.0, 50).unwrap();
    assert_eq!(s.n_failed, 1);
    assert!((s.failure_rate - 1e-3).abs() < 1e-15);
}

#[test]
fn all_failures_leave_empty_pdfs() {
    let trajs: Vec<Trajectory> = (0..7).map(|_| failure(10.0)).collect();
    let s = summarize(&trajs, 1.0, 20).unwrap();
    assert_eq!(s.failure_rate, 1.0);
    assert_eq!(s.arrival_pdf.total_count(), 0);
    assert_eq!(s.median_t, None);
    let empty = summarize::<f64>(&[], 1.0, 20).unwrap();
    assert_eq!(empty.n_total, 0);
    assert_eq!(empty.arrival_pdf.total_mass(), 0.0);
}

#[test]
fn resting_vessel_fills_one_pixel() {
    let tr = Trajectory {
        samples: vec![sample(0.0, 2.5, 3.5), sample(4.0, 2.5, 3.5)],
        outcome: Outcome::Failed,
        power_on_time: 0.0,
        flow_time_offset: 0.0,
    };
    let g = occupancy(&[tr], 1.0, unit_bounds()).unwrap();
    assert_eq!(g.at(2, 3), 4.0);
    assert_eq!(g.total(), 4.0);
    assert_eq!(g.time.iter().filter(|&&x| x > 0.0).count(), 1);
}

#[test]
fn straight_crossing_splits_evenly() {
    let tr = Trajectory {
        samples: vec![sample(0.0, 1.0, 0.5), sample(2.0, 3.0, 0.5)],
        outcome: Outcome::Failed,
        power_on_time: 0.0,
        flow_time_offset: 0.0,
    };
    let g = occupancy(&[tr], 1.0, unit_bounds()).unwrap();
    assert!((g.at(1, 0) - 1.0).abs() < 1e-9);
    assert!((g.at(2, 0) - 1.0).abs() < 1e-9);
}

#[test]
fn merge_rejects_other_layouts() {
    let mut a = OccupancyGrid::empty(1.0, unit_bounds()).unwrap();
    let b = OccupancyGrid::empty(0.5, unit_bounds()).unwrap();
    assert!(a.merge(&b).is_err());
}
