use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use znav_core::flowfield::{
    export_flow, generate_snapshot, generate_unsteady, import_flow, measure_spectrum, read_flow, write_flow,
    EvolutionParams, FlowField, FourierMode, ModeSum, SpectrumSpec,
};
use znav_core::geom::Vec2;
use znav_core::Error;

fn snapshot(seed: u64) -> FlowField<f64> {
    generate_snapshot(&SpectrumSpec::kolmogorov(1, 10, seed)).unwrap()
}

fn random_points(n: usize, seed: u64) -> Vec<Vec2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Vec2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0)))
        .collect()
}

/// Central differences of the velocity with step `h`, as
/// `[[du/dx, du/dy], [dv/dx, dv/dy]]`. Divides by the distance between the
/// stencil points as actually represented.
fn fd_gradient(flow: &FlowField<f64>, x: Vec2<f64>, t: f64, h: f64) -> [[f64; 2]; 2] {
    let (xp, xm) = (Vec2::new(x.x + h, x.y), Vec2::new(x.x - h, x.y));
    let (yp, ym) = (Vec2::new(x.x, x.y + h), Vec2::new(x.x, x.y - h));
    let dx = (flow.velocity(xp, t) - flow.velocity(xm, t)).scale(1.0 / (xp.x - xm.x));
    let dy = (flow.velocity(yp, t) - flow.velocity(ym, t)).scale(1.0 / (yp.y - ym.y));
    [[dx.x, dy.x], [dx.y, dy.y]]
}

/// Rounds to a multiple of 2^-40 so that sums of such values below 8 are exact.
fn dyadic(v: f64) -> f64 {
    (v * 2f64.powi(40)).round() / 2f64.powi(40)
}

/// Divergence from the fourth-order five-point central difference with step
/// `h`; its truncation error is `O(h^4)`, far below rounding at `h = 1e-5`.
/// Point and step are snapped to a dyadic grid so every stencil offset is exact.
fn fd_divergence(flow: &FlowField<f64>, x: Vec2<f64>, t: f64, h: f64) -> f64 {
    let (x, h) = (Vec2::new(dyadic(x.x), dyadic(x.y)), dyadic(h));
    let d = |e: Vec2<f64>, pick: fn(Vec2<f64>) -> f64| {
        let f = |m: f64| pick(flow.velocity(x + e.scale(m), t));
        (8.0 * (f(1.0) - f(-1.0)) - (f(2.0) - f(-2.0))) / (12.0 * h)
    };
    d(Vec2::new(h, 0.0), |u| u.x) + d(Vec2::new(0.0, h), |u| u.y)
}

fn gradient_error(flow: &FlowField<f64>, t: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for x in random_points(1000, 5) {
        let a = flow.sample(x, t).gradient;
        let fd = fd_gradient(flow, x, t, 1e-5);
        let scale = a.m.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((a.m[i][j] - fd[i][j]).abs() / scale);
            }
        }
    }
    worst
}

#[test]
fn snapshot_gradient_matches_finite_differences() {
    assert!(gradient_error(&snapshot(7), 0.0) < 1e-6);
}

#[test]
fn analytic_gradient_matches_finite_differences() {
    assert!(gradient_error(&FlowField::taylor_green(1.3), 0.0) < 1e-6);
}

#[test]
fn unsteady_gradient_matches_finite_differences() {
    let flow = generate_unsteady(&SpectrumSpec::kolmogorov(1, 8, 3), 2.0).unwrap();
    assert!(gradient_error(&flow, 3.7) < 1e-6);
}

#[test]
fn unsteady_trace_is_exactly_zero() {
    let flow = generate_unsteady(&SpectrumSpec::kolmogorov(1, 10, 11), 1.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x = Vec2::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let t = rng.random_range(0.0..50.0);
        assert_eq!(flow.sample(x, t).gradient.trace(), 0.0);
    }
}

fn max_fd_divergence(flow: &FlowField<f64>, h: f64) -> f64 {
    let u_max = flow.u_max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..100)
        .map(|_| {
            // inside one period, so no wrap-around rounding enters the stencil
            let x = Vec2::new(rng.random_range(0.01..TAU - 0.01), rng.random_range(0.01..TAU - 0.01));
            let t = rng.random_range(0.0..50.0);
            fd_divergence(flow, x, t, h).abs() / (u_max / TAU)
        })
        .fold(0.0, f64::max)
}

#[test]
fn analytic_flow_is_divergence_free() {
    let worst = max_fd_divergence(&FlowField::taylor_green(1.0), 1e-5);
    assert!(worst < 1e-10, "relative divergence {worst:e}");
}

#[test]
fn spectral_snapshot_is_divergence_free() {
    let worst = max_fd_divergence(&generate_snapshot(&SpectrumSpec::kolmogorov(1, 12, 3)).unwrap(), 1e-5);
    assert!(worst < 1e-10, "relative divergence {worst:e}");
}

#[test]
fn fields_are_periodic() {
    let flows = [snapshot(2), FlowField::taylor_green(1.0), generate_unsteady(&SpectrumSpec::kolmogorov(1, 6, 4), 3.0).unwrap()];
    for flow in &flows {
        let l = flow.period();
        for x in random_points(50, 9) {
            let base = flow.sample(x, 1.25);
            for m in [-2.0, -1.0, 1.0, 2.0] {
                for shift in [Vec2::new(m * l, 0.0), Vec2::new(0.0, m * l)] {
                    let s = flow.sample(x + shift, 1.25);
                    assert!((s.velocity - base.velocity).norm() < 1e-9);
                    for i in 0..2 {
                        for j in 0..2 {
                            assert!((s.gradient.m[i][j] - base.gradient.m[i][j]).abs() < 1e-8);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn spectrum_slope_over_inertial_range() {
    for seed in 0..6 {
        let spec = SpectrumSpec::kolmogorov(1, 12, seed);
        let flow = generate_snapshot(&spec).unwrap();
        let s = measure_spectrum(&flow, 64, 0.0).unwrap();
        let slope = s.fit_slope(2, 11).unwrap();
        assert!((slope + 5.0 / 3.0).abs() <= 0.15, "seed {seed}: {slope}");
    }
    let s = measure_spectrum(&snapshot(7), 64, 0.0).unwrap();
    assert!((s.fit_slope(1, 10).unwrap() + 5.0 / 3.0).abs() <= 0.1);
}

#[test]
fn spectrum_energy_matches_mean_kinetic_energy() {
    let flow = snapshot(3);
    let s = measure_spectrum(&flow, 64, 0.0).unwrap();
    let n = 64;
    let mut e = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = Vec2::new(TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            e += 0.5 * flow.velocity(x, 0.0).norm().powi(2);
        }
    }
    e /= (n * n) as f64;
    assert!((s.total() - e).abs() < 1e-10 * e);
}

#[test]
fn single_mode_decorrelates() {
    // ensemble over path seeds of u(x, t)·u(x, t + 10τ) at a fixed point
    let tau = 1.0;
    let x = Vec2::new(0.3, 1.1);
    let (mut cross, mut norm) = (0.0, 0.0);
    for seed in 0..400 {
        let mut m = FourierMode::frozen(1, 0, 1.0, 0.4);
        m.decorrelation_rate = 1.0 / tau;
        let sum = ModeSum::new(vec![m], TAU)
            .unwrap()
            .evolving(EvolutionParams {
                seed,
                horizon: 100.0 * tau,
                knots_per_decorrelation: 4,
            })
            .unwrap();
        let flow = FlowField::from_mode_sum(sum);
        let t = 7.3;
        let a = flow.velocity(x, t);
        let b = flow.velocity(x, t + 10.0 * tau);
        cross += a.dot(b);
        norm += 0.5 * (a.dot(a) + b.dot(b));
    }
    let rho = cross / norm;
    assert!(rho.abs() < 0.2, "autocorrelation {rho}");
}

#[test]
fn infinite_decorrelation_time_is_frozen() {
    let spec = SpectrumSpec::kolmogorov(1, 8, 5);
    let flow = generate_unsteady(&spec, f64::INFINITY).unwrap();
    let frozen = generate_snapshot(&spec).unwrap();
    for x in random_points(20, 1) {
        assert_eq!(flow.velocity(x, 0.0), flow.velocity(x, 123.0));
        assert_eq!(flow.velocity(x, 0.0), frozen.velocity(x, 0.0));
    }
}

#[test]
fn non_positive_decorrelation_time_is_rejected() {
    let spec = SpectrumSpec::kolmogorov(1, 8, 5);
    for tau in [0.0, -1.0] {
        assert!(matches!(generate_unsteady(&spec, tau), Err(Error::Parameter { .. })));
    }
}

#[test]
fn generation_is_deterministic() {
    assert_eq!(snapshot(7), snapshot(7));
    assert_ne!(snapshot(7), snapshot(8));
    assert_eq!(snapshot(7).u_max(0.0), snapshot(7).u_max(0.0));
}

#[test]
fn single_mode_closed_form() {
    let a = 0.7;
    let flow = FlowField::from_mode_sum(ModeSum::new(vec![FourierMode::frozen(1, 0, a, 0.0)], TAU).unwrap());
    for p in random_points(20, 4) {
        let u = flow.velocity(p, 0.0);
        assert!(u.x.abs() < 1e-15);
        assert!((u.y + a * p.x.cos()).abs() < 1e-12);
    }
    assert!((flow.u_max(0.0) - a).abs() < 1e-12);
}

#[test]
fn taylor_green_at_corner() {
    let s = FlowField::taylor_green(1.0).sample(Vec2::new(PI / 2.0, 0.0), 0.0);
    assert!((s.velocity - Vec2::new(1.0, 0.0)).norm() < 1e-15);
    assert!(s.gradient.m.iter().flatten().all(|v| v.abs() < 1e-15));
    assert!((FlowField::<f64>::taylor_green(1.0).u_max(0.0) - 1.0).abs() < 1e-12);
}

#[test]
fn quarter_turns_rotate_the_field() {
    let flows = [snapshot(4), FlowField::taylor_green(0.9)];
    for flow in &flows {
        for q in 1..4 {
            let rotated = flow.rotated_quarter_turns(q).unwrap();
            let angle = q as f64 * PI / 2.0;
            for x in random_points(50, q as u64) {
                let lhs = rotated.velocity(x.rotated(angle), 0.0);
                let rhs = flow.velocity(x, 0.0).rotated(angle);
                assert!((lhs - rhs).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn file_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let flows = [snapshot(7), generate_unsteady(&SpectrumSpec::kolmogorov(1, 6, 2), 2.5).unwrap()];
    for (i, flow) in flows.iter().enumerate() {
        let path = dir.path().join(format!("f{i}.znf"));
        export_flow(flow, &path).unwrap();
        let back = import_flow(&path).unwrap();
        for x in random_points(100, 3) {
            assert_eq!(back.velocity(x, 4.2), flow.velocity(x, 4.2));
        }
    }
}

#[test]
fn truncated_file_is_a_format_error() {
    let bytes = write_flow(&snapshot(1));
    for cut in [0, 5, 30, bytes.len() / 2, bytes.len() - 1] {
        assert!(matches!(read_flow::<f64>(&bytes[..cut]), Err(Error::Format { .. })), "cut {cut}");
    }
}

#[test]
fn unknown_version_names_the_tag() {
    let text = String::from_utf8_lossy(&write_flow(&FlowField::<f64>::quiescent())).replace("version=1", "version=9");
    match read_flow::<f64>(text.as_bytes()) {
        Err(Error::Version { found, .. }) => assert_eq!(found, "9"),
        other => panic!("{other:?}"),
    }
}

proptest! {
    #[test]
    fn snapshots_round_trip_through_bytes(seed in 0u64..1000, k_max in 2u32..9) {
        let flow = generate_snapshot(&SpectrumSpec::kolmogorov(1, k_max, seed)).unwrap();
        let back = read_flow::<f64>(&write_flow(&flow)).unwrap();
        prop_assert_eq!(back, flow);
    }

    #[test]
    fn trace_is_zero_everywhere(x in -20.0f64..20.0, y in -20.0f64..20.0, t in 0.0f64..40.0) {
        let flow = generate_unsteady(&SpectrumSpec::kolmogorov(1, 5, 9), 1.0).unwrap();
        prop_assert_eq!(flow.sample(Vec2::new(x, y), t).gradient.trace(), 0.0);
    }
}

