//! Optimal navigation: the steering angle evolves along the trajectory as
//! `θ̇ = A21 sin²θ - A12 cos²θ + (A11 - A22) cosθ sinθ`, with `A` the local
//! velocity gradient. Shooting scans initial headings (and start points) for
//! the fastest arrival.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{normalize_angle, target_crossing, EpisodeGeometry, Outcome, Record, Trajectory, TrajectorySample, VesselState};
use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::geom::{Mat2, Vec2};
use crate::scalar::Scalar;

/// Angular rate of the optimal heading for velocity gradient `a`.
#[inline]
pub fn on_rhs<T: Scalar>(a: &Mat2<T>, theta: T) -> T {
    let (s, c) = theta.sin_cos();
    a.a21() * s * s - a.a12() * c * c + (a.a11() - a.a22()) * c * s
}

#[inline]
fn on_derivative<T: Scalar>(flow: &FlowField<T>, x: Vec2<T>, theta: T, speed: T, t: T) -> (Vec2<T>, T) {
    let s = flow.sample(x, t);
    (s.velocity + Vec2::from_angle(theta) * speed, on_rhs(&s.gradient, theta))
}

/// RK4 step of the coupled `(X, θ)` system.
#[inline]
fn on_step<T: Scalar>(flow: &FlowField<T>, x: Vec2<T>, theta: T, speed: T, t: T, dt: T) -> (Vec2<T>, T) {
    let half = dt * T::lit(0.5);
    let (k1x, k1t) = on_derivative(flow, x, theta, speed, t);
    let (k2x, k2t) = on_derivative(flow, x + k1x * half, theta + k1t * half, speed, t + half);
    let (k3x, k3t) = on_derivative(flow, x + k2x * half, theta + k2t * half, speed, t + half);
    let (k4x, k4t) = on_derivative(flow, x + k3x * dt, theta + k3t * dt, speed, t + dt);
    let two = T::lit(2.0);
    let w = dt / T::lit(6.0);
    (
        x + (k1x + k2x * two + k3x * two + k4x) * w,
        theta + (k1t + k2t * two + k3t * two + k4t) * w,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnPathPoint<T> {
    pub t: T,
    pub position: Vec2<T>,
    /// Unwrapped heading.
    pub heading: T,
}

/// Integrates the optimal-navigation system for `steps` steps of `dt`,
/// ignoring any target. Flow time starts at `t0`; returned times are
/// relative to it.
pub fn on_path<T: Scalar>(
    flow: &FlowField<T>,
    x0: Vec2<T>,
    theta0: T,
    speed: T,
    dt: T,
    steps: usize,
    t0: T,
) -> Vec<OnPathPoint<T>> {
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut theta) = (x0, theta0);
    out.push(OnPathPoint {
        t: T::zero(),
        position: x,
        heading: theta,
    });
    for i in 0..steps {
        let t = T::from_usize_lossy(i) * dt;
        (x, theta) = on_step(flow, x, theta, speed, t0 + t, dt);
        out.push(OnPathPoint {
            t: T::from_usize_lossy(i + 1) * dt,
            position: x,
            heading: theta,
        });
    }
    out
}

/// Integrates one optimal-navigation trajectory from `x0` with initial
/// heading `theta0`, engine always on, until the target disc is entered or
/// the cutoff `geometry.t_max` is reached.
///
/// Arrival time and position are linearly interpolated within the final
/// step. Flow time starts at zero.
pub fn integrate_on<T: Scalar>(
    flow: &FlowField<T>,
    x0: Vec2<T>,
    theta0: T,
    geometry: &EpisodeGeometry<T>,
    dt: T,
    record: Record,
) -> Result<Trajectory<T>> {
    if !(dt > T::zero()) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let sample = |t: T, x: Vec2<T>, theta: T| TrajectorySample {
        t,
        state: VesselState::new(x, theta, true),
        action: None,
        reward: T::zero(),
    };
    let mut samples = vec![sample(T::zero(), x0, theta0)];
    let (mut x, mut theta, mut t) = (x0, theta0, T::zero());
    let mut step = 0usize;
    let outcome = loop {
        let remaining = geometry.t_max - t;
        let last = remaining <= dt;
        let h = if last { remaining } else { dt };
        let (nx, ntheta) = on_step(flow, x, theta, geometry.speed, t, h);
        if let Some((frac, p)) = target_crossing(geometry, x, nx) {
            let arrival = t + h * frac;
            let heading = theta + (ntheta - theta) * frac;
            samples.push(sample(arrival, p, heading));
            break Outcome::Reached { arrival_time: arrival };
        }
        step += 1;
        t = if last { geometry.t_max } else { t + h };
        x = nx;
        theta = ntheta;
        if last {
            samples.push(sample(t, x, theta));
            break Outcome::Failed;
        }
        if record.keeps(step) {
            samples.push(sample(t, x, theta));
        }
    };
    let power_on_time = samples.last().map_or(T::zero(), |s| s.t);
    Ok(Trajectory {
        samples,
        outcome,
        power_on_time,
        flow_time_offset: T::zero(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingConfig<T> {
    pub n_angles: usize,
    pub n_starts: usize,
    pub dt: T,
    pub seed: u64,
    /// Launch every trajectory from the disc centre instead of sampling
    /// the start disc.
    pub start_at_center: bool,
    pub record: Record,
}

impl<T: Scalar> ShootingConfig<T> {
    /// 100 headings from each of 200 starts, 20000 trajectories in all.
    pub fn new(dt: T, seed: u64) -> Self {
        Self {
            n_angles: 100,
            n_starts: 200,
            dt,
            seed,
            start_at_center: false,
            record: Record::Endpoints,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shooting<T> {
    /// Start-major: trajectory `i` launches from start `i / n_angles` with
    /// heading index `i % n_angles`.
    pub trajectories: Vec<Trajectory<T>>,
    pub initial_headings: Vec<T>,
    /// Index of the fastest arriving trajectory, if any arrived.
    pub best: Option<usize>,
}

impl<T: Scalar> Shooting<T> {
    pub fn best_trajectory(&self) -> Option<&Trajectory<T>> {
        self.best.map(|i| &self.trajectories[i])
    }

    /// Initial heading of trajectory `i`.
    pub fn heading_of(&self, i: usize) -> T {
        self.initial_headings[i % self.initial_headings.len()]
    }

    pub fn total_failure(&self) -> bool {
        self.best.is_none()
    }

    pub fn failure_rate(&self) -> f64 {
        if self.trajectories.is_empty() {
            return 0.0;
        }
        let failed = self.trajectories.iter().filter(|t| !t.reached()).count();
        failed as f64 / self.trajectories.len() as f64
    }
}

/// Launches `n_starts × n_angles` optimal-navigation trajectories, headings
/// evenly spaced on `[0, 2π)`, starts uniform in the start disc (seeded per
/// start index).
pub fn on_shooting<T: Scalar>(
    flow: &FlowField<T>,
    geometry: &EpisodeGeometry<T>,
    cfg: &ShootingConfig<T>,
) -> Result<Shooting<T>> {
    if cfg.n_angles == 0 || cfg.n_starts == 0 {
        return Err(Error::param("n_angles/n_starts", "both must be >= 1"));
    }
    geometry.validate()?;
    let starts: Vec<Vec2<T>> = (0..cfg.n_starts)
        .map(|i| {
            if cfg.start_at_center {
                geometry.start
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                geometry.sample_start(&mut rng)
            }
        })
        .collect();
    let headings: Vec<T> = (0..cfg.n_angles)
        .map(|j| normalize_angle(T::two_pi() * T::from_usize_lossy(j) / T::from_usize_lossy(cfg.n_angles)))
        .collect();
    let trajectories = (0..cfg.n_starts * cfg.n_angles)
        .into_par_iter()
        .map(|i| {
            integrate_on(flow, starts[i / cfg.n_angles], headings[i % cfg.n_angles], geometry, cfg.dt, cfg.record)
        })
        .collect::<Result<Vec<_>>>()?;
    let best = trajectories
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.arrival_time().map(|a| (i, a)))
        .fold(None, |best: Option<(usize, T)>, (i, a)| match best {
            Some((_, b)) if b <= a => best,
            _ => Some((i, a)),
        })
        .map(|(i, _)| i);
    Ok(Shooting {
        trajectories,
        initial_headings: headings,
        best,
    })
}
