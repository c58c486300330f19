//! Vessel dynamics `Ẋ = u(X, t) + V_s n(θ)`, deterministic optimal-navigation
//! steering, and episode execution under arbitrary controllers.

mod dynamics;
mod episode;
mod export;
mod on;

pub use dynamics::{advect_tracer, step_vessel};
pub use episode::{run_episode, Controller, EpisodeConfig, FixedController, StepFeedback};
pub use export::{write_outcomes_csv, write_trajectories_csv};
pub use on::{integrate_on, on_path, on_rhs, on_shooting, OnPathPoint, Shooting, ShootingConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scalar::Scalar;

/// Default failure cutoff in units of the free-flight time.
pub const DEFAULT_T_MAX_FACTOR: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState<T> {
    pub position: Vec2<T>,
    /// Steering angle in `[0, 2π)`.
    pub heading: T,
    pub engine_on: bool,
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle<T: Scalar>(theta: T) -> T {
    let tau = T::two_pi();
    let r = theta.rem_euclid(&tau);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

impl<T: Scalar> VesselState<T> {
    pub fn new(position: Vec2<T>, heading: T, engine_on: bool) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            engine_on,
        }
    }
}

/// What the vessel does during one control interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Control<T> {
    /// Engine on, steering at this angle.
    Steer(T),
    /// Engine off: the vessel drifts with the flow.
    Off,
}

impl<T: Scalar> Control<T> {
    pub fn engine_on(&self) -> bool {
        matches!(self, Control::Steer(_))
    }
}

/// Start disc, target disc, propulsion speed and failure cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeGeometry<T> {
    pub start: Vec2<T>,
    pub target: Vec2<T>,
    pub start_radius: T,
    pub target_radius: T,
    pub t_max: T,
    /// Propulsion speed `V_s`.
    pub speed: T,
}

impl<T: Scalar> EpisodeGeometry<T> {
    /// Geometry with the default cutoff of 20 free-flight times.
    pub fn new(start: Vec2<T>, target: Vec2<T>, start_radius: T, target_radius: T, speed: T) -> Result<Self> {
        let t_free = start.distance(target) / speed;
        let g = Self {
            start,
            target,
            start_radius,
            target_radius,
            t_max: t_free * T::lit(DEFAULT_T_MAX_FACTOR),
            speed,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_t_max(mut self, t_max: T) -> Result<Self> {
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.start.is_finite() && self.target.is_finite();
        if !finite {
            return Err(Error::param("start/target", "must be finite"));
        }
        if !(self.start_radius >= T::zero()) {
            return Err(Error::param("start_radius", format!("must be >= 0, got {}", self.start_radius)));
        }
        if !(self.target_radius > T::zero()) {
            return Err(Error::param("target_radius", format!("must be > 0, got {}", self.target_radius)));
        }
        if !(self.t_max > T::zero()) || !self.t_max.is_finite() {
            return Err(Error::param("t_max", format!("must be > 0, got {}", self.t_max)));
        }
        if !(self.speed > T::zero()) || !self.speed.is_finite() {
            return Err(Error::param("speed", format!("must be > 0, got {}", self.speed)));
        }
        if !(self.start.distance(self.target) > self.start_radius + self.target_radius) {
            return Err(Error::param("start/target", "start and target discs overlap"));
        }
        Ok(())
    }

    /// `|x_B - x_A| / V_s`.
    pub fn free_flight_time(&self) -> T {
        self.start.distance(self.target) / self.speed
    }

    pub fn in_target(&self, x: Vec2<T>) -> bool {
        x.distance(self.target) <= self.target_radius
    }

    /// Uniform sample from the start disc.
    pub fn sample_start<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2<T> {
        let r = self.start_radius.to_f64_lossy() * rng.random::<f64>().sqrt();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        self.start + Vec2::new(T::lit(r * phi.cos()), T::lit(r * phi.sin()))
    }
}

/// `|x_B - x_A| / V_s`.
pub fn free_flight_time<T: Scalar>(geometry: &EpisodeGeometry<T>) -> T {
    geometry.free_flight_time()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Outcome<T> {
    Reached { arrival_time: T },
    Failed,
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample<T> {
    /// Time since the start of the episode.
    pub t: T,
    pub state: VesselState<T>,
    /// Action in effect from this sample onwards; `None` for the final
    /// sample and for controllers without discrete actions.
    pub action: Option<usize>,
    /// Reward of the control interval that ends at this sample.
    pub reward: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub samples: Vec<TrajectorySample<T>>,
    pub outcome: Outcome<T>,
    /// Accumulated time with the engine on.
    pub power_on_time: T,
    /// Flow time at which the episode started.
    pub flow_time_offset: T,
}

impl<T: Scalar> Trajectory<T> {
    pub fn reached(&self) -> bool {
        matches!(self.outcome, Outcome::Reached { .. })
    }

    pub fn arrival_time(&self) -> Option<T> {
        match self.outcome {
            Outcome::Reached { arrival_time } => Some(arrival_time),
            Outcome::Failed => None,
        }
    }

    /// Time of the last sample.
    pub fn duration(&self) -> T {
        self.samples.last().map_or(T::zero(), |s| s.t)
    }

    pub fn start_position(&self) -> Vec2<T> {
        self.samples.first().map_or(Vec2::zero(), |s| s.state.position)
    }

    pub fn final_position(&self) -> Vec2<T> {
        self.samples.last().map_or(Vec2::zero(), |s| s.state.position)
    }

    pub fn total_reward(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, s| acc + s.reward)
    }
}

/// Which integration steps a trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Record {
    /// Every `n`-th step, plus the first and last sample.
    Every(usize),
    /// First and last sample only.
    Endpoints,
}

impl Record {
    pub(crate) fn keeps(&self, step: usize) -> bool {
        match *self {
            Record::Every(n) => n > 0 && step % n == 0,
            Record::Endpoints => false,
        }
    }
}

/// First entry into the target disc along the straight segment `a → b`.
///
/// Returns the step fraction of the entry point and the point itself, or
/// `None` if the segment misses the disc. A segment starting inside the disc
/// enters at fraction 0.
pub(crate) fn target_crossing<T: Scalar>(
    geometry: &EpisodeGeometry<T>,
    a: Vec2<T>,
    b: Vec2<T>,
) -> Option<(T, Vec2<T>)> {
    let r = geometry.target_radius;
    let f = a - geometry.target;
    let c = f.dot(f) - r * r;
    if c <= T::zero() {
        return Some((T::zero(), a));
    }
    let d = b - a;
    let qa = d.dot(d);
    let qb = f.dot(d);
    if qa == T::zero() || qb >= T::zero() {
        return None;
    }
    // |f + s d|² = r² has roots s = (-qb ± sqrt(qb² - qa c)) / qa
    let disc = qb * qb - qa * c;
    if disc < T::zero() {
        return None;
    }
    // the smaller root, written to avoid cancellation
    let s = c / (-qb + disc.sqrt());
    if s > T::one() {
        return None;
    }
    let s = s.max(T::zero());
    Some((s, a + d * s))
}
