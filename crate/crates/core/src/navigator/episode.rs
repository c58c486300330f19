//! Decision-interval episodes: every `Δt` the controller picks an action from
//! a fixed table, which is then held for `Δt` while the dynamics are
//! integrated with RK4 substeps of `dt`.

use serde::{Deserialize, Serialize};

use super::dynamics::{propulsion, rk4_position};
use super::{target_crossing, Control, EpisodeGeometry, Outcome, Trajectory, TrajectorySample, VesselState};
use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::geom::Vec2;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig<T> {
    /// Decision interval `Δt`.
    pub decision_interval: T,
    /// Integration substeps per decision interval (`Δt / dt`).
    pub substeps: usize,
    /// Record every integration substep rather than decision epochs only.
    pub record_substeps: bool,
}

impl<T: Scalar> EpisodeConfig<T> {
    /// Ten RK4 substeps per decision.
    pub fn new(decision_interval: T) -> Self {
        Self {
            decision_interval,
            substeps: 10,
            record_substeps: false,
        }
    }

    pub fn dt(&self) -> T {
        self.decision_interval / T::from_usize_lossy(self.substeps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decision_interval > T::zero()) || !self.decision_interval.is_finite() {
            return Err(Error::param(
                "decision_interval",
                format!("must be > 0, got {}", self.decision_interval),
            ));
        }
        if self.substeps == 0 {
            return Err(Error::param("substeps", "must be >= 1"));
        }
        Ok(())
    }
}

/// What happened during one decision interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFeedback<T> {
    pub action: usize,
    pub prev_position: Vec2<T>,
    pub position: Vec2<T>,
    /// Episode time at the start of the interval.
    pub t_start: T,
    /// Length of the interval; shorter than `Δt` for the final one.
    pub elapsed: T,
    pub engine_on: bool,
    /// The target disc was entered during this interval.
    pub reached: bool,
    /// The cutoff time ended the episode at the end of this interval.
    pub timed_out: bool,
}

/// A source of actions for [`run_episode`].
pub trait Controller<T: Scalar> {
    /// Picks an action index at episode time `t` and position `position`.
    fn decide(&mut self, t: T, position: Vec2<T>) -> usize;

    /// Called after every decision interval; the return value is recorded as
    /// that interval's reward.
    fn feedback(&mut self, _step: &StepFeedback<T>) -> T {
        T::zero()
    }
}

/// Always returns the same action.
#[derive(Debug, Clone, Copy)]
pub struct FixedController(pub usize);

impl<T: Scalar> Controller<T> for FixedController {
    fn decide(&mut self, _t: T, _position: Vec2<T>) -> usize {
        self.0
    }
}

impl<T: Scalar, F: FnMut(T, Vec2<T>) -> usize> Controller<T> for F {
    fn decide(&mut self, t: T, position: Vec2<T>) -> usize {
        self(t, position)
    }
}

/// Runs one episode from `start` with flow time offset `t0`.
///
/// Time-keeping: the episode duration is the sum of the elapsed interval
/// lengths, the last of which may be partial (target entry interpolated
/// within a substep, or the cutoff). Power-on time accumulates the elapsed
/// length of every interval whose action has the engine on.
pub fn run_episode<T: Scalar, C: Controller<T> + ?Sized>(
    flow: &FlowField<T>,
    controller: &mut C,
    actions: &[Control<T>],
    geometry: &EpisodeGeometry<T>,
    cfg: &EpisodeConfig<T>,
    start: Vec2<T>,
    t0: T,
) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let dt = cfg.dt();
    let mut x = start;
    let mut t = T::zero();
    let mut heading = T::zero();
    let mut power_on_time = T::zero();
    let mut samples = vec![TrajectorySample {
        t,
        state: VesselState::new(x, heading, false),
        action: None,
        reward: T::zero(),
    }];
    loop {
        let id = controller.decide(t, x);
        let control = *actions.get(id).ok_or(Error::ActionOutOfRange {
            id,
            n_actions: actions.len(),
        })?;
        let engine_on = control.engine_on();
        if let Control::Steer(theta) = control {
            heading = theta;
        }
        {
            let first = samples.last_mut().expect("non-empty");
            first.action = Some(id);
            first.state = VesselState::new(first.state.position, heading, engine_on);
        }
        let push = propulsion(control, geometry.speed);
        let remaining = geometry.t_max - t;
        let final_interval = remaining <= cfg.decision_interval;
        let interval = if final_interval { remaining } else { cfg.decision_interval };
        let n_steps = if final_interval {
            (interval / dt).ceil().to_usize().unwrap_or(1).max(1)
        } else {
            cfg.substeps
        };

        let prev = x;
        let mut elapsed = T::zero();
        let mut reached = false;
        for k in 0..n_steps {
            let h = if k + 1 == n_steps {
                interval - dt * T::from_usize_lossy(k)
            } else {
                dt
            };
            let nx = rk4_position(flow, x, push, t0 + t + elapsed, h);
            if let Some((frac, p)) = target_crossing(geometry, x, nx) {
                elapsed += h * frac;
                x = p;
                reached = true;
                break;
            }
            elapsed += h;
            x = nx;
            if cfg.record_substeps && k + 1 < n_steps {
                samples.push(TrajectorySample {
                    t: t + elapsed,
                    state: VesselState::new(x, heading, engine_on),
                    action: Some(id),
                    reward: T::zero(),
                });
            }
        }
        if !reached {
            elapsed = interval;
        }
        let timed_out = !reached && final_interval;
        let t_start = t;
        t += elapsed;
        if engine_on {
            power_on_time += elapsed;
        }
        let reward = controller.feedback(&StepFeedback {
            action: id,
            prev_position: prev,
            position: x,
            t_start,
            elapsed,
            engine_on,
            reached,
            timed_out,
        });
        samples.push(TrajectorySample {
            t,
            state: VesselState::new(x, heading, engine_on),
            action: None,
            reward,
        });
        if reached || timed_out {
            let outcome = if reached {
                Outcome::Reached { arrival_time: t }
            } else {
                Outcome::Failed
            };
            return Ok(Trajectory {
                samples,
                outcome,
                power_on_time,
                flow_time_offset: t0,
            });
        }
    }
}
