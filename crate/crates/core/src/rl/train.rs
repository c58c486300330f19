use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::policy::{softmax_into, PolicyParams};
use super::reward::{reward_step, RewardConfig};
use super::tiles::{ActionSet, TileCoder};
use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::geom::Vec2;
use crate::navigator::{run_episode, Control, Controller, EpisodeConfig, EpisodeGeometry, StepFeedback, Trajectory};
use crate::scalar::Scalar;

/// Learned parameters together with the state and action encodings they
/// were trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy<T> {
    pub coder: TileCoder<T>,
    pub actions: ActionSet<T>,
    pub params: PolicyParams<T>,
}

impl<T: Scalar> Policy<T> {
    /// Uniform random policy.
    pub fn untrained(coder: TileCoder<T>, actions: ActionSet<T>) -> Self {
        let params = PolicyParams::zeros(coder.n_states(), actions.n_actions());
        Self { coder, actions, params }
    }

    pub fn validate(&self) -> Result<()> {
        self.coder.validate()?;
        if self.params.n_states() != self.coder.n_states() {
            return Err(Error::param(
                "policy",
                format!(
                    "{} preference rows for a coder with {} tiles",
                    self.params.n_states(),
                    self.coder.n_states()
                ),
            ));
        }
        if self.params.n_actions() != self.actions.n_actions() {
            return Err(Error::param(
                "policy",
                format!(
                    "{} preference columns for {} actions",
                    self.params.n_actions(),
                    self.actions.n_actions()
                ),
            ));
        }
        Ok(())
    }

    /// Greedy action in the tile containing `x`.
    pub fn greedy_action(&self, x: Vec2<T>) -> usize {
        self.params.greedy(self.coder.state_of(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub actor_lr: T,
    pub critic_lr: T,
    pub n_episodes: usize,
    pub seed: u64,
    /// Scale both learning rates by `1/√n` in episode `n` (counting from 1).
    pub lr_decay: bool,
}

impl<T: Scalar> TrainConfig<T> {
    pub fn new(n_episodes: usize, seed: u64) -> Self {
        Self {
            actor_lr: T::lit(0.1),
            critic_lr: T::lit(0.1),
            n_episodes,
            seed,
            lr_decay: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, lr) in [("actor_lr", self.actor_lr), ("critic_lr", self.critic_lr)] {
            if !(lr > T::zero()) || !lr.is_finite() {
                return Err(Error::param(name, format!("must be > 0, got {lr}")));
            }
        }
        if self.n_episodes == 0 {
            return Err(Error::param("n_episodes", "must be >= 1"));
        }
        Ok(())
    }

    fn rates(&self, episode: usize) -> (T, T) {
        if self.lr_decay {
            let s = T::from_usize_lossy(episode + 1).sqrt();
            (self.actor_lr / s, self.critic_lr / s)
        } else {
            (self.actor_lr, self.critic_lr)
        }
    }
}

/// Per-episode training record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog<T> {
    pub episode: usize,
    pub total_reward: T,
    /// Arrival time, or the cutoff time for failed episodes.
    pub duration: T,
    pub power_on_time: T,
    pub reached: bool,
    /// Decisions taken while outside the tiled arena.
    pub clamped_decisions: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainLog<T> {
    pub episodes: Vec<EpisodeLog<T>>,
}

impl<T: Scalar> TrainLog<T> {
    pub fn clamped_decisions(&self) -> usize {
        self.episodes.iter().map(|e| e.clamped_decisions).sum()
    }

    /// Columns `episode,total_reward,T,T_pow,outcome,clamped_decisions`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["episode", "total_reward", "T", "T_pow", "outcome", "clamped_decisions"])?;
        for e in &self.episodes {
            w.write_record([
                e.episode.to_string(),
                e.total_reward.to_string(),
                e.duration.to_string(),
                e.power_on_time.to_string(),
                if e.reached { "reached" } else { "failed" }.to_string(),
                e.clamped_decisions.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Stochastic,
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_traj: usize,
    pub mode: EvalMode,
    pub seed: u64,
    /// Start every rollout at the centre of the start disc.
    pub fixed_start: bool,
}

impl EvalConfig {
    pub fn new(n_traj: usize, mode: EvalMode, seed: u64) -> Self {
        Self {
            n_traj,
            mode,
            seed,
            fixed_start: false,
        }
    }
}

fn sample_action<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, p) in probs.iter().enumerate() {
        acc += p.to_f64_lossy();
        if u < acc {
            return a;
        }
    }
    probs.len() - 1
}

fn episode_t0<T: Scalar, R: Rng + ?Sized>(flow: &FlowField<T>, rng: &mut R) -> T {
    match flow.time_period() {
        Some(p) => T::lit(rng.random_range(0.0..p.to_f64_lossy())),
        None => T::zero(),
    }
}

enum Params<'a, T> {
    ReadOnly(&'a PolicyParams<T>),
    Learning(&'a mut PolicyParams<T>, T, T),
}

struct Agent<'a, T, R> {
    params: Params<'a, T>,
    coder: &'a TileCoder<T>,
    reward: &'a RewardConfig<T>,
    target: Vec2<T>,
    rng: &'a mut R,
    mode: EvalMode,
    state: usize,
    clamped: usize,
    probs: Vec<T>,
}

impl<T: Scalar, R: Rng> Controller<T> for Agent<'_, T, R> {
    fn decide(&mut self, _t: T, position: Vec2<T>) -> usize {
        let (s, clamped) = self.coder.locate(position);
        self.state = s;
        self.clamped += usize::from(clamped);
        let params = match &self.params {
            Params::ReadOnly(p) => &**p,
            Params::Learning(p, ..) => &**p,
        };
        match self.mode {
            EvalMode::Greedy => params.greedy(s),
            EvalMode::Stochastic => {
                softmax_into(params.row(s), &mut self.probs);
                sample_action(&self.probs, self.rng)
            }
        }
    }

    fn feedback(&mut self, step: &StepFeedback<T>) -> T {
        let r = reward_step(
            self.target,
            step.prev_position,
            step.position,
            step.elapsed,
            step.engine_on,
            self.reward,
        );
        if let Params::Learning(params, actor_lr, critic_lr) = &mut self.params {
            // A timeout truncates the episode; only target entry is terminal.
            let s_next = self.coder.state_of(step.position);
            params.actor_critic_update(self.state, step.action, r, s_next, step.reached, *actor_lr, *critic_lr);
        }
        r
    }
}

fn check_inputs<T: Scalar>(
    policy: &Policy<T>,
    geometry: &EpisodeGeometry<T>,
    reward: &RewardConfig<T>,
    episode: &EpisodeConfig<T>,
) -> Result<Vec<Control<T>>> {
    policy.validate()?;
    geometry.validate()?;
    reward.validate()?;
    episode.validate()?;
    Ok(policy.actions.controls())
}

/// Trains a policy from scratch with one-step actor-critic.
///
/// Episodes run one after another from a single `ChaCha8` stream seeded by
/// `train.seed`, which draws the start point, the flow time offset (for
/// time-dependent flows) and every action, so the result is a pure function
/// of the inputs.
pub fn train<T: Scalar>(
    flow: &FlowField<T>,
    geometry: &EpisodeGeometry<T>,
    initial: Policy<T>,
    reward: &RewardConfig<T>,
    episode: &EpisodeConfig<T>,
    train: &TrainConfig<T>,
) -> Result<(Policy<T>, TrainLog<T>)> {
    train.validate()?;
    let controls = check_inputs(&initial, geometry, reward, episode)?;
    let Policy {
        coder,
        actions,
        mut params,
    } = initial;
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed);
    let mut log = TrainLog {
        episodes: Vec::with_capacity(train.n_episodes),
    };
    for n in 0..train.n_episodes {
        let start = geometry.sample_start(&mut rng);
        let t0 = episode_t0(flow, &mut rng);
        let (actor_lr, critic_lr) = train.rates(n);
        let mut agent = Agent {
            params: Params::Learning(&mut params, actor_lr, critic_lr),
            coder: &coder,
            reward,
            target: geometry.target,
            rng: &mut rng,
            mode: EvalMode::Stochastic,
            state: 0,
            clamped: 0,
            probs: vec![T::zero(); controls.len()],
        };
        let traj = run_episode(flow, &mut agent, &controls, geometry, episode, start, t0)?;
        let clamped = agent.clamped;
        log.episodes.push(EpisodeLog {
            episode: n,
            total_reward: traj.total_reward(),
            duration: traj.duration(),
            power_on_time: traj.power_on_time,
            reached: traj.reached(),
            clamped_decisions: clamped,
        });
    }
    Ok((Policy { coder, actions, params }, log))
}

/// Rolls out `cfg.n_traj` episodes without learning. Rollout `i` draws its
/// start point, flow time offset and actions from a generator seeded with
/// `cfg.seed + i`, so results do not depend on scheduling.
pub fn evaluate<T: Scalar>(
    flow: &FlowField<T>,
    policy: &Policy<T>,
    geometry: &EpisodeGeometry<T>,
    reward: &RewardConfig<T>,
    episode: &EpisodeConfig<T>,
    cfg: &EvalConfig,
) -> Result<Vec<Trajectory<T>>> {
    let controls = check_inputs(policy, geometry, reward, episode)?;
    (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
            let start = if cfg.fixed_start {
                geometry.start
            } else {
                geometry.sample_start(&mut rng)
            };
            let t0 = episode_t0(flow, &mut rng);
            let mut agent = Agent {
                params: Params::ReadOnly(&policy.params),
                coder: &policy.coder,
                reward,
                target: geometry.target,
                rng: &mut rng,
                mode: cfg.mode,
                state: 0,
                clamped: 0,
                probs: vec![T::zero(); controls.len()],
            };
            run_episode(flow, &mut agent, &controls, geometry, episode, start, t0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiescent_setup() -> (FlowField<f64>, EpisodeGeometry<f64>, Policy<f64>, EpisodeConfig<f64>) {
        let flow = FlowField::quiescent();
        let geometry = EpisodeGeometry::new(Vec2::new(2.5, 7.5), Vec2::new(12.5, 7.5), 0.5, 0.5, 1.0).unwrap();
        let coder = TileCoder::new(Vec2::new(0.0, 0.0), 1.0, 15, 15).unwrap();
        let policy = Policy::untrained(coder, ActionSet::compass(false));
        (flow, geometry, policy, EpisodeConfig::new(0.5))
    }

    fn reward(lambda: f64) -> RewardConfig<f64> {
        RewardConfig {
            lambda,
            nominal_speed: 1.0,
        }
    }

    #[test]
    fn same_seed_same_log() {
        let (flow, geometry, policy, ep) = quiescent_setup();
        let cfg = TrainConfig::new(30, 11);
        let a = train(&flow, &geometry, policy.clone(), &reward(0.0), &ep, &cfg).unwrap();
        let b = train(&flow, &geometry, policy, &reward(0.0), &ep, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.episodes.len(), 30);
    }

    #[test]
    fn learns_quiescent_crossing() {
        let (flow, geometry, policy, ep) = quiescent_setup();
        let cfg = TrainConfig::new(400, 3);
        let (trained, log) = train(&flow, &geometry, policy, &reward(0.0), &ep, &cfg).unwrap();
        assert!(log.episodes.iter().all(|e| e.total_reward.is_finite()));
        let eval = EvalConfig {
            fixed_start: true,
            ..EvalConfig::new(1, EvalMode::Greedy, 0)
        };
        let t = evaluate(&flow, &trained, &geometry, &reward(0.0), &ep, &eval).unwrap();
        let tf = geometry.free_flight_time();
        assert!(t[0].reached());
        assert!(t[0].duration() <= 1.5 * tf, "{} vs {}", t[0].duration(), tf);
    }

    #[test]
    fn evaluation_is_read_only_and_seeded() {
        let (flow, geometry, policy, ep) = quiescent_setup();
        let snapshot = policy.clone();
        let a = evaluate(&flow, &policy, &geometry, &reward(2.0), &ep, &EvalConfig::new(4, EvalMode::Stochastic, 1)).unwrap();
        let b = evaluate(&flow, &policy, &geometry, &reward(2.0), &ep, &EvalConfig::new(4, EvalMode::Stochastic, 2)).unwrap();
        assert_ne!(a, b);
        assert_eq!(policy, snapshot);
        assert!(evaluate(&flow, &policy, &geometry, &reward(2.0), &ep, &EvalConfig::new(0, EvalMode::Greedy, 1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rewards_telescope() {
        let (flow, geometry, policy, ep) = quiescent_setup();
        let mut policy = policy;
        policy.actions = ActionSet::compass(true);
        policy.params = PolicyParams::zeros(policy.coder.n_states(), 9);
        for lambda in [0.0, 2.0, 6.0] {
            let trajs = evaluate(&flow, &policy, &geometry, &reward(lambda), &ep, &EvalConfig::new(5, EvalMode::Stochastic, 9)).unwrap();
            for t in trajs {
                let expected = -(t.duration() + lambda * t.power_on_time)
                    + (geometry.target.distance(t.start_position()) - geometry.target.distance(t.final_position()));
                assert!((t.total_reward() - expected).abs() <= 1e-9 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rejects_mismatched_policy() {
        let (flow, geometry, mut policy, ep) = quiescent_setup();
        policy.actions = ActionSet::compass(true);
        assert!(train(&flow, &geometry, policy, &reward(0.0), &ep, &TrainConfig::new(1, 0)).is_err());
    }
}
