//! Tabular one-step actor-critic navigation on a tiled arena.

mod io;
mod policy;
mod reward;
mod tiles;
mod train;

pub use io::{load_policy, read_policy, save_policy, write_policy, POLICY_FORMAT, POLICY_VERSION};
pub use policy::{policy_probs, PolicyParams};
pub use reward::{reward_step, RewardConfig};
pub use tiles::{ActionSet, TileCoder};
pub use train::{evaluate, train, EpisodeLog, EvalConfig, EvalMode, Policy, TrainConfig, TrainLog};
