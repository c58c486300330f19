//! Time- and energy-optimal point-to-point navigation of a self-propelled
//! vessel in two-dimensional turbulent flows.
//!
//! The crate provides periodic divergence-free flows ([`flowfield`]), vessel
//! dynamics and deterministic optimal-navigation steering ([`navigator`]),
//! tabular actor-critic learning with time and energy rewards ([`rl`]) and
//! ensemble statistics ([`stats`]).
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

mod container;
pub mod error;
pub mod flowfield;
pub mod geom;
pub mod navigator;
pub mod rl;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Vec2 = geom::Vec2<f64>;
pub type Mat2 = geom::Mat2<f64>;
pub type FlowField = flowfield::FlowField<f64>;
pub type FlowSample = flowfield::FlowSample<f64>;
pub type SpectrumSpec = flowfield::SpectrumSpec<f64>;
pub type FourierMode = flowfield::FourierMode<f64>;
pub type EpisodeGeometry = navigator::EpisodeGeometry<f64>;
pub type EpisodeConfig = navigator::EpisodeConfig<f64>;
pub type Trajectory = navigator::Trajectory<f64>;
pub type ShootingConfig = navigator::ShootingConfig<f64>;
pub type TileCoder = rl::TileCoder<f64>;
pub type ActionSet = rl::ActionSet<f64>;
pub type PolicyParams = rl::PolicyParams<f64>;
pub type Policy = rl::Policy<f64>;
pub type RewardConfig = rl::RewardConfig<f64>;
pub type TrainConfig = rl::TrainConfig<f64>;
pub type TrainLog = rl::TrainLog<f64>;
pub type SensitivityConfig = stats::SensitivityConfig<f64>;
