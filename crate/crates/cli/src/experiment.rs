//! Turns a validated config into the core objects it describes.

use znav_core::flowfield::{generate_snapshot, generate_unsteady, import_flow, FlowField, SpectrumSpec};
use znav_core::geom::Vec2;
use znav_core::navigator::{EpisodeConfig, EpisodeGeometry, Record, ShootingConfig};
use znav_core::rl::{ActionSet, EvalConfig, Policy, RewardConfig, TileCoder, TrainConfig};
use znav_core::stats::Bounds;

use crate::config::{ExperimentConfig, FlowKindName, FlowSection};
use crate::error::{CliError, Result};

/// Spectrum parameters of a generated flow, after speed normalization.
pub fn spectrum_spec(f: &FlowSection) -> Result<SpectrumSpec<f64>> {
    let mut spec = SpectrumSpec {
        k_min: f.k_min,
        k_max: f.k_max,
        slope: f.slope,
        energy_scale: f.energy_scale,
        seed: f.seed,
        period: f.period,
    };
    if let Some(target) = f.normalize_u_max {
        let u = generate_snapshot(&spec)?.u_max(0.0);
        if !(u > 0.0) {
            return Err(CliError::field("flow.normalize_u_max", "flow has zero speed"));
        }
        spec.energy_scale *= (target / u).powi(2);
    }
    Ok(spec)
}

pub fn build_flow(f: &FlowSection) -> Result<FlowField<f64>> {
    Ok(match f.kind {
        FlowKindName::Import => import_flow(f.path.as_ref().expect("validated"))?,
        FlowKindName::Quiescent => FlowField::quiescent(),
        FlowKindName::Uniform => FlowField::uniform(Vec2::new(f.velocity[0], f.velocity[1])),
        FlowKindName::TaylorGreen => FlowField::taylor_green(f.amplitude),
        FlowKindName::Spectrum => {
            let spec = spectrum_spec(f)?;
            if f.unsteady {
                generate_unsteady(&spec, f.decorrelation_time)?
            } else {
                generate_snapshot(&spec)?
            }
        }
    })
}

/// Everything needed to run episodes of one experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub flow: FlowField<f64>,
    pub u_max: f64,
    pub geometry: EpisodeGeometry<f64>,
    pub coder: TileCoder<f64>,
    pub actions: ActionSet<f64>,
    pub reward: RewardConfig<f64>,
    pub episode: EpisodeConfig<f64>,
}

impl Experiment {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        Self::with_flow(cfg, build_flow(&cfg.flow)?)
    }

    /// Propulsion speed is `v_s_ratio · u_max` at `t = 0` unless
    /// `geometry.v_s` gives it directly.
    pub fn with_flow(cfg: &ExperimentConfig, flow: FlowField<f64>) -> Result<Self> {
        let u_max = flow.u_max(0.0);
        let g = &cfg.geometry;
        let speed = match g.v_s {
            Some(v) => v,
            None if u_max > 0.0 => g.v_s_ratio * u_max,
            None => {
                return Err(CliError::field(
                    "geometry.v_s",
                    "the flow has zero maximum speed, so the propulsion speed must be given explicitly",
                ))
            }
        };
        let geometry = EpisodeGeometry::new(
            Vec2::new(g.x_a[0], g.x_a[1]),
            Vec2::new(g.x_b[0], g.x_b[1]),
            g.d_a,
            g.d_b,
            speed,
        )?;
        let t_free = geometry.free_flight_time();
        let geometry = geometry.with_t_max(g.t_max_factor * t_free)?;
        let r = &cfg.rl;
        let coder = TileCoder::new(Vec2::new(r.origin[0], r.origin[1]), r.tile_size, r.tiles[0], r.tiles[1])?;
        let reward = RewardConfig {
            lambda: r.lambda,
            nominal_speed: speed,
        };
        reward.validate()?;
        let episode = EpisodeConfig {
            decision_interval: r.decision_interval,
            substeps: r.substeps,
            record_substeps: false,
        };
        Ok(Self {
            flow,
            u_max,
            geometry,
            coder,
            actions: ActionSet::compass(r.include_off),
            reward,
            episode,
        })
    }

    pub fn t_free(&self) -> f64 {
        self.geometry.free_flight_time()
    }

    pub fn untrained_policy(&self) -> Policy<f64> {
        Policy::untrained(self.coder, self.actions.clone())
    }

    /// Occupancy pixel and bounds: half a tile over the tiled arena unless
    /// configured.
    pub fn occupancy_layout(&self, cfg: &ExperimentConfig) -> Result<(f64, Bounds)> {
        let pixel = cfg.occupancy.pixel.unwrap_or(0.5 * self.coder.tile_size);
        let b = match cfg.occupancy.bounds {
            Some(b) => b,
            None => {
                let hi = self.coder.extent();
                [self.coder.origin.x, self.coder.origin.y, hi.x, hi.y]
            }
        };
        Ok((pixel, Bounds::new(b[0], b[1], b[2], b[3])?))
    }
}

pub fn train_config(cfg: &ExperimentConfig) -> TrainConfig<f64> {
    let r = &cfg.rl;
    TrainConfig {
        actor_lr: r.actor_lr,
        critic_lr: r.critic_lr,
        n_episodes: r.n_episodes,
        seed: r.seed,
        lr_decay: r.lr_decay,
    }
}

pub fn eval_config(cfg: &ExperimentConfig) -> EvalConfig {
    let e = &cfg.eval;
    EvalConfig {
        n_traj: e.n_traj,
        mode: e.mode,
        seed: e.seed,
        fixed_start: e.fixed_start,
    }
}

pub fn shooting_config(cfg: &ExperimentConfig) -> ShootingConfig<f64> {
    let o = &cfg.on;
    ShootingConfig {
        n_angles: o.n_angles,
        n_starts: o.n_starts,
        dt: o.dt,
        seed: o.seed,
        start_at_center: o.start_at_center,
        record: Record::Every(o.record_stride),
    }
}
